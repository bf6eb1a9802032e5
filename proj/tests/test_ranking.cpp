#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <rankrec/ranking.hpp>

using namespace rankrec;

namespace {

ClusterState table_one_rows() {
    // Four visible loads of a seven-node cluster, ids 4..7.
    return ClusterState(std::vector<ComputeNode>{{NodeId{4}, 245, NodeStatus::alive, {}},
                                                 {NodeId{5}, 900, NodeStatus::alive, {}},
                                                 {NodeId{6}, 137, NodeStatus::alive, {}},
                                                 {NodeId{7}, 239, NodeStatus::alive, {}}});
}

void expect_well_formed(RankTable const & t) {
    auto const e = t.entries();
    for (std::size_t i = 0; i < e.size(); ++i) {
        ASSERT_EQ(e[i].rank, i + 1);
        if (i > 0) {
            ASSERT_TRUE(e[i - 1].load < e[i].load || (e[i - 1].load == e[i].load && e[i - 1].node < e[i].node));
        }
    }
}

} // namespace

TEST(Ranking, OrdersTableOneRowsByLoad) {
    auto const t = build_rank_table(table_one_rows());
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t.at_rank(1).node, NodeId{6});
    EXPECT_EQ(t.at_rank(2).node, NodeId{7});
    EXPECT_EQ(t.at_rank(3).node, NodeId{4});
    EXPECT_EQ(t.at_rank(4).node, NodeId{5});
    EXPECT_EQ(t.last().node, NodeId{5});
    EXPECT_EQ(get_least_rank_node(t), NodeId{6});
}

TEST(Ranking, SingleNodeIsBothFirstAndLast) {
    auto const t = build_rank_table(ClusterState(std::vector<Load>{7}));
    EXPECT_EQ(t.size(), 1u);
    EXPECT_EQ(t.at_rank(1).node, t.last().node);
    EXPECT_EQ(get_least_rank_node(t), NodeId{0});
}

TEST(Ranking, TiesBreakByAscendingId) {
    auto const t = build_rank_table(ClusterState({5, 5, 5}));
    EXPECT_EQ(t.at_rank(1).node, NodeId{0});
    EXPECT_EQ(t.at_rank(2).node, NodeId{1});
    EXPECT_EQ(t.at_rank(3).node, NodeId{2});
    EXPECT_EQ(get_least_rank_node(build_rank_table(ClusterState({9, 3, 3}))), NodeId{1});
}

TEST(Ranking, ExcludesFailedNodes) {
    auto s = mark_failed(ClusterState({1, 2, 3}), NodeId{0});
    auto const t = build_rank_table(s);
    ASSERT_EQ(t.size(), 2u);
    for (auto const & e : t.entries()) EXPECT_NE(e.node, NodeId{0});
}

TEST(Ranking, Errors) {
    auto s = mark_failed(ClusterState(std::vector<Load>{1}), NodeId{0});
    try {
        build_rank_table(s);
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::no_alive_nodes);
    }
    try {
        get_least_rank_node(RankTable{});
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::empty_table);
    }
    try {
        update_after_assignment(build_rank_table(ClusterState({1, 2})), NodeId{9}, 1);
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::unknown_node);
    }
}

TEST(Ranking, UpdateReordersAfterAssignment) {
    auto const t = update_after_assignment(build_rank_table(ClusterState({1, 2})), NodeId{0}, 5);
    EXPECT_EQ(t.at_rank(1).node, NodeId{1});
    EXPECT_EQ(t.at_rank(1).load, 2);
    EXPECT_EQ(t.at_rank(2).node, NodeId{0});
    EXPECT_EQ(t.at_rank(2).load, 6);
    EXPECT_EQ(t, build_rank_table(ClusterState({6, 2})));
}

TEST(Ranking, UpdatePreservingOrderKeepsOtherRanks) {
    auto const before = build_rank_table(ClusterState({1, 5, 9}));
    auto const after = update_after_assignment(before, NodeId{1}, 2);
    EXPECT_EQ(after.at_rank(1), before.at_rank(1));
    EXPECT_EQ(after.at_rank(3), before.at_rank(3));
    EXPECT_EQ(after.at_rank(2).load, 7);
}

TEST(Ranking, RepeatedUnitAssignmentsLevelRoundRobin) {
    std::vector<Load> loads{0, 0, 0, 0};
    auto table = build_rank_table(ClusterState(loads));
    for (int step = 0; step < 12; ++step) {
        NodeId const least = get_least_rank_node(table);
        EXPECT_EQ(least.value, static_cast<std::uint32_t>(step % 4));
        table = update_after_assignment(std::move(table), least, 1);
        loads[least.value] += 1;
        ASSERT_EQ(table, build_rank_table(ClusterState(loads)));
    }
}

TEST(Ranking, IncrementalUpdateMatchesRebuildOnRandomSequences) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Load> loads(1 + rng() % 16);
        for (auto & l : loads) l = static_cast<Load>(rng() % 50);
        auto table = build_rank_table(ClusterState(loads));
        for (int step = 0; step < 50; ++step) {
            NodeId const node{static_cast<std::uint32_t>(rng() % loads.size())};
            Load const delta = 1 + static_cast<Load>(rng() % 20);
            table = update_after_assignment(std::move(table), node, delta);
            loads[node.value] += delta;
            ASSERT_EQ(table, build_rank_table(ClusterState(loads)));
            expect_well_formed(table);
        }
    }
}

TEST(Ranking, IndependentOfInputNodeOrder) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ComputeNode> nodes;
        auto const n = 1 + rng() % 20;
        for (std::uint32_t i = 0; i < n; ++i) {
            nodes.push_back({NodeId{i * 3 + 1}, static_cast<Load>(rng() % 10), NodeStatus::alive, {}});
        }
        auto const reference = build_rank_table(ClusterState(nodes));
        std::shuffle(nodes.begin(), nodes.end(), rng);
        EXPECT_EQ(build_rank_table(ClusterState(nodes)), reference);
    }
}
