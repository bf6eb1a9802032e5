#include <gtest/gtest.h>

#include <random>

#include <rankrec/detection.hpp>

using namespace rankrec;

TEST(Detection, FreshHeartbeatIsNotSuspected) {
    HeartbeatLedger ledger(10, 3);
    ledger.register_node(NodeId{0});
    ledger.record_heartbeat(NodeId{0}, 50);
    EXPECT_FALSE(ledger.suspected(NodeId{0}, 50));
    EXPECT_TRUE(ledger.detect_failures(50).empty());
}

TEST(Detection, OutOfOrderHeartbeatIgnored) {
    HeartbeatLedger ledger(10, 3);
    ledger.register_node(NodeId{0});
    ledger.record_heartbeat(NodeId{0}, 40).record_heartbeat(NodeId{0}, 25);
    EXPECT_EQ(ledger.last_seen(NodeId{0}), 40);
}

TEST(Detection, StrictTimeoutBoundary) {
    HeartbeatLedger ledger(10, 3);
    ledger.register_node(NodeId{0}, 0);
    EXPECT_TRUE(ledger.detect_failures(30).empty());
    EXPECT_EQ(ledger.detect_failures(31), (std::vector<NodeId>{NodeId{0}}));
}

TEST(Detection, AllSeenNowIsEmpty) {
    HeartbeatLedger ledger;
    for (std::uint32_t i = 0; i < 5; ++i) {
        ledger.register_node(NodeId{i});
        ledger.record_heartbeat(NodeId{i}, 100);
    }
    EXPECT_TRUE(ledger.detect_failures(100).empty());
}

TEST(Detection, UnknownNode) {
    HeartbeatLedger ledger;
    try {
        ledger.record_heartbeat(NodeId{3}, 1);
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::unknown_node);
    }
}

TEST(Detection, HeartbeatFromFailedNodeDoesNotRevive) {
    // The ledger only tracks silence; membership lives in ClusterState.
    ClusterState state({5, 5});
    HeartbeatLedger ledger;
    ledger.register_node(NodeId{0});
    ledger.register_node(NodeId{1});
    state = mark_failed(std::move(state), NodeId{1});
    ledger.record_heartbeat(NodeId{1}, 45);
    EXPECT_EQ(ledger.last_seen(NodeId{1}), 45);
    EXPECT_FALSE(state.node(NodeId{1}).alive());
}

TEST(Detection, RejectsNonPositiveParameters) {
    EXPECT_THROW(HeartbeatLedger(0, 3), error);
    EXPECT_THROW(HeartbeatLedger(10, 0), error);
}

TEST(Detection, SuspicionIsMonotoneWithoutHeartbeats) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        Tick const period = 1 + static_cast<Tick>(rng() % 20);
        int const threshold = 1 + static_cast<int>(rng() % 5);
        HeartbeatLedger ledger(period, threshold);
        ledger.register_node(NodeId{0}, static_cast<Tick>(rng() % 100));
        bool was = false;
        for (Tick t = 0; t < 300; ++t) {
            bool const now = ledger.suspected(NodeId{0}, t);
            ASSERT_TRUE(!was || now);
            was = now;
        }
    }
}

TEST(Detection, TimelyHeartbeatsNeverSuspected) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        Tick const period = 1 + static_cast<Tick>(rng() % 20);
        int const threshold = 1 + static_cast<int>(rng() % 5);
        HeartbeatLedger ledger(period, threshold);
        ledger.register_node(NodeId{0}, 0);
        Tick next = static_cast<Tick>(rng() % static_cast<std::uint64_t>(period)) + 1;
        for (Tick t = 0; t < 500; ++t) {
            if (t == next) {
                ledger.record_heartbeat(NodeId{0}, t);
                next = t + 1 + static_cast<Tick>(rng() % static_cast<std::uint64_t>(period));
            }
            ASSERT_TRUE(ledger.detect_failures(t).empty());
            ASSERT_EQ(ledger.detect_failures(t), ledger.detect_failures(t));
        }
    }
}
