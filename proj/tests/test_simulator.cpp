#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <rankrec/simulator.hpp>

using namespace rankrec;

namespace {

ScenarioConfig static_scenario(std::vector<Load> loads) {
    ScenarioConfig c;
    c.id = "static";
    c.loads = std::move(loads);
    return c;
}

ScenarioConfig failure_scenario() {
    ScenarioConfig c;
    c.id = "failures";
    c.loads = {40, 55, 120, 80, 30, 95};
    c.jobs = {{10, 10, 20}, {55}, {40, 40, 40}, {20, 20, 20, 20}, {}, {45, 50}};
    c.failures = {{12, NodeId{2}, NodeId{0}}, {20, NodeId{5}, NodeId{4}}};
    c.arrivals = {{5, 15}, {25, 30}, {60, 8}};
    c.rate = 2;
    c.fixed_overhead = 3;
    c.seed = 7;
    c.baseline_policy = BaselinePolicy::successor;
    return c;
}

std::vector<LogRecord> records_of_kind(std::vector<LogRecord> const & all, std::string_view kind) {
    std::vector<LogRecord> out;
    for (auto const & r : all) {
        if (r.kind == kind) out.push_back(r);
    }
    return out;
}

} // namespace

TEST(Simulator, FourNodeZeroZero6970) {
    auto const r = run_scenario(static_scenario({0, 0, 69, 70}));
    EXPECT_EQ(r.response_time_baseline, 70);
    EXPECT_EQ(r.response_time_recovered, 35);
    EXPECT_DOUBLE_EQ(r.improvement_ratio, 2.0);
    EXPECT_EQ(r.redistribution.passes, 1);
}

TEST(Simulator, FourNode4_9_32_40) {
    auto const r = run_scenario(static_scenario({4, 9, 32, 40}));
    EXPECT_EQ(r.response_time_baseline, 40);
    EXPECT_EQ(r.response_time_recovered, 22);
    EXPECT_DOUBLE_EQ(r.improvement_ratio, 40.0 / 22.0);
}

TEST(Simulator, BalancedAllocationGainsNothing) {
    auto const r = run_scenario(static_scenario({12, 12, 12, 12}));
    EXPECT_EQ(r.response_time_recovered, r.response_time_baseline);
    EXPECT_DOUBLE_EQ(r.improvement_ratio, 1.0);
    EXPECT_EQ(r.redistribution.passes, 0);
}

TEST(Simulator, EmptyWorkload) {
    auto c = static_scenario({0, 0});
    c.fixed_overhead = 4;
    auto const r = run_scenario(c);
    EXPECT_EQ(r.response_time_recovered, 4);
    EXPECT_EQ(r.response_time_baseline, 4);
    EXPECT_DOUBLE_EQ(r.improvement_ratio, 1.0);
}

TEST(Simulator, StaticResponseMatchesMakespanFormula) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Load> loads(1 + rng() % 8);
        for (auto & l : loads) l = static_cast<Load>(rng() % 300);
        auto c = static_scenario(loads);
        c.rate = 1 + static_cast<Load>(rng() % 4);
        c.fixed_overhead = static_cast<Tick>(rng() % 5);
        auto const r = run_scenario(c);
        ResponseModel const model{c.rate, c.fixed_overhead};
        ASSERT_EQ(r.response_time_baseline, modeled_response(loads, model));
        auto const balanced = redistribute(ClusterState(loads), 1).state;
        std::vector<Load> after;
        for (auto const & n : balanced.nodes()) after.push_back(n.load);
        ASSERT_EQ(r.response_time_recovered, modeled_response(after, model));
    }
}

TEST(Simulator, RecoveryDominatesUnbalancedBaseline) {
    std::mt19937_64 rng(78);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Load> loads(1 + rng() % 8);
        for (auto & l : loads) l = static_cast<Load>(rng() % 200);
        Load sum = 0;
        for (Load l : loads) sum += l;
        auto const n = static_cast<Load>(loads.size());
        auto const balanced_max = (sum + n - 1) / n;
        auto const r = run_scenario(static_scenario(loads));
        if (*std::ranges::max_element(loads) > balanced_max) {
            ASSERT_LT(r.response_time_recovered, *r.response_time_baseline);
        } else {
            ASSERT_EQ(r.response_time_recovered, *r.response_time_baseline);
        }
    }
}

TEST(Simulator, FailuresAreRecoveredWithoutLosingWork) {
    auto const r = run_scenario(failure_scenario());
    EXPECT_EQ(r.total_work, 40 + 55 + 120 + 80 + 30 + 95 + 15 + 30 + 8);
    EXPECT_EQ(r.units_processed, r.total_work);
    EXPECT_FALSE(r.baseline_stalled());
    EXPECT_GE(r.episodes.size(), 2u);
    EXPECT_GT(r.detection_latency, 0);
    bool recovered_job = false;
    for (auto const & a : r.assignments) {
        recovered_job = recovered_job || a.origin.kind == JobOriginKind::failure_recovered;
        EXPECT_NE(a.node, NodeId{2});
    }
    EXPECT_TRUE(recovered_job);
    EXPECT_LT(r.response_time_recovered, *r.response_time_baseline);
}

TEST(Simulator, RandomScenariosAccountForEveryUnit) {
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 100; ++trial) {
        ScenarioConfig c;
        c.id = "random";
        c.loads.resize(2 + rng() % 6);
        for (auto & l : c.loads) l = static_cast<Load>(rng() % 150);
        auto const failures = rng() % c.loads.size();
        for (std::uint32_t i = 0; i < failures; ++i) {
            c.failures.push_back({static_cast<Tick>(rng() % 80), NodeId{i}, std::nullopt});
        }
        for (int k = 0; k < 4; ++k) c.arrivals.push_back({static_cast<Tick>(rng() % 100), 1 + static_cast<Load>(rng() % 30)});
        c.rate = 1 + static_cast<Load>(rng() % 3);
        c.queue_policy = rng() % 2 ? QueuePolicy::fifo_by_time : QueuePolicy::failure_first;
        c.seed = rng();
        auto const r = run_scenario(c);
        ASSERT_EQ(r.units_processed, r.total_work);
        if (failures > 0) {
            ASSERT_EQ(r.baseline_stalled(), r.baseline_stalled_units > 0);
        }
    }
}

TEST(Simulator, DetectionLatencyFollowsHeartbeatSchedule) {
    ScenarioConfig c = static_scenario({50, 50, 50});
    c.failures = {{23, NodeId{1}, std::nullopt}};
    c.seed = 12345;
    c.heartbeat_period = 10;
    c.miss_threshold = 3;
    // Independent reconstruction of node 1's last heartbeat before it crashed.
    std::mt19937_64 rng(c.seed);
    rng();
    Tick const offset = static_cast<Tick>(rng() % 10);
    Tick last = 0;
    for (Tick t = offset; t < 23; t += 10) last = t;
    Tick const detected_at = last + 30 + 1;
    auto const r = run_scenario(c);
    EXPECT_EQ(r.detection_latency, detected_at - 23);
    auto const detects = records_of_kind(parse_log_records(r.event_log), "detect");
    ASSERT_EQ(detects.size(), 1u);
    EXPECT_EQ(detects[0].time, detected_at);
}

TEST(Simulator, RecoveryTriggerFiresOneTickAfterDetection) {
    auto const r = run_scenario(failure_scenario());
    auto const records = parse_log_records(r.event_log);
    auto const detects = records_of_kind(records, "detect");
    auto const recoveries = records_of_kind(records, "recovery");
    ASSERT_FALSE(detects.empty());
    for (auto const & d : detects) {
        bool found = std::ranges::any_of(recoveries, [&](LogRecord const & rec) {
            return rec.time == d.time + 1 && rec.payload.find("reason=failure") != std::string::npos;
        });
        EXPECT_TRUE(found) << "no recovery after detection at " << d.time;
    }
}

TEST(Simulator, AssignmentsNeverPrecedeRedistributionInAnEpisode) {
    auto const r = run_scenario(failure_scenario());
    auto const records = parse_log_records(r.event_log);
    std::optional<Tick> open_episode;
    for (auto const & rec : records) {
        if (rec.kind == "recovery") open_episode = rec.time;
        if (rec.kind == "redistributed") open_episode.reset();
        if (rec.kind == "assign") {
            ASSERT_FALSE(open_episode.has_value()) << "assignment inside an unfinished redistribution";
        }
    }
    for (std::size_t i = 1; i < records.size(); ++i) {
        ASSERT_EQ(records[i].seq, records[i - 1].seq + 1);
        ASSERT_GE(records[i].time, records[i - 1].time);
    }
}

TEST(Simulator, DeterministicForSameConfig) {
    auto const c = failure_scenario();
    auto const a = run_scenario(c);
    auto const b = run_scenario(c);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.event_log, b.event_log);
}

TEST(Simulator, SeedChangesHeartbeatPhases) {
    auto c = failure_scenario();
    auto const a = run_scenario(c);
    c.seed = 8;
    auto const b = run_scenario(c);
    EXPECT_NE(a.event_log, b.event_log);
    EXPECT_EQ(a.units_processed, b.units_processed);
}

TEST(Simulator, StallPolicyReportsInfiniteBaseline) {
    ScenarioConfig c = static_scenario({4, 9, 32, 40});
    c.failures = {{3, NodeId{3}, std::nullopt}};
    auto const r = run_scenario(c);
    EXPECT_TRUE(r.baseline_stalled());
    EXPECT_EQ(r.baseline_stalled_units, 40 - 3);
    EXPECT_TRUE(std::isinf(r.improvement_ratio));
    EXPECT_EQ(r.units_processed, r.total_work);
}

TEST(Simulator, AllNodesFailing) {
    ScenarioConfig c = static_scenario({5, 5});
    c.failures = {{1, NodeId{0}, std::nullopt}, {2, NodeId{1}, std::nullopt}};
    try {
        run_scenario(c);
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::no_alive_nodes);
    }
}

TEST(Simulator, InvalidConfigRejected) {
    ScenarioConfig c = static_scenario({5, -1});
    try {
        run_scenario(c);
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::validation_error);
    }
}

TEST(Replay, ReproducesReport) {
    auto const r = run_scenario(failure_scenario());
    EXPECT_EQ(replay(r.event_log), r);
    EXPECT_EQ(replay(r.event_log, failure_scenario()), r);
}

TEST(Replay, TruncatedLogIsCorrupt) {
    auto const r = run_scenario(failure_scenario());
    auto const cut = r.event_log.substr(0, r.event_log.size() / 2);
    try {
        replay(cut);
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::corrupt_log);
    }
    EXPECT_THROW(replay(""), error);
}

TEST(Replay, DifferentRateRejected) {
    auto const r = run_scenario(failure_scenario());
    auto other = failure_scenario();
    other.rate = 3;
    try {
        replay(r.event_log, other);
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::corrupt_log);
    }
}

TEST(Replay, EditedEmbeddedConfigRejected) {
    auto const r = run_scenario(failure_scenario());
    auto log = r.event_log;
    auto const pos = log.find("\"rate\":2");
    ASSERT_NE(pos, std::string::npos);
    log.replace(pos, 8, "\"rate\":3");
    try {
        replay(log);
        FAIL();
    } catch (error const & e) {
        EXPECT_EQ(e.code(), errc::corrupt_log);
    }
}

TEST(Replay, EditedRecordRejected) {
    auto const r = run_scenario(static_scenario({0, 0, 69, 70}));
    auto log = r.event_log;
    auto const pos = log.find("moved=35");
    ASSERT_NE(pos, std::string::npos);
    log.replace(pos, 8, "moved=36");
    EXPECT_THROW(replay(log), error);
}
