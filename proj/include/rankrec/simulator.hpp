#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <rankrec/cluster.hpp>
#include <rankrec/config.hpp>
#include <rankrec/detection.hpp>
#include <rankrec/error.hpp>
#include <rankrec/ranking.hpp>
#include <rankrec/reassignment.hpp>
#include <rankrec/redistribution.hpp>

namespace rankrec {

inline constexpr std::string_view event_log_magic = "# rankrec event log v1";

// Equal-speed nodes: each processes `rate` units per tick.
struct ResponseModel {
    Load rate = 1;
    Tick fixed_overhead = 0;
};

// Completion time of a static allocation: the slowest node's ceil(load/rate)
// plus the fixed overhead.
inline Tick modeled_response(std::span<Load const> loads, ResponseModel model) {
    Tick worst = 0;
    for (Load l : loads) {
        worst = std::max(worst, (l + model.rate - 1) / model.rate);
    }
    return worst + model.fixed_overhead;
}

enum class EventKind { node_failure, job_arrival, heartbeat, recovery_trigger, unit_processed };

struct ScenarioReport {
    std::string scenario_id;
    Tick response_time_recovered = 0;
    // Empty when the baseline stalled on a failed node's work.
    std::optional<Tick> response_time_baseline;
    double improvement_ratio = 1.0;
    // Totals over every recovery episode; final_spread is the last episode's.
    RedistributionReport redistribution;
    std::vector<RedistributionReport> episodes;
    std::vector<Assignment> assignments;
    Tick detection_latency = 0;
    Load total_work = 0;
    Load units_processed = 0;
    Load baseline_stalled_units = 0;
    std::string event_log;

    bool baseline_stalled() const noexcept { return !response_time_baseline.has_value(); }

    friend bool operator==(ScenarioReport const &, ScenarioReport const &) = default;
};

// FNV-1a over the canonical config serialization.
inline std::uint64_t config_hash(ScenarioConfig const & config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_json(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17] = {};
    auto [end, ec] = std::to_chars(buf, buf + 16, v, 16);
    std::string s(buf, end);
    return std::string(16 - s.size(), '0') + s;
}

namespace detail {

enum class Mode { recovered, baseline };

// Single-threaded tick loop. Within a tick, work happens in a fixed order:
// failures, arrivals, heartbeats, detection sweep, recovery triggers,
// dispatch of queued jobs, then unit processing. Logged seq numbers are the
// execution ordinal, so (time, seq) reproduces the execution order.
class Engine {
public:
    Engine(ScenarioConfig const & config, Mode mode)
        : cfg_(config),
          mode_(mode),
          state_(make_state(config)),
          ledger_(config.heartbeat_period, config.miss_threshold),
          crashed_(config.loads.size(), false),
          detected_(config.loads.size(), false),
          handled_(config.loads.size(), false),
          crash_tick_(config.loads.size(), 0) {
        for (Load l : config.loads) total_work_ += l;
        for (auto const & a : config.arrivals) total_work_ += a.size;

        // Failures and arrivals keep their config order within a tick.
        for (auto const & f : config.failures) {
            schedule(f.tick, EventKind::node_failure, f.node, 0);
        }
        for (auto const & a : config.arrivals) {
            schedule(a.tick, EventKind::job_arrival, {}, a.size);
        }
        std::mt19937_64 rng(config.seed);
        for (auto const & n : state_.nodes()) {
            ledger_.register_node(n.id, 0);
            auto const offset = static_cast<Tick>(rng() % static_cast<std::uint64_t>(config.heartbeat_period));
            schedule(offset, EventKind::heartbeat, n.id, 0);
        }
        if (mode_ == Mode::recovered) {
            schedule(0, EventKind::recovery_trigger, {}, 0);
        }

        Tick last_event = 0;
        for (auto const & f : config.failures) last_event = std::max(last_event, f.tick);
        for (auto const & a : config.arrivals) last_event = std::max(last_event, a.tick);
        horizon_ = last_event + total_work_ + 2 * (ledger_.timeout() + config.heartbeat_period) + 16;
    }

    void run() {
        for (Tick t = 0;; ++t) {
            if (t > horizon_) {
                throw std::logic_error("simulation exceeded its horizon");
            }
            state_.clock = t;
            run_scheduled(t, EventKind::heartbeat);
            detection_sweep(t);
            run_scheduled(t, EventKind::recovery_trigger);
            dispatch(t);
            process(t);
            if (finished()) break;
        }
    }

    Tick response_time() const {
        Tick const busy = last_busy_tick_ < 0 ? 0 : last_busy_tick_ + 1;
        return busy + cfg_.fixed_overhead;
    }

    Load stalled_units() const {
        Load stalled = 0;
        for (auto const & n : state_.nodes()) {
            if (crashed_[n.id.value]) stalled += n.load;
        }
        return stalled;
    }

    Tick detection_latency() const noexcept { return max_latency_; }
    Load total_work() const noexcept { return total_work_; }
    Load processed() const noexcept { return processed_; }
    std::vector<RedistributionReport> const & episodes() const noexcept { return episodes_; }
    std::vector<Assignment> const & assignments() const noexcept { return assignments_; }
    std::string const & log() const noexcept { return log_; }
    std::uint64_t records() const noexcept { return seq_; }

private:
    struct Scheduled {
        Tick time;
        EventKind kind;
        std::uint64_t order;
        NodeId node;
        Load size;

        bool operator>(Scheduled const & o) const noexcept {
            return std::tie(time, kind, order) > std::tie(o.time, o.kind, o.order);
        }
    };

    static ClusterState make_state(ScenarioConfig const & c) {
        std::vector<ComputeNode> nodes;
        for (std::size_t i = 0; i < c.loads.size(); ++i) {
            ComputeNode n{NodeId{static_cast<std::uint32_t>(i)}, c.loads[i], NodeStatus::alive, {}};
            if (i < c.jobs.size()) n.job_sizes = c.jobs[i];
            nodes.push_back(std::move(n));
        }
        return ClusterState(std::move(nodes));
    }

    void schedule(Tick time, EventKind kind, NodeId node, Load size) {
        if (kind != EventKind::heartbeat) ++pending_work_events_;
        queue_.push({time, kind, next_order_++, node, size});
    }

    void record(Tick t, std::string_view kind, std::string const & payload) {
        if (mode_ == Mode::recovered) {
            log_ += std::to_string(t);
            log_ += ' ';
            log_ += std::to_string(seq_);
            log_ += ' ';
            log_ += kind;
            if (!payload.empty()) {
                log_ += ' ';
                log_ += payload;
            }
            log_ += '\n';
        }
        ++seq_;
    }

    void run_scheduled(Tick t, EventKind through) {
        while (!queue_.empty() && queue_.top().time == t && queue_.top().kind <= through) {
            Scheduled const ev = queue_.top();
            queue_.pop();
            if (ev.kind != EventKind::heartbeat) --pending_work_events_;
            switch (ev.kind) {
            case EventKind::node_failure: on_failure(t, ev.node); break;
            case EventKind::job_arrival: on_arrival(t, ev.size); break;
            case EventKind::heartbeat: on_heartbeat(t, ev.node); break;
            case EventKind::recovery_trigger: on_recovery(t); break;
            case EventKind::unit_processed: break;
            }
        }
    }

    void on_failure(Tick t, NodeId node) {
        crashed_[node.value] = true;
        crash_tick_[node.value] = t;
        record(t, "failure", "node=" + to_string(node) + " load=" + std::to_string(state_.node(node).load));
    }

    void on_arrival(Tick t, Load size) {
        if (mode_ == Mode::recovered) {
            state_ = enqueue_arrival(std::move(state_), size, t);
            record(t, "arrival", "job=" + std::to_string(state_.arrival_queue.back().id) +
                                     " size=" + std::to_string(size));
            return;
        }
        // Static allocation: arrival k goes to node k mod N.
        auto target = NodeId{static_cast<std::uint32_t>(arrivals_seen_++ % state_.size())};
        if (crashed_[target.value] && handled_[target.value]) {
            target = successor_of(target);
        }
        add_job(state_.node(target), size);
        record(t, "arrival", "size=" + std::to_string(size) + " node=" + to_string(target));
    }

    void on_heartbeat(Tick t, NodeId node) {
        if (crashed_[node.value]) return;
        ledger_.record_heartbeat(node, t);
        record(t, "heartbeat", "node=" + to_string(node));
        schedule(t + cfg_.heartbeat_period, EventKind::heartbeat, node, 0);
    }

    void detection_sweep(Tick t) {
        bool fresh = false;
        for (NodeId node : ledger_.detect_failures(t)) {
            if (detected_[node.value]) continue;
            detected_[node.value] = true;
            Tick const latency = t - crash_tick_[node.value];
            max_latency_ = std::max(max_latency_, latency);
            awaiting_recovery_.push_back(node);
            record(t, "detect", "node=" + to_string(node) + " latency=" + std::to_string(latency));
            fresh = true;
        }
        if (fresh) {
            schedule(t + 1, EventKind::recovery_trigger, {}, 0);
        }
    }

    void on_recovery(Tick t) {
        auto const episode = episodes_.size() + 1;
        record(t, "recovery", "episode=" + std::to_string(episode) +
                                  " reason=" + (awaiting_recovery_.empty() ? "initial" : "failure"));
        if (mode_ == Mode::baseline) {
            for (NodeId node : awaiting_recovery_) {
                handled_[node.value] = true;
                if (cfg_.baseline_policy == BaselinePolicy::successor) {
                    auto & dead = state_.node(node);
                    add_job_mass(state_.node(successor_of(node)), dead);
                    dead.load = 0;
                    dead.job_sizes.clear();
                }
            }
            awaiting_recovery_.clear();
            return;
        }

        for (NodeId node : awaiting_recovery_) {
            auto const before = state_.failure_queue.size();
            Load const units = state_.node(node).load;
            state_ = mark_failed(std::move(state_), node);
            handled_[node.value] = true;
            record(t, "mark-failed", "node=" + to_string(node) + " jobs=" +
                                         std::to_string(state_.failure_queue.size() - before) +
                                         " units=" + std::to_string(units));
        }
        awaiting_recovery_.clear();
        if (state_.alive_count() == 0) {
            throw error(errc::no_alive_nodes, "every node of scenario '" + cfg_.id + "' has failed");
        }

        auto result = redistribute(std::move(state_), cfg_.epsilon, cfg_.max_passes);
        state_ = std::move(result.state);
        for (auto const & tr : result.report.transfers) {
            record(t, "transfer", "pass=" + std::to_string(tr.pass_index) + " donor=" + to_string(tr.donor) +
                                      " receiver=" + to_string(tr.receiver) +
                                      " avg=" + std::to_string(tr.avg_load) +
                                      " moved=" + std::to_string(tr.load_to_transfer));
        }
        auto const & rep = result.report;
        record(t, "redistributed", "passes=" + std::to_string(rep.passes) +
                                       " transfers=" + std::to_string(rep.transfers.size()) +
                                       " messages=" + std::to_string(rep.messages) +
                                       " spread=" + std::to_string(rep.final_spread) +
                                       " converged=" + (rep.converged ? "1" : "0"));
        episodes_.push_back(std::move(result.report));
    }

    void dispatch(Tick t) {
        if (mode_ != Mode::recovered) return;
        if (state_.failure_queue.empty() && state_.arrival_queue.empty()) return;
        if (state_.alive_count() == 0) {
            throw error(errc::no_alive_nodes, "pending jobs of scenario '" + cfg_.id + "' cannot be placed");
        }
        RankTable table = build_rank_table(state_);
        auto result = allocate_pending_jobs(std::move(state_), std::move(table), cfg_.queue_policy,
                                            assignments_.size());
        state_ = std::move(result.state);
        for (auto const & a : result.assignments) {
            record(t, "assign", "seq=" + std::to_string(a.seq) + " job=" + std::to_string(a.job) +
                                    " size=" + std::to_string(a.job_size) + " node=" + to_string(a.node) +
                                    " before=" + std::to_string(a.node_load_before) +
                                    " after=" + std::to_string(a.node_load_after));
            assignments_.push_back(a);
        }
    }

    void process(Tick t) {
        for (auto const & n : state_.nodes()) {
            if (crashed_[n.id.value] || n.load == 0) continue;
            Load const done = process_units(state_.node(n.id), cfg_.rate);
            processed_ += done;
            last_busy_tick_ = t;
            record(t, "unit", "node=" + to_string(n.id) + " units=" + std::to_string(done));
        }
    }

    bool finished() const {
        if (pending_work_events_ > 0) return false;
        if (!awaiting_recovery_.empty()) return false;
        if (!state_.failure_queue.empty() || !state_.arrival_queue.empty()) return false;
        for (auto const & n : state_.nodes()) {
            auto const i = n.id.value;
            if (!crashed_[i]) {
                if (n.load > 0) return false;
                continue;
            }
            if (handled_[i]) continue;
            bool const may_leave = mode_ == Mode::baseline &&
                                   (cfg_.baseline_policy == BaselinePolicy::stall || n.load == 0);
            if (!may_leave) return false;
        }
        return true;
    }

    NodeId successor_of(NodeId node) const {
        for (auto const & f : cfg_.failures) {
            if (f.node == node && f.successor) return *f.successor;
        }
        return node;
    }

    static void add_job_mass(ComputeNode & to, ComputeNode const & from) {
        if (from.has_job_structure()) {
            for (Load s : from.job_sizes) add_job(to, s);
        } else if (from.load > 0) {
            add_job(to, from.load);
        }
    }

    ScenarioConfig const & cfg_;
    Mode mode_;
    ClusterState state_;
    HeartbeatLedger ledger_;
    std::vector<bool> crashed_;
    std::vector<bool> detected_;
    std::vector<bool> handled_;
    std::vector<Tick> crash_tick_;
    std::vector<NodeId> awaiting_recovery_;
    std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> queue_;
    std::uint64_t next_order_ = 0;
    std::int64_t pending_work_events_ = 0;
    std::uint64_t seq_ = 0;
    std::size_t arrivals_seen_ = 0;
    Tick last_busy_tick_ = -1;
    Tick max_latency_ = 0;
    Tick horizon_ = 0;
    Load total_work_ = 0;
    Load processed_ = 0;
    std::vector<RedistributionReport> episodes_;
    std::vector<Assignment> assignments_;
    std::string log_;
};

inline RedistributionReport aggregate(std::vector<RedistributionReport> const & episodes) {
    RedistributionReport total;
    for (auto const & e : episodes) {
        total.passes += e.passes;
        total.transfers.insert(total.transfers.end(), e.transfers.begin(), e.transfers.end());
        total.messages += e.messages;
        total.total_moved += e.total_moved;
        total.final_spread = e.final_spread;
        total.converged = total.converged && e.converged;
    }
    return total;
}

} // namespace detail

// Runs the scenario twice: once with two-phase recovery (initial
// redistribution, then detection -> mark_failed -> redistribute ->
// allocate_pending_jobs on every failure) and once as the static baseline.
inline ScenarioReport run_scenario(ScenarioConfig const & config) {
    validate(config);

    detail::Engine recovered(config, detail::Mode::recovered);
    recovered.run();
    detail::Engine baseline(config, detail::Mode::baseline);
    baseline.run();

    ScenarioReport report;
    report.scenario_id = config.id;
    report.response_time_recovered = recovered.response_time();
    report.baseline_stalled_units = baseline.stalled_units();
    if (report.baseline_stalled_units == 0) {
        report.response_time_baseline = baseline.response_time();
    }
    if (!report.response_time_baseline) {
        report.improvement_ratio = std::numeric_limits<double>::infinity();
    } else if (report.response_time_recovered == 0) {
        report.improvement_ratio = *report.response_time_baseline == 0 ? 1.0
                                                                       : std::numeric_limits<double>::infinity();
    } else {
        report.improvement_ratio = static_cast<double>(*report.response_time_baseline) /
                                   static_cast<double>(report.response_time_recovered);
    }
    report.episodes = recovered.episodes();
    report.redistribution = detail::aggregate(report.episodes);
    report.assignments = recovered.assignments();
    report.detection_latency = recovered.detection_latency();
    report.total_work = recovered.total_work();
    report.units_processed = recovered.processed();

    std::string log;
    log += event_log_magic;
    log += "\n# config-hash ";
    log += hex64(config_hash(config));
    log += "\n# config ";
    log += canonical_json(config);
    log += '\n';
    log += recovered.log();
    log += "# end records=" + std::to_string(recovered.records()) + "\n";
    report.event_log = std::move(log);
    return report;
}

struct LogRecord {
    Tick time = 0;
    std::uint64_t seq = 0;
    std::string kind;
    std::string payload;
};

// Splits the body of an event log into records; header and trailer lines are
// skipped.
inline std::vector<LogRecord> parse_log_records(std::string_view log) {
    std::vector<LogRecord> out;
    std::istringstream in{std::string(log)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        std::istringstream fields(line);
        LogRecord rec;
        if (!(fields >> rec.time >> rec.seq >> rec.kind)) {
            throw error(errc::corrupt_log, "malformed record: " + line);
        }
        std::getline(fields >> std::ws, rec.payload);
        out.push_back(std::move(rec));
    }
    return out;
}

// Re-runs the config embedded in the log header and requires the regenerated
// log to match byte for byte.
inline ScenarioReport replay(std::string_view log) {
    auto next_line = [&log](std::string_view & line) {
        if (log.empty()) return false;
        auto const nl = log.find('\n');
        line = log.substr(0, nl);
        log = nl == std::string_view::npos ? std::string_view{} : log.substr(nl + 1);
        return true;
    };
    std::string_view const original = log;
    std::string_view magic, hash_line, config_line;
    if (!next_line(magic) || magic != event_log_magic) {
        throw error(errc::corrupt_log, "missing event log header");
    }
    constexpr std::string_view hash_prefix = "# config-hash ";
    constexpr std::string_view config_prefix = "# config ";
    if (!next_line(hash_line) || !hash_line.starts_with(hash_prefix)) {
        throw error(errc::corrupt_log, "missing config hash");
    }
    if (!next_line(config_line) || !config_line.starts_with(config_prefix)) {
        throw error(errc::corrupt_log, "missing embedded config");
    }
    ScenarioConfig config;
    try {
        config = parse_config(config_line.substr(config_prefix.size()));
    } catch (error const & e) {
        throw error(errc::corrupt_log, "embedded config unreadable: " + e.message());
    }
    if (hex64(config_hash(config)) != hash_line.substr(hash_prefix.size())) {
        throw error(errc::corrupt_log, "config hash mismatch");
    }
    ScenarioReport report = run_scenario(config);
    if (report.event_log != original) {
        throw error(errc::corrupt_log, "log does not match a re-run of its config (truncated or edited)");
    }
    return report;
}

// As above, additionally rejecting a log produced from a different config.
inline ScenarioReport replay(std::string_view log, ScenarioConfig const & expected) {
    constexpr std::string_view hash_prefix = "# config-hash ";
    auto const first_nl = log.find('\n');
    auto const rest = first_nl == std::string_view::npos ? std::string_view{} : log.substr(first_nl + 1);
    auto const hash_line = rest.substr(0, rest.find('\n'));
    if (!hash_line.starts_with(hash_prefix) ||
        hash_line.substr(hash_prefix.size()) != hex64(config_hash(expected))) {
        throw error(errc::corrupt_log, "config hash mismatch");
    }
    return replay(log);
}

} // namespace rankrec
