#pragma once

#include <cstdint>
#include <deque>
#include <string_view>
#include <tuple>
#include <vector>

#include <rankrec/cluster.hpp>
#include <rankrec/error.hpp>
#include <rankrec/ranking.hpp>

namespace rankrec {

// Order in which the two pending queues drain.
enum class QueuePolicy {
    failure_first, // all failure-recovered jobs, then new arrivals
    fifo_by_time,  // oldest enqueue time first across both queues, ties by job id
};

constexpr std::string_view to_string(QueuePolicy p) noexcept {
    return p == QueuePolicy::failure_first ? "failure_first" : "fifo_by_time";
}

struct Assignment {
    JobId job = 0;
    Load job_size = 0;
    JobOrigin origin;
    NodeId node;
    Load node_load_before = 0;
    Load node_load_after = 0;
    std::uint64_t seq = 0;

    friend bool operator==(Assignment const &, Assignment const &) = default;
};

struct AllocationResult {
    ClusterState state;
    RankTable table;
    std::vector<Assignment> assignments;
};

inline ClusterState enqueue_arrival(ClusterState state, Load size, Tick time) {
    if (size < 1) {
        throw error(errc::invalid_size, "arrival size must be positive, got " + std::to_string(size));
    }
    state.arrival_queue.push_back(Job{state.next_job_id(), size, JobOrigin::new_arrival(), time});
    return state;
}

namespace detail {

inline void check_table_matches(ClusterState const & state, RankTable const & table) {
    if (table.size() != state.alive_count()) {
        throw error(errc::invalid_argument, "rank table does not cover the alive nodes");
    }
    for (auto const & e : table.entries()) {
        auto const & n = state.node(e.node);
        if (!n.alive() || n.load != e.load) {
            throw error(errc::invalid_argument, "rank table is stale for " + to_string(e.node));
        }
    }
}

inline std::deque<Job> & next_queue(ClusterState & state, QueuePolicy policy) {
    auto & failures = state.failure_queue;
    auto & arrivals = state.arrival_queue;
    if (failures.empty()) return arrivals;
    if (arrivals.empty() || policy == QueuePolicy::failure_first) return failures;
    auto const & f = failures.front();
    auto const & a = arrivals.front();
    return std::tie(a.enqueued_at, a.id) < std::tie(f.enqueued_at, f.id) ? arrivals : failures;
}

} // namespace detail

// Drains both queues, one whole job at a time, each onto the currently least
// loaded alive node. Assignment sequence numbers continue from `first_seq`.
inline AllocationResult allocate_pending_jobs(ClusterState state, RankTable table,
                                              QueuePolicy policy = QueuePolicy::failure_first,
                                              std::uint64_t first_seq = 0) {
    std::vector<Assignment> assignments;
    if (state.failure_queue.empty() && state.arrival_queue.empty()) {
        return {std::move(state), std::move(table), std::move(assignments)};
    }
    if (table.empty()) {
        throw error(errc::no_alive_nodes, "pending jobs remain queued");
    }
    detail::check_table_matches(state, table);

    std::uint64_t seq = first_seq;
    while (!state.failure_queue.empty() || !state.arrival_queue.empty()) {
        auto & queue = detail::next_queue(state, policy);
        Job const job = queue.front();
        queue.pop_front();

        NodeId const target = get_least_rank_node(table);
        auto & node = state.node(target);
        Load const before = node.load;
        add_job(node, job.size);
        table = update_after_assignment(std::move(table), target, job.size);
        assignments.push_back({job.id, job.size, job.origin, target, before, node.load, seq++});
    }
    return {std::move(state), std::move(table), std::move(assignments)};
}

} // namespace rankrec
