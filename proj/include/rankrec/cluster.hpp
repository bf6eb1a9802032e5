#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <deque>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <rankrec/error.hpp>

namespace rankrec {

// All loads, job sizes and rates are integer work units.
using Load = std::int64_t;
using Tick = std::int64_t;
using JobId = std::uint64_t;

struct NodeId {
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline std::string to_string(NodeId id) { return "P" + std::to_string(id.value); }

enum class NodeStatus { alive, failed };

struct ComputeNode {
    NodeId id;
    Load load = 0;
    NodeStatus status = NodeStatus::alive;
    // Sizes of the individual jobs making up `load`, oldest first. Only
    // meaningful while it sums to `load`; otherwise the load is a single mass.
    std::vector<Load> job_sizes;

    bool alive() const noexcept { return status == NodeStatus::alive; }

    bool has_job_structure() const noexcept {
        return !job_sizes.empty() &&
               std::accumulate(job_sizes.begin(), job_sizes.end(), Load{0}) == load;
    }

    friend bool operator==(ComputeNode const &, ComputeNode const &) = default;
};

enum class JobOriginKind { initial, failure_recovered, new_arrival };

struct JobOrigin {
    JobOriginKind kind = JobOriginKind::initial;
    NodeId failed_node{}; // set for failure_recovered only

    static JobOrigin initial() { return {}; }
    static JobOrigin recovered_from(NodeId node) { return {JobOriginKind::failure_recovered, node}; }
    static JobOrigin new_arrival() { return {JobOriginKind::new_arrival, {}}; }

    friend bool operator==(JobOrigin const &, JobOrigin const &) = default;
};

struct Job {
    JobId id = 0;
    Load size = 1;
    JobOrigin origin;
    Tick enqueued_at = 0;

    friend bool operator==(Job const &, Job const &) = default;
};

class ClusterState {
public:
    ClusterState() = default;

    // Nodes P0..P(n-1) with the given loads.
    explicit ClusterState(std::vector<Load> const & loads) {
        std::vector<ComputeNode> nodes;
        nodes.reserve(loads.size());
        for (std::size_t i = 0; i < loads.size(); ++i) {
            nodes.push_back({NodeId{static_cast<std::uint32_t>(i)}, loads[i], NodeStatus::alive, {}});
        }
        *this = ClusterState(std::move(nodes));
    }

    // Nodes in caller order; ids need not be contiguous but must be unique.
    explicit ClusterState(std::vector<ComputeNode> nodes) : nodes_(std::move(nodes)) {
        index_.reserve(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            auto const & n = nodes_[i];
            if (n.load < 0) {
                throw error(errc::invalid_argument, "negative load on " + to_string(n.id));
            }
            for (Load s : n.job_sizes) {
                if (s < 1) {
                    throw error(errc::invalid_size, "job size must be positive on " + to_string(n.id));
                }
            }
            index_.emplace_back(n.id, i);
        }
        std::ranges::sort(index_);
        auto dup = std::ranges::adjacent_find(index_, {}, &std::pair<NodeId, std::size_t>::first);
        if (dup != index_.end()) {
            throw error(errc::invalid_argument, "duplicate node id " + to_string(dup->first));
        }
    }

    std::span<ComputeNode const> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    bool contains(NodeId id) const noexcept { return find(id) != nullptr; }

    ComputeNode const & node(NodeId id) const {
        auto const * n = find(id);
        if (n == nullptr) {
            throw error(errc::unknown_node, to_string(id));
        }
        return *n;
    }

    ComputeNode & node(NodeId id) {
        return const_cast<ComputeNode &>(std::as_const(*this).node(id));
    }

    std::size_t alive_count() const noexcept {
        return static_cast<std::size_t>(std::ranges::count_if(nodes_, &ComputeNode::alive));
    }

    JobId next_job_id() noexcept { return next_job_id_++; }

    std::deque<Job> failure_queue;
    std::deque<Job> arrival_queue;
    Tick clock = 0;

    friend bool operator==(ClusterState const &, ClusterState const &) = default;

private:
    ComputeNode const * find(NodeId id) const noexcept {
        auto it = std::ranges::lower_bound(index_, id, {}, &std::pair<NodeId, std::size_t>::first);
        if (it == index_.end() || it->first != id) {
            return nullptr;
        }
        return &nodes_[it->second];
    }

    std::vector<ComputeNode> nodes_;
    std::vector<std::pair<NodeId, std::size_t>> index_;
    JobId next_job_id_ = 0;
};

// Places an indivisible job on a node.
inline void add_job(ComputeNode & n, Load size) {
    bool const structured = n.load == 0 || n.has_job_structure();
    n.load += size;
    if (structured) {
        n.job_sizes.push_back(size);
    } else {
        n.job_sizes.clear();
    }
}

// Executes up to `max_units` of a node's load, oldest job first. Returns the
// number of units actually processed.
inline Load process_units(ComputeNode & n, Load max_units) {
    Load const amount = std::min(max_units, n.load);
    if (n.has_job_structure()) {
        Load left = amount;
        while (left > 0) {
            Load const take = std::min(left, n.job_sizes.front());
            n.job_sizes.front() -= take;
            left -= take;
            if (n.job_sizes.front() == 0) {
                n.job_sizes.erase(n.job_sizes.begin());
            }
        }
    } else {
        n.job_sizes.clear();
    }
    n.load -= amount;
    return amount;
}

// Marks an alive node failed. Its unprocessed load moves to the failure queue,
// one job per tracked job when the node's job structure is intact, otherwise
// as a single job of the whole load.
inline ClusterState mark_failed(ClusterState state, NodeId id) {
    auto & n = state.node(id);
    if (!n.alive()) {
        throw error(errc::already_failed, to_string(id));
    }
    std::vector<Load> pieces;
    if (n.has_job_structure()) {
        pieces = n.job_sizes;
    } else if (n.load > 0) {
        pieces.push_back(n.load);
    }
    for (Load size : pieces) {
        state.failure_queue.push_back(
            Job{state.next_job_id(), size, JobOrigin::recovered_from(id), state.clock});
    }
    n.status = NodeStatus::failed;
    n.load = 0;
    n.job_sizes.clear();
    return state;
}

inline Load total_alive_load(ClusterState const & state) {
    Load total = 0;
    for (auto const & n : state.nodes()) {
        if (n.alive()) {
            total += n.load;
        }
    }
    return total;
}

inline Load queued_load(ClusterState const & state) {
    Load total = 0;
    for (auto const & j : state.failure_queue) total += j.size;
    for (auto const & j : state.arrival_queue) total += j.size;
    return total;
}

struct Imbalance {
    Load spread = 0;
    double stddev = 0.0;
};

// Population standard deviation over alive loads.
inline Imbalance imbalance(ClusterState const & state) {
    std::vector<double> loads;
    Load lo = 0, hi = 0;
    for (auto const & n : state.nodes()) {
        if (!n.alive()) continue;
        if (loads.empty() || n.load < lo) lo = n.load;
        if (loads.empty() || n.load > hi) hi = n.load;
        loads.push_back(static_cast<double>(n.load));
    }
    if (loads.empty()) {
        throw error(errc::no_alive_nodes, "imbalance of an empty alive set");
    }
    auto const count = static_cast<double>(loads.size());
    double const mean = std::accumulate(loads.begin(), loads.end(), 0.0) / count;
    double var = 0.0;
    for (double x : loads) var += (x - mean) * (x - mean);
    return {hi - lo, std::sqrt(var / count)};
}

} // namespace rankrec
