#pragma once

// Reference computations used to check the main algorithms. Deliberately
// written over plain vectors with naive full re-sorts; nothing here depends
// on the ranking, redistribution or reassignment headers.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include <rankrec/error.hpp>

namespace rankrec::oracles {

struct PartitionInstance {
    std::vector<std::int64_t> job_sizes;
    int machines = 1;
};

inline constexpr std::size_t max_exhaustive_jobs = 12;
inline constexpr int max_exhaustive_machines = 4;

namespace detail {

inline void search(std::vector<std::int64_t> const & jobs, std::size_t next, std::vector<std::int64_t> & bins,
                   std::int64_t & best) {
    if (next == jobs.size()) {
        best = std::min(best, *std::max_element(bins.begin(), bins.end()));
        return;
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
        // Bins with equal contents are interchangeable; trying one suffices.
        bool seen = false;
        for (std::size_t k = 0; k < b; ++k) {
            if (bins[k] == bins[b]) {
                seen = true;
                break;
            }
        }
        if (seen || bins[b] + jobs[next] >= best) continue;
        bins[b] += jobs[next];
        search(jobs, next + 1, bins, best);
        bins[b] -= jobs[next];
    }
}

} // namespace detail

// Minimum possible maximum machine load over every assignment of the jobs to
// `machines` identical machines.
inline std::int64_t brute_force_optimal_makespan(PartitionInstance const & instance) {
    if (instance.job_sizes.size() > max_exhaustive_jobs || instance.machines > max_exhaustive_machines) {
        throw error(errc::instance_too_large, "exhaustive search is limited to 12 jobs on 4 machines");
    }
    if (instance.machines < 1) {
        throw error(errc::invalid_argument, "need at least one machine");
    }
    if (instance.job_sizes.empty()) return 0;
    std::vector<std::int64_t> jobs = instance.job_sizes;
    std::sort(jobs.begin(), jobs.end(), std::greater<>());
    std::vector<std::int64_t> bins(static_cast<std::size_t>(instance.machines), 0);
    std::int64_t best = std::accumulate(jobs.begin(), jobs.end(), std::int64_t{0}) + 1;
    detail::search(jobs, 0, bins, best);
    return best;
}

inline std::pair<std::int64_t, std::int64_t> uniform_target(std::vector<std::int64_t> const & loads) {
    if (loads.empty()) {
        throw error(errc::invalid_argument, "uniform target of no loads");
    }
    std::int64_t const sum = std::accumulate(loads.begin(), loads.end(), std::int64_t{0});
    auto const n = static_cast<std::int64_t>(loads.size());
    return {sum / n, sum % n};
}

// Straight transcription of the pairing rule: sort indices by (load, index),
// level the outermost pair, move inwards, repeat until the spread is at most
// epsilon or the pass budget runs out. max_passes < 0 means no budget.
inline std::vector<std::int64_t> reference_redistribute(std::vector<std::int64_t> loads, std::int64_t epsilon = 1,
                                                        int max_passes = -1, int * passes_out = nullptr) {
    int passes = 0;
    auto spread = [&loads] {
        auto [lo, hi] = std::minmax_element(loads.begin(), loads.end());
        return *hi - *lo;
    };
    while (!loads.empty() && spread() > epsilon && (max_passes < 0 || passes < max_passes)) {
        ++passes;
        std::vector<std::size_t> order(loads.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&loads](std::size_t a, std::size_t b) {
            return loads[a] != loads[b] ? loads[a] < loads[b] : a < b;
        });
        for (std::size_t lo = 0, hi = order.size() - 1; lo < hi; ++lo, --hi) {
            std::int64_t & low = loads[order[lo]];
            std::int64_t & high = loads[order[hi]];
            if (high - low < 2) continue;
            std::int64_t const avg = (high + low) / 2;
            low += high - avg;
            high = avg;
        }
    }
    if (passes_out != nullptr) *passes_out = passes;
    return loads;
}

// Greedy list scheduling by full scan: each job, in order, goes to the
// lowest-index machine holding the minimum load. Returns final loads.
inline std::vector<std::int64_t> reference_greedy(std::vector<std::int64_t> loads,
                                                  std::vector<std::int64_t> const & jobs) {
    for (std::int64_t job : jobs) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < loads.size(); ++i) {
            if (loads[i] < loads[best]) best = i;
        }
        loads[best] += job;
    }
    return loads;
}

} // namespace rankrec::oracles
