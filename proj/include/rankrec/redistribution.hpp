#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include <rankrec/cluster.hpp>
#include <rankrec/error.hpp>
#include <rankrec/ranking.hpp>

namespace rankrec {

// One pairing step: the donor (higher rank) keeps the floor of the pair
// average and hands the rest to the receiver.
struct Transfer {
    NodeId donor;
    NodeId receiver;
    Load donor_before = 0;
    Load receiver_before = 0;
    Load avg_load = 0;
    Load load_to_transfer = 0;
    int pass_index = 0;

    Load donor_after() const noexcept { return avg_load; }
    Load receiver_after() const noexcept { return receiver_before + load_to_transfer; }

    friend bool operator==(Transfer const &, Transfer const &) = default;
};

struct RedistributionReport {
    int passes = 0;
    std::vector<Transfer> transfers;
    std::int64_t messages = 0;
    Load final_spread = 0;
    Load total_moved = 0;
    bool converged = true;

    friend bool operator==(RedistributionReport const &, RedistributionReport const &) = default;
};

struct PassResult {
    ClusterState state;
    std::vector<Transfer> transfers;
};

struct RedistributionResult {
    ClusterState state;
    RedistributionReport report;
};

// Two messages per nonzero transfer plus one load report per alive node per
// pass to the rank generator.
constexpr std::int64_t message_count(std::size_t nonzero_transfers, int passes, std::size_t n_alive) noexcept {
    return 2 * static_cast<std::int64_t>(nonzero_transfers) +
           static_cast<std::int64_t>(n_alive) * static_cast<std::int64_t>(passes);
}

// Pairs rank 1 with rank N, rank 2 with rank N-1, and so on, levelling each
// pair. The middle node of an odd-sized table is left alone.
inline PassResult pairing_pass(ClusterState state, int pass_index = 1) {
    RankTable const table = build_rank_table(state);
    auto const entries = table.entries();
    std::vector<Transfer> transfers;
    std::size_t i = 0;
    std::size_t last = entries.size() - 1;
    while (i < last) {
        auto const & receiver = entries[i];
        auto const & donor = entries[last];
        Load const avg_load = (donor.load + receiver.load) / 2;
        Load const load_to_transfer = donor.load - avg_load;
        // A pair within one unit is already level; moving would only swap it.
        if (donor.load - receiver.load >= 2) {
            auto & d = state.node(donor.node);
            auto & r = state.node(receiver.node);
            d.load = avg_load;
            r.load += load_to_transfer;
            d.job_sizes.clear();
            r.job_sizes.clear();
            transfers.push_back({donor.node, receiver.node, donor.load, receiver.load, avg_load,
                                 load_to_transfer, pass_index});
        }
        ++i;
        --last;
    }
    return {std::move(state), std::move(transfers)};
}

// Pass budget used when the caller gives none. Levelling a pair only halves
// its gap, so small clusters with large spreads need about log2(spread)
// passes rather than one per node.
inline int default_max_passes(std::size_t n_alive, Load spread) noexcept {
    auto const bits = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(std::max<Load>(spread, 0))));
    return std::max(static_cast<int>(n_alive), bits);
}

// Repeats pairing passes, re-ranking each time, until the alive spread is at
// most `epsilon` or `max_passes` is exhausted. Running out of passes is
// reported through `converged == false`; see require_converged.
inline RedistributionResult redistribute(ClusterState state, Load epsilon = 1,
                                         std::optional<int> max_passes = std::nullopt) {
    if (epsilon < 1) {
        throw error(errc::invalid_argument, "epsilon must be at least 1");
    }
    std::size_t const n_alive = state.alive_count();
    if (n_alive == 0) {
        throw error(errc::no_alive_nodes, "nothing to redistribute over");
    }
    Load spread = imbalance(state).spread;
    int const limit = max_passes.value_or(default_max_passes(n_alive, spread));
    if (limit < 1) {
        throw error(errc::invalid_argument, "max_passes must be at least 1");
    }

    RedistributionReport report;
    while (spread > epsilon && report.passes < limit) {
        ++report.passes;
        auto pass = pairing_pass(std::move(state), report.passes);
        state = std::move(pass.state);
        for (auto const & t : pass.transfers) {
            report.total_moved += t.load_to_transfer;
        }
        report.transfers.insert(report.transfers.end(), pass.transfers.begin(), pass.transfers.end());
        spread = imbalance(state).spread;
    }
    report.final_spread = spread;
    report.converged = spread <= epsilon;
    report.messages = message_count(report.transfers.size(), report.passes, n_alive);
    return {std::move(state), std::move(report)};
}

inline void require_converged(RedistributionReport const & report) {
    if (!report.converged) {
        throw error(errc::not_converged, "spread " + std::to_string(report.final_spread) + " after " +
                                             std::to_string(report.passes) + " passes");
    }
}

} // namespace rankrec
