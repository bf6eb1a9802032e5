#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

#include <rankrec/cluster.hpp>
#include <rankrec/error.hpp>

namespace rankrec {

struct RankEntry {
    std::size_t rank = 0; // 1-based
    NodeId node;
    Load load = 0;

    friend bool operator==(RankEntry const &, RankEntry const &) = default;
};

// Alive nodes ordered by (load, id). Rank 1 is the least loaded node, rank
// size() ("last") the most loaded.
class RankTable {
public:
    RankTable() = default;

    std::span<RankEntry const> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    RankEntry const & at_rank(std::size_t rank) const {
        if (rank < 1 || rank > entries_.size()) {
            throw error(errc::invalid_argument, "rank out of range");
        }
        return entries_[rank - 1];
    }

    RankEntry const & last() const {
        if (entries_.empty()) {
            throw error(errc::empty_table, "last of an empty rank table");
        }
        return entries_.back();
    }

    friend bool operator==(RankTable const &, RankTable const &) = default;

private:
    friend RankTable build_rank_table(ClusterState const &);
    friend RankTable update_after_assignment(RankTable, NodeId, Load);

    static bool ranks_before(RankEntry const & a, RankEntry const & b) noexcept {
        return std::tie(a.load, a.node) < std::tie(b.load, b.node);
    }

    void renumber(std::size_t from) noexcept {
        for (std::size_t i = from; i < entries_.size(); ++i) {
            entries_[i].rank = i + 1;
        }
    }

    std::vector<RankEntry> entries_;
};

inline RankTable build_rank_table(ClusterState const & state) {
    RankTable table;
    for (auto const & n : state.nodes()) {
        if (n.alive()) {
            table.entries_.push_back({0, n.id, n.load});
        }
    }
    if (table.entries_.empty()) {
        throw error(errc::no_alive_nodes, "cannot rank an empty alive set");
    }
    std::ranges::sort(table.entries_, RankTable::ranks_before);
    table.renumber(0);
    return table;
}

inline NodeId get_least_rank_node(RankTable const & table) {
    if (table.empty()) {
        throw error(errc::empty_table, "no node to select");
    }
    return table.entries().front().node;
}

// Raises one node's load and moves its entry to the rank it now holds; the
// result equals build_rank_table on the correspondingly updated state.
inline RankTable update_after_assignment(RankTable table, NodeId node, Load delta) {
    if (delta < 1) {
        throw error(errc::invalid_size, "assignment delta must be positive");
    }
    auto & entries = table.entries_;
    auto it = std::ranges::find(entries, node, &RankEntry::node);
    if (it == entries.end()) {
        throw error(errc::unknown_node, to_string(node));
    }
    RankEntry moved = *it;
    moved.load += delta;
    auto const from = static_cast<std::size_t>(it - entries.begin());
    entries.erase(it);
    auto pos = std::upper_bound(entries.begin() + static_cast<std::ptrdiff_t>(from), entries.end(), moved,
                                RankTable::ranks_before);
    entries.insert(pos, moved);
    table.renumber(from);
    return table;
}

} // namespace rankrec
