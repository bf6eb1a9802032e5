#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include <rankrec/cluster.hpp>
#include <rankrec/error.hpp>

namespace rankrec {

// Heartbeat bookkeeping for a fixed membership. A node is suspected once it
// has been silent for strictly more than miss_threshold * period ticks.
class HeartbeatLedger {
public:
    explicit HeartbeatLedger(Tick period = 10, int miss_threshold = 3)
        : period_(period), miss_threshold_(miss_threshold) {
        if (period < 1 || miss_threshold < 1) {
            throw error(errc::invalid_argument, "heartbeat period and miss_threshold must be positive");
        }
    }

    void register_node(NodeId node, Tick now = 0) { last_seen_.try_emplace(node, now); }

    // Out-of-order heartbeats never move last_seen backwards.
    HeartbeatLedger & record_heartbeat(NodeId node, Tick now) {
        auto it = last_seen_.find(node);
        if (it == last_seen_.end()) {
            throw error(errc::unknown_node, to_string(node));
        }
        it->second = std::max(it->second, now);
        return *this;
    }

    bool suspected(NodeId node, Tick now) const {
        auto it = last_seen_.find(node);
        if (it == last_seen_.end()) {
            throw error(errc::unknown_node, to_string(node));
        }
        return now - it->second > timeout();
    }

    // Suspected nodes in ascending id order.
    std::vector<NodeId> detect_failures(Tick now) const {
        std::vector<NodeId> out;
        for (auto const & [node, seen] : last_seen_) {
            if (now - seen > timeout()) {
                out.push_back(node);
            }
        }
        return out;
    }

    Tick last_seen(NodeId node) const {
        auto it = last_seen_.find(node);
        if (it == last_seen_.end()) {
            throw error(errc::unknown_node, to_string(node));
        }
        return it->second;
    }

    Tick period() const noexcept { return period_; }
    int miss_threshold() const noexcept { return miss_threshold_; }
    Tick timeout() const noexcept { return period_ * miss_threshold_; }

private:
    Tick period_;
    int miss_threshold_;
    std::map<NodeId, Tick> last_seen_;
};

} // namespace rankrec
