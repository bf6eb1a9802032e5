#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include <rankrec/cluster.hpp>
#include <rankrec/error.hpp>
#include <rankrec/reassignment.hpp>

namespace rankrec {

inline constexpr int scenario_schema_version = 1;

// What the static-allocation baseline does with a crashed node's work.
enum class BaselinePolicy {
    stall,     // the work never completes; baseline response is infinite
    successor, // on detection the work moves to the failure's named successor
};

constexpr std::string_view to_string(BaselinePolicy p) noexcept {
    return p == BaselinePolicy::stall ? "stall" : "successor";
}

struct FailureSpec {
    Tick tick = 0;
    NodeId node;
    std::optional<NodeId> successor;

    friend bool operator==(FailureSpec const &, FailureSpec const &) = default;
};

struct ArrivalSpec {
    Tick tick = 0;
    Load size = 1;

    friend bool operator==(ArrivalSpec const &, ArrivalSpec const &) = default;
};

struct ScenarioConfig {
    int schema_version = scenario_schema_version;
    std::string id = "scenario";
    std::vector<Load> loads;
    // Optional per-node job breakdown; an empty inner list leaves that node's
    // load unstructured.
    std::vector<std::vector<Load>> jobs;
    std::vector<FailureSpec> failures;
    std::vector<ArrivalSpec> arrivals;
    Tick heartbeat_period = 10;
    int miss_threshold = 3;
    Load rate = 1;
    Tick fixed_overhead = 0;
    Load epsilon = 1;
    std::optional<int> max_passes;
    QueuePolicy queue_policy = QueuePolicy::failure_first;
    std::uint64_t seed = 0;
    BaselinePolicy baseline_policy = BaselinePolicy::stall;

    friend bool operator==(ScenarioConfig const &, ScenarioConfig const &) = default;
};

// Every violated constraint, each prefixed by the offending field path.
inline std::vector<std::string> validation_errors(ScenarioConfig const & c) {
    std::vector<std::string> errs;
    auto const n = c.loads.size();
    auto const node_ok = [n](NodeId id) { return id.value < n; };

    if (c.schema_version != scenario_schema_version) {
        errs.push_back("schema_version: unsupported version " + std::to_string(c.schema_version));
    }
    if (c.id.empty()) {
        errs.push_back("id: must not be empty");
    }
    if (n == 0) {
        errs.push_back("nodes.count: must be at least 1");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (c.loads[i] < 0) {
            errs.push_back("nodes.loads[" + std::to_string(i) + "]: must be non-negative");
        }
    }
    if (!c.jobs.empty()) {
        if (c.jobs.size() != n) {
            errs.push_back("nodes.jobs: expected one list per node");
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                Load sum = 0;
                bool sizes_ok = true;
                for (std::size_t k = 0; k < c.jobs[i].size(); ++k) {
                    if (c.jobs[i][k] < 1) {
                        errs.push_back("nodes.jobs[" + std::to_string(i) + "][" + std::to_string(k) +
                                       "]: job size must be positive");
                        sizes_ok = false;
                    }
                    sum += c.jobs[i][k];
                }
                if (sizes_ok && !c.jobs[i].empty() && sum != c.loads[i]) {
                    errs.push_back("nodes.jobs[" + std::to_string(i) + "]: sizes sum to " + std::to_string(sum) +
                                   " but load is " + std::to_string(c.loads[i]));
                }
            }
        }
    }

    std::set<NodeId> failing;
    for (auto const & f : c.failures) {
        failing.insert(f.node);
    }
    for (std::size_t i = 0; i < c.failures.size(); ++i) {
        auto const & f = c.failures[i];
        auto const at = "failures[" + std::to_string(i) + "]";
        if (f.tick < 0) {
            errs.push_back(at + ".tick: must be non-negative");
        }
        if (!node_ok(f.node)) {
            errs.push_back(at + ".node: unknown node " + to_string(f.node));
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (c.failures[k].node == f.node) {
                errs.push_back(at + ".node: " + to_string(f.node) + " already fails at failures[" +
                               std::to_string(k) + "]");
                break;
            }
        }
        if (f.successor) {
            if (!node_ok(*f.successor)) {
                errs.push_back(at + ".successor: unknown node " + to_string(*f.successor));
            } else if (failing.contains(*f.successor)) {
                errs.push_back(at + ".successor: " + to_string(*f.successor) + " itself fails");
            }
        } else if (c.baseline_policy == BaselinePolicy::successor) {
            errs.push_back(at + ".successor: required when baseline_policy is successor");
        }
    }
    for (std::size_t i = 0; i < c.arrivals.size(); ++i) {
        auto const at = "arrivals[" + std::to_string(i) + "]";
        if (c.arrivals[i].tick < 0) {
            errs.push_back(at + ".tick: must be non-negative");
        }
        if (c.arrivals[i].size < 1) {
            errs.push_back(at + ".size: must be positive");
        }
    }
    if (c.heartbeat_period < 1) errs.push_back("heartbeat.period: must be positive");
    if (c.miss_threshold < 1) errs.push_back("heartbeat.miss_threshold: must be positive");
    if (c.rate < 1) errs.push_back("response.rate: must be at least 1");
    if (c.fixed_overhead < 0) errs.push_back("response.fixed_overhead: must be non-negative");
    if (c.epsilon < 1) errs.push_back("recovery.epsilon: must be at least 1");
    if (c.max_passes && *c.max_passes < 1) errs.push_back("recovery.max_passes: must be at least 1");
    return errs;
}

inline void validate(ScenarioConfig const & c) {
    auto errs = validation_errors(c);
    if (!errs.empty()) {
        throw error(errc::validation_error, "scenario '" + c.id + "' is invalid", std::move(errs));
    }
}

inline nlohmann::json to_json(ScenarioConfig const & c) {
    using nlohmann::json;
    json failures = json::array();
    for (auto const & f : c.failures) {
        json j = {{"tick", f.tick}, {"node", f.node.value}};
        if (f.successor) j["successor"] = f.successor->value;
        failures.push_back(std::move(j));
    }
    json arrivals = json::array();
    for (auto const & a : c.arrivals) {
        arrivals.push_back({{"tick", a.tick}, {"size", a.size}});
    }
    json nodes = {{"count", c.loads.size()}, {"loads", c.loads}};
    if (!c.jobs.empty()) nodes["jobs"] = c.jobs;
    json recovery = {{"epsilon", c.epsilon}, {"queue_policy", std::string(to_string(c.queue_policy))}};
    recovery["max_passes"] = c.max_passes ? json(*c.max_passes) : json(nullptr);
    return {
        {"schema_version", c.schema_version},
        {"id", c.id},
        {"nodes", std::move(nodes)},
        {"failures", std::move(failures)},
        {"arrivals", std::move(arrivals)},
        {"heartbeat", {{"period", c.heartbeat_period}, {"miss_threshold", c.miss_threshold}}},
        {"response", {{"rate", c.rate}, {"fixed_overhead", c.fixed_overhead}}},
        {"recovery", std::move(recovery)},
        {"seed", c.seed},
        {"baseline_policy", std::string(to_string(c.baseline_policy))},
    };
}

// Single-line, key-sorted serialization; the basis of the config hash.
inline std::string canonical_json(ScenarioConfig const & c) { return to_json(c).dump(); }

namespace detail {

// Walks a JSON document, collecting every structural problem with its path.
class ConfigReader {
public:
    std::vector<std::string> errors;

    void allow_only(nlohmann::json const & obj, std::string const & path, std::set<std::string> const & keys) {
        for (auto const & [key, _] : obj.items()) {
            if (!keys.contains(key)) {
                errors.push_back(join(path, key) + ": unknown field");
            }
        }
    }

    template <class T>
    std::optional<T> integer(nlohmann::json const & obj, std::string const & path, std::string const & key,
                             bool required) {
        auto it = obj.find(key);
        if (it == obj.end() || (!required && it->is_null())) {
            if (required) errors.push_back(join(path, key) + ": missing");
            return std::nullopt;
        }
        return integer_value<T>(*it, join(path, key));
    }

    template <class T>
    std::optional<T> integer_value(nlohmann::json const & v, std::string const & where) {
        if (!v.is_number_integer()) {
            errors.push_back(where + ": expected an integer");
            return std::nullopt;
        }
        if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_unsigned()) return v.get<T>();
            auto const s = v.get<std::int64_t>();
            if (s < 0) {
                errors.push_back(where + ": must be non-negative");
                return std::nullopt;
            }
            return static_cast<T>(s);
        } else {
            if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
                errors.push_back(where + ": out of range");
                return std::nullopt;
            }
            auto const s = v.get<std::int64_t>();
            if (s < std::numeric_limits<T>::min() || s > std::numeric_limits<T>::max()) {
                errors.push_back(where + ": out of range");
                return std::nullopt;
            }
            return static_cast<T>(s);
        }
    }

    nlohmann::json const * object(nlohmann::json const & obj, std::string const & path, std::string const & key,
                                  bool required) {
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) errors.push_back(join(path, key) + ": missing");
            return nullptr;
        }
        if (!it->is_object()) {
            errors.push_back(join(path, key) + ": expected an object");
            return nullptr;
        }
        return &*it;
    }

    nlohmann::json const * array(nlohmann::json const & obj, std::string const & path, std::string const & key) {
        auto it = obj.find(key);
        if (it == obj.end()) return nullptr;
        if (!it->is_array()) {
            errors.push_back(join(path, key) + ": expected an array");
            return nullptr;
        }
        return &*it;
    }

    static std::string join(std::string const & path, std::string const & key) {
        return path.empty() ? key : path + "." + key;
    }
};

} // namespace detail

// Parses and validates a scenario document. Structural and semantic problems
// are all reported together in one ValidationError.
inline ScenarioConfig parse_config(nlohmann::json const & doc) {
    using nlohmann::json;
    if (!doc.is_object()) {
        throw error(errc::validation_error, "scenario must be a JSON object", {"<root>: expected an object"});
    }
    detail::ConfigReader r;
    ScenarioConfig c;
    r.allow_only(doc, "", {"schema_version", "id", "nodes", "failures", "arrivals", "heartbeat", "response",
                           "recovery", "seed", "baseline_policy"});

    if (auto v = r.integer<int>(doc, "", "schema_version", true)) c.schema_version = *v;
    if (auto it = doc.find("id"); it != doc.end()) {
        if (it->is_string()) {
            c.id = it->get<std::string>();
        } else {
            r.errors.push_back("id: expected a string");
        }
    }

    if (auto const * nodes = r.object(doc, "", "nodes", true)) {
        r.allow_only(*nodes, "nodes", {"count", "loads", "jobs"});
        auto const count = r.integer<std::int64_t>(*nodes, "nodes", "count", false);
        if (auto const * loads = r.array(*nodes, "nodes", "loads")) {
            for (std::size_t i = 0; i < loads->size(); ++i) {
                auto v = r.integer_value<Load>((*loads)[i], "nodes.loads[" + std::to_string(i) + "]");
                c.loads.push_back(v.value_or(0));
            }
            if (count && *count != static_cast<std::int64_t>(loads->size())) {
                r.errors.push_back("nodes.count: " + std::to_string(*count) + " does not match " +
                                   std::to_string(loads->size()) + " loads");
            }
        } else if (count) {
            if (*count < 0) {
                r.errors.push_back("nodes.count: must be non-negative");
            } else {
                c.loads.assign(static_cast<std::size_t>(*count), 0);
            }
        } else {
            r.errors.push_back("nodes: needs count or loads");
        }
        if (auto const * jobs = r.array(*nodes, "nodes", "jobs")) {
            for (std::size_t i = 0; i < jobs->size(); ++i) {
                auto const & list = (*jobs)[i];
                std::vector<Load> sizes;
                if (!list.is_array()) {
                    r.errors.push_back("nodes.jobs[" + std::to_string(i) + "]: expected an array");
                } else {
                    for (std::size_t k = 0; k < list.size(); ++k) {
                        auto v = r.integer_value<Load>(
                            list[k], "nodes.jobs[" + std::to_string(i) + "][" + std::to_string(k) + "]");
                        sizes.push_back(v.value_or(1));
                    }
                }
                c.jobs.push_back(std::move(sizes));
            }
        }
    }

    if (auto const * failures = r.array(doc, "", "failures")) {
        for (std::size_t i = 0; i < failures->size(); ++i) {
            auto const & f = (*failures)[i];
            auto const at = "failures[" + std::to_string(i) + "]";
            if (!f.is_object()) {
                r.errors.push_back(at + ": expected an object");
                continue;
            }
            r.allow_only(f, at, {"tick", "node", "successor"});
            FailureSpec spec;
            if (auto v = r.integer<Tick>(f, at, "tick", true)) spec.tick = *v;
            if (auto v = r.integer<std::uint32_t>(f, at, "node", true)) spec.node = NodeId{*v};
            if (auto v = r.integer<std::uint32_t>(f, at, "successor", false)) spec.successor = NodeId{*v};
            c.failures.push_back(spec);
        }
    }

    if (auto const * arrivals = r.array(doc, "", "arrivals")) {
        for (std::size_t i = 0; i < arrivals->size(); ++i) {
            auto const & a = (*arrivals)[i];
            auto const at = "arrivals[" + std::to_string(i) + "]";
            if (!a.is_object()) {
                r.errors.push_back(at + ": expected an object");
                continue;
            }
            r.allow_only(a, at, {"tick", "size"});
            ArrivalSpec spec;
            if (auto v = r.integer<Tick>(a, at, "tick", true)) spec.tick = *v;
            if (auto v = r.integer<Load>(a, at, "size", true)) spec.size = *v;
            c.arrivals.push_back(spec);
        }
    }

    if (auto const * hb = r.object(doc, "", "heartbeat", false)) {
        r.allow_only(*hb, "heartbeat", {"period", "miss_threshold"});
        if (auto v = r.integer<Tick>(*hb, "heartbeat", "period", false)) c.heartbeat_period = *v;
        if (auto v = r.integer<int>(*hb, "heartbeat", "miss_threshold", false)) c.miss_threshold = *v;
    }
    if (auto const * resp = r.object(doc, "", "response", false)) {
        r.allow_only(*resp, "response", {"rate", "fixed_overhead"});
        if (auto v = r.integer<Load>(*resp, "response", "rate", false)) c.rate = *v;
        if (auto v = r.integer<Tick>(*resp, "response", "fixed_overhead", false)) c.fixed_overhead = *v;
    }
    if (auto const * rec = r.object(doc, "", "recovery", false)) {
        r.allow_only(*rec, "recovery", {"epsilon", "max_passes", "queue_policy"});
        if (auto v = r.integer<Load>(*rec, "recovery", "epsilon", false)) c.epsilon = *v;
        if (auto v = r.integer<int>(*rec, "recovery", "max_passes", false)) c.max_passes = *v;
        if (auto it = rec->find("queue_policy"); it != rec->end()) {
            if (*it == "failure_first") {
                c.queue_policy = QueuePolicy::failure_first;
            } else if (*it == "fifo_by_time") {
                c.queue_policy = QueuePolicy::fifo_by_time;
            } else {
                r.errors.push_back("recovery.queue_policy: expected \"failure_first\" or \"fifo_by_time\"");
            }
        }
    }
    if (auto v = r.integer<std::uint64_t>(doc, "", "seed", false)) c.seed = *v;
    if (auto it = doc.find("baseline_policy"); it != doc.end()) {
        if (*it == "stall") {
            c.baseline_policy = BaselinePolicy::stall;
        } else if (*it == "successor") {
            c.baseline_policy = BaselinePolicy::successor;
        } else {
            r.errors.push_back("baseline_policy: expected \"stall\" or \"successor\"");
        }
    }

    auto errs = std::move(r.errors);
    for (auto & e : validation_errors(c)) {
        if (std::find(errs.begin(), errs.end(), e) == errs.end()) {
            errs.push_back(std::move(e));
        }
    }
    if (!errs.empty()) {
        throw error(errc::validation_error, "scenario '" + c.id + "' is invalid", std::move(errs));
    }
    return c;
}

inline ScenarioConfig parse_config(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (nlohmann::json::parse_error const & e) {
        throw error(errc::parse_error, e.what());
    }
    return parse_config(doc);
}

inline ScenarioConfig load_config(std::string const & path) {
    std::ifstream in(path);
    if (!in) {
        throw error(errc::parse_error, "cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(std::string_view(buf.str()));
    } catch (error const & e) {
        throw error(e.code(), path + ": " + e.message(), e.details());
    }
}

} // namespace rankrec
