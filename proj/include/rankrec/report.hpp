#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include <rankrec/config.hpp>
#include <rankrec/error.hpp>
#include <rankrec/simulator.hpp>

namespace rankrec {

enum class ExportFormat { text, csv, json };

inline ExportFormat parse_export_format(std::string_view name) {
    if (name == "text") return ExportFormat::text;
    if (name == "csv") return ExportFormat::csv;
    if (name == "json") return ExportFormat::json;
    throw error(errc::unsupported_format, std::string(name));
}

// One exported line per scenario. An empty baseline means it stalled.
struct ReportRow {
    std::string scenario_id;
    std::optional<Tick> baseline_response;
    Tick recovered_response = 0;
    double improvement_ratio = 1.0;
    int passes = 0;
    std::size_t transfers = 0;
    std::int64_t messages = 0;
    Tick detection_latency = 0;

    friend bool operator==(ReportRow const &, ReportRow const &) = default;
};

inline constexpr std::string_view report_columns[] = {
    "scenario_id", "baseline_response", "recovered_response", "improvement_ratio",
    "passes",      "transfers",         "messages",           "detection_latency",
};

inline ReportRow to_row(ScenarioReport const & r) {
    return {r.scenario_id,
            r.response_time_baseline,
            r.response_time_recovered,
            r.improvement_ratio,
            r.redistribution.passes,
            r.redistribution.transfers.size(),
            r.redistribution.messages,
            r.detection_latency};
}

// Fixed six decimals, independent of the global locale.
inline std::string format_ratio(double v) {
    if (std::isinf(v)) return "inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
    return std::string(buf, end);
}

namespace detail {

inline std::vector<std::string> cells(ReportRow const & row) {
    return {row.scenario_id,
            row.baseline_response ? std::to_string(*row.baseline_response) : "inf",
            std::to_string(row.recovered_response),
            format_ratio(row.improvement_ratio),
            std::to_string(row.passes),
            std::to_string(row.transfers),
            std::to_string(row.messages),
            std::to_string(row.detection_latency)};
}

inline std::string csv_field(std::string const & s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

inline nlohmann::json to_json(ReportRow const & row) {
    using nlohmann::json;
    return {
        {"scenario_id", row.scenario_id},
        {"baseline_response", row.baseline_response ? json(*row.baseline_response) : json(nullptr)},
        {"recovered_response", row.recovered_response},
        {"improvement_ratio", std::isinf(row.improvement_ratio) ? json(nullptr) : json(row.improvement_ratio)},
        {"passes", row.passes},
        {"transfers", row.transfers},
        {"messages", row.messages},
        {"detection_latency", row.detection_latency},
    };
}

inline std::vector<ReportRow> rows_from_json(nlohmann::json const & doc) {
    std::vector<ReportRow> rows;
    try {
        for (auto const & j : doc.at("reports")) {
            ReportRow row;
            row.scenario_id = j.at("scenario_id").get<std::string>();
            if (!j.at("baseline_response").is_null()) row.baseline_response = j.at("baseline_response").get<Tick>();
            row.recovered_response = j.at("recovered_response").get<Tick>();
            row.improvement_ratio = j.at("improvement_ratio").is_null() ? std::numeric_limits<double>::infinity()
                                                                        : j.at("improvement_ratio").get<double>();
            row.passes = j.at("passes").get<int>();
            row.transfers = j.at("transfers").get<std::size_t>();
            row.messages = j.at("messages").get<std::int64_t>();
            row.detection_latency = j.at("detection_latency").get<Tick>();
            rows.push_back(std::move(row));
        }
    } catch (nlohmann::json::exception const & e) {
        throw error(errc::parse_error, e.what());
    }
    return rows;
}

inline std::string export_rows(std::vector<ReportRow> const & rows, ExportFormat format) {
    switch (format) {
    case ExportFormat::csv: {
        std::string out;
        for (std::size_t i = 0; i < std::size(report_columns); ++i) {
            out += (i ? "," : "");
            out += report_columns[i];
        }
        out += '\n';
        for (auto const & row : rows) {
            auto const c = detail::cells(row);
            for (std::size_t i = 0; i < c.size(); ++i) {
                out += (i ? "," : "");
                out += detail::csv_field(c[i]);
            }
            out += '\n';
        }
        return out;
    }
    case ExportFormat::json: {
        nlohmann::json doc = {{"schema_version", 1}, {"columns", report_columns}, {"reports", nlohmann::json::array()}};
        for (auto const & row : rows) doc["reports"].push_back(to_json(row));
        return doc.dump(2) + "\n";
    }
    case ExportFormat::text: {
        std::vector<std::vector<std::string>> table;
        table.emplace_back(std::begin(report_columns), std::end(report_columns));
        for (auto const & row : rows) table.push_back(detail::cells(row));
        std::vector<std::size_t> width(std::size(report_columns), 0);
        for (auto const & line : table) {
            for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
        }
        std::string out;
        for (auto const & line : table) {
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (i == 0) {
                    out += line[i] + std::string(width[i] - line[i].size(), ' ');
                } else {
                    out += "  " + std::string(width[i] - line[i].size(), ' ') + line[i];
                }
            }
            out += '\n';
        }
        return out;
    }
    }
    throw error(errc::unsupported_format, "unknown export format");
}

inline std::string export_report(std::vector<ScenarioReport> const & reports, ExportFormat format) {
    std::vector<ReportRow> rows;
    rows.reserve(reports.size());
    for (auto const & r : reports) rows.push_back(to_row(r));
    return export_rows(rows, format);
}

// Outcome of one batch slot: a report, or the error that prevented it.
struct BatchEntry {
    std::string source;
    std::optional<ScenarioReport> report;
    std::optional<errc> failure;
    std::string message;
    std::vector<std::string> details;

    bool ok() const noexcept { return report.has_value(); }
};

inline BatchEntry failed_entry(std::string source, error const & e) {
    return {std::move(source), std::nullopt, e.code(), e.message(), e.details()};
}

// Runs every config, up to `parallelism` at a time. Results come back in
// input order whatever order the runs finish in.
inline std::vector<BatchEntry> run_batch(std::vector<ScenarioConfig> const & configs, unsigned parallelism = 1) {
    std::vector<BatchEntry> out(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            out[i].source = configs[i].id;
            try {
                out[i].report = run_scenario(configs[i]);
            } catch (error const & e) {
                out[i] = failed_entry(configs[i].id, e);
            }
        }
    };
    unsigned const threads = std::clamp<unsigned>(parallelism, 1, std::max<std::size_t>(configs.size(), 1));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    return out;
}

// Scenario files (*.json) of a directory in file name order; unreadable or
// invalid ones become error slots.
struct LoadedBatch {
    std::vector<std::string> sources;
    std::vector<std::optional<ScenarioConfig>> configs;
    std::vector<std::optional<error>> errors;
};

inline LoadedBatch load_batch_dir(std::filesystem::path const & dir) {
    std::vector<std::filesystem::path> files;
    for (auto const & entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::ranges::sort(files);
    LoadedBatch batch;
    for (auto const & f : files) {
        batch.sources.push_back(f.string());
        try {
            batch.configs.emplace_back(load_config(f.string()));
            batch.errors.emplace_back(std::nullopt);
        } catch (error const & e) {
            batch.configs.emplace_back(std::nullopt);
            batch.errors.emplace_back(e);
        }
    }
    return batch;
}

// Runs a loaded directory, keeping error slots for configs that failed to load.
inline std::vector<BatchEntry> run_loaded_batch(LoadedBatch const & batch, unsigned parallelism = 1) {
    std::vector<ScenarioConfig> valid;
    for (auto const & c : batch.configs) {
        if (c) valid.push_back(*c);
    }
    auto results = run_batch(valid, parallelism);
    std::vector<BatchEntry> out;
    std::size_t k = 0;
    for (std::size_t i = 0; i < batch.sources.size(); ++i) {
        if (batch.configs[i]) {
            out.push_back(std::move(results[k++]));
            out.back().source = batch.sources[i];
        } else {
            out.push_back(failed_entry(batch.sources[i], *batch.errors[i]));
        }
    }
    return out;
}

} // namespace rankrec
