// Command-line front end: validate, run, batch, compare and replay scenarios.
//
// Exit codes: 0 success, 1 a scenario failed to run, 2 a config failed
// validation, could not be read, or the arguments were malformed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <rankrec/rankrec.hpp>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_scenario_failure = 1;
constexpr int exit_validation_failure = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<rankrec::Load> epsilon;
    std::optional<int> max_passes;
};

void apply(Overrides const & o, rankrec::ScenarioConfig & c) {
    if (o.seed) c.seed = *o.seed;
    if (o.epsilon) c.epsilon = *o.epsilon;
    if (o.max_passes) c.max_passes = *o.max_passes;
}

void print_error(std::string const & source, rankrec::error const & e) {
    std::cerr << source << ": " << rankrec::to_string(e.code()) << ": " << e.message() << '\n';
    for (auto const & d : e.details()) {
        std::cerr << "  - " << d << '\n';
    }
}

int exit_code_for(rankrec::errc code) {
    return code == rankrec::errc::validation_error || code == rankrec::errc::parse_error ? exit_validation_failure
                                                                                          : exit_scenario_failure;
}

// Loads one file or every *.json in a directory.
rankrec::LoadedBatch load_paths(std::vector<std::string> const & paths) {
    rankrec::LoadedBatch all;
    for (auto const & p : paths) {
        if (std::filesystem::is_directory(p)) {
            auto b = rankrec::load_batch_dir(p);
            for (std::size_t i = 0; i < b.sources.size(); ++i) {
                all.sources.push_back(std::move(b.sources[i]));
                all.configs.push_back(std::move(b.configs[i]));
                all.errors.push_back(std::move(b.errors[i]));
            }
            continue;
        }
        all.sources.push_back(p);
        try {
            all.configs.emplace_back(rankrec::load_config(p));
            all.errors.emplace_back(std::nullopt);
        } catch (rankrec::error const & e) {
            all.configs.emplace_back(std::nullopt);
            all.errors.emplace_back(e);
        }
    }
    return all;
}

int run_entries(rankrec::LoadedBatch batch, Overrides const & overrides, unsigned parallelism,
                rankrec::ExportFormat format, bool summary) {
    for (auto & c : batch.configs) {
        if (!c) continue;
        apply(overrides, *c);
        if (auto errs = rankrec::validation_errors(*c); !errs.empty()) {
            auto const i = static_cast<std::size_t>(&c - batch.configs.data());
            batch.errors[i] = rankrec::error(rankrec::errc::validation_error, "invalid after overrides", errs);
            c.reset();
        }
    }
    auto const entries = rankrec::run_loaded_batch(batch, parallelism);

    int status = exit_ok;
    std::vector<rankrec::ScenarioReport> reports;
    for (auto const & e : entries) {
        if (e.ok()) {
            reports.push_back(*e.report);
            continue;
        }
        print_error(e.source, rankrec::error(*e.failure, e.message, e.details));
        status = std::max(status, exit_code_for(*e.failure));
    }
    std::cout << rankrec::export_report(reports, format);

    if (summary && !reports.empty()) {
        std::size_t improved = 0;
        double sum = 0.0, lo = std::numeric_limits<double>::infinity();
        for (auto const & r : reports) {
            if (r.improvement_ratio > 1.0) ++improved;
            sum += r.improvement_ratio;
            lo = std::min(lo, r.improvement_ratio);
        }
        std::cerr << "scenarios=" << reports.size() << " improved=" << improved
                  << " mean_ratio=" << rankrec::format_ratio(sum / static_cast<double>(reports.size()))
                  << " min_ratio=" << rankrec::format_ratio(lo) << '\n';
    }
    return status;
}

} // namespace

int main(int argc, char ** argv) {
    CLI::App app{"Two-phase multiple-fault recovery simulator"};
    app.require_subcommand(1);

    Overrides overrides;
    std::string format_name = "text";
    unsigned parallelism = 1;

    auto add_common = [&](CLI::App * sub) {
        sub->add_option("--seed", overrides.seed, "Override the scenario seed");
        sub->add_option("--epsilon", overrides.epsilon, "Override the convergence spread");
        sub->add_option("--max-passes", overrides.max_passes, "Override the redistribution pass budget");
        sub->add_option("--format", format_name, "Output format: text, csv or json")
            ->check(CLI::IsMember({"text", "csv", "json"}));
    };

    std::string run_file;
    std::string log_path;
    auto * run = app.add_subcommand("run", "Run one scenario file");
    run->add_option("file", run_file, "Scenario file")->required();
    run->add_option("--log", log_path, "Write the recovered-mode event log here");
    add_common(run);

    std::string batch_dir;
    auto * batch = app.add_subcommand("batch", "Run every *.json scenario in a directory");
    batch->add_option("dir", batch_dir, "Scenario directory")->required()->check(CLI::ExistingDirectory);
    batch->add_option("--parallelism", parallelism, "Scenarios run concurrently")->check(CLI::PositiveNumber);
    add_common(batch);

    std::vector<std::string> compare_paths;
    auto * compare = app.add_subcommand("compare", "Recovered vs baseline summary for files or directories");
    compare->add_option("paths", compare_paths, "Scenario files or directories")->required();
    compare->add_option("--parallelism", parallelism, "Scenarios run concurrently")->check(CLI::PositiveNumber);
    add_common(compare);

    std::string validate_file;
    auto * validate = app.add_subcommand("validate", "Check a scenario file without running it");
    validate->add_option("file", validate_file, "Scenario file")->required();

    std::string replay_file;
    std::string replay_config;
    auto * replay = app.add_subcommand("replay", "Re-run an event log and verify it reproduces");
    replay->add_option("log", replay_file, "Event log written by run --log")->required();
    replay->add_option("--config", replay_config, "Reject the log unless it came from this scenario file");
    replay->add_option("--format", format_name, "Output format: text, csv or json")
        ->check(CLI::IsMember({"text", "csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const & e) {
        // Usage errors share the exit code of invalid configs; --help stays 0.
        return app.exit(e) == 0 ? exit_ok : exit_validation_failure;
    }

    try {
        auto const format = rankrec::parse_export_format(format_name);

        if (*validate) {
            try {
                auto const c = rankrec::load_config(validate_file);
                std::cout << validate_file << ": ok (" << c.loads.size() << " nodes, " << c.failures.size()
                          << " failures, " << c.arrivals.size() << " arrivals)\n";
                return exit_ok;
            } catch (rankrec::error const & e) {
                print_error(validate_file, e);
                return exit_validation_failure;
            }
        }

        if (*run) {
            rankrec::ScenarioConfig config;
            try {
                config = rankrec::load_config(run_file);
                apply(overrides, config);
                rankrec::validate(config);
            } catch (rankrec::error const & e) {
                print_error(run_file, e);
                return exit_validation_failure;
            }
            try {
                auto const report = rankrec::run_scenario(config);
                std::cout << rankrec::export_report({report}, format);
                if (!log_path.empty()) {
                    std::ofstream(log_path, std::ios::binary) << report.event_log;
                }
                return exit_ok;
            } catch (rankrec::error const & e) {
                print_error(run_file, e);
                return exit_scenario_failure;
            }
        }

        if (*batch) {
            return run_entries(rankrec::load_batch_dir(batch_dir), overrides, parallelism, format, false);
        }

        if (*compare) {
            return run_entries(load_paths(compare_paths), overrides, parallelism, format, true);
        }

        if (*replay) {
            std::ifstream in(replay_file, std::ios::binary);
            if (!in) {
                std::cerr << replay_file << ": cannot open\n";
                return exit_scenario_failure;
            }
            std::ostringstream buf;
            buf << in.rdbuf();
            try {
                auto const report = replay_config.empty()
                                        ? rankrec::replay(buf.str())
                                        : rankrec::replay(buf.str(), rankrec::load_config(replay_config));
                std::cout << rankrec::export_report({report}, format);
                return exit_ok;
            } catch (rankrec::error const & e) {
                print_error(replay_file, e);
                return exit_code_for(e.code());
            }
        }
    } catch (rankrec::error const & e) {
        print_error("rankrec", e);
        return exit_scenario_failure;
    }
    return exit_ok;
}
