#pragma once

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "formsim/batch.hpp"
#include "formsim/config.hpp"
#include "formsim/experiment.hpp"
#include "formsim/io.hpp"
#include "formsim/metrics.hpp"

namespace formsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitUnwritable = 3;
inline constexpr const char* kSeedEnvVar = "FORMATION_SIM_SEED";

struct CliConfig {
    std::optional<std::string> group;
    std::optional<std::string> config_path;
    std::string out_dir = "formsim_out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> parallelism;
    std::optional<std::string> controller;
};

namespace detail {

inline bool writable_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) return false;
    const auto probe = dir / ".formsim_write_probe";
    {
        std::ofstream f(probe);
        if (!f) return false;
    }
    std::filesystem::remove(probe, ec);
    return true;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace detail

/// Command-line entry point. `args` excludes the program name.
///
/// Writes one trace CSV per configuration, `summary_<group>.json` and
/// `manifest.json` into the output directory. Returns 0 on success, 2 on a bad
/// flag or config value, 3 when the output directory is not writable.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Hold-and-hit formation navigation simulator", "formsim"};
    CliConfig cli;
    app.add_option("--group", cli.group, "Experiment group")
        ->check(CLI::IsMember({"comp1", "comp2", "rob1", "rob2", "custom"}));
    app.add_option("--config", cli.config_path, "INI-style configuration file");
    app.add_option("--out", cli.out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", cli.seed, "Base seed (falls back to $FORMATION_SIM_SEED)");
    app.add_option("--runs", cli.runs, "Runs per configuration")->check(CLI::PositiveNumber);
    app.add_option("--parallelism", cli.parallelism, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--controller", cli.controller, "Slave controller")
        ->check(CLI::IsMember({"dem", "baseline"}));

    std::vector<std::string> argv_store{"formsim"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "formsim: " << e.what() << '\n';
        return kExitBadConfig;
    }

    Settings settings;
    FileOptions file_opts;
    if (cli.config_path) {
        std::ifstream in(*cli.config_path);
        if (!in) {
            err << "formsim: cannot read config file '" << *cli.config_path << "'\n";
            return kExitBadConfig;
        }
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            load_config_text(buf.str(), settings, file_opts);
        } catch (const ConfigError& e) {
            err << "formsim: " << e.what() << '\n';
            return kExitBadConfig;
        }
    }

    Group group = Group::custom;
    if (cli.group) {
        group = parse_group(*cli.group);
    } else if (file_opts.group) {
        group = *file_opts.group;
    } else {
        err << "formsim: no experiment group; pass --group or set experiment.group\n";
        return kExitBadConfig;
    }

    if (cli.seed) {
        settings.seed = *cli.seed;
    } else if (!file_opts.seed_set) {
        if (const char* env = std::getenv(kSeedEnvVar)) {
            try {
                settings.seed = detail::to_uint(kSeedEnvVar, env);
            } catch (const ConfigError& e) {
                err << "formsim: " << e.what() << '\n';
                return kExitBadConfig;
            }
        }
    }
    if (cli.runs) settings.runs = *cli.runs;
    if (cli.controller) {
        settings.controller = *cli.controller == "baseline" ? Controller::baseline : Controller::dem;
    }
    const std::size_t parallelism = cli.parallelism.value_or(file_opts.parallelism.value_or(1));

    std::vector<ExperimentConfig> configs;
    try {
        configs = build_group(group, settings);
    } catch (const std::exception& e) {
        err << "formsim: invalid configuration: " << e.what() << '\n';
        return kExitBadConfig;
    }

    const std::filesystem::path out_dir(cli.out_dir);
    if (!detail::writable_directory(out_dir)) {
        err << "formsim: output directory '" << cli.out_dir << "' is not writable\n";
        return kExitUnwritable;
    }

    nlohmann::ordered_json summary;
    summary["group"] = to_string(group);
    summary["configs"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json files = nlohmann::ordered_json::array();

    for (const ExperimentConfig& config : configs) {
        const std::vector<RunTrace> traces = run_batch(config, parallelism);
        const std::vector<std::size_t> cycles =
            config.selected_cycles.value_or(selected_cycles(config.schedule));
        GroupSummary s;
        try {
            s = summarize(traces, cycles);
        } catch (const std::domain_error& e) {
            err << "formsim: config key 'metrics.selected_cycles': " << e.what() << '\n';
            return kExitBadConfig;
        }

        const std::string csv_name = config.name + ".csv";
        {
            std::ofstream csv(out_dir / csv_name, std::ios::binary);
            if (!csv) {
                err << "formsim: cannot write '" << (out_dir / csv_name).string() << "'\n";
                return kExitUnwritable;
            }
            write_trace_csv(csv, traces);
        }
        auto entry = to_json(config, s);
        entry["trace_csv"] = csv_name;
        summary["configs"].push_back(std::move(entry));
        files.push_back(csv_name);
        out << config.name << ": max |pos| " << format_g9(s.max_abs_pos_err) << " m, max |ang| "
            << format_g9(s.max_abs_ang_err) << " deg over " << config.runs << " runs\n";
    }

    const std::string summary_name = std::string("summary_") + to_string(group) + ".json";
    files.push_back(summary_name);
    {
        std::ofstream f(out_dir / summary_name, std::ios::binary);
        if (!f) return kExitUnwritable;
        f << summary.dump(2) << '\n';
    }

    nlohmann::ordered_json manifest;
    manifest["tool"] = "formsim";
    manifest["group"] = to_string(group);
    manifest["seed"] = settings.seed;
    manifest["runs"] = settings.runs;
    manifest["parallelism"] = parallelism;
    manifest["controller"] = to_string(settings.controller);
    manifest["config_file"] = cli.config_path ? nlohmann::ordered_json(*cli.config_path) : nullptr;
    manifest["configs"] = nlohmann::ordered_json::array();
    for (const auto& c : configs) manifest["configs"].push_back(to_json(c));
    manifest["files"] = files;
    manifest["generated_at"] = detail::utc_timestamp();
    {
        std::ofstream f(out_dir / "manifest.json", std::ios::binary);
        if (!f) return kExitUnwritable;
        f << manifest.dump(2) << '\n';
    }
    return kExitOk;
}

}  // namespace formsim
