// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Command-line front end: `run`, `oracle`, `list-experiments`, `version`.

#include "amfisac/bench.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <ostream>

namespace amfisac {

namespace detail {

inline int report_error(std::ostream& err, ErrorCode code, const std::string& what) {
    err << "ERROR " << to_string(code) << ": " << what << '\n';
    return exit_code_for(code);
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path, std::ostream& out) {
    const std::string csv = to_csv(rows);
    if (path.empty() || path == "-") out << csv;
    else write_file_atomic(path, csv);
}

} // namespace detail

/**
 * Entry point for the `amfisac` tool. Results go to `out` (or the output
 * file); diagnostics go to `err` prefixed with `ERROR <code>:`.
 */
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Superimposed-pilot ISAC simulator", "amfisac"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
    run->add_option("config", config_path, "Config file")->required();
    auto* out_opt = run->add_option("--out", out_path, "CSV output path ('-' for stdout)");
    auto* threads_opt = run->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    auto* seed_opt = run->add_option("--seed", seed, "Master seed");

    unsigned oracle_threads = 0;
    std::string oracle_out;
    auto* oracle = app.add_subcommand("oracle", "Run the enumeration oracle suite");
    oracle->add_option("--threads", oracle_threads, "Worker threads (0 = hardware concurrency)");
    oracle->add_option("--out", oracle_out, "CSV output path ('-' for stdout)");

    auto* list = app.add_subcommand("list-experiments", "Print the registered experiment names");
    auto* version = app.add_subcommand("version", "Print the version");

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
    try {
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        return detail::report_error(err, ErrorCode::ConfigError, e.what());
    }

    try {
        if (*list) {
            for (const auto& n : experiment_names()) out << n << '\n';
        } else if (*version) {
            out << "amfisac " << kVersion << '\n';
        } else if (*oracle) {
            ExperimentConfig c = oracle_suite_config();
            c.threads = oracle_threads;
            detail::emit_csv(run_experiment(c), oracle_out, out);
        } else if (*run) {
            ExperimentConfig c = load_config(config_path);
            if (*seed_opt) c.seed = seed;
            if (*threads_opt) c.threads = threads;
            if (*out_opt) c.output = out_path;
            detail::emit_csv(run_experiment(c), c.output, out);
        }
    } catch (const Error& e) {
        return detail::report_error(err, e.code(), e.what());
    } catch (const std::exception& e) {
        return detail::report_error(err, ErrorCode::IoError, e.what());
    }
    return 0;
}

} // namespace amfisac
