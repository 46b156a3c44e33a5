// SPDX-License-Identifier: Apache-2.0
//
// obm: one-bit and modulo sampling for subspace direction finding
// Copyright (C) 2026 The obm contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "obm/config.hpp"
#include "obm/harness.hpp"
#include "obm/log.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace
{
std::filesystem::path default_out_dir()
{
    if (const char *env = std::getenv("OBM_OUT_DIR"); env && *env)
        return env;
    return "obm_out";
}
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"One-bit aided modulo sampling: DOA experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", obm::library_version());

    std::string config_path;
    std::string out_dir;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    bool timing = false;
    bool quiet = false;

    auto *run = app.add_subcommand("run", "Run every trial of an experiment and write results.csv, pd_summary.csv and manifest.json");
    run->add_option("config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory (default $OBM_OUT_DIR or ./obm_out)");
    run->add_option("--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "Override the base seed");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 1024));
    run->add_flag("--timing", timing, "Record per-trial wall time (output no longer byte-reproducible)");
    run->add_flag("-q,--quiet", quiet, "No progress output");

    std::string spectrum_out;
    std::string trace_out;
    int trace_snapshot = 15;
    double grid_step = 0.05;
    auto *spectrum = app.add_subcommand("spectrum", "MUSIC spectra of every pipeline on the first trial");
    spectrum->add_option("config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
    spectrum->add_option("--out", spectrum_out, "Spectrum CSV")->required();
    spectrum->add_option("--trace-out", trace_out, "Snapshot trace CSV of the first modulo pipeline");
    spectrum->add_option("--trace-snapshot", trace_snapshot, "Snapshot index for the trace")->check(CLI::NonNegativeNumber);
    spectrum->add_option("--grid-step", grid_step, "Angle grid step in degrees")->check(CLI::Range(1e-4, 5.0));

    CLI11_PARSE(app, argc, argv);

    try
    {
        obm::ExperimentConfig config = obm::load_config(config_path);
        if (run->parsed())
        {
            if (trials)
                config.trials = *trials;
            if (seed)
                config.base_seed = *seed;
            const std::filesystem::path dir = out_dir.empty() ? default_out_dir() : std::filesystem::path(out_dir);
            std::filesystem::create_directories(dir);

            obm::RunOptions options;
            options.threads = threads;
            options.record_wall_time = timing;
            if (!quiet)
                options.progress = [](std::size_t done, std::size_t total) {
                    if (done == total || done % 10 == 0)
                        std::cerr << "\r" << done << "/" << total << " tasks" << (done == total ? "\n" : "")
                                  << std::flush;
                };

            const obm::ResultTable table = obm::run_experiment(config, options);
            obm::export_csv(table, dir / "results.csv");
            const auto summary = obm::summarize(table);
            obm::export_summary_csv(summary, dir / "pd_summary.csv");
            obm::write_manifest(config, options, config_path, {"results.csv", "pd_summary.csv"},
                                dir / "manifest.json");
            if (!quiet)
                for (const auto &s : summary)
                    std::cout << s.pipeline << "  " << table.rows.front().sweep_name << "=" << s.sweep_value
                              << "  P_D=" << s.probability << " (" << s.detected << "/" << s.trials << ")\n";
        }
        else
        {
            obm::export_pipeline_spectra(config, spectrum_out, grid_step);
            if (!trace_out.empty())
                obm::export_snapshot_trace(config, trace_snapshot, trace_out);
        }
    }
    catch (const obm::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
