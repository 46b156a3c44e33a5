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

#ifndef OBM_HARNESS_HPP
#define OBM_HARNESS_HPP

#include "obm/bif_pipeline.hpp"
#include "obm/config.hpp"
#include "obm/covariance.hpp"
#include "obm/doa_subspace.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace obm
{

inline constexpr int results_schema_version = 1;

enum class TrialStatus
{
    ok,
    failed,
    timeout
};

std::string to_string(TrialStatus status);

struct ResultRow
{
    std::string pipeline;
    int total_bits = 0;
    std::string sweep_name;
    double sweep_value = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    bool detected = false;
    std::vector<double> angle_errors_deg; // one per true source; +inf when no estimate
    std::optional<double> nmse_db;
    std::optional<double> wall_s;
    TrialStatus status = TrialStatus::ok;

    bool operator==(const ResultRow &) const = default;
};

struct ResultTable
{
    int num_sources = 0;
    std::vector<ResultRow> rows;

    bool operator==(const ResultTable &) const = default;
};

struct RunOptions
{
    int threads = 1;
    bool record_wall_time = false;
    // Called after each finished (sweep value, trial) task with (done, total); may run on worker threads.
    std::function<void(std::size_t, std::size_t)> progress;
};

// Output of one acquisition + estimation pipeline on one batch.
struct PipelineOutcome
{
    ComplexCovariance covariance;
    CMatrix samples; // recovered (modulo), quantized (conventional) or raw snapshots
    DoaEstimate estimate;
    std::optional<BifResult> bif;
};

// Modulo range and conventional threshold for a scene, from the config's scale factors.
ModuloQuantizerParams modulo_params(const ExperimentConfig &config, const PipelineSpec &spec, const SourceScene &scene);
ConventionalAdcParams conventional_params(const ExperimentConfig &config, const PipelineSpec &spec,
                                          const SourceScene &scene);

PipelineOutcome run_pipeline(const ExperimentConfig &config, const PipelineSpec &spec, const SourceScene &scene,
                             const SnapshotBatch &batch,
                             std::optional<std::chrono::steady_clock::time_point> deadline = std::nullopt);

// Every (pipeline, sweep value, trial) of the config. Trial i uses seed base_seed + i at every sweep
// value, and every pipeline sees the same snapshots. Rows are ordered by (pipeline, sweep, trial)
// independently of the thread count.
ResultTable run_experiment(const ExperimentConfig &config, const RunOptions &options = {});

// Fraction of matching rows with detected = true; std::invalid_argument when nothing matches.
double detection_probability(const ResultTable &table, const std::string &pipeline, double sweep_value);

struct DetectionSummary
{
    std::string pipeline;
    int total_bits = 0;
    double sweep_value = 0.0;
    int trials = 0;
    int detected = 0;
    double probability = 0.0;
};

std::vector<DetectionSummary> summarize(const ResultTable &table);

// CSV with header schema_version, pipeline, total_bits, sweep_name, sweep_value, trial, seed, detected,
// err_theta_1..K, nmse_db, wall_s, status. Doubles use the shortest round-trip representation.
void export_csv(const ResultTable &table, const std::filesystem::path &path);
std::string to_csv(const ResultTable &table);
ResultTable parse_csv(const std::string &text);
ResultTable read_csv(const std::filesystem::path &path);

void export_summary_csv(const std::vector<DetectionSummary> &summary, const std::filesystem::path &path);

// MUSIC pseudo-spectrum in dB relative to its peak on the grid (-90, 90) with the given step.
struct Spectrum
{
    std::vector<double> theta_deg;
    std::vector<double> level_db;
};

Spectrum music_spectrum_db(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry, double step_deg);

// Columns theta_deg, spectrum_db.
void export_spectrum(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry,
                     const std::filesystem::path &path, double step_deg = 0.05);

// Spectra of every pipeline on the first trial at the first sweep value, columns
// pipeline, total_bits, theta_deg, spectrum_db.
void export_pipeline_spectra(const ExperimentConfig &config, const std::filesystem::path &path,
                             double step_deg = 0.05);

// One snapshot of the first modulo pipeline: per real component the truth, the one-bit sign,
// the modulo sample and the recovered value. Columns pipeline, snapshot, component, part, sensor,
// truth, onebit, modulo, recovered, consistent.
void export_snapshot_trace(const ExperimentConfig &config, int snapshot, const std::filesystem::path &path);

// Run manifest (JSON): config hash, seeds, versions, outputs.
void write_manifest(const ExperimentConfig &config, const RunOptions &options, const std::string &config_path,
                    const std::vector<std::string> &outputs, const std::filesystem::path &path);

std::string library_version();

} // namespace obm

#endif
