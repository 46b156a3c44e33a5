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

#ifndef OBM_CONFIG_HPP
#define OBM_CONFIG_HPP

#include "obm/array_model.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace obm
{

inline constexpr int config_schema_version = 1;

// Malformed or schema-violating experiment configuration.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class SweepKind
{
    single,
    snr,       // SNR (dB) of one source
    snapshots  // snapshot count T
};

struct Sweep
{
    SweepKind kind = SweepKind::single;
    std::vector<double> values; // one placeholder value for a single-point run
    int source = 1;             // zero-based index of the swept source (snr sweep)

    std::string name() const;
};

enum class PipelineKind
{
    modulo,       // one-bit + B-bit modulo ADC, blind integer-forcing recovery
    conventional, // b-bit saturating ADC
    unquantized   // reference: full-precision samples
};

struct PipelineSpec
{
    PipelineKind kind = PipelineKind::modulo;
    int bits = 4;

    std::string id() const;
    // B + 1 for the one-bit-aided modulo front end, b for the conventional ADC, 0 for unquantized.
    int total_bits() const;
};

enum class DoaMethod
{
    root_music,
    spectral_music
};

struct ExperimentConfig
{
    int schema_version = config_schema_version;
    std::string name = "experiment";

    ArrayGeometry geometry = ArrayGeometry::ula(16);
    std::vector<double> doas_deg;
    std::vector<double> snr_db;
    double noise_power = 1.0;
    int snapshots = 10000;

    Sweep sweep;
    std::vector<PipelineSpec> pipelines;
    int trials = 1;
    std::uint64_t base_seed = 1;
    double detection_tol_deg = 0.1;

    double lambda_scale = 0.6; // modulo range in units of the per-channel signal std
    double gamma_scale = 4.0;  // conventional ADC threshold in the same units

    int bif_max_iters = 10;
    double bif_convergence_tol = 1e-4;
    double bif_lll_delta = 0.99;
    double bif_init_loading = 0.1;

    DoaMethod doa_method = DoaMethod::root_music;
    double grid_step_deg = 0.01;

    double trial_timeout_s = 120.0;
};

// Throws ConfigError with the offending key on any schema violation.
ExperimentConfig parse_config(const std::string &json_text);
ExperimentConfig load_config(const std::filesystem::path &path);

// Canonical JSON text of the configuration (stable key order).
std::string to_json_text(const ExperimentConfig &config);

// FNV-1a 64-bit hash of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig &config);

// Scene at one sweep point.
SourceScene scene_at(const ExperimentConfig &config, double sweep_value);

} // namespace obm

#endif
