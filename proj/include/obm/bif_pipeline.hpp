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

#ifndef OBM_BIF_PIPELINE_HPP
#define OBM_BIF_PIPELINE_HPP

#include "obm/covariance.hpp"
#include "obm/lattice_if.hpp"
#include "obm/quantizers.hpp"
#include "obm/types.hpp"

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace obm
{

struct BifConfig
{
    int max_iters = 10;
    double convergence_tol = 1e-4; // relative Frobenius change of the real-composite estimate
    ModuloQuantizerParams quantizer;
    double lll_delta = 0.99;
    // Diagonal loading of the initial normalized Gram matrix, scaled as init_loading / sqrt(T).
    // Keeps the lattice reduction from exploiting finite-sample error of the one-bit estimate;
    // 0 solves the initialization problem on the bare estimate.
    double init_loading = 0.1;
    // Checked between stages; exceeding it throws BifTimeout.
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

void validate(const BifConfig &config);

struct BifResult
{
    ComplexCovariance covariance;      // final C-hat from the consistent snapshots
    std::vector<int> consistent_set;   // zero-based snapshot indices, ascending
    int iterations_run = 0;            // refinement iterations after the initialization
    CMatrix recovered;                 // unwrapped g-hat(t) for every t
    std::vector<double> per_iteration_objective; // IF objective: init solve first, then one per refinement
    bool rank_deficient = false;       // some estimate used fewer than 2N snapshots
    bool converged = false;
    bool stopped_on_empty_set = false;
    long arcsin_clamped = 0;
};

// Raised when the initial decode leaves no sign-consistent snapshot.
class BifError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class BifTimeout : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Snapshots whose recovered components all carry the sign of the one-bit observation.
std::vector<int> sign_consistency_set(const RMatrix &recovered, const RMatrix &onebit_stacked);

// (1/|T|) sum_{t in T} g(t) g(t)^T over the selected columns, symmetrized.
RealCompositeCovariance refine_covariance(const RMatrix &recovered, const std::vector<int> &t_set);

// One-bit-aided blind integer-forcing recovery of the modulo samples.
BifResult run_bif(const CMatrix &onebit, const CMatrix &modulo, const BifConfig &config);

inline BifResult run_bif(const QuantizedBatch &batch, BifConfig config)
{
    config.quantizer = batch.params;
    return run_bif(batch.onebit, batch.modulo, config);
}

// 10 log10(|est - truth|_F^2 / |truth|_F^2), floored at -200 dB.
double nmse_db(const CMatrix &estimate, const CMatrix &truth);

} // namespace obm

#endif
