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

#include "obm/bif_pipeline.hpp"

#include "obm/log.hpp"

#include <cmath>
#include <sstream>

namespace obm
{

namespace
{
void check_deadline(const BifConfig &config, const char *stage)
{
    if (config.deadline && std::chrono::steady_clock::now() > *config.deadline)
        throw BifTimeout(std::string("run_bif: deadline exceeded during ") + stage);
}

struct DecodeStep
{
    RMatrix recovered;
    std::vector<int> t_set;
};

DecodeStep decode_and_filter(const RMatrix &y_bar, const RMatrix &h_bar, const IfMatrix &a, double lambda)
{
    DecodeStep step;
    step.recovered = if_decode_batch(y_bar, a, lambda);
    step.t_set = sign_consistency_set(step.recovered, h_bar);
    return step;
}
} // namespace

void validate(const BifConfig &config)
{
    if (config.max_iters < 1)
        throw std::invalid_argument("BifConfig: max_iters must be >= 1");
    if (!(config.convergence_tol > 0.0))
        throw std::invalid_argument("BifConfig: convergence_tol must be positive");
    if (!(config.init_loading >= 0.0))
        throw std::invalid_argument("BifConfig: init_loading must be non-negative");
    validate(config.quantizer);
}

std::vector<int> sign_consistency_set(const RMatrix &recovered, const RMatrix &onebit_stacked)
{
    if (recovered.rows() != onebit_stacked.rows() || recovered.cols() != onebit_stacked.cols())
        throw std::invalid_argument("sign_consistency_set: dimension mismatch");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(recovered.cols()));
    for (Eigen::Index t = 0; t < recovered.cols(); ++t)
    {
        bool ok = true;
        for (Eigen::Index i = 0; i < recovered.rows() && ok; ++i)
            ok = (sign_of(recovered(i, t)) > 0.0) == (onebit_stacked(i, t) > 0.0);
        if (ok)
            out.push_back(static_cast<int>(t));
    }
    return out;
}

RealCompositeCovariance refine_covariance(const RMatrix &recovered, const std::vector<int> &t_set)
{
    if (t_set.empty())
        throw std::invalid_argument("refine_covariance: empty consistent set");
    RMatrix selected(recovered.rows(), static_cast<Eigen::Index>(t_set.size()));
    for (std::size_t i = 0; i < t_set.size(); ++i)
        selected.col(static_cast<Eigen::Index>(i)) = recovered.col(t_set[i]);
    RMatrix c = selected * selected.transpose() / static_cast<double>(t_set.size());
    c = 0.5 * (c + c.transpose()).eval();
    return RealCompositeCovariance{std::move(c)};
}

BifResult run_bif(const CMatrix &onebit, const CMatrix &modulo, const BifConfig &config)
{
    validate(config);
    if (onebit.rows() != modulo.rows() || onebit.cols() != modulo.cols())
        throw std::invalid_argument("run_bif: one-bit and modulo batches differ in shape");
    if (onebit.cols() == 0)
        throw std::invalid_argument("run_bif: empty batch");

    const double lambda = config.quantizer.range;
    if ((modulo.real().array().abs() > lambda).any() || (modulo.imag().array().abs() > lambda).any())
        throw std::invalid_argument("run_bif: modulo samples outside [-lambda, lambda]");

    const auto dim = 2 * onebit.rows();
    const RMatrix y_bar = stack_real(modulo);
    const RMatrix h_bar = stack_real(onebit);

    BifResult res;

    // Normalized covariance from the one-bit samples.
    const ComplexCovariance normalized = arcsin_law(onebit_empirical_covariance(onebit), &res.arcsin_clamped);
    const RealCompositeCovariance normalized_r = psd_project_relative(complex_to_real_composite(normalized));

    check_deadline(config, "initialization");
    const double loading = config.init_loading / std::sqrt(static_cast<double>(onebit.cols()));
    IfMatrix a = solve_if_matrix(normalized_r, loading, config.lll_delta);
    res.per_iteration_objective.push_back(a.objective);

    DecodeStep step = decode_and_filter(y_bar, h_bar, a, lambda);
    if (step.t_set.empty())
    {
        std::ostringstream os;
        os << "run_bif: no sign-consistent snapshot after initialization (T = " << onebit.cols()
           << ", lambda = " << lambda << ", init objective = " << a.objective
           << "); lambda is likely too small for the signal amplitude";
        throw BifError(os.str());
    }
    if (static_cast<Eigen::Index>(step.t_set.size()) < dim)
        res.rank_deficient = true;
    RealCompositeCovariance estimate = refine_covariance(step.recovered, step.t_set);

    for (int iter = 0; iter < config.max_iters; ++iter)
    {
        check_deadline(config, "refinement");
        RealCompositeCovariance gram = estimate;
        if (static_cast<Eigen::Index>(step.t_set.size()) < dim)
            gram = psd_project_relative(gram);
        const IfMatrix next_a = solve_if_matrix(gram, config.quantizer.noise_variance(), config.lll_delta);
        DecodeStep next = decode_and_filter(y_bar, h_bar, next_a, lambda);
        ++res.iterations_run;
        res.per_iteration_objective.push_back(next_a.objective);
        if (next.t_set.empty())
        {
            log::warning("run_bif: consistent set emptied at refinement " + std::to_string(iter + 1) +
                         "; keeping the previous estimate");
            res.stopped_on_empty_set = true;
            break;
        }
        if (static_cast<Eigen::Index>(next.t_set.size()) < dim)
            res.rank_deficient = true;
        RealCompositeCovariance next_estimate = refine_covariance(next.recovered, next.t_set);
        const double change = (next_estimate.matrix - estimate.matrix).norm() / estimate.matrix.norm();
        a = next_a;
        step = std::move(next);
        estimate = std::move(next_estimate);
        if (change < config.convergence_tol)
        {
            res.converged = true;
            break;
        }
    }
    if (res.rank_deficient)
        log::info("run_bif: fewer than 2N consistent snapshots in some estimate");

    // Complex covariance from the consistent recovered snapshots.
    res.recovered = unstack_real(step.recovered);
    CMatrix selected(res.recovered.rows(), static_cast<Eigen::Index>(step.t_set.size()));
    for (std::size_t i = 0; i < step.t_set.size(); ++i)
        selected.col(static_cast<Eigen::Index>(i)) = res.recovered.col(step.t_set[i]);
    res.covariance = sample_covariance(selected);
    res.consistent_set = std::move(step.t_set);
    return res;
}

double nmse_db(const CMatrix &estimate, const CMatrix &truth)
{
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw std::invalid_argument("nmse_db: shape mismatch");
    const double denom = truth.squaredNorm();
    if (!(denom > 0.0))
        throw std::invalid_argument("nmse_db: truth is zero");
    const double ratio = (estimate - truth).squaredNorm() / denom;
    if (ratio <= 0.0)
        return -200.0;
    return std::max(10.0 * std::log10(ratio), -200.0);
}

} // namespace obm
