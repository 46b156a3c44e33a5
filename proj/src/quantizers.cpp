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

#include "obm/quantizers.hpp"

#include "obm/log.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace obm
{

namespace
{
const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

// Interval index of z in [-range, range) on a D-level grid, clamped against round-off at the edges.
double midpoint(double z, double range, std::int64_t levels)
{
    const double d = static_cast<double>(levels);
    auto l = static_cast<std::int64_t>(std::floor((z + range) * d / (2.0 * range)));
    l = std::clamp<std::int64_t>(l, 0, levels - 1);
    return -range + range * static_cast<double>(2 * l + 1) / d;
}
} // namespace

void validate(const ModuloQuantizerParams &params)
{
    if (params.bits < 1 || params.bits > 30)
        throw std::invalid_argument("modulo quantizer: bits must be in [1, 30]");
    if (!(params.range > 0.0) || !std::isfinite(params.range))
        throw std::invalid_argument("modulo quantizer: range must be positive");
}

void validate(const ConventionalAdcParams &params)
{
    if (params.bits < 2 || params.bits > 30)
        throw std::invalid_argument("conventional ADC: bits must be in [2, 30]");
    if (!(params.threshold > 0.0) || !std::isfinite(params.threshold))
        throw std::invalid_argument("conventional ADC: threshold must be positive");
}

double modulo_fold(double z, double lambda)
{
    if (!std::isfinite(z))
        throw std::domain_error("modulo_fold: non-finite input");
    if (!(lambda > 0.0))
        throw std::domain_error("modulo_fold: lambda must be positive");
    const double period = 2.0 * lambda;
    double r = z - period * std::floor(z / period + 0.5);
    if (r >= lambda)
        r -= period;
    else if (r < -lambda)
        r += period;
    return r;
}

double uniform_quantize(double z, const ModuloQuantizerParams &params)
{
    if (!(z >= -params.range && z < params.range))
        throw std::domain_error("uniform_quantize: " + std::to_string(z) + " outside [-lambda, lambda)");
    return midpoint(z, params.range, params.levels());
}

CMatrix onebit_sample(const CMatrix &g)
{
    CMatrix h(g.rows(), g.cols());
    long ties = 0;
    for (Eigen::Index t = 0; t < g.cols(); ++t)
        for (Eigen::Index n = 0; n < g.rows(); ++n)
        {
            const cdouble v = g(n, t);
            ties += (v.real() == 0.0) + (v.imag() == 0.0);
            h(n, t) = cdouble(sign_of(v.real()) * inv_sqrt2, sign_of(v.imag()) * inv_sqrt2);
        }
    if (ties > 0)
        log::info("onebit_sample: " + std::to_string(ties) + " exact-zero components mapped to +1");
    return h;
}

CMatrix modulo_sample(const CMatrix &g, const ModuloQuantizerParams &params)
{
    validate(params);
    CMatrix y(g.rows(), g.cols());
    for (Eigen::Index t = 0; t < g.cols(); ++t)
        for (Eigen::Index n = 0; n < g.rows(); ++n)
        {
            const cdouble v = g(n, t);
            y(n, t) = cdouble(uniform_quantize(modulo_fold(v.real(), params.range), params),
                              uniform_quantize(modulo_fold(v.imag(), params.range), params));
        }
    return y;
}

CMatrix conventional_adc(const CMatrix &g, const ConventionalAdcParams &params)
{
    validate(params);
    const double gamma = params.threshold;
    const std::int64_t levels = std::int64_t{1} << params.bits;
    auto q = [&](double z) { return midpoint(std::clamp(z, -gamma, gamma), gamma, levels); };
    CMatrix out(g.rows(), g.cols());
    for (Eigen::Index t = 0; t < g.cols(); ++t)
        for (Eigen::Index n = 0; n < g.rows(); ++n)
            out(n, t) = cdouble(q(g(n, t).real()), q(g(n, t).imag()));
    return out;
}

QuantizedBatch acquire(const SnapshotBatch &batch, const ModuloQuantizerParams &params)
{
    return QuantizedBatch{onebit_sample(batch.data), modulo_sample(batch.data, params), params};
}

double per_channel_signal_std(const SourceScene &scene)
{
    return std::sqrt(scene.total_source_power() / 2.0);
}

} // namespace obm
