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

#ifndef OBM_QUANTIZERS_HPP
#define OBM_QUANTIZERS_HPP

#include "obm/array_model.hpp"
#include "obm/types.hpp"

namespace obm
{

// B-bit uniform quantizer on the modulo range [-lambda, lambda).
struct ModuloQuantizerParams
{
    int bits = 4;
    double range = 1.0; // lambda

    std::int64_t levels() const { return std::int64_t{1} << bits; }
    double step() const { return 2.0 * range / static_cast<double>(levels()); }
    // Variance of a uniform error over one step, lambda^2 / (3 D^2).
    double noise_variance() const { return range * range / (3.0 * static_cast<double>(levels() * levels())); }
};

void validate(const ModuloQuantizerParams &params);

// Saturating uniform quantizer on [-gamma, gamma] with 2^b levels.
struct ConventionalAdcParams
{
    int bits = 5;
    double threshold = 1.0; // gamma
};

void validate(const ConventionalAdcParams &params);

struct QuantizedBatch
{
    CMatrix onebit;  // entries (+-1 +- j) / sqrt(2)
    CMatrix modulo;  // I/Q on the reproduction grid of params
    ModuloQuantizerParams params;
};

// z - 2 lambda floor(z / (2 lambda) + 1/2), in [-lambda, lambda).
double modulo_fold(double z, double lambda);

// Midpoint of the half-open interval [-l + 2 l i / D, -l + 2 l (i+1) / D) holding z.
double uniform_quantize(double z, const ModuloQuantizerParams &params);

// sign with sign(0) = +1.
inline double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

CMatrix onebit_sample(const CMatrix &g);
CMatrix modulo_sample(const CMatrix &g, const ModuloQuantizerParams &params);
CMatrix conventional_adc(const CMatrix &g, const ConventionalAdcParams &params);

inline CMatrix onebit_sample(const SnapshotBatch &batch) { return onebit_sample(batch.data); }
inline CMatrix modulo_sample(const SnapshotBatch &batch, const ModuloQuantizerParams &params)
{
    return modulo_sample(batch.data, params);
}
inline CMatrix conventional_adc(const SnapshotBatch &batch, const ConventionalAdcParams &params)
{
    return conventional_adc(batch.data, params);
}

// Both acquisition paths of the one-bit-aided modulo front end.
QuantizedBatch acquire(const SnapshotBatch &batch, const ModuloQuantizerParams &params);

// Per-channel standard deviation sqrt(sum_k sigma_k^2 / 2) of the source mixture.
double per_channel_signal_std(const SourceScene &scene);

} // namespace obm

#endif
