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

#ifndef OBM_ARRAY_MODEL_HPP
#define OBM_ARRAY_MODEL_HPP

#include "obm/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace obm
{

enum class GeometryKind
{
    ula,
    coprime,
    nested,
    custom
};

// Linear array whose sensors sit at d_n half-wavelengths from the origin.
class ArrayGeometry
{
public:
    static ArrayGeometry ula(int n);
    // {P q : 0 <= q <= Q-1} U {Q p : 0 <= p <= P-1}, N = P + Q - 1 sensors. Requires gcd(P, Q) = 1.
    static ArrayGeometry coprime(int p, int q);
    // {1..N1} U {m (N1 + 1) : 1 <= m <= N2}
    static ArrayGeometry nested(int n1, int n2);
    // Indices are sorted; duplicates or negatives throw std::invalid_argument.
    static ArrayGeometry custom(std::vector<int> indices);

    std::span<const int> indices() const { return indices_; }
    int size() const { return static_cast<int>(indices_.size()); }
    GeometryKind kind() const { return kind_; }
    // Constructor arguments: {N} for ULA, {P, Q} coprime, {N1, N2} nested, empty for custom.
    std::span<const int> parameters() const { return params_; }

    // True when the sensors occupy consecutive integer positions (root MUSIC applies).
    bool is_uniform() const;

    std::string describe() const;

    bool operator==(const ArrayGeometry &) const = default;

private:
    ArrayGeometry(GeometryKind kind, std::vector<int> indices, std::vector<int> params);

    GeometryKind kind_;
    std::vector<int> indices_;
    std::vector<int> params_;
};

// Generative model of the array snapshots. Angles in degrees, powers linear.
struct SourceScene
{
    std::vector<double> doas_deg;
    std::vector<double> source_powers;
    double noise_power = 1.0;
    int snapshots = 1;

    int num_sources() const { return static_cast<int>(doas_deg.size()); }
    double total_source_power() const;
};

// Throws std::invalid_argument on a malformed scene. K = 0 is accepted only when allow_empty is set.
void validate(const SourceScene &scene, bool allow_empty = false);

// Source power from SNR_k = 20 log10(sigma_k / sigma).
double power_from_snr_db(double snr_db, double noise_power);

struct SnapshotBatch
{
    CMatrix data; // N x T, column t is g(t)
    ArrayGeometry geometry;
    std::uint64_t rng_seed = 0;
};

// a_n = exp(j pi d_n sin(theta)); theta in (-90, 90) degrees, otherwise std::domain_error.
CVector steering_vector(const ArrayGeometry &geometry, double theta_deg);

// N x K matrix whose columns are steering vectors.
CMatrix steering_matrix(const ArrayGeometry &geometry, std::span<const double> thetas_deg);

SnapshotBatch simulate_snapshots(const SourceScene &scene, const ArrayGeometry &geometry, std::uint64_t seed);

// E[g g^H] = sum_k sigma_k^2 a_k a_k^H + sigma^2 I
CMatrix theoretical_covariance(const SourceScene &scene, const ArrayGeometry &geometry);

} // namespace obm

#endif
