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

#include "obm/array_model.hpp"

#include "obm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace obm
{

namespace
{
constexpr double deg2rad = std::numbers::pi / 180.0;

void check_angle(double theta_deg)
{
    if (!(theta_deg > -90.0 && theta_deg < 90.0))
        throw std::domain_error("angle " + std::to_string(theta_deg) + " deg outside (-90, 90)");
}
} // namespace

ArrayGeometry::ArrayGeometry(GeometryKind kind, std::vector<int> indices, std::vector<int> params)
    : kind_(kind), indices_(std::move(indices)), params_(std::move(params))
{
    if (indices_.empty())
        throw std::invalid_argument("array geometry needs at least one sensor");
    std::sort(indices_.begin(), indices_.end());
    if (indices_.front() < 0)
        throw std::invalid_argument("sensor indices must be non-negative");
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
        throw std::invalid_argument("duplicate sensor index");
}

ArrayGeometry ArrayGeometry::ula(int n)
{
    if (n < 1)
        throw std::invalid_argument("ULA needs N >= 1");
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    return ArrayGeometry(GeometryKind::ula, std::move(idx), {n});
}

ArrayGeometry ArrayGeometry::coprime(int p, int q)
{
    if (p < 1 || q < 1 || std::gcd(p, q) != 1)
        throw std::invalid_argument("coprime array needs positive coprime P, Q");
    std::set<int> idx;
    for (int i = 0; i < q; ++i)
        idx.insert(p * i);
    for (int i = 0; i < p; ++i)
        idx.insert(q * i);
    return ArrayGeometry(GeometryKind::coprime, {idx.begin(), idx.end()}, {p, q});
}

ArrayGeometry ArrayGeometry::nested(int n1, int n2)
{
    if (n1 < 1 || n2 < 1)
        throw std::invalid_argument("nested array needs N1, N2 >= 1");
    std::vector<int> idx;
    for (int n = 1; n <= n1; ++n)
        idx.push_back(n);
    for (int m = 1; m <= n2; ++m)
        idx.push_back(m * (n1 + 1));
    return ArrayGeometry(GeometryKind::nested, std::move(idx), {n1, n2});
}

ArrayGeometry ArrayGeometry::custom(std::vector<int> indices)
{
    return ArrayGeometry(GeometryKind::custom, std::move(indices), {});
}

bool ArrayGeometry::is_uniform() const
{
    return indices_.back() - indices_.front() == size() - 1;
}

std::string ArrayGeometry::describe() const
{
    std::ostringstream os;
    switch (kind_)
    {
    case GeometryKind::ula:
        os << "ula";
        break;
    case GeometryKind::coprime:
        os << "coprime";
        break;
    case GeometryKind::nested:
        os << "nested";
        break;
    case GeometryKind::custom:
        os << "custom";
        break;
    }
    os << '{';
    for (std::size_t i = 0; i < indices_.size(); ++i)
        os << (i ? "," : "") << indices_[i];
    os << '}';
    return os.str();
}

double SourceScene::total_source_power() const
{
    return std::accumulate(source_powers.begin(), source_powers.end(), 0.0);
}

void validate(const SourceScene &scene, bool allow_empty)
{
    if (scene.doas_deg.size() != scene.source_powers.size())
        throw std::invalid_argument("scene: doas and powers differ in length");
    if (scene.doas_deg.empty() && !allow_empty)
        throw std::invalid_argument("scene: at least one source required");
    for (double theta : scene.doas_deg)
        check_angle(theta);
    for (double p : scene.source_powers)
        if (!(p > 0.0) || !std::isfinite(p))
            throw std::invalid_argument("scene: source powers must be positive");
    if (!(scene.noise_power >= 0.0) || !std::isfinite(scene.noise_power))
        throw std::invalid_argument("scene: noise power must be non-negative");
    if (scene.snapshots < 1)
        throw std::invalid_argument("scene: snapshots must be >= 1");
    auto sorted = scene.doas_deg;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("scene: DOAs must be pairwise distinct");
}

double power_from_snr_db(double snr_db, double noise_power)
{
    return noise_power * std::pow(10.0, snr_db / 10.0);
}

CVector steering_vector(const ArrayGeometry &geometry, double theta_deg)
{
    check_angle(theta_deg);
    const double phase = std::numbers::pi * std::sin(theta_deg * deg2rad);
    const auto idx = geometry.indices();
    CVector a(geometry.size());
    for (int n = 0; n < geometry.size(); ++n)
        a(n) = std::polar(1.0, phase * idx[static_cast<std::size_t>(n)]);
    return a;
}

CMatrix steering_matrix(const ArrayGeometry &geometry, std::span<const double> thetas_deg)
{
    CMatrix a(geometry.size(), static_cast<Eigen::Index>(thetas_deg.size()));
    for (std::size_t k = 0; k < thetas_deg.size(); ++k)
        a.col(static_cast<Eigen::Index>(k)) = steering_vector(geometry, thetas_deg[k]);
    return a;
}

SnapshotBatch simulate_snapshots(const SourceScene &scene, const ArrayGeometry &geometry, std::uint64_t seed)
{
    validate(scene);
    const int n = geometry.size();
    const int k = scene.num_sources();
    if (n < k + 1)
        throw std::invalid_argument("simulate_snapshots: need N >= K + 1 sensors");

    const CMatrix steering = steering_matrix(geometry, scene.doas_deg);
    Rng rng(seed);
    CMatrix data(n, scene.snapshots);
    CVector amplitudes(k);
    for (int t = 0; t < scene.snapshots; ++t)
    {
        for (int s = 0; s < k; ++s)
            amplitudes(s) = rng.complex_normal(scene.source_powers[static_cast<std::size_t>(s)]);
        auto col = data.col(t);
        col.noalias() = steering * amplitudes;
        for (int i = 0; i < n; ++i)
            col(i) += rng.complex_normal(scene.noise_power);
    }
    return SnapshotBatch{std::move(data), geometry, seed};
}

CMatrix theoretical_covariance(const SourceScene &scene, const ArrayGeometry &geometry)
{
    validate(scene, true);
    const int n = geometry.size();
    CMatrix c = CMatrix::Identity(n, n) * scene.noise_power;
    for (int s = 0; s < scene.num_sources(); ++s)
    {
        const CVector a = steering_vector(geometry, scene.doas_deg[static_cast<std::size_t>(s)]);
        c.noalias() += scene.source_powers[static_cast<std::size_t>(s)] * (a * a.adjoint());
    }
    return c;
}

} // namespace obm
