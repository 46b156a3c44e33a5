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

#include "obm/doa_subspace.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace obm
{

namespace
{
constexpr double rad2deg = 180.0 / std::numbers::pi;

using LComplex = std::complex<long double>;
using LCMatrix = Eigen::Matrix<LComplex, Eigen::Dynamic, Eigen::Dynamic>;

void check_order(int k, Eigen::Index n)
{
    if (k < 1)
        throw std::invalid_argument("subspace DOA: source count must be >= 1");
    if (k >= n)
        throw std::invalid_argument("subspace DOA: source count must be below the sensor count");
}

// |E_n^H a(theta)|^2
double null_spectrum(const CMatrix &noise_basis, const ArrayGeometry &geometry, double theta_deg)
{
    const CVector a = steering_vector(geometry, theta_deg);
    return (noise_basis.adjoint() * a).squaredNorm();
}

double angle_from_root(std::complex<double> r)
{
    const double s = std::clamp(std::arg(r) / std::numbers::pi, -1.0, 1.0);
    return std::asin(s) * rad2deg;
}

std::complex<double> to_double(LComplex z)
{
    return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

double golden_section_min(const auto &f, double lo, double hi, double tol)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > tol)
    {
        if (fc < fd)
        {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        }
        else
        {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return 0.5 * (lo + hi);
}
} // namespace

NoiseSubspace noise_subspace(const ComplexCovariance &cov, int k)
{
    const Eigen::Index n = cov.matrix.rows();
    if (cov.matrix.cols() != n)
        throw std::invalid_argument("noise_subspace: covariance must be square");
    check_order(k, n);
    const CMatrix sym = 0.5 * (cov.matrix + cov.matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("noise_subspace: eigendecomposition failed");

    NoiseSubspace out;
    out.basis = es.eigenvectors().leftCols(n - k);
    // Phase convention: first significant component real and positive.
    for (Eigen::Index c = 0; c < out.basis.cols(); ++c)
    {
        auto v = out.basis.col(c);
        const double scale = v.norm();
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::abs(v(i)) > 1e-12 * scale)
            {
                v *= std::conj(v(i)) / std::abs(v(i));
                break;
            }
    }
    for (Eigen::Index i = n - 1; i >= 0; --i)
        out.eigenvalues_desc.push_back(es.eigenvalues()(i));
    return out;
}

std::vector<std::complex<double>> root_music_roots(const ComplexCovariance &cov, int k)
{
    const NoiseSubspace ns = noise_subspace(cov, k);
    const Eigen::Index n = cov.matrix.rows();
    const CMatrix g = ns.basis * ns.basis.adjoint();

    // coef[l + N - 1] = sum of the l-th superdiagonal of G, l = -(N-1) .. N-1
    const Eigen::Index deg = 2 * (n - 1);
    std::vector<LComplex> coef(static_cast<std::size_t>(deg + 1), LComplex(0));
    for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index c = 0; c < n; ++c)
        {
            const auto idx = static_cast<std::size_t>(c - m + n - 1);
            coef[idx] += LComplex(g(m, c).real(), g(m, c).imag());
        }

    // Drop vanishing end coefficients symmetrically (roots at 0 and infinity).
    long double top = 0;
    for (const auto &c : coef)
        top = std::max(top, std::abs(c));
    std::size_t lo = 0;
    std::size_t hi = coef.size() - 1;
    while (hi > lo + 1 && std::abs(coef[hi]) <= 1e-15L * top && std::abs(coef[lo]) <= 1e-15L * top)
    {
        ++lo;
        --hi;
    }
    const auto d = static_cast<Eigen::Index>(hi - lo);
    if (d < 1)
        return {};

    LCMatrix companion = LCMatrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        companion(0, j) = -coef[hi - 1 - static_cast<std::size_t>(j)] / coef[hi];
    for (Eigen::Index i = 1; i < d; ++i)
        companion(i, i - 1) = LComplex(1);

    Eigen::ComplexEigenSolver<LCMatrix> es(companion, false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("root_music: polynomial rooting failed");
    std::vector<std::complex<double>> roots;
    roots.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i)
        roots.push_back(to_double(es.eigenvalues()(i)));
    return roots;
}

DoaEstimate root_music(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry)
{
    if (!geometry.is_uniform())
        throw std::invalid_argument("root_music: geometry is not a uniform linear array; use spectral_music");
    if (cov.matrix.rows() != geometry.size())
        throw std::invalid_argument("root_music: covariance size does not match the geometry");
    check_order(k, geometry.size());

    const NoiseSubspace ns = noise_subspace(cov, k);
    const auto roots = root_music_roots(cov, k);

    // Pair each root with its closest mirror 1/conj(r); keep the member inside the unit circle.
    std::vector<bool> used(roots.size(), false);
    std::vector<std::complex<double>> inside;
    for (std::size_t i = 0; i < roots.size(); ++i)
    {
        if (used[i])
            continue;
        used[i] = true;
        const std::complex<double> mirror = 1.0 / std::conj(roots[i]);
        std::size_t best = roots.size();
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < roots.size(); ++j)
            if (!used[j] && std::abs(roots[j] - mirror) < best_dist)
            {
                best_dist = std::abs(roots[j] - mirror);
                best = j;
            }
        if (best == roots.size())
        {
            inside.push_back(roots[i]);
            continue;
        }
        used[best] = true;
        inside.push_back(std::abs(roots[i]) <= std::abs(roots[best]) ? roots[i] : roots[best]);
    }

    struct Candidate
    {
        double distance;
        double spectrum;
        double angle;
    };
    std::vector<Candidate> candidates;
    for (const auto &r : inside)
    {
        const double angle = angle_from_root(r);
        double spectrum = 0.0;
        if (angle > -90.0 && angle < 90.0)
            spectrum = 1.0 / std::max(null_spectrum(ns.basis, geometry, angle), 1e-300);
        candidates.push_back({std::abs(1.0 - std::abs(r)), spectrum, angle});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate &x, const Candidate &y) {
        if (x.distance != y.distance)
            return x.distance < y.distance;
        return x.spectrum > y.spectrum;
    });

    DoaEstimate est;
    est.eigen_spectrum = ns.eigenvalues_desc;
    for (std::size_t i = 0; i < candidates.size() && static_cast<int>(i) < k; ++i)
        est.angles_deg.push_back(candidates[i].angle);
    est.shortfall = static_cast<int>(est.angles_deg.size()) < k;
    std::sort(est.angles_deg.begin(), est.angles_deg.end());
    return est;
}

std::vector<double> music_pseudo_spectrum(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry,
                                          std::span<const double> grid_deg)
{
    if (cov.matrix.rows() != geometry.size())
        throw std::invalid_argument("music_pseudo_spectrum: covariance size does not match the geometry");
    const NoiseSubspace ns = noise_subspace(cov, k);
    std::vector<double> out;
    out.reserve(grid_deg.size());
    for (double theta : grid_deg)
        out.push_back(1.0 / std::max(null_spectrum(ns.basis, geometry, theta), 1e-300));
    return out;
}

DoaEstimate spectral_music(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry, double grid_step_deg,
                           double refine_tol_deg)
{
    if (cov.matrix.rows() != geometry.size())
        throw std::invalid_argument("spectral_music: covariance size does not match the geometry");
    check_order(k, geometry.size());
    if (!(grid_step_deg > 0.0 && grid_step_deg < 10.0))
        throw std::invalid_argument("spectral_music: grid step must lie in (0, 10) degrees");

    const NoiseSubspace ns = noise_subspace(cov, k);
    const auto count = static_cast<int>(std::floor(180.0 / grid_step_deg));
    std::vector<double> grid;
    std::vector<double> f;
    for (int i = 1; i < count; ++i)
    {
        const double theta = -90.0 + grid_step_deg * i;
        if (theta >= 90.0)
            break;
        grid.push_back(theta);
        f.push_back(null_spectrum(ns.basis, geometry, theta));
    }

    std::vector<std::size_t> minima;
    for (std::size_t i = 1; i + 1 < f.size(); ++i)
        if (f[i] < f[i - 1] && f[i] <= f[i + 1])
            minima.push_back(i);
    std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });

    DoaEstimate est;
    est.eigen_spectrum = ns.eigenvalues_desc;
    std::vector<double> picked;
    for (std::size_t idx : minima)
    {
        if (static_cast<int>(picked.size()) == k)
            break;
        const double theta = grid[idx];
        const bool separated = std::none_of(picked.begin(), picked.end(), [&](double p) {
            return std::abs(p - theta) <= 2.0 * grid_step_deg;
        });
        if (separated)
            picked.push_back(theta);
    }
    auto objective = [&](double theta) { return null_spectrum(ns.basis, geometry, theta); };
    for (double theta : picked)
    {
        const double lo = std::max(theta - grid_step_deg, -90.0 + 1e-9);
        const double hi = std::min(theta + grid_step_deg, 90.0 - 1e-9);
        est.angles_deg.push_back(golden_section_min(objective, lo, hi, refine_tol_deg));
    }
    est.shortfall = static_cast<int>(est.angles_deg.size()) < k;
    std::sort(est.angles_deg.begin(), est.angles_deg.end());
    return est;
}

std::vector<double> angle_errors(std::span<const double> true_doas_deg, const DoaEstimate &estimated)
{
    std::vector<double> errs;
    for (double truth : true_doas_deg)
    {
        double best = std::numeric_limits<double>::infinity();
        for (double e : estimated.angles_deg)
            best = std::min(best, std::abs(truth - e));
        errs.push_back(best);
    }
    return errs;
}

bool detect(std::span<const double> true_doas_deg, const DoaEstimate &estimated, double tol_deg)
{
    if (!(tol_deg > 0.0))
        throw std::invalid_argument("detect: tolerance must be positive");
    const auto errs = angle_errors(true_doas_deg, estimated);
    return std::all_of(errs.begin(), errs.end(), [tol_deg](double e) { return e <= tol_deg; });
}

} // namespace obm
