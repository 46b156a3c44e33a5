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

#include "obm/covariance.hpp"

#include "obm/log.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace obm
{

ComplexCovariance onebit_empirical_covariance(const CMatrix &onebit)
{
    if (onebit.cols() == 0 || onebit.rows() == 0)
        throw std::invalid_argument("onebit_empirical_covariance: empty batch");
    const double s = 1.0 / std::numbers::sqrt2;
    const bool alphabet = ((onebit.real().cwiseAbs().array() - s).abs() < 1e-12).all() &&
                          ((onebit.imag().cwiseAbs().array() - s).abs() < 1e-12).all();
    if (!alphabet)
        throw std::invalid_argument("onebit_empirical_covariance: entries must be (+-1 +- j) / sqrt(2)");
    ComplexCovariance c = sample_covariance(onebit);
    c.matrix.diagonal().setOnes();
    return c;
}

ComplexCovariance sample_covariance(const CMatrix &snapshots)
{
    if (snapshots.cols() == 0)
        throw std::invalid_argument("sample_covariance: empty batch");
    CMatrix c = snapshots * snapshots.adjoint() / static_cast<double>(snapshots.cols());
    c = 0.5 * (c + c.adjoint()).eval();
    return ComplexCovariance{std::move(c)};
}

ComplexCovariance arcsin_law(const ComplexCovariance &onebit_cov, long *clamped)
{
    constexpr double eps = 1e-9;
    const double half_pi = std::numbers::pi / 2.0;
    long count = 0;
    auto inv = [&](double v) {
        if (!std::isfinite(v) || std::abs(v) > 1.0 + eps)
            throw std::domain_error("arcsin_law: entry " + std::to_string(v) + " outside [-1, 1]");
        if (std::abs(v) > 1.0)
        {
            ++count;
            v = std::clamp(v, -1.0, 1.0);
        }
        return std::sin(half_pi * v);
    };
    const CMatrix &in = onebit_cov.matrix;
    CMatrix out(in.rows(), in.cols());
    for (Eigen::Index j = 0; j < in.cols(); ++j)
        for (Eigen::Index i = 0; i < in.rows(); ++i)
            out(i, j) = cdouble(inv(in(i, j).real()), inv(in(i, j).imag()));
    if (count > 0)
        log::info("arcsin_law: clamped " + std::to_string(count) + " components to [-1, 1]");
    if (clamped != nullptr)
        *clamped = count;
    return ComplexCovariance{std::move(out)};
}

RealCompositeCovariance complex_to_real_composite(const ComplexCovariance &c)
{
    const Eigen::Index n = c.matrix.rows();
    if (c.matrix.cols() != n)
        throw std::invalid_argument("complex_to_real_composite: matrix must be square");
    RMatrix r(2 * n, 2 * n);
    const RMatrix re = c.matrix.real();
    const RMatrix im = c.matrix.imag();
    r.topLeftCorner(n, n) = re;
    r.topRightCorner(n, n) = -im;
    r.bottomLeftCorner(n, n) = im;
    r.bottomRightCorner(n, n) = re;
    return RealCompositeCovariance{std::move(r)};
}

ComplexCovariance real_composite_to_complex(const RealCompositeCovariance &r)
{
    const Eigen::Index m = r.matrix.rows();
    if (m != r.matrix.cols())
        throw std::invalid_argument("real_composite_to_complex: matrix must be square");
    if (m % 2 != 0)
        throw std::invalid_argument("real_composite_to_complex: odd dimension");
    const Eigen::Index n = m / 2;
    const RMatrix re = 0.5 * (r.matrix.topLeftCorner(n, n) + r.matrix.bottomRightCorner(n, n));
    const RMatrix im = 0.5 * (r.matrix.bottomLeftCorner(n, n) - r.matrix.topRightCorner(n, n));
    CMatrix c(n, n);
    c.real() = re;
    c.imag() = im;
    c = 0.5 * (c + c.adjoint()).eval();
    return ComplexCovariance{std::move(c)};
}

RealCompositeCovariance psd_project(const RealCompositeCovariance &r, double floor)
{
    if (floor < 0.0)
        throw std::invalid_argument("psd_project: floor must be non-negative");
    const RMatrix sym = 0.5 * (r.matrix + r.matrix.transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(sym);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("psd_project: eigendecomposition failed");
    RVector ev = es.eigenvalues();
    if (ev.minCoeff() >= floor)
        return RealCompositeCovariance{sym};
    ev = ev.cwiseMax(floor);
    RMatrix out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    out = 0.5 * (out + out.transpose()).eval();
    return RealCompositeCovariance{std::move(out)};
}

RealCompositeCovariance psd_project_relative(const RealCompositeCovariance &r, double relative_floor)
{
    const RMatrix sym = 0.5 * (r.matrix + r.matrix.transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
    const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
    return psd_project(RealCompositeCovariance{sym}, relative_floor * top);
}

} // namespace obm
