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

#include "obm/lattice_if.hpp"

#include "obm/quantizers.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace obm
{

namespace
{
std::int64_t mul_checked(std::int64_t a, std::int64_t b)
{
    std::int64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r))
        throw std::overflow_error("lll_reduce: unimodular entry overflow");
    return r;
}

std::int64_t sub_checked(std::int64_t a, std::int64_t b)
{
    std::int64_t r = 0;
    if (__builtin_sub_overflow(a, b, &r))
        throw std::overflow_error("lll_reduce: unimodular entry overflow");
    return r;
}

std::int64_t add_checked(std::int64_t a, std::int64_t b)
{
    std::int64_t r = 0;
    if (__builtin_add_overflow(a, b, &r))
        throw std::overflow_error("lll_reduce: unimodular entry overflow");
    return r;
}

constexpr double size_tol = 1e-9;
constexpr double lovasz_tol = 1e-9;

bool satisfies_lll(const GramSchmidt &gs, double delta)
{
    const Eigen::Index n = gs.squared_norms.size();
    for (Eigen::Index i = 1; i < n; ++i)
    {
        for (Eigen::Index j = 0; j < i; ++j)
            if (std::abs(gs.mu(i, j)) > 0.5 + size_tol)
                return false;
        const double lhs = gs.squared_norms(i);
        const double rhs = (delta - gs.mu(i, i - 1) * gs.mu(i, i - 1)) * gs.squared_norms(i - 1);
        if (lhs < rhs * (1.0 - lovasz_tol))
            return false;
    }
    return true;
}

// One LLL sweep with floating Gram-Schmidt updates; U and its inverse stay exact.
void lll_pass(const RMatrix &original, double delta, IntMatrix &u, IntMatrix &u_inv, long &swaps)
{
    const Eigen::Index n = original.cols();
    RMatrix b = original * u.cast<double>();
    GramSchmidt gs = gram_schmidt(b);
    RMatrix &mu = gs.mu;
    RVector &norms = gs.squared_norms;

    const long max_swaps = 1'000'000;
    Eigen::Index k = 1;
    while (k < n)
    {
        for (Eigen::Index j = k - 1; j >= 0; --j)
        {
            if (std::abs(mu(k, j)) <= 0.5)
                continue;
            const double qd = std::round(mu(k, j));
            const auto q = static_cast<std::int64_t>(qd);
            for (Eigen::Index r = 0; r < n; ++r)
            {
                u(r, k) = sub_checked(u(r, k), mul_checked(q, u(r, j)));
                u_inv(j, r) = add_checked(u_inv(j, r), mul_checked(q, u_inv(k, r)));
            }
            b.col(k) -= qd * b.col(j);
            for (Eigen::Index i = 0; i < j; ++i)
                mu(k, i) -= qd * mu(j, i);
            mu(k, j) -= qd;
        }

        const double m = mu(k, k - 1);
        if (norms(k) >= (delta - m * m) * norms(k - 1))
        {
            ++k;
            continue;
        }

        if (++swaps > max_swaps)
            throw std::runtime_error("lll_reduce: swap limit exceeded");
        b.col(k).swap(b.col(k - 1));
        u.col(k).swap(u.col(k - 1));
        u_inv.row(k).swap(u_inv.row(k - 1));

        const double big_b = norms(k) + m * m * norms(k - 1);
        const double new_mu = m * norms(k - 1) / big_b;
        norms(k) = norms(k - 1) * norms(k) / big_b;
        norms(k - 1) = big_b;
        mu(k, k - 1) = new_mu;
        for (Eigen::Index j = 0; j < k - 1; ++j)
            std::swap(mu(k - 1, j), mu(k, j));
        for (Eigen::Index i = k + 1; i < n; ++i)
        {
            const double t = mu(i, k);
            mu(i, k) = mu(i, k - 1) - m * t;
            mu(i, k - 1) = t + new_mu * mu(i, k);
        }
        k = std::max<Eigen::Index>(k - 1, 1);
    }
}
} // namespace

GramSchmidt gram_schmidt(const RMatrix &basis)
{
    const Eigen::Index n = basis.cols();
    RMatrix ortho = basis;
    GramSchmidt gs{RMatrix::Zero(n, n), RVector::Zero(n)};
    for (Eigen::Index i = 0; i < n; ++i)
    {
        for (Eigen::Index j = 0; j < i; ++j)
        {
            const double m = basis.col(i).dot(ortho.col(j)) / gs.squared_norms(j);
            gs.mu(i, j) = m;
            ortho.col(i) -= m * ortho.col(j);
        }
        gs.squared_norms(i) = ortho.col(i).squaredNorm();
    }
    return gs;
}

LllResult lll_reduce(const LatticeBasis &lattice)
{
    const RMatrix &basis = lattice.basis;
    if (!(lattice.delta > 0.25 && lattice.delta < 1.0))
        throw std::invalid_argument("lll_reduce: delta must lie in (1/4, 1)");
    const Eigen::Index n = basis.cols();
    if (n == 0 || basis.rows() < n)
        throw std::invalid_argument("lll_reduce: basis must have full column rank");
    if (!basis.allFinite())
        throw std::invalid_argument("lll_reduce: non-finite basis entries");

    const GramSchmidt initial = gram_schmidt(basis);
    const double scale = basis.colwise().squaredNorm().maxCoeff();
    if (!(initial.squared_norms.minCoeff() > 1e-24 * scale))
        throw std::invalid_argument("lll_reduce: rank-deficient basis");

    LllResult res;
    res.unimodular = IntMatrix::Identity(n, n);
    res.unimodular_inverse = IntMatrix::Identity(n, n);
    for (int attempt = 0; attempt < 8; ++attempt)
    {
        lll_pass(basis, lattice.delta, res.unimodular, res.unimodular_inverse, res.swaps);
        res.reduced = basis * res.unimodular.cast<double>();
        if (satisfies_lll(gram_schmidt(res.reduced), lattice.delta))
            break;
    }
    return res;
}

IfMatrix identity_if_matrix(Eigen::Index dim)
{
    return IfMatrix{IntMatrix::Identity(dim, dim), RMatrix::Identity(dim, dim), 0.0, true};
}

IfMatrix solve_if_matrix(const RealCompositeCovariance &m, double quantization_noise_var, double lll_delta)
{
    if (quantization_noise_var < 0.0)
        throw std::invalid_argument("solve_if_matrix: negative quantization noise variance");
    const Eigen::Index dim = m.matrix.rows();
    if (dim == 0 || m.matrix.cols() != dim)
        throw std::invalid_argument("solve_if_matrix: matrix must be square and non-empty");

    RMatrix gram = 0.5 * (m.matrix + m.matrix.transpose());
    gram.diagonal().array() += quantization_noise_var;

    Eigen::LLT<RMatrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("solve_if_matrix: Cholesky failed, matrix not positive definite "
                                 "(apply psd_project before the integer-forcing solve)");
    const RMatrix factor = llt.matrixU(); // gram = factor^T factor, so |factor a|^2 = a^T gram a

    const LllResult lll = lll_reduce(LatticeBasis{factor, lll_delta});

    std::vector<double> forms(static_cast<std::size_t>(dim));
    for (Eigen::Index k = 0; k < dim; ++k)
    {
        const RVector v = lll.unimodular.col(k).cast<double>();
        forms[static_cast<std::size_t>(k)] = v.dot(gram * v);
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return forms[static_cast<std::size_t>(x)] < forms[static_cast<std::size_t>(y)]; });

    IfMatrix out;
    out.a.resize(dim, dim);
    out.a_inv.resize(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
    {
        const Eigen::Index src = order[static_cast<std::size_t>(r)];
        out.a.row(r) = lll.unimodular.col(src).transpose();
        out.a_inv.col(r) = lll.unimodular_inverse.row(src).transpose().cast<double>();
    }
    out.objective = forms[static_cast<std::size_t>(order.back())];

    const double identity_objective = gram.diagonal().maxCoeff();
    if (out.objective > identity_objective)
    {
        // Unit vectors, still ordered by their forms.
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index x, Eigen::Index y) { return gram(x, x) < gram(y, y); });
        out = identity_if_matrix(dim);
        out.a.setZero();
        out.a_inv.setZero();
        for (Eigen::Index r = 0; r < dim; ++r)
        {
            out.a(r, order[static_cast<std::size_t>(r)]) = 1;
            out.a_inv(order[static_cast<std::size_t>(r)], r) = 1.0;
        }
        out.objective = identity_objective;
    }
    return out;
}

RVector if_decode(const RVector &y_bar, const IfMatrix &if_matrix, double lambda)
{
    if (y_bar.size() != if_matrix.a.cols())
        throw std::invalid_argument("if_decode: dimension mismatch");
    RVector x = if_matrix.a.cast<double>() * y_bar;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x(i) = modulo_fold(x(i), lambda);
    return if_matrix.a_inv * x;
}

RMatrix if_decode_batch(const RMatrix &y_bar, const IfMatrix &if_matrix, double lambda)
{
    if (y_bar.rows() != if_matrix.a.cols())
        throw std::invalid_argument("if_decode_batch: dimension mismatch");
    RMatrix x = if_matrix.a.cast<double>() * y_bar;
    x = x.unaryExpr([lambda](double v) { return modulo_fold(v, lambda); });
    return if_matrix.a_inv * x;
}

RVector stack_real(const CVector &g)
{
    RVector v(2 * g.size());
    v.head(g.size()) = g.real();
    v.tail(g.size()) = g.imag();
    return v;
}

CVector unstack_real(const RVector &v)
{
    if (v.size() % 2 != 0)
        throw std::invalid_argument("unstack_real: odd-length input");
    const Eigen::Index n = v.size() / 2;
    CVector g(n);
    g.real() = v.head(n);
    g.imag() = v.tail(n);
    return g;
}

RMatrix stack_real(const CMatrix &g)
{
    RMatrix v(2 * g.rows(), g.cols());
    v.topRows(g.rows()) = g.real();
    v.bottomRows(g.rows()) = g.imag();
    return v;
}

CMatrix unstack_real(const RMatrix &v)
{
    if (v.rows() % 2 != 0)
        throw std::invalid_argument("unstack_real: odd row count");
    const Eigen::Index n = v.rows() / 2;
    CMatrix g(n, v.cols());
    g.real() = v.topRows(n);
    g.imag() = v.bottomRows(n);
    return g;
}

} // namespace obm
