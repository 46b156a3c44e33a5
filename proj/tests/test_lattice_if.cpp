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

#include <catch2/catch_amalgamated.hpp>

#include "obm/covariance.hpp"
#include "obm/lattice_if.hpp"
#include "obm/quantizers.hpp"
#include "support.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace obm;
using Catch::Matchers::WithinAbs;

namespace
{
// Fraction-free Gaussian elimination; exact for the small unimodular matrices produced here.
__int128 exact_determinant(const IntMatrix &u)
{
    const auto n = u.rows();
    std::vector<std::vector<__int128>> m(static_cast<std::size_t>(n), std::vector<__int128>(static_cast<std::size_t>(n)));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m[i][j] = u(i, j);
    int sign = 1;
    __int128 prev = 1;
    for (Eigen::Index k = 0; k + 1 < n; ++k)
    {
        if (m[k][k] == 0)
        {
            Eigen::Index p = k + 1;
            while (p < n && m[p][k] == 0)
                ++p;
            if (p == n)
                return 0;
            std::swap(m[k], m[p]);
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i)
            for (Eigen::Index j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

struct LllCheck
{
    bool size_reduced = true;
    bool lovasz = true;
};

// Gram-Schmidt data from a Householder QR: b*_j has squared norm R(j, j)^2, mu(i, j) = R(j, i) / R(j, j).
LllCheck check_lll(const RMatrix &b, double delta)
{
    const Eigen::HouseholderQR<RMatrix> qr(b);
    const RMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    const auto n = b.cols();
    LllCheck out;
    for (Eigen::Index i = 1; i < n; ++i)
    {
        for (Eigen::Index j = 0; j < i; ++j)
            if (std::fabs(r(j, i) / r(j, j)) > 0.5 + 1e-9)
                out.size_reduced = false;
        const double mu = r(i - 1, i) / r(i - 1, i - 1);
        const double bi = r(i, i) * r(i, i);
        const double bprev = r(i - 1, i - 1) * r(i - 1, i - 1);
        if (bi < (delta - mu * mu) * bprev * (1.0 - 1e-9))
            out.lovasz = false;
    }
    return out;
}

RMatrix random_basis(Rng &rng, Eigen::Index n)
{
    // Skewed bases so the reduction has work to do.
    RMatrix b = testing::random_real(rng, n, n);
    const RMatrix base = b;
    for (Eigen::Index j = 1; j < n; ++j)
        b.col(j) += std::floor(20.0 * rng.uniform() - 10.0) * base.col(j - 1);
    return b;
}

double quadratic_form(const RMatrix &m, const RVector &v) { return v.dot(m * v); }

// n-th successive minimum of the quadratic form: greedy over box vectors in ascending form order.
double successive_minimum(const RMatrix &m, int radius)
{
    const auto n = static_cast<int>(m.rows());
    std::vector<std::pair<double, RVector>> vectors;
    RVector v(n);
    std::vector<int> digits(static_cast<std::size_t>(n), -radius);
    while (true)
    {
        for (int i = 0; i < n; ++i)
            v(i) = digits[static_cast<std::size_t>(i)];
        if (v.cwiseAbs().maxCoeff() > 0)
            vectors.emplace_back(quadratic_form(m, v), v);
        int i = 0;
        while (i < n && ++digits[static_cast<std::size_t>(i)] > radius)
            digits[static_cast<std::size_t>(i++)] = -radius;
        if (i == n)
            break;
    }
    std::stable_sort(vectors.begin(), vectors.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    RMatrix span(n, 0);
    for (const auto &[form, vec] : vectors)
    {
        RMatrix trial(n, span.cols() + 1);
        trial << span, vec;
        if (Eigen::FullPivLU<RMatrix>(trial).rank() == trial.cols())
        {
            span = trial;
            if (span.cols() == n)
                return form;
        }
    }
    return std::numeric_limits<double>::infinity();
}

RMatrix toeplitz_real_composite(int sensors, double rho)
{
    CMatrix c(sensors, sensors);
    for (int i = 0; i < sensors; ++i)
        for (int j = 0; j < sensors; ++j)
            c(i, j) = std::pow(rho, std::abs(i - j));
    return complex_to_real_composite({c}).matrix;
}
} // namespace

TEST_CASE("LLL on the identity basis")
{
    const auto r = lll_reduce({RMatrix::Identity(4, 4), 0.75});
    CHECK(r.reduced == RMatrix::Identity(4, 4));
    CHECK(r.unimodular == IntMatrix::Identity(4, 4));
    CHECK(r.swaps == 0);
}

TEST_CASE("LLL shortens a nearly dependent pair")
{
    RMatrix b(2, 2);
    b << 1.0, 0.99, 0.0, 0.01;
    const auto r = lll_reduce({b, 0.75});
    CHECK(r.reduced.colwise().norm().maxCoeff() < b.colwise().norm().maxCoeff());
    CHECK((b * r.unimodular.cast<double>() - r.reduced).norm() < 1e-12);
    const __int128 det = exact_determinant(r.unimodular);
    CHECK((det == 1 || det == -1));
    const auto check = check_lll(r.reduced, 0.75);
    CHECK(check.size_reduced);
    CHECK(check.lovasz);
}

TEST_CASE("LLL output conditions on random bases")
{
    Rng rng(301);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto n = static_cast<Eigen::Index>(2 + trial % 15);
        const double delta = trial % 3 == 0 ? 0.99 : 0.75;
        const RMatrix b = random_basis(rng, n);
        const auto r = lll_reduce({b, delta});
        const auto check = check_lll(r.reduced, delta);
        REQUIRE(check.size_reduced);
        REQUIRE(check.lovasz);
        const __int128 det = exact_determinant(r.unimodular);
        REQUIRE((det == 1 || det == -1));
        REQUIRE((r.unimodular * r.unimodular_inverse) == IntMatrix::Identity(n, n));
        REQUIRE((b * r.unimodular.cast<double>() - r.reduced).norm() <= 1e-9 * (1.0 + b.norm()));
    }
}

TEST_CASE("LLL rejects bad input")
{
    RMatrix singular(3, 3);
    singular << 1, 2, 3, 4, 5, 9, 7, 8, 15;
    CHECK_THROWS_AS(lll_reduce({singular, 0.75}), std::invalid_argument);
    CHECK_THROWS_AS(lll_reduce({RMatrix::Identity(2, 2), 0.25}), std::invalid_argument);
    CHECK_THROWS_AS(lll_reduce({RMatrix::Identity(2, 2), 1.0}), std::invalid_argument);
}

TEST_CASE("Gram-Schmidt agrees with a QR factorization")
{
    Rng rng(302);
    const RMatrix b = random_basis(rng, 6);
    const auto gs = gram_schmidt(b);
    const Eigen::HouseholderQR<RMatrix> qr(b);
    const RMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < 6; ++i)
    {
        CHECK_THAT(gs.squared_norms(i), WithinAbs(r(i, i) * r(i, i), 1e-9 * (1.0 + r(i, i) * r(i, i))));
        for (Eigen::Index j = 0; j < i; ++j)
            CHECK_THAT(gs.mu(i, j), WithinAbs(r(j, i) / r(j, j), 1e-9 * (1.0 + std::fabs(gs.mu(i, j)))));
    }
}

TEST_CASE("Integer forcing on white and diagonal inputs keeps the identity")
{
    const auto white = solve_if_matrix({RMatrix::Identity(4, 4)}, 0.0);
    CHECK(white.a == IntMatrix::Identity(4, 4));
    CHECK_THAT(white.objective, WithinAbs(1.0, 1e-12));

    RMatrix d = RMatrix::Zero(2, 2);
    d.diagonal() << 100.0, 1.0;
    const auto diag = solve_if_matrix({d}, 0.0);
    CHECK_THAT(diag.objective, WithinAbs(100.0, 1e-9));
    CHECK_THAT(successive_minimum(d, 3), WithinAbs(100.0, 1e-12));
    CHECK(std::abs(exact_determinant(diag.a)) == 1);
}

TEST_CASE("Integer forcing finds the short difference vector")
{
    RMatrix m(2, 2);
    m << 1.0, 0.99, 0.99, 1.0;
    const auto r = solve_if_matrix({m}, 0.0);
    const RVector first = r.a.row(0).transpose().cast<double>();
    CHECK_THAT(quadratic_form(m, first), WithinAbs(0.02, 1e-12));
    CHECK(r.objective <= 1.0 + 1e-12);
    CHECK_FALSE(r.identity_fallback);
    CHECK_THAT(r.objective, WithinAbs(successive_minimum(m, 3), 1e-12));
}

TEST_CASE("Integer-forcing matrix invariants")
{
    Rng rng(303);
    for (int trial = 0; trial < 60; ++trial)
    {
        const auto n = static_cast<Eigen::Index>(2 + trial % 10);
        const CMatrix c = testing::random_hpd(rng, n / 2 + 1);
        RMatrix m = complex_to_real_composite({c}).matrix.topLeftCorner(n, n);
        const double qvar = trial % 2 ? 1e-3 : 0.0;
        const auto r = solve_if_matrix({m}, qvar, 0.99);
        const RMatrix mq = m + qvar * RMatrix::Identity(n, n);
        REQUIRE((r.a.cast<double>() * r.a_inv - RMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
        REQUIRE(std::abs(exact_determinant(r.a)) == 1);
        std::vector<double> forms;
        for (Eigen::Index k = 0; k < n; ++k)
            forms.push_back(quadratic_form(mq, r.a.row(k).transpose().cast<double>()));
        for (std::size_t k = 1; k < forms.size(); ++k)
            REQUIRE(forms[k - 1] <= forms[k] * (1.0 + 1e-9));
        REQUIRE_THAT(r.objective, WithinAbs(forms.back(), 1e-9 * forms.back()));
        REQUIRE(r.objective <= mq.diagonal().maxCoeff() * (1.0 + 1e-12));

        // Scaling the Gram matrix scales the objective and keeps A.
        const auto scaled = solve_if_matrix({m * 7.5}, qvar * 7.5, 0.99);
        REQUIRE(scaled.a == r.a);
        REQUIRE_THAT(scaled.objective, WithinAbs(7.5 * r.objective, 1e-9 * scaled.objective));
    }
}

TEST_CASE("Integer forcing stays within the LLL bound of the optimum")
{
    Rng rng(304);
    for (int trial = 0; trial < 40; ++trial)
    {
        const int n = 2 + trial % 2;
        // Correlated Gram matrices where forcing pays off.
        RMatrix l = testing::random_real(rng, n, n);
        for (int j = 1; j < n; ++j)
            l.col(j) = l.col(j - 1) + 0.05 * l.col(j);
        const RMatrix m = l.transpose() * l + 1e-3 * RMatrix::Identity(n, n);
        const double lmin = Eigen::SelfAdjointEigenSolver<RMatrix>(m).eigenvalues().minCoeff();
        const int radius = static_cast<int>(std::ceil(std::sqrt(m.diagonal().maxCoeff() / lmin)));
        if (radius > 40 / n)
            continue;
        const double optimum = successive_minimum(m, radius);
        const double delta = 0.99;
        const auto r = solve_if_matrix({m}, 0.0, delta);
        const double alpha = 1.0 / (delta - 0.25);
        CHECK(r.objective >= optimum * (1.0 - 1e-9));
        CHECK(r.objective <= std::pow(alpha, n - 1) * optimum * (1.0 + 1e-9));
    }
}

TEST_CASE("solve_if_matrix rejects indefinite input")
{
    RMatrix d = RMatrix::Identity(2, 2);
    d(1, 1) = -1.0;
    CHECK_THROWS_AS(solve_if_matrix({d}, 0.0), std::runtime_error);
}

TEST_CASE("if_decode with the identity is the identity on its range")
{
    Rng rng(305);
    const auto eye = identity_if_matrix(6);
    for (int i = 0; i < 100; ++i)
    {
        RVector y(6);
        for (Eigen::Index k = 0; k < 6; ++k)
            y(k) = -1.5 + 3.0 * rng.uniform();
        CHECK(if_decode(y, eye, 1.5) == y);
    }
}

TEST_CASE("Two-dimensional unwrap agrees with enumeration")
{
    const double lambda = 1.0;
    RVector g(2);
    g << 1.6, 1.5;
    RVector y(2);
    y << modulo_fold(g(0), lambda), modulo_fold(g(1), lambda);
    CHECK_THAT(y(0), WithinAbs(-0.4, 1e-12));
    CHECK_THAT(y(1), WithinAbs(-0.5, 1e-12));

    auto make = [](std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
        IfMatrix m;
        m.a.resize(2, 2);
        m.a << a, b, c, d;
        m.a_inv = m.a.cast<double>().inverse();
        return m;
    };
    // Enumerate integer offsets: the unwrap consistent with a forcing matrix keeps A(y + 2 lambda e) in range.
    auto enumerate = [&](const IfMatrix &m) {
        std::vector<RVector> hits;
        for (int e0 = -3; e0 <= 3; ++e0)
            for (int e1 = -3; e1 <= 3; ++e1)
            {
                RVector cand(2);
                cand << y(0) + 2.0 * lambda * e0, y(1) + 2.0 * lambda * e1;
                const RVector proj = m.a.cast<double>() * cand;
                if ((proj.array() >= -lambda).all() && (proj.array() < lambda).all())
                    hits.push_back(cand);
            }
        return hits;
    };

    const IfMatrix good = make(1, -1, -15, 16);
    const auto good_hits = enumerate(good);
    REQUIRE(good_hits.size() == 1);
    CHECK((if_decode(y, good, lambda) - good_hits.front()).norm() < 1e-9);
    CHECK((if_decode(y, good, lambda) - g).norm() < 1e-9);

    const IfMatrix weak = make(1, -1, 0, 1);
    const auto weak_hits = enumerate(weak);
    REQUIRE(weak_hits.size() == 1);
    CHECK((if_decode(y, weak, lambda) - weak_hits.front()).norm() < 1e-9);
    CHECK((if_decode(y, weak, lambda) - g).norm() > 0.5);
}

TEST_CASE("if_decode recovers constructed in-range observations")
{
    Rng rng(306);
    for (int trial = 0; trial < 200; ++trial)
    {
        const Eigen::Index n = 2 + trial % 8;
        const auto r = solve_if_matrix({complex_to_real_composite({testing::random_hpd(rng, n)}).matrix}, 0.0);
        const double lambda = 0.5 + rng.uniform();
        RVector u(2 * n);
        for (Eigen::Index k = 0; k < u.size(); ++k)
            u(k) = 0.999 * lambda * (2.0 * rng.uniform() - 1.0);
        const RVector g = r.a_inv * u;
        RVector y(g.size());
        for (Eigen::Index k = 0; k < g.size(); ++k)
            y(k) = modulo_fold(g(k), lambda);
        REQUIRE((if_decode(y, r, lambda) - g).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("Decoder with the true covariance unwraps correlated snapshots")
{
    const int sensors = 4;
    // Real-composite covariance of a unit-power complex vector: each rail has variance 1/2.
    const RMatrix cr = 0.5 * toeplitz_real_composite(sensors, 0.99);
    const double sigma = std::sqrt(0.5);
    const Eigen::LLT<RMatrix> llt(cr);

    // Success must coincide with every forced row landing inside the fold range.
    auto run = [&](double lambda, std::uint64_t seed) {
        const ModuloQuantizerParams q{4, lambda};
        const auto ifm = solve_if_matrix({cr}, q.noise_variance());
        Rng rng(seed);
        int exact = 0;
        int mismatched = 0;
        double worst = 0.0;
        const int draws = 10000;
        for (int t = 0; t < draws; ++t)
        {
            RVector w(2 * sensors);
            for (Eigen::Index k = 0; k < w.size(); ++k)
                w(k) = rng.normal();
            const RVector g = llt.matrixL() * w;
            RVector folded(g.size());
            RVector y(g.size());
            for (Eigen::Index k = 0; k < g.size(); ++k)
            {
                folded(k) = modulo_fold(g(k), q.range);
                y(k) = uniform_quantize(folded(k), q);
            }
            const RVector target = g + (y - folded);
            const RVector out = if_decode(y, ifm, q.range);
            const bool ok = (out - target).cwiseAbs().maxCoeff() < 1e-9;
            const double margin = (ifm.a.cast<double>() * target).cwiseAbs().maxCoeff();
            if (std::fabs(margin - q.range) > 1e-9 && ok != (margin < q.range))
                ++mismatched;
            if (ok)
            {
                ++exact;
                worst = std::max(worst, (out - g).cwiseAbs().maxCoeff());
            }
        }
        CHECK(mismatched == 0);
        CHECK(worst <= q.range / static_cast<double>(q.levels()) + 1e-12);
        return static_cast<double>(exact) / draws;
    };

    // With a wide range the common-mode row rarely overflows.
    CHECK(run(3.0 * sigma, 307) >= 0.99);

    // At one signal std some row always carries the common mode, whose spread is about sigma on each
    // rail, so the rate sits near P(|Z| < 1)^2.
    const double p1 = std::erf(1.0 / std::sqrt(2.0));
    CHECK_THAT(run(sigma, 308), WithinAbs(p1 * p1, 0.03));
}

TEST_CASE("stack_real and unstack_real")
{
    CVector one(1);
    one << cdouble(1, 2);
    CHECK(stack_real(one) == (RVector(2) << 1, 2).finished());

    Rng rng(308);
    const CVector g1 = testing::random_complex(rng, 5, 1);
    const CVector g2 = testing::random_complex(rng, 5, 1);
    CHECK(unstack_real(stack_real(g1)) == g1);
    CHECK((stack_real(CVector(2.5 * g1 - 0.75 * g2)) - (2.5 * stack_real(g1) - 0.75 * stack_real(g2))).norm() < 1e-14);

    const CMatrix batch = testing::random_complex(rng, 3, 4);
    CHECK(unstack_real(stack_real(batch)) == batch);
    CHECK(stack_real(batch).col(2) == stack_real(CVector(batch.col(2))));
    CHECK_THROWS_AS(unstack_real(RVector(3)), std::invalid_argument);
    CHECK_THROWS_AS(unstack_real(RMatrix(3, 2)), std::invalid_argument);
}
