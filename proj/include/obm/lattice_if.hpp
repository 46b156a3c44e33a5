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

#ifndef OBM_LATTICE_IF_HPP
#define OBM_LATTICE_IF_HPP

#include "obm/covariance.hpp"
#include "obm/types.hpp"

namespace obm
{

// Lattice generated by the columns of basis.
struct LatticeBasis
{
    RMatrix basis;
    double delta = 0.75;
};

struct LllResult
{
    RMatrix reduced;              // basis * unimodular
    IntMatrix unimodular;         // |det| = 1
    IntMatrix unimodular_inverse; // exact integer inverse of unimodular
    long swaps = 0;
};

// Lenstra-Lenstra-Lovasz reduction of the column basis. Unimodular updates are carried in
// overflow-checked 64-bit integers. Throws std::invalid_argument on a rank-deficient basis or
// delta outside (1/4, 1).
LllResult lll_reduce(const LatticeBasis &basis);

// Gram-Schmidt data of a column basis: mu(i, j) for j < i and squared norms of the orthogonalized columns.
struct GramSchmidt
{
    RMatrix mu;
    RVector squared_norms;
};

GramSchmidt gram_schmidt(const RMatrix &basis);

// Integer-forcing matrix. Row k of `a` is the forcing vector a_k^T applied to the stacked
// observation; rows are sorted by ascending a_k^T M a_k.
struct IfMatrix
{
    IntMatrix a;
    RMatrix a_inv;
    double objective = 0.0; // max_k a_k^T M a_k
    bool identity_fallback = false;
};

// Approximate minimizer of max_k a_k^T (m + noise_var I) a_k over invertible integer matrices:
// LLL on the Cholesky factor of the (regularized) Gram matrix. Falls back to A = I whenever the
// reduced basis does worse than no forcing. Throws std::runtime_error if the matrix is not
// positive definite (apply psd_project first).
IfMatrix solve_if_matrix(const RealCompositeCovariance &m, double quantization_noise_var, double lll_delta = 0.75);

IfMatrix identity_if_matrix(Eigen::Index dim);

// A^-1 M_lambda(A y_bar) for one stacked observation.
RVector if_decode(const RVector &y_bar, const IfMatrix &if_matrix, double lambda);

// Column-wise if_decode over a 2N x T batch.
RMatrix if_decode_batch(const RMatrix &y_bar, const IfMatrix &if_matrix, double lambda);

// [Re g; Im g]
RVector stack_real(const CVector &g);
CVector unstack_real(const RVector &v);
RMatrix stack_real(const CMatrix &g);
CMatrix unstack_real(const RMatrix &v);

} // namespace obm

#endif
