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

#ifndef OBM_COVARIANCE_HPP
#define OBM_COVARIANCE_HPP

#include "obm/types.hpp"

namespace obm
{

// Hermitian N x N covariance of complex snapshots.
struct ComplexCovariance
{
    CMatrix matrix;
};

// Symmetric 2N x 2N covariance of the stacked real vector [Re g; Im g].
struct RealCompositeCovariance
{
    RMatrix matrix;
};

// (1/T) sum_t h(t) h(t)^H with the diagonal pinned to 1. Throws std::invalid_argument for T = 0
// or entries outside the one-bit alphabet.
ComplexCovariance onebit_empirical_covariance(const CMatrix &onebit);

// Generic sample covariance (1/T) X X^H, symmetrized.
ComplexCovariance sample_covariance(const CMatrix &snapshots);

// Entrywise sin(pi/2 Re C) + j sin(pi/2 Im C). Entries beyond [-1, 1] by sampling noise are
// clamped; beyond 1 + 1e-9 the input is rejected with std::domain_error. The number of clamped
// real components is written to clamped when non-null.
ComplexCovariance arcsin_law(const ComplexCovariance &onebit_cov, long *clamped = nullptr);

// [[Re C, -Im C], [Im C, Re C]]
RealCompositeCovariance complex_to_real_composite(const ComplexCovariance &c);

// Inverse of complex_to_real_composite; averages the diagonal blocks and antisymmetrizes the off-diagonal ones.
ComplexCovariance real_composite_to_complex(const RealCompositeCovariance &r);

// Eigenvalue clip at floor; output symmetric positive semidefinite.
RealCompositeCovariance psd_project(const RealCompositeCovariance &r, double floor);

// Floor used ahead of the integer-forcing solve: 1e-8 times the largest eigenvalue.
RealCompositeCovariance psd_project_relative(const RealCompositeCovariance &r, double relative_floor = 1e-8);

} // namespace obm

#endif
