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

#ifndef OBM_TEST_SUPPORT_HPP
#define OBM_TEST_SUPPORT_HPP

#include "obm/rng.hpp"
#include "obm/types.hpp"

#include <Eigen/Dense>

namespace obm::testing
{

inline RMatrix random_real(Rng &rng, Eigen::Index rows, Eigen::Index cols)
{
    RMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = rng.normal();
    return m;
}

inline CMatrix random_complex(Rng &rng, Eigen::Index rows, Eigen::Index cols)
{
    CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = rng.complex_normal(1.0);
    return m;
}

// Hermitian positive definite, well conditioned.
inline CMatrix random_hpd(Rng &rng, Eigen::Index n)
{
    const CMatrix x = random_complex(rng, n, 2 * n);
    CMatrix c = x * x.adjoint() / static_cast<double>(2 * n);
    c += 0.1 * CMatrix::Identity(n, n);
    return (c + c.adjoint()) / 2.0;
}

inline RMatrix random_symmetric(Rng &rng, Eigen::Index n)
{
    const RMatrix x = random_real(rng, n, n);
    return (x + x.transpose()) / 2.0;
}

} // namespace obm::testing

#endif
