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

#ifndef OBM_DOA_SUBSPACE_HPP
#define OBM_DOA_SUBSPACE_HPP

#include "obm/array_model.hpp"
#include "obm/covariance.hpp"
#include "obm/types.hpp"

#include <span>
#include <vector>

namespace obm
{

struct DoaEstimate
{
    std::vector<double> angles_deg;     // ascending
    std::vector<double> eigen_spectrum; // descending
    bool shortfall = false;             // fewer than k peaks found (spectral MUSIC only)
};

// Eigenvectors of the N - k smallest eigenvalues, and all eigenvalues in descending order.
struct NoiseSubspace
{
    CMatrix basis;
    std::vector<double> eigenvalues_desc;
};

NoiseSubspace noise_subspace(const ComplexCovariance &cov, int k);

// Roots of the root-MUSIC polynomial sum_{m,n} G_mn z^(n - m), G = E_n E_n^H (degree 2N - 2).
std::vector<std::complex<double>> root_music_roots(const ComplexCovariance &cov, int k);

// Root MUSIC for arrays with consecutive sensor positions.
DoaEstimate root_music(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry);

// Grid search on the MUSIC pseudo-spectrum with golden-section refinement of each peak.
DoaEstimate spectral_music(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry,
                           double grid_step_deg = 0.01, double refine_tol_deg = 1e-4);

// 1 / |E_n^H a(theta)|^2 on the given angles.
std::vector<double> music_pseudo_spectrum(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry,
                                          std::span<const double> grid_deg);

// Every true angle has an estimate within tol degrees.
bool detect(std::span<const double> true_doas_deg, const DoaEstimate &estimated, double tol_deg = 0.1);

// min_i |theta_k - theta_hat_i| per true angle; +inf when there is no estimate.
std::vector<double> angle_errors(std::span<const double> true_doas_deg, const DoaEstimate &estimated);

} // namespace obm

#endif
