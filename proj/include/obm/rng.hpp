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

#ifndef OBM_RNG_HPP
#define OBM_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace obm
{

// Reproducible random source. The engine (std::mt19937_64) and the seeding
// algorithm (std::seed_seq) are fully specified by the C++ standard; the
// normal transform is implemented here instead of std::normal_distribution,
// whose algorithm is implementation-defined. Streams derived from the same
// (seed, stream) pair are bit-identical on every conforming platform.
class Rng
{
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Standard normal via Box-Muller; draws are consumed in pairs.
    double normal();

    // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance);

    std::uint64_t seed() const { return seed_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace obm

#endif
