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

#include "obm/rng.hpp"

#include <cmath>
#include <numbers>

namespace obm
{

namespace
{
std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream)
{
    return std::seed_seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(stream & 0xffffffffu), static_cast<std::uint32_t>(stream >> 32)};
}
} // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed)
{
    auto seq = make_seed_seq(seed, stream);
    engine_.seed(seq);
}

double Rng::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    if (has_cached_)
    {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(phi);
    has_cached_ = true;
    return r * std::cos(phi);
}

std::complex<double> Rng::complex_normal(double variance)
{
    const double scale = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {scale * re, scale * im};
}

} // namespace obm
