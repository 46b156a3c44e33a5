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

#include "obm/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace obm::log
{

namespace
{
Level level_from_env()
{
    const char *env = std::getenv("OBM_LOG_LEVEL");
    if (env == nullptr)
        return Level::warning;
    const std::string s(env);
    if (s == "debug")
        return Level::debug;
    if (s == "info")
        return Level::info;
    if (s == "error")
        return Level::error;
    if (s == "off")
        return Level::off;
    return Level::warning;
}

std::atomic<Level> &threshold()
{
    static std::atomic<Level> value{level_from_env()};
    return value;
}

std::mutex &sink_mutex()
{
    static std::mutex m;
    return m;
}

constexpr const char *tag(Level l)
{
    switch (l)
    {
    case Level::debug:
        return "debug";
    case Level::info:
        return "info";
    case Level::warning:
        return "warning";
    default:
        return "error";
    }
}
} // namespace

void set_level(Level l) { threshold().store(l); }

Level level() { return threshold().load(); }

void write(Level l, std::string_view message)
{
    if (l < threshold().load() || l == Level::off)
        return;
    std::lock_guard lock(sink_mutex());
    std::cerr << "[obm " << tag(l) << "] " << message << '\n';
}

} // namespace obm::log
