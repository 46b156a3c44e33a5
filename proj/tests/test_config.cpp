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

#include "obm/config.hpp"

#include <json.hpp>

#include <cmath>
#include <string>

using namespace obm;
using nlohmann::json;

namespace
{
json base()
{
    return json::parse(R"({
      "schema_version": 1,
      "name": "t",
      "geometry": {"kind": "ula", "sensors": 8},
      "scene": {"doas_deg": [-10.0, 20.0], "snr_db": [10.0, 0.0], "noise_power": 2.0, "snapshots": 500},
      "sweep": {"kind": "snr", "values": [-5.0, 0.0, 5.0], "source": 1},
      "pipelines": [{"kind": "modulo", "bits": 4}, {"kind": "conventional", "bits": 6}, {"kind": "unquantized"}],
      "trials": 4,
      "base_seed": 11
    })");
}

ExperimentConfig parse(const json &j) { return parse_config(j.dump()); }

void expect_error(const json &j, const std::string &needle)
{
    try
    {
        parse(j);
        FAIL("no ConfigError for " << needle);
    }
    catch (const ConfigError &e)
    {
        CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring(needle));
    }
}
} // namespace

TEST_CASE("Committed configs load")
{
    for (const char *name : {"smoke.json", "nmse_near_far.json", "pd_vs_snr.json", "pd_vs_snapshots.json"})
    {
        const auto c = load_config(std::string(OBM_CONFIG_DIR) + "/" + name);
        CHECK(c.geometry == ArrayGeometry::ula(16));
        CHECK(c.doas_deg == std::vector<double>{-2.0, 3.0, 75.0});
        CHECK_FALSE(c.pipelines.empty());
        CHECK(parse_config(to_json_text(c)).pipelines.size() == c.pipelines.size());
    }
}

TEST_CASE("Defaults and derived names")
{
    const auto c = parse(base());
    CHECK(c.lambda_scale == 0.6);
    CHECK(c.gamma_scale == 4.0);
    CHECK(c.bif_max_iters == 10);
    CHECK(c.bif_convergence_tol == 1e-4);
    CHECK(c.detection_tol_deg == 0.1);
    CHECK(c.doa_method == DoaMethod::root_music);
    CHECK(c.sweep.name() == "snr2_db");
    CHECK(c.pipelines[0].id() == "modulo_b4");
    CHECK(c.pipelines[0].total_bits() == 5);
    CHECK(c.pipelines[1].id() == "conventional_b6");
    CHECK(c.pipelines[1].total_bits() == 6);
    CHECK(c.pipelines[2].id() == "unquantized");
    CHECK(c.pipelines[2].total_bits() == 0);
}

TEST_CASE("Canonical text round-trips and hashes stably")
{
    const auto c = parse(base());
    const std::string text = to_json_text(c);
    CHECK(to_json_text(parse_config(text)) == text);
    const std::string h = config_hash(c);
    CHECK(h.size() == 16);
    CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(config_hash(parse_config(text)) == h);

    auto j = base();
    j["base_seed"] = 12;
    CHECK(config_hash(parse(j)) != h);
}

TEST_CASE("Geometry kinds round-trip")
{
    for (const char *g : {R"({"kind": "ula", "sensors": 6})", R"({"kind": "coprime", "p": 3, "q": 5})",
                          R"({"kind": "nested", "n1": 3, "n2": 3})", R"({"kind": "custom", "indices": [0, 1, 4, 9]})"})
    {
        auto j = base();
        j["geometry"] = json::parse(g);
        j["doa"] = {{"method", "spectral_music"}};
        const auto c = parse(j);
        CHECK(parse_config(to_json_text(c)).geometry == c.geometry);
    }
}

TEST_CASE("Schema violations raise ConfigError")
{
    auto j = base();
    j["extra"] = 1;
    expect_error(j, "extra");

    j = base();
    j["scene"]["snapshot"] = 3;
    expect_error(j, "snapshot");

    j = base();
    j["schema_version"] = 2;
    expect_error(j, "schema_version");

    j = base();
    j["sweep"]["values"] = {0.0, -5.0};
    expect_error(j, "increasing");

    j = base();
    j["sweep"]["source"] = 2;
    expect_error(j, "source");

    j = base();
    j["geometry"] = {{"kind", "coprime"}, {"p", 3}, {"q", 5}};
    expect_error(j, "root_music");

    j = base();
    j["trials"] = 0;
    expect_error(j, "trials");

    j = base();
    j["pipelines"] = json::array({{{"kind", "modulo"}, {"bits", 4}}, {{"kind", "modulo"}, {"bits", 4}}});
    expect_error(j, "duplicate");

    j = base();
    j["scene"]["doas_deg"] = {-10.0, -10.0};
    expect_error(j, "scene");

    j = base();
    j["geometry"]["sensors"] = 2;
    expect_error(j, "K + 1");

    j = base();
    j["sweep"] = {{"kind", "snapshots"}, {"values", {10.5, 100}}};
    expect_error(j, "integers");

    j = base();
    j["scene"]["snr_db"] = "loud";
    expect_error(j, "snr_db");

    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("Scenes at sweep points")
{
    const auto c = parse(base());
    const auto s = scene_at(c, -5.0);
    CHECK(s.snapshots == 500);
    CHECK(s.noise_power == 2.0);
    CHECK_THAT(s.source_powers[0], Catch::Matchers::WithinRel(20.0, 1e-12));
    CHECK_THAT(s.source_powers[1], Catch::Matchers::WithinRel(2.0 * std::pow(10.0, -0.5), 1e-12));

    auto j = base();
    j["sweep"] = {{"kind", "snapshots"}, {"values", {100, 1000}}};
    const auto t = parse(j);
    CHECK(t.sweep.name() == "snapshots");
    CHECK(scene_at(t, 1000).snapshots == 1000);
    CHECK_THAT(scene_at(t, 1000).source_powers[1], Catch::Matchers::WithinRel(2.0, 1e-12));

    j["sweep"] = {{"kind", "single"}};
    const auto u = parse(j);
    CHECK(u.sweep.values.size() == 1);
    CHECK(u.sweep.name() == "single");
}
