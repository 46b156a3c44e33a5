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

#include "obm/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace obm
{

using nlohmann::json;

namespace
{
void check_keys(const json &obj, const std::string &where, const std::set<std::string> &allowed)
{
    if (!obj.is_object())
        throw ConfigError(where + ": expected an object");
    for (const auto &item : obj.items())
        if (!allowed.contains(item.key()))
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

template <typename T>
T get(const json &obj, const std::string &key, const std::string &where)
{
    if (!obj.contains(key))
        throw ConfigError(where + ": missing required key '" + key + "'");
    try
    {
        return obj.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <typename T>
T get_or(const json &obj, const std::string &key, const std::string &where, T fallback)
{
    if (!obj.contains(key))
        return fallback;
    return get<T>(obj, key, where);
}

ArrayGeometry parse_geometry(const json &g)
{
    const auto kind = get<std::string>(g, "kind", "geometry");
    try
    {
        if (kind == "ula")
        {
            check_keys(g, "geometry", {"kind", "sensors"});
            return ArrayGeometry::ula(get<int>(g, "sensors", "geometry"));
        }
        if (kind == "coprime")
        {
            check_keys(g, "geometry", {"kind", "p", "q"});
            return ArrayGeometry::coprime(get<int>(g, "p", "geometry"), get<int>(g, "q", "geometry"));
        }
        if (kind == "nested")
        {
            check_keys(g, "geometry", {"kind", "n1", "n2"});
            return ArrayGeometry::nested(get<int>(g, "n1", "geometry"), get<int>(g, "n2", "geometry"));
        }
        if (kind == "custom")
        {
            check_keys(g, "geometry", {"kind", "indices"});
            return ArrayGeometry::custom(get<std::vector<int>>(g, "indices", "geometry"));
        }
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(std::string("geometry: ") + e.what());
    }
    throw ConfigError("geometry.kind: unknown geometry '" + kind + "'");
}

json geometry_to_json(const ArrayGeometry &g)
{
    const auto p = g.parameters();
    switch (g.kind())
    {
    case GeometryKind::ula:
        return {{"kind", "ula"}, {"sensors", g.size()}};
    case GeometryKind::coprime:
        return {{"kind", "coprime"}, {"p", p[0]}, {"q", p[1]}};
    case GeometryKind::nested:
        return {{"kind", "nested"}, {"n1", p[0]}, {"n2", p[1]}};
    case GeometryKind::custom:
        break;
    }
    return {{"kind", "custom"}, {"indices", std::vector<int>(g.indices().begin(), g.indices().end())}};
}

std::string sweep_kind_name(SweepKind k)
{
    switch (k)
    {
    case SweepKind::snr:
        return "snr";
    case SweepKind::snapshots:
        return "snapshots";
    default:
        return "single";
    }
}
} // namespace

std::string Sweep::name() const
{
    if (kind == SweepKind::snr)
        return "snr" + std::to_string(source + 1) + "_db";
    return sweep_kind_name(kind);
}

std::string PipelineSpec::id() const
{
    switch (kind)
    {
    case PipelineKind::modulo:
        return "modulo_b" + std::to_string(bits);
    case PipelineKind::conventional:
        return "conventional_b" + std::to_string(bits);
    default:
        return "unquantized";
    }
}

int PipelineSpec::total_bits() const
{
    switch (kind)
    {
    case PipelineKind::modulo:
        return bits + 1;
    case PipelineKind::conventional:
        return bits;
    default:
        return 0;
    }
}

ExperimentConfig parse_config(const std::string &json_text)
{
    json root;
    try
    {
        root = json::parse(json_text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"schema_version", "name", "geometry", "scene", "sweep", "pipelines", "trials", "base_seed",
                "detection_tol_deg", "modulo", "conventional", "bif", "doa", "trial_timeout_s"});

    ExperimentConfig c;
    c.schema_version = get<int>(root, "schema_version", "config");
    if (c.schema_version != config_schema_version)
        throw ConfigError("schema_version " + std::to_string(c.schema_version) + " is not supported (expected " +
                          std::to_string(config_schema_version) + ")");
    c.name = get_or<std::string>(root, "name", "config", c.name);

    c.geometry = parse_geometry(get<json>(root, "geometry", "config"));

    const json scene = get<json>(root, "scene", "config");
    check_keys(scene, "scene", {"doas_deg", "snr_db", "noise_power", "snapshots"});
    c.doas_deg = get<std::vector<double>>(scene, "doas_deg", "scene");
    c.snr_db = get<std::vector<double>>(scene, "snr_db", "scene");
    c.noise_power = get_or<double>(scene, "noise_power", "scene", c.noise_power);
    c.snapshots = get_or<int>(scene, "snapshots", "scene", c.snapshots);
    if (c.doas_deg.size() != c.snr_db.size())
        throw ConfigError("scene: doas_deg and snr_db differ in length");
    if (!(c.noise_power > 0.0))
        throw ConfigError("scene.noise_power: must be positive");

    const json sweep = get<json>(root, "sweep", "config");
    check_keys(sweep, "sweep", {"kind", "values", "source"});
    const auto kind = get<std::string>(sweep, "kind", "sweep");
    if (kind == "single")
    {
        c.sweep.kind = SweepKind::single;
        if (sweep.contains("values") || sweep.contains("source"))
            throw ConfigError("sweep: a single-point run takes no values or source");
        c.sweep.values = {0.0};
    }
    else if (kind == "snr" || kind == "snapshots")
    {
        c.sweep.kind = kind == "snr" ? SweepKind::snr : SweepKind::snapshots;
        c.sweep.values = get<std::vector<double>>(sweep, "values", "sweep");
        if (c.sweep.values.empty())
            throw ConfigError("sweep.values: must be non-empty");
        if (!std::is_sorted(c.sweep.values.begin(), c.sweep.values.end()) ||
            std::adjacent_find(c.sweep.values.begin(), c.sweep.values.end()) != c.sweep.values.end())
            throw ConfigError("sweep.values: must be strictly increasing");
        if (c.sweep.kind == SweepKind::snr)
        {
            c.sweep.source = get_or<int>(sweep, "source", "sweep", 1);
            if (c.sweep.source < 0 || c.sweep.source >= static_cast<int>(c.doas_deg.size()))
                throw ConfigError("sweep.source: index out of range");
        }
        else
        {
            if (sweep.contains("source"))
                throw ConfigError("sweep.source: only valid for snr sweeps");
            for (double v : c.sweep.values)
                if (v < 1.0 || v != static_cast<double>(static_cast<long>(v)))
                    throw ConfigError("sweep.values: snapshot counts must be positive integers");
        }
    }
    else
        throw ConfigError("sweep.kind: unknown sweep '" + kind + "'");

    const json pipes = get<json>(root, "pipelines", "config");
    if (!pipes.is_array() || pipes.empty())
        throw ConfigError("pipelines: must be a non-empty array");
    std::set<std::string> ids;
    for (const auto &p : pipes)
    {
        check_keys(p, "pipelines[]", {"kind", "bits"});
        PipelineSpec spec;
        const auto pk = get<std::string>(p, "kind", "pipelines[]");
        if (pk == "modulo")
        {
            spec.kind = PipelineKind::modulo;
            spec.bits = get<int>(p, "bits", "pipelines[]");
            if (spec.bits < 1 || spec.bits > 16)
                throw ConfigError("pipelines[].bits: modulo bits must be in [1, 16]");
        }
        else if (pk == "conventional")
        {
            spec.kind = PipelineKind::conventional;
            spec.bits = get<int>(p, "bits", "pipelines[]");
            if (spec.bits < 2 || spec.bits > 24)
                throw ConfigError("pipelines[].bits: conventional bits must be in [2, 24]");
        }
        else if (pk == "unquantized")
        {
            spec.kind = PipelineKind::unquantized;
            spec.bits = 0;
            if (p.contains("bits"))
                throw ConfigError("pipelines[]: unquantized takes no bits");
        }
        else
            throw ConfigError("pipelines[].kind: unknown pipeline '" + pk + "'");
        if (!ids.insert(spec.id()).second)
            throw ConfigError("pipelines: duplicate pipeline " + spec.id());
        c.pipelines.push_back(spec);
    }

    c.trials = get_or<int>(root, "trials", "config", c.trials);
    if (c.trials < 1)
        throw ConfigError("trials: must be >= 1");
    c.base_seed = get_or<std::uint64_t>(root, "base_seed", "config", c.base_seed);
    c.detection_tol_deg = get_or<double>(root, "detection_tol_deg", "config", c.detection_tol_deg);
    if (!(c.detection_tol_deg > 0.0))
        throw ConfigError("detection_tol_deg: must be positive");

    if (root.contains("modulo"))
    {
        const json m = root.at("modulo");
        check_keys(m, "modulo", {"lambda_scale"});
        c.lambda_scale = get_or<double>(m, "lambda_scale", "modulo", c.lambda_scale);
        if (!(c.lambda_scale > 0.0))
            throw ConfigError("modulo.lambda_scale: must be positive");
    }
    if (root.contains("conventional"))
    {
        const json m = root.at("conventional");
        check_keys(m, "conventional", {"gamma_scale"});
        c.gamma_scale = get_or<double>(m, "gamma_scale", "conventional", c.gamma_scale);
        if (!(c.gamma_scale > 0.0))
            throw ConfigError("conventional.gamma_scale: must be positive");
    }
    if (root.contains("bif"))
    {
        const json b = root.at("bif");
        check_keys(b, "bif", {"max_iters", "convergence_tol", "lll_delta", "init_loading"});
        c.bif_max_iters = get_or<int>(b, "max_iters", "bif", c.bif_max_iters);
        c.bif_convergence_tol = get_or<double>(b, "convergence_tol", "bif", c.bif_convergence_tol);
        c.bif_lll_delta = get_or<double>(b, "lll_delta", "bif", c.bif_lll_delta);
        c.bif_init_loading = get_or<double>(b, "init_loading", "bif", c.bif_init_loading);
        if (c.bif_max_iters < 1)
            throw ConfigError("bif.max_iters: must be >= 1");
        if (!(c.bif_convergence_tol > 0.0))
            throw ConfigError("bif.convergence_tol: must be positive");
        if (!(c.bif_lll_delta > 0.25 && c.bif_lll_delta < 1.0))
            throw ConfigError("bif.lll_delta: must lie in (0.25, 1)");
        if (!(c.bif_init_loading >= 0.0))
            throw ConfigError("bif.init_loading: must be non-negative");
    }
    if (root.contains("doa"))
    {
        const json d = root.at("doa");
        check_keys(d, "doa", {"method", "grid_step_deg"});
        const auto method = get_or<std::string>(d, "method", "doa", "root_music");
        if (method == "root_music")
            c.doa_method = DoaMethod::root_music;
        else if (method == "spectral_music")
            c.doa_method = DoaMethod::spectral_music;
        else
            throw ConfigError("doa.method: unknown method '" + method + "'");
        c.grid_step_deg = get_or<double>(d, "grid_step_deg", "doa", c.grid_step_deg);
        if (!(c.grid_step_deg > 0.0 && c.grid_step_deg < 10.0))
            throw ConfigError("doa.grid_step_deg: must lie in (0, 10)");
    }
    if (c.doa_method == DoaMethod::root_music && !c.geometry.is_uniform())
        throw ConfigError("doa.method: root_music needs a uniform linear array; use spectral_music");
    c.trial_timeout_s = get_or<double>(root, "trial_timeout_s", "config", c.trial_timeout_s);
    if (!(c.trial_timeout_s > 0.0))
        throw ConfigError("trial_timeout_s: must be positive");

    // Validate every sweep point's scene up front.
    try
    {
        for (double v : c.sweep.values)
        {
            const SourceScene s = scene_at(c, v);
            validate(s);
            if (c.geometry.size() < s.num_sources() + 1)
                throw ConfigError("geometry: need at least K + 1 sensors");
        }
    }
    catch (const std::invalid_argument &e)
    {
        throw ConfigError(std::string("scene: ") + e.what());
    }
    catch (const std::domain_error &e)
    {
        throw ConfigError(std::string("scene: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    try
    {
        return parse_config(os.str());
    }
    catch (const ConfigError &e)
    {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string to_json_text(const ExperimentConfig &c)
{
    json root;
    root["schema_version"] = c.schema_version;
    root["name"] = c.name;
    root["geometry"] = geometry_to_json(c.geometry);
    root["scene"] = {{"doas_deg", c.doas_deg},
                     {"snr_db", c.snr_db},
                     {"noise_power", c.noise_power},
                     {"snapshots", c.snapshots}};
    json sweep = {{"kind", sweep_kind_name(c.sweep.kind)}};
    if (c.sweep.kind != SweepKind::single)
        sweep["values"] = c.sweep.values;
    if (c.sweep.kind == SweepKind::snr)
        sweep["source"] = c.sweep.source;
    root["sweep"] = sweep;
    json pipes = json::array();
    for (const auto &p : c.pipelines)
    {
        switch (p.kind)
        {
        case PipelineKind::modulo:
            pipes.push_back({{"kind", "modulo"}, {"bits", p.bits}});
            break;
        case PipelineKind::conventional:
            pipes.push_back({{"kind", "conventional"}, {"bits", p.bits}});
            break;
        case PipelineKind::unquantized:
            pipes.push_back({{"kind", "unquantized"}});
            break;
        }
    }
    root["pipelines"] = pipes;
    root["trials"] = c.trials;
    root["base_seed"] = c.base_seed;
    root["detection_tol_deg"] = c.detection_tol_deg;
    root["modulo"] = {{"lambda_scale", c.lambda_scale}};
    root["conventional"] = {{"gamma_scale", c.gamma_scale}};
    root["bif"] = {{"max_iters", c.bif_max_iters},
                   {"convergence_tol", c.bif_convergence_tol},
                   {"lll_delta", c.bif_lll_delta},
                   {"init_loading", c.bif_init_loading}};
    root["doa"] = {{"method", c.doa_method == DoaMethod::root_music ? "root_music" : "spectral_music"},
                   {"grid_step_deg", c.grid_step_deg}};
    root["trial_timeout_s"] = c.trial_timeout_s;
    return root.dump(2);
}

std::string config_hash(const ExperimentConfig &config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json_text(config))
    {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SourceScene scene_at(const ExperimentConfig &config, double sweep_value)
{
    SourceScene s;
    s.doas_deg = config.doas_deg;
    s.noise_power = config.noise_power;
    s.snapshots = config.snapshots;
    std::vector<double> snr = config.snr_db;
    if (config.sweep.kind == SweepKind::snr)
        snr.at(static_cast<std::size_t>(config.sweep.source)) = sweep_value;
    else if (config.sweep.kind == SweepKind::snapshots)
        s.snapshots = static_cast<int>(sweep_value);
    for (double v : snr)
        s.source_powers.push_back(power_from_snr_db(v, config.noise_power));
    return s;
}

} // namespace obm
