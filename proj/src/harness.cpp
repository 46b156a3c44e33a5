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

#include "obm/harness.hpp"

#include "obm/log.hpp"
#include "obm/quantizers.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <thread>

namespace obm
{

namespace
{
std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string &what)
{
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("csv: cannot parse " + what + " value '" + std::string(s) + "'");
    return v;
}

template <typename Int>
Int parse_int(std::string_view s, const std::string &what)
{
    Int v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("csv: cannot parse " + what + " value '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos)
        {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string> csv_header(int num_sources)
{
    std::vector<std::string> h = {"schema_version", "pipeline", "total_bits", "sweep_name", "sweep_value",
                                  "trial", "seed", "detected"};
    for (int k = 1; k <= num_sources; ++k)
        h.push_back("err_theta_" + std::to_string(k));
    h.insert(h.end(), {"nmse_db", "wall_s", "status"});
    return h;
}

TrialStatus parse_status(std::string_view s)
{
    if (s == "ok")
        return TrialStatus::ok;
    if (s == "failed")
        return TrialStatus::failed;
    if (s == "timeout")
        return TrialStatus::timeout;
    throw std::runtime_error("csv: unknown status '" + std::string(s) + "'");
}

void write_file(const std::filesystem::path &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out)
        throw std::runtime_error("write to " + path.string() + " failed");
}

ResultRow evaluate(const ExperimentConfig &config, const PipelineSpec &spec, const SourceScene &scene,
                   const SnapshotBatch &batch, double sweep_value, int trial, std::uint64_t seed,
                   bool record_wall_time)
{
    ResultRow row;
    row.pipeline = spec.id();
    row.total_bits = spec.total_bits();
    row.sweep_name = config.sweep.name();
    row.sweep_value = sweep_value;
    row.trial = trial;
    row.seed = seed;

    const auto start = std::chrono::steady_clock::now();
    const auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                      std::chrono::duration<double>(config.trial_timeout_s));
    try
    {
        const PipelineOutcome out = run_pipeline(config, spec, scene, batch, deadline);
        row.angle_errors_deg = angle_errors(scene.doas_deg, out.estimate);
        row.detected = detect(scene.doas_deg, out.estimate, config.detection_tol_deg);
        if (spec.kind != PipelineKind::unquantized)
            row.nmse_db = nmse_db(out.samples, batch.data);
        if (std::chrono::steady_clock::now() > deadline)
        {
            row.status = TrialStatus::timeout;
            row.detected = false;
        }
    }
    catch (const BifTimeout &e)
    {
        row.status = TrialStatus::timeout;
        log::warning(row.pipeline + " trial " + std::to_string(trial) + ": " + e.what());
    }
    catch (const std::exception &e)
    {
        row.status = TrialStatus::failed;
        log::warning(row.pipeline + " trial " + std::to_string(trial) + " failed: " + e.what());
    }
    if (row.status != TrialStatus::ok)
    {
        row.detected = false;
        row.angle_errors_deg.assign(scene.doas_deg.size(), std::numeric_limits<double>::infinity());
        row.nmse_db.reset();
    }
    if (record_wall_time)
        row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}
} // namespace

std::string to_string(TrialStatus status)
{
    switch (status)
    {
    case TrialStatus::ok:
        return "ok";
    case TrialStatus::failed:
        return "failed";
    default:
        return "timeout";
    }
}

std::string library_version() { return "1.0.0"; }

ModuloQuantizerParams modulo_params(const ExperimentConfig &config, const PipelineSpec &spec, const SourceScene &scene)
{
    return ModuloQuantizerParams{spec.bits, config.lambda_scale * per_channel_signal_std(scene)};
}

ConventionalAdcParams conventional_params(const ExperimentConfig &config, const PipelineSpec &spec,
                                          const SourceScene &scene)
{
    return ConventionalAdcParams{spec.bits, config.gamma_scale * per_channel_signal_std(scene)};
}

PipelineOutcome run_pipeline(const ExperimentConfig &config, const PipelineSpec &spec, const SourceScene &scene,
                             const SnapshotBatch &batch, std::optional<std::chrono::steady_clock::time_point> deadline)
{
    PipelineOutcome out;
    switch (spec.kind)
    {
    case PipelineKind::unquantized:
        out.samples = batch.data;
        out.covariance = sample_covariance(batch.data);
        break;
    case PipelineKind::conventional:
        out.samples = conventional_adc(batch, conventional_params(config, spec, scene));
        out.covariance = sample_covariance(out.samples);
        break;
    case PipelineKind::modulo: {
        const QuantizedBatch q = acquire(batch, modulo_params(config, spec, scene));
        BifConfig bif;
        bif.max_iters = config.bif_max_iters;
        bif.convergence_tol = config.bif_convergence_tol;
        bif.lll_delta = config.bif_lll_delta;
        bif.init_loading = config.bif_init_loading;
        bif.deadline = deadline;
        out.bif = run_bif(q, bif);
        out.samples = out.bif->recovered;
        out.covariance = out.bif->covariance;
        break;
    }
    }
    const int k = scene.num_sources();
    out.estimate = config.doa_method == DoaMethod::root_music
                       ? root_music(out.covariance, k, batch.geometry)
                       : spectral_music(out.covariance, k, batch.geometry, config.grid_step_deg);
    return out;
}

ResultTable run_experiment(const ExperimentConfig &config, const RunOptions &options)
{
    const std::size_t n_sweep = config.sweep.values.size();
    const auto n_trials = static_cast<std::size_t>(config.trials);
    const std::size_t n_pipes = config.pipelines.size();
    const std::size_t n_tasks = n_sweep * n_trials;

    // slots[(sweep * trials + trial) * pipes + pipe]
    std::vector<ResultRow> slots(n_tasks * n_pipes);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};

    auto worker = [&]() {
        for (std::size_t task = next.fetch_add(1); task < n_tasks; task = next.fetch_add(1))
        {
            const std::size_t s = task / n_trials;
            const std::size_t t = task % n_trials;
            const double value = config.sweep.values[s];
            const SourceScene scene = scene_at(config, value);
            const std::uint64_t seed = config.base_seed + t;
            const SnapshotBatch batch = simulate_snapshots(scene, config.geometry, seed);
            for (std::size_t p = 0; p < n_pipes; ++p)
                slots[task * n_pipes + p] = evaluate(config, config.pipelines[p], scene, batch, value,
                                                     static_cast<int>(t), seed, options.record_wall_time);
            const std::size_t finished = done.fetch_add(1) + 1;
            if (options.progress)
                options.progress(finished, n_tasks);
        }
    };

    const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(n_tasks)));
    if (threads == 1)
        worker();
    else
    {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i)
            pool.emplace_back(worker);
    }

    ResultTable table;
    table.num_sources = static_cast<int>(config.doas_deg.size());
    table.rows.reserve(slots.size());
    for (std::size_t p = 0; p < n_pipes; ++p)
        for (std::size_t s = 0; s < n_sweep; ++s)
            for (std::size_t t = 0; t < n_trials; ++t)
                table.rows.push_back(std::move(slots[(s * n_trials + t) * n_pipes + p]));
    return table;
}

double detection_probability(const ResultTable &table, const std::string &pipeline, double sweep_value)
{
    std::size_t total = 0;
    std::size_t hits = 0;
    for (const auto &row : table.rows)
        if (row.pipeline == pipeline && row.sweep_value == sweep_value)
        {
            ++total;
            hits += row.detected ? 1 : 0;
        }
    if (total == 0)
        throw std::invalid_argument("detection_probability: no rows for " + pipeline + " at " +
                                    format_double(sweep_value));
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<DetectionSummary> summarize(const ResultTable &table)
{
    std::vector<DetectionSummary> out;
    std::map<std::pair<std::string, double>, std::size_t> index;
    for (const auto &row : table.rows)
    {
        const auto key = std::make_pair(row.pipeline, row.sweep_value);
        auto it = index.find(key);
        if (it == index.end())
        {
            it = index.emplace(key, out.size()).first;
            out.push_back({row.pipeline, row.total_bits, row.sweep_value, 0, 0, 0.0});
        }
        auto &s = out[it->second];
        ++s.trials;
        s.detected += row.detected ? 1 : 0;
    }
    for (auto &s : out)
        s.probability = static_cast<double>(s.detected) / static_cast<double>(s.trials);
    return out;
}

std::string to_csv(const ResultTable &table)
{
    std::ostringstream os;
    const auto header = csv_header(table.num_sources);
    for (std::size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto &r : table.rows)
    {
        if (static_cast<int>(r.angle_errors_deg.size()) != table.num_sources)
            throw std::invalid_argument("to_csv: row has the wrong number of angle errors");
        os << results_schema_version << ',' << r.pipeline << ',' << r.total_bits << ',' << r.sweep_name << ','
           << format_double(r.sweep_value) << ',' << r.trial << ',' << r.seed << ',' << (r.detected ? 1 : 0);
        for (double e : r.angle_errors_deg)
            os << ',' << format_double(e);
        os << ',' << (r.nmse_db ? format_double(*r.nmse_db) : "") << ','
           << (r.wall_s ? format_double(*r.wall_s) : "") << ',' << to_string(r.status) << '\n';
    }
    return os.str();
}

void export_csv(const ResultTable &table, const std::filesystem::path &path)
{
    write_file(path, to_csv(table));
}

ResultTable parse_csv(const std::string &text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("csv: empty input");
    const auto cols = split(line, ',');
    int k = 0;
    for (const auto &c : cols)
        if (c.starts_with("err_theta_"))
            ++k;
    const auto expected = csv_header(k);
    if (cols.size() != expected.size() || !std::equal(cols.begin(), cols.end(), expected.begin()))
        throw std::runtime_error("csv: unexpected header '" + line + "'");

    ResultTable table;
    table.num_sources = k;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != expected.size())
            throw std::runtime_error("csv: wrong field count in '" + line + "'");
        if (parse_int<int>(f[0], "schema_version") != results_schema_version)
            throw std::runtime_error("csv: unsupported schema_version");
        ResultRow r;
        r.pipeline = std::string(f[1]);
        r.total_bits = parse_int<int>(f[2], "total_bits");
        r.sweep_name = std::string(f[3]);
        r.sweep_value = parse_double(f[4], "sweep_value");
        r.trial = parse_int<int>(f[5], "trial");
        r.seed = parse_int<std::uint64_t>(f[6], "seed");
        r.detected = parse_int<int>(f[7], "detected") != 0;
        for (int i = 0; i < k; ++i)
            r.angle_errors_deg.push_back(parse_double(f[8 + static_cast<std::size_t>(i)], "err_theta"));
        const std::size_t base = 8 + static_cast<std::size_t>(k);
        if (!f[base].empty())
            r.nmse_db = parse_double(f[base], "nmse_db");
        if (!f[base + 1].empty())
            r.wall_s = parse_double(f[base + 1], "wall_s");
        r.status = parse_status(f[base + 2]);
        table.rows.push_back(std::move(r));
    }
    return table;
}

ResultTable read_csv(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_csv(os.str());
}

void export_summary_csv(const std::vector<DetectionSummary> &summary, const std::filesystem::path &path)
{
    std::ostringstream os;
    os << "pipeline,total_bits,sweep_value,trials,detected,p_detect\n";
    for (const auto &s : summary)
        os << s.pipeline << ',' << s.total_bits << ',' << format_double(s.sweep_value) << ',' << s.trials << ','
           << s.detected << ',' << format_double(s.probability) << '\n';
    write_file(path, os.str());
}

Spectrum music_spectrum_db(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry, double step_deg)
{
    if (!(step_deg > 0.0 && step_deg < 10.0))
        throw std::invalid_argument("music_spectrum_db: step must lie in (0, 10) degrees");
    Spectrum s;
    const auto count = static_cast<int>(std::floor(180.0 / step_deg));
    for (int i = 1; i < count; ++i)
    {
        const double theta = -90.0 + step_deg * i;
        if (theta < 90.0)
            s.theta_deg.push_back(theta);
    }
    const auto p = music_pseudo_spectrum(cov, k, geometry, s.theta_deg);
    const double peak = *std::max_element(p.begin(), p.end());
    for (double v : p)
        s.level_db.push_back(10.0 * std::log10(v / peak));
    return s;
}

void export_spectrum(const ComplexCovariance &cov, int k, const ArrayGeometry &geometry,
                     const std::filesystem::path &path, double step_deg)
{
    const Spectrum s = music_spectrum_db(cov, k, geometry, step_deg);
    std::ostringstream os;
    os << "theta_deg,spectrum_db\n";
    for (std::size_t i = 0; i < s.theta_deg.size(); ++i)
        os << format_double(s.theta_deg[i]) << ',' << format_double(s.level_db[i]) << '\n';
    write_file(path, os.str());
}

void export_pipeline_spectra(const ExperimentConfig &config, const std::filesystem::path &path, double step_deg)
{
    const double value = config.sweep.values.front();
    const SourceScene scene = scene_at(config, value);
    const SnapshotBatch batch = simulate_snapshots(scene, config.geometry, config.base_seed);
    std::ostringstream os;
    os << "pipeline,total_bits,theta_deg,spectrum_db\n";
    for (const auto &spec : config.pipelines)
    {
        const PipelineOutcome out = run_pipeline(config, spec, scene, batch);
        const Spectrum s = music_spectrum_db(out.covariance, scene.num_sources(), config.geometry, step_deg);
        for (std::size_t i = 0; i < s.theta_deg.size(); ++i)
            os << spec.id() << ',' << spec.total_bits() << ',' << format_double(s.theta_deg[i]) << ','
               << format_double(s.level_db[i]) << '\n';
    }
    write_file(path, os.str());
}

void export_snapshot_trace(const ExperimentConfig &config, int snapshot, const std::filesystem::path &path)
{
    const auto it = std::find_if(config.pipelines.begin(), config.pipelines.end(),
                                 [](const PipelineSpec &p) { return p.kind == PipelineKind::modulo; });
    if (it == config.pipelines.end())
        throw std::invalid_argument("export_snapshot_trace: config has no modulo pipeline");
    const double value = config.sweep.values.front();
    const SourceScene scene = scene_at(config, value);
    if (snapshot < 0 || snapshot >= scene.snapshots)
        throw std::invalid_argument("export_snapshot_trace: snapshot index out of range");
    const SnapshotBatch batch = simulate_snapshots(scene, config.geometry, config.base_seed);
    const QuantizedBatch q = acquire(batch, modulo_params(config, *it, scene));
    const PipelineOutcome out = run_pipeline(config, *it, scene, batch);
    const bool consistent =
        std::binary_search(out.bif->consistent_set.begin(), out.bif->consistent_set.end(), snapshot);

    const RVector truth = stack_real(CVector(batch.data.col(snapshot)));
    const RVector onebit = stack_real(CVector(q.onebit.col(snapshot)));
    const RVector modulo = stack_real(CVector(q.modulo.col(snapshot)));
    const RVector recovered = stack_real(CVector(out.samples.col(snapshot)));
    const Eigen::Index n = batch.data.rows();

    std::ostringstream os;
    os << "pipeline,snapshot,component,part,sensor,truth,onebit,modulo,recovered,consistent\n";
    for (Eigen::Index i = 0; i < 2 * n; ++i)
        os << it->id() << ',' << snapshot << ',' << i << ',' << (i < n ? "re" : "im") << ',' << (i % n) << ','
           << format_double(truth(i)) << ',' << format_double(onebit(i)) << ',' << format_double(modulo(i)) << ','
           << format_double(recovered(i)) << ',' << (consistent ? 1 : 0) << '\n';
    write_file(path, os.str());
}

void write_manifest(const ExperimentConfig &config, const RunOptions &options, const std::string &config_path,
                    const std::vector<std::string> &outputs, const std::filesystem::path &path)
{
    nlohmann::json m;
    m["tool"] = "obm";
    m["version"] = library_version();
    m["results_schema_version"] = results_schema_version;
    m["config_schema_version"] = config.schema_version;
    m["config_path"] = config_path;
    m["config_hash"] = config_hash(config);
    m["config"] = nlohmann::json::parse(to_json_text(config));
    m["base_seed"] = config.base_seed;
    m["trial_seeds"] = {{"first", config.base_seed}, {"last", config.base_seed + static_cast<std::uint64_t>(config.trials) - 1}};
    m["trials"] = config.trials;
    m["threads"] = options.threads;
    m["wall_time_recorded"] = options.record_wall_time;
    m["rng"] = "mt19937_64 + seed_seq(seed, stream), Box-Muller normals";
    m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
    m["compiler"] = __VERSION__;
    m["outputs"] = outputs;
    write_file(path, m.dump(2) + "\n");
}

} // namespace obm
