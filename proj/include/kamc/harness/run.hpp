#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kamc/baseline.hpp"
#include "kamc/error.hpp"
#include "kamc/exterior.hpp"
#include "kamc/harness/manifest.hpp"
#include "kamc/harness/svg.hpp"
#include "kamc/io/csv.hpp"
#include "kamc/io/json.hpp"
#include "kamc/ka/embedding.hpp"
#include "kamc/ka/outer.hpp"
#include "kamc/nn/jacobian.hpp"
#include "kamc/nn/train.hpp"
#include "kamc/random.hpp"
#include "kamc/training/interleave.hpp"

namespace kamc::harness {

using nlohmann::json;

inline const std::set<std::string> kKinds{"minors", "mc-analyze", "baseline", "train", "ka-demo"};
inline const std::set<std::string> kFormats{"csv", "json", "svg"};

/// A validated experiment description.
struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  std::set<std::string> formats{kFormats};
  json params = json::object();
  std::optional<std::string> output_directory;
  std::filesystem::path base_dir = ".";  // relative paths in params resolve here

  bool wants(const std::string& format) const { return formats.count(format) > 0; }

  /// Effective config as recorded in the manifest.
  json echo() const {
    json j = {{"kind", kind}, {"seed", seed}, {"formats", formats}, {"params", params}};
    return j;
  }
};

/// Validate a config document. `expected_kind` is the CLI subcommand, if any;
/// `seed_override` replaces the config seed.
inline ExperimentConfig parse_config(const json& j, std::optional<std::string> expected_kind = {},
                                     std::optional<std::uint64_t> seed_override = {}) {
  io::check_fields(j, {"kind", "seed", "formats", "params", "outputDirectory"});
  ExperimentConfig c;
  if (j.contains("kind")) {
    if (!j.at("kind").is_string()) throw ConfigError("kind", "must be a string");
    c.kind = j.at("kind").get<std::string>();
  } else if (expected_kind) {
    c.kind = *expected_kind;
  } else {
    throw ConfigError("kind", "missing required field");
  }
  if (!kKinds.count(c.kind)) throw ConfigError("kind", "unknown kind '" + c.kind + "'");
  if (expected_kind && c.kind != *expected_kind)
    throw ConfigError("kind", "config is for '" + c.kind + "', not '" + *expected_kind + "'");

  if (seed_override) {
    c.seed = *seed_override;
  } else {
    const auto& s = io::require(j, "seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ConfigError("seed", "must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("formats")) {
    c.formats.clear();
    for (const auto& f : j.at("formats")) {
      if (!f.is_string() || !kFormats.count(f.get<std::string>()))
        throw ConfigError("formats", "entries must be csv, json or svg");
      c.formats.insert(f.get<std::string>());
    }
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("params", "must be an object");
    c.params = j.at("params");
  }
  if (j.contains("outputDirectory")) c.output_directory = j.at("outputDirectory").get<std::string>();
  return c;
}

inline json read_json_file(const std::filesystem::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(field, std::string("invalid JSON: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    std::optional<std::string> expected_kind = {},
                                    std::optional<std::uint64_t> seed_override = {}) {
  auto c = parse_config(read_json_file(path, "config"), std::move(expected_kind), seed_override);
  c.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return c;
}

namespace detail {

/// Typed access to `params.<key>` with field-named errors.
template <typename T>
T param(const json& p, const std::string& key, std::optional<T> fallback = std::nullopt) {
  if (!p.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError("params." + key, "missing required field");
  }
  try {
    return p.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("params." + key, "has the wrong type");
  }
}

inline std::filesystem::path existing_file(const ExperimentConfig& c, const std::string& key) {
  auto p = std::filesystem::path(param<std::string>(c.params, key));
  if (p.is_relative()) p = c.base_dir / p;
  if (!std::filesystem::is_regular_file(p))
    throw ConfigError("params." + key, "file does not exist: " + p.string());
  return p;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string format_point(const std::vector<double>& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ' ';
    s += io::format_double(x[i]);
  }
  return s;
}

inline std::optional<double> z_score(const std::optional<double>& v, const EnsembleSummary& b) {
  if (!v || !(b.stddev > 0.0)) return std::nullopt;
  return (*v - b.mean) / b.stddev;
}

// ---- minors -------------------------------------------------------------

inline json run_minors(const ExperimentConfig& c, ArtifactWriter& out) {
  io::check_fields(c.params, {"matrix", "random", "h"}, "params");
  Matrix m;
  if (c.params.contains("matrix")) {
    m = io::matrix_from_json(c.params.at("matrix"), "params.matrix");
  } else if (c.params.contains("random")) {
    const json& r = c.params.at("random");
    io::check_fields(r, {"rows", "cols"}, "params.random");
    m = random_gaussian_matrix(param<std::size_t>(r, "rows"), param<std::size_t>(r, "cols"), c.seed);
  } else {
    throw ConfigError("params.matrix", "need either matrix or random");
  }
  const auto h = param<std::size_t>(c.params, "h");
  if (h < 1 || h > std::min(m.rows(), m.cols()))
    throw ConfigError("params.h", "must lie in [1, min(rows, cols)]");
  const MinorTable table = minors(m, h);
  const MCReport report = mc_report(table);
  if (c.wants("csv")) out.write("minors.csv", io::minors_csv(table));
  if (c.wants("json")) {
    out.write("minors.json", dump(io::minor_table_json(table)));
    out.write("report.json", dump({{"matrix", io::matrix_json(m)}, {"report", io::mc_report_json(report)}}));
  }
  if (c.wants("svg")) {
    out.write("group_masses.svg",
              render_plot({{"row groups", report.row_group_masses}, {"column groups", report.col_group_masses}},
                          "minor mass per subset group"));
  }
  return {{"mcGlobal", io::optional_json(report.mc_global)}};
}

// ---- baseline -----------------------------------------------------------

inline json run_baseline(const ExperimentConfig& c, ArtifactWriter& out) {
  io::check_fields(c.params, {"rows", "cols", "h", "trials"}, "params");
  const auto rows = param<std::size_t>(c.params, "rows");
  const auto cols = param<std::size_t>(c.params, "cols");
  const auto h = param<std::size_t>(c.params, "h");
  const auto trials = param<std::size_t>(c.params, "trials");
  if (rows < 1 || cols < 1) throw ConfigError("params.rows", "shape must be positive");
  if (h < 1 || h > std::min(rows, cols)) throw ConfigError("params.h", "must lie in [1, min(rows, cols)]");
  if (trials < 1) throw ConfigError("params.trials", "must be at least 1");
  const EnsembleSummary s = mc_baseline(rows, cols, h, trials, c.seed);
  if (c.wants("json")) out.write("baseline.json", dump(io::ensemble_json(s)));
  if (c.wants("csv")) {
    io::CsvTable t{{"trial", "mc"}, {}};
    for (std::size_t i = 0; i < s.values.size(); ++i)
      t.rows.push_back({std::to_string(i), io::format_double(s.values[i])});
    out.write("baseline_values.csv", io::write_csv(t));
  }
  if (c.wants("svg")) {
    auto sorted = s.values;
    std::sort(sorted.begin(), sorted.end());
    out.write("baseline_sorted.svg", render_plot({{"sorted MC", sorted}}, "Gaussian baseline MC"));
  }
  return {{"mean", s.mean}, {"stddev", s.stddev}};
}

// ---- mc-analyze ---------------------------------------------------------

/// Either an MLP or a KA embedding read from a checkpoint file.
struct Probeable {
  std::optional<nn::MLP> mlp;
  std::optional<ka::KAEmbedding> embedding;

  std::size_t depth() const { return mlp ? mlp->depth() : 1; }
  std::size_t width(std::size_t layer) const {
    if (mlp) return mlp->width(layer);
    return layer == 0 ? 2 : ka::kFamilies;
  }
  std::size_t input_width() const { return width(0); }
  std::string model() const { return mlp ? "mlp" : "ka-embedding"; }

  Matrix jacobian(const std::vector<double>& x, std::size_t i, std::size_t j) const {
    if (mlp) return nn::jacobian_between(*mlp, x, i, j);
    return ka::embedding_jacobian(*embedding, {x[0], x[1]});
  }
};

inline Probeable load_probeable(const std::filesystem::path& path) {
  const json j = read_json_file(path, "params.checkpoint");
  Probeable p;
  const std::string model = j.value("model", "mlp");
  if (model == "mlp") {
    p.mlp = io::mlp_from_json(j);
  } else if (model == "ka-embedding") {
    p.embedding = io::embedding_from_json(j);
  } else {
    throw ConfigError("checkpoint.model", "unknown model '" + model + "'");
  }
  return p;
}

inline std::vector<std::vector<double>> probe_points(const ExperimentConfig& c, const Probeable& net) {
  const auto source = param<std::string>(c.params, "probeSource", std::string("uniform-random"));
  const auto count = param<std::size_t>(c.params, "sampleCount");
  if (count < 1) throw ConfigError("params.sampleCount", "must be at least 1");
  std::vector<std::vector<double>> points;
  Rng rng(mix_seed(c.seed, 1));
  if (source == "uniform-random") {
    auto range = param<std::vector<double>>(c.params, "inputRange", std::vector<double>{0.0, 1.0});
    if (range.size() != 2 || !(range[0] < range[1]))
      throw ConfigError("params.inputRange", "need [lo, hi] with lo < hi");
    if (net.embedding) range = {0.0, 1.0};
    while (points.size() < count) {
      std::vector<double> x(net.input_width());
      for (double& v : x) v = rng.uniform(range[0], range[1]);
      if (net.embedding && net.embedding->on_boundary({x[0], x[1]})) continue;
      points.push_back(std::move(x));
    }
  } else if (source == "training-data") {
    if (net.embedding) throw ConfigError("params.probeSource", "KA embeddings have no training data");
    const nn::Dataset data = io::dataset_from_json(read_json_file(existing_file(c, "dataset"), "params.dataset"));
    nn::check_dataset(*net.mlp, data);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
    for (std::size_t i = 0; i < std::min(count, order.size()); ++i) points.push_back(data[order[i]].input);
  } else {
    throw ConfigError("params.probeSource", "must be uniform-random or training-data");
  }
  return points;
}

inline json run_mc_analyze(const ExperimentConfig& c, ArtifactWriter& out) {
  io::check_fields(c.params, {"checkpoint", "layerPairs", "hList", "probeSource", "sampleCount",
                              "baselineTrials", "inputRange", "dataset"},
                   "params");
  const Probeable net = load_probeable(existing_file(c, "checkpoint"));
  const auto pairs = param<std::vector<std::vector<std::size_t>>>(c.params, "layerPairs");
  const auto hs = param<std::vector<std::size_t>>(c.params, "hList");
  const auto trials = param<std::size_t>(c.params, "baselineTrials", std::size_t{500});
  if (pairs.empty()) throw ConfigError("params.layerPairs", "must not be empty");
  if (hs.empty()) throw ConfigError("params.hList", "must not be empty");
  for (const auto& p : pairs)
    if (p.size() != 2 || !(p[0] < p[1] && p[1] <= net.depth()))
      throw ConfigError("params.layerPairs", "each pair must be [i, j] with 0 <= i < j <= depth");
  const auto points = probe_points(c, net);

  json analyses = json::array();
  io::CsvTable table{{"sourceLayer", "targetLayer", "h", "point", "input", "mcGlobal", "degenerate",
                      "rowConcentration", "colConcentration", "maxAbsMinor", "zScore"},
                     {}};
  std::vector<Series> plot;
  std::size_t combo = 0;
  for (const auto& pair : pairs) {
    const std::size_t p = net.width(pair[0]), q = net.width(pair[1]);
    for (std::size_t h : hs) {
      if (h < 1 || h > std::min(p, q))
        throw ConfigError("params.hList", "order " + std::to_string(h) + " invalid for a " +
                                              std::to_string(p) + "x" + std::to_string(q) + " Jacobian");
      const EnsembleSummary base = mc_baseline(p, q, h, trials, mix_seed(c.seed, 100 + combo++));
      json reports = json::array();
      std::vector<double> zs;
      double mc_sum = 0.0;
      std::size_t used = 0, degenerate = 0;
      for (std::size_t k = 0; k < points.size(); ++k) {
        const MCReport r = mc_report(net.jacobian(points[k], pair[0], pair[1]), h);
        const auto z = z_score(r.mc_global, base);
        if (r.mc_global) {
          mc_sum += *r.mc_global;
          ++used;
        } else {
          ++degenerate;
        }
        if (z) zs.push_back(*z);
        table.rows.push_back({std::to_string(pair[0]), std::to_string(pair[1]), std::to_string(h),
                              std::to_string(k), format_point(points[k]), io::format_optional(r.mc_global),
                              r.degenerate() ? "1" : "0", io::format_optional(r.row_concentration),
                              io::format_optional(r.col_concentration), io::format_double(r.max_abs_minor),
                              io::format_optional(z)});
        json rj = io::mc_report_json(r);
        rj["zScore"] = io::optional_json(z);
        reports.push_back(std::move(rj));
      }
      std::optional<double> mean_mc;
      if (used) mean_mc.emplace(mc_sum / static_cast<double>(used));
      double z_mean = 0.0;
      for (double z : zs) z_mean += z;
      analyses.push_back({{"sourceLayer", pair[0]},
                          {"targetLayer", pair[1]},
                          {"h", h},
                          {"shape", {p, q}},
                          {"points", points.size()},
                          {"degenerateCount", degenerate},
                          {"meanMc", io::optional_json(mean_mc)},
                          {"meanZScore", zs.empty() ? json(nullptr) : json(z_mean / static_cast<double>(zs.size()))},
                          {"zScoreOfMean", io::optional_json(z_score(mean_mc, base))},
                          {"baseline", io::ensemble_json(base)},
                          {"reports", reports}});
      std::vector<double> series;
      for (const auto& r : reports)
        series.push_back(r["mcGlobal"].is_null() ? NAN : r["mcGlobal"].get<double>());
      plot.push_back({"J" + std::to_string(pair[0]) + std::to_string(pair[1]) + " h=" + std::to_string(h), series});
    }
  }
  json summary = {{"model", net.model()}, {"probeCount", points.size()}, {"analyses", analyses}};
  if (c.wants("json")) out.write("analysis.json", dump(summary));
  if (c.wants("csv")) out.write("analysis.csv", io::write_csv(table));
  if (c.wants("svg")) out.write("analysis.svg", render_plot(plot, "MC per probe point"));
  json brief = json::array();
  for (const auto& a : analyses)
    brief.push_back({{"sourceLayer", a["sourceLayer"]}, {"targetLayer", a["targetLayer"]}, {"h", a["h"]},
                     {"meanMc", a["meanMc"]}, {"zScoreOfMean", a["zScoreOfMean"]}});
  return brief;
}

// ---- train --------------------------------------------------------------

inline nn::Dataset make_dataset(const ExperimentConfig& c, const nn::MLPConfig& arch) {
  const json& d = c.params.at("dataset");
  io::check_fields(d, {"source", "count", "teacherSeed", "inputRange", "path"}, "params.dataset");
  const auto source = param<std::string>(d, "source", std::string("teacher"));
  if (source == "file") {
    auto path = std::filesystem::path(param<std::string>(d, "path"));
    if (path.is_relative()) path = c.base_dir / path;
    if (!std::filesystem::is_regular_file(path))
      throw ConfigError("params.dataset.path", "file does not exist: " + path.string());
    return io::dataset_from_json(read_json_file(path, "params.dataset.path"));
  }
  if (source != "teacher") throw ConfigError("params.dataset.source", "must be teacher or file");
  const auto count = param<std::size_t>(d, "count", std::size_t{64});
  if (count < 1) throw ConfigError("params.dataset.count", "must be at least 1");
  const auto range = param<std::vector<double>>(d, "inputRange", std::vector<double>{-1.0, 1.0});
  if (range.size() != 2 || !(range[0] < range[1]))
    throw ConfigError("params.dataset.inputRange", "need [lo, hi] with lo < hi");
  nn::MLPConfig teacher_cfg = arch;
  teacher_cfg.seed = param<std::uint64_t>(d, "teacherSeed", mix_seed(c.seed, 7));
  const nn::MLP teacher = nn::init_mlp(teacher_cfg);
  Rng rng(mix_seed(c.seed, 2));
  nn::Dataset data;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> x(arch.layer_sizes.front());
    for (double& v : x) v = rng.uniform(range[0], range[1]);
    data.push_back({x, nn::forward(teacher, x).output()});
  }
  return data;
}

inline json run_train(const ExperimentConfig& c, ArtifactWriter& out) {
  io::check_fields(c.params, {"layerSizes", "activationKinds", "initSeed", "dataset", "schedule", "objective",
                              "mcStep", "lossThreshold"},
                   "params");
  nn::MLPConfig arch;
  arch.layer_sizes = param<std::vector<std::size_t>>(c.params, "layerSizes");
  for (const auto& a : param<std::vector<std::string>>(c.params, "activationKinds"))
    arch.activations.push_back(nn::parse_activation(a));
  arch.seed = param<std::uint64_t>(c.params, "initSeed", c.seed);
  arch.validate();
  if (!c.params.contains("dataset")) throw ConfigError("params.dataset", "missing required field");
  const nn::Dataset data = make_dataset(c, arch);
  const nn::MLP initial = nn::init_mlp(arch);
  nn::check_dataset(initial, data);

  const json& sj = io::require(c.params, "schedule", "params");
  io::check_fields(sj, {"taskStepsPerMCStep", "totalSteps", "learningRate", "batchSize"}, "params.schedule");
  training::InterleaveSchedule schedule;
  schedule.task_steps_per_mc_step = param<std::size_t>(sj, "taskStepsPerMCStep", std::size_t{1});
  schedule.total_steps = param<std::size_t>(sj, "totalSteps");
  schedule.learning_rate = param<double>(sj, "learningRate", 0.1);
  schedule.batch_size = param<std::size_t>(sj, "batchSize", std::size_t{0});
  schedule.seed = c.seed;
  schedule.validate();

  const json& oj = io::require(c.params, "objective", "params");
  io::check_fields(oj, {"sourceLayer", "targetLayer", "h", "probeCount", "probeSource"}, "params.objective");
  training::MCObjectiveSpec spec;
  spec.source_layer = param<std::size_t>(oj, "sourceLayer", std::size_t{0});
  spec.target_layer = param<std::size_t>(oj, "targetLayer");
  spec.h = param<std::size_t>(oj, "h");
  const auto probe_count = param<std::size_t>(oj, "probeCount", std::size_t{8});
  const auto probe_source = param<std::string>(oj, "probeSource", std::string("training-data"));
  if (probe_source == "training-data") {
    for (std::size_t i = 0; i < std::min(probe_count, data.size()); ++i) spec.probe_points.push_back(data[i].input);
  } else if (probe_source == "uniform-random") {
    Rng rng(mix_seed(c.seed, 3));
    for (std::size_t i = 0; i < probe_count; ++i) {
      std::vector<double> x(arch.layer_sizes.front());
      for (double& v : x) v = rng.uniform(-1.0, 1.0);
      spec.probe_points.push_back(std::move(x));
    }
  } else {
    throw ConfigError("params.objective.probeSource", "must be training-data or uniform-random");
  }
  spec.validate(initial);

  const json& mj = io::require(c.params, "mcStep", "params");
  io::check_fields(mj, {"deltaPrimes", "parameterScope", "fdStep"}, "params.mcStep");
  const auto deltas = param<std::vector<double>>(mj, "deltaPrimes");
  if (deltas.empty()) throw ConfigError("params.mcStep.deltaPrimes", "must not be empty");
  training::MCStepConfig step;
  for (auto j : param<std::vector<std::size_t>>(mj, "parameterScope", std::vector<std::size_t>{}))
    step.parameter_scope.insert(j);
  step.fd_step = param<double>(mj, "fdStep", 1e-4);
  step.resolved_scope(spec);
  const double threshold = param<double>(c.params, "lossThreshold", 1e-3);

  if (c.wants("json")) out.write("dataset.json", dump(io::dataset_json(data)));
  std::vector<training::RunMetrics> runs;
  std::vector<Series> loss_plot, mc_plot;
  for (std::size_t r = 0; r < deltas.size(); ++r) {
    nn::MLP net = initial;
    step.delta_prime = deltas[r];
    auto metrics = training::interleaved_train(net, data, spec, step, schedule);
    const std::string tag = "run" + std::to_string(r);
    if (c.wants("csv")) out.write(tag + "_metrics.csv", io::metrics_csv(metrics));
    if (c.wants("json")) {
      out.write(tag + "_metrics.json", dump(io::run_metrics_json(metrics)));
      out.write(tag + "_checkpoint.json", dump(io::mlp_json(net)));
    }
    Series loss{"delta'=" + io::format_double(deltas[r]), {}}, mcs{loss.name, {}};
    for (const auto& rec : metrics.records) {
      loss.values.push_back(rec.task_loss);
      mcs.values.push_back(rec.mc_value.value_or(NAN));
    }
    loss_plot.push_back(std::move(loss));
    mc_plot.push_back(std::move(mcs));
    runs.push_back(std::move(metrics));
  }
  json result = {{"runs", runs.size()}};
  if (runs.size() >= 2) {
    const auto cmp = training::compare_runs(runs, threshold);
    if (c.wants("csv")) out.write("comparison.csv", io::comparison_csv(cmp));
    if (c.wants("json")) out.write("comparison.json", dump(io::comparison_json(cmp)));
    result["comparison"] = io::comparison_json(cmp);
  }
  if (c.wants("svg") && schedule.total_steps > 0) {
    out.write("loss.svg", render_plot(loss_plot, "task loss"));
    out.write("mc.svg", render_plot(mc_plot, "MC objective"));
  }
  return result;
}

// ---- ka-demo ------------------------------------------------------------

inline json run_ka_demo(const ExperimentConfig& c, ArtifactWriter& out) {
  io::check_fields(c.params, {"level", "gamma", "target", "constant", "sampledNodes", "maxIterations", "gridSize",
                              "floor", "incrementDivisor", "jacobianSamples"},
                   "params");
  const auto level = param<std::size_t>(c.params, "level", std::size_t{8});
  const auto gamma = param<double>(c.params, "gamma", 0.2);
  const ka::KAEmbedding emb(level, gamma);
  const double min_gap = ka::check_distinct_plateaus(emb);

  ka::TargetFunction f = ka::TargetFunction::from_name(param<std::string>(c.params, "target", std::string("sine")),
                                                       param<double>(c.params, "constant", 1.0));
  if (c.params.contains("sampledNodes"))
    f = ka::TargetFunction::sample(f, param<std::size_t>(c.params, "sampledNodes"));

  ka::RepresentOptions options;
  options.max_iterations = param<std::size_t>(c.params, "maxIterations", std::size_t{25});
  if (c.params.contains("floor")) options.floor = param<double>(c.params, "floor");
  options.step.increment_divisor = param<double>(c.params, "incrementDivisor", 3.0);
  const auto grid = ka::evaluation_grid(emb, param<std::size_t>(c.params, "gridSize", std::size_t{161}));
  const auto rep = ka::represent(emb, f, grid, options);

  // Jacobian column sparsity at random interior points.
  const auto samples = param<std::size_t>(c.params, "jacobianSamples", std::size_t{1000});
  Rng rng(mix_seed(c.seed, 4));
  std::size_t sparse = 0, single = 0, degenerate = 0, taken = 0;
  while (taken < samples) {
    const ka::Point x{rng.uniform(), rng.uniform()};
    if (emb.on_boundary(x)) continue;
    ++taken;
    const Matrix jac = ka::embedding_jacobian(emb, x);
    std::size_t zero_cols = 0;
    for (std::size_t k = 0; k < ka::kFamilies; ++k) zero_cols += jac(0, k) == 0.0 && jac(1, k) == 0.0;
    sparse += zero_cols >= 3;
    const auto v = mc(jac, 2);
    if (!v) ++degenerate;
    else if (*v == 1.0) ++single;
  }
  const json jacobian_stats = {{"samples", taken},
                               {"atLeastThreeZeroColumns", sparse},
                               {"mcEqualsOne", single},
                               {"degenerate", degenerate}};

  if (c.wants("json")) {
    out.write("embedding.json", dump(io::embedding_json(emb)));
    out.write("outer_function.json", dump(io::outer_function_json(rep.g)));
    out.write("iteration.json", dump({{"target", f.name()},
                                      {"resolutionFloor", ka::resolution_floor(f, emb)},
                                      {"minimumPlateauGap", min_gap},
                                      {"report", io::iteration_report_json(rep.report)},
                                      {"jacobian", jacobian_stats}}));
  }
  if (c.wants("csv")) out.write("iteration.csv", io::iteration_csv(rep.report));
  if (c.wants("svg")) out.write("iteration.svg", render_plot({{"sup error", rep.report.errors}}, "outer iteration"));
  return {{"iterations", rep.report.iterations()}, {"reachedFloor", rep.report.reached_floor}};
}

}  // namespace detail

struct RunResult {
  json manifest;
  json summary;
};

/// Execute one experiment into `out_dir`. On failure, files written by this
/// run are removed and the exception propagates.
inline RunResult run(const ExperimentConfig& c, const std::filesystem::path& out_dir) {
  ArtifactWriter out(out_dir);
  json summary;
  if (c.kind == "minors") summary = detail::run_minors(c, out);
  else if (c.kind == "baseline") summary = detail::run_baseline(c, out);
  else if (c.kind == "mc-analyze") summary = detail::run_mc_analyze(c, out);
  else if (c.kind == "train") summary = detail::run_train(c, out);
  else if (c.kind == "ka-demo") summary = detail::run_ka_demo(c, out);
  else throw ConfigError("kind", "unknown kind '" + c.kind + "'");
  json manifest = {{"tool", "kamc"}, {"kind", c.kind}, {"seed", c.seed}, {"config", c.echo()}};
  return {out.finish(std::move(manifest)), std::move(summary)};
}

}  // namespace kamc::harness
