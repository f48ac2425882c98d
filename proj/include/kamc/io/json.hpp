#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kamc/baseline.hpp"
#include "kamc/error.hpp"
#include "kamc/exterior.hpp"
#include "kamc/ka/outer.hpp"
#include "kamc/nn/mlp.hpp"
#include "kamc/nn/train.hpp"
#include "kamc/training/interleave.hpp"

namespace kamc::io {

using nlohmann::json;

inline json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

inline std::optional<double> optional_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

/// Fetch a required member, naming it in the error.
inline const json& require(const json& j, const std::string& key, const std::string& where = {}) {
  const std::string field = where.empty() ? key : where + "." + key;
  if (!j.is_object() || !j.contains(key)) throw ConfigError(field, "missing required field");
  return j.at(key);
}

/// Reject members not in `allowed`.
inline void check_fields(const json& j, std::initializer_list<std::string_view> allowed,
                         const std::string& where = {}) {
  if (!j.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where.empty() ? key : where + "." + key, "unknown field");
  }
}

// ---- Matrix -------------------------------------------------------------

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& field = "matrix") {
  if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty())
    throw ConfigError(field, "must be a nonempty array of nonempty rows");
  const std::size_t cols = j.front().size();
  std::vector<double> data;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) throw ConfigError(field, "rows must have equal length");
    for (const auto& v : row) {
      if (!v.is_number()) throw ConfigError(field, "entries must be numbers");
      data.push_back(v.get<double>());
    }
  }
  Matrix m(j.size(), cols, std::move(data));
  m.validate();
  return m;
}

// ---- exterior core ------------------------------------------------------

inline json minor_table_json(const MinorTable& t) {
  return {{"h", t.order()},
          {"sourceRows", t.source_rows()},
          {"sourceCols", t.source_cols()},
          {"rowCount", t.row_count()},
          {"colCount", t.col_count()},
          {"rowSubsets", t.row_subsets()},
          {"colSubsets", t.col_subsets()},
          {"values", matrix_json(t.values())}};
}

inline MinorTable minor_table_from_json(const json& j) {
  return MinorTable(j.at("h").get<std::size_t>(), j.at("sourceRows").get<std::size_t>(),
                    j.at("sourceCols").get<std::size_t>(), matrix_from_json(j.at("values"), "values"));
}

inline json mc_report_json(const MCReport& r) {
  return {{"h", r.h},
          {"mcGlobal", optional_json(r.mc_global)},
          {"degenerate", r.degenerate()},
          {"rowGroupMasses", r.row_group_masses},
          {"colGroupMasses", r.col_group_masses},
          {"rowConcentration", optional_json(r.row_concentration)},
          {"colConcentration", optional_json(r.col_concentration)},
          {"maxAbsMinor", r.max_abs_minor},
          {"totalMinorCount", r.total_minor_count}};
}

inline MCReport mc_report_from_json(const json& j) {
  MCReport r;
  r.h = j.at("h").get<std::size_t>();
  r.mc_global = optional_from_json(j.at("mcGlobal"));
  r.row_group_masses = j.at("rowGroupMasses").get<std::vector<double>>();
  r.col_group_masses = j.at("colGroupMasses").get<std::vector<double>>();
  r.row_concentration = optional_from_json(j.at("rowConcentration"));
  r.col_concentration = optional_from_json(j.at("colConcentration"));
  r.max_abs_minor = j.at("maxAbsMinor").get<double>();
  r.total_minor_count = j.at("totalMinorCount").get<std::size_t>();
  return r;
}

inline json ensemble_json(const EnsembleSummary& s) {
  json q = json::object();
  for (std::size_t i = 0; i < kSummaryQuantiles.size(); ++i)
    q[std::to_string(static_cast<int>(kSummaryQuantiles[i] * 100.0 + 0.5))] = s.quantiles[i];
  return {{"rows", s.rows},   {"cols", s.cols},     {"h", s.h},
          {"trials", s.trials}, {"degenerate", s.degenerate},
          {"mean", s.mean},   {"stddev", s.stddev}, {"min", s.min},
          {"max", s.max},     {"quantiles", q},     {"seed", s.seed}};
}

// ---- networks -----------------------------------------------------------

inline json mlp_json(const nn::MLP& net) {
  json acts = json::array();
  for (auto a : net.config.activations) acts.push_back(std::string(nn::to_string(a)));
  json weights = json::array();
  for (const auto& w : net.weights)
    weights.push_back(std::vector<double>(w.data().begin(), w.data().end()));
  return {{"model", "mlp"},
          {"layerSizes", net.config.layer_sizes},
          {"activationKinds", acts},
          {"initScheme", net.config.init_scheme},
          {"seed", net.config.seed},
          {"weights", weights},
          {"biases", net.biases}};
}

inline nn::MLP mlp_from_json(const json& j) {
  check_fields(j, {"model", "layerSizes", "activationKinds", "initScheme", "seed", "weights", "biases"},
               "checkpoint");
  if (j.contains("model") && j.at("model") != "mlp")
    throw ConfigError("checkpoint.model", "expected \"mlp\"");
  nn::MLP net;
  net.config.layer_sizes = require(j, "layerSizes", "checkpoint").get<std::vector<std::size_t>>();
  for (const auto& a : require(j, "activationKinds", "checkpoint"))
    net.config.activations.push_back(nn::parse_activation(a.get<std::string>()));
  if (j.contains("initScheme")) net.config.init_scheme = j.at("initScheme").get<std::string>();
  net.config.seed = require(j, "seed", "checkpoint").get<std::uint64_t>();
  net.config.validate();
  const auto& weights = require(j, "weights", "checkpoint");
  const auto& biases = require(j, "biases", "checkpoint");
  if (weights.size() != net.config.depth() || biases.size() != net.config.depth())
    throw ConfigError("checkpoint.weights", "layer count differs from layerSizes");
  for (std::size_t l = 1; l <= net.config.depth(); ++l) {
    const std::size_t rows = net.config.layer_sizes[l], cols = net.config.layer_sizes[l - 1];
    if (weights[l - 1].size() != rows * cols)
      throw ConfigError("checkpoint.weights", "layer " + std::to_string(l) + " needs " +
                                                  std::to_string(rows * cols) + " entries");
    if (biases[l - 1].size() != rows)
      throw ConfigError("checkpoint.biases", "layer " + std::to_string(l) + " needs " +
                                                 std::to_string(rows) + " entries");
    net.weights.emplace_back(net.config.layer_sizes[l], net.config.layer_sizes[l - 1],
                             weights[l - 1].get<std::vector<double>>());
    net.biases.push_back(biases[l - 1].get<std::vector<double>>());
  }
  net.validate();
  return net;
}

inline json dataset_json(const nn::Dataset& data) {
  json inputs = json::array(), targets = json::array();
  for (const auto& s : data) {
    inputs.push_back(s.input);
    targets.push_back(s.target);
  }
  return {{"inputs", inputs}, {"targets", targets}};
}

inline nn::Dataset dataset_from_json(const json& j) {
  check_fields(j, {"inputs", "targets"}, "dataset");
  const auto& in = require(j, "inputs", "dataset");
  const auto& out = require(j, "targets", "dataset");
  if (in.size() != out.size()) throw ConfigError("dataset.targets", "length differs from inputs");
  nn::Dataset data;
  for (std::size_t i = 0; i < in.size(); ++i)
    data.push_back({in[i].get<std::vector<double>>(), out[i].get<std::vector<double>>()});
  return data;
}

// ---- MC training --------------------------------------------------------

inline json run_config_json(const training::RunConfig& c) {
  json acts = json::array();
  for (auto a : c.network.activations) acts.push_back(std::string(nn::to_string(a)));
  return {{"layerSizes", c.network.layer_sizes},
          {"activationKinds", acts},
          {"initSeed", c.network.seed},
          {"sourceLayer", c.source_layer},
          {"targetLayer", c.target_layer},
          {"h", c.h},
          {"probeCount", c.probe_count},
          {"parameterScope", c.parameter_scope},
          {"fdStep", c.fd_step},
          {"deltaPrime", c.delta_prime},
          {"taskStepsPerMCStep", c.schedule.task_steps_per_mc_step},
          {"totalSteps", c.schedule.total_steps},
          {"learningRate", c.schedule.learning_rate},
          {"batchSize", c.schedule.batch_size},
          {"seed", c.schedule.seed}};
}

inline training::RunConfig run_config_from_json(const json& j) {
  training::RunConfig c;
  c.network.layer_sizes = j.at("layerSizes").get<std::vector<std::size_t>>();
  for (const auto& a : j.at("activationKinds"))
    c.network.activations.push_back(nn::parse_activation(a.get<std::string>()));
  c.network.seed = j.at("initSeed").get<std::uint64_t>();
  c.source_layer = j.at("sourceLayer").get<std::size_t>();
  c.target_layer = j.at("targetLayer").get<std::size_t>();
  c.h = j.at("h").get<std::size_t>();
  c.probe_count = j.at("probeCount").get<std::size_t>();
  c.parameter_scope = j.at("parameterScope").get<std::vector<std::size_t>>();
  c.fd_step = j.at("fdStep").get<double>();
  c.delta_prime = j.at("deltaPrime").get<double>();
  c.schedule.task_steps_per_mc_step = j.at("taskStepsPerMCStep").get<std::size_t>();
  c.schedule.total_steps = j.at("totalSteps").get<std::size_t>();
  c.schedule.learning_rate = j.at("learningRate").get<double>();
  c.schedule.batch_size = j.at("batchSize").get<std::size_t>();
  c.schedule.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline json run_metrics_json(const training::RunMetrics& m) {
  json records = json::array();
  for (const auto& r : m.records)
    records.push_back({{"step", r.step},
                       {"taskLoss", r.task_loss},
                       {"mcValue", optional_json(r.mc_value)},
                       {"deltaPrimeApplied", r.delta_prime_applied},
                       {"degenerateCount", r.degenerate_count},
                       {"mcStep", r.mc_step},
                       {"mcSkipped", r.mc_skipped}});
  return {{"config", run_config_json(m.config)}, {"seed", m.config.schedule.seed}, {"records", records}};
}

inline training::RunMetrics run_metrics_from_json(const json& j) {
  training::RunMetrics m;
  m.config = run_config_from_json(j.at("config"));
  for (const auto& r : j.at("records")) {
    training::StepRecord rec;
    rec.step = r.at("step").get<std::size_t>();
    rec.task_loss = r.at("taskLoss").get<double>();
    rec.mc_value = optional_from_json(r.at("mcValue"));
    rec.delta_prime_applied = r.at("deltaPrimeApplied").get<double>();
    rec.degenerate_count = r.at("degenerateCount").get<std::size_t>();
    rec.mc_step = r.at("mcStep").get<bool>();
    rec.mc_skipped = r.at("mcSkipped").get<bool>();
    m.records.push_back(rec);
  }
  return m;
}

inline json comparison_json(const training::ComparisonReport& c) {
  json runs = json::array();
  for (const auto& r : c.runs) {
    runs.push_back({{"seed", r.seed},
                    {"initSeed", r.init_seed},
                    {"deltaPrime", r.delta_prime},
                    {"stepsToThreshold", r.steps_to_threshold ? json(*r.steps_to_threshold) : json(nullptr)},
                    {"finalMc", optional_json(r.final_mc)},
                    {"finalLoss", r.final_loss},
                    {"maxLossDifference", r.max_loss_difference},
                    {"maxMcDifference", r.max_mc_difference}});
  }
  return {{"lossThreshold", c.loss_threshold},
          {"taskConfigMatch", c.task_config_match},
          {"varyingFields", c.varying_fields},
          {"runs", runs}};
}

// ---- KA construction ----------------------------------------------------

inline json embedding_json(const ka::KAEmbedding& emb) {
  json families = json::array();
  for (std::size_t k = 0; k < ka::kFamilies; ++k) {
    const auto& f = emb.family(k);
    json plateaus = json::array();
    for (const auto& p : f.plateaus())
      plateaus.push_back({{"index", p.index}, {"lo", p.span.lo}, {"hi", p.span.hi}, {"value", p.value}});
    json cells = json::array();
    for (const auto& c : emb.cells())
      if (c.family == k)
        cells.push_back({{"ix", c.index_x}, {"iy", c.index_y}, {"value", c.value},
                         {"center", {c.center[0], c.center[1]}}});
    families.push_back({{"family", k}, {"shift", f.shift()}, {"plateaus", plateaus}, {"cells", cells}});
  }
  return {{"model", "ka-embedding"},
          {"n", 2},
          {"m", ka::kFamilies},
          {"level", emb.level()},
          {"gamma", emb.gamma()},
          {"lambda", {emb.lambda()[0], emb.lambda()[1]}},
          {"families", families}};
}

/// Rebuilds from (level, gamma, lambda); the derived tables are ignored.
inline ka::KAEmbedding embedding_from_json(const json& j) {
  if (j.value("model", "") != "ka-embedding")
    throw ConfigError("checkpoint.model", "expected \"ka-embedding\"");
  const auto lambda = require(j, "lambda", "checkpoint").get<std::vector<double>>();
  if (lambda.size() != 2) throw ConfigError("checkpoint.lambda", "need two weights");
  return ka::KAEmbedding(require(j, "level", "checkpoint").get<std::size_t>(),
                         require(j, "gamma", "checkpoint").get<double>(), {lambda[0], lambda[1]});
}

inline json outer_function_json(const ka::OuterFunction& g) {
  return {{"breakpoints", g.breakpoints()}, {"values", g.values()}};
}

inline ka::OuterFunction outer_function_from_json(const json& j) {
  return ka::OuterFunction(j.at("breakpoints").get<std::vector<double>>(),
                           j.at("values").get<std::vector<double>>());
}

inline json iteration_report_json(const ka::IterationReport& r) {
  return {{"errors", r.errors},
          {"ratios", r.ratios},
          {"floor", r.floor},
          {"reachedFloor", r.reached_floor},
          {"nonContraction", r.non_contraction ? json(*r.non_contraction) : json(nullptr)}};
}

}  // namespace kamc::io
