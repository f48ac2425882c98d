#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "kamc/error.hpp"
#include "kamc/nn/train.hpp"
#include "kamc/training/mc_objective.hpp"

namespace kamc::training {

/// k task epochs, then one MC step, repeated for `total_steps` task epochs.
struct InterleaveSchedule {
  std::size_t task_steps_per_mc_step = 1;
  std::size_t total_steps = 0;
  double learning_rate = 0.1;
  std::size_t batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 0;

  void validate() const {
    if (task_steps_per_mc_step < 1)
      throw ConfigError("schedule.taskStepsPerMCStep", "must be at least 1");
  }
};

/// Everything that identifies a run, echoed into its metrics.
struct RunConfig {
  nn::MLPConfig network;
  std::size_t source_layer = 0;
  std::size_t target_layer = 1;
  std::size_t h = 1;
  std::size_t probe_count = 0;
  std::vector<std::size_t> parameter_scope;
  double fd_step = 1e-4;
  double delta_prime = 0.0;
  InterleaveSchedule schedule;

  /// Fields that must agree for two runs to be comparable; seeds and
  /// delta_prime are the experimental variables and excluded.
  bool same_task(const RunConfig& o) const {
    auto arch = [](const nn::MLPConfig& c) { return std::tie(c.layer_sizes, c.activations, c.init_scheme); };
    return arch(network) == arch(o.network) && source_layer == o.source_layer &&
           target_layer == o.target_layer && h == o.h && probe_count == o.probe_count &&
           parameter_scope == o.parameter_scope && fd_step == o.fd_step &&
           schedule.task_steps_per_mc_step == o.schedule.task_steps_per_mc_step &&
           schedule.total_steps == o.schedule.total_steps &&
           schedule.learning_rate == o.schedule.learning_rate &&
           schedule.batch_size == o.schedule.batch_size;
  }
};

struct StepRecord {
  std::size_t step = 0;
  double task_loss = 0.0;
  std::optional<double> mc_value;  // objective after the step; nullopt = degenerate
  double delta_prime_applied = 0.0;
  std::size_t degenerate_count = 0;
  bool mc_step = false;     // an MC step was scheduled after this task step
  bool mc_skipped = false;  // ...but skipped because the objective was degenerate

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct RunMetrics {
  RunConfig config;
  std::vector<StepRecord> records;
};

/// Alternate SGD epochs with MC ascent steps. Record s describes the state
/// after task epoch s and, when scheduled, the MC step that follows it.
inline RunMetrics interleaved_train(MLP& net, const nn::Dataset& data,
                                    const MCObjectiveSpec& objective, const MCStepConfig& step,
                                    const InterleaveSchedule& schedule) {
  schedule.validate();
  objective.validate(net);
  const auto scope = step.resolved_scope(objective);
  nn::check_dataset(net, data);

  RunMetrics metrics;
  metrics.config.network = net.config;
  metrics.config.source_layer = objective.source_layer;
  metrics.config.target_layer = objective.target_layer;
  metrics.config.h = objective.h;
  metrics.config.probe_count = objective.probe_points.size();
  metrics.config.parameter_scope.assign(scope.begin(), scope.end());
  metrics.config.fd_step = step.fd_step;
  metrics.config.delta_prime = step.delta_prime;
  metrics.config.schedule = schedule;

  nn::SgdTrainer trainer(data, {schedule.learning_rate, schedule.batch_size, schedule.seed});
  MCStepConfig scoped = step;
  scoped.parameter_scope = scope;

  for (std::size_t s = 0; s < schedule.total_steps; ++s) {
    StepRecord rec;
    rec.step = s;
    rec.task_loss = trainer.epoch(net);
    if ((s + 1) % schedule.task_steps_per_mc_step == 0) {
      rec.mc_step = true;
      if (!mc_objective(net, objective).value) {
        rec.mc_skipped = true;
      } else if (step.delta_prime != 0.0) {
        try {
          mc_step(net, mc_gradient(net, objective, scoped), step.delta_prime);
          rec.delta_prime_applied = step.delta_prime;
        } catch (const DegenerateError&) {
          rec.mc_skipped = true;
        }
      }
    }
    const auto after = mc_objective(net, objective);
    rec.mc_value = after.value;
    rec.degenerate_count = after.degenerate_count;
    metrics.records.push_back(rec);
  }
  return metrics;
}

struct RunSummary {
  std::uint64_t seed = 0;
  std::uint64_t init_seed = 0;
  double delta_prime = 0.0;
  std::optional<std::size_t> steps_to_threshold;  // first step with loss <= threshold
  std::optional<double> final_mc;
  double final_loss = 0.0;
  double max_loss_difference = 0.0;  // against the first run
  double max_mc_difference = 0.0;
};

/// One step of every run, side by side.
struct AlignedStep {
  std::size_t step = 0;
  std::vector<double> task_loss;
  std::vector<std::optional<double>> mc_value;
};

struct ComparisonReport {
  double loss_threshold = 0.0;
  bool task_config_match = true;
  std::vector<std::string> varying_fields;  // among "seed", "initSeed", "deltaPrime"
  std::vector<RunSummary> runs;
  std::vector<AlignedStep> aligned;
};

/// Align runs step by step and summarize them. Runs must share a task config.
inline ComparisonReport compare_runs(const std::vector<RunMetrics>& runs, double loss_threshold) {
  if (runs.size() < 2) throw ConfigError("runs", "need at least two runs to compare");
  ComparisonReport report;
  report.loss_threshold = loss_threshold;
  const RunMetrics& first = runs.front();
  for (const auto& r : runs) {
    if (!r.config.same_task(first.config))
      throw ConfigError("runs", "task configurations differ; runs are not comparable");
    if (r.records.size() != first.records.size())
      throw ConfigError("runs", "runs have different lengths");
  }
  auto varies = [&](auto get) {
    for (const auto& r : runs)
      if (get(r.config) != get(first.config)) return true;
    return false;
  };
  if (varies([](const RunConfig& c) { return c.schedule.seed; })) report.varying_fields.push_back("seed");
  if (varies([](const RunConfig& c) { return c.network.seed; })) report.varying_fields.push_back("initSeed");
  if (varies([](const RunConfig& c) { return c.delta_prime; })) report.varying_fields.push_back("deltaPrime");

  for (const auto& r : runs) {
    RunSummary s;
    s.seed = r.config.schedule.seed;
    s.init_seed = r.config.network.seed;
    s.delta_prime = r.config.delta_prime;
    for (const auto& rec : r.records)
      if (rec.task_loss <= loss_threshold) {
        s.steps_to_threshold = rec.step;
        break;
      }
    if (!r.records.empty()) {
      s.final_mc = r.records.back().mc_value;
      s.final_loss = r.records.back().task_loss;
    }
    for (std::size_t k = 0; k < r.records.size(); ++k) {
      const auto& a = r.records[k];
      const auto& b = first.records[k];
      s.max_loss_difference = std::max(s.max_loss_difference, std::abs(a.task_loss - b.task_loss));
      if (a.mc_value && b.mc_value)
        s.max_mc_difference = std::max(s.max_mc_difference, std::abs(*a.mc_value - *b.mc_value));
      else if (a.mc_value.has_value() != b.mc_value.has_value())
        s.max_mc_difference = std::max(s.max_mc_difference, 1.0);
    }
    report.runs.push_back(s);
  }
  for (std::size_t k = 0; k < first.records.size(); ++k) {
    AlignedStep row;
    row.step = first.records[k].step;
    for (const auto& r : runs) {
      row.task_loss.push_back(r.records[k].task_loss);
      row.mc_value.push_back(r.records[k].mc_value);
    }
    report.aligned.push_back(std::move(row));
  }
  return report;
}

}  // namespace kamc::training
