#pragma once

// End-to-end training: partitions, rule universe, ACO selection, model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "hit2mtsk/aco.hpp"
#include "hit2mtsk/dataset.hpp"
#include "hit2mtsk/inference.hpp"
#include "hit2mtsk/universe.hpp"

namespace hit2 {

struct PipelineConfig {
  PartitionOptions partition{};
  GenerationConfig generation{};
  AcoConfig aco{};
  WeightReduction reduction = WeightReduction::midpoint;
  // Share of the training rows held out from rule fitting and used, together
  // with the fitting rows, to score ACO subsets.
  double validation_fraction = 0.2;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  void validate() const {
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw ConfigError("validation fraction must lie in [0, 1)");
    if (generation.degree < 1 || generation.degree > 3) throw ConfigError("polynomial degree must be 1, 2 or 3");
    if (partition.num_sets < 2) throw ConfigError("at least two fuzzy sets per variable are required");
  }
};

// Sample standard deviation of each feature column.
inline std::vector<double> feature_stddevs(const DataView& rows) {
  std::vector<double> out(rows.num_features, 0.0);
  const std::size_t n = rows.rows();
  if (n < 2) return out;
  for (std::size_t f = 0; f < rows.num_features; ++f) {
    double mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) mean += rows.row(p)[f];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t p = 0; p < n; ++p) ss += (rows.row(p)[f] - mean) * (rows.row(p)[f] - mean);
    out[f] = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return out;
}

struct TrainResult {
  Model model;
  std::size_t universe_size = 0;
  std::size_t distinct_candidates = 0;
  double universe_coverage = 0.0;
  AcoResult aco;
};

inline TrainResult train_model(const Dataset& train, const PipelineConfig& config) {
  config.validate();
  train.validate();
  const auto parts = build_partitions(train, config.partition);

  // Deterministic fit/validation split of the training rows.
  const auto order = permutation(train.rows(), config.seed);
  std::size_t n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * train.rows()));
  if (n_val >= train.rows()) n_val = 0;
  std::vector<std::size_t> fit_rows(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::vector<std::size_t> val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::sort(fit_rows.begin(), fit_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  const Dataset fit = train.subset(fit_rows);
  const Dataset validation = train.subset(val_rows);

  GenerationConfig gen = config.generation;
  gen.seed = config.seed;
  gen.threads = config.threads;
  const RuleUniverse universe = generate_candidates(fit, parts, gen);

  TrainResult out;
  out.universe_size = universe.rules.size();
  out.distinct_candidates = universe.distinct_candidates;
  out.universe_coverage = universe.coverage;

  Model& model = out.model;
  model.feature_names = train.feature_names;
  model.target_name = train.target_name;
  model.feature_partitions = parts.features;
  model.target_partition = parts.target;
  model.tnorm = gen.tnorm;
  model.reduction = config.reduction;
  model.fallback_value = std::accumulate(train.targets.begin(), train.targets.end(), 0.0) /
                         static_cast<double>(train.rows());
  model.feature_stddev = feature_stddevs(train.view());

  // Small universes shrink the subset-size range instead of failing.
  AcoConfig aco = config.aco;
  aco.seed = config.seed;
  aco.threads = config.threads;
  aco.max_subset = std::min(aco.max_subset, universe.rules.size());
  aco.min_subset = std::min(aco.min_subset, aco.max_subset);
  out.aco = select_rules(universe.rules, fit, validation, model.fallback_value, model.tnorm, model.reduction, aco);
  for (std::size_t i : out.aco.selected) model.rules.push_back(universe.rules[i]);
  if (model.rules.empty()) throw TrainingError("rule selection returned an empty rule base");
  return out;
}

}  // namespace hit2
