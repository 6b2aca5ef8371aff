#pragma once

// Evaluation harness: cross-validation, explainability metrics, noise
// robustness, and the Mamdani baseline comparator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hit2mtsk/dataset.hpp"
#include "hit2mtsk/dominance.hpp"
#include "hit2mtsk/inference.hpp"
#include "hit2mtsk/pipeline.hpp"

namespace hit2 {

struct ReferenceResult {
  std::string method;
  double rmse = 0.0;
};

// Reference RMSEs, stored as data. Keys are lower-case dataset names.
inline const std::map<std::string, std::vector<ReferenceResult>>& reference_results() {
  static const std::map<std::string, std::vector<ReferenceResult>> table = {
      {"concrete", {{"HIT2-MTSK-D3", 7.29}, {"GLD-WM", 7.32}, {"MP", 7.86}}},
      {"diabetes", {{"HIT2-MTSK-D3", 0.80}, {"HIT2-MTSK-D2", 0.79}, {"MP", 0.63}, {"SMOreg", 0.65}}},
      {"ele-2", {{"HIT2-MTSK-D3", 189.28}, {"MP", 158.05}}},
      {"mortgage", {{"HIT2-MTSK-D3", 0.13}, {"HIT2-MTSK-D2", 0.15}, {"WM", 0.92}, {"MP", 0.11}}},
      {"treasury", {{"HIT2-MTSK-D3", 0.27}, {"MP", 0.25}}},
      {"wankara", {{"HIT2-MTSK-D2", 1.58}, {"HIT2-MTSK-D3", 1.58}, {"SMOreg", 1.58}}},
      {"california",
       {{"Linear Regression", 0.728},
        {"CART (RF)", 0.720},
        {"NAM", 0.562},
        {"EBM", 0.557},
        {"XGBoost", 0.532},
        {"DNN", 0.492},
        {"Mamdani FRBS", 0.751},
        {"HIT2-MTSK", 0.695}}},
  };
  return table;
}

// Reference rows for a dataset name, matched case-insensitively on the
// leading word ("concrete-5-1tra" and "Concrete" both hit "concrete").
inline std::optional<std::vector<ReferenceResult>> references_for(std::string_view name) {
  std::string key = detail::lower(name);
  const auto& table = reference_results();
  if (auto it = table.find(key); it != table.end()) return it->second;
  for (const auto& [k, v] : table)
    if (key.rfind(k, 0) == 0) return v;
  return std::nullopt;
}

inline std::vector<std::string> reference_dataset_names() {
  std::vector<std::string> out;
  for (const auto& kv : reference_results()) out.push_back(kv.first);
  return out;
}

// California case-study explainability figures (rules per prediction at
// thresholds 0.15/0.25/0.5, noise deltas in percent at 1/5/10 %).
struct CaseStudyReference {
  std::vector<double> active_rules{8.38, 6.33, 3.83};
  std::vector<double> noise_percent{1.18, 5.84, 12.24};
  std::size_t rule_count = 75;
  double mean_antecedents = 2.67;
  double range_fraction = 0.96;
};

inline const std::vector<double> kActiveThresholds{0.15, 0.25, 0.5};
inline const std::vector<double> kNoiseLevels{0.01, 0.05, 0.10};

// Mean number of rules whose firing midpoint exceeds each threshold.
inline std::vector<double> active_rules_per_prediction(const Model& model, const DataView& rows,
                                                       std::span<const double> thresholds) {
  std::vector<double> out(thresholds.size(), 0.0);
  if (rows.rows() == 0) return out;
  for (std::size_t p = 0; p < rows.rows(); ++p) {
    const auto x = rows.row(p);
    for (const auto& rule : model.rules) {
      const double m = rule.firing(x, model.tnorm).midpoint();
      for (std::size_t t = 0; t < thresholds.size(); ++t)
        if (m > thresholds[t]) out[t] += 1.0;
    }
  }
  for (double& v : out) v /= static_cast<double>(rows.rows());
  return out;
}

// Per level, mean |prediction change| under Gaussian input noise with
// stddev level * training stddev, as a percentage of the mean target.
inline std::vector<double> noise_robustness(const Model& model, const DataView& rows,
                                            std::span<const double> train_stddev, std::span<const double> levels,
                                            std::uint64_t seed) {
  if (rows.rows() == 0) throw InvalidInput("noise robustness needs at least one row");
  if (rows.targets.empty()) throw InvalidInput("noise robustness needs targets");
  if (train_stddev.size() != rows.num_features) throw InvalidInput("stddev count does not match features");
  const double mean_target =
      std::accumulate(rows.targets.begin(), rows.targets.end(), 0.0) / static_cast<double>(rows.targets.size());
  if (mean_target == 0.0) throw InvalidInput("noise robustness is undefined for a zero mean target");

  std::vector<double> base(rows.rows());
  for (std::size_t p = 0; p < rows.rows(); ++p) base[p] = predict(model, rows.row(p)).value;

  std::vector<double> out;
  std::vector<double> x(rows.num_features);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (!(levels[l] >= 0.0)) throw InvalidInput("noise level must be non-negative");
    if (levels[l] == 0.0) {
      out.push_back(0.0);
      continue;
    }
    std::seed_seq seq{seed, static_cast<std::uint64_t>(l)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double total = 0.0;
    for (std::size_t p = 0; p < rows.rows(); ++p) {
      const auto r = rows.row(p);
      for (std::size_t f = 0; f < x.size(); ++f) x[f] = r[f] + gauss(rng) * levels[l] * train_stddev[f];
      total += std::abs(predict(model, x).value - base[p]);
    }
    out.push_back(100.0 * total / static_cast<double>(rows.rows()) / std::abs(mean_target));
  }
  return out;
}

struct CoverageMetrics {
  double classes_covered = 0.0;
  double dataset_coverage = 0.0;
  double range_fraction = 0.0;
};

inline CoverageMetrics coverage_metrics(const Model& model, const DataView& rows) {
  if (!model.trained()) throw StateError("model is not trained");
  if (rows.rows() == 0) throw InvalidInput("coverage metrics need at least one row");
  CoverageMetrics m;
  std::set<std::size_t> terms;
  for (const auto& r : model.rules) terms.insert(r.consequent_term);
  m.classes_covered = static_cast<double>(terms.size()) / static_cast<double>(model.target_partition->size());

  std::size_t covered = 0;
  double lo = 0.0, hi = 0.0;
  for (std::size_t p = 0; p < rows.rows(); ++p) {
    const auto pred = predict(model, rows.row(p));
    if (!pred.fallback_used) ++covered;
    if (p == 0) lo = hi = pred.value;
    lo = std::min(lo, pred.value);
    hi = std::max(hi, pred.value);
  }
  m.dataset_coverage = static_cast<double>(covered) / static_cast<double>(rows.rows());
  if (!rows.targets.empty()) {
    const auto [tmin, tmax] = std::minmax_element(rows.targets.begin(), rows.targets.end());
    const double span = *tmax - *tmin;
    m.range_fraction = span > 0.0 ? std::clamp((hi - lo) / span, 0.0, 1.0) : 1.0;
  }
  return m;
}

struct Explainability {
  CoverageMetrics coverage;
  std::vector<double> thresholds;
  std::vector<double> active_rules;
  std::size_t rule_count = 0;
  double mean_antecedents = 0.0;
  std::vector<double> noise_levels;
  std::vector<double> noise_deltas;
};

inline Explainability explain_model(const Model& model, const DataView& rows, std::span<const double> train_stddev,
                                    std::uint64_t seed) {
  Explainability e;
  e.coverage = coverage_metrics(model, rows);
  e.thresholds = kActiveThresholds;
  e.active_rules = active_rules_per_prediction(model, rows, e.thresholds);
  e.rule_count = model.rules.size();
  double total = 0.0;
  for (const auto& r : model.rules) total += static_cast<double>(r.antecedent.size());
  e.mean_antecedents = model.rules.empty() ? 0.0 : total / static_cast<double>(model.rules.size());
  e.noise_levels = kNoiseLevels;
  if (!rows.targets.empty()) e.noise_deltas = noise_robustness(model, rows, train_stddev, e.noise_levels, seed);
  return e;
}

struct FoldOutcome {
  std::size_t fold_index = 0;
  std::optional<double> rmse;
  std::string error;  // non-empty when the fold failed
  std::size_t rules = 0;
  std::size_t fallback_count = 0;
  std::size_t test_rows = 0;
};

struct EvalReport {
  std::string dataset;
  std::string variant;
  std::vector<FoldOutcome> folds;
  std::optional<double> mean_rmse;
  bool incomplete = false;  // some fold failed; mean covers completed folds only
  std::vector<ReferenceResult> references;
  double fallback_rate = 0.0;
  std::optional<Explainability> explainability;
};

inline std::string variant_name(unsigned degree) { return "D" + std::to_string(degree); }

inline EvalReport run_cv(const std::vector<FoldSplit>& folds, const PipelineConfig& config,
                         const std::string& dataset_name) {
  if (folds.empty()) throw DataError("cross-validation needs at least one fold");
  EvalReport report;
  report.dataset = dataset_name;
  report.variant = variant_name(config.generation.degree);
  if (auto refs = references_for(dataset_name)) report.references = *refs;
  double sum = 0.0;
  std::size_t done = 0, fallbacks = 0, rows = 0;
  for (const auto& fold : folds) {
    FoldOutcome out;
    out.fold_index = fold.fold_index;
    out.test_rows = fold.test.rows();
    try {
      const auto trained = train_model(fold.train, config);
      const auto batch = predict_batch(trained.model, fold.test.view());
      out.rmse = batch.rmse;
      out.rules = trained.model.rules.size();
      out.fallback_count = batch.fallback_count();
      sum += *out.rmse;
      ++done;
      fallbacks += out.fallback_count;
      rows += out.test_rows;
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      out.error = e.what();
      report.incomplete = true;
    }
    report.folds.push_back(std::move(out));
  }
  if (done > 0) report.mean_rmse = sum / static_cast<double>(done);
  if (rows > 0) report.fallback_rate = static_cast<double>(fallbacks) / static_cast<double>(rows);
  return report;
}

// Same rules with each polynomial replaced by the consequent set's plateau
// midpoint; error dominance is recomputed for the constant outputs.
inline Model to_mamdani(const Model& hybrid, const DataView& train) {
  Model m = hybrid;
  for (auto& rule : m.rules) {
    rule.consequent_fn = Polynomial::constant(rule.consequent_set.plateau_center());
    const auto e = rule_rmse(rule, train, m.tnorm);
    rule.error_dominance = e ? error_dominance(*e) : 1.0;
  }
  return m;
}

struct BaselineComparison {
  double hybrid_rmse = 0.0;
  double mamdani_rmse = 0.0;
  BatchResult hybrid;
  BatchResult mamdani;
  // Rows where exactly one rule fires under the baseline and the distinct
  // prediction values observed on them.
  std::size_t single_rule_rows = 0;
  std::size_t single_rule_distinct = 0;
  std::size_t output_sets = 0;
};

inline BaselineComparison compare_with_mamdani(const Model& hybrid, const DataView& train, const DataView& test) {
  if (test.targets.empty()) throw InvalidInput("baseline comparison needs test targets");
  BaselineComparison c;
  const Model baseline = to_mamdani(hybrid, train);
  c.hybrid = predict_batch(hybrid, test);
  c.mamdani = predict_batch(baseline, test);
  c.hybrid_rmse = *c.hybrid.rmse;
  c.mamdani_rmse = *c.mamdani.rmse;
  c.output_sets = hybrid.target_partition->size();
  std::set<double> values;
  for (const auto& p : c.mamdani.predictions) {
    if (p.fired.size() != 1) continue;
    ++c.single_rule_rows;
    values.insert(p.value);
  }
  c.single_rule_distinct = values.size();
  return c;
}

}  // namespace hit2
