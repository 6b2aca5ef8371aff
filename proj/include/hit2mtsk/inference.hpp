#pragma once

// Weighted-mean inference over a selected rule base.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hit2mtsk/error.hpp"
#include "hit2mtsk/it2_fuzzy.hpp"
#include "hit2mtsk/rule.hpp"

namespace hit2 {

// Interval-to-scalar reduction of the firing strength used as inference weight.
enum class WeightReduction { midpoint, lower, upper };

inline std::string_view to_string(WeightReduction w) {
  switch (w) {
    case WeightReduction::midpoint: return "midpoint";
    case WeightReduction::lower: return "lower";
    case WeightReduction::upper: return "upper";
  }
  return "midpoint";
}

inline WeightReduction parse_weight_reduction(std::string_view text) {
  if (text == "midpoint") return WeightReduction::midpoint;
  if (text == "lower") return WeightReduction::lower;
  if (text == "upper") return WeightReduction::upper;
  throw ConfigError("unknown firing reduction '" + std::string(text) + "'");
}

inline double reduce(const MembershipInterval& f, WeightReduction how) noexcept {
  switch (how) {
    case WeightReduction::lower: return f.lower;
    case WeightReduction::upper: return f.upper;
    case WeightReduction::midpoint: break;
  }
  return f.midpoint();
}

struct Model {
  std::vector<std::string> feature_names;
  std::string target_name;
  // One entry per feature; empty for features excluded from antecedents (constant columns).
  std::vector<std::optional<Partition>> feature_partitions;
  std::optional<Partition> target_partition;
  std::vector<HybridRule> rules;
  // Prediction when no rule fires: the training-target mean.
  double fallback_value = 0.0;
  // Training standard deviation per feature, the scale for noise-robustness probes.
  std::vector<double> feature_stddev;
  TNorm tnorm = TNorm::minimum;
  WeightReduction reduction = WeightReduction::midpoint;

  bool trained() const noexcept { return !rules.empty() && target_partition.has_value(); }
};

struct FiredRule {
  std::size_t rule = 0;
  MembershipInterval firing;
  double output = 0.0;
  double weight = 0.0;
};

struct Prediction {
  double value = 0.0;
  std::vector<FiredRule> fired;
  bool fallback_used = false;
};

// y = sum w_i y_i / sum w_i with w_i = reduce(firing_i) * error_dominance_i.
inline Prediction predict(const Model& model, std::span<const double> x) {
  if (!model.trained()) throw StateError("model is not trained");
  if (x.size() != model.feature_names.size())
    throw InvalidInput("input has " + std::to_string(x.size()) + " features, model expects " +
                       std::to_string(model.feature_names.size()));
  Prediction out;
  double sw = 0.0;
  double swy = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < model.rules.size(); ++i) {
    const auto& rule = model.rules[i];
    const auto f = rule.firing(x, model.tnorm);
    if (f.upper <= 0.0) continue;
    const double y = evaluate_rule(rule, x);
    const double w = reduce(f, model.reduction) * rule.error_dominance;
    out.fired.push_back({i, f, y, w});
    if (w <= 0.0) continue;
    if (sw == 0.0) lo = hi = y;
    lo = std::min(lo, y);
    hi = std::max(hi, y);
    sw += w;
    swy += w * y;
  }
  if (sw > 0.0) {
    // Rounding can push the quotient an ulp outside the convex hull.
    out.value = std::clamp(swy / sw, lo, hi);
  } else {
    out.value = model.fallback_value;
    out.fallback_used = true;
  }
  return out;
}

inline double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw InvalidInput("rmse: length mismatch");
  if (predicted.empty()) throw InvalidInput("rmse of an empty sample");
  double sse = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = predicted[i] - actual[i];
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(predicted.size()));
}

struct BatchResult {
  std::vector<Prediction> predictions;
  std::optional<double> rmse;

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(predictions.size());
    for (const auto& p : predictions) v.push_back(p.value);
    return v;
  }
  std::size_t fallback_count() const {
    return static_cast<std::size_t>(
        std::count_if(predictions.begin(), predictions.end(), [](const Prediction& p) { return p.fallback_used; }));
  }
};

// Predicts every row; RMSE is filled when targets are supplied.
inline BatchResult predict_batch(const Model& model, const DataView& rows) {
  if (rows.num_features != model.feature_names.size())
    throw InvalidInput("data has " + std::to_string(rows.num_features) + " features, model expects " +
                       std::to_string(model.feature_names.size()));
  BatchResult out;
  out.predictions.reserve(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) out.predictions.push_back(predict(model, rows.row(i)));
  if (!rows.targets.empty()) out.rmse = rmse(out.values(), rows.targets);
  return out;
}

}  // namespace hit2
