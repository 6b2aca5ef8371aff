#pragma once

// Hybrid Mamdani-TSK rules: a linguistic consequent set plus a polynomial whose
// output is clamped to the support of that set.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "hit2mtsk/error.hpp"
#include "hit2mtsk/it2_fuzzy.hpp"
#include "hit2mtsk/polynomial.hpp"

namespace hit2 {

struct HybridRule {
  std::vector<Clause> antecedent;
  std::size_t consequent_term = 0;
  IT2Set consequent_set;
  Polynomial consequent_fn;
  double clamp_lo = 0.0;
  double clamp_hi = 0.0;
  MembershipInterval fuzzy_dominance{0.0, 0.0};
  double error_dominance = 1.0;

  HybridRule(std::vector<Clause> clauses, std::size_t term, IT2Set set)
      : antecedent(std::move(clauses)), consequent_term(term), consequent_set(std::move(set)) {
    std::tie(clamp_lo, clamp_hi) = consequent_set.support();
  }

  std::vector<std::size_t> variables() const {
    std::vector<std::size_t> vars;
    vars.reserve(antecedent.size());
    for (const auto& c : antecedent) vars.push_back(c.feature);
    return vars;
  }

  MembershipInterval firing(std::span<const double> x, TNorm tnorm) const {
    return firing_strength(antecedent, x, tnorm);
  }

  friend bool operator==(const HybridRule&, const HybridRule&) = default;
};

inline double clamp_output(double value, double lo, double hi) noexcept { return std::clamp(value, lo, hi); }

inline double evaluate_rule(const HybridRule& rule, std::span<const double> x) {
  return clamp_output(rule.consequent_fn(x), rule.clamp_lo, rule.clamp_hi);
}

struct FitOptions {
  unsigned degree = 2;
  double ridge = 1e-6;
  // Weight rows by their firing-strength midpoint.
  bool weighted = false;
};

// Row-major feature matrix view with its target column.
struct DataView {
  std::span<const double> values;
  std::size_t num_features = 0;
  std::span<const double> targets;

  std::size_t rows() const noexcept { return num_features > 0 ? values.size() / num_features : targets.size(); }
  std::span<const double> row(std::size_t i) const { return values.subspan(i * num_features, num_features); }
};

namespace detail {

inline double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  double sw = 0.0;
  double swy = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sw += weights[i];
    swy += weights[i] * values[i];
  }
  if (sw > 0.0) return swy / sw;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace detail

// Least-squares polynomial over `variables`, trained on the given rows only.
// Features are standardized with the rows' own statistics and the ridge
// penalty applies to every non-constant coefficient. When there are fewer rows
// than monomials the degree drops to 1, then to a weighted constant.
inline Polynomial fit_consequent(const DataView& data, std::span<const std::size_t> rows,
                                 std::span<const double> firing_midpoints, std::span<const std::size_t> variables,
                                 const FitOptions& options) {
  if (rows.empty()) throw TrainingError("rule is unfittable: no training rows fire it");
  if (options.ridge < 0.0) throw ConfigError("ridge must be non-negative");

  std::vector<double> y(rows.size());
  std::vector<double> w(rows.size(), 1.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y[i] = data.targets[rows[i]];
    if (!firing_midpoints.empty()) w[i] = firing_midpoints[i];
  }

  const std::size_t nv = variables.size();
  unsigned degree = options.degree;
  if (rows.size() < monomial_count(nv, degree)) degree = 1;
  const bool constant_targets = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
  if (nv == 0 || constant_targets || rows.size() < monomial_count(nv, degree)) {
    const double c = detail::weighted_mean(y, w);
    std::vector<double> coeffs(monomial_count(nv, 0), 0.0);
    coeffs[0] = c;
    return Polynomial(std::vector<std::size_t>(variables.begin(), variables.end()), 0, coeffs);
  }

  std::vector<double> center(nv, 0.0);
  std::vector<double> scale(nv, 1.0);
  for (std::size_t v = 0; v < nv; ++v) {
    double mean = 0.0;
    for (std::size_t r : rows) mean += data.row(r)[variables[v]];
    mean /= static_cast<double>(rows.size());
    double var = 0.0;
    for (std::size_t r : rows) {
      const double d = data.row(r)[variables[v]] - mean;
      var += d * d;
    }
    var /= static_cast<double>(rows.size());
    center[v] = mean;
    if (var > 0.0) scale[v] = std::sqrt(var);
  }

  const auto exps = monomial_exponents(nv, degree);
  const std::size_t m = exps.size();
  const std::size_t penalized = options.ridge > 0.0 ? m - 1 : 0;
  Eigen::MatrixXd design(rows.size() + penalized, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size() + penalized));
  std::vector<double> z(nv);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto x = data.row(rows[i]);
    for (std::size_t v = 0; v < nv; ++v) z[v] = (x[variables[v]] - center[v]) / scale[v];
    const double sw = options.weighted ? std::sqrt(w[i]) : 1.0;
    for (std::size_t j = 0; j < m; ++j)
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sw * monomial_value(exps[j], z);
    rhs(static_cast<Eigen::Index>(i)) = sw * y[i];
  }
  if (penalized > 0) {
    const double s = std::sqrt(options.ridge);
    design.bottomRows(static_cast<Eigen::Index>(penalized)).setZero();
    for (std::size_t j = 1; j < m; ++j)
      design(static_cast<Eigen::Index>(rows.size() + j - 1), static_cast<Eigen::Index>(j)) = s;
  }
  const Eigen::VectorXd sol = design.colPivHouseholderQr().solve(rhs);
  std::vector<double> coeffs(sol.data(), sol.data() + sol.size());
  for (double c : coeffs)
    if (!std::isfinite(c)) throw TrainingError("rule fit produced non-finite coefficients");
  return Polynomial(std::vector<std::size_t>(variables.begin(), variables.end()), degree, std::move(coeffs),
                    std::move(center), std::move(scale));
}

// "IF x1 is F1 AND ... THEN y is G" -- independent of the polynomial.
inline std::string linguistic(const HybridRule& rule, std::span<const std::string> feature_names,
                              const std::string& target_name) {
  std::string out = "IF ";
  for (std::size_t i = 0; i < rule.antecedent.size(); ++i) {
    if (i > 0) out += " AND ";
    const auto& c = rule.antecedent[i];
    out += (c.feature < feature_names.size() ? feature_names[c.feature] : "x" + std::to_string(c.feature)) + " is " +
           c.set.name();
  }
  out += " THEN " + target_name + " is " + rule.consequent_set.name();
  return out;
}

inline std::string format_number(double v, const char* fmt = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

// Raw-unit rendering: "y = 0.3*cement - 0.6*slag - 0.000529*cement^2 + ...".
inline std::string render_polynomial(const Polynomial& poly, std::span<const std::string> feature_names) {
  std::string out = "y =";
  bool first = true;
  for (const auto& term : poly.raw_terms()) {
    if (term.coefficient == 0.0) continue;
    std::string mono;
    for (std::size_t i = 0; i < term.exponents.size(); ++i) {
      if (term.exponents[i] == 0) continue;
      const std::size_t f = poly.variables()[i];
      if (!mono.empty()) mono += "*";
      mono += f < feature_names.size() ? feature_names[f] : "x" + std::to_string(f);
      if (term.exponents[i] > 1) mono += "^" + std::to_string(term.exponents[i]);
    }
    const double mag = std::fabs(term.coefficient);
    out += first ? (term.coefficient < 0 ? " -" : " ") : (term.coefficient < 0 ? " - " : " + ");
    out += mono.empty() ? format_number(mag) : format_number(mag) + "*" + mono;
    first = false;
  }
  if (first) out += " 0";
  return out;
}

}  // namespace hit2
