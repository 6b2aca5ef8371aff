#pragma once

// Rule weights: fuzzy dominance from support and confidence intervals, and
// error-based dominance 1 / (1 + RMSE).

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "hit2mtsk/error.hpp"
#include "hit2mtsk/it2_fuzzy.hpp"
#include "hit2mtsk/rule.hpp"

namespace hit2 {

struct FuzzyDominance {
  MembershipInterval support;
  MembershipInterval confidence;
  MembershipInterval dominance;
};

namespace detail {

struct DominanceSums {
  double joint_lo = 0.0;  // sum over rows of firing * consequent membership
  double joint_hi = 0.0;
  double antecedent_lo = 0.0;  // sum over rows of firing
  double antecedent_hi = 0.0;
  std::size_t n = 0;
};

inline DominanceSums dominance_sums(std::span<const MembershipInterval> firing,
                                    std::span<const MembershipInterval> consequent) {
  DominanceSums s;
  s.n = firing.size();
  for (std::size_t p = 0; p < firing.size(); ++p) {
    s.joint_lo += firing[p].lower * consequent[p].lower;
    s.joint_hi += firing[p].upper * consequent[p].upper;
    s.antecedent_lo += firing[p].lower;
    s.antecedent_hi += firing[p].upper;
  }
  return s;
}

inline MembershipInterval ordered(double a, double b) { return {std::min(a, b), std::max(a, b)}; }

}  // namespace detail

// Per-row firing intervals of the rule's antecedent and memberships of the
// target in its consequent set.
struct RuleMemberships {
  std::vector<MembershipInterval> firing;
  std::vector<MembershipInterval> consequent;
};

inline RuleMemberships rule_memberships(const HybridRule& rule, const DataView& data, TNorm tnorm) {
  RuleMemberships m;
  m.firing.reserve(data.rows());
  m.consequent.reserve(data.rows());
  for (std::size_t p = 0; p < data.rows(); ++p) {
    m.firing.push_back(rule.firing(data.row(p), tnorm));
    m.consequent.push_back(rule.consequent_set.membership(data.targets[p]));
  }
  return m;
}

// (1/N) sum_p f(x_p) * mu_C(y_p), bound by bound.
inline MembershipInterval rule_support(std::span<const MembershipInterval> firing,
                                       std::span<const MembershipInterval> consequent) {
  if (firing.empty()) throw InvalidInput("rule support over an empty dataset");
  const auto s = detail::dominance_sums(firing, consequent);
  const double n = static_cast<double>(s.n);
  return {s.joint_lo / n, s.joint_hi / n};
}

inline MembershipInterval rule_support(const HybridRule& rule, const DataView& data, TNorm tnorm = TNorm::minimum) {
  const auto m = rule_memberships(rule, data, tnorm);
  return rule_support(m.firing, m.consequent);
}

namespace detail {

inline std::pair<double, double> raw_confidence(const DominanceSums& s) {
  if (s.antecedent_lo <= 0.0 && s.antecedent_hi <= 0.0)
    throw TrainingError("rule antecedent has zero support on the dataset");
  const double lo = s.antecedent_lo > 0.0 ? std::clamp(s.joint_lo / s.antecedent_lo, 0.0, 1.0) : 0.0;
  const double hi = s.antecedent_hi > 0.0 ? std::clamp(s.joint_hi / s.antecedent_hi, 0.0, 1.0) : 0.0;
  return {lo, hi};
}

}  // namespace detail

// sum f * mu_C / sum f per bound. The two bounds use different weights, so
// the raw lower value may exceed the upper one; the interval is reported sorted.
inline MembershipInterval rule_confidence(std::span<const MembershipInterval> firing,
                                          std::span<const MembershipInterval> consequent) {
  const auto [lo, hi] = detail::raw_confidence(detail::dominance_sums(firing, consequent));
  return detail::ordered(lo, hi);
}

inline MembershipInterval rule_confidence(const HybridRule& rule, const DataView& data, TNorm tnorm = TNorm::minimum) {
  const auto m = rule_memberships(rule, data, tnorm);
  return rule_confidence(m.firing, m.consequent);
}

// D = [S_lo * C_lo, S_hi * C_hi], endpoints sorted.
inline FuzzyDominance fuzzy_dominance(std::span<const MembershipInterval> firing,
                                      std::span<const MembershipInterval> consequent) {
  if (firing.empty()) throw InvalidInput("rule dominance over an empty dataset");
  const auto s = detail::dominance_sums(firing, consequent);
  const double n = static_cast<double>(s.n);
  FuzzyDominance out;
  out.support = {s.joint_lo / n, s.joint_hi / n};
  if (s.antecedent_lo <= 0.0 && s.antecedent_hi <= 0.0) return out;  // fires nowhere: all zero
  const auto [c_lo, c_hi] = detail::raw_confidence(s);
  out.confidence = detail::ordered(c_lo, c_hi);
  out.dominance = detail::ordered(out.support.lower * c_lo, out.support.upper * c_hi);
  return out;
}

inline FuzzyDominance fuzzy_dominance(const HybridRule& rule, const DataView& data, TNorm tnorm = TNorm::minimum) {
  const auto m = rule_memberships(rule, data, tnorm);
  return fuzzy_dominance(m.firing, m.consequent);
}

inline double error_dominance(double rmse) {
  if (!(rmse >= 0.0) || std::isinf(rmse)) throw InvalidInput("error dominance needs a finite, non-negative RMSE");
  return 1.0 / (1.0 + rmse);
}

// RMSE of the clamped rule output over rows where the rule's upper firing
// strength is positive; nullopt when no row fires.
inline std::optional<double> rule_rmse(const HybridRule& rule, const DataView& data, TNorm tnorm = TNorm::minimum) {
  double sse = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < data.rows(); ++p) {
    const auto x = data.row(p);
    if (rule.firing(x, tnorm).upper <= 0.0) continue;
    const double e = evaluate_rule(rule, x) - data.targets[p];
    sse += e * e;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::sqrt(sse / static_cast<double>(n));
}

}  // namespace hit2
