#pragma once

// Interval type-2 fuzzy sets with trapezoidal / shoulder membership functions,
// data-driven partitions and firing-strength interval arithmetic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hit2mtsk/error.hpp"

namespace hit2 {

struct MembershipInterval {
  double lower = 0.0;
  double upper = 0.0;

  double midpoint() const noexcept { return 0.5 * (lower + upper); }
  bool is_zero() const noexcept { return upper <= 0.0; }

  friend bool operator==(const MembershipInterval&, const MembershipInterval&) = default;
};

enum class SetShape { left_shoulder, trapezoid, right_shoulder };

inline std::string_view to_string(SetShape shape) {
  switch (shape) {
    case SetShape::left_shoulder: return "left_shoulder";
    case SetShape::trapezoid: return "trapezoid";
    case SetShape::right_shoulder: return "right_shoulder";
  }
  return "trapezoid";
}

inline SetShape parse_shape(std::string_view text) {
  if (text == "left_shoulder") return SetShape::left_shoulder;
  if (text == "trapezoid") return SetShape::trapezoid;
  if (text == "right_shoulder") return SetShape::right_shoulder;
  throw InvalidInput("unknown set shape '" + std::string(text) + "'");
}

// Breakpoints a <= b <= c <= d of a trapezoid in variable units.
struct Trapezoid {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  bool ordered() const noexcept { return a <= b && b <= c && c <= d; }

  friend bool operator==(const Trapezoid&, const Trapezoid&) = default;
};

namespace detail {

// Degree of a unit-height trapezoid of the given shape. Shoulders keep full
// membership on their open side, however far x lies outside the breakpoints.
inline double trapezoid_degree(SetShape shape, const Trapezoid& t, double x) noexcept {
  const bool open_left = shape == SetShape::left_shoulder;
  const bool open_right = shape == SetShape::right_shoulder;
  if ((open_left || x >= t.b) && (open_right || x <= t.c)) return 1.0;
  if (x < t.b) {
    if (x <= t.a) return 0.0;
    return (x - t.a) / (t.b - t.a);
  }
  if (x >= t.d) return 0.0;
  return (t.d - x) / (t.d - t.c);
}

}  // namespace detail

class IT2Set {
 public:
  IT2Set(std::string name, SetShape shape, Trapezoid upper, Trapezoid lower, double fou_scale)
      : name_(std::move(name)), shape_(shape), upper_(upper), lower_(lower), fou_scale_(fou_scale) {
    validate();
  }

  const std::string& name() const noexcept { return name_; }
  SetShape shape() const noexcept { return shape_; }
  const Trapezoid& upper_params() const noexcept { return upper_; }
  const Trapezoid& lower_params() const noexcept { return lower_; }
  double fou_scale() const noexcept { return fou_scale_; }

  MembershipInterval membership(double x) const {
    if (!std::isfinite(x)) throw InvalidInput("membership: non-finite input");
    const double up = detail::trapezoid_degree(shape_, upper_, x);
    const double lo = fou_scale_ * detail::trapezoid_degree(shape_, lower_, x);
    return {std::min(lo, up), up};
  }

  // Endpoints of the region where the upper membership is nonzero. These are
  // the clamp bounds of any rule whose consequent is this set.
  std::pair<double, double> support() const noexcept { return {upper_.a, upper_.d}; }

  // Midpoint of the upper plateau [b, c].
  double plateau_center() const noexcept { return 0.5 * (upper_.b + upper_.c); }

  friend bool operator==(const IT2Set&, const IT2Set&) = default;

 private:
  void validate() const {
    auto bad = [](double v) { return std::isnan(v); };
    for (const Trapezoid* t : {&upper_, &lower_}) {
      if (bad(t->a) || bad(t->b) || bad(t->c) || bad(t->d))
        throw InvalidInput("fuzzy set '" + name_ + "': NaN breakpoint");
      if (!t->ordered()) throw InvalidInput("fuzzy set '" + name_ + "': breakpoints must satisfy a <= b <= c <= d");
    }
    if (!(fou_scale_ > 0.0 && fou_scale_ <= 1.0))
      throw InvalidInput("fuzzy set '" + name_ + "': fou_scale must lie in (0, 1]");
    // Lower trapezoid nested inside the upper one; sufficient for lower <= upper pointwise.
    const bool left_ok = shape_ == SetShape::left_shoulder || (lower_.a >= upper_.a && lower_.b >= upper_.b);
    const bool right_ok = shape_ == SetShape::right_shoulder || (lower_.d <= upper_.d && lower_.c <= upper_.c);
    if (!left_ok || !right_ok) throw InvalidInput("fuzzy set '" + name_ + "': lower function must nest inside the upper");
  }

  std::string name_;
  SetShape shape_;
  Trapezoid upper_;
  Trapezoid lower_;
  double fou_scale_;
};

struct Partition {
  std::string variable;
  std::vector<IT2Set> sets;
  double domain_min = 0.0;
  double domain_max = 0.0;

  std::size_t size() const noexcept { return sets.size(); }

  // Index of the set with the largest upper membership; ties go to the leftmost set.
  std::size_t best_set(double x) const {
    std::size_t best = 0;
    double best_degree = -1.0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const double deg = sets[i].membership(x).upper;
      if (deg > best_degree) {
        best_degree = deg;
        best = i;
      }
    }
    return best;
  }

  friend bool operator==(const Partition&, const Partition&) = default;
};

inline std::vector<std::string> default_term_names(std::size_t num_sets) {
  switch (num_sets) {
    case 2: return {"Low", "High"};
    case 3: return {"Low", "Medium", "High"};
    case 4: return {"Low", "MediumLow", "MediumHigh", "High"};
    case 5: return {"VeryLow", "Low", "Medium", "High", "VeryHigh"};
    default: break;
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < num_sets; ++i) names.push_back("S" + std::to_string(i + 1));
  return names;
}

// Linear-interpolation quantile of sorted data (the "type 7" estimator).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidInput("quantile of empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct PartitionOptions {
  std::size_t num_sets = 3;
  double fou_width = 0.15;
  double fou_scale = 0.9;
};

// Builds num_sets IT2 sets from the sample distribution. Breakpoints sit on a
// grid of 3k-2 equal-probability quantile intervals: each set owns one interval
// as its plateau and neighbouring sets cross over two intervals. The lower
// function is the upper one inset by fou_width of the support on each side
// (never past the plateau) and scaled to fou_scale.
inline Partition build_partition(std::string variable, std::span<const double> values,
                                 const PartitionOptions& options = {}) {
  const std::size_t k = options.num_sets;
  if (values.empty()) throw InvalidInput("build_partition: no samples for '" + variable + "'");
  if (k < 2) throw InvalidInput("build_partition: num_sets must be >= 2");
  if (!(options.fou_width >= 0.0 && options.fou_width < 0.5))
    throw InvalidInput("build_partition: fou_width must lie in [0, 0.5)");
  if (!(options.fou_scale > 0.0 && options.fou_scale <= 1.0))
    throw InvalidInput("build_partition: fou_scale must lie in (0, 1]");

  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted)
    if (!std::isfinite(v)) throw InvalidInput("build_partition: non-finite sample in '" + variable + "'");
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw DataError("degenerate partition: '" + variable + "' is constant");

  const std::size_t intervals = 3 * k - 2;
  std::vector<double> q(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j)
    q[j] = quantile_sorted(sorted, static_cast<double>(j) / static_cast<double>(intervals));
  q.front() = sorted.front();
  q.back() = sorted.back();

  const auto names = default_term_names(k);
  Partition part{std::move(variable), {}, sorted.front(), sorted.back()};
  part.sets.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const SetShape shape = i == 0 ? SetShape::left_shoulder : i + 1 == k ? SetShape::right_shoulder : SetShape::trapezoid;
    Trapezoid up;
    up.b = q[3 * i];
    up.c = q[3 * i + 1];
    up.a = i == 0 ? up.b : q[3 * i - 2];
    up.d = i + 1 == k ? up.c : q[3 * i + 3];

    const double inset = options.fou_width * (up.d - up.a);
    Trapezoid lo = up;
    lo.a = up.a + std::min(inset, up.b - up.a);
    lo.d = up.d - std::min(inset, up.d - up.c);
    part.sets.emplace_back(names[i], shape, up, lo, options.fou_scale);
  }
  return part;
}

enum class TNorm { minimum, product };

inline std::string_view to_string(TNorm t) { return t == TNorm::minimum ? "minimum" : "product"; }

inline TNorm parse_tnorm(std::string_view text) {
  if (text == "minimum" || text == "min") return TNorm::minimum;
  if (text == "product" || text == "prod") return TNorm::product;
  throw ConfigError("unknown t-norm '" + std::string(text) + "'");
}

// Component-wise t-norm over clause membership intervals.
inline MembershipInterval combine(std::span<const MembershipInterval> clauses, TNorm tnorm) {
  if (clauses.empty()) throw InvalidInput("firing strength of an empty antecedent");
  MembershipInterval acc{1.0, 1.0};
  for (const auto& m : clauses) {
    if (tnorm == TNorm::minimum) {
      acc.lower = std::min(acc.lower, m.lower);
      acc.upper = std::min(acc.upper, m.upper);
    } else {
      acc.lower *= m.lower;
      acc.upper *= m.upper;
    }
  }
  return acc;
}

// One "x_feature is term" premise. The set is copied so rules evaluate
// without a reference back to their partitions.
struct Clause {
  std::size_t feature = 0;
  std::size_t term = 0;
  IT2Set set;

  friend bool operator==(const Clause&, const Clause&) = default;
};

inline MembershipInterval firing_strength(std::span<const Clause> antecedent, std::span<const double> x,
                                          TNorm tnorm = TNorm::minimum) {
  if (antecedent.empty()) throw InvalidInput("firing strength of an empty antecedent");
  MembershipInterval acc{1.0, 1.0};
  for (const auto& clause : antecedent) {
    if (clause.feature >= x.size()) throw InvalidInput("antecedent variable missing from input vector");
    const auto m = clause.set.membership(x[clause.feature]);
    if (tnorm == TNorm::minimum) {
      acc.lower = std::min(acc.lower, m.lower);
      acc.upper = std::min(acc.upper, m.upper);
    } else {
      acc.lower *= m.lower;
      acc.upper *= m.upper;
    }
  }
  return acc;
}

}  // namespace hit2
