#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hit2mtsk/error.hpp"

namespace hit2 {

using Exponents = std::vector<unsigned>;

namespace detail {

inline void exponents_of_degree(std::size_t var, unsigned remaining, Exponents& current,
                                std::vector<Exponents>& out) {
  if (var + 1 == current.size()) {
    current[var] = remaining;
    out.push_back(current);
    return;
  }
  for (unsigned e = remaining + 1; e-- > 0;) {
    current[var] = e;
    exponents_of_degree(var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

}  // namespace detail

// All exponent vectors over num_vars variables with total degree <= degree, in
// graded lexicographic order: constant first, then by total degree, and within
// a degree by descending exponent of the first variable
// (2 vars, degree 2: 1, x1, x2, x1^2, x1 x2, x2^2).
inline std::vector<Exponents> monomial_exponents(std::size_t num_vars, unsigned degree) {
  std::vector<Exponents> out;
  Exponents current(num_vars, 0);
  out.push_back(current);
  if (num_vars == 0) return out;
  for (unsigned d = 1; d <= degree; ++d) detail::exponents_of_degree(0, d, current, out);
  return out;
}

inline std::size_t monomial_count(std::size_t num_vars, unsigned degree) {
  // C(num_vars + degree, degree)
  std::size_t result = 1;
  for (unsigned i = 1; i <= degree; ++i) result = result * (num_vars + i) / i;
  return result;
}

inline double monomial_value(const Exponents& exps, std::span<const double> values) {
  double v = 1.0;
  for (std::size_t i = 0; i < exps.size(); ++i)
    for (unsigned p = 0; p < exps[i]; ++p) v *= values[i];
  return v;
}

// Monomial vector of the selected variables of x, in monomial_exponents order.
inline std::vector<double> expand_features(std::span<const double> x, std::span<const std::size_t> variables,
                                           unsigned degree) {
  if (degree < 1 || degree > 3) throw InvalidInput("expand_features: degree must be 1, 2 or 3");
  std::vector<double> picked;
  picked.reserve(variables.size());
  for (std::size_t v : variables) {
    if (v >= x.size()) throw InvalidInput("expand_features: variable missing from input vector");
    picked.push_back(x[v]);
  }
  const auto exps = monomial_exponents(variables.size(), degree);
  std::vector<double> out;
  out.reserve(exps.size());
  for (const auto& e : exps) out.push_back(monomial_value(e, picked));
  return out;
}

struct RawTerm {
  Exponents exponents;
  double coefficient = 0.0;
};

// Polynomial over a subset of input features. Coefficients multiply monomials
// of the standardized variables z_i = (x_i - center_i) / scale_i; a polynomial
// with zero centers and unit scales is directly in raw units.
class Polynomial {
 public:
  Polynomial() = default;

  Polynomial(std::vector<std::size_t> variables, unsigned degree, std::vector<double> coefficients,
             std::vector<double> center = {}, std::vector<double> scale = {})
      : variables_(std::move(variables)),
        degree_(degree),
        center_(std::move(center)),
        scale_(std::move(scale)),
        coefficients_(std::move(coefficients)) {
    if (center_.empty()) center_.assign(variables_.size(), 0.0);
    if (scale_.empty()) scale_.assign(variables_.size(), 1.0);
    exponents_ = monomial_exponents(variables_.size(), degree_);
    if (coefficients_.size() != exponents_.size())
      throw InvalidInput("polynomial: expected " + std::to_string(exponents_.size()) + " coefficients, got " +
                         std::to_string(coefficients_.size()));
    if (center_.size() != variables_.size() || scale_.size() != variables_.size())
      throw InvalidInput("polynomial: standardization size mismatch");
    for (double s : scale_)
      if (!(s > 0.0) || !std::isfinite(s)) throw InvalidInput("polynomial: scales must be positive");
  }

  static Polynomial constant(double value) { return Polynomial({}, 0, {value}); }

  const std::vector<std::size_t>& variables() const noexcept { return variables_; }
  unsigned degree() const noexcept { return degree_; }
  const std::vector<double>& center() const noexcept { return center_; }
  const std::vector<double>& scale() const noexcept { return scale_; }
  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  const std::vector<Exponents>& exponents() const noexcept { return exponents_; }

  double operator()(std::span<const double> x) const {
    double z[16];
    std::vector<double> zbig;
    double* zp = z;
    if (variables_.size() > 16) {
      zbig.resize(variables_.size());
      zp = zbig.data();
    }
    for (std::size_t i = 0; i < variables_.size(); ++i) zp[i] = (x[variables_[i]] - center_[i]) / scale_[i];
    const std::span<const double> zs(zp, variables_.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < exponents_.size(); ++j) sum += coefficients_[j] * monomial_value(exponents_[j], zs);
    return sum;
  }

  // Coefficients re-expressed over raw-unit monomials (same exponent order).
  std::vector<RawTerm> raw_terms() const {
    // Expand each standardized monomial prod_i ((x_i - c_i)/s_i)^{e_i} binomially.
    std::map<Exponents, double> acc;
    const std::size_t nv = variables_.size();
    for (std::size_t j = 0; j < exponents_.size(); ++j) {
      std::map<Exponents, double> term{{Exponents(nv, 0), coefficients_[j]}};
      for (std::size_t i = 0; i < nv; ++i) {
        const unsigned e = exponents_[j][i];
        if (e == 0) continue;
        std::map<Exponents, double> next;
        for (const auto& [exps, coef] : term) {
          double binom = 1.0;
          for (unsigned k = 0; k <= e; ++k) {
            // binom(e,k) * x^k * (-c)^(e-k) / s^e
            Exponents ne = exps;
            ne[i] += k;
            next[ne] += coef * binom * std::pow(-center_[i], static_cast<double>(e - k)) /
                        std::pow(scale_[i], static_cast<double>(e));
            binom = binom * static_cast<double>(e - k) / static_cast<double>(k + 1);
          }
        }
        term = std::move(next);
      }
      for (const auto& [exps, coef] : term) acc[exps] += coef;
    }
    std::vector<RawTerm> out;
    out.reserve(exponents_.size());
    for (const auto& e : exponents_) out.push_back({e, acc[e]});
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.variables_ == b.variables_ && a.degree_ == b.degree_ && a.center_ == b.center_ &&
           a.scale_ == b.scale_ && a.coefficients_ == b.coefficients_;
  }

 private:
  std::vector<std::size_t> variables_;
  unsigned degree_ = 0;
  std::vector<double> center_;
  std::vector<double> scale_;
  std::vector<double> coefficients_{0.0};
  std::vector<Exponents> exponents_{Exponents{}};
};

}  // namespace hit2
