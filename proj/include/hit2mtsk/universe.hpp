#pragma once

// Candidate rule pool. Every training instance seeds a rule from its
// best-matching term per feature (Wang-Mendel style); seeds are generalized by
// dropping clauses down to the maximum antecedent length, deduplicated, scored
// by fuzzy dominance, capped, fitted and weighted by error dominance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hit2mtsk/dataset.hpp"
#include "hit2mtsk/dominance.hpp"
#include "hit2mtsk/error.hpp"
#include "hit2mtsk/it2_fuzzy.hpp"
#include "hit2mtsk/parallel.hpp"
#include "hit2mtsk/polynomial.hpp"
#include "hit2mtsk/rule.hpp"

namespace hit2 {

struct PartitionSet {
  std::vector<std::optional<Partition>> features;
  Partition target;
};

// Constant features get no partition and never appear in antecedents; a
// constant target is a data error.
inline PartitionSet build_partitions(const Dataset& data, const PartitionOptions& options = {}) {
  data.validate();
  PartitionSet out;
  out.features.reserve(data.num_features());
  for (std::size_t f = 0; f < data.num_features(); ++f) {
    const auto col = data.column(f);
    try {
      out.features.emplace_back(build_partition(data.feature_names[f], col, options));
    } catch (const DataError&) {
      out.features.emplace_back(std::nullopt);
    }
  }
  out.target = build_partition(data.target_name, data.targets, options);
  if (std::none_of(out.features.begin(), out.features.end(), [](const auto& p) { return p.has_value(); }))
    throw DataError("every feature of '" + data.name + "' is constant");
  return out;
}

struct GenerationConfig {
  std::size_t max_antecedent = 3;
  std::size_t max_candidates = 2000;
  double dominance_threshold = 0.01;
  unsigned degree = 3;
  TNorm tnorm = TNorm::minimum;
  FitOptions fit{};
  // Minimum firing rows per rule; 0 means the monomial count of the rule's fit.
  std::size_t min_rows = 0;
  // Fraction of training rows that must be fired by some rule.
  double min_coverage = 0.99;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct RuleUniverse {
  std::vector<HybridRule> rules;
  PartitionSet partitions;
  GenerationConfig config;
  std::size_t distinct_candidates = 0;  // before threshold and cap
  double coverage = 0.0;                // fraction of training rows fired by some rule
};

namespace detail {

using AntecedentKey = std::vector<std::pair<std::size_t, std::size_t>>;  // (feature, term), ascending feature

struct MembershipTable {
  std::size_t rows = 0;
  std::size_t features = 0;
  std::size_t max_terms = 0;
  std::vector<MembershipInterval> cells;  // [row][feature][term]

  const MembershipInterval& at(std::size_t r, std::size_t f, std::size_t t) const {
    return cells[(r * features + f) * max_terms + t];
  }
};

inline MembershipTable membership_table(const Dataset& data, const PartitionSet& parts) {
  MembershipTable tab;
  tab.rows = data.rows();
  tab.features = data.num_features();
  for (const auto& p : parts.features)
    if (p) tab.max_terms = std::max(tab.max_terms, p->size());
  tab.cells.assign(tab.rows * tab.features * tab.max_terms, MembershipInterval{});
  for (std::size_t r = 0; r < tab.rows; ++r) {
    const auto x = data.row(r);
    for (std::size_t f = 0; f < tab.features; ++f) {
      if (!parts.features[f]) continue;
      const auto& sets = parts.features[f]->sets;
      for (std::size_t t = 0; t < sets.size(); ++t)
        tab.cells[(r * tab.features + f) * tab.max_terms + t] = sets[t].membership(x[f]);
    }
  }
  return tab;
}

inline std::vector<MembershipInterval> antecedent_firing(const MembershipTable& tab, const AntecedentKey& key,
                                                         TNorm tnorm) {
  std::vector<MembershipInterval> out(tab.rows);
  for (std::size_t r = 0; r < tab.rows; ++r) {
    MembershipInterval acc{1.0, 1.0};
    for (const auto& [f, t] : key) {
      const auto& m = tab.at(r, f, t);
      if (tnorm == TNorm::minimum) {
        acc.lower = std::min(acc.lower, m.lower);
        acc.upper = std::min(acc.upper, m.upper);
      } else {
        acc.lower *= m.lower;
        acc.upper *= m.upper;
      }
    }
    out[r] = acc;
  }
  return out;
}

// All non-empty sub-antecedents of `seed` with at most max_len clauses.
inline void sub_antecedents(const AntecedentKey& seed, std::size_t max_len, std::vector<AntecedentKey>& out) {
  const std::size_t n = seed.size();
  AntecedentKey current;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (!current.empty()) out.push_back(current);
    if (current.size() == max_len) return;
    for (std::size_t i = start; i < n; ++i) {
      current.push_back(seed[i]);
      self(self, i + 1);
      current.pop_back();
    }
  };
  rec(rec, 0);
}

struct Candidate {
  AntecedentKey antecedent;
  std::size_t consequent = 0;
  FuzzyDominance dominance;
};

inline bool better_candidate(const Candidate& a, const Candidate& b) {
  if (a.dominance.dominance.upper != b.dominance.dominance.upper)
    return a.dominance.dominance.upper > b.dominance.dominance.upper;
  if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
  return a.consequent < b.consequent;
}

struct FittedAntecedent {
  bool ok = false;
  Polynomial poly;
  std::vector<std::size_t> rows;  // rows with positive upper firing
};

}  // namespace detail

inline std::vector<Clause> make_clauses(const detail::AntecedentKey& key, const PartitionSet& parts) {
  std::vector<Clause> clauses;
  clauses.reserve(key.size());
  for (const auto& [f, t] : key) clauses.push_back({f, t, parts.features[f]->sets[t]});
  return clauses;
}

inline RuleUniverse generate_candidates(const Dataset& data, const PartitionSet& parts, const GenerationConfig& config) {
  if (data.rows() == 0) throw DataError("cannot generate rules from an empty dataset");
  if (parts.features.size() != data.num_features()) throw InvalidInput("partition count does not match features");
  if (config.max_antecedent < 1) throw ConfigError("max antecedent length must be >= 1");
  if (config.degree < 1 || config.degree > 3) throw ConfigError("polynomial degree must be 1, 2 or 3");
  if (!(config.min_coverage >= 0.0 && config.min_coverage <= 1.0)) throw ConfigError("min coverage must lie in [0, 1]");
  if (!(config.dominance_threshold >= 0.0)) throw ConfigError("dominance threshold must be non-negative");

  const auto tab = detail::membership_table(data, parts);
  const auto view = data.view();
  std::vector<MembershipInterval> target_m(data.rows());
  std::vector<std::size_t> seed_consequent(data.rows());
  std::vector<detail::AntecedentKey> seeds(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t f = 0; f < data.num_features(); ++f) {
      if (!parts.features[f]) continue;
      std::size_t best = 0;
      double best_deg = -1.0;
      for (std::size_t t = 0; t < parts.features[f]->size(); ++t) {
        if (tab.at(r, f, t).upper > best_deg) {
          best_deg = tab.at(r, f, t).upper;
          best = t;
        }
      }
      seeds[r].emplace_back(f, best);
    }
    seed_consequent[r] = parts.target.best_set(data.targets[r]);
  }

  // antecedent -> consequent terms seen with it
  std::map<detail::AntecedentKey, std::set<std::size_t>> pool;
  std::vector<detail::AntecedentKey> subs;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    subs.clear();
    detail::sub_antecedents(seeds[r], config.max_antecedent, subs);
    for (auto& s : subs) pool[std::move(s)].insert(seed_consequent[r]);
  }

  std::vector<std::vector<MembershipInterval>> consequent_m(parts.target.size(),
                                                            std::vector<MembershipInterval>(data.rows()));
  for (std::size_t t = 0; t < parts.target.size(); ++t)
    for (std::size_t r = 0; r < data.rows(); ++r) consequent_m[t][r] = parts.target.sets[t].membership(data.targets[r]);

  std::vector<std::pair<detail::AntecedentKey, std::set<std::size_t>>> entries(pool.begin(), pool.end());
  std::vector<std::vector<detail::Candidate>> scored(entries.size());
  parallel_for(entries.size(), config.threads, [&](std::size_t i) {
    const auto firing = detail::antecedent_firing(tab, entries[i].first, config.tnorm);
    for (std::size_t c : entries[i].second)
      scored[i].push_back({entries[i].first, c, fuzzy_dominance(firing, consequent_m[c])});
  });

  std::vector<detail::Candidate> all;
  for (auto& s : scored)
    for (auto& c : s) all.push_back(std::move(c));
  std::sort(all.begin(), all.end(), detail::better_candidate);

  RuleUniverse universe;
  universe.partitions = parts;
  universe.config = config;
  universe.distinct_candidates = all.size();

  // Fits are shared by every consequent of the same antecedent.
  std::map<detail::AntecedentKey, detail::FittedAntecedent> fits;
  auto fit_antecedent = [&](const detail::AntecedentKey& key) {
    detail::FittedAntecedent fa;
    const auto firing = detail::antecedent_firing(tab, key, config.tnorm);
    std::vector<double> mids;
    for (std::size_t r = 0; r < firing.size(); ++r) {
      if (firing[r].upper > 0.0) {
        fa.rows.push_back(r);
        mids.push_back(firing[r].midpoint());
      }
    }
    std::vector<std::size_t> vars;
    for (const auto& kv : key) vars.push_back(kv.first);
    const std::size_t min_rows = config.min_rows > 0 ? config.min_rows : monomial_count(vars.size(), config.degree);
    if (fa.rows.size() < min_rows || fa.rows.empty()) return fa;
    FitOptions fo = config.fit;
    fo.degree = config.degree;
    try {
      fa.poly = fit_consequent(view, fa.rows, mids, vars, fo);
      fa.ok = true;
    } catch (const TrainingError&) {
      fa.ok = false;
    }
    return fa;
  };
  auto ensure_fits = [&](const std::vector<const detail::Candidate*>& cands) {
    std::vector<detail::AntecedentKey> missing;
    for (const auto* c : cands)
      if (!fits.count(c->antecedent)) {
        fits[c->antecedent];
        missing.push_back(c->antecedent);
      }
    std::vector<detail::FittedAntecedent> results(missing.size());
    parallel_for(missing.size(), config.threads, [&](std::size_t i) { results[i] = fit_antecedent(missing[i]); });
    for (std::size_t i = 0; i < missing.size(); ++i) fits[missing[i]] = std::move(results[i]);
  };

  auto make_rule = [&](const detail::Candidate& c) -> std::optional<HybridRule> {
    const auto& fa = fits.at(c.antecedent);
    if (!fa.ok) return std::nullopt;
    HybridRule rule(make_clauses(c.antecedent, parts), c.consequent, parts.target.sets[c.consequent]);
    rule.consequent_fn = fa.poly;
    rule.fuzzy_dominance = c.dominance.dominance;
    double sse = 0.0;
    for (std::size_t r : fa.rows) {
      const double e = evaluate_rule(rule, data.row(r)) - data.targets[r];
      sse += e * e;
    }
    if (!std::isfinite(sse)) return std::nullopt;  // residuals overflow: treat as unfittable
    rule.error_dominance = error_dominance(std::sqrt(sse / static_cast<double>(fa.rows.size())));
    return rule;
  };

  std::vector<const detail::Candidate*> chosen;
  for (const auto& c : all) {
    if (chosen.size() >= config.max_candidates) break;
    if (c.dominance.dominance.upper >= config.dominance_threshold) chosen.push_back(&c);
  }
  ensure_fits(chosen);

  std::set<std::pair<detail::AntecedentKey, std::size_t>> present;
  std::vector<char> covered(data.rows(), 0);
  auto add_rule = [&](const detail::Candidate& c) {
    auto rule = make_rule(c);
    if (!rule) return false;
    present.emplace(c.antecedent, c.consequent);
    for (std::size_t r : fits.at(c.antecedent).rows) covered[r] = 1;
    universe.rules.push_back(std::move(*rule));
    return true;
  };
  for (const auto* c : chosen) add_rule(*c);

  // Coverage repair: an uncovered row takes the most dominant fittable rule
  // among its own seed generalizations.
  std::map<std::pair<detail::AntecedentKey, std::size_t>, const detail::Candidate*> index;
  for (const auto& c : all) index.emplace(std::make_pair(c.antecedent, c.consequent), &c);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    if (covered[r]) continue;
    subs.clear();
    detail::sub_antecedents(seeds[r], config.max_antecedent, subs);
    std::vector<const detail::Candidate*> options;
    for (const auto& s : subs) {
      const auto it = index.find({s, seed_consequent[r]});
      if (it != index.end() && !present.count(it->first)) options.push_back(it->second);
    }
    std::sort(options.begin(), options.end(),
              [](const auto* a, const auto* b) { return detail::better_candidate(*a, *b); });
    for (const auto* c : options) {
      if (!fits.count(c->antecedent)) fits[c->antecedent] = fit_antecedent(c->antecedent);
      if (add_rule(*c)) break;
    }
  }

  if (universe.rules.empty()) throw TrainingError("rule universe is empty: no candidate survived fitting");
  universe.coverage = static_cast<double>(std::count(covered.begin(), covered.end(), 1)) /
                      static_cast<double>(data.rows());
  if (universe.coverage < config.min_coverage)
    throw TrainingError("rule universe covers only " + std::to_string(universe.coverage) + " of the training rows");
  return universe;
}

}  // namespace hit2
