#pragma once

// Ant colony selection of the active rule subset. Each ant samples a subset
// of rules with probability proportional to pheromone^alpha * heuristic^beta,
// where the heuristic is the rule's error dominance; subsets are scored by the
// RMSE of weighted-mean inference and reinforced with Q / (1 + cost).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "hit2mtsk/dataset.hpp"
#include "hit2mtsk/error.hpp"
#include "hit2mtsk/inference.hpp"
#include "hit2mtsk/parallel.hpp"
#include "hit2mtsk/rule.hpp"

namespace hit2 {

struct AcoConfig {
  std::size_t num_ants = 100;
  std::size_t num_iterations = 200;
  double alpha = 1.0;
  double beta = 1.0;
  double rho = 0.1;
  double q = 1.0;
  double initial_pheromone = 0.1;
  double pheromone_floor = 1e-9;
  std::size_t min_subset = 10;
  std::size_t max_subset = 200;
  std::size_t patience = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  // Checks the parameters against a universe of the given size and returns
  // the effective maximum subset size (capped at the universe size).
  std::size_t validate(std::size_t universe_size) const {
    if (num_ants < 1 || num_iterations < 1) throw ConfigError("ACO needs at least one ant and one iteration");
    if (!(alpha >= 1.0)) throw ConfigError("ACO alpha must be >= 1");
    if (!(beta >= 0.0)) throw ConfigError("ACO beta must be >= 0");
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("ACO rho must lie in (0, 1]");
    if (!(q > 0.0)) throw ConfigError("ACO Q must be positive");
    if (!(initial_pheromone > 0.0)) throw ConfigError("initial pheromone must be positive");
    if (!(pheromone_floor > 0.0)) throw ConfigError("pheromone floor must be positive");
    if (universe_size == 0) throw ConfigError("ACO over an empty universe");
    if (min_subset < 1 || min_subset > max_subset)
      throw ConfigError("subset size range [" + std::to_string(min_subset) + ", " + std::to_string(max_subset) +
                        "] is infeasible");
    if (min_subset > universe_size)
      throw ConfigError("minimum subset size " + std::to_string(min_subset) + " exceeds the universe size " +
                        std::to_string(universe_size));
    return std::min(max_subset, universe_size);
  }
};

struct AcoState {
  std::vector<double> pheromone;
  std::vector<std::size_t> best_solution;
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t stagnation = 0;
};

struct TraceEntry {
  std::size_t iteration = 0;
  double best_rmse = 0.0;
};

struct AcoResult {
  std::vector<std::size_t> selected;  // ascending rule indices
  double best_cost = 0.0;
  std::vector<TraceEntry> trace;
  AcoState state;
};

// Draws `size` distinct indices, each draw proportional to the remaining weights.
template <typename Rng>
std::vector<std::size_t> sample_subset(std::span<const double> weights, std::size_t size, Rng& rng) {
  std::vector<double> w(weights.begin(), weights.end());
  std::vector<std::size_t> out;
  out.reserve(size);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < size && k < w.size(); ++k) {
    double total = 0.0;
    for (double v : w) total += v;
    std::size_t pick = w.size();
    if (total > 0.0) {
      double u = unit(rng) * total;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        pick = i;
        u -= w[i];
        if (u < 0.0) break;
      }
    }
    if (pick == w.size()) break;
    out.push_back(pick);
    w[pick] = 0.0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> selection_weights(std::span<const double> pheromone, std::span<const double> heuristic,
                                             double alpha, double beta) {
  std::vector<double> w(pheromone.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(pheromone[i], alpha) * std::pow(heuristic[i], beta);
  return w;
}

// RMSE of weighted-mean inference for arbitrary rule subsets, from per-rule
// contributions precomputed once over the scoring rows.
class SubsetScorer {
 public:
  SubsetScorer(std::span<const HybridRule> rules, const DataView& data, double fallback, TNorm tnorm,
               WeightReduction reduction, std::size_t threads = 1)
      : targets_(data.targets.begin(), data.targets.end()), fallback_(fallback), entries_(rules.size()) {
    if (targets_.empty()) throw InvalidInput("ACO scoring data has no rows");
    parallel_for(rules.size(), threads, [&](std::size_t r) {
      auto& list = entries_[r];
      for (std::size_t p = 0; p < data.rows(); ++p) {
        const auto x = data.row(p);
        const auto f = rules[r].firing(x, tnorm);
        if (f.upper <= 0.0) continue;
        const double w = reduce(f, reduction) * rules[r].error_dominance;
        if (w <= 0.0) continue;
        list.push_back({static_cast<std::uint32_t>(p), w, w * evaluate_rule(rules[r], x)});
      }
    });
  }

  std::size_t rule_count() const noexcept { return entries_.size(); }

  double cost(std::span<const std::size_t> subset) const {
    std::vector<double> num(targets_.size(), 0.0);
    std::vector<double> den(targets_.size(), 0.0);
    for (std::size_t r : subset)
      for (const auto& e : entries_[r]) {
        den[e.row] += e.w;
        num[e.row] += e.wy;
      }
    double sse = 0.0;
    for (std::size_t p = 0; p < targets_.size(); ++p) {
      const double pred = den[p] > 0.0 ? num[p] / den[p] : fallback_;
      const double e = pred - targets_[p];
      sse += e * e;
    }
    return std::sqrt(sse / static_cast<double>(targets_.size()));
  }

 private:
  struct Entry {
    std::uint32_t row;
    double w;
    double wy;
  };
  std::vector<double> targets_;
  double fallback_;
  std::vector<std::vector<Entry>> entries_;
};

inline AcoResult select_rules(std::span<const HybridRule> rules, const SubsetScorer& scorer, const AcoConfig& config) {
  const std::size_t n = rules.size();
  const std::size_t max_size = config.validate(n);
  const std::size_t min_size = config.min_subset;

  std::vector<double> heuristic(n);
  for (std::size_t i = 0; i < n; ++i) heuristic[i] = rules[i].error_dominance;

  AcoResult result;
  AcoState& state = result.state;
  state.pheromone.assign(n, config.initial_pheromone);
  // A single feasible subset needs no search beyond one iteration.
  const bool single_solution = min_size == n;

  struct Ant {
    std::vector<std::size_t> subset;
    double cost = 0.0;
  };
  std::vector<Ant> ants(config.num_ants);
  for (std::size_t it = 1; it <= config.num_iterations; ++it) {
    const auto weights = selection_weights(state.pheromone, heuristic, config.alpha, config.beta);
    parallel_for(config.num_ants, config.threads, [&](std::size_t a) {
      std::seed_seq seq{config.seed, static_cast<std::uint64_t>(it), static_cast<std::uint64_t>(a)};
      std::mt19937_64 rng(seq);
      std::uniform_int_distribution<std::size_t> size_dist(min_size, max_size);
      ants[a].subset = sample_subset<std::mt19937_64>(weights, size_dist(rng), rng);
      ants[a].cost = scorer.cost(ants[a].subset);
    });

    std::size_t best_ant = 0;
    for (std::size_t a = 1; a < ants.size(); ++a)
      if (ants[a].cost < ants[best_ant].cost) best_ant = a;
    if (ants[best_ant].cost < state.best_cost) {
      state.best_cost = ants[best_ant].cost;
      state.best_solution = ants[best_ant].subset;
      state.stagnation = 0;
    } else {
      ++state.stagnation;
    }

    for (double& t : state.pheromone) t = std::max(t * (1.0 - config.rho), config.pheromone_floor);
    for (const auto& ant : ants) {
      const double deposit = config.q / (1.0 + ant.cost);
      for (std::size_t r : ant.subset) state.pheromone[r] += deposit;
    }
    result.trace.push_back({it, state.best_cost});
    if (single_solution || state.stagnation >= config.patience) break;
  }
  result.selected = state.best_solution;
  result.best_cost = state.best_cost;
  return result;
}

// Scores on the concatenation of training and validation rows.
inline AcoResult select_rules(std::span<const HybridRule> rules, const Dataset& train, const Dataset& validation,
                              double fallback, TNorm tnorm, WeightReduction reduction, const AcoConfig& config) {
  Dataset scoring = train;
  if (validation.rows() > 0) scoring.append(validation);
  const SubsetScorer scorer(rules, scoring.view(), fallback, tnorm, reduction, config.threads);
  return select_rules(rules, scorer, config);
}

}  // namespace hit2
