#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "test_support.hpp"

using namespace hit2;

namespace {

// A set that covers the whole toy domain with full membership.
IT2Set everywhere() { return IT2Set("All", SetShape::trapezoid, {-100, -50, 50, 100}, {-90, -50, 50, 90}, 1.0); }

HybridRule constant_rule(double value, double dominance = 0.5) {
  HybridRule r({{0, 0, everywhere()}}, 0, IT2Set("Out", SetShape::trapezoid, {0, 1, 9, 10}, {0.5, 1, 9, 9.5}, 0.9));
  r.consequent_fn = Polynomial::constant(value);
  r.error_dominance = dominance;
  return r;
}

Dataset flat_targets(std::size_t n, double y) {
  Dataset d;
  d.feature_names = {"x"};
  d.target_name = "y";
  for (std::size_t i = 0; i < n; ++i) {
    d.values.push_back(static_cast<double>(i));
    d.targets.push_back(y);
  }
  return d;
}

Model model_of(std::vector<HybridRule> rules, const Dataset& d, double fallback) {
  Model m;
  m.feature_names = d.feature_names;
  m.target_name = d.target_name;
  m.target_partition = Partition{"y", {rules.front().consequent_set}, 0, 10};
  m.rules = std::move(rules);
  m.fallback_value = fallback;
  return m;
}

// Exhaustive optimum over all subsets with size in [lo, hi], evaluated through
// the inference engine rather than the ACO scorer.
double exhaustive_best(const std::vector<HybridRule>& rules, const Dataset& d, double fallback, std::size_t lo,
                       std::size_t hi, std::vector<std::size_t>* argmin = nullptr) {
  double best = 1e300;
  const std::size_t n = rules.size();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto k = static_cast<std::size_t>(std::popcount(mask));
    if (k < lo || k > hi) continue;
    std::vector<HybridRule> subset;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        subset.push_back(rules[i]);
        idx.push_back(i);
      }
    const double r = *predict_batch(model_of(subset, d, fallback), d.view()).rmse;
    if (r < best) {
      best = r;
      if (argmin) *argmin = idx;
    }
  }
  return best;
}

AcoConfig small_config(std::uint64_t seed) {
  AcoConfig c;
  c.num_ants = 30;
  c.num_iterations = 60;
  c.min_subset = 1;
  c.max_subset = 3;
  c.patience = 10;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(AcoSelect, ThreeRuleUniverseFindsExhaustiveOptimum) {
  const auto d = flat_targets(10, 5.0);
  const std::vector<HybridRule> rules{constant_rule(5.0), constant_rule(9.0, 0.9), constant_rule(2.0, 0.9)};
  std::vector<std::size_t> oracle;
  const double best = exhaustive_best(rules, d, 5.0, 1, 3, &oracle);
  ASSERT_EQ(oracle, std::vector<std::size_t>{0});
  const SubsetScorer scorer(rules, d.view(), 5.0, TNorm::minimum, WeightReduction::midpoint);
  const auto res = select_rules(rules, scorer, small_config(1));
  EXPECT_EQ(res.selected, std::vector<std::size_t>{0});
  EXPECT_NEAR(res.best_cost, best, 1e-12);
}

TEST(AcoSelect, SingleRuleUniverseStopsAfterOneIteration) {
  const auto d = flat_targets(5, 2.0);
  const std::vector<HybridRule> rules{constant_rule(3.0)};
  const SubsetScorer scorer(rules, d.view(), 2.0, TNorm::minimum, WeightReduction::midpoint);
  auto cfg = small_config(2);
  cfg.max_subset = 1;
  const auto res = select_rules(rules, scorer, cfg);
  EXPECT_EQ(res.selected, std::vector<std::size_t>{0});
  EXPECT_EQ(res.trace.size(), 1u);
}

TEST(AcoSelect, PatienceStopsEarly) {
  const auto d = flat_targets(10, 5.0);
  const std::vector<HybridRule> rules{constant_rule(5.0), constant_rule(9.0), constant_rule(1.0)};
  const SubsetScorer scorer(rules, d.view(), 5.0, TNorm::minimum, WeightReduction::midpoint);
  auto cfg = small_config(3);
  cfg.patience = 3;
  const auto res = select_rules(rules, scorer, cfg);
  ASSERT_EQ(res.trace.front().best_rmse, 0.0) << "optimum expected at iteration 1";
  EXPECT_LE(res.trace.size(), 5u);
  EXPECT_EQ(res.trace.size(), 4u);
}

TEST(AcoSelect, TraceMonotoneAndPheromoneBounded) {
  const auto d = testing_support::smooth_dataset(150, 21);
  const auto u = generate_candidates(d, build_partitions(d), {});
  AcoConfig cfg;
  cfg.num_ants = 10;
  cfg.num_iterations = 40;
  cfg.min_subset = 2;
  cfg.max_subset = 15;
  cfg.patience = 40;
  const SubsetScorer scorer(u.rules, d.view(), 10.0, TNorm::minimum, WeightReduction::midpoint);
  const auto res = select_rules(u.rules, scorer, cfg);
  for (std::size_t i = 1; i < res.trace.size(); ++i) {
    EXPECT_EQ(res.trace[i].iteration, i + 1);
    EXPECT_LE(res.trace[i].best_rmse, res.trace[i - 1].best_rmse);
  }
  const double cap = cfg.initial_pheromone + res.trace.size() * cfg.num_ants * cfg.q;
  for (double t : res.state.pheromone) {
    EXPECT_GE(t, cfg.pheromone_floor);
    EXPECT_LE(t, cap);
  }
  EXPECT_TRUE(std::is_sorted(res.selected.begin(), res.selected.end()));
  EXPECT_GE(res.selected.size(), cfg.min_subset);
  EXPECT_LE(res.selected.size(), cfg.max_subset);
}

TEST(AcoSelect, ScorerAgreesWithInferenceEngine) {
  const auto d = testing_support::smooth_dataset(120, 2);
  const auto u = generate_candidates(d, build_partitions(d), {});
  const SubsetScorer scorer(u.rules, d.view(), 7.5, TNorm::minimum, WeightReduction::midpoint);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> subset;
    std::vector<HybridRule> rules;
    for (std::size_t i = 0; i < u.rules.size(); ++i)
      if (rng() % 4 == 0) {
        subset.push_back(i);
        rules.push_back(u.rules[i]);
      }
    if (rules.empty()) continue;
    const double via_engine = *predict_batch(model_of(rules, d, 7.5), d.view()).rmse;
    EXPECT_NEAR(scorer.cost(subset), via_engine, 1e-9 * via_engine);
  }
}

// Twenty seeded runs on universes of up to 12 rules, sizes [1, 4]: ACO must be
// within 5% of the exhaustive optimum in at least 19.
TEST(AcoSelect, SmallUniversesNearExhaustiveOptimum) {
  int within = 0;
  for (std::uint64_t run = 0; run < 20; ++run) {
    const auto d = testing_support::synthetic(80, 2, 100 + run, [](const std::vector<double>& x) {
      return std::sin(x[0]) * 3.0 + x[1];
    }, 0.2);
    const auto u = generate_candidates(d, build_partitions(d), {});
    std::vector<HybridRule> rules(u.rules.begin(), u.rules.begin() + std::min<std::size_t>(12, u.rules.size()));
    const double fallback = std::accumulate(d.targets.begin(), d.targets.end(), 0.0) / d.rows();
    const double best = exhaustive_best(rules, d, fallback, 1, 4);
    const SubsetScorer scorer(rules, d.view(), fallback, TNorm::minimum, WeightReduction::midpoint);
    AcoConfig cfg;
    cfg.min_subset = 1;
    cfg.max_subset = 4;
    cfg.seed = run + 1;
    const auto res = select_rules(rules, scorer, cfg);
    if (res.best_cost <= 1.05 * best) ++within;
  }
  EXPECT_GE(within, 19);
}

TEST(AcoSelect, DeterministicAcrossThreadCounts) {
  const auto d = testing_support::smooth_dataset(150, 6);
  const auto u = generate_candidates(d, build_partitions(d), {});
  AcoConfig cfg;
  cfg.num_ants = 12;
  cfg.num_iterations = 15;
  cfg.min_subset = 2;
  cfg.max_subset = 20;
  cfg.seed = 99;
  const SubsetScorer scorer(u.rules, d.view(), 10.0, TNorm::minimum, WeightReduction::midpoint);
  const auto a = select_rules(u.rules, scorer, cfg);
  cfg.threads = 4;
  const auto b = select_rules(u.rules, scorer, cfg);
  EXPECT_EQ(a.selected, b.selected);
  EXPECT_EQ(a.best_cost, b.best_cost);
  EXPECT_EQ(a.state.pheromone, b.state.pheromone);
}

TEST(AcoSelect, ConfigErrors) {
  const auto d = flat_targets(4, 1.0);
  const std::vector<HybridRule> rules{constant_rule(1.0), constant_rule(2.0)};
  const SubsetScorer scorer(rules, d.view(), 1.0, TNorm::minimum, WeightReduction::midpoint);
  auto bad = [&](auto mutate) {
    AcoConfig c = small_config(1);
    mutate(c);
    EXPECT_THROW(select_rules(rules, scorer, c), ConfigError);
  };
  bad([](AcoConfig& c) { c.min_subset = 0; });
  bad([](AcoConfig& c) { c.min_subset = 3; c.max_subset = 2; });
  bad([](AcoConfig& c) { c.min_subset = 3; c.max_subset = 5; });
  bad([](AcoConfig& c) { c.alpha = 0.5; });
  bad([](AcoConfig& c) { c.rho = 0.0; });
  bad([](AcoConfig& c) { c.q = 0.0; });
  bad([](AcoConfig& c) { c.num_ants = 0; });
  EXPECT_THROW(select_rules(std::vector<HybridRule>{}, scorer, small_config(1)), ConfigError);
}

// alpha = beta = 0 makes every weight 1: single draws must look uniform
// (chi-square, 9 degrees of freedom, critical value 21.666 at p = 0.01).
TEST(Sampler, UniformWhenExponentsAreZero) {
  const std::vector<double> pher{0.1, 5.0, 0.3, 2.0, 0.7, 1.0, 9.0, 0.01, 4.0, 0.5};
  const std::vector<double> heur{0.9, 0.1, 0.5, 0.2, 0.3, 0.6, 0.05, 0.99, 0.4, 0.7};
  const auto w = selection_weights(pher, heur, 0.0, 0.0);
  std::mt19937_64 rng(12345);
  std::vector<int> counts(10, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[sample_subset(w, 1, rng).front()];
  double chi2 = 0.0;
  const double expected = draws / 10.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 21.666);
}

TEST(Sampler, ProportionalToWeights) {
  const std::vector<double> w{1.0, 2.0, 3.0, 4.0};
  std::mt19937_64 rng(8);
  std::vector<int> counts(4, 0);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) ++counts[sample_subset(w, 1, rng).front()];
  double chi2 = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double e = draws * w[i] / 10.0;
    chi2 += (counts[i] - e) * (counts[i] - e) / e;
  }
  EXPECT_LT(chi2, 11.345);  // 3 dof, p = 0.01
}

TEST(Sampler, DrawsWithoutReplacement) {
  const std::vector<double> w{1.0, 1.0, 1.0, 1.0, 1.0};
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto s = sample_subset(w, 5, rng);
    EXPECT_EQ(s, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
  }
  const std::vector<double> sparse{0.0, 2.0, 0.0};
  EXPECT_EQ(sample_subset(sparse, 3, rng), std::vector<std::size_t>{1});
}
