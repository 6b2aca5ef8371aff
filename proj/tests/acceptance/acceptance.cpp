// Acceptance checks. One line per criterion: PASS, FAIL or NOT RUN.
//   acceptance core        criteria 1-4, 7, 8
//   acceptance benchmark   criterion 5 (KEEL 5-fold benchmarks)
//   acceptance case_study  criterion 6 plus the explainability reference values
// Exit status: 0 all run criteria passed, 1 a criterion failed, 77 nothing
// failed but something could not be run.

#include <bit>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "hit2mtsk/hit2mtsk.hpp"

using namespace hit2;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, not_run };

struct Tally {
  int failed = 0;
  int not_run = 0;

  void report(const std::string& id, Status s, const std::string& detail) {
    const char* tag = s == Status::pass ? "PASS" : s == Status::fail ? "FAIL" : "NOT RUN";
    std::printf("[%s] criterion %s: %s\n", tag, id.c_str(), detail.c_str());
    std::fflush(stdout);
    if (s == Status::fail) ++failed;
    if (s == Status::not_run) ++not_run;
  }
  void check(const std::string& id, bool ok, const std::string& detail) {
    report(id, ok ? Status::pass : Status::fail, detail);
  }
  int exit_code() const { return failed > 0 ? 1 : not_run > 0 ? 77 : 0; }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path data_dir() { return HIT2_DATA_DIR; }

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

template <typename F>
Dataset synthetic(std::size_t rows, std::size_t features, std::uint64_t seed, F f, double noise) {
  Dataset d;
  d.name = "synthetic";
  for (std::size_t j = 0; j < features; ++j) d.feature_names.push_back("x" + std::to_string(j + 1));
  d.target_name = "y";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(features);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& v : x) v = u(rng);
    d.values.insert(d.values.end(), x.begin(), x.end());
    d.targets.push_back(f(x) + noise * g(rng));
  }
  return d;
}

PipelineConfig small_config(unsigned degree, std::uint64_t seed) {
  PipelineConfig c;
  c.generation.degree = degree;
  c.aco.num_ants = 10;
  c.aco.num_iterations = 30;
  c.aco.patience = 10;
  c.aco.min_subset = 3;
  c.aco.max_subset = 40;
  c.seed = seed;
  return c;
}

// ---- criterion 1 -----------------------------------------------------------

void worked_example(Tally& t) {
  const IT2Set cement("High", SetShape::right_shoulder, {250, 337.9, 540, 540}, {270, 337.9, 540, 540}, 0.9);
  const IT2Set slag("High", SetShape::right_shoulder, {76, 189, 359.4, 359.4}, {90, 189, 359.4, 359.4}, 0.9);
  const IT2Set strength("High", SetShape::right_shoulder, {37.91, 54.9, 82.6, 82.6}, {40, 54.9, 82.6, 82.6}, 0.9);
  HybridRule rule({{0, 2, cement}, {1, 2, slag}}, 2, strength);
  rule.consequent_fn = Polynomial({0, 1}, 2, {0.0, 0.3, -0.6, -5.29e-4, 1.68e-3, 2.82e-4});
  const std::vector<double> x{375.0, 300.0};
  const double y = evaluate_rule(rule, x);
  bool below_ok = true;
  for (double v : {37.9, 30.0, 0.0, -1e6}) below_ok &= clamp_output(v, rule.clamp_lo, rule.clamp_hi) == 37.91;
  const bool ok = std::abs(y - 72.62) <= 0.5 && clamp_output(85.0, rule.clamp_lo, rule.clamp_hi) == 82.6 && below_ok;
  t.check("1", ok, fmt("cement rule at (375, 300) = %.4f (target 72.62 +/- 0.5); 85 -> %.2f; below 37.91 -> 37.91 %s", y,
                       clamp_output(85.0, rule.clamp_lo, rule.clamp_hi), below_ok ? "yes" : "no"));
}

// ---- criterion 2 -----------------------------------------------------------

void dominance_fidelity(Tally& t) {
  const double e = error_dominance(14.3);
  bool sweep = true;
  double prev = 2.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = error_dominance(i * 0.37 + i * i * 1e-3);
    sweep &= v > 0.0 && v <= 1.0 && v < prev;
    prev = v;
  }
  t.check("2", std::round(e * 1000.0) / 1000.0 == 0.065 && sweep,
          fmt("error_dominance(14.3) = %.5f; 1000-point sweep strictly decreasing in (0,1]: %s", e, sweep ? "yes" : "no"));
}

// ---- criterion 3 -----------------------------------------------------------

double oracle_solve_max_rel_error(std::mt19937_64& rng, int trials) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const std::size_t nv = 1 + trial % 3;
    const unsigned degree = 1 + trial % 3;
    const auto exps = monomial_exponents(nv, degree);
    const std::size_t m = exps.size(), n = m + 6 + trial % 5;
    Dataset d;
    for (std::size_t j = 0; j < nv; ++j) d.feature_names.push_back("x" + std::to_string(j));
    std::vector<std::vector<double>> design;
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<double> x(nv), row;
      for (auto& v : x) v = 2.0 * u(rng) + 0.5;
      d.values.insert(d.values.end(), x.begin(), x.end());
      d.targets.push_back(3.0 * u(rng));
      for (const auto& e : exps) {
        double p = 1.0;
        for (std::size_t i = 0; i < nv; ++i)
          for (unsigned k = 0; k < e[i]; ++k) p *= x[i];
        row.push_back(p);
      }
      design.push_back(row);
    }
    // Normal equations with Gaussian elimination.
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < m; ++i) {
        a[i][m] += design[r][i] * d.targets[r];
        for (std::size_t j = 0; j < m; ++j) a[i][j] += design[r][i] * design[r][j];
      }
    for (std::size_t c = 0; c < m; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < m; ++r)
        if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
      std::swap(a[c], a[piv]);
      for (std::size_t r = c + 1; r < m; ++r) {
        const double f = a[r][c] / a[c][c];
        for (std::size_t k = c; k <= m; ++k) a[r][k] -= f * a[c][k];
      }
    }
    std::vector<double> beta(m);
    for (std::size_t i = m; i-- > 0;) {
      double s = a[i][m];
      for (std::size_t k = i + 1; k < m; ++k) s -= a[i][k] * beta[k];
      beta[i] = s / a[i][i];
    }
    std::vector<std::size_t> rows(n), vars(nv);
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(vars.begin(), vars.end(), 0);
    const auto raw = fit_consequent(d.view(), rows, {}, vars, {degree, 0.0, false}).raw_terms();
    for (std::size_t j = 0; j < m; ++j)
      worst = std::max(worst, std::abs(raw[j].coefficient - beta[j]) / std::max(1.0, std::abs(beta[j])));
  }
  return worst;
}

double support_confidence_max_error(std::mt19937_64& rng, int datasets, int& compared) {
  std::uniform_real_distribution<double> u(0.0, 10.0);
  double worst = 0.0;
  for (int trial = 0; trial < datasets; ++trial) {
    const std::size_t nf = 1 + trial % 3, rows = 4 + trial % 7;
    Dataset d;
    for (std::size_t j = 0; j < nf; ++j) d.feature_names.push_back("x" + std::to_string(j));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < nf; ++j) d.values.push_back(u(rng));
      d.targets.push_back(u(rng));
    }
    const auto parts = build_partitions(d);
    for (std::size_t f = 0; f < nf; ++f)
      for (std::size_t term = 0; term < 3; ++term)
        for (std::size_t g = 0; g < 3; ++g) {
          const HybridRule rule({{f, term, parts.features[f]->sets[term]}}, g, parts.target.sets[g]);
          for (TNorm tn : {TNorm::minimum, TNorm::product}) {
            double js_lo = 0, js_hi = 0, a_lo = 0, a_hi = 0;
            for (std::size_t p = 0; p < rows; ++p) {
              const auto m = rule.antecedent[0].set.membership(d.values[p * nf + f]);
              const auto c = rule.consequent_set.membership(d.targets[p]);
              js_lo += m.lower * c.lower;
              js_hi += m.upper * c.upper;
              a_lo += m.lower;
              a_hi += m.upper;
            }
            const auto s = rule_support(rule, d.view(), tn);
            worst = std::max({worst, std::abs(s.lower - js_lo / rows), std::abs(s.upper - js_hi / rows)});
            if (a_hi > 0.0) {
              const double c_lo = a_lo > 0 ? js_lo / a_lo : 0.0, c_hi = js_hi / a_hi;
              const auto c = rule_confidence(rule, d.view(), tn);
              worst = std::max({worst, std::abs(c.lower - std::min(c_lo, c_hi)), std::abs(c.upper - std::max(c_lo, c_hi))});
            }
            ++compared;
          }
        }
  }
  return worst;
}

int aco_near_optimal_runs(int runs) {
  int within = 0;
  for (int run = 0; run < runs; ++run) {
    const auto d = synthetic(80, 2, 100 + run, [](const std::vector<double>& x) { return std::sin(x[0]) * 3.0 + x[1]; }, 0.2);
    const auto u = generate_candidates(d, build_partitions(d), {});
    std::vector<HybridRule> rules(u.rules.begin(), u.rules.begin() + std::min<std::size_t>(12, u.rules.size()));
    const double fallback = mean_of(d.targets);
    Model base;
    base.feature_names = d.feature_names;
    base.target_name = d.target_name;
    base.target_partition = Partition{"y", {rules.front().consequent_set}, 0, 1};
    base.fallback_value = fallback;
    double best = 1e300;
    for (std::uint32_t mask = 1; mask < (1u << rules.size()); ++mask) {
      if (std::popcount(mask) > 4) continue;
      Model m = base;
      for (std::size_t i = 0; i < rules.size(); ++i)
        if (mask & (1u << i)) m.rules.push_back(rules[i]);
      best = std::min(best, *predict_batch(m, d.view()).rmse);
    }
    const SubsetScorer scorer(rules, d.view(), fallback, TNorm::minimum, WeightReduction::midpoint);
    AcoConfig cfg;
    cfg.min_subset = 1;
    cfg.max_subset = 4;
    cfg.seed = static_cast<std::uint64_t>(run) + 1;
    if (select_rules(rules, scorer, cfg).best_cost <= 1.05 * best) ++within;
  }
  return within;
}

void oracle_equivalence(Tally& t) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2718);
  int compared = 0;
  const double sc = support_confidence_max_error(rng, 20, compared);
  const double ls = oracle_solve_max_rel_error(rng, 25);
  const int within = aco_near_optimal_runs(20);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.check("3", sc <= 1e-12 && ls <= 1e-8 && within >= 19 && secs < 60.0,
          fmt("support/confidence max error %.2e over %d comparisons (<= 1e-12); least squares max rel error %.2e "
              "(<= 1e-8); ACO within 1.05x of exhaustive in %d/20 runs (>= 19); %.1f s",
              sc, compared, ls, within, secs));
}

// ---- criterion 4 -----------------------------------------------------------

struct BoundCount {
  std::size_t outputs = 0, outputs_ok = 0, predictions = 0, predictions_ok = 0;
};

void count_bounds(const Model& m, const DataView& rows, BoundCount& b) {
  for (std::size_t p = 0; p < rows.rows(); ++p) {
    const auto x = rows.row(p);
    for (const auto& r : m.rules) {
      const double y = evaluate_rule(r, x);
      ++b.outputs;
      if (y >= r.clamp_lo && y <= r.clamp_hi) ++b.outputs_ok;
    }
    const auto pred = predict(m, x);
    if (pred.fallback_used) continue;
    double lo = 1e300, hi = -1e300;
    for (const auto& f : pred.fired)
      if (f.weight > 0.0) {
        lo = std::min(lo, f.output);
        hi = std::max(hi, f.output);
      }
    ++b.predictions;
    if (pred.value >= lo && pred.value <= hi) ++b.predictions_ok;
  }
}

void boundedness(Tally& t) {
  BoundCount b;
  std::size_t models = 0;
  for (unsigned degree : {1u, 2u, 3u})
    for (TNorm tn : {TNorm::minimum, TNorm::product}) {
      const auto d = synthetic(250, 3, 41 + degree, [](const std::vector<double>& x) {
        return std::exp(0.2 * x[0]) + 3.0 * std::sin(x[1]) - x[2];
      }, 0.3);
      auto cfg = small_config(degree, 11);
      cfg.generation.tnorm = tn;
      const auto [train, test] = split_holdout(d, 0.2, 3);
      const auto r = train_model(train, cfg);
      count_bounds(r.model, train.view(), b);
      count_bounds(r.model, test.view(), b);
      ++models;
    }
  const auto folds = load_keel_folds(data_dir() / "keel" / "concrete");
  for (const auto& f : folds) {
    const auto r = train_model(f.train, small_config(3, 1));
    count_bounds(r.model, f.test.view(), b);
    ++models;
  }
  t.check("4", b.outputs == b.outputs_ok && b.predictions == b.predictions_ok,
          fmt("%zu models: rule outputs within clamp %zu/%zu; non-fallback predictions within fired hull %zu/%zu",
              models, b.outputs_ok, b.outputs, b.predictions_ok, b.predictions));
}

// ---- criterion 7 -----------------------------------------------------------

bool lawful(const Model& m, const DataView& rows, std::string& detail) {
  std::vector<double> thresholds;
  for (int i = 0; i <= 20; ++i) thresholds.push_back(i / 20.0);
  const auto active = active_rules_per_prediction(m, rows, thresholds);
  bool active_ok = true;
  for (std::size_t i = 1; i < active.size(); ++i) active_ok &= active[i] <= active[i - 1];
  const std::vector<double> levels{0.0, 0.01, 0.05, 0.10, 0.20};
  std::vector<double> mean(levels.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto v = noise_robustness(m, rows, m.feature_stddev, levels, seed);
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i] / 5.0;
  }
  bool noise_ok = mean[0] == 0.0;
  for (std::size_t i = 1; i < mean.size(); ++i) noise_ok &= mean[i] >= mean[i - 1];
  const auto cov = coverage_metrics(m, rows);
  detail = fmt("active rules non-increasing over 21 thresholds: %s (%.2f -> %.2f); noise deltas over 5 seeds "
               "%.3f/%.3f/%.3f/%.3f/%.3f%%: %s; dataset coverage %.3f",
               active_ok ? "yes" : "no", active.front(), active.back(), mean[0], mean[1], mean[2], mean[3], mean[4],
               noise_ok ? "yes" : "no", cov.dataset_coverage);
  return active_ok && noise_ok && cov.dataset_coverage >= 0.0 && cov.dataset_coverage <= 1.0;
}

void explainability_laws(Tally& t) {
  const auto folds = load_keel_folds(data_dir() / "keel" / "concrete");
  const auto r = train_model(folds.front().train, small_config(3, 2));
  std::string detail;
  const bool ok = lawful(r.model, folds.front().test.view(), detail);
  // Pre-pruning universes must cover every training row.
  double worst_cov = 1.0;
  for (const auto& f : folds) {
    const auto parts = build_partitions(f.train);
    worst_cov = std::min(worst_cov, generate_candidates(f.train, parts, {}).coverage);
  }
  t.check("7", ok && worst_cov == 1.0,
          detail + fmt("; pre-pruning universe coverage on training data (min over 5 folds) %.4f", worst_cov));
}

// ---- criterion 8 -----------------------------------------------------------

void determinism(Tally& t) {
  const auto folds = load_keel_folds(data_dir() / "keel" / "concrete");
  PipelineConfig cfg;  // defaults
  const auto& train = folds.front().train;
  const Manifest m{cfg, train.name, fingerprint(train), "train"};
  const auto a = model_to_json(train_model(train, cfg).model, m).dump(2);
  const auto b = model_to_json(train_model(train, cfg).model, m).dump(2);
  auto threaded = cfg;
  threaded.threads = 4;
  const auto c = model_to_json(train_model(train, threaded).model, m).dump(2);

  std::vector<FoldSplit> two(folds.begin(), folds.begin() + 2);
  const Manifest rm{cfg, "concrete", fingerprint(train), "crossval"};
  const auto ra = report_json(run_cv(two, cfg, "concrete"), rm).dump(2);
  const auto rb = report_json(run_cv(two, cfg, "concrete"), rm).dump(2);
  t.check("8", a == b && a == c && ra == rb,
          fmt("model bundles identical across two runs: %s, and with 4 threads: %s (%zu bytes); crossval reports "
              "identical: %s (%zu bytes)",
              a == b ? "yes" : "no", a == c ? "yes" : "no", a.size(), ra == rb ? "yes" : "no", ra.size()));
}

// ---- criterion 5 -----------------------------------------------------------

struct Benchmark {
  std::string name;
  unsigned degree;
  double limit;
  double reference;
};

void benchmark(Tally& t) {
  const std::vector<Benchmark> sets{{"concrete", 3, 8.38, 7.29},  {"wankara", 3, 1.82, 1.58},
                                    {"treasury", 3, 0.31, 0.27},  {"mortgage", 3, 0.15, 0.13},
                                    {"diabetes", 3, 0.92, 0.80},  {"ele-2", 3, 218.0, 189.28}};
  const char* env = std::getenv("HIT2_KEEL_DIR");
  for (const auto& b : sets) {
    fs::path dir = data_dir() / "keel" / b.name;
    if (!fs::is_directory(dir) && env) dir = fs::path(env) / b.name;
    const std::string id = "5/" + b.name;
    if (!fs::is_directory(dir)) {
      t.report(id, Status::not_run,
               fmt("KEEL 5-fold partitions not found (looked in data/keel/%s and $HIT2_KEEL_DIR/%s)", b.name.c_str(),
                   b.name.c_str()));
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    PipelineConfig cfg;
    cfg.generation.degree = b.degree;
    const auto report = run_cv(load_keel_folds(dir), cfg, b.name);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = report.mean_rmse && !report.incomplete && *report.mean_rmse <= b.limit;
    t.check(id, ok,
            fmt("D%u 5-fold mean test RMSE %.4f (limit %.2f, reference %.2f)%s; %.1f s", b.degree,
                report.mean_rmse.value_or(NAN), b.limit, b.reference, report.incomplete ? ", INCOMPLETE" : "", secs));
  }
}

// ---- criterion 6 + explainability references -----------------------------

bool within30(double value, double target) { return std::abs(value - target) <= 0.3 * std::abs(target); }

void case_study(Tally& t) {
  const fs::path path = data_dir() / "california_housing.csv";
  if (!fs::exists(path)) {
    t.report("6", Status::not_run, "data/california_housing.csv not found (run tools/fetch_datasets.py)");
    return;
  }
  const auto start = std::chrono::steady_clock::now();
  Dataset data = load_csv(path, "MedHouseVal");
  const std::uint64_t seed = 42;
  const auto [train, test] = split_holdout(data, 0.2, seed);
  PipelineConfig cfg;
  cfg.seed = seed;
  const auto r = train_model(train, cfg);
  const auto cmp = compare_with_mamdani(r.model, train.view(), test.view());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.check("6", cmp.hybrid_rmse <= 0.76 && cmp.hybrid_rmse < cmp.mamdani_rmse &&
                   cmp.single_rule_distinct <= cmp.output_sets && secs < 900.0,
          fmt("80/20 split seed %llu: hybrid RMSE %.4f (<= 0.76, reference 0.695), Mamdani RMSE %.4f (hybrid must be "
              "lower); single-rule rows %zu with %zu distinct Mamdani values (<= %zu output sets); %zu rules; %.1f s",
              static_cast<unsigned long long>(seed), cmp.hybrid_rmse, cmp.mamdani_rmse, cmp.single_rule_rows,
              cmp.single_rule_distinct, cmp.output_sets, r.model.rules.size(), secs));

  std::string detail;
  t.check("7/california-laws", lawful(r.model, test.view(), detail), detail);

  const CaseStudyReference ref;
  const auto e = explain_model(r.model, test.view(), r.model.feature_stddev, seed);
  bool active_ok = true, noise_ok = true;
  for (std::size_t i = 0; i < 3; ++i) {
    active_ok &= within30(e.active_rules[i], ref.active_rules[i]);
    noise_ok &= within30(e.noise_deltas[i], ref.noise_percent[i]);
  }
  t.check("7/reference-active-rules", active_ok,
          fmt("rules per prediction %.2f / %.2f / %.2f at 0.15 / 0.25 / 0.5 (reference 8.38 / 6.33 / 3.83, +/- 30%%)",
              e.active_rules[0], e.active_rules[1], e.active_rules[2]));
  t.check("7/reference-noise", noise_ok,
          fmt("mean prediction change %.2f%% / %.2f%% / %.2f%% at 1 / 5 / 10%% noise (reference 1.18 / 5.84 / 12.24, "
              "+/- 30%%)",
              e.noise_deltas[0], e.noise_deltas[1], e.noise_deltas[2]));
  t.check("7/reference-rule-base", within30(e.rule_count, ref.rule_count) && within30(e.mean_antecedents, ref.mean_antecedents),
          fmt("%zu rules with %.2f antecedents on average (reference 75 rules, 2.67 antecedents, +/- 30%%); "
              "prediction range fraction %.3f (reference %.2f)",
              e.rule_count, e.mean_antecedents, e.coverage.range_fraction, ref.range_fraction));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "core";
  const std::map<std::string, std::vector<std::function<void(Tally&)>>> modes{
      {"core", {worked_example, dominance_fidelity, oracle_equivalence, boundedness, explainability_laws, determinism}},
      {"benchmark", {benchmark}},
      {"case_study", {case_study}},
  };
  const auto it = modes.find(mode);
  if (it == modes.end()) {
    std::fprintf(stderr, "usage: acceptance [core|benchmark|case_study]\n");
    return 2;
  }
  Tally tally;
  for (const auto& step : it->second) {
    try {
      step(tally);
    } catch (const std::exception& e) {
      tally.report(mode, Status::fail, std::string("unexpected error: ") + e.what());
    }
  }
  return tally.exit_code();
}
