// Command-line front end: train, crossval, explain, predict, baseline.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "hit2mtsk/hit2mtsk.hpp"

namespace fs = std::filesystem;
using namespace hit2;

namespace {

enum Exit : int { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kTraining = 4 };

struct Options {
  std::string data;
  std::string format = "auto";
  std::string target;
  std::string variant = "d3";
  std::string model;
  std::string out = "hit2mtsk-out";
  std::size_t folds = 5;
  double holdout = 0.2;
  std::size_t threads = 1;
  PipelineConfig pipeline;
  std::string tnorm = "minimum";
  std::string reduction = "midpoint";
};

void add_options(CLI::App& app, Options& o) {
  auto& p = o.pipeline;
  app.add_option("--data", o.data, "Dataset file, or a directory of KEEL fold files for crossval");
  app.add_option("--format", o.format, "Input format")->check(CLI::IsMember({"auto", "keel", "csv"}));
  app.add_option("--target", o.target, "Target column for CSV input (default: last column)");
  app.add_option("--variant", o.variant, "Consequent polynomial degree")->check(CLI::IsMember({"d1", "d2", "d3"}));
  app.add_option("--model", o.model, "Model bundle for explain/predict");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--seed", p.seed, "Random seed");
  app.add_option("--threads", o.threads, "Worker thread cap (0 = hardware concurrency)");
  app.add_option("--folds", o.folds, "Fold count when crossval splits a single file");
  app.add_option("--holdout", o.holdout, "Test fraction for train/baseline holdout (0 disables in train)");
  app.add_option("--sets", p.partition.num_sets, "Fuzzy sets per variable");
  app.add_option("--fou-width", p.partition.fou_width, "Lower-function inset as a fraction of the support");
  app.add_option("--fou-scale", p.partition.fou_scale, "Lower-function height");
  app.add_option("--max-antecedent", p.generation.max_antecedent, "Maximum clauses per rule");
  app.add_option("--max-candidates", p.generation.max_candidates, "Rule universe cap");
  app.add_option("--dominance-threshold", p.generation.dominance_threshold, "Minimum upper fuzzy dominance");
  app.add_option("--min-coverage", p.generation.min_coverage, "Required universe coverage of fitting rows");
  app.add_option("--ridge", p.generation.fit.ridge, "Ridge penalty on standardized coefficients");
  app.add_option("--tnorm", o.tnorm, "Antecedent t-norm")->check(CLI::IsMember({"minimum", "product"}));
  app.add_option("--reduction", o.reduction, "Firing-interval reduction for inference weights")
      ->check(CLI::IsMember({"midpoint", "lower", "upper"}));
  app.add_option("--validation-fraction", p.validation_fraction, "Training share held out from rule fitting");
  app.add_option("--ants", p.aco.num_ants, "ACO ants per iteration");
  app.add_option("--iterations", p.aco.num_iterations, "ACO iteration cap");
  app.add_option("--alpha", p.aco.alpha, "Pheromone exponent");
  app.add_option("--beta", p.aco.beta, "Heuristic exponent");
  app.add_option("--rho", p.aco.rho, "Evaporation rate");
  app.add_option("--q", p.aco.q, "Deposit constant");
  app.add_option("--initial-pheromone", p.aco.initial_pheromone, "Initial pheromone");
  app.add_option("--min-rules", p.aco.min_subset, "Smallest rule subset an ant may build");
  app.add_option("--max-rules", p.aco.max_subset, "Largest rule subset an ant may build");
  app.add_option("--patience", p.aco.patience, "Non-improving iterations before stopping");
}

void finish_config(Options& o) {
  o.pipeline.generation.degree = static_cast<unsigned>(o.variant[1] - '0');
  o.pipeline.generation.tnorm = parse_tnorm(o.tnorm);
  o.pipeline.reduction = parse_weight_reduction(o.reduction);
  o.pipeline.threads = o.threads;
  o.pipeline.validate();
  if (!(o.holdout >= 0.0 && o.holdout < 1.0)) throw ConfigError("--holdout must lie in [0, 1)");
}

std::string resolve_format(const Options& o, const fs::path& path) {
  if (o.format != "auto") return o.format;
  return path.extension() == ".dat" ? "keel" : "csv";
}

Dataset load_dataset(const Options& o) {
  if (o.data.empty()) throw ConfigError("--data is required");
  const fs::path path(o.data);
  if (!fs::exists(path)) throw DataError("data file not found: " + o.data);
  Dataset d = resolve_format(o, path) == "keel" ? load_keel(path) : load_csv(path, o.target);
  if (d.name.empty()) d.name = path.stem().string();
  d.validate();
  return d;
}

Manifest manifest_for(const Options& o, const std::string& command, const Dataset& data) {
  return {o.pipeline, data.name, fingerprint(data), command};
}

void print_line(const char* fmt, double v) { std::printf(fmt, v); }

int cmd_train(Options& o) {
  Dataset data = load_dataset(o);
  Dataset train = data, test;
  if (o.holdout > 0.0) std::tie(train, test) = split_holdout(data, o.holdout, o.pipeline.seed);
  const Manifest manifest = manifest_for(o, "train", data);
  const auto result = train_model(train, o.pipeline);
  const fs::path out(o.out);
  save_model(out / "model.json", result.model, manifest);
  std::vector<Partition> parts;
  for (const auto& p : result.model.feature_partitions)
    if (p) parts.push_back(*p);
  parts.push_back(*result.model.target_partition);
  write_text(out / "partitions.txt", manifest.header() + partitions_to_text(parts));
  write_text(out / "rules.txt", export_rules(result.model, manifest));
  write_text(out / "aco_trace.tsv", trace_tsv(result.aco, manifest));
  const auto fit = predict_batch(result.model, train.view());
  write_text(out / "train_predictions.tsv", predictions_tsv(fit, train.targets, manifest));
  std::printf("universe %zu rules, selected %zu, ACO iterations %zu\n", result.universe_size,
              result.model.rules.size(), result.aco.trace.size());
  print_line("training RMSE %.4f\n", *fit.rmse);
  if (test.rows() > 0) {
    const auto held = predict_batch(result.model, test.view());
    write_text(out / "test_predictions.tsv", predictions_tsv(held, test.targets, manifest));
    write_text(out / "scatter.tsv", scatter_tsv(held, test.targets, manifest));
    write_text(out / "residuals.tsv", residuals_tsv(held, test.targets, manifest));
    print_line("holdout RMSE %.4f\n", *held.rmse);
  }
  std::printf("model written to %s\n", (out / "model.json").string().c_str());
  return kOk;
}

int cmd_crossval(Options& o) {
  if (o.data.empty()) throw ConfigError("--data is required");
  const fs::path path(o.data);
  if (!fs::exists(path)) throw DataError("data path not found: " + o.data);
  std::vector<FoldSplit> folds;
  std::string name;
  Dataset all;
  if (fs::is_directory(path)) {
    folds = load_keel_folds(path);
    name = path.filename().string();
    if (name.empty()) name = path.parent_path().filename().string();
    all = folds.front().train;
    all.append(folds.front().test);
  } else {
    all = load_dataset(o);
    folds = make_folds(all, o.folds, o.pipeline.seed);
    name = path.stem().string();
  }
  all.name = name;
  const Manifest manifest = manifest_for(o, "crossval", all);
  const auto report = run_cv(folds, o.pipeline, name);
  write_text(fs::path(o.out) / "report.json", report_json(report, manifest).dump(2) + "\n");

  std::printf("%s %s, %zu folds\n", name.c_str(), report.variant.c_str(), report.folds.size());
  for (const auto& f : report.folds) {
    if (f.rmse)
      std::printf("  fold %zu  RMSE %.4f  rules %zu  fallback rows %zu\n", f.fold_index, *f.rmse, f.rules,
                  f.fallback_count);
    else
      std::printf("  fold %zu  FAILED: %s\n", f.fold_index, f.error.c_str());
  }
  if (report.mean_rmse) print_line("mean RMSE %.4f\n", *report.mean_rmse);
  if (report.incomplete) std::printf("warning: mean covers completed folds only\n");
  if (report.references.empty()) {
    std::printf("no reference RMSE for '%s'; available:", name.c_str());
    for (const auto& n : reference_dataset_names()) std::printf(" %s", n.c_str());
    std::printf("\n");
  } else {
    std::printf("reference RMSEs:\n");
    for (const auto& r : report.references) std::printf("  %-18s %.2f\n", r.method.c_str(), r.rmse);
  }
  if (!report.mean_rmse) return kTraining;
  return kOk;
}

std::pair<Model, Manifest> load_bundle(const Options& o) {
  if (o.model.empty()) throw ConfigError("--model is required");
  if (!fs::exists(o.model)) throw DataError("model bundle not found: " + o.model);
  return load_model(o.model);
}

int cmd_explain(Options& o) {
  auto [model, saved] = load_bundle(o);
  Manifest manifest = saved;
  manifest.command = "explain";
  const fs::path out(o.out);
  write_text(out / "rules.txt", export_rules(model, manifest));
  if (!o.data.empty()) {
    const Dataset data = load_dataset(o);
    manifest.dataset = data.name;
    manifest.fingerprint = fingerprint(data);
    const auto e = explain_model(model, data.view(), model.feature_stddev, o.pipeline.seed);
    json j;
    j["manifest"] = manifest.to_json();
    j["explainability"] = explainability_json(e);
    write_text(out / "explainability.json", j.dump(2) + "\n");
    write_text(out / "explanations.tsv", explain_rows(model, data.view(), manifest));
    std::printf("classes covered %.3f, dataset coverage %.3f, range fraction %.3f\n", e.coverage.classes_covered,
                e.coverage.dataset_coverage, e.coverage.range_fraction);
    for (std::size_t i = 0; i < e.thresholds.size(); ++i)
      std::printf("active rules @ %.2f: %.2f\n", e.thresholds[i], e.active_rules[i]);
    for (std::size_t i = 0; i < e.noise_deltas.size(); ++i)
      std::printf("noise %.0f%%: %.2f%% mean change\n", 100 * e.noise_levels[i], e.noise_deltas[i]);
  }
  std::printf("%zu rules, written to %s\n", model.rules.size(), (out / "rules.txt").string().c_str());
  return kOk;
}

int cmd_predict(Options& o) {
  auto [model, saved] = load_bundle(o);
  const Dataset data = load_dataset(o);
  if (data.feature_names != model.feature_names) throw DataError("data columns do not match the model's features");
  Manifest manifest = saved;
  manifest.command = "predict";
  manifest.dataset = data.name;
  manifest.fingerprint = fingerprint(data);
  const auto batch = predict_batch(model, data.view());
  write_text(fs::path(o.out) / "predictions.tsv", predictions_tsv(batch, data.targets, manifest));
  std::printf("%zu rows predicted, %zu via fallback\n", batch.predictions.size(), batch.fallback_count());
  if (batch.rmse) print_line("RMSE %.4f\n", *batch.rmse);
  return kOk;
}

int cmd_baseline(Options& o) {
  const Dataset data = load_dataset(o);
  if (!(o.holdout > 0.0)) throw ConfigError("baseline needs a holdout fraction > 0");
  const auto [train, test] = split_holdout(data, o.holdout, o.pipeline.seed);
  const Manifest manifest = manifest_for(o, "baseline", data);
  const auto result = train_model(train, o.pipeline);
  const auto cmp = compare_with_mamdani(result.model, train.view(), test.view());
  const fs::path out(o.out);
  write_text(out / "scatter_hybrid.tsv", scatter_tsv(cmp.hybrid, test.targets, manifest));
  write_text(out / "scatter_mamdani.tsv", scatter_tsv(cmp.mamdani, test.targets, manifest));
  write_text(out / "residuals_hybrid.tsv", residuals_tsv(cmp.hybrid, test.targets, manifest));
  write_text(out / "residuals_mamdani.tsv", residuals_tsv(cmp.mamdani, test.targets, manifest));
  const auto e = explain_model(result.model, test.view(), result.model.feature_stddev, o.pipeline.seed);
  json j;
  j["manifest"] = manifest.to_json();
  j["rules"] = result.model.rules.size();
  j["hybrid_rmse"] = cmp.hybrid_rmse;
  j["mamdani_rmse"] = cmp.mamdani_rmse;
  j["single_rule_rows"] = cmp.single_rule_rows;
  j["single_rule_distinct_mamdani_values"] = cmp.single_rule_distinct;
  j["output_sets"] = cmp.output_sets;
  j["explainability"] = explainability_json(e);
  if (auto refs = references_for(data.name)) {
    j["references"] = json::array();
    for (const auto& r : *refs) j["references"].push_back({{"method", r.method}, {"rmse", r.rmse}});
  }
  write_text(out / "baseline.json", j.dump(2) + "\n");
  std::printf("rules %zu\n", result.model.rules.size());
  print_line("hybrid RMSE  %.4f\n", cmp.hybrid_rmse);
  print_line("Mamdani RMSE %.4f\n", cmp.mamdani_rmse);
  std::printf("single-rule rows %zu, distinct Mamdani values on them %zu (output sets %zu)\n", cmp.single_rule_rows,
              cmp.single_rule_distinct, cmp.output_sets);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid interval type-2 Mamdani/TSK fuzzy regression"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value (TOML/INI) config file; command-line flags override it");
  Options o;
  add_options(app, o);
  app.fallthrough();
  auto* train = app.add_subcommand("train", "Train a model and write the bundle, rules and ACO trace");
  auto* crossval = app.add_subcommand("crossval", "Cross-validate on KEEL folds and compare with reference RMSEs");
  auto* explain = app.add_subcommand("explain", "Export rules and explainability metrics of a saved model");
  auto* predict = app.add_subcommand("predict", "Predict rows with a saved model");
  auto* baseline = app.add_subcommand("baseline", "Compare the hybrid model with its Mamdani counterpart");
  for (auto* s : {train, crossval, explain, predict, baseline}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    finish_config(o);
    if (*train) return cmd_train(o);
    if (*crossval) return cmd_crossval(o);
    if (*explain) return cmd_explain(o);
    if (*predict) return cmd_predict(o);
    if (*baseline) return cmd_baseline(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const InvalidInput& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return kTraining;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
