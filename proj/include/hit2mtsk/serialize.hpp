#pragma once

// Persistence: JSON model bundles, partition text files, and the tabular
// artifacts (rule export, ACO trace, predictions, plot data). Every artifact
// carries the run manifest so it can be traced back to config, seed and data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hit2mtsk/evalx.hpp"
#include "hit2mtsk/inference.hpp"
#include "hit2mtsk/pipeline.hpp"

namespace hit2 {

using json = nlohmann::ordered_json;

inline constexpr int kBundleFormat = 1;

inline json config_to_json(const PipelineConfig& c) {
  json j;
  j["degree"] = c.generation.degree;
  j["sets"] = c.partition.num_sets;
  j["fou_width"] = c.partition.fou_width;
  j["fou_scale"] = c.partition.fou_scale;
  j["max_antecedent"] = c.generation.max_antecedent;
  j["max_candidates"] = c.generation.max_candidates;
  j["dominance_threshold"] = c.generation.dominance_threshold;
  j["min_coverage"] = c.generation.min_coverage;
  j["ridge"] = c.generation.fit.ridge;
  j["weighted_fit"] = c.generation.fit.weighted;
  j["tnorm"] = std::string(to_string(c.generation.tnorm));
  j["reduction"] = std::string(to_string(c.reduction));
  j["validation_fraction"] = c.validation_fraction;
  j["ants"] = c.aco.num_ants;
  j["iterations"] = c.aco.num_iterations;
  j["alpha"] = c.aco.alpha;
  j["beta"] = c.aco.beta;
  j["rho"] = c.aco.rho;
  j["q"] = c.aco.q;
  j["initial_pheromone"] = c.aco.initial_pheromone;
  j["min_rules"] = c.aco.min_subset;
  j["max_rules"] = c.aco.max_subset;
  j["patience"] = c.aco.patience;
  j["seed"] = c.seed;
  return j;
}

inline PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  try {
    c.generation.degree = j.at("degree").get<unsigned>();
    c.partition.num_sets = j.at("sets").get<std::size_t>();
    c.partition.fou_width = j.at("fou_width").get<double>();
    c.partition.fou_scale = j.at("fou_scale").get<double>();
    c.generation.max_antecedent = j.at("max_antecedent").get<std::size_t>();
    c.generation.max_candidates = j.at("max_candidates").get<std::size_t>();
    c.generation.dominance_threshold = j.at("dominance_threshold").get<double>();
    c.generation.min_coverage = j.at("min_coverage").get<double>();
    c.generation.fit.ridge = j.at("ridge").get<double>();
    c.generation.fit.weighted = j.at("weighted_fit").get<bool>();
    c.generation.tnorm = parse_tnorm(j.at("tnorm").get<std::string>());
    c.reduction = parse_weight_reduction(j.at("reduction").get<std::string>());
    c.validation_fraction = j.at("validation_fraction").get<double>();
    c.aco.num_ants = j.at("ants").get<std::size_t>();
    c.aco.num_iterations = j.at("iterations").get<std::size_t>();
    c.aco.alpha = j.at("alpha").get<double>();
    c.aco.beta = j.at("beta").get<double>();
    c.aco.rho = j.at("rho").get<double>();
    c.aco.q = j.at("q").get<double>();
    c.aco.initial_pheromone = j.at("initial_pheromone").get<double>();
    c.aco.min_subset = j.at("min_rules").get<std::size_t>();
    c.aco.max_subset = j.at("max_rules").get<std::size_t>();
    c.aco.patience = j.at("patience").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration record: ") + e.what());
  }
  return c;
}

struct Manifest {
  PipelineConfig config;
  std::string dataset;
  std::string fingerprint;
  std::string command;

  json to_json() const {
    json j;
    j["command"] = command;
    j["dataset"] = dataset;
    j["fingerprint"] = fingerprint;
    j["seed"] = config.seed;
    j["config"] = config_to_json(config);
    return j;
  }
  static Manifest from_json(const json& j) {
    Manifest m;
    try {
      m.command = j.at("command").get<std::string>();
      m.dataset = j.at("dataset").get<std::string>();
      m.fingerprint = j.at("fingerprint").get<std::string>();
    } catch (const json::exception& e) {
      throw DataError(std::string("bad manifest: ") + e.what());
    }
    m.config = config_from_json(j.at("config"));
    return m;
  }
  // Comment header for text artifacts.
  std::string header(char comment = '#') const {
    return std::string(1, comment) + " manifest " + to_json().dump() + "\n";
  }
};

namespace detail {

inline json trapezoid_json(const Trapezoid& t) { return json::array({t.a, t.b, t.c, t.d}); }

inline Trapezoid trapezoid_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

inline json partition_json(const Partition& p) {
  json j;
  j["variable"] = p.variable;
  j["domain"] = json::array({p.domain_min, p.domain_max});
  j["sets"] = json::array();
  for (const auto& s : p.sets) {
    j["sets"].push_back({{"name", s.name()},
                         {"shape", std::string(to_string(s.shape()))},
                         {"upper", trapezoid_json(s.upper_params())},
                         {"lower", trapezoid_json(s.lower_params())},
                         {"fou_scale", s.fou_scale()}});
  }
  return j;
}

inline Partition partition_from(const json& j) {
  Partition p;
  p.variable = j.at("variable").get<std::string>();
  p.domain_min = j.at("domain").at(0).get<double>();
  p.domain_max = j.at("domain").at(1).get<double>();
  for (const auto& s : j.at("sets"))
    p.sets.emplace_back(s.at("name").get<std::string>(), parse_shape(s.at("shape").get<std::string>()),
                        trapezoid_from(s.at("upper")), trapezoid_from(s.at("lower")), s.at("fou_scale").get<double>());
  return p;
}

}  // namespace detail

inline json model_to_json(const Model& model, const Manifest& manifest) {
  if (!model.trained()) throw StateError("cannot save an untrained model");
  json j;
  j["format"] = kBundleFormat;
  j["manifest"] = manifest.to_json();
  j["features"] = model.feature_names;
  j["target"] = model.target_name;
  j["tnorm"] = std::string(to_string(model.tnorm));
  j["reduction"] = std::string(to_string(model.reduction));
  j["fallback"] = model.fallback_value;
  j["feature_stddev"] = model.feature_stddev;
  j["feature_partitions"] = json::array();
  for (const auto& p : model.feature_partitions)
    j["feature_partitions"].push_back(p ? detail::partition_json(*p) : json(nullptr));
  j["target_partition"] = detail::partition_json(*model.target_partition);
  j["rules"] = json::array();
  for (const auto& r : model.rules) {
    json rule;
    json ante = json::array();
    for (const auto& c : r.antecedent) ante.push_back(json::array({c.feature, c.term}));
    rule["antecedent"] = ante;
    rule["consequent"] = r.consequent_term;
    const auto& poly = r.consequent_fn;
    rule["polynomial"] = {{"variables", poly.variables()},
                          {"degree", poly.degree()},
                          {"center", poly.center()},
                          {"scale", poly.scale()},
                          {"coefficients", poly.coefficients()}};
    rule["clamp"] = json::array({r.clamp_lo, r.clamp_hi});
    rule["fuzzy_dominance"] = json::array({r.fuzzy_dominance.lower, r.fuzzy_dominance.upper});
    rule["error_dominance"] = r.error_dominance;
    j["rules"].push_back(std::move(rule));
  }
  return j;
}

inline std::pair<Model, Manifest> model_from_json(const json& j) {
  Model m;
  Manifest manifest;
  try {
    if (j.at("format").get<int>() != kBundleFormat) throw DataError("unsupported model bundle format");
    manifest = Manifest::from_json(j.at("manifest"));
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    m.target_name = j.at("target").get<std::string>();
    m.tnorm = parse_tnorm(j.at("tnorm").get<std::string>());
    m.reduction = parse_weight_reduction(j.at("reduction").get<std::string>());
    m.fallback_value = j.at("fallback").get<double>();
    m.feature_stddev = j.at("feature_stddev").get<std::vector<double>>();
    for (const auto& p : j.at("feature_partitions"))
      m.feature_partitions.push_back(p.is_null() ? std::nullopt : std::optional<Partition>(detail::partition_from(p)));
    if (m.feature_partitions.size() != m.feature_names.size()) throw DataError("partition count does not match features");
    m.target_partition = detail::partition_from(j.at("target_partition"));
    for (const auto& r : j.at("rules")) {
      std::vector<Clause> clauses;
      for (const auto& c : r.at("antecedent")) {
        const auto f = c.at(0).get<std::size_t>();
        const auto t = c.at(1).get<std::size_t>();
        if (f >= m.feature_partitions.size() || !m.feature_partitions[f] || t >= m.feature_partitions[f]->size())
          throw DataError("rule refers to an unknown fuzzy set");
        clauses.push_back({f, t, m.feature_partitions[f]->sets[t]});
      }
      const auto term = r.at("consequent").get<std::size_t>();
      if (term >= m.target_partition->size()) throw DataError("rule refers to an unknown output set");
      HybridRule rule(std::move(clauses), term, m.target_partition->sets[term]);
      const auto& p = r.at("polynomial");
      rule.consequent_fn = Polynomial(p.at("variables").get<std::vector<std::size_t>>(), p.at("degree").get<unsigned>(),
                                      p.at("coefficients").get<std::vector<double>>(),
                                      p.at("center").get<std::vector<double>>(), p.at("scale").get<std::vector<double>>());
      rule.clamp_lo = r.at("clamp").at(0).get<double>();
      rule.clamp_hi = r.at("clamp").at(1).get<double>();
      rule.fuzzy_dominance = {r.at("fuzzy_dominance").at(0).get<double>(), r.at("fuzzy_dominance").at(1).get<double>()};
      rule.error_dominance = r.at("error_dominance").get<double>();
      m.rules.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model bundle: ") + e.what());
  } catch (const InvalidInput& e) {
    throw DataError(std::string("malformed model bundle: ") + e.what());
  }
  if (m.rules.empty()) throw DataError("model bundle contains no rules");
  return {std::move(m), std::move(manifest)};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

inline void save_model(const std::filesystem::path& path, const Model& model, const Manifest& manifest) {
  write_text(path, model_to_json(model, manifest).dump(2) + "\n");
}

inline std::pair<Model, Manifest> load_model(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Partition text format:
//   partition <variable> <min> <max>
//   set <name> <shape> a b c d la lb lc ld fou_scale
//   end
inline std::string partitions_to_text(std::span<const Partition> parts) {
  std::ostringstream os;
  for (const auto& p : parts) {
    os << "partition " << p.variable << ' ' << fmt17(p.domain_min) << ' ' << fmt17(p.domain_max) << '\n';
    for (const auto& s : p.sets) {
      const auto& u = s.upper_params();
      const auto& l = s.lower_params();
      os << "set " << s.name() << ' ' << to_string(s.shape());
      for (double v : {u.a, u.b, u.c, u.d, l.a, l.b, l.c, l.d, s.fou_scale()}) os << ' ' << fmt17(v);
      os << '\n';
    }
    os << "end\n";
  }
  return os.str();
}

inline std::vector<Partition> partitions_from_text(std::string_view text) {
  std::vector<Partition> out;
  std::optional<Partition> cur;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [&](const std::string& why) { throw DataError("partition text line " + std::to_string(line_no) + ": " + why); };
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ls{std::string(t)};
    std::string kw;
    ls >> kw;
    if (kw == "partition") {
      if (cur) fail("nested partition");
      cur.emplace();
      if (!(ls >> cur->variable >> cur->domain_min >> cur->domain_max)) fail("expected variable, min, max");
    } else if (kw == "set") {
      if (!cur) fail("set outside partition");
      std::string name, shape;
      double v[9];
      if (!(ls >> name >> shape)) fail("expected set name and shape");
      for (double& x : v)
        if (!(ls >> x)) fail("expected 9 numbers");
      try {
        cur->sets.emplace_back(name, parse_shape(shape), Trapezoid{v[0], v[1], v[2], v[3]},
                               Trapezoid{v[4], v[5], v[6], v[7]}, v[8]);
      } catch (const InvalidInput& e) {
        fail(e.what());
      }
    } else if (kw == "end") {
      if (!cur) fail("end without partition");
      out.push_back(std::move(*cur));
      cur.reset();
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  if (cur) throw DataError("partition text: missing 'end'");
  return out;
}

// Human-readable rule listing: linguistic form, raw-unit polynomial, clamp
// bounds and both dominance measures.
inline std::string export_rules(const Model& model, const Manifest& manifest) {
  std::ostringstream os;
  os << manifest.header();
  for (std::size_t i = 0; i < model.rules.size(); ++i) {
    const auto& r = model.rules[i];
    char dom[96];
    std::snprintf(dom, sizeof dom, "fuzzy dominance [%.3f, %.3f]  error dominance %.3f", r.fuzzy_dominance.lower,
                  r.fuzzy_dominance.upper, r.error_dominance);
    os << "Rule " << (i + 1) << ": " << linguistic(r, model.feature_names, model.target_name) << '\n'
       << "  " << render_polynomial(r.consequent_fn, model.feature_names) << '\n'
       << "  output clamped to [" << format_number(r.clamp_lo) << ", " << format_number(r.clamp_hi) << "]\n"
       << "  " << dom << "\n\n";
  }
  return os.str();
}

inline std::string trace_tsv(const AcoResult& aco, const Manifest& manifest) {
  std::ostringstream os;
  os << manifest.header() << "iteration\tbest_rmse\n";
  for (const auto& t : aco.trace) os << t.iteration << '\t' << fmt17(t.best_rmse) << '\n';
  return os.str();
}

inline std::string predictions_tsv(const BatchResult& batch, std::span<const double> targets, const Manifest& manifest) {
  std::ostringstream os;
  os << manifest.header() << "prediction\ttarget\tfired_rules\tfallback\n";
  for (std::size_t i = 0; i < batch.predictions.size(); ++i) {
    const auto& p = batch.predictions[i];
    os << fmt17(p.value) << '\t' << (i < targets.size() ? fmt17(targets[i]) : std::string("NA")) << '\t'
       << p.fired.size() << '\t' << (p.fallback_used ? 1 : 0) << '\n';
  }
  return os.str();
}

// (actual, predicted) pairs for scatter plots.
inline std::string scatter_tsv(const BatchResult& batch, std::span<const double> targets, const Manifest& manifest) {
  std::ostringstream os;
  os << manifest.header() << "actual\tpredicted\n";
  for (std::size_t i = 0; i < batch.predictions.size() && i < targets.size(); ++i)
    os << fmt17(targets[i]) << '\t' << fmt17(batch.predictions[i].value) << '\n';
  return os.str();
}

inline std::string residuals_tsv(const BatchResult& batch, std::span<const double> targets, const Manifest& manifest) {
  std::ostringstream os;
  os << manifest.header() << "residual\n";
  for (std::size_t i = 0; i < batch.predictions.size() && i < targets.size(); ++i)
    os << fmt17(targets[i] - batch.predictions[i].value) << '\n';
  return os.str();
}

// Per-row explanation: fired rules with firing interval, output and weight.
inline std::string explain_rows(const Model& model, const DataView& rows, const Manifest& manifest) {
  std::ostringstream os;
  os << manifest.header() << "row\trule\tfiring_lower\tfiring_upper\toutput\tweight\tprediction\n";
  for (std::size_t p = 0; p < rows.rows(); ++p) {
    const auto pred = predict(model, rows.row(p));
    if (pred.fired.empty()) os << p << "\tfallback\tNA\tNA\tNA\tNA\t" << fmt17(pred.value) << '\n';
    for (const auto& f : pred.fired)
      os << p << '\t' << (f.rule + 1) << '\t' << fmt17(f.firing.lower) << '\t' << fmt17(f.firing.upper) << '\t'
         << fmt17(f.output) << '\t' << fmt17(f.weight) << '\t' << fmt17(pred.value) << '\n';
  }
  return os.str();
}

inline json explainability_json(const Explainability& e) {
  json j;
  j["classes_covered"] = e.coverage.classes_covered;
  j["dataset_coverage"] = e.coverage.dataset_coverage;
  j["prediction_range_fraction"] = e.coverage.range_fraction;
  j["rule_count"] = e.rule_count;
  j["mean_antecedents"] = e.mean_antecedents;
  j["active_rules"] = json::array();
  for (std::size_t i = 0; i < e.thresholds.size(); ++i)
    j["active_rules"].push_back({{"threshold", e.thresholds[i]}, {"mean_rules", e.active_rules[i]}});
  j["noise"] = json::array();
  for (std::size_t i = 0; i < e.noise_deltas.size(); ++i)
    j["noise"].push_back({{"level", e.noise_levels[i]}, {"mean_change_percent", e.noise_deltas[i]}});
  return j;
}

inline json report_json(const EvalReport& r, const Manifest& manifest) {
  json j;
  j["manifest"] = manifest.to_json();
  j["dataset"] = r.dataset;
  j["variant"] = r.variant;
  j["folds"] = json::array();
  for (const auto& f : r.folds) {
    json fj{{"fold", f.fold_index}, {"test_rows", f.test_rows}};
    if (f.rmse) {
      fj["rmse"] = *f.rmse;
      fj["rules"] = f.rules;
      fj["fallback_rows"] = f.fallback_count;
    } else {
      fj["failed"] = f.error;
    }
    j["folds"].push_back(std::move(fj));
  }
  j["mean_rmse"] = r.mean_rmse ? json(*r.mean_rmse) : json(nullptr);
  j["incomplete"] = r.incomplete;
  j["fallback_rate"] = r.fallback_rate;
  j["references"] = json::array();
  for (const auto& ref : r.references) j["references"].push_back({{"method", ref.method}, {"rmse", ref.rmse}});
  if (r.explainability) j["explainability"] = explainability_json(*r.explainability);
  return j;
}

}  // namespace hit2
