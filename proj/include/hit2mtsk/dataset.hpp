#pragma once

// Numeric datasets: KEEL .dat and CSV ingestion, holdout and k-fold splits,
// and a platform-stable content fingerprint.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <regex>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hit2mtsk/error.hpp"
#include "hit2mtsk/rule.hpp"

namespace hit2 {

struct Dataset {
  std::string name;
  std::vector<std::string> feature_names;
  std::string target_name;
  std::vector<double> values;  // row-major, rows() x num_features()
  std::vector<double> targets;
  // Declared [lo, hi] per feature then target (KEEL headers); empty when unknown.
  std::vector<std::pair<double, double>> declared_ranges;

  std::size_t rows() const noexcept { return targets.size(); }
  std::size_t num_features() const noexcept { return feature_names.size(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * num_features(), num_features());
  }

  std::vector<double> column(std::size_t feature) const {
    std::vector<double> out(rows());
    for (std::size_t i = 0; i < rows(); ++i) out[i] = values[i * num_features() + feature];
    return out;
  }

  DataView view() const { return DataView{values, num_features(), targets}; }

  Dataset subset(std::span<const std::size_t> indices) const {
    Dataset out{name, feature_names, target_name, {}, {}, declared_ranges};
    out.values.reserve(indices.size() * num_features());
    out.targets.reserve(indices.size());
    for (std::size_t i : indices) {
      const auto r = row(i);
      out.values.insert(out.values.end(), r.begin(), r.end());
      out.targets.push_back(targets[i]);
    }
    return out;
  }

  void append(const Dataset& other) {
    if (other.feature_names != feature_names) throw DataError("cannot append datasets with different columns");
    values.insert(values.end(), other.values.begin(), other.values.end());
    targets.insert(targets.end(), other.targets.begin(), other.targets.end());
  }

  void validate() const {
    if (rows() == 0) throw DataError("dataset '" + name + "' has no rows");
    if (values.size() != rows() * num_features()) throw DataError("dataset '" + name + "' has ragged rows");
    for (double v : values)
      if (!std::isfinite(v)) throw DataError("dataset '" + name + "' contains a non-finite value");
    for (double v : targets)
      if (!std::isfinite(v)) throw DataError("dataset '" + name + "' contains a non-finite target");
  }
};

struct FoldSplit {
  std::size_t fold_index = 1;
  Dataset train;
  Dataset test;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

inline bool is_missing_token(std::string_view s) { return s == "?" || s == "<null>" || s.empty(); }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 64-bit FNV-1a.
class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void text(std::string_view s) {
    const std::uint64_t len = s.size();
    u64(len);
    bytes(s.data(), s.size());
  }
  void u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t value() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

// Content hash over column names and IEEE-754 bit patterns (little-endian),
// identical on every platform for identical values.
inline std::string fingerprint(const Dataset& data) {
  detail::Fnv1a h;
  h.u64(data.feature_names.size());
  for (const auto& n : data.feature_names) h.text(n);
  h.text(data.target_name);
  h.u64(data.rows());
  for (double v : data.values) h.f64(v);
  for (double v : data.targets) h.f64(v);
  return detail::hex64(h.value());
}

inline Dataset parse_keel(std::string_view text, const std::string& source = "<memory>") {
  struct Attribute {
    std::string name;
    std::optional<std::pair<double, double>> range;
  };
  std::vector<Attribute> attributes;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string relation;
  bool in_data = false;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;

  auto fail = [&](const std::string& msg) -> DataError {
    return DataError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  auto names_list = [](std::string_view rest) {
    std::vector<std::string> out;
    for (auto& n : detail::split(rest, ','))
      if (!n.empty()) out.push_back(n);
    return out;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '%') continue;

    if (!in_data) {
      if (line.front() != '@') throw fail("expected a header line beginning with '@'");
      const auto space = line.find_first_of(" \t");
      const auto keyword = detail::lower(line.substr(0, space));
      const auto rest = space == std::string_view::npos ? std::string_view{} : detail::trim(line.substr(space));
      if (keyword == "@relation") {
        relation = std::string(rest);
      } else if (keyword == "@attribute") {
        const auto name_end = rest.find_first_of(" \t");
        if (name_end == std::string_view::npos) throw fail("attribute declaration without a type");
        Attribute attr{std::string(rest.substr(0, name_end)), std::nullopt};
        const auto decl = detail::trim(rest.substr(name_end));
        const auto type = detail::lower(decl.substr(0, decl.find_first_of(" \t[")));
        if (type != "real" && type != "integer" && type != "numeric")
          throw fail("attribute '" + attr.name + "' has unsupported type '" + type + "'");
        const auto open = decl.find('[');
        const auto close = decl.find(']');
        if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
          const auto parts = detail::split(decl.substr(open + 1, close - open - 1), ',');
          if (parts.size() == 2) {
            const auto lo = detail::parse_double(parts[0]);
            const auto hi = detail::parse_double(parts[1]);
            if (!lo || !hi) throw fail("attribute '" + attr.name + "' has a malformed range");
            attr.range = std::make_pair(*lo, *hi);
          }
        }
        attributes.push_back(std::move(attr));
      } else if (keyword == "@inputs" || keyword == "@input") {
        inputs = names_list(rest);
      } else if (keyword == "@outputs" || keyword == "@output") {
        outputs = names_list(rest);
      } else if (keyword == "@data") {
        in_data = true;
      } else {
        throw fail("unknown header keyword '" + keyword + "'");
      }
      continue;
    }

    const auto cells = detail::split(line, ',');
    if (cells.size() != attributes.size())
      throw fail("expected " + std::to_string(attributes.size()) + " values, found " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (detail::is_missing_token(cells[c]))
        throw fail("missing value in row " + std::to_string(rows.size() + 1) + ", column '" + attributes[c].name + "'");
      const auto v = detail::parse_double(cells[c]);
      if (!v) throw fail("non-numeric value '" + cells[c] + "' in column '" + attributes[c].name + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }

  if (!in_data) throw DataError(source + ": missing @data marker");
  if (outputs.size() != 1) throw DataError(source + ": exactly one @outputs attribute must be declared");
  auto index_of = [&](const std::string& n) -> std::size_t {
    for (std::size_t i = 0; i < attributes.size(); ++i)
      if (attributes[i].name == n) return i;
    throw DataError(source + ": '" + n + "' is not a declared attribute");
  };
  const std::size_t target = index_of(outputs.front());
  std::vector<std::size_t> feature_idx;
  if (inputs.empty()) {
    for (std::size_t i = 0; i < attributes.size(); ++i)
      if (i != target) feature_idx.push_back(i);
  } else {
    for (const auto& n : inputs) feature_idx.push_back(index_of(n));
  }

  Dataset data;
  data.name = relation.empty() ? std::filesystem::path(source).stem().string() : relation;
  data.target_name = attributes[target].name;
  bool all_ranges = attributes[target].range.has_value();
  for (std::size_t f : feature_idx) {
    data.feature_names.push_back(attributes[f].name);
    all_ranges = all_ranges && attributes[f].range.has_value();
  }
  if (all_ranges) {
    for (std::size_t f : feature_idx) data.declared_ranges.push_back(*attributes[f].range);
    data.declared_ranges.push_back(*attributes[target].range);
  }
  data.values.reserve(rows.size() * feature_idx.size());
  for (const auto& r : rows) {
    for (std::size_t f : feature_idx) data.values.push_back(r[f]);
    data.targets.push_back(r[target]);
  }
  data.validate();
  return data;
}

inline Dataset load_keel(const std::filesystem::path& path) { return parse_keel(detail::read_file(path), path.string()); }

// CSV with a header row. An empty target_column selects the last column.
inline Dataset parse_csv(std::string_view text, const std::string& target_column = {},
                         const std::string& source = "<memory>") {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    auto cells = detail::split(line, ',');
    if (header.empty()) {
      for (auto& c : cells)
        if (c.size() >= 2 && c.front() == '"' && c.back() == '"') c = c.substr(1, c.size() - 2);
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size())
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " values, found " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = detail::parse_double(cells[c]);
      if (!v)
        throw DataError(source + ":" + std::to_string(line_no) + ": non-numeric value '" + cells[c] + "' in column '" +
                        header[c] + "'");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (header.empty()) throw DataError(source + ": empty CSV file");
  if (rows.empty()) throw DataError(source + ": CSV file has a header but no rows");

  std::size_t target = header.size() - 1;
  if (!target_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), target_column);
    if (it == header.end()) throw DataError(source + ": no column named '" + target_column + "'");
    target = static_cast<std::size_t>(it - header.begin());
  }
  Dataset data;
  data.name = std::filesystem::path(source).stem().string();
  data.target_name = header[target];
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target) data.feature_names.push_back(header[c]);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c)
      if (c != target) data.values.push_back(r[c]);
    data.targets.push_back(r[target]);
  }
  data.validate();
  return data;
}

inline Dataset load_csv(const std::filesystem::path& path, const std::string& target_column = {}) {
  return parse_csv(detail::read_file(path), target_column, path.string());
}

// Tabular text output: header then one row per instance, target last,
// shortest round-trip number formatting.
inline std::string to_csv(const Dataset& data) {
  std::string out;
  for (const auto& n : data.feature_names) out += n + ",";
  out += data.target_name + "\n";
  char buf[64];
  auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
  };
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (double v : data.row(i)) {
      put(v);
      out += ',';
    }
    put(data.targets[i]);
    out += '\n';
  }
  return out;
}

// Deterministic Fisher-Yates permutation (std::shuffle's algorithm is unspecified).
inline std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

// Shuffles with the seed, then takes round(fraction * N) rows as the test part.
inline std::pair<Dataset, Dataset> split_holdout(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("holdout fraction must lie in [0, 1)");
  const auto perm = permutation(data.rows(), seed);
  const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.rows())));
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.subset(train), data.subset(test)};
}

inline std::vector<FoldSplit> make_folds(const Dataset& data, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > data.rows()) throw ConfigError("fold count must lie in [2, rows]");
  const auto perm = permutation(data.rows(), seed);
  std::vector<FoldSplit> folds;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t begin = f * data.rows() / k;
    const std::size_t end = (f + 1) * data.rows() / k;
    std::vector<std::size_t> test;
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < perm.size(); ++i) (i >= begin && i < end ? test : train).push_back(perm[i]);
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    folds.push_back({f + 1, data.subset(train), data.subset(test)});
  }
  return folds;
}

// Pre-split KEEL partitions "<name>-<k>-<i>tra.dat" / "<name>-<k>-<i>tst.dat" in a directory.
inline std::vector<FoldSplit> load_keel_folds(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
  const std::regex pattern(R"((.+)-(\d+)-(\d+)(tra|tst)\.dat)");
  std::map<std::size_t, std::pair<std::filesystem::path, std::filesystem::path>> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const auto fname = entry.path().filename().string();
    if (!std::regex_match(fname, m, pattern)) continue;
    auto& slot = files[static_cast<std::size_t>(std::stoul(m[3].str()))];
    (m[4].str() == "tra" ? slot.first : slot.second) = entry.path();
  }
  if (files.empty()) throw DataError("no KEEL fold files found in '" + dir.string() + "'");
  std::vector<FoldSplit> folds;
  for (const auto& [index, paths] : files) {
    if (paths.first.empty() || paths.second.empty())
      throw DataError("fold " + std::to_string(index) + " in '" + dir.string() + "' lacks its tra/tst pair");
    folds.push_back({index, load_keel(paths.first), load_keel(paths.second)});
  }
  return folds;
}

}  // namespace hit2
