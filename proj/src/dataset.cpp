#include "goodset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>

#include "goodset/error.hpp"
#include "goodset/rng.hpp"

namespace goodset {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ' || f.back() == '\t')) f.pop_back();
    std::size_t b = 0;
    while (b < f.size() && (f[b] == ' ' || f[b] == '\t')) ++b;
    f.erase(0, b);
  }
  return out;
}

double parse_number(const std::string& s, std::size_t row, const std::string& col) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    fail(Errc::domain, "row " + std::to_string(row) + ": malformed numeric in column '" + col +
                           "': '" + s + "'");
  if (!std::isfinite(v))
    fail(Errc::domain, "row " + std::to_string(row) + ": non-finite value in column '" + col + "'");
  return v;
}

int parse_binary(const std::string& s, std::size_t row, const std::string& col) {
  double v = parse_number(s, row, col);
  if (v != 0.0 && v != 1.0)
    fail(Errc::domain,
         "row " + std::to_string(row) + ": column '" + col + "' must be 0 or 1, got '" + s + "'");
  return static_cast<int>(v);
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) fail(Errc::schema, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

Dataset::Dataset(LabelMode mode, std::vector<std::string> feature_names, Matrix features,
                 std::vector<int> attribute, std::vector<int> decision,
                 std::vector<double> outcomes, std::vector<double> benchmark)
    : mode_(mode),
      names_(std::move(feature_names)),
      features_(std::move(features)),
      attribute_(std::move(attribute)),
      decision_(std::move(decision)),
      outcomes_(std::move(outcomes)),
      benchmark_(std::move(benchmark)) {
  const std::size_t n = features_.rows;
  if (n == 0) fail(Errc::size, "Dataset: needs at least one row");
  if (names_.size() != features_.cols) fail(Errc::schema, "Dataset: feature name/column mismatch");
  if (attribute_.size() != n || decision_.size() != n || outcomes_.size() != n)
    fail(Errc::size, "Dataset: column length mismatch");
  if (!benchmark_.empty() && benchmark_.size() != n)
    fail(Errc::size, "Dataset: benchmark column length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (attribute_[i] != 0 && attribute_[i] != 1) fail(Errc::domain, "Dataset: attribute not 0/1");
    if (decision_[i] != 0 && decision_[i] != 1) fail(Errc::domain, "Dataset: decision not 0/1");
    const bool have_y = !std::isnan(outcomes_[i]);
    if (mode_ == LabelMode::full) {
      if (!have_y) fail(Errc::consistency, "Dataset: row " + std::to_string(i) +
                                               " has no outcome in full-label mode");
    } else {
      if (decision_[i] == 1 && !have_y)
        fail(Errc::consistency,
             "Dataset: row " + std::to_string(i) + " has d=1 but no outcome (selective mode)");
      if (decision_[i] == 0 && have_y)
        fail(Errc::consistency,
             "Dataset: row " + std::to_string(i) + " has d=0 but an outcome (selective mode)");
    }
    if (have_y && !(outcomes_[i] >= 0.0 && outcomes_[i] <= 1.0))
      fail(Errc::domain, "Dataset: row " + std::to_string(i) + " outcome outside [0,1]");
  }
}

double Dataset::outcome(std::size_t i) const {
  if (!labelled(i))
    fail(Errc::missing_label, "outcome masked for row " + std::to_string(i) + " (d=0)");
  return outcomes_[i];
}

std::vector<double> Dataset::labelled_outcomes() const {
  std::vector<double> out;
  out.reserve(n());
  for (std::size_t i = 0; i < n(); ++i)
    if (labelled(i)) out.push_back(outcomes_[i]);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  if (rows.empty()) fail(Errc::size, "Dataset::subset: empty row selection");
  Matrix f(rows.size(), features_.cols);
  std::vector<int> a(rows.size()), d(rows.size());
  std::vector<double> y(rows.size());
  std::vector<double> b;
  if (!benchmark_.empty()) b.resize(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    if (i >= n()) fail(Errc::size, "Dataset::subset: row index out of range");
    std::copy(features_.row(i).begin(), features_.row(i).end(), f.row(k).begin());
    a[k] = attribute_[i];
    d[k] = decision_[i];
    y[k] = outcomes_[i];
    if (!b.empty()) b[k] = benchmark_[i];
  }
  return Dataset(mode_, names_, std::move(f), std::move(a), std::move(d), std::move(y),
                 std::move(b));
}

Dataset load_csv(const std::string& path, const ColumnSchema& schema) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail(Errc::io, "empty file '" + path + "'");
  const auto header = split_fields(line);

  if (schema.attribute.empty()) fail(Errc::schema, "schema: attribute column not named");
  if (schema.mode == LabelMode::selective && schema.decision.empty())
    fail(Errc::schema, "schema: selective mode requires a decision column");
  if (schema.outcome.empty()) fail(Errc::schema, "schema: outcome column not named");

  // An empty feature list selects every column not bound to another role.
  std::vector<std::string> feature_names = schema.features;
  if (feature_names.empty() && schema.onehot.empty()) {
    for (const auto& col : header) {
      if (col == schema.attribute || col == schema.decision || col == schema.outcome ||
          col == schema.benchmark || col == "_masked")
        continue;
      feature_names.push_back(col);
    }
    if (feature_names.empty()) fail(Errc::schema, "schema: no feature columns available");
  }

  std::vector<std::size_t> feat_idx;
  for (const auto& name : feature_names) feat_idx.push_back(find_column(header, name));
  std::vector<std::size_t> onehot_idx;
  for (const auto& name : schema.onehot) onehot_idx.push_back(find_column(header, name));
  const std::size_t a_idx = find_column(header, schema.attribute);
  const std::size_t y_idx = find_column(header, schema.outcome);
  std::optional<std::size_t> d_idx, b_idx;
  if (!schema.decision.empty()) d_idx = find_column(header, schema.decision);
  if (!schema.benchmark.empty()) b_idx = find_column(header, schema.benchmark);

  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size())
      fail(Errc::schema, "row " + std::to_string(lineno - 1) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) fail(Errc::size, "no data rows in '" + path + "'");
  const std::size_t n = rows.size();

  // One-hot expansion: one indicator per distinct raw value, sorted for determinism.
  std::vector<std::vector<std::string>> onehot_values(onehot_idx.size());
  for (std::size_t c = 0; c < onehot_idx.size(); ++c) {
    std::map<std::string, int> seen;
    for (const auto& r : rows) seen[r[onehot_idx[c]]] = 1;
    for (const auto& [v, _] : seen) onehot_values[c].push_back(v);
  }

  std::vector<std::string> names = feature_names;
  for (std::size_t c = 0; c < onehot_idx.size(); ++c)
    for (const auto& v : onehot_values[c]) names.push_back(schema.onehot[c] + "=" + v);

  Matrix X(n, names.size());
  std::vector<int> a(n), d(n, 1);
  std::vector<double> y(n), b;
  if (b_idx) b.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = rows[i];
    std::size_t col = 0;
    for (std::size_t c = 0; c < feat_idx.size(); ++c)
      X.at(i, col++) = parse_number(r[feat_idx[c]], i, feature_names[c]);
    for (std::size_t c = 0; c < onehot_idx.size(); ++c)
      for (const auto& v : onehot_values[c]) X.at(i, col++) = (r[onehot_idx[c]] == v) ? 1.0 : 0.0;
    a[i] = parse_binary(r[a_idx], i, schema.attribute);
    if (d_idx) d[i] = parse_binary(r[*d_idx], i, schema.decision);
    if (b_idx) b[i] = parse_number(r[*b_idx], i, schema.benchmark);

    const std::string& ys = r[y_idx];
    if (ys.empty()) {
      if (schema.mode == LabelMode::full)
        fail(Errc::consistency, "row " + std::to_string(i) + ": missing outcome in full mode");
      if (d[i] == 1)
        fail(Errc::consistency, "row " + std::to_string(i) + ": d=1 but outcome missing");
      y[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      const double v = parse_number(ys, i, schema.outcome);
      if (!(v >= 0.0 && v <= 1.0))
        fail(Errc::domain, "row " + std::to_string(i) + ": outcome " + ys + " outside [0,1]");
      if (schema.mode == LabelMode::selective && d[i] == 0)
        fail(Errc::consistency, "row " + std::to_string(i) + ": d=0 but outcome present");
      y[i] = v;
    }
  }

  return Dataset(schema.mode, std::move(names), std::move(X), std::move(a), std::move(d),
                 std::move(y), std::move(b));
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot write '" + path + "'");
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (const auto& name : ds.names_) out << name << ",";
  out << "a,";
  if (ds.mode_ == LabelMode::selective) out << "d,";
  out << "y";
  if (ds.mode_ == LabelMode::selective) out << ",_masked";
  if (!ds.benchmark_.empty()) out << ",benchmark";
  out << "\n";
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (std::size_t j = 0; j < ds.features_.cols; ++j) {
      put(ds.features_.at(i, j));
      out << ",";
    }
    out << ds.attribute_[i] << ",";
    if (ds.mode_ == LabelMode::selective) out << ds.decision_[i] << ",";
    if (std::isnan(ds.outcomes_[i])) {
      // masked
    } else {
      put(ds.outcomes_[i]);
    }
    if (ds.mode_ == LabelMode::selective) out << "," << (std::isnan(ds.outcomes_[i]) ? 1 : 0);
    if (!ds.benchmark_.empty()) {
      out << ",";
      put(ds.benchmark_[i]);
    }
    out << "\n";
  }
  if (!out) fail(Errc::io, "write failed for '" + path + "'");
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (ds.n() < 2) fail(Errc::size, "split: need at least 2 rows");
  if (!(fraction > 0.0 && fraction < 1.0)) fail(Errc::domain, "split: fraction must be in (0,1)");
  std::vector<std::size_t> idx(ds.n());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);
  auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.n())));
  k = std::clamp<std::size_t>(k, 1, ds.n() - 1);
  std::vector<std::size_t> first(idx.begin(), idx.begin() + k);
  std::vector<std::size_t> second(idx.begin() + k, idx.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {ds.subset(first), ds.subset(second)};
}

}  // namespace goodset
