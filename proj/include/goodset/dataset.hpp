#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "goodset/matrix.hpp"

namespace goodset {

enum class LabelMode { full, selective };

// Column-role mapping for CSV ingestion. Roles are named, never positional.
struct ColumnSchema {
  std::vector<std::string> features;  // numeric feature columns
  std::vector<std::string> onehot;    // categorical columns expanded to 0/1 indicators
  std::string attribute;              // required; values must be 0/1
  std::string decision;               // optional; required in selective mode
  std::string outcome;                // optional in selective mode rows with d=0
  std::string benchmark;              // optional external score column
  LabelMode mode = LabelMode::full;
};

// Immutable tabular sample. In selective mode the outcome is observed exactly
// where d=1; the training-facing accessor refuses to read masked labels.
class Dataset {
 public:
  Dataset(LabelMode mode, std::vector<std::string> feature_names, Matrix features,
          std::vector<int> attribute, std::vector<int> decision, std::vector<double> outcomes,
          std::vector<double> benchmark);

  LabelMode mode() const { return mode_; }
  std::size_t n() const { return features_.rows; }
  std::size_t num_features() const { return features_.cols; }

  const std::vector<std::string>& feature_names() const { return names_; }
  const Matrix& features() const { return features_; }
  const std::vector<int>& attribute() const { return attribute_; }
  const std::vector<int>& decision() const { return decision_; }
  const std::vector<double>& benchmark_scores() const { return benchmark_; }
  bool has_benchmark() const { return !benchmark_.empty(); }

  bool labelled(std::size_t i) const { return mode_ == LabelMode::full || decision_[i] == 1; }
  double outcome(std::size_t i) const;  // throws missing_label on masked rows

  // Outcomes of rows with d=1, in row order (all rows in full mode).
  std::vector<double> labelled_outcomes() const;

  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  LabelMode mode_;
  std::vector<std::string> names_;
  Matrix features_;
  std::vector<int> attribute_;
  std::vector<int> decision_;
  std::vector<double> outcomes_;  // NaN where masked
  std::vector<double> benchmark_;

  friend void write_csv(const Dataset& ds, const std::string& path);
};

Dataset load_csv(const std::string& path, const ColumnSchema& schema);

// Snapshot back to CSV; selective mode adds a `_masked` marker column.
void write_csv(const Dataset& ds, const std::string& path);

// Deterministic disjoint partition; first part gets round(fraction*n) rows.
std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed);

}  // namespace goodset
