#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "goodset/dataset.hpp"
#include "goodset/disparity.hpp"
#include "goodset/expgrad.hpp"
#include "goodset/featurize.hpp"
#include "goodset/selective.hpp"
#include "goodset/synth.hpp"

namespace goodset {

// One structured key-value config file (JSON) drives every run; --set overrides
// patch dotted paths before anything reads it.
class Config {
 public:
  static Config load(const std::string& path);
  static Config from_json(nlohmann::ordered_json j);

  // value parsed as a JSON literal when possible, else taken as a string.
  void set(const std::string& dotted_key, const std::string& value);

  // FNV-1a 64-bit digest of the canonical serialization, hex-encoded.
  std::string hash() const;

  const nlohmann::ordered_json& json() const { return root_; }

  // Typed views ----------------------------------------------------------
  ColumnSchema schema() const;
  std::string data_path() const;
  FeaturizerSpec featurizer() const;
  LossSpec loss() const;
  Grid grid() const;
  DisparitySpec disparity(bool selective) const;
  Pipeline pipeline() const;
  ExpGradConfig expgrad(double eps_hat) const;
  double delta() const;
  double split_fraction() const;
  std::uint64_t split_seed() const;
  double oracle_ridge() const;
  std::string oracle_learner_name() const;  // only "wls_heuristic" is implemented

  enum class BenchmarkSource { external_scores_column, fit_loss_minimizer };
  BenchmarkSource benchmark_source() const;
  double benchmark_scale() const;
  Learner benchmark_learner() const;  // defaults by loss kind

  Learner outcome_learner() const;
  double outcome_ridge() const;

  bool has(const std::string& dotted_key) const;
  std::vector<double> sweep_deltas() const;

  // Synthetic generation block.
  bool synth_has_base_sampler() const;
  BaseSamplerConfig synth_base() const;
  SynthDgpConfig synth_dgp() const;

  std::string evaluate_model_file() const;
  std::string evaluate_truth_file() const;
  std::vector<std::string> evaluate_populations() const;

 private:
  const nlohmann::ordered_json* find(const std::string& dotted_key) const;
  nlohmann::ordered_json root_;
};

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace goodset
