#pragma once

#include <string>

#include <json.hpp>

#include "goodset/config.hpp"

namespace goodset {

// Exit codes shared with the CLI: 0 report written, 2 empty good set; errors throw.
struct AuditOutcome {
  int exit_code = 0;
  nlohmann::ordered_json report;
};

AuditOutcome run_range_audit(const Config& cfg, const std::string& outdir);
AuditOutcome run_min_abs(const Config& cfg, const std::string& outdir);
AuditOutcome run_bgl(const Config& cfg, const std::string& outdir);
AuditOutcome run_selective_prep(const Config& cfg, const std::string& outdir);
AuditOutcome run_evaluate(const Config& cfg, const std::string& outdir);
AuditOutcome run_synth_gen(const Config& cfg, const std::string& outdir);

// Saved-model round trip (model JSON embeds the fitted feature map).
void save_model(const StochasticModel& q, const FeatureMap& fmap, const std::string& config_hash,
                const std::string& path);
std::pair<StochasticModel, FeatureMap> load_model(const std::string& path);

}  // namespace goodset
