#include "goodset.h"

#include <cstring>
#include <string>

#include "goodset/audit.hpp"
#include "goodset/config.hpp"
#include "goodset/error.hpp"

struct gs_config {
  goodset::Config impl;
};

struct gs_report {
  std::string json;
};

namespace {

thread_local std::string g_last_error;

gs_status guard_error(const std::exception& e) {
  g_last_error = e.what();
  return GS_ERROR;
}

}  // namespace

extern "C" {

const char* gs_version(void) { return "0.1.0"; }

const char* gs_last_error(void) { return g_last_error.c_str(); }

gs_status gs_config_load(const char* path, gs_config** out) {
  if (path == nullptr || out == nullptr) {
    g_last_error = "gs_config_load: null argument";
    return GS_ERROR;
  }
  try {
    auto* cfg = new gs_config{goodset::Config::load(path)};
    *out = cfg;
    g_last_error.clear();
    return GS_OK;
  } catch (const std::exception& e) {
    *out = nullptr;
    return guard_error(e);
  }
}

gs_status gs_config_set(gs_config* cfg, const char* dotted_key, const char* value) {
  if (cfg == nullptr || dotted_key == nullptr || value == nullptr) {
    g_last_error = "gs_config_set: null argument";
    return GS_ERROR;
  }
  try {
    cfg->impl.set(dotted_key, value);
    g_last_error.clear();
    return GS_OK;
  } catch (const std::exception& e) {
    return guard_error(e);
  }
}

gs_status gs_config_hash(const gs_config* cfg, char* buf, size_t cap) {
  if (cfg == nullptr || buf == nullptr) {
    g_last_error = "gs_config_hash: null argument";
    return GS_ERROR;
  }
  const std::string h = cfg->impl.hash();
  if (cap < h.size() + 1) {
    g_last_error = "gs_config_hash: buffer too small";
    return GS_ERROR;
  }
  std::memcpy(buf, h.c_str(), h.size() + 1);
  g_last_error.clear();
  return GS_OK;
}

void gs_config_free(gs_config* cfg) { delete cfg; }

gs_status gs_run(const gs_config* cfg, const char* command, const char* outdir, gs_report** out) {
  if (out != nullptr) *out = nullptr;
  if (cfg == nullptr || command == nullptr || outdir == nullptr) {
    g_last_error = "gs_run: null argument";
    return GS_ERROR;
  }
  try {
    const std::string cmd = command;
    goodset::AuditOutcome outcome;
    if (cmd == "range")
      outcome = goodset::run_range_audit(cfg->impl, outdir);
    else if (cmd == "min-abs")
      outcome = goodset::run_min_abs(cfg->impl, outdir);
    else if (cmd == "bgl")
      outcome = goodset::run_bgl(cfg->impl, outdir);
    else if (cmd == "selective-prep")
      outcome = goodset::run_selective_prep(cfg->impl, outdir);
    else if (cmd == "evaluate")
      outcome = goodset::run_evaluate(cfg->impl, outdir);
    else if (cmd == "synth-gen")
      outcome = goodset::run_synth_gen(cfg->impl, outdir);
    else {
      g_last_error = "gs_run: unknown command '" + cmd + "'";
      return GS_ERROR;
    }
    if (out != nullptr) *out = new gs_report{outcome.report.dump(2)};
    g_last_error.clear();
    return outcome.exit_code == 2 ? GS_INFEASIBLE : GS_OK;
  } catch (const std::exception& e) {
    return guard_error(e);
  }
}

const char* gs_report_json(const gs_report* rep) {
  return rep == nullptr ? "" : rep->json.c_str();
}

void gs_report_free(gs_report* rep) { delete rep; }

}  // extern "C"
