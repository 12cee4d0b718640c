// goodset CLI: thin front-end over the C API.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "goodset.h"

namespace {

struct RunArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string outdir;
};

int run_command(const char* command, const RunArgs& args, bool quiet) {
  gs_config* cfg = nullptr;
  if (gs_config_load(args.config_path.c_str(), &cfg) != GS_OK) {
    std::fprintf(stderr, "error: %s\n", gs_last_error());
    return 1;
  }
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      gs_config_free(cfg);
      return 1;
    }
    if (gs_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()) != GS_OK) {
      std::fprintf(stderr, "error: %s\n", gs_last_error());
      gs_config_free(cfg);
      return 1;
    }
  }

  char hash[17];
  if (gs_config_hash(cfg, hash, sizeof(hash)) != GS_OK) {
    std::fprintf(stderr, "error: %s\n", gs_last_error());
    gs_config_free(cfg);
    return 1;
  }
  std::printf("config_hash %s\n", hash);

  gs_report* report = nullptr;
  const gs_status status = gs_run(cfg, command, args.outdir.c_str(), &report);
  if (status == GS_ERROR) {
    std::fprintf(stderr, "error: %s\n", gs_last_error());
    gs_report_free(report);
    gs_config_free(cfg);
    return 1;
  }
  if (!quiet && report != nullptr) std::printf("%s\n", gs_report_json(report));
  std::printf("report_dir %s\n", args.outdir.c_str());
  if (status == GS_INFEASIBLE) std::printf("empty good set at this tolerance\n");
  gs_report_free(report);
  gs_config_free(cfg);
  return status == GS_INFEASIBLE ? 2 : 0;
}

void add_run_options(CLI::App* cmd, RunArgs& args) {
  cmd->fallthrough();  // allow global flags after the subcommand
  cmd->add_option("--config", args.config_path, "config file (JSON)")->required();
  cmd->add_option("--set", args.overrides, "override config keys, key=value")
      ->type_name("KEY=VALUE");
  cmd->add_option("--out", args.outdir, "output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"disparity audits over the set of good models"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress the report JSON on stdout");

  RunArgs args;
  const char* picked = nullptr;

  CLI::App* audit = app.add_subcommand("audit", "solve disparity problems over the good set");
  audit->require_subcommand(1);
  audit->fallthrough();
  CLI::App* range = audit->add_subcommand("range", "min and max disparity (Eq. 2 style audit)");
  CLI::App* minabs = audit->add_subcommand("min-abs", "absolute-disparity minimization");
  CLI::App* bgl = audit->add_subcommand("bgl", "bounded group loss minimization");
  add_run_options(range, args);
  add_run_options(minabs, args);
  add_run_options(bgl, args);
  range->callback([&] { picked = "range"; });
  minabs->callback([&] { picked = "min-abs"; });
  bgl->callback([&] { picked = "bgl"; });

  CLI::App* selective = app.add_subcommand("selective", "selective-labels utilities");
  selective->require_subcommand(1);
  selective->fallthrough();
  CLI::App* prep = selective->add_subcommand("prep", "apply kgb/rie/ie pseudo-labelling");
  add_run_options(prep, args);
  prep->callback([&] { picked = "selective-prep"; });

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a model or benchmark");
  evaluate->fallthrough();
  add_run_options(evaluate, args);
  evaluate->callback([&] { picked = "evaluate"; });

  CLI::App* synth = app.add_subcommand("synth", "synthetic data utilities");
  synth->require_subcommand(1);
  synth->fallthrough();
  CLI::App* gen = synth->add_subcommand("gen", "generate a selective-labels dataset");
  add_run_options(gen, args);
  gen->callback([&] { picked = "synth-gen"; });

  CLI11_PARSE(app, argc, argv);
  if (picked == nullptr) {
    std::fprintf(stderr, "error: no subcommand selected\n");
    return 1;
  }
  return run_command(picked, args, quiet);
}
