#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "ssc/io.hpp"

#ifndef SSC_VERSION
#define SSC_VERSION "unknown"
#endif

int main(int argc, char** argv) {
  using namespace ssc::cli;
  CLI::App app{"Steady-state cluster and forest-fire experiments"};
  app.set_version_flag("--version", SSC_VERSION);
  app.set_config("--config", "", "INI file: top-level keys, [subcommand] sections; flags override it");
  app.require_subcommand(1);

  Common common;
  std::uint64_t seed = 0;
  app.add_option("--output-dir", common.output_dir, "artifact directory")->envname("SSC_OUTPUT_DIR");
  auto* workers = app.add_option("--workers", common.workers, "replica worker threads (default: SSC_WORKERS, else all cores)")
                      ->check(CLI::PositiveNumber);

  auto add_seed = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--seed", seed, "master seed (64-bit)");
    if (required) o->required();
    return o;
  };

  ExactMassesConfig em;
  auto* em_cmd = app.add_subcommand("exact-masses", "exact rational masses of all rooted-tree classes of size n");
  em_cmd->add_option("--n", em.n, "tree size")->required()->check(CLI::Range(1, 12));
  em_cmd->add_flag("--cumulative", em.cumulative, "all sizes 1..n");

  SampleConfig sc;
  auto* sc_cmd = app.add_subcommand("sample", "i.i.d. draws from one of the sampler laws");
  add_seed(sc_cmd, true);
  sc_cmd->add_option("--law", sc.law, "rde|genealogy|mgw|hx|spinal|given-size|cluster-size|t-inf|theta1|stationary-age")
      ->capture_default_str();
  sc_cmd->add_option("--replicas", sc.replicas)->capture_default_str();
  sc_cmd->add_option("--cap", sc.cap, "size cap; capped draws are flagged")->capture_default_str();
  sc_cmd->add_option("--x", sc.x, "shift for hx and spinal")->capture_default_str();
  sc_cmd->add_option("--k", sc.k, "cluster size for given-size")->capture_default_str();
  sc_cmd->add_option("--max-spine", sc.max_spine)->capture_default_str();

  GrowthConfig gc;
  auto* gc_cmd = app.add_subcommand("growth", "tagged-cluster size dynamics");
  add_seed(gc_cmd, true);
  gc_cmd->add_option("--mode", gc.mode, "singleton|stationary")->capture_default_str();
  gc_cmd->add_option("--replicas", gc.replicas)->capture_default_str();
  gc_cmd->add_option("--cap", gc.cap, "size beyond which the path is not materialised")->capture_default_str();
  gc_cmd->add_option("--init-size", gc.init_size)->capture_default_str();
  gc_cmd->add_option("--horizon", gc.horizon, "singleton: run to this time instead of the first explosion");
  gc_cmd->add_option("--window", gc.window, "stationary: observation window [.., window]")->capture_default_str();
  gc_cmd->add_option("--tau", gc.tau, "scaling checkpoints in tau-time (switches to scaling statistics)");
  gc_cmd->add_option("--leap", gc.leap, "leap tolerance for scaling runs; 0 is exact")->capture_default_str();

  ConditionedConfig cc;
  auto* cc_cmd = app.add_subcommand("conditioned", "Doob-conditioned size dynamics");
  add_seed(cc_cmd, true);
  cc_cmd->add_option("--s", cc.s, "observation time")->capture_default_str();
  cc_cmd->add_option("--t", cc.t, "conditioning time")->capture_default_str();
  cc_cmd->add_option("--mode", cc.mode, "explode_at|survive_past")->capture_default_str();
  cc_cmd->add_flag("--stationary", cc.stationary, "start from the stationary state instead of a singleton");
  cc_cmd->add_option("--replicas", cc.replicas)->capture_default_str();
  cc_cmd->add_option("--cap", cc.cap)->capture_default_str();

  MeanfieldConfig mf;
  auto* mf_cmd = app.add_subcommand("meanfield", "finite-n mean-field forest fire");
  add_seed(mf_cmd, true);
  mf_cmd->add_option("--n", mf.n)->capture_default_str();
  mf_cmd->add_option("--lambda", mf.lambda, "lightning rate per vertex (default n^-1/2)");
  mf_cmd->add_option("--horizon", mf.horizon)->capture_default_str();
  mf_cmd->add_option("--snapshots", mf.snapshots, "snapshot times (default: the horizon)");
  mf_cmd->add_option("--replicas", mf.replicas)->capture_default_str();

  FfhConfig fc;
  auto* fc_cmd = app.add_subcommand("ffh", "truncated infinite forest fire FF^h");
  add_seed(fc_cmd, true);
  fc_cmd->add_option("--height", fc.h, "height h")->capture_default_str();
  fc_cmd->add_option("--horizon", fc.horizon)->capture_default_str();
  fc_cmd->add_option("--replicas", fc.replicas)->capture_default_str();

  VerifyConfig vc;
  auto* vc_cmd = app.add_subcommand("verify", "run acceptance criteria");
  add_seed(vc_cmd, true);
  vc_cmd->add_option("--suite", vc.suite, "all, or one of the suite names")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  for (auto* sub : {sc_cmd, gc_cmd, cc_cmd, mf_cmd, fc_cmd, vc_cmd})
    if (sub->parsed()) common.seed = seed;

  try {
    if (workers->count() == 0) common.workers = ssc::io::default_workers();
    if (em_cmd->parsed()) return exact_masses(common, em);
    if (sc_cmd->parsed()) return sample(common, sc);
    if (gc_cmd->parsed()) return growth(common, gc);
    if (cc_cmd->parsed()) return conditioned(common, cc);
    if (mf_cmd->parsed()) return meanfield(common, mf);
    if (fc_cmd->parsed()) return ffh(common, fc);
    if (vc_cmd->parsed()) return verify(common, vc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
