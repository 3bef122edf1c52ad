#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

using namespace p2l::cli;

namespace {

void add_estimator_options(CLI::App* cmd, EstimatorArgs& e) {
  cmd->add_option("--distance", e.distance, "KL, JSD, CHI2, EUC or CITYBLOCK")->capture_default_str();
  cmd->add_option("--k", e.k, "balance between size and distance (usually <= 0)")->capture_default_str();
  cmd->add_option("--epsilon", e.epsilon, "smoothing for KL/JSD/CHI2")->capture_default_str();
  cmd->add_option("--summarizer", e.summarizer, "mean | trimmed:<f> (embedding-file targets)")->capture_default_str();
  cmd->add_flag("--kl-source-first", e.kl_source_first, "use KL(source || target)");
  cmd->add_flag("--allow-mixed-extractors", e.allow_mixed_extractors, "compare profiles from different extractors");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p2l: pick the source model that should transfer best to a target dataset"};
  app.require_subcommand(1);
  std::string registry_help = "profile registry directory (default: $P2L_REGISTRY)";

  ProfileArgs profile;
  auto* c_profile = app.add_subcommand("profile", "summarize an embeddings file into a registry profile");
  c_profile->add_option("--input", profile.input, "embeddings file (.csv text or P2LE binary)")->required();
  c_profile->add_option("--name", profile.name, "profile name ([A-Za-z0-9_-]+)")->required();
  c_profile->add_option("--size", profile.size, "dataset size |s| or 'auto' for the row count")->capture_default_str();
  c_profile->add_option("--summarizer", profile.summarizer, "mean | trimmed | trimmed:<f>")->capture_default_str();
  c_profile->add_option("--role", profile.role, "source | target")->capture_default_str();
  c_profile->add_option("--registry", profile.registry, registry_help)->envname("P2L_REGISTRY");
  c_profile->add_flag("--force", profile.force, "overwrite an existing profile");
  c_profile->add_flag("--allow-negative", profile.allow_negative, "keep a mean with negative components unnormalized");

  RankArgs rank;
  auto* c_rank = app.add_subcommand("rank", "rank registry sources for one target");
  c_rank->add_option("--target", rank.target, "embeddings file, profile JSON or registry name")->required();
  c_rank->add_option("--registry", rank.registry, registry_help)->envname("P2L_REGISTRY");
  add_estimator_options(c_rank, rank.est);
  c_rank->add_option("--top", rank.top, "print only the first T rows");
  c_rank->add_flag("--baselines", rank.baselines, "append B1/B2/B3/B5 picks");
  c_rank->add_option("--reference", rank.reference, "fixed reference source for B2");
  c_rank->add_option("--seed", rank.seed, "seed for the random baseline B3");

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "grid-search k and the distance on ground-truth tasks");
  c_cal->add_option("--ground-truth", cal.ground_truth, "CSV: target,source,perf_transfer,perf_scratch")->required();
  c_cal->add_option("--registry", cal.registry, registry_help)->envname("P2L_REGISTRY");
  c_cal->add_option("--grid-out", cal.grid_out, "write the k,distance,mean_rho grid here");
  c_cal->add_option("--k-min", cal.k_min)->capture_default_str();
  c_cal->add_option("--k-max", cal.k_max)->capture_default_str();
  c_cal->add_option("--k-step", cal.k_step)->capture_default_str();
  c_cal->add_option("--distances", cal.distances, "subset of KL,JSD,CHI2,EUC,CITYBLOCK")->delimiter(',');
  c_cal->add_option("--epsilon", cal.epsilon)->capture_default_str();
  c_cal->add_flag("--kl-source-first", cal.kl_source_first);
  c_cal->add_flag("--allow-mixed-extractors", cal.allow_mixed_extractors);

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "gain table and picks-to-best against ground truth");
  c_ev->add_option("--ground-truth", ev.ground_truth, "CSV: target,source,perf_transfer,perf_scratch")->required();
  c_ev->add_option("--registry", ev.registry, registry_help)->envname("P2L_REGISTRY");
  add_estimator_options(c_ev, ev.est);
  c_ev->add_option("--top", ev.top, "T for the top-T hit rate")->capture_default_str();
  c_ev->add_option("--reference", ev.reference, "fixed reference source for B2");
  c_ev->add_option("--seed", ev.seed, "seed for the random baseline B3");

  MergeArgs merge;
  auto* c_merge = app.add_subcommand("merge", "combine mean profiles into one merged source profile");
  c_merge->add_option("--registry", merge.registry, registry_help)->envname("P2L_REGISTRY");
  c_merge->add_option("--name", merge.name, "name of the merged profile")->required();
  c_merge->add_option("--members", merge.members, "profiles to merge (comma separated)")->required()->delimiter(',');
  c_merge->add_flag("--force", merge.force, "overwrite an existing profile");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "run the synthetic oracle study and write a report directory");
  c_sim->add_option("--seed", sim.seed)->required();
  c_sim->add_option("--sources", sim.sources)->capture_default_str();
  c_sim->add_option("--targets", sim.targets)->capture_default_str();
  c_sim->add_option("--out", sim.out, "report directory")->required();
  c_sim->add_flag("!--no-calibrate", sim.calibrate, "use --k/--distance instead of tuning them");
  c_sim->add_flag("!--no-merged", sim.merged, "skip the merged-source study");
  add_estimator_options(c_sim, sim.est);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*c_profile) return cmd_profile(profile);
    if (*c_rank) return cmd_rank(rank);
    if (*c_cal) return cmd_calibrate(cal);
    if (*c_ev) return cmd_evaluate(ev);
    if (*c_merge) return cmd_merge(merge);
    if (*c_sim) return cmd_simulate(sim);
  } catch (const std::exception& e) {
    return report_error(e);
  }
  return kInputError;
}
