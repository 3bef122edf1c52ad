#include <algorithm>
#include <cmath>
#include <map>

#include "p2l/divergence.hpp"
#include "p2l/error.hpp"
#include "p2l/oracle.hpp"

namespace p2l::oracle {

namespace {

constexpr const char* kMethods[] = {"P2L", "B1", "B2", "B3", "B4", "B5"};

std::string calibration_name(const std::string& source_domain) { return "cal-" + source_domain; }

// Rank correlation that treats a constant side as "no information".
double rho_or_zero(std::span<const double> a, std::span<const double> b) {
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (a.size() < 2 || constant(a) || constant(b)) return 0.0;
  return spearman_rho(a, b);
}

std::vector<ImprovementRecord> measure(const OracleWorld& world, const std::string& target_domain,
                                       const std::string& target_name, std::span<const std::string> sources,
                                       const std::map<std::string, Model>& pretrained, const OracleConfig& cfg,
                                       double& scratch) {
  scratch = finetune(world, nullptr, "", target_domain, cfg);
  std::vector<ImprovementRecord> out;
  for (const auto& s : sources) {
    const double perf = finetune(world, &pretrained.at(s), s, target_domain, cfg);
    out.push_back(ImprovementRecord::make(target_name, s, perf, scratch));
  }
  return out;
}

}  // namespace

StudyReport run_study(const OracleWorld& world, const OracleConfig& cfg, const EstimatorConfig& estimator_cfg,
                      const EvaluationConfig& eval_cfg, const StudyOptions& options) {
  cfg.validate();
  estimator_cfg.validate();
  eval_cfg.validate();
  const auto sources = world.names(DomainRole::Source);
  const auto targets = world.names(DomainRole::Target);
  if (sources.size() < 3) throw Error(ErrorCode::TooFewSources, "study needs >= 3 source domains");
  if (targets.size() < 2) throw Error(ErrorCode::BadSpec, "study needs >= 2 target domains");

  StudyReport report;
  report.seed = world.seed;
  report.top_T = eval_cfg.top_T;
  report.used = estimator_cfg;

  std::map<std::string, Model> pretrained;
  for (const auto& s : sources) {
    const auto& d = world.domain(s);
    pretrained.emplace(s, pretrain(world, s, cfg));
    report.source_profiles.push_back(profile_of(world, s, d.source_train, Role::Source));
    report.source_val_accuracy[s] = d.source_val.size() > 0 ? accuracy(pretrained.at(s), d.source_val) : 0.0;
  }

  if (options.calibrate) {
    // Training tasks: each source domain's own target split.
    std::vector<TrainingTask> tasks;
    for (const auto& s : sources) {
      const auto name = calibration_name(s);
      TrainingTask task;
      task.target = profile_of(world, name, target_train(world, s, cfg), Role::Target);
      double scratch = 0.0;
      task.ground_truth = measure(world, s, name, sources, pretrained, cfg, scratch);
      report.calibration_records.insert(report.calibration_records.end(), task.ground_truth.begin(),
                                        task.ground_truth.end());
      report.calibration_profiles.push_back(task.target);
      tasks.push_back(std::move(task));
    }
    auto calibration = tune_k(tasks, report.source_profiles, eval_cfg, estimator_cfg);
    report.used.k = calibration.best_k;
    report.used.distance = calibration.best_distance;
    report.calibration = std::move(calibration);
  }

  const std::string reference = world.reference_source.value_or(sources.front());
  for (const auto& t : targets) {
    TargetResult r;
    r.target = t;
    const auto profile = profile_of(world, t, target_train(world, t, cfg), Role::Target);
    report.target_profiles.push_back(profile);
    r.records = measure(world, t, t, sources, pretrained, cfg, r.perf_scratch);
    r.best_true = best_source(r.records);

    r.ranking = score_sources(profile, report.source_profiles, report.used);
    r.picks["P2L"] = select_source(r.ranking);
    for (auto b : {Baseline::B1, Baseline::B2, Baseline::B3, Baseline::B4, Baseline::B5}) {
      r.picks[std::string(to_string(b))] = baseline_select(
          b, profile, report.source_profiles, report.used, reference, stream_seed(world.seed, {"B3", t}));
    }

    // Orderings for picks-to-best and rank correlation, aligned with `sources`.
    std::vector<double> improvement, score(sources.size()), log_size, neg_distance;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      improvement.push_back(r.records[i].improvement);
      const auto& sp = report.source_profiles[i];
      log_size.push_back(std::log(static_cast<double>(sp.size)));
      neg_distance.push_back(-target_source_distance(profile, sp, report.used));
    }
    for (const auto& row : r.ranking) {
      const auto at = std::find(sources.begin(), sources.end(), row.source_name) - sources.begin();
      score[static_cast<std::size_t>(at)] = row.score;
    }
    r.rho["P2L"] = rho_or_zero(score, improvement);
    r.rho["B1"] = rho_or_zero(log_size, improvement);
    r.rho["B5"] = rho_or_zero(neg_distance, improvement);

    auto ordering = [&](const std::vector<double>& key) {
      std::vector<std::size_t> idx(sources.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (key[a] != key[b]) return key[a] > key[b];
        return sources[a] < sources[b];
      });
      std::vector<std::string> names;
      for (auto i : idx) names.push_back(sources[i]);
      return names;
    };
    std::vector<std::string> p2l_order;
    for (const auto& row : r.ranking) p2l_order.push_back(row.source_name);
    r.picks_to_best["P2L"] = picks_to_best(p2l_order, r.best_true);
    r.picks_to_best["B1"] = picks_to_best(ordering(log_size), r.best_true);
    r.picks_to_best["B5"] = picks_to_best(ordering(neg_distance), r.best_true);

    r.gains = gain_table(r.records, r.picks);
    report.targets.push_back(std::move(r));
  }

  const double n_targets = static_cast<double>(report.targets.size());
  for (const char* method : kMethods) {
    MethodSummary m;
    m.method = method;
    double acc = 0.0, hits = 0.0, picks = 0.0, rho = 0.0;
    const bool ranked = report.targets.front().picks_to_best.count(method) > 0;
    for (const auto& r : report.targets) {
      const auto& pick = r.picks.at(method);
      if (pick) {
        acc += std::find_if(r.records.begin(), r.records.end(), [&](const ImprovementRecord& rec) {
                 return rec.source_name == *pick;
               })->perf_transfer;
      } else {
        acc += r.perf_scratch;
      }
      if (ranked) {
        const auto p = r.picks_to_best.at(method);
        picks += static_cast<double>(p);
        if (p <= eval_cfg.top_T) hits += 1.0;
        rho += r.rho.at(method);
      } else if (pick && *pick == r.best_true) {
        hits += 1.0;
      }
    }
    m.mean_accuracy = acc / n_targets;
    m.top_T_hit_rate = hits / n_targets;
    if (ranked) {
      m.mean_picks_to_best = picks / n_targets;
      m.mean_rho = rho / n_targets;
    }
    report.methods.push_back(m);
  }
  return report;
}

MergedStudyReport merged_source_study(const OracleWorld& world, const OracleConfig& cfg,
                                      const MergedStudyOptions& opts) {
  cfg.validate();
  if (opts.rate_scales.empty()) throw Error(ErrorCode::InvalidArgument, "need >= 1 rate regime");
  const auto sources = world.names(DomainRole::Source);
  if (!world.reference_source) throw Error(ErrorCode::BadSpec, "world has no reference source");
  const std::string& reference = *world.reference_source;
  if (sources.size() < 3) throw Error(ErrorCode::BadSpec, "need a reference and >= 2 other sources");

  MergedStudyReport report;
  report.reference = reference;
  report.merged_name = "merged";
  report.rate_scales = opts.rate_scales;
  const OracleWorld pooled = with_pooled_source(world, sources, report.merged_name);

  std::vector<DatasetProfile> members;
  for (const auto& s : sources) members.push_back(profile_of(world, s, world.domain(s).source_train, Role::Source));
  report.merged_profile = merge_profiles(members, report.merged_name);
  const auto reference_profile =
      *std::find_if(members.begin(), members.end(), [&](const DatasetProfile& p) { return p.name == reference; });

  const Model reference_model = pretrain(pooled, reference, cfg);
  const Model merged_model = pretrain(pooled, report.merged_name, cfg);

  EstimatorConfig ecfg;
  ecfg.distance = opts.distance;
  for (const auto& t : sources) {
    MergedTargetResult r;
    r.target = t;
    const auto profile = profile_of(world, t, target_train(world, t, cfg), Role::Target);
    r.distance_to_reference = target_source_distance(profile, reference_profile, ecfg);
    r.distance_to_merged = target_source_distance(profile, report.merged_profile, ecfg);
    for (double scale : opts.rate_scales) {
      const double ref_acc = finetune(pooled, &reference_model, reference, t, cfg, scale);
      const double merged_acc = finetune(pooled, &merged_model, report.merged_name, t, cfg, scale);
      r.reference_accuracy.push_back(ref_acc);
      r.merged_accuracy.push_back(merged_acc);
      if (merged_acc > ref_acc) ++r.merged_score;
      if (ref_acc > merged_acc) --r.merged_score;
    }
    report.targets.push_back(std::move(r));
  }
  std::stable_sort(report.targets.begin(), report.targets.end(),
                   [](const MergedTargetResult& a, const MergedTargetResult& b) {
                     return a.distance_to_reference < b.distance_to_reference;
                   });
  return report;
}

}  // namespace p2l::oracle
