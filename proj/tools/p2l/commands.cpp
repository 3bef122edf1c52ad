#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "p2l/calibrate.hpp"
#include "p2l/divergence.hpp"
#include "p2l/error.hpp"
#include "p2l/estimator.hpp"
#include "p2l/io.hpp"
#include "p2l/oracle.hpp"
#include "p2l/summarize.hpp"

namespace p2l::cli {

namespace fs = std::filesystem;
using io::format_double;

namespace {

EstimatorConfig estimator_config(const EstimatorArgs& a) {
  EstimatorConfig cfg;
  cfg.distance = parse_divergence_kind(a.distance);
  cfg.k = a.k;
  cfg.epsilon = a.epsilon;
  cfg.summarizer = parse_summarizer(a.summarizer);
  cfg.kl_target_first = !a.kl_source_first;
  cfg.allow_mixed_extractors = a.allow_mixed_extractors;
  cfg.validate();
  return cfg;
}

io::ProfileRegistry open_registry(const std::string& root, bool create) {
  if (root.empty()) throw Error(ErrorCode::InvalidArgument, "no registry: pass --registry or set P2L_REGISTRY");
  return io::ProfileRegistry(root, create);
}

bool is_profile_file(const fs::path& p) {
  const auto name = p.filename().string();
  return name.size() > 5 && name.ends_with(".json");
}

// A target given as an embeddings file, a profile JSON file, or a registry name.
DatasetProfile resolve_target(const std::string& target, const io::ProfileRegistry& registry,
                              const EstimatorConfig& cfg) {
  const fs::path path(target);
  if (fs::is_regular_file(path)) {
    if (is_profile_file(path)) return io::profile_from_json(io::read_file(path));
    const auto m = io::read_embeddings(path);
    DatasetProfile p;
    p.name = path.stem().string();
    p.size = m.items();
    p.summary = summarize(m, cfg.summarizer, {.allow_negative = !is_probability_kind(cfg.distance)});
    p.extractor_id = m.extractor_id();
    p.role = Role::Target;
    return p;
  }
  return registry.load(target);
}

std::vector<DatasetProfile> sources_excluding(const io::ProfileRegistry& registry, const std::string& name) {
  auto all = registry.load_all(Role::Source);
  std::erase_if(all, [&](const DatasetProfile& p) { return p.name == name; });
  return all;
}

// Ground truth grouped by target, in first-seen order.
std::vector<std::pair<std::string, std::vector<ImprovementRecord>>> group_by_target(
    const std::vector<ImprovementRecord>& records) {
  std::vector<std::pair<std::string, std::vector<ImprovementRecord>>> out;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& g) { return g.first == r.target_name; });
    if (it == out.end()) {
      out.emplace_back(r.target_name, std::vector<ImprovementRecord>{});
      it = out.end() - 1;
    }
    it->second.push_back(r);
  }
  if (out.empty()) throw Error(ErrorCode::MalformedInput, "ground truth has no rows");
  return out;
}

// Registry profiles for every source named in the records; unknown names are referential errors.
std::vector<DatasetProfile> sources_for(const io::ProfileRegistry& registry,
                                        const std::vector<ImprovementRecord>& records) {
  std::set<std::string> names;
  for (const auto& r : records) names.insert(r.source_name);
  std::vector<DatasetProfile> out;
  for (const auto& n : names) {
    if (!registry.contains(n)) throw Error(ErrorCode::UnknownSource, "ground truth names unknown source '" + n + "'");
    out.push_back(registry.load(n));
  }
  return out;
}

std::string optional_name(const std::optional<std::string>& s) { return s ? *s : "none"; }

}  // namespace

int report_error(const std::exception& e) {
  std::cerr << "p2l: " << e.what() << "\n";
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err == nullptr) return kInputError;
  switch (err->code()) {
    case ErrorCode::NameCollision:
      return kConflict;
    case ErrorCode::UnknownSource:
    case ErrorCode::NotFound:
    case ErrorCode::MissingRecord:
    case ErrorCode::MissingReference:
    case ErrorCode::UnknownName:
      return kReferential;
    default:
      return kInputError;
  }
}

int cmd_profile(const ProfileArgs& a) {
  const auto registry = open_registry(a.registry, true);
  if (!io::is_valid_name(a.name)) throw Error(ErrorCode::InvalidName, "'" + a.name + "' is not [A-Za-z0-9_-]+");
  if (!a.force && registry.contains(a.name)) {
    throw Error(ErrorCode::NameCollision, "'" + a.name + "' exists in " + a.registry + " (use --force)");
  }
  const auto m = io::read_embeddings(a.input);
  DatasetProfile p;
  p.name = a.name;
  p.role = parse_role(a.role);
  p.extractor_id = m.extractor_id();
  p.summary = summarize(m, parse_summarizer(a.summarizer), {.allow_negative = a.allow_negative});
  if (a.size == "auto") {
    p.size = m.items();
  } else {
    std::size_t used = 0;
    long long n = 0;
    try {
      n = std::stoll(a.size, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != a.size.size() || n < 1) throw Error(ErrorCode::InvalidArgument, "--size must be a positive integer or 'auto'");
    p.size = static_cast<std::uint64_t>(n);
  }
  registry.save(p, a.force);
  std::cout << "name,role,dim,size,extractor_id,summarizer\n"
            << p.name << "," << to_string(p.role) << "," << p.summary.dim() << "," << p.size << "," << p.extractor_id
            << "," << to_string(p.summary.summarizer) << "\n";
  std::cerr << "saved " << registry.path_for(p.name).string() << "\n";
  return kOk;
}

int cmd_rank(const RankArgs& a) {
  const auto cfg = estimator_config(a.est);
  const auto registry = open_registry(a.registry, false);
  const auto target = resolve_target(a.target, registry, cfg);
  const auto sources = sources_excluding(registry, target.name);
  const auto ranked = score_sources(target, sources, cfg);

  std::cout << "rank,source,size,distance,log_size,z_log_size,z_distance,score\n";
  const std::size_t shown = a.top == 0 ? ranked.size() : std::min(a.top, ranked.size());
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& s = ranked[i];
    std::cout << i + 1 << "," << s.source_name << "," << s.size << "," << format_double(s.distance_value) << ","
              << format_double(s.log_size) << "," << format_double(s.z_log_size) << "," << format_double(s.z_distance)
              << "," << format_double(s.score) << "\n";
  }
  if (a.baselines) {
    std::cout << "\nbaseline,pick\n";
    for (auto b : {Baseline::B1, Baseline::B2, Baseline::B3, Baseline::B5}) {
      if (b == Baseline::B2 && !a.reference) {
        std::cerr << "B2 skipped: no --reference\n";
        continue;
      }
      if (b == Baseline::B3 && !a.seed) {
        std::cerr << "B3 skipped: no --seed\n";
        continue;
      }
      std::cout << to_string(b) << "," << optional_name(baseline_select(b, target, sources, cfg, a.reference, a.seed))
                << "\n";
    }
  }
  std::cerr << "target " << target.name << ": " << ranked.size() << " candidates, " << to_string(cfg.distance)
            << ", k = " << cfg.k << ", pick " << select_source(ranked) << "\n";
  return kOk;
}

int cmd_calibrate(const CalibrateArgs& a) {
  const auto registry = open_registry(a.registry, false);
  const auto records = io::read_ground_truth_csv(a.ground_truth);
  const auto groups = group_by_target(records);
  const auto sources = sources_for(registry, records);

  std::vector<TrainingTask> tasks;
  for (const auto& [name, recs] : groups) tasks.push_back({registry.load(name), recs});

  EvaluationConfig eval;
  eval.k_grid = EvaluationConfig::make_k_grid(a.k_min, a.k_max, a.k_step);
  if (!a.distances.empty()) {
    eval.distance_kinds.clear();
    for (const auto& d : a.distances) eval.distance_kinds.push_back(parse_divergence_kind(d));
  }
  EstimatorConfig base;
  base.epsilon = a.epsilon;
  base.kl_target_first = !a.kl_source_first;
  base.allow_mixed_extractors = a.allow_mixed_extractors;
  const auto report = tune_k(tasks, sources, eval, base);

  if (!a.grid_out.empty()) {
    std::string csv = "k,distance,mean_rho\n";
    for (const auto& g : report.grid) {
      csv += format_double(g.k) + "," + std::string(to_string(g.distance)) + "," + format_double(g.mean_rho) + "\n";
    }
    io::write_file_atomic(a.grid_out, csv);
  }
  std::cout << "best_k,best_distance,mean_rho,tasks\n"
            << format_double(report.best_k) << "," << to_string(report.best_distance) << ","
            << format_double(report.best_rho) << "," << tasks.size() << "\n";
  std::cerr << "calibrated on " << tasks.size() << " task(s): k = " << report.best_k << ", "
            << to_string(report.best_distance) << ", mean rho = " << report.best_rho << "\n";
  return kOk;
}

int cmd_evaluate(const EvaluateArgs& a) {
  const auto cfg = estimator_config(a.est);
  const auto registry = open_registry(a.registry, false);
  const auto records = io::read_ground_truth_csv(a.ground_truth);
  const auto groups = group_by_target(records);
  const auto all_sources = sources_for(registry, records);

  std::cout << "target,best_true,method,pick,perf,gain,picks_to_best\n";
  std::map<std::string, double> picks_sum;
  std::map<std::string, double> hits;
  for (const auto& [name, recs] : groups) {
    const auto target = registry.load(name);
    std::vector<DatasetProfile> sources;
    for (const auto& r : recs) {
      sources.push_back(*std::find_if(all_sources.begin(), all_sources.end(),
                                      [&](const DatasetProfile& p) { return p.name == r.source_name; }));
    }
    const auto ranked = score_sources(target, sources, cfg);
    const auto best = best_source(recs);

    std::map<std::string, std::optional<std::string>> picks;
    picks["P2L"] = select_source(ranked);
    for (auto b : {Baseline::B1, Baseline::B2, Baseline::B3, Baseline::B4, Baseline::B5}) {
      if (b == Baseline::B2 && !a.reference) continue;
      if (b == Baseline::B3 && !a.seed) continue;
      picks[std::string(to_string(b))] = baseline_select(b, target, sources, cfg, a.reference, a.seed);
    }

    // Orderings for picks-to-best: P2L by E, B1 by size, B5 by distance.
    std::map<std::string, std::vector<std::string>> orders;
    for (const auto& s : ranked) orders["P2L"].push_back(s.source_name);
    auto by = [&](auto key) {
      std::vector<ScoredSource> v = ranked;
      std::stable_sort(v.begin(), v.end(), [&](const ScoredSource& x, const ScoredSource& y) {
        if (key(x) != key(y)) return key(x) > key(y);
        return x.source_name < y.source_name;
      });
      std::vector<std::string> names;
      for (const auto& s : v) names.push_back(s.source_name);
      return names;
    };
    orders["B1"] = by([](const ScoredSource& s) { return static_cast<double>(s.size); });
    orders["B5"] = by([](const ScoredSource& s) { return -s.distance_value; });

    const auto gains = gain_table(recs, picks);
    auto perf_of = [&](const std::optional<std::string>& pick) {
      if (!pick) return recs.front().perf_scratch;
      return std::find_if(recs.begin(), recs.end(), [&](const ImprovementRecord& r) { return r.source_name == *pick; })
          ->perf_transfer;
    };
    auto ptb = [&](const std::string& method) -> std::string {
      const auto it = orders.find(method);
      if (it == orders.end()) return "";
      const auto n = picks_to_best(it->second, best);
      picks_sum[method] += static_cast<double>(n);
      if (n <= a.top) hits[method] += 1.0;
      return std::to_string(n);
    };
    std::cout << name << "," << best << ",P2L," << *picks["P2L"] << "," << format_double(perf_of(picks["P2L"]))
              << ",," << ptb("P2L") << "\n";
    for (const auto& g : gains) {
      std::cout << name << "," << best << "," << g.method << "," << optional_name(g.pick) << ","
                << format_double(g.perf) << "," << format_double(g.gain) << "," << ptb(g.method) << "\n";
    }
  }
  const double n = static_cast<double>(groups.size());
  for (const auto& [method, sum] : picks_sum) {
    std::cerr << method << ": mean picks-to-best " << sum / n << ", top-" << a.top << " hit rate "
              << hits[method] / n << "\n";
  }
  return kOk;
}

int cmd_merge(const MergeArgs& a) {
  const auto registry = open_registry(a.registry, false);
  if (!io::is_valid_name(a.name)) throw Error(ErrorCode::InvalidName, "'" + a.name + "' is not [A-Za-z0-9_-]+");
  if (!a.force && registry.contains(a.name)) {
    throw Error(ErrorCode::NameCollision, "'" + a.name + "' exists in " + a.registry + " (use --force)");
  }
  std::vector<DatasetProfile> members;
  for (const auto& m : a.members) members.push_back(registry.load(m));
  const auto merged = merge_profiles(members, a.name);
  registry.save(merged, a.force);
  std::cout << "name,dim,size,members\n"
            << merged.name << "," << merged.summary.dim() << "," << merged.size << "," << members.size() << "\n";
  std::cerr << "saved " << registry.path_for(merged.name).string() << "\n";
  return kOk;
}

int cmd_simulate(const SimulateArgs& a) {
  oracle::ThemedWorldOptions opts;
  opts.num_sources = a.sources;
  opts.num_targets = a.targets;
  const auto world = oracle::generate_world(a.seed, oracle::themed_world_spec(a.seed, opts));
  const auto cfg = estimator_config(a.est);
  const auto report =
      oracle::run_study(world, oracle::OracleConfig{}, cfg, EvaluationConfig{}, {.calibrate = a.calibrate});
  oracle::write_study_report(report, a.out);
  if (a.merged) {
    const auto merged = oracle::merged_source_study(world, oracle::OracleConfig{});
    oracle::write_merged_report(merged, (fs::path(a.out) / "merged.csv").string());
  }
  std::cout << io::read_file(fs::path(a.out) / "methods.csv");
  std::cerr << oracle::study_summary_text(report);
  return kOk;
}

}  // namespace p2l::cli
