#include "p2l/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "p2l/divergence.hpp"
#include "p2l/error.hpp"
#include "p2l/estimator.hpp"

namespace p2l {

std::vector<double> EvaluationConfig::make_k_grid(double min, double max, double step) {
  if (!(step > 0.0) || !(max >= min) || !std::isfinite(min) || !std::isfinite(max)) {
    throw Error(ErrorCode::InvalidArgument, "k grid needs min <= max and step > 0");
  }
  const auto n = static_cast<long>(std::llround((max - min) / step));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 1);
  if (n == 0) {
    grid.push_back(min);
    return grid;
  }
  // Interpolate between the endpoints so e.g. -3 + 59 * 0.05 lands on -0.05 exactly.
  for (long i = 0; i <= n; ++i) {
    grid.push_back((min * static_cast<double>(n - i) + max * static_cast<double>(i)) /
                   static_cast<double>(n));
  }
  return grid;
}

void EvaluationConfig::validate() const {
  if (top_T < 1) throw Error(ErrorCode::InvalidArgument, "top_T must be >= 1");
  if (k_grid.empty()) throw Error(ErrorCode::InvalidArgument, "k grid is empty");
  if (distance_kinds.empty()) throw Error(ErrorCode::InvalidArgument, "no distance kinds");
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share the mean of ranks i+1..j+1
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  if (a.size() < 2) throw Error(ErrorCode::LengthMismatch, "need at least 2 observations");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double mean = 0.5 * static_cast<double>(a.size() + 1);  // mean of ranks, ties or not
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw Error(ErrorCode::DegenerateConstantInput, "rank correlation of a constant list");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

constexpr int kind_order(DivergenceKind k) { return static_cast<int>(k); }

// Pre-resolved view of one task: candidate profiles in record order and the
// improvements aligned with them.
struct PreparedTask {
  const TrainingTask* task = nullptr;
  std::vector<DatasetProfile> candidates;
  std::vector<double> improvements;
};

}  // namespace

CalibrationReport tune_k(std::span<const TrainingTask> tasks,
                         std::span<const DatasetProfile> sources, const EvaluationConfig& cfg,
                         const EstimatorConfig& base) {
  cfg.validate();
  base.validate();
  if (tasks.empty()) throw Error(ErrorCode::InvalidArgument, "tune_k needs >= 1 training task");

  std::unordered_map<std::string, const DatasetProfile*> by_name;
  for (const auto& s : sources) by_name.emplace(s.name, &s);

  std::vector<PreparedTask> prepared;
  prepared.reserve(tasks.size());
  std::set<std::string> task_names;
  for (const auto& task : tasks) {
    if (!task_names.insert(task.target.name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate training task '" + task.target.name + "'");
    }
    PreparedTask p;
    p.task = &task;
    std::set<std::string> seen;
    for (const auto& rec : task.ground_truth) {
      auto it = by_name.find(rec.source_name);
      if (it == by_name.end()) {
        throw Error(ErrorCode::UnknownSource,
                    "'" + rec.source_name + "' in ground truth for '" + task.target.name + "'");
      }
      if (!seen.insert(rec.source_name).second) {
        throw Error(ErrorCode::DuplicateSourceName,
                    "'" + rec.source_name + "' twice for '" + task.target.name + "'");
      }
      p.candidates.push_back(*it->second);
      p.improvements.push_back(rec.improvement);
    }
    if (p.candidates.size() < 3) {
      throw Error(ErrorCode::TooFewSources,
                  "task '" + task.target.name + "' has " + std::to_string(p.candidates.size()) +
                      " sources, need >= 3");
    }
    prepared.push_back(std::move(p));
  }
  // Canonical task order makes the mean independent of input order bit-for-bit.
  std::sort(prepared.begin(), prepared.end(), [](const PreparedTask& a, const PreparedTask& b) {
    return a.task->target.name < b.task->target.name;
  });

  CalibrationReport report;
  report.top_T = cfg.top_T;
  bool have_best = false;
  std::vector<double> best_task_rho;

  for (auto kind : cfg.distance_kinds) {
    EstimatorConfig ecfg = base;
    ecfg.distance = kind;
    // z-components do not depend on k; compute them once per task.
    std::vector<std::vector<double>> z_size(prepared.size());
    std::vector<std::vector<double>> z_dist(prepared.size());
    for (std::size_t t = 0; t < prepared.size(); ++t) {
      const auto& p = prepared[t];
      std::vector<double> log_sizes;
      std::vector<double> dists;
      for (const auto& c : p.candidates) {
        log_sizes.push_back(std::log(static_cast<double>(c.size)));
        dists.push_back(target_source_distance(p.task->target, c, ecfg));
      }
      z_size[t] = zscale(log_sizes);
      z_dist[t] = zscale(dists);
    }

    for (double k : cfg.k_grid) {
      std::vector<double> task_rho(prepared.size(), 0.0);
      double sum = 0.0;
      for (std::size_t t = 0; t < prepared.size(); ++t) {
        std::vector<double> e(z_size[t].size());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = z_size[t][i] + k * z_dist[t][i];
        if (!is_constant(e) && !is_constant(prepared[t].improvements)) {
          task_rho[t] = spearman_rho(e, prepared[t].improvements);
        }
        sum += task_rho[t];
      }
      const double mean = sum / static_cast<double>(prepared.size());
      report.grid.push_back({k, kind, mean});

      bool better = !have_best;
      if (have_best) {
        if (mean > report.best_rho + 1e-12) {
          better = true;
        } else if (std::abs(mean - report.best_rho) <= 1e-12) {
          const double ak = std::abs(k);
          const double bk = std::abs(report.best_k);
          better = ak < bk || (ak == bk && kind_order(kind) < kind_order(report.best_distance));
        }
      }
      if (better) {
        have_best = true;
        report.best_k = k;
        report.best_distance = kind;
        report.best_rho = mean;
        best_task_rho = task_rho;
      }
    }
  }

  for (std::size_t t = 0; t < prepared.size(); ++t) {
    report.per_task_rho[prepared[t].task->target.name] = best_task_rho[t];
  }
  return report;
}

std::size_t picks_to_best(std::span<const std::string> ranking, const std::string& best_true) {
  auto it = std::find(ranking.begin(), ranking.end(), best_true);
  if (it == ranking.end()) {
    throw Error(ErrorCode::UnknownSource, "'" + best_true + "' is not in the ranking");
  }
  return static_cast<std::size_t>(it - ranking.begin()) + 1;
}

std::string best_source(std::span<const ImprovementRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyCandidates, "no records");
  const ImprovementRecord* best = &records.front();
  for (const auto& r : records) {
    if (r.improvement > best->improvement ||
        (r.improvement == best->improvement && r.source_name < best->source_name)) {
      best = &r;
    }
  }
  return best->source_name;
}

std::vector<GainRow> gain_table(std::span<const ImprovementRecord> records,
                                const std::map<std::string, std::optional<std::string>>& selections) {
  auto perf_of = [&](const std::optional<std::string>& pick) {
    if (!pick) {
      if (records.empty()) throw Error(ErrorCode::MissingRecord, "no scratch performance");
      return records.front().perf_scratch;
    }
    for (const auto& r : records) {
      if (r.source_name == *pick) return r.perf_transfer;
    }
    throw Error(ErrorCode::MissingRecord, "no record for '" + *pick + "'");
  };

  auto p2l = selections.find("P2L");
  if (p2l == selections.end()) throw Error(ErrorCode::MissingRecord, "selections lack P2L");
  const double ours = perf_of(p2l->second);

  std::vector<GainRow> rows;
  for (const auto& [method, pick] : selections) {
    if (method == "P2L") continue;
    const double theirs = perf_of(pick);
    if (theirs == 0.0) throw Error(ErrorCode::ZeroDenominator, method + " has zero performance");
    rows.push_back({method, pick, theirs, (ours - theirs) / theirs});
  }
  return rows;
}

}  // namespace p2l
