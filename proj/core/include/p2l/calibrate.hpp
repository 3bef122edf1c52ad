#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "p2l/types.hpp"

namespace p2l {

struct EvaluationConfig {
  std::size_t top_T = 1;
  std::vector<double> k_grid = default_k_grid();
  std::vector<DivergenceKind> distance_kinds{std::begin(kAllDivergenceKinds),
                                             std::end(kAllDivergenceKinds)};

  /// min, min+step, ..., max with exact endpoints. Default -3.00..0.00 step 0.05.
  static std::vector<double> make_k_grid(double min, double max, double step);
  static std::vector<double> default_k_grid() { return make_k_grid(-3.0, 0.0, 0.05); }

  void validate() const;
};

/// Average (fractional) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation: Pearson correlation of average ranks.
double spearman_rho(std::span<const double> a, std::span<const double> b);

struct TrainingTask {
  DatasetProfile target;
  std::vector<ImprovementRecord> ground_truth;
};

/// Grid search over (k, distance) maximizing the mean over tasks of
/// spearman_rho(E, I). Ties prefer smaller |k|, then the kind order
/// KL < JSD < CHI2 < EUC < CITYBLOCK. A task whose E scores are all equal
/// contributes rho = 0 at that grid point.
///
/// `base` supplies epsilon, summarizer and KL direction; its k and distance
/// are ignored.
CalibrationReport tune_k(std::span<const TrainingTask> tasks,
                         std::span<const DatasetProfile> sources, const EvaluationConfig& cfg,
                         const EstimatorConfig& base = {});

/// 1-based position of `best_true` in `ranking`.
std::size_t picks_to_best(std::span<const std::string> ranking, const std::string& best_true);

/// Source with the largest improvement (ties: lexicographically smallest name).
std::string best_source(std::span<const ImprovementRecord> records);

struct GainRow {
  std::string method;
  std::optional<std::string> pick;
  double perf = 0.0;
  double gain = 0.0;  // (perf(P2L) - perf(method)) / perf(method)
};

/// Relative gain of the "P2L" selection over every other method for one
/// target. `selections` must contain "P2L"; a nullopt pick (no transfer)
/// maps to perf_scratch.
std::vector<GainRow> gain_table(std::span<const ImprovementRecord> records,
                                const std::map<std::string, std::optional<std::string>>& selections);

}  // namespace p2l
