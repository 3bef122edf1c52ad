#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace p2l {

/// Per-item feature vectors of one dataset, row-major, as produced by a
/// single reference extractor. Shape and finiteness are checked on
/// construction; the object is immutable afterwards.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(std::size_t items, std::size_t dim, std::vector<double> values,
                  std::string extractor_id);

  std::size_t items() const noexcept { return items_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& extractor_id() const noexcept { return extractor_id_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  double at(std::size_t i, std::size_t j) const noexcept { return values_[i * dim_ + j]; }

  /// Rows of `a` followed by rows of `b`. Dimensions and extractor ids must agree.
  static EmbeddingMatrix concat(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

 private:
  std::size_t items_;
  std::size_t dim_;
  std::vector<double> values_;
  std::string extractor_id_;
};

struct Summarizer {
  enum class Kind { Mean, TrimmedMean };
  Kind kind = Kind::Mean;
  double trim_fraction = 0.0;  // only meaningful for TrimmedMean

  static Summarizer mean() { return {}; }
  static Summarizer trimmed(double fraction) { return {Kind::TrimmedMean, fraction}; }

  friend bool operator==(const Summarizer&, const Summarizer&) = default;
};

/// "mean" or "trimmed:<fraction>".
std::string to_string(const Summarizer& s);
Summarizer parse_summarizer(std::string_view text);

/// Dataset summary: `raw_mean` is the (trimmed) per-dimension mean and
/// `values` its L1 normalization. When `normalized` is false, `values` holds
/// the raw mean unchanged (only the Minkowski distances accept that).
struct SummaryVector {
  std::vector<double> values;
  std::vector<double> raw_mean;
  Summarizer summarizer;
  bool normalized = true;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const SummaryVector&, const SummaryVector&) = default;
};

enum class Role { Source, Target };

std::string_view to_string(Role r);
Role parse_role(std::string_view text);

struct DatasetProfile {
  std::string name;
  std::uint64_t size = 0;  // item count |s|
  SummaryVector summary;
  std::string extractor_id;
  Role role = Role::Source;

  friend bool operator==(const DatasetProfile&, const DatasetProfile&) = default;
};

enum class DivergenceKind { KL, JSD, CHI2, EUC, CITYBLOCK };

inline constexpr DivergenceKind kAllDivergenceKinds[] = {
    DivergenceKind::KL, DivergenceKind::JSD, DivergenceKind::CHI2, DivergenceKind::EUC,
    DivergenceKind::CITYBLOCK};

std::string_view to_string(DivergenceKind kind);
DivergenceKind parse_divergence_kind(std::string_view text);

/// KL/JSD/CHI2 need strictly positive, normalized inputs.
constexpr bool is_probability_kind(DivergenceKind kind) noexcept {
  return kind == DivergenceKind::KL || kind == DivergenceKind::JSD ||
         kind == DivergenceKind::CHI2;
}

struct EstimatorConfig {
  DivergenceKind distance = DivergenceKind::KL;
  double k = -1.0;
  double epsilon = 1e-6;
  Summarizer summarizer = Summarizer::mean();
  /// D(t, s) = KL(target || source) when true, KL(source || target) otherwise.
  bool kl_target_first = true;
  bool allow_mixed_extractors = false;

  /// Throws InvalidArgument / NonPositiveEpsilon on a bad config.
  void validate() const;
};

/// One row of an E(t, s) ranking. `score` is always
/// `z_log_size + k * z_distance` for the k that produced it.
struct ScoredSource {
  std::string source_name;
  std::uint64_t size = 0;
  double distance_value = 0.0;
  double log_size = 0.0;
  double z_log_size = 0.0;
  double z_distance = 0.0;
  double score = 0.0;
};

/// Measured transfer improvement for one (target, source) pair.
struct ImprovementRecord {
  std::string target_name;
  std::string source_name;
  double perf_transfer = 0.0;
  double perf_scratch = 0.0;
  double improvement = 0.0;

  static ImprovementRecord make(std::string target, std::string source, double perf_transfer,
                                double perf_scratch);
};

struct CalibrationGridPoint {
  double k = 0.0;
  DivergenceKind distance = DivergenceKind::KL;
  double mean_rho = 0.0;
};

struct CalibrationReport {
  double best_k = 0.0;
  DivergenceKind best_distance = DivergenceKind::KL;
  double best_rho = 0.0;
  std::vector<CalibrationGridPoint> grid;
  std::map<std::string, double> per_task_rho;  // at the best grid point
  std::size_t top_T = 1;
};

}  // namespace p2l
