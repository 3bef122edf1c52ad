#include "p2l/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "p2l/error.hpp"
#include "p2l/summarize.hpp"

namespace p2l {

namespace {

void check_dims(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  }
}

void check_positive(std::span<const double> p, std::span<const double> q) {
  check_dims(p, q);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || !(q[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveComponent,
                  "component " + std::to_string(i) + " is not strictly positive; smooth first");
    }
  }
}

double kl_unchecked(std::span<const double> p, std::span<const double> q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] * std::log(p[i] / q[i]);
  return sum;
}

}  // namespace

double kl(std::span<const double> p, std::span<const double> q) {
  check_positive(p, q);
  // Rounding can leave a tiny negative sum for p ~ q.
  return std::max(0.0, kl_unchecked(p, q));
}

double js_distance(std::span<const double> p, std::span<const double> q) {
  check_positive(p, q);
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  const double js = 0.5 * kl_unchecked(p, m) + 0.5 * kl_unchecked(q, m);
  return std::sqrt(std::max(0.0, js));
}

double chi2(std::span<const double> p, std::span<const double> q) {
  check_positive(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    sum += d * d / (p[i] + q[i]);
  }
  return 0.5 * sum;
}

double euclidean(std::span<const double> p, std::span<const double> q) {
  check_dims(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double cityblock(std::span<const double> p, std::span<const double> q) {
  check_dims(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return sum;
}

double distance(DivergenceKind kind, const SummaryVector& p, const SummaryVector& q,
                double epsilon) {
  check_dims(p.values, q.values);
  if (is_probability_kind(kind)) {
    if (!p.normalized || !q.normalized) {
      throw Error(ErrorCode::NotNormalized,
                  std::string(to_string(kind)) + " needs L1-normalized summaries");
    }
    const auto ps = smooth(std::span<const double>(p.values), epsilon);
    const auto qs = smooth(std::span<const double>(q.values), epsilon);
    switch (kind) {
      case DivergenceKind::KL: return kl(ps, qs);
      case DivergenceKind::JSD: return js_distance(ps, qs);
      default: return chi2(ps, qs);
    }
  }
  if (kind == DivergenceKind::EUC) return euclidean(p.values, q.values);
  return cityblock(p.values, q.values);
}

double target_source_distance(const DatasetProfile& target, const DatasetProfile& source,
                              const EstimatorConfig& cfg) {
  if (cfg.distance == DivergenceKind::KL && !cfg.kl_target_first) {
    return distance(cfg.distance, source.summary, target.summary, cfg.epsilon);
  }
  return distance(cfg.distance, target.summary, source.summary, cfg.epsilon);
}

}  // namespace p2l
