#pragma once

#include <span>

#include "p2l/types.hpp"

namespace p2l {

// Raw kernels. The probability kernels (kl, js_distance, chi2) require
// strictly positive inputs of equal length and throw NonPositiveComponent
// otherwise; all logs are natural.

double kl(std::span<const double> p, std::span<const double> q);
/// Jensen-Shannon distance: the square root of the JS divergence.
double js_distance(std::span<const double> p, std::span<const double> q);
/// 0.5 * sum (p_i - q_i)^2 / (p_i + q_i)
double chi2(std::span<const double> p, std::span<const double> q);
double euclidean(std::span<const double> p, std::span<const double> q);
double cityblock(std::span<const double> p, std::span<const double> q);

/// D(p, q) over two summaries. For KL/JSD/CHI2 both inputs must be
/// normalized; they are smoothed with `epsilon` before the kernel runs.
/// EUC/CITYBLOCK use the summary values as-is.
double distance(DivergenceKind kind, const SummaryVector& p, const SummaryVector& q,
                double epsilon);

/// D(target, source) under an estimator config (honours the KL direction).
double target_source_distance(const DatasetProfile& target, const DatasetProfile& source,
                              const EstimatorConfig& cfg);

}  // namespace p2l
