#pragma once

#include <span>
#include <vector>

#include "p2l/types.hpp"

namespace p2l {

struct SummarizeOptions {
  /// Keep a mean with negative components as an unnormalized summary
  /// (usable with EUC/CITYBLOCK only) instead of failing.
  bool allow_negative = false;
};

/// Dataset summary F(.): per-dimension (trimmed) mean of the rows followed by
/// L1 normalization. Trimming drops the floor(f*n) lowest and highest values
/// of each dimension independently.
SummaryVector summarize(const EmbeddingMatrix& matrix, const Summarizer& summarizer,
                        const SummarizeOptions& options = {});

/// Divides by the component sum. Throws NegativeMass if the sum is <= 0.
std::vector<double> l1_normalize(std::span<const double> v);

/// (v_i + eps) / (1 + d*eps) for every component; output stays L1-normalized
/// and becomes strictly positive.
SummaryVector smooth(const SummaryVector& v, double epsilon);
std::vector<double> smooth(std::span<const double> v, double epsilon);

}  // namespace p2l
