#include "p2l/summarize.hpp"

#include <algorithm>
#include <cmath>

#include "p2l/error.hpp"

namespace p2l {

namespace {

std::vector<double> column_means(const EmbeddingMatrix& m) {
  std::vector<double> sum(m.dim(), 0.0);
  for (std::size_t i = 0; i < m.items(); ++i) {
    auto row = m.row(i);
    for (std::size_t j = 0; j < m.dim(); ++j) sum[j] += row[j];
  }
  const double n = static_cast<double>(m.items());
  for (auto& s : sum) s /= n;
  return sum;
}

std::vector<double> trimmed_column_means(const EmbeddingMatrix& m, double fraction) {
  const std::size_t n = m.items();
  const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  std::vector<double> out(m.dim(), 0.0);
  std::vector<double> column(n);
  for (std::size_t j = 0; j < m.dim(); ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = m.at(i, j);
    if (cut > 0) {
      std::nth_element(column.begin(), column.begin() + cut, column.end());
      std::nth_element(column.begin() + cut, column.end() - cut, column.end());
    }
    double sum = 0.0;
    for (std::size_t i = cut; i < n - cut; ++i) sum += column[i];
    out[j] = sum / static_cast<double>(n - 2 * cut);
  }
  return out;
}

}  // namespace

std::vector<double> l1_normalize(std::span<const double> v) {
  double mass = 0.0;
  for (double x : v) mass += x;
  if (!(mass > 0.0)) throw Error(ErrorCode::NegativeMass, "component sum is not positive");
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x /= mass;
  return out;
}

SummaryVector summarize(const EmbeddingMatrix& matrix, const Summarizer& summarizer,
                        const SummarizeOptions& options) {
  SummaryVector out;
  out.summarizer = summarizer;
  if (summarizer.kind == Summarizer::Kind::Mean) {
    out.raw_mean = column_means(matrix);
  } else {
    if (!(summarizer.trim_fraction >= 0.0 && summarizer.trim_fraction < 0.5)) {
      throw Error(ErrorCode::InvalidArgument, "trim fraction must be in [0, 0.5)");
    }
    // f = 0 trims nothing; route it through the plain mean so both agree bit-for-bit.
    out.raw_mean = summarizer.trim_fraction == 0.0
                       ? column_means(matrix)
                       : trimmed_column_means(matrix, summarizer.trim_fraction);
  }

  const bool has_negative =
      std::any_of(out.raw_mean.begin(), out.raw_mean.end(), [](double x) { return x < 0.0; });
  if (has_negative) {
    if (!options.allow_negative) {
      throw Error(ErrorCode::NegativeComponent,
                  "mean has negative components; probability distances are undefined");
    }
    out.values = out.raw_mean;
    out.normalized = false;
    return out;
  }
  out.values = l1_normalize(out.raw_mean);
  out.normalized = true;
  return out;
}

std::vector<double> smooth(std::span<const double> v, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be > 0");
  const double denom = 1.0 + static_cast<double>(v.size()) * epsilon;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] + epsilon) / denom;
  return out;
}

SummaryVector smooth(const SummaryVector& v, double epsilon) {
  if (!v.normalized) throw Error(ErrorCode::NotNormalized, "smoothing needs an L1-normalized summary");
  SummaryVector out = v;
  out.values = smooth(std::span<const double>(v.values), epsilon);
  return out;
}

}  // namespace p2l
