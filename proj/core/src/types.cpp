#include "p2l/types.hpp"

#include <charconv>
#include <cmath>

#include "p2l/error.hpp"

namespace p2l {

EmbeddingMatrix::EmbeddingMatrix(std::size_t items, std::size_t dim, std::vector<double> values,
                                 std::string extractor_id)
    : items_(items), dim_(dim), values_(std::move(values)), extractor_id_(std::move(extractor_id)) {
  if (items_ == 0 || dim_ == 0) throw Error(ErrorCode::EmptyMatrix, "matrix needs n >= 1 and d >= 1");
  if (values_.size() != items_ * dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(items_ * dim_) + " values, got " +
                    std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::NonFiniteValue, "non-finite value in row " + std::to_string(i / dim_));
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::concat(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "concat of unequal dims");
  if (a.extractor_id() != b.extractor_id()) {
    throw Error(ErrorCode::MixedExtractors, a.extractor_id() + " vs " + b.extractor_id());
  }
  std::vector<double> values;
  values.reserve(a.values_.size() + b.values_.size());
  values.insert(values.end(), a.values_.begin(), a.values_.end());
  values.insert(values.end(), b.values_.begin(), b.values_.end());
  return EmbeddingMatrix(a.items() + b.items(), a.dim(), std::move(values), a.extractor_id());
}

std::string to_string(const Summarizer& s) {
  if (s.kind == Summarizer::Kind::Mean) return "mean";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, s.trim_fraction);
  (void)ec;
  return "trimmed:" + std::string(buf, end);
}

Summarizer parse_summarizer(std::string_view text) {
  if (text == "mean") return Summarizer::mean();
  constexpr std::string_view prefix = "trimmed";
  if (text.substr(0, prefix.size()) == prefix) {
    auto rest = text.substr(prefix.size());
    if (rest.empty()) return Summarizer::trimmed(0.1);
    if (rest.front() == ':') {
      rest.remove_prefix(1);
      double f = 0.0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), f);
      if (ec == std::errc{} && ptr == rest.data() + rest.size() && f >= 0.0 && f < 0.5) {
        return Summarizer::trimmed(f);
      }
    }
  }
  throw Error(ErrorCode::InvalidArgument,
              "summarizer must be 'mean' or 'trimmed:<f>' with f in [0, 0.5): " + std::string(text));
}

std::string_view to_string(Role r) { return r == Role::Source ? "source" : "target"; }

Role parse_role(std::string_view text) {
  if (text == "source") return Role::Source;
  if (text == "target") return Role::Target;
  throw Error(ErrorCode::InvalidArgument, "role must be source or target: " + std::string(text));
}

std::string_view to_string(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::KL: return "KL";
    case DivergenceKind::JSD: return "JSD";
    case DivergenceKind::CHI2: return "CHI2";
    case DivergenceKind::EUC: return "EUC";
    case DivergenceKind::CITYBLOCK: return "CITYBLOCK";
  }
  return "?";
}

DivergenceKind parse_divergence_kind(std::string_view text) {
  for (auto kind : kAllDivergenceKinds) {
    if (to_string(kind) == text) return kind;
  }
  throw Error(ErrorCode::InvalidArgument,
              "distance must be one of KL, JSD, CHI2, EUC, CITYBLOCK: " + std::string(text));
}

void EstimatorConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::NonPositiveEpsilon, "epsilon must be > 0");
  if (!std::isfinite(k)) throw Error(ErrorCode::InvalidArgument, "k must be finite");
  if (summarizer.kind == Summarizer::Kind::TrimmedMean &&
      !(summarizer.trim_fraction >= 0.0 && summarizer.trim_fraction < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "trim fraction must be in [0, 0.5)");
  }
}

ImprovementRecord ImprovementRecord::make(std::string target, std::string source,
                                          double perf_transfer, double perf_scratch) {
  return {std::move(target), std::move(source), perf_transfer, perf_scratch,
          perf_transfer - perf_scratch};
}

}  // namespace p2l
