#include "p2l/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "p2l/divergence.hpp"
#include "p2l/error.hpp"
#include "p2l/summarize.hpp"

namespace p2l {

std::vector<double> zscale(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.size() < 2) return out;
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  // Identical values can still leave rounding noise in sd.
  if (sd == 0.0 || sd <= 1e-14 * std::abs(mean)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  return out;
}

namespace {

void check_candidates(const DatasetProfile* target, std::span<const DatasetProfile> sources,
                      bool allow_mixed_extractors) {
  if (sources.empty()) throw Error(ErrorCode::EmptyCandidates, "no source candidates");
  std::set<std::string_view> names;
  const std::size_t dim = sources.front().summary.dim();
  const std::string& extractor =
      target != nullptr ? target->extractor_id : sources.front().extractor_id;
  if (target != nullptr && target->summary.dim() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "target '" + target->name + "' has dim " +
                                                  std::to_string(target->summary.dim()) +
                                                  ", sources have " + std::to_string(dim));
  }
  for (const auto& s : sources) {
    if (!names.insert(s.name).second) throw Error(ErrorCode::DuplicateSourceName, s.name);
    if (s.summary.dim() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "source '" + s.name + "' has dim " +
                                                    std::to_string(s.summary.dim()));
    }
    if (s.size < 1) throw Error(ErrorCode::InvalidArgument, "source '" + s.name + "' has size 0");
    if (!allow_mixed_extractors && s.extractor_id != extractor) {
      throw Error(ErrorCode::MixedExtractors,
                  "'" + s.name + "' uses extractor " + s.extractor_id + ", expected " + extractor);
    }
  }
}

bool ranks_before(const ScoredSource& a, const ScoredSource& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.size != b.size) return a.size > b.size;
  return a.source_name < b.source_name;
}

}  // namespace

std::vector<ScoredSource> score_with_distances(std::span<const DatasetProfile> sources,
                                               std::span<const double> distances, double k) {
  if (sources.size() != distances.size()) {
    throw Error(ErrorCode::LengthMismatch, "one distance per source required");
  }
  std::vector<double> log_sizes(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    log_sizes[i] = std::log(static_cast<double>(sources[i].size));
  }
  const auto z_size = zscale(log_sizes);
  const auto z_dist = zscale(distances);

  std::vector<ScoredSource> out(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto& s = out[i];
    s.source_name = sources[i].name;
    s.size = sources[i].size;
    s.distance_value = distances[i];
    s.log_size = log_sizes[i];
    s.z_log_size = z_size[i];
    s.z_distance = z_dist[i];
    s.score = s.z_log_size + k * s.z_distance;
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

std::vector<ScoredSource> score_sources(const DatasetProfile& target,
                                        std::span<const DatasetProfile> sources,
                                        const EstimatorConfig& cfg) {
  cfg.validate();
  check_candidates(&target, sources, cfg.allow_mixed_extractors);
  std::vector<double> distances(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    distances[i] = target_source_distance(target, sources[i], cfg);
  }
  return score_with_distances(sources, distances, cfg.k);
}

std::string select_source(std::span<const ScoredSource> scored) {
  if (scored.empty()) throw Error(ErrorCode::EmptyCandidates, "nothing to select from");
  const ScoredSource* best = &scored.front();
  for (const auto& s : scored) {
    if (ranks_before(s, *best)) best = &s;
  }
  return best->source_name;
}

std::string_view to_string(Baseline b) {
  switch (b) {
    case Baseline::B1: return "B1";
    case Baseline::B2: return "B2";
    case Baseline::B3: return "B3";
    case Baseline::B4: return "B4";
    case Baseline::B5: return "B5";
  }
  return "?";
}

Baseline parse_baseline(std::string_view text) {
  for (auto b : {Baseline::B1, Baseline::B2, Baseline::B3, Baseline::B4, Baseline::B5}) {
    if (to_string(b) == text) return b;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown baseline: " + std::string(text));
}

std::optional<std::string> baseline_select(Baseline kind, const DatasetProfile& target,
                                           std::span<const DatasetProfile> sources,
                                           const EstimatorConfig& cfg,
                                           const std::optional<std::string>& reference_name,
                                           std::optional<std::uint64_t> rng_seed) {
  if (kind == Baseline::B4) return std::nullopt;
  check_candidates(kind == Baseline::B5 ? &target : nullptr, sources, cfg.allow_mixed_extractors);

  switch (kind) {
    case Baseline::B1: {
      const DatasetProfile* best = &sources.front();
      for (const auto& s : sources) {
        if (s.size > best->size || (s.size == best->size && s.name < best->name)) best = &s;
      }
      return best->name;
    }
    case Baseline::B2: {
      if (!reference_name) throw Error(ErrorCode::MissingReference, "B2 needs a reference source");
      for (const auto& s : sources) {
        if (s.name == *reference_name) return s.name;
      }
      throw Error(ErrorCode::MissingReference, "'" + *reference_name + "' is not a candidate");
    }
    case Baseline::B3: {
      if (!rng_seed) throw Error(ErrorCode::MissingSeed, "B3 needs an explicit seed");
      std::vector<std::string> names;
      for (const auto& s : sources) names.push_back(s.name);
      std::sort(names.begin(), names.end());
      std::mt19937_64 rng(*rng_seed);
      std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
      return names[pick(rng)];
    }
    case Baseline::B5: {
      cfg.validate();
      const DatasetProfile* best = nullptr;
      double best_d = 0.0;
      for (const auto& s : sources) {
        const double d = target_source_distance(target, s, cfg);
        if (best == nullptr || d < best_d || (d == best_d && s.name < best->name)) {
          best = &s;
          best_d = d;
        }
      }
      return best->name;
    }
    case Baseline::B4: break;
  }
  return std::nullopt;
}

DatasetProfile merge_profiles(std::span<const DatasetProfile> profiles, const std::string& name) {
  if (profiles.size() < 2) throw Error(ErrorCode::InvalidArgument, "merge needs >= 2 profiles");
  const auto& first = profiles.front();
  const std::size_t dim = first.summary.raw_mean.size();
  std::vector<double> weighted(dim, 0.0);
  std::uint64_t total = 0;
  for (const auto& p : profiles) {
    if (p.summary.summarizer.kind != Summarizer::Kind::Mean) {
      throw Error(ErrorCode::MixedSummarizers, "'" + p.name + "' is not a plain-mean profile");
    }
    if (p.summary.raw_mean.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "'" + p.name + "' has a different dim");
    }
    if (p.extractor_id != first.extractor_id) {
      throw Error(ErrorCode::MixedExtractors, "'" + p.name + "' uses " + p.extractor_id);
    }
    const double n = static_cast<double>(p.size);
    for (std::size_t j = 0; j < dim; ++j) weighted[j] += n * p.summary.raw_mean[j];
    total += p.size;
  }
  for (auto& w : weighted) w /= static_cast<double>(total);

  DatasetProfile out;
  out.name = name;
  out.size = total;
  out.extractor_id = first.extractor_id;
  out.role = Role::Source;
  out.summary.summarizer = Summarizer::mean();
  out.summary.raw_mean = weighted;
  if (std::any_of(weighted.begin(), weighted.end(), [](double x) { return x < 0.0; })) {
    out.summary.values = weighted;
    out.summary.normalized = false;
  } else {
    out.summary.values = l1_normalize(weighted);
    out.summary.normalized = true;
  }
  return out;
}

}  // namespace p2l
