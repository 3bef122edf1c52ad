#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "p2l/types.hpp"

namespace p2l {

/// (x - mean) / sd with the population standard deviation. A single value or
/// a zero-variance list maps to all zeros.
std::vector<double> zscale(std::span<const double> values);

/// Embedding divergence E(t, s) = z(ln|s|) + k * z(D(t, s)) for every
/// candidate. The z statistics are taken over exactly this candidate set.
/// Output is sorted by descending score, then descending size, then name.
std::vector<ScoredSource> score_sources(const DatasetProfile& target,
                                        std::span<const DatasetProfile> sources,
                                        const EstimatorConfig& cfg);

/// Same as score_sources but with precomputed distances (one per source, in
/// order). Used when the distance is shared across many k values.
std::vector<ScoredSource> score_with_distances(std::span<const DatasetProfile> sources,
                                               std::span<const double> distances, double k);

/// Name of the top-scored source.
std::string select_source(std::span<const ScoredSource> scored);

enum class Baseline { B1, B2, B3, B4, B5 };

std::string_view to_string(Baseline b);
Baseline parse_baseline(std::string_view text);

/// B1 largest, B2 fixed reference, B3 seeded uniform pick, B4 no transfer
/// (returns nullopt), B5 least divergent under cfg.
std::optional<std::string> baseline_select(Baseline kind, const DatasetProfile& target,
                                           std::span<const DatasetProfile> sources,
                                           const EstimatorConfig& cfg,
                                           const std::optional<std::string>& reference_name = {},
                                           std::optional<std::uint64_t> rng_seed = {});

/// Size-weighted combination of mean-summarized profiles; equal to the
/// profile of the row-concatenated data.
DatasetProfile merge_profiles(std::span<const DatasetProfile> profiles, const std::string& name);

}  // namespace p2l
