#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace p2l::test {

// Result of one randomized property sweep.
struct PropertyResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::string first_failure;  // empty when clean
  double worst = 0.0;         // largest observed deviation, where tracked
};

std::vector<PropertyResult> divergence_properties(std::uint64_t seed, std::size_t trials = 1000);
std::vector<PropertyResult> zscale_properties(std::uint64_t seed, std::size_t trials = 1000);
PropertyResult spearman_closed_form(std::uint64_t seed, std::size_t trials = 1000);
PropertyResult merge_concatenation(std::uint64_t seed, std::size_t trials = 1000);

PropertyResult size_only_matches_b1(std::uint64_t seed, std::size_t trials = 100);
PropertyResult large_negative_k_matches_b5(std::uint64_t seed, std::size_t trials = 100);
PropertyResult affine_distance_invariance(std::uint64_t seed, std::size_t trials = 100);
PropertyResult affine_log_size_invariance(std::uint64_t seed, std::size_t trials = 100);

// Analytic softmax gradients vs central differences on random small models.
PropertyResult gradient_check(std::uint64_t seed, std::size_t instances = 20, double tolerance = 1e-5);

}  // namespace p2l::test
