#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "p2l/summarize.hpp"
#include "p2l/types.hpp"

namespace p2l::test {

inline DatasetProfile profile_from_rows(const std::string& name, std::size_t items, std::size_t dim,
                                        std::vector<double> values, Role role = Role::Source,
                                        const std::string& extractor = "ref") {
  DatasetProfile p;
  p.name = name;
  p.size = items;
  p.summary = summarize(EmbeddingMatrix(items, dim, std::move(values), extractor), Summarizer::mean());
  p.extractor_id = extractor;
  p.role = role;
  return p;
}

// Profile with an explicit (already normalized) summary and size.
inline DatasetProfile profile_with(const std::string& name, std::uint64_t size, std::vector<double> summary,
                                   Role role = Role::Source, const std::string& extractor = "ref") {
  DatasetProfile p;
  p.name = name;
  p.size = size;
  p.summary.values = summary;
  p.summary.raw_mean = std::move(summary);
  p.extractor_id = extractor;
  p.role = role;
  return p;
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t dim) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(dim);
  double s = 0.0;
  for (auto& x : v) s += (x = e(rng) + 1e-9);
  for (auto& x : v) x /= s;
  return v;
}

inline EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t items, std::size_t dim,
                                     const std::string& extractor = "ref") {
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<double> v(items * dim);
  for (auto& x : v) x = u(rng);
  return EmbeddingMatrix(items, dim, std::move(v), extractor);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace p2l::test

#include <filesystem>
#include <unistd.h>

namespace p2l::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("p2l-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace p2l::test
