#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "p2l/types.hpp"

namespace p2l::io {

namespace fs = std::filesystem;

// Embedding files.
//
// Text:   "# p2l-embeddings v1 dim=<d> extractor=<id>" then one row of d
//         comma-separated decimals per line.
// Binary: "P2LE", u32 version (1), u32 dim, u64 count, u8 id length, id
//         bytes, then count*dim float32 row-major. Little-endian throughout.

EmbeddingMatrix read_embeddings_csv(const fs::path& path);
EmbeddingMatrix parse_embeddings_csv(std::string_view text);
void write_embeddings_csv(const fs::path& path, const EmbeddingMatrix& m);

EmbeddingMatrix read_embeddings_bin(const fs::path& path);
EmbeddingMatrix parse_embeddings_bin(std::string_view bytes);
void write_embeddings_bin(const fs::path& path, const EmbeddingMatrix& m);

/// Dispatches on the leading magic bytes.
EmbeddingMatrix read_embeddings(const fs::path& path);

/// "%.17g": 17 significant digits, enough to parse back to the same double.
std::string format_double(double x);

std::string profile_to_json(const DatasetProfile& p);
DatasetProfile profile_from_json(std::string_view text);

/// True for names matching [A-Za-z0-9_-]+.
bool is_valid_name(std::string_view name);

/// Directory of `<name>.profile.json` documents plus a `registry.json`
/// manifest. Saves are atomic (temp file + rename); a registry assumes a
/// single writer.
class ProfileRegistry {
 public:
  static constexpr int kFormatVersion = 1;

  /// Opens `root`, creating the directory and manifest when `create` is set.
  explicit ProfileRegistry(fs::path root, bool create = true);

  const fs::path& root() const noexcept { return root_; }

  void save(const DatasetProfile& p, bool overwrite = false) const;
  DatasetProfile load(const std::string& name) const;
  bool contains(const std::string& name) const;
  /// Sorted by name.
  std::vector<std::string> names() const;
  std::vector<DatasetProfile> load_all(std::optional<Role> role = std::nullopt) const;

  fs::path path_for(const std::string& name) const;

 private:
  fs::path root_;
};

// Ground truth interchange: header "target,source,perf_transfer,perf_scratch".
std::vector<ImprovementRecord> read_ground_truth_csv(const fs::path& path);
std::vector<ImprovementRecord> parse_ground_truth_csv(std::string_view text);
std::string ground_truth_to_csv(const std::vector<ImprovementRecord>& records);

std::string read_file(const fs::path& path);
/// Writes through a sibling temp file and renames over `path`.
void write_file_atomic(const fs::path& path, std::string_view contents);

}  // namespace p2l::io
