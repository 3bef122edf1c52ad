#include "p2l/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "p2l/error.hpp"

namespace p2l::io {

using nlohmann::json;

namespace {

constexpr std::string_view kCsvMagic = "# p2l-embeddings v1";
constexpr std::string_view kBinMagic = "P2LE";
constexpr std::uint32_t kBinVersion = 1;
constexpr std::string_view kGroundTruthHeader = "target,source,perf_transfer,perf_scratch";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits on '\n', keeping 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> lines_of(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    out.emplace_back(line_no, text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

template <typename T>
T read_le(std::string_view bytes, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

template <typename T>
void append_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoFailure, "cannot rename onto " + path.string());
  }
}

std::string format_double(double x) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

// ---------------------------------------------------------------- embeddings

EmbeddingMatrix parse_embeddings_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::BadHeader, "empty file", 1);

  // "# p2l-embeddings v1 dim=<d> extractor=<id>"
  const auto header = trim(lines.front().second);
  if (header.substr(0, kCsvMagic.size()) != kCsvMagic) {
    throw Error(ErrorCode::BadHeader, "expected '" + std::string(kCsvMagic) + " dim=.. extractor=..'", 1);
  }
  std::optional<std::size_t> dim;
  std::optional<std::string> extractor;
  for (auto tok : split(trim(header.substr(kCsvMagic.size())), ' ')) {
    if (tok.empty()) continue;
    if (tok.substr(0, 4) == "dim=") {
      std::size_t d = 0;
      auto v = tok.substr(4);
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
      if (ec != std::errc{} || ptr != v.data() + v.size() || d == 0) {
        throw Error(ErrorCode::BadHeader, "bad dim '" + std::string(v) + "'", 1);
      }
      dim = d;
    } else if (tok.substr(0, 10) == "extractor=") {
      extractor = std::string(tok.substr(10));
      if (extractor->empty()) throw Error(ErrorCode::BadHeader, "empty extractor id", 1);
    } else {
      throw Error(ErrorCode::BadHeader, "unexpected header field '" + std::string(tok) + "'", 1);
    }
  }
  if (!dim || !extractor) throw Error(ErrorCode::BadHeader, "header needs dim= and extractor=", 1);

  std::vector<double> values;
  std::size_t rows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [line_no, raw] = lines[i];
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != *dim) {
      throw Error(ErrorCode::RaggedRow,
                  "expected " + std::to_string(*dim) + " values, got " + std::to_string(fields.size()),
                  line_no);
    }
    for (auto f : fields) {
      const auto v = parse_double(f);
      if (!v) throw Error(ErrorCode::MalformedInput, "not a number: '" + std::string(trim(f)) + "'", line_no);
      if (!std::isfinite(*v)) throw Error(ErrorCode::NonFiniteValue, std::string(trim(f)), line_no);
      values.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::EmptyMatrix, "no data rows");
  return EmbeddingMatrix(rows, *dim, std::move(values), *extractor);
}

EmbeddingMatrix read_embeddings_csv(const fs::path& path) {
  return parse_embeddings_csv(read_file(path));
}

void write_embeddings_csv(const fs::path& path, const EmbeddingMatrix& m) {
  std::string out;
  out += std::string(kCsvMagic) + " dim=" + std::to_string(m.dim()) + " extractor=" + m.extractor_id() + "\n";
  for (std::size_t i = 0; i < m.items(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

EmbeddingMatrix parse_embeddings_bin(std::string_view bytes) {
  constexpr std::size_t kFixed = 4 + 4 + 4 + 8 + 1;
  if (bytes.size() < 4 || bytes.substr(0, 4) != kBinMagic) {
    throw Error(ErrorCode::BadMagic, "missing P2LE magic");
  }
  if (bytes.size() < kFixed) throw Error(ErrorCode::TruncatedFile, "header cut short");
  const auto version = read_le<std::uint32_t>(bytes, 4);
  if (version != kBinVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));
  }
  const auto dim = read_le<std::uint32_t>(bytes, 8);
  const auto count = read_le<std::uint64_t>(bytes, 12);
  const auto id_len = static_cast<unsigned char>(bytes[20]);
  if (bytes.size() < kFixed + id_len) throw Error(ErrorCode::TruncatedFile, "extractor id cut short");
  std::string extractor(bytes.substr(kFixed, id_len));
  const std::size_t payload_at = kFixed + id_len;

  if (dim == 0 || count == 0) throw Error(ErrorCode::EmptyMatrix, "dim and count must be >= 1");
  const std::uint64_t available = (bytes.size() - payload_at) / 4;
  if (count > available / dim) {
    throw Error(ErrorCode::TruncatedFile,
                "declared " + std::to_string(count) + " rows, payload holds " +
                    std::to_string(available / dim));
  }
  const std::size_t n = static_cast<std::size_t>(count) * dim;
  if (bytes.size() - payload_at != n * 4) {
    throw Error(ErrorCode::MalformedInput, "trailing bytes after payload");
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = static_cast<double>(std::bit_cast<float>(read_le<std::uint32_t>(bytes, payload_at + 4 * i)));
  }
  return EmbeddingMatrix(static_cast<std::size_t>(count), dim, std::move(values), std::move(extractor));
}

EmbeddingMatrix read_embeddings_bin(const fs::path& path) {
  return parse_embeddings_bin(read_file(path));
}

void write_embeddings_bin(const fs::path& path, const EmbeddingMatrix& m) {
  if (m.extractor_id().size() > 255) {
    throw Error(ErrorCode::InvalidArgument, "extractor id longer than 255 bytes");
  }
  std::string out(kBinMagic);
  append_le<std::uint32_t>(out, kBinVersion);
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.dim()));
  append_le<std::uint64_t>(out, m.items());
  out.push_back(static_cast<char>(m.extractor_id().size()));
  out += m.extractor_id();
  for (double v : m.values()) append_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  write_file_atomic(path, out);
}

EmbeddingMatrix read_embeddings(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.substr(0, 4) == kBinMagic) return parse_embeddings_bin(bytes);
  return parse_embeddings_csv(bytes);
}

// ------------------------------------------------------------------ profiles

bool is_valid_name(std::string_view name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-';
  });
}

namespace {

std::string number_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out + "]";
}

std::vector<double> doubles_from(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array()) {
    throw Error(ErrorCode::MalformedInput, std::string("missing array '") + field + "'");
  }
  std::vector<double> out;
  for (const auto& x : j[field]) {
    if (!x.is_number()) throw Error(ErrorCode::MalformedInput, std::string("non-number in '") + field + "'");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

std::string profile_to_json(const DatasetProfile& p) {
  // Numbers are formatted by hand so every double is written with 17 significant digits.
  std::string out = "{\n";
  out += "  \"name\": " + json(p.name).dump() + ",\n";
  out += "  \"role\": " + json(std::string(to_string(p.role))).dump() + ",\n";
  out += "  \"size\": " + std::to_string(p.size) + ",\n";
  out += "  \"dim\": " + std::to_string(p.summary.dim()) + ",\n";
  out += "  \"summarizer\": " + json(to_string(p.summary.summarizer)).dump() + ",\n";
  out += "  \"extractor_id\": " + json(p.extractor_id).dump() + ",\n";
  out += "  \"normalized\": " + std::string(p.summary.normalized ? "true" : "false") + ",\n";
  out += "  \"raw_mean\": " + number_array(p.summary.raw_mean) + ",\n";
  out += "  \"summary\": " + number_array(p.summary.values) + "\n";
  out += "}\n";
  return out;
}

DatasetProfile profile_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, e.what());
  }
  try {
    DatasetProfile p;
    p.name = j.at("name").get<std::string>();
    p.role = parse_role(j.at("role").get<std::string>());
    p.size = j.at("size").get<std::uint64_t>();
    const auto dim = j.at("dim").get<std::size_t>();
    p.summary.summarizer = parse_summarizer(j.at("summarizer").get<std::string>());
    p.extractor_id = j.at("extractor_id").get<std::string>();
    p.summary.normalized = j.value("normalized", true);
    p.summary.raw_mean = doubles_from(j, "raw_mean");
    p.summary.values = doubles_from(j, "summary");
    if (p.summary.raw_mean.size() != dim || p.summary.values.size() != dim || dim == 0) {
      throw Error(ErrorCode::MalformedInput, "array lengths disagree with dim");
    }
    if (p.size < 1) throw Error(ErrorCode::MalformedInput, "size must be >= 1");
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedInput, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedInput) throw;
    throw Error(ErrorCode::MalformedInput, e.what());
  }
}

ProfileRegistry::ProfileRegistry(fs::path root, bool create) : root_(std::move(root)) {
  const auto manifest = root_ / "registry.json";
  if (fs::exists(manifest)) {
    json j;
    try {
      j = json::parse(read_file(manifest));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedInput, "registry manifest: " + std::string(e.what()));
    }
    if (j.value("format", "") != "p2l-registry") {
      throw Error(ErrorCode::MalformedInput, "not a p2l registry: " + root_.string());
    }
    if (j.value("version", 0) != kFormatVersion) {
      throw Error(ErrorCode::UnsupportedVersion, "registry version " + j.value("version", json(0)).dump());
    }
    return;
  }
  if (!create) throw Error(ErrorCode::NotFound, "no registry at " + root_.string());
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + root_.string() + ": " + ec.message());
  write_file_atomic(manifest, json{{"format", "p2l-registry"}, {"version", kFormatVersion}}.dump(2) + "\n");
}

fs::path ProfileRegistry::path_for(const std::string& name) const {
  if (!is_valid_name(name)) throw Error(ErrorCode::InvalidName, "'" + name + "' is not [A-Za-z0-9_-]+");
  return root_ / (name + ".profile.json");
}

void ProfileRegistry::save(const DatasetProfile& p, bool overwrite) const {
  const auto path = path_for(p.name);
  if (!overwrite && fs::exists(path)) throw Error(ErrorCode::NameCollision, "'" + p.name + "' already exists");
  write_file_atomic(path, profile_to_json(p));
}

DatasetProfile ProfileRegistry::load(const std::string& name) const {
  const auto path = path_for(name);
  if (!fs::exists(path)) throw Error(ErrorCode::NotFound, "no profile '" + name + "' in " + root_.string());
  auto p = profile_from_json(read_file(path));
  if (p.name != name) throw Error(ErrorCode::MalformedInput, "file for '" + name + "' names '" + p.name + "'");
  return p;
}

bool ProfileRegistry::contains(const std::string& name) const {
  return is_valid_name(name) && fs::exists(path_for(name));
}

std::vector<std::string> ProfileRegistry::names() const {
  constexpr std::string_view suffix = ".profile.json";
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    const auto file = entry.path().filename().string();
    if (file.size() <= suffix.size() || file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    auto name = file.substr(0, file.size() - suffix.size());
    if (is_valid_name(name)) out.push_back(std::move(name));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<DatasetProfile> ProfileRegistry::load_all(std::optional<Role> role) const {
  std::vector<DatasetProfile> out;
  for (const auto& name : names()) {
    auto p = load(name);
    if (!role || p.role == *role) out.push_back(std::move(p));
  }
  return out;
}

// -------------------------------------------------------------- ground truth

std::vector<ImprovementRecord> parse_ground_truth_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || trim(lines.front().second) != kGroundTruthHeader) {
    throw Error(ErrorCode::BadHeader, "expected '" + std::string(kGroundTruthHeader) + "'", 1);
  }
  std::vector<ImprovementRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [line_no, raw] = lines[i];
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw Error(ErrorCode::RaggedRow, "expected 4 fields", line_no);
    const auto transfer = parse_double(f[2]);
    const auto scratch = parse_double(f[3]);
    if (!transfer || !scratch) throw Error(ErrorCode::MalformedInput, "bad performance value", line_no);
    if (!std::isfinite(*transfer) || !std::isfinite(*scratch)) {
      throw Error(ErrorCode::NonFiniteValue, "performance must be finite", line_no);
    }
    out.push_back(ImprovementRecord::make(std::string(trim(f[0])), std::string(trim(f[1])), *transfer, *scratch));
  }
  return out;
}

std::vector<ImprovementRecord> read_ground_truth_csv(const fs::path& path) {
  return parse_ground_truth_csv(read_file(path));
}

std::string ground_truth_to_csv(const std::vector<ImprovementRecord>& records) {
  std::string out = std::string(kGroundTruthHeader) + "\n";
  for (const auto& r : records) {
    out += r.target_name + "," + r.source_name + "," + format_double(r.perf_transfer) + "," +
           format_double(r.perf_scratch) + "\n";
  }
  return out;
}

}  // namespace p2l::io
