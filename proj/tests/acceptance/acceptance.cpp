// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "p2l/error.hpp"
#include "p2l/io.hpp"
#include "p2l/oracle.hpp"
#include "p2l/summarize.hpp"
#include "properties.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace p2l;

namespace {

// Tolerances and thresholds.
constexpr double kPropertyBudgetSec = 30.0;
constexpr double kHeadlineBudgetSec = 120.0;
constexpr double kRhoMargin = 0.05;
constexpr int kSeeds = 5;
constexpr int kSeedQuorum = 4;
constexpr double kGradientTol = 1e-5;
constexpr double kCsvBinaryTol = 1e-6;
constexpr double kK0 = 0.0;
constexpr double kKMin = -3.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool clean(const std::vector<test::PropertyResult>& results, std::size_t& trials) {
  bool ok = true;
  for (const auto& r : results) {
    trials += r.trials;
    if (r.violations > 0) {
      ok = false;
      std::fprintf(stderr, "  %s: %zu/%zu violations, first: %s\n", r.name.c_str(), r.violations, r.trials,
                   r.first_failure.c_str());
    }
  }
  return ok;
}

void criterion1() {
  const auto t0 = Clock::now();
  std::vector<test::PropertyResult> all = test::divergence_properties(101, 1000);
  for (auto& r : test::zscale_properties(102, 1000)) all.push_back(r);
  all.push_back(test::spearman_closed_form(103, 1000));
  all.push_back(test::merge_concatenation(104, 1000));
  std::size_t trials = 0;
  const bool ok = clean(all, trials);
  const double secs = seconds_since(t0);
  report(1, ok && secs < kPropertyBudgetSec,
         fmt("%zu property sweeps, %zu trials, zero violations: %s, %.2fs (< %.0fs)", all.size(), trials,
             ok ? "yes" : "no", secs, kPropertyBudgetSec));
}

void criterion2() {
  std::vector<test::PropertyResult> all{
      test::size_only_matches_b1(201, 100), test::large_negative_k_matches_b5(202, 100),
      test::affine_distance_invariance(203, 100), test::affine_log_size_invariance(204, 100)};
  std::size_t trials = 0;
  const bool ok = clean(all, trials);
  report(2, ok, fmt("k=0 vs B1, k=-1e9 vs B5, affine distance and log-size: %zu trials, exact ranking equality: %s",
                    trials, ok ? "yes" : "no"));
}

struct SeedOutcome {
  oracle::StudyReport study;
  oracle::MergedStudyReport merged;
};

const oracle::MethodSummary& method(const oracle::StudyReport& r, const std::string& name) {
  for (const auto& m : r.methods) {
    if (m.method == name) return m;
  }
  throw Error(ErrorCode::UnknownName, name);
}

void criterion3(const std::vector<SeedOutcome>& runs, double secs) {
  int rho_ok = 0, hit_ok = 0;
  double picks_p2l = 0.0, picks_b1 = 0.0;
  for (const auto& run : runs) {
    const auto& p2l = method(run.study, "P2L");
    const auto& b1 = method(run.study, "B1");
    const auto& b5 = method(run.study, "B5");
    const double margin = *p2l.mean_rho - *b1.mean_rho;
    if (margin >= kRhoMargin) ++rho_ok;
    if (p2l.top_T_hit_rate >= b1.top_T_hit_rate && p2l.top_T_hit_rate >= b5.top_T_hit_rate) ++hit_ok;
    picks_p2l += *p2l.mean_picks_to_best;
    picks_b1 += *b1.mean_picks_to_best;
    std::fprintf(stderr, "  seed %llu: rho P2L %.3f size-only %.3f | top-1 P2L %.3f B1 %.3f B5 %.3f | picks %.3f %.3f\n",
                 static_cast<unsigned long long>(run.study.seed), *p2l.mean_rho, *b1.mean_rho, p2l.top_T_hit_rate,
                 b1.top_T_hit_rate, b5.top_T_hit_rate, *p2l.mean_picks_to_best, *b1.mean_picks_to_best);
  }
  const double n = static_cast<double>(runs.size());
  const bool a = rho_ok >= kSeedQuorum;
  const bool b = hit_ok >= kSeedQuorum;
  const bool c = picks_p2l / n <= picks_b1 / n;
  const bool t = secs < kHeadlineBudgetSec;
  report(3, a && b && c && t,
         fmt("(a) rho margin >= %.2f on %d/%d seeds; (b) top-1 >= B1,B5 on %d/%d seeds; (c) picks-to-best P2L %.3f "
             "<= B1 %.3f; %.1fs (< %.0fs)",
             kRhoMargin, rho_ok, kSeeds, hit_ok, kSeeds, picks_p2l / n, picks_b1 / n, secs, kHeadlineBudgetSec));
}

void criterion4(const std::vector<SeedOutcome>& runs) {
  int ok = 0;
  for (const auto& run : runs) {
    const auto& cal = *run.study.calibration;
    double at0 = NAN, at_min = NAN;
    for (const auto& g : cal.grid) {
      if (g.distance != cal.best_distance) continue;
      if (g.k == kK0) at0 = g.mean_rho;
      if (g.k == kKMin) at_min = g.mean_rho;
    }
    const bool pass = cal.best_k < 0.0 && cal.best_rho > at0 && cal.best_rho > at_min;
    ok += pass;
    std::fprintf(stderr, "  seed %llu: best k %.2f %s rho %.3f | rho(0) %.3f rho(-3) %.3f\n",
                 static_cast<unsigned long long>(run.study.seed), cal.best_k,
                 std::string(to_string(cal.best_distance)).c_str(), cal.best_rho, at0, at_min);
  }
  report(4, ok == kSeeds,
         fmt("best_k < 0 with interior maximum on %d/%d seeds (required: all)", ok, kSeeds));
}

void criterion5(const std::vector<SeedOutcome>& runs) {
  int near_ok = 0, far_ok = 0;
  for (const auto& run : runs) {
    const auto& targets = run.merged.targets;  // sorted by distance to the reference
    const auto& nearest = targets.front();
    const auto& farthest = targets.back();
    near_ok += nearest.merged_score < 0;
    far_ok += farthest.merged_score > 0;
    std::fprintf(stderr, "  seed %llu: near %s (D %.3f) score %+d | far %s (D %.3f) score %+d\n",
                 static_cast<unsigned long long>(run.study.seed), nearest.target.c_str(),
                 nearest.distance_to_reference, nearest.merged_score, farthest.target.c_str(),
                 farthest.distance_to_reference, farthest.merged_score);
  }
  report(5, near_ok >= kSeedQuorum && far_ok >= kSeedQuorum,
         fmt("reference beats merged on the nearest target on %d/%d seeds; merged beats reference on the farthest "
             "target on %d/%d seeds",
             near_ok, kSeeds, far_ok, kSeeds));
}

void criterion6() {
  const auto r = test::gradient_check(601, 20, kGradientTol);
  if (r.violations > 0) std::fprintf(stderr, "  first: %s\n", r.first_failure.c_str());
  report(6, r.violations == 0,
         fmt("%zu instances, worst relative error %.3g (tolerance %.0e)", r.trials, r.worst, kGradientTol));
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  bool ok = true;
  std::size_t in_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) in_b += e.is_regular_file();
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || io::read_file(e.path()) != io::read_file(other)) {
      std::fprintf(stderr, "  differs: %s\n", fs::relative(e.path(), a).c_str());
      ok = false;
    }
  }
  return ok && files == in_b;
}

void criterion7() {
  test::TempDir dir("acceptance");
  std::mt19937_64 rng(701);

  // Profiles, including awkward values, through JSON and the registry.
  bool profiles_ok = true;
  const io::ProfileRegistry registry(dir.path() / "reg");
  for (int i = 0; i < 200; ++i) {
    const std::size_t items = 1 + rng() % 20, dim = 1 + rng() % 12;
    const auto base = test::random_matrix(rng, items, dim);
    std::vector<double> v(base.values().begin(), base.values().end());
    for (auto& x : v) {
      if (rng() % 7 == 0) x = std::ldexp(x, -1060);  // subnormal
      if (rng() % 11 == 0) x /= 3.0;
    }
    const EmbeddingMatrix m(items, dim, std::move(v), "ext");
    DatasetProfile p;
    p.name = "p" + std::to_string(i);
    p.size = rng() % 1000000 + 1;
    p.summary = summarize(m, rng() % 2 ? Summarizer::mean() : Summarizer::trimmed(0.1));
    p.extractor_id = "ext";
    p.role = rng() % 2 ? Role::Source : Role::Target;
    registry.save(p, false);
    const auto back = registry.load(p.name);
    const auto via_json = io::profile_from_json(io::profile_to_json(p));
    for (const auto* q : {&back, &via_json}) {
      profiles_ok = profiles_ok && *q == p && bit_equal(q->summary.values, p.summary.values) &&
                    bit_equal(q->summary.raw_mean, p.summary.raw_mean);
    }
  }

  // The same matrix through both embedding formats.
  bool formats_ok = true;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto m = test::random_matrix(rng, 1 + rng() % 50, 1 + rng() % 16, "fmt");
    io::write_embeddings_csv(dir.path() / "m.csv", m);
    io::write_embeddings_bin(dir.path() / "m.p2le", m);
    const auto a = io::read_embeddings(dir.path() / "m.csv");
    const auto b = io::read_embeddings(dir.path() / "m.p2le");
    formats_ok = formats_ok && a.items() == b.items() && a.dim() == b.dim() && a.extractor_id() == b.extractor_id();
    for (std::size_t j = 0; formats_ok && j < a.values().size(); ++j) {
      worst = std::max(worst, test::rel_err(a.values()[j], b.values()[j]));
    }
  }
  formats_ok = formats_ok && worst <= kCsvBinaryTol;

  // Two simulate runs with one seed.
  for (const char* sub : {"a", "b"}) {
    const auto world = oracle::generate_world(7, oracle::themed_world_spec(7, {}));
    const auto study = oracle::run_study(world, {}, {}, {});
    oracle::write_study_report(study, (dir.path() / sub).string());
    oracle::write_merged_report(oracle::merged_source_study(world, {}), (dir.path() / sub / "merged.csv").string());
  }
  std::size_t files = 0;
  const bool sim_ok = same_tree(dir.path() / "a", dir.path() / "b", files);

  report(7, profiles_ok && formats_ok && sim_ok,
         fmt("profile round trip bit-exact: %s; CSV vs binary worst rel %.3g (<= %.0e); simulate byte-identical "
             "over %zu files: %s",
             profiles_ok ? "yes" : "no", worst, kCsvBinaryTol, files, sim_ok ? "yes" : "no"));
}

}  // namespace

int main() {
  try {
    criterion1();
    criterion2();

    std::vector<SeedOutcome> runs;
    double headline_secs = 0.0;
    for (int seed = 1; seed <= kSeeds; ++seed) {
      const auto world = oracle::generate_world(seed, oracle::themed_world_spec(seed, {}));
      const auto t0 = Clock::now();
      auto study = oracle::run_study(world, {}, {}, {});
      headline_secs += seconds_since(t0);
      runs.push_back({std::move(study), oracle::merged_source_study(world, {})});
    }
    criterion3(runs, headline_secs);
    criterion4(runs);
    criterion5(runs);
    criterion6();
    criterion7();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
