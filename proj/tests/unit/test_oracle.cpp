#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "p2l/divergence.hpp"
#include "p2l/error.hpp"
#include "p2l/estimator.hpp"
#include "p2l/oracle.hpp"
#include "properties.hpp"

using namespace p2l;
using namespace p2l::oracle;

namespace {

DomainSpec domain(const std::string& name, std::vector<std::vector<double>> centroids, std::size_t items,
                  DomainRole role, double noise = 1.0) {
  DomainSpec d;
  d.name = name;
  d.classes = centroids.size();
  d.centroids = std::move(centroids);
  d.items = items;
  d.role = role;
  d.noise = noise;
  return d;
}

std::vector<std::vector<double>> centroids_around(double offset, std::size_t classes, std::size_t dim,
                                                  double spread = 2.0) {
  std::vector<std::vector<double>> out(classes, std::vector<double>(dim, offset));
  for (std::size_t c = 0; c < classes; ++c) out[c][c % dim] += spread;
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST(World, Deterministic) {
  const auto spec = themed_world_spec(3);
  const auto a = generate_world(3, spec);
  const auto b = generate_world(3, themed_world_spec(3));
  ASSERT_EQ(a.domains.size(), b.domains.size());
  for (std::size_t i = 0; i < a.domains.size(); ++i) {
    EXPECT_EQ(a.domains[i].source_train.x, b.domains[i].source_train.x);
    EXPECT_EQ(a.domains[i].target_pool.y, b.domains[i].target_pool.y);
    EXPECT_EQ(a.domains[i].target_val.x, b.domains[i].target_val.x);
  }
  EXPECT_EQ(a.extractor.weights, b.extractor.weights);
  EXPECT_EQ(a.extractor.id, b.extractor.id);
  const auto c = generate_world(4, spec);
  EXPECT_NE(a.domains[0].source_train.x, c.domains[0].source_train.x);
}

TEST(World, ThemedDefaults) {
  const auto w = generate_world(1, themed_world_spec(1));
  EXPECT_EQ(w.feature_dim, 16u);
  EXPECT_EQ(w.embed_dim, 32u);
  EXPECT_EQ(w.names(DomainRole::Source).size(), 6u);
  EXPECT_EQ(w.names(DomainRole::Target).size(), 8u);
  ASSERT_TRUE(w.reference_source.has_value());
}

TEST(World, FourWaySplit) {
  const auto w = generate_world(2, themed_world_spec(2));
  OracleConfig cfg;
  for (const auto& d : w.domains) {
    const std::size_t q = d.spec.items / 4;
    EXPECT_EQ(d.source_train.size(), q);
    EXPECT_EQ(d.source_val.size(), q);
    EXPECT_EQ(d.target_pool.size(), q);
    EXPECT_EQ(d.target_val.size(), q);
    EXPECT_EQ(target_train(w, d.spec.name, cfg).size(),
              static_cast<std::size_t>(std::floor(cfg.target_fraction * static_cast<double>(q))));
  }
}

TEST(World, BadSpec) {
  WorldSpec spec;
  spec.feature_dim = 2;
  spec.domains.push_back(domain("a", centroids_around(0, 2, 2), 40, DomainRole::Source));
  EXPECT_THROW(generate_world(1, spec), Error);  // one domain
  spec.domains.push_back(domain("b", centroids_around(0, 1, 2), 40, DomainRole::Source));
  EXPECT_THROW(generate_world(1, spec), Error);  // one class
  spec.domains.back() = domain("a", centroids_around(0, 2, 2), 40, DomainRole::Source);
  EXPECT_THROW(generate_world(1, spec), Error);  // duplicate
  spec.domains.back() = domain("b", centroids_around(0, 2, 3), 40, DomainRole::Source);
  EXPECT_THROW(generate_world(1, spec), Error);  // centroid dim
  spec.domains.back() = domain("b", centroids_around(0, 2, 2), 40, DomainRole::Target);
  spec.reference_source = "b";
  EXPECT_THROW(generate_world(1, spec), Error);  // reference must be a source
  spec.reference_source = "a";
  EXPECT_NO_THROW(generate_world(1, spec));
}

TEST(World, SeparatedDomainsAreFartherThanResamples) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    WorldSpec spec;
    spec.feature_dim = 8;
    spec.domains.push_back(domain("A", centroids_around(0.0, 3, 8), 4000, DomainRole::Source));
    spec.domains.push_back(domain("A2", centroids_around(0.0, 3, 8), 4000, DomainRole::Source));
    spec.domains.push_back(domain("B", centroids_around(3.0, 3, 8), 4000, DomainRole::Source));
    const auto w = generate_world(seed, spec);
    const auto a = profile_of(w, "A", w.domain("A").source_train, Role::Target);
    const auto a2 = profile_of(w, "A2", w.domain("A2").source_train, Role::Source);
    const auto b = profile_of(w, "B", w.domain("B").source_train, Role::Source);
    for (auto kind : kAllDivergenceKinds) {
      EstimatorConfig cfg;
      cfg.distance = kind;
      EXPECT_GT(target_source_distance(a, b, cfg), 5.0 * target_source_distance(a, a2, cfg))
          << "seed " << seed << " " << to_string(kind);
    }
  }
}

TEST(World, ExtractorIsRectified) {
  const auto w = generate_world(5, themed_world_spec(5));
  const auto e = extract(w, w.domains[0].source_val);
  EXPECT_EQ(e.dim(), 32u);
  EXPECT_EQ(e.extractor_id(), w.extractor.id);
  for (double v : e.values()) EXPECT_GE(v, 0.0);
}

TEST(World, StreamSeedsDiffer) {
  EXPECT_EQ(stream_seed(1, {"a", "b"}), stream_seed(1, {"a", "b"}));
  EXPECT_NE(stream_seed(1, {"a", "b"}), stream_seed(2, {"a", "b"}));
  EXPECT_NE(stream_seed(1, {"a", "b"}), stream_seed(1, {"b", "a"}));
  EXPECT_NE(stream_seed(1, {"ab"}), stream_seed(1, {"a", "b"}));
}

TEST(World, SourceLimitAndPooling) {
  const auto w = generate_world(6, themed_world_spec(6));
  const auto limited = with_source_limit(w, "src-1", 37);
  EXPECT_EQ(limited.domain("src-1").source_train.size(), 37u);
  EXPECT_EQ(limited.domain("src-1").target_val.x, w.domain("src-1").target_val.x);
  EXPECT_EQ(limited.domain("src-2").source_train.size(), w.domain("src-2").source_train.size());
  EXPECT_THROW(with_source_limit(w, "nope", 3), Error);

  const std::vector<std::string> members{"src-0", "src-1"};
  const auto pooled = with_pooled_source(w, members, "pool");
  const auto& p = pooled.domain("pool");
  EXPECT_EQ(p.source_train.size(), w.domain("src-0").source_train.size() + w.domain("src-1").source_train.size());
  EXPECT_EQ(p.spec.classes, w.domain("src-0").spec.classes + w.domain("src-1").spec.classes);
  EXPECT_THROW(with_pooled_source(w, members, "src-0"), Error);
}

TEST(Trainer, GradientCheck) {
  const auto r = test::gradient_check(555);
  EXPECT_EQ(r.trials, 20u);
  EXPECT_EQ(r.violations, 0u) << r.first_failure;
}

TEST(Trainer, ConfigValidation) {
  OracleConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.target_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.target_fraction = 1.0;
  cfg.finetune_multiplier = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Trainer, DeterministicAccuracy) {
  const auto w = generate_world(7, themed_world_spec(7));
  OracleConfig cfg;
  const double a = train_transfer(w, std::string("src-2"), "tgt-1", cfg);
  EXPECT_EQ(a, train_transfer(w, std::string("src-2"), "tgt-1", cfg));
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
  EXPECT_EQ(train_transfer(w, std::nullopt, "tgt-1", cfg), train_transfer(w, std::nullopt, "tgt-1", cfg));
  EXPECT_THROW(train_transfer(w, std::string("tgt-0"), "tgt-1", cfg), Error);
  EXPECT_THROW(train_transfer(w, std::string("nope"), "tgt-1", cfg), Error);
}

TEST(Trainer, SelfTransferBeatsScratch) {
  int wins = 0;
  OracleConfig cfg;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto w = generate_world(seed, themed_world_spec(seed));
    // Largest source domain: its own target split is the cleanest self-transfer case.
    std::string s;
    for (const auto& name : w.names(DomainRole::Source)) {
      if (s.empty() || w.domain(name).source_train.size() > w.domain(s).source_train.size()) s = name;
    }
    if (train_transfer(w, s, s, cfg) >= train_transfer(w, std::nullopt, s, cfg)) ++wins;
  }
  EXPECT_GE(wins, 4);
}

TEST(Trainer, UntrainedSourceAtFullRateMatchesScratch) {
  OracleConfig cfg;
  cfg.finetune_multiplier = 1.0;
  cfg.source_epochs = 0;
  double delta = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto w = generate_world(seed, themed_world_spec(seed));
    for (const auto& t : w.names(DomainRole::Target)) {
      delta += train_transfer(w, std::string("src-0"), t, cfg) - train_transfer(w, std::nullopt, t, cfg);
    }
  }
  delta /= 5.0 * 8.0;
  EXPECT_LT(std::abs(delta), 0.05);
}

TEST(Trainer, MoreSourceDataNeverHurtsMedian) {
  OracleConfig cfg;
  const std::vector<std::size_t> limits{25, 100, 400, 1600, 6400};
  std::vector<double> medians;
  for (auto n : limits) {
    std::vector<double> perf;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto w = generate_world(seed, themed_world_spec(seed));
      const std::string s = "src-0";
      const auto lw = with_source_limit(w, s, n);
      perf.push_back(train_transfer(lw, s, s, cfg));
    }
    medians.push_back(median(perf));
  }
  for (std::size_t i = 1; i < medians.size(); ++i) {
    EXPECT_GE(medians[i], medians[i - 1]) << "limit " << limits[i];
  }
}

TEST(Study, IdenticalSourcesRankBySize) {
  WorldSpec spec;
  spec.feature_dim = 4;
  spec.embed_dim = 8;
  const std::vector<std::vector<double>> same(3, std::vector<double>{1.0, -0.5, 0.25, 2.0});
  for (std::size_t i = 0; i < 4; ++i) {
    spec.domains.push_back(domain("s" + std::to_string(i), same, 400 * (i + 1) + 40 * i, DomainRole::Source, 0.0));
  }
  spec.domains.push_back(domain("t0", centroids_around(0.0, 3, 4), 800, DomainRole::Target));
  spec.domains.push_back(domain("t1", centroids_around(1.0, 3, 4), 800, DomainRole::Target));
  const auto w = generate_world(9, spec);
  const auto r = run_study(w, OracleConfig{}, EstimatorConfig{}, EvaluationConfig{});
  for (const auto& t : r.targets) {
    std::vector<std::string> order;
    for (const auto& s : t.ranking) order.push_back(s.source_name);
    EXPECT_EQ(order, (std::vector<std::string>{"s3", "s2", "s1", "s0"}));
    EXPECT_EQ(t.picks.at("P2L"), t.picks.at("B1"));
    EXPECT_EQ(t.picks_to_best.at("P2L"), t.picks_to_best.at("B1"));
  }
}

TEST(Study, SharedCentroidSourceIsPickedByP2LAndB5) {
  WorldSpec spec;
  spec.feature_dim = 6;
  spec.embed_dim = 16;
  const auto target_centroids = centroids_around(0.5, 4, 6);
  spec.domains.push_back(domain("match", target_centroids, 2000, DomainRole::Source));
  spec.domains.push_back(domain("other1", centroids_around(-2.0, 4, 6), 2000, DomainRole::Source));
  spec.domains.push_back(domain("other2", centroids_around(3.0, 4, 6), 2000, DomainRole::Source));
  spec.domains.push_back(domain("other3", centroids_around(1.5, 4, 6, -3.0), 2000, DomainRole::Source));
  spec.domains.push_back(domain("t0", target_centroids, 2000, DomainRole::Target));
  spec.domains.push_back(domain("t1", target_centroids, 2000, DomainRole::Target));
  spec.reference_source = "other1";
  const auto w = generate_world(10, spec);
  const auto r = run_study(w, OracleConfig{}, EstimatorConfig{}, EvaluationConfig{}, StudyOptions{.calibrate = false});
  for (const auto& t : r.targets) {
    EXPECT_EQ(t.picks.at("P2L"), std::optional<std::string>("match")) << t.target;
    EXPECT_EQ(t.picks.at("B5"), std::optional<std::string>("match")) << t.target;
    EXPECT_EQ(t.picks.at("B2"), std::optional<std::string>("other1"));
    EXPECT_FALSE(t.picks.at("B4").has_value());
  }
}

TEST(Study, BookkeepingAndDeterminism) {
  const auto w = generate_world(11, themed_world_spec(11));
  const auto a = run_study(w, OracleConfig{}, EstimatorConfig{}, EvaluationConfig{});
  const auto b = run_study(w, OracleConfig{}, EstimatorConfig{}, EvaluationConfig{});
  ASSERT_TRUE(a.calibration.has_value());
  EXPECT_EQ(a.used.k, a.calibration->best_k);
  EXPECT_EQ(a.calibration_records.size(), 6u * 6u);
  ASSERT_EQ(a.targets.size(), 8u);
  for (std::size_t i = 0; i < a.targets.size(); ++i) {
    const auto& t = a.targets[i];
    ASSERT_EQ(t.records.size(), 6u);
    for (const auto& rec : t.records) {
      EXPECT_EQ(rec.improvement, rec.perf_transfer - rec.perf_scratch);
      EXPECT_EQ(rec.perf_scratch, t.perf_scratch);
      EXPECT_EQ(rec.target_name, t.target);
    }
    for (const auto& s : t.ranking) EXPECT_LT(std::abs(s.score - (s.z_log_size + a.used.k * s.z_distance)), 1e-12);
    EXPECT_EQ(t.picks_to_best.at("P2L") == 1, t.picks.at("P2L") == t.best_true);
    for (std::size_t j = 0; j < t.records.size(); ++j) {
      EXPECT_EQ(t.records[j].perf_transfer, b.targets[i].records[j].perf_transfer);
    }
  }
  ASSERT_EQ(a.methods.size(), 6u);
  for (std::size_t m = 0; m < a.methods.size(); ++m) {
    EXPECT_EQ(a.methods[m].mean_accuracy, b.methods[m].mean_accuracy);
  }
}

TEST(Study, RejectsSmallWorlds) {
  WorldSpec spec;
  spec.feature_dim = 2;
  spec.domains.push_back(domain("a", centroids_around(0, 2, 2), 400, DomainRole::Source));
  spec.domains.push_back(domain("b", centroids_around(1, 2, 2), 400, DomainRole::Source));
  spec.domains.push_back(domain("t", centroids_around(2, 2, 2), 400, DomainRole::Target));
  spec.domains.push_back(domain("u", centroids_around(3, 2, 2), 400, DomainRole::Target));
  EXPECT_THROW(run_study(generate_world(1, spec), OracleConfig{}, EstimatorConfig{}, EvaluationConfig{}), Error);
}

TEST(MergedStudy, ProfileIsMergeOfMembers) {
  const auto w = generate_world(12, themed_world_spec(12));
  MergedStudyOptions opts;
  opts.rate_scales = {1.0};
  const auto r = merged_source_study(w, OracleConfig{}, opts);
  std::vector<DatasetProfile> members;
  for (const auto& s : w.names(DomainRole::Source)) {
    members.push_back(profile_of(w, s, w.domain(s).source_train, Role::Source));
  }
  EXPECT_EQ(r.merged_profile, merge_profiles(members, "merged"));
  EXPECT_EQ(r.reference, *w.reference_source);
  EXPECT_EQ(r.targets.size(), members.size());
  for (std::size_t i = 1; i < r.targets.size(); ++i) {
    EXPECT_LE(r.targets[i - 1].distance_to_reference, r.targets[i].distance_to_reference);
  }
  EXPECT_EQ(r.targets.front().target, r.reference);

  // Pooled data gives the same profile as merging member profiles.
  const std::vector<std::string> names = w.names(DomainRole::Source);
  const auto pooled = with_pooled_source(w, names, "pool");
  const auto direct = profile_of(pooled, "pool", pooled.domain("pool").source_train, Role::Source);
  for (std::size_t j = 0; j < direct.summary.dim(); ++j) {
    EXPECT_NEAR(direct.summary.values[j], r.merged_profile.summary.values[j], 1e-12);
  }
}
