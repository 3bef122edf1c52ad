#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "p2l/calibrate.hpp"
#include "p2l/estimator.hpp"
#include "p2l/types.hpp"

/// Synthetic transfer ground truth. Gaussian-cluster domains are embedded by a
/// frozen rectified random extractor; fine-tuning a small linear/softmax
/// learner supplies the improvements the estimator is scored on.
namespace p2l::oracle {

// ------------------------------------------------------------------- world

enum class DomainRole { Source, Target };

struct DomainSpec {
  std::string name;
  std::size_t classes = 0;
  std::size_t items = 0;
  /// classes x feature_dim
  std::vector<std::vector<double>> centroids;
  double noise = 1.0;  // isotropic standard deviation around each centroid
  DomainRole role = DomainRole::Source;
};

struct WorldSpec {
  std::size_t feature_dim = 16;
  std::size_t embed_dim = 32;
  std::vector<DomainSpec> domains;
  /// Fixed source used by baseline B2 and the merged-source study.
  std::optional<std::string> reference_source;
};

/// Labelled rows, row-major.
struct Dataset {
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<double> x;
  std::vector<std::uint32_t> y;

  std::size_t size() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const noexcept { return {x.data() + i * dim, dim}; }
  /// First `n` rows (all rows if n >= size()).
  Dataset head(std::size_t n) const;
};

/// A domain's four equal partitions: source train, source validation, the
/// pool that target training sets are cut from, and target validation.
struct Domain {
  DomainSpec spec;
  Dataset source_train;
  Dataset source_val;
  Dataset target_pool;
  Dataset target_val;
};

/// Frozen reference model: relu(A x + b).
struct ReferenceExtractor {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;  // out_dim x in_dim
  std::vector<double> bias;
  std::string id;
};

struct OracleWorld {
  std::uint64_t seed = 0;
  std::size_t feature_dim = 0;
  std::size_t embed_dim = 0;
  std::vector<Domain> domains;
  ReferenceExtractor extractor;
  std::optional<std::string> reference_source;

  const Domain& domain(const std::string& name) const;
  std::vector<std::string> names(DomainRole role) const;
};

/// Samples every domain and the extractor. Pure function of (seed, spec).
/// Throws BadSpec for fewer than 2 domains, a domain with < 2 classes or
/// fewer than 4 items, or centroids of the wrong shape.
OracleWorld generate_world(std::uint64_t seed, const WorldSpec& spec);

/// Knobs for the default themed world used by studies: sources and targets
/// belong to a few themes; a theme fixes a region of feature space and the
/// low-rank subspace its classes are separated in.
struct ThemedWorldOptions {
  std::size_t num_sources = 6;
  std::size_t num_targets = 8;
  std::size_t num_themes = 3;
  std::size_t theme_rank = 3;
  std::size_t feature_dim = 16;
  std::size_t embed_dim = 32;
  std::size_t min_classes = 4;
  std::size_t max_classes = 6;
  std::size_t min_source_items = 400;
  std::size_t max_source_items = 80000;
  std::size_t target_items = 2000;
  double theme_spread = 3.0;    // scale of theme centres
  double domain_jitter = 0.6;   // domain centre offset within a theme
  double class_scale = 1.0;     // class offsets inside the theme subspace
  double off_theme_scale = 0.1; // class offsets outside it
  double theme_purity = 0.7;    // weight of a domain's primary theme
  std::size_t common_rank = 1;  // class structure shared by every domain
  double common_scale = 1.0;
  double noise = 1.0;
};

WorldSpec themed_world_spec(std::uint64_t seed, const ThemedWorldOptions& opts = {});

/// Reference-extractor embeddings of a dataset.
EmbeddingMatrix extract(const OracleWorld& world, const Dataset& data);

/// Profile of a domain split as the estimator sees it (plain mean summary).
DatasetProfile profile_of(const OracleWorld& world, const std::string& name, const Dataset& data,
                          Role role);

/// Copy of `world` whose `source` domain keeps only the first `items`
/// source-training rows. Distribution and every other split are unchanged.
OracleWorld with_source_limit(const OracleWorld& world, const std::string& source, std::size_t items);

/// Copy of `world` with one extra source domain whose source-training set is
/// the row-concatenation of `members`' (labels kept distinct per member).
OracleWorld with_pooled_source(const OracleWorld& world, std::span<const std::string> members,
                               const std::string& name);

// ----------------------------------------------------------------- trainer

struct OracleConfig {
  double target_fraction = 0.1;
  double finetune_multiplier = 0.1;  // f: representation-layer rate multiplier
  double learn_rate = 0.05;
  std::size_t source_epochs = 4;
  std::size_t target_epochs = 30;
  std::size_t batch = 16;
  std::size_t hidden_dim = 6;

  void validate() const;
};

/// logits = W2 (W1 x + b1) + b2; W1 is the representation layer.
struct Model {
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::size_t classes = 0;
  std::vector<double> w1, b1, w2, b2;

  static Model zeros(std::size_t in, std::size_t hidden, std::size_t classes);
};

/// Mean softmax cross-entropy over `rows` of `data`.
double softmax_loss(const Model& m, const Dataset& data, std::span<const std::size_t> rows);
/// Analytic gradient of softmax_loss, shaped like the model.
Model softmax_gradient(const Model& m, const Dataset& data, std::span<const std::size_t> rows);
/// Top-1 accuracy on all rows.
double accuracy(const Model& m, const Dataset& data);

/// Deterministic 64-bit stream id from a seed and string labels.
std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::string_view> labels);

/// Random init (Gaussian W1/W2 scaled by fan-in, zero biases).
Model init_model(std::size_t in, std::size_t hidden, std::size_t classes, std::uint64_t stream);

/// Mini-batch gradient descent; W1/b1 move at `rep_rate`, W2/b2 at `head_rate`.
void sgd_train(Model& m, const Dataset& data, std::size_t epochs, std::size_t batch,
               double rep_rate, double head_rate, std::uint64_t stream);

/// Model trained on a source domain's source-training split.
Model pretrain(const OracleWorld& world, const std::string& source, const OracleConfig& cfg);

/// Target-training split used for `target` under cfg.target_fraction.
Dataset target_train(const OracleWorld& world, const std::string& target, const OracleConfig& cfg);

/// Accuracy on the target validation split after fine-tuning `pretrained`
/// (head re-initialized, representation at f*alpha) or, when null, after
/// training from scratch.
double finetune(const OracleWorld& world, const Model* pretrained, const std::string& source_tag,
                const std::string& target, const OracleConfig& cfg, double rate_scale = 1.0);

/// P(M(t, s)) for a source, or P(M(t, phi)) when `source` is empty.
double train_transfer(const OracleWorld& world, const std::optional<std::string>& source,
                      const std::string& target, const OracleConfig& cfg);

// ------------------------------------------------------------------ studies

struct StudyOptions {
  /// Tune (k, distance) on the source domains' own target splits; otherwise
  /// use estimator_cfg as given.
  bool calibrate = true;
};

struct TargetResult {
  std::string target;
  double perf_scratch = 0.0;
  std::vector<ImprovementRecord> records;  // one per source, source order
  std::vector<ScoredSource> ranking;       // P2L ranking under the used config
  std::map<std::string, std::optional<std::string>> picks;  // method -> pick
  std::map<std::string, std::size_t> picks_to_best;         // ranking methods only
  std::map<std::string, double> rho;                        // P2L, B1, B5
  std::string best_true;
  std::vector<GainRow> gains;
};

struct MethodSummary {
  std::string method;
  double mean_accuracy = 0.0;
  double top_T_hit_rate = 0.0;
  std::optional<double> mean_picks_to_best;
  std::optional<double> mean_rho;
};

struct StudyReport {
  std::uint64_t seed = 0;
  EstimatorConfig used;
  std::optional<CalibrationReport> calibration;
  std::vector<ImprovementRecord> calibration_records;
  std::vector<DatasetProfile> source_profiles;
  std::vector<DatasetProfile> target_profiles;       // evaluation targets
  std::vector<DatasetProfile> calibration_profiles;  // source-domain targets
  std::map<std::string, double> source_val_accuracy;
  std::vector<TargetResult> targets;
  std::vector<MethodSummary> methods;
  std::size_t top_T = 1;
};

/// Full study: ground truth I for every (target, source) pair,
/// P2L and B1-B5 selections, per-target rank correlations, picks-to-best and
/// gain tables, and per-method summaries.
StudyReport run_study(const OracleWorld& world, const OracleConfig& cfg,
                      const EstimatorConfig& estimator_cfg, const EvaluationConfig& eval_cfg,
                      const StudyOptions& options = {});

struct MergedTargetResult {
  std::string target;
  double distance_to_reference = 0.0;
  double distance_to_merged = 0.0;
  std::vector<double> reference_accuracy;  // one per rate regime
  std::vector<double> merged_accuracy;
  int merged_score = 0;  // merged wins minus reference wins over the regimes
};

struct MergedStudyReport {
  std::string reference;
  std::string merged_name;
  DatasetProfile merged_profile;
  std::vector<double> rate_scales;
  std::vector<MergedTargetResult> targets;  // ascending distance to reference
};

struct MergedStudyOptions {
  std::vector<double> rate_scales{0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0};
  DivergenceKind distance = DivergenceKind::KL;
};

/// Pools every source domain into one merged source, pretrains it and the
/// reference source, and fine-tunes both on each source domain's target
/// split under several learning-rate regimes.
MergedStudyReport merged_source_study(const OracleWorld& world, const OracleConfig& cfg,
                                      const MergedStudyOptions& opts = {});

// ------------------------------------------------------------------ reports

/// Writes pairs.csv, evaluation_truth.csv, calibration_truth.csv,
/// calibration_grid.csv, methods.csv, picks.csv, gains.csv, summary.txt and a
/// profile registry under `dir`.
void write_study_report(const StudyReport& report, const std::string& dir);
std::string study_summary_text(const StudyReport& report);

void write_merged_report(const MergedStudyReport& report, const std::string& path);

}  // namespace p2l::oracle
