#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace p2l::cli {

enum Exit : int { kOk = 0, kInputError = 2, kConflict = 3, kReferential = 4 };

struct ProfileArgs {
  std::string input;
  std::string name;
  std::string size = "auto";
  std::string summarizer = "mean";
  std::string role = "source";
  std::string registry;
  bool force = false;
  bool allow_negative = false;
};

struct EstimatorArgs {
  std::string distance = "KL";
  double k = -1.0;
  double epsilon = 1e-6;
  std::string summarizer = "mean";
  bool kl_source_first = false;
  bool allow_mixed_extractors = false;
};

struct RankArgs {
  std::string target;
  std::string registry;
  EstimatorArgs est;
  std::size_t top = 0;  // 0 = all
  bool baselines = false;
  std::optional<std::string> reference;
  std::optional<std::uint64_t> seed;
};

struct CalibrateArgs {
  std::string ground_truth;
  std::string registry;
  std::string grid_out;
  double k_min = -3.0;
  double k_max = 0.0;
  double k_step = 0.05;
  std::vector<std::string> distances;
  double epsilon = 1e-6;
  bool kl_source_first = false;
  bool allow_mixed_extractors = false;
};

struct EvaluateArgs {
  std::string ground_truth;
  std::string registry;
  EstimatorArgs est;
  std::size_t top = 1;
  std::optional<std::string> reference;
  std::optional<std::uint64_t> seed;
};

struct MergeArgs {
  std::string registry;
  std::string name;
  std::vector<std::string> members;
  bool force = false;
};

struct SimulateArgs {
  std::uint64_t seed = 1;
  std::size_t sources = 6;
  std::size_t targets = 8;
  std::string out;
  bool calibrate = true;
  bool merged = true;
  EstimatorArgs est;
};

int cmd_profile(const ProfileArgs& a);
int cmd_rank(const RankArgs& a);
int cmd_calibrate(const CalibrateArgs& a);
int cmd_evaluate(const EvaluateArgs& a);
int cmd_merge(const MergeArgs& a);
int cmd_simulate(const SimulateArgs& a);

// Maps a library error to the documented exit code and reports it on stderr.
int report_error(const std::exception& e);

}  // namespace p2l::cli
