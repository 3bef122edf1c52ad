#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "p2l/error.hpp"
#include "p2l/io.hpp"
#include "p2l/oracle.hpp"

namespace p2l::oracle {

namespace fs = std::filesystem;
using io::format_double;

namespace {

std::string fixed(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string pick_or_none(const std::optional<std::string>& pick) { return pick ? *pick : "none"; }

}  // namespace

std::string study_summary_text(const StudyReport& r) {
  std::ostringstream out;
  out << "seed " << r.seed << "\n";
  out << "sources " << r.source_profiles.size() << ", targets " << r.targets.size() << ", top_T " << r.top_T << "\n";
  if (r.calibration) {
    out << "calibrated on " << r.calibration->per_task_rho.size() << " training tasks: k = "
        << fixed(r.calibration->best_k, 2) << ", distance = " << to_string(r.calibration->best_distance)
        << ", mean rho = " << fixed(r.calibration->best_rho) << "\n";
  } else {
    out << "fixed estimator: k = " << fixed(r.used.k, 2) << ", distance = " << to_string(r.used.distance) << "\n";
  }
  out << "\nmethod  mean_acc  top" << r.top_T << "_hit  picks_to_best  mean_rho\n";
  for (const auto& m : r.methods) {
    char line[128];
    std::snprintf(line, sizeof line, "%-6s  %8.4f  %8.3f  %13s  %8s\n", m.method.c_str(), m.mean_accuracy,
                  m.top_T_hit_rate, m.mean_picks_to_best ? fixed(*m.mean_picks_to_best, 2).c_str() : "-",
                  m.mean_rho ? fixed(*m.mean_rho).c_str() : "-");
    out << line;
  }
  out << "\ntarget  best  P2L  hit  rho(P2L)  rho(size)\n";
  for (const auto& t : r.targets) {
    const auto& p2l = *t.picks.at("P2L");
    out << t.target << "  " << t.best_true << "  " << p2l << "  " << (p2l == t.best_true ? "yes" : "no") << "  "
        << fixed(t.rho.at("P2L")) << "  " << fixed(t.rho.at("B1")) << "\n";
  }
  return out.str();
}

void write_study_report(const StudyReport& r, const std::string& dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir + ": " + ec.message());

  {
    std::string csv = "target,source,size,distance,z_log_size,z_distance,score,perf_transfer,perf_scratch,improvement\n";
    for (const auto& t : r.targets) {
      for (const auto& rec : t.records) {
        const auto row = std::find_if(t.ranking.begin(), t.ranking.end(),
                                      [&](const ScoredSource& s) { return s.source_name == rec.source_name; });
        csv += t.target + "," + rec.source_name + "," + std::to_string(row->size) + "," +
               format_double(row->distance_value) + "," + format_double(row->z_log_size) + "," +
               format_double(row->z_distance) + "," + format_double(row->score) + "," +
               format_double(rec.perf_transfer) + "," + format_double(rec.perf_scratch) + "," +
               format_double(rec.improvement) + "\n";
      }
    }
    io::write_file_atomic(root / "pairs.csv", csv);
  }

  std::vector<ImprovementRecord> eval_records;
  for (const auto& t : r.targets) eval_records.insert(eval_records.end(), t.records.begin(), t.records.end());
  io::write_file_atomic(root / "evaluation_truth.csv", io::ground_truth_to_csv(eval_records));
  io::write_file_atomic(root / "calibration_truth.csv", io::ground_truth_to_csv(r.calibration_records));

  {
    std::string csv = "k,distance,mean_rho\n";
    if (r.calibration) {
      for (const auto& g : r.calibration->grid) {
        csv += format_double(g.k) + "," + std::string(to_string(g.distance)) + "," + format_double(g.mean_rho) + "\n";
      }
    }
    io::write_file_atomic(root / "calibration_grid.csv", csv);
  }

  {
    std::string csv = "method,mean_accuracy,top_T_hit_rate,mean_picks_to_best,mean_rho\n";
    for (const auto& m : r.methods) {
      csv += m.method + "," + format_double(m.mean_accuracy) + "," + format_double(m.top_T_hit_rate) + "," +
             (m.mean_picks_to_best ? format_double(*m.mean_picks_to_best) : "") + "," +
             (m.mean_rho ? format_double(*m.mean_rho) : "") + "\n";
    }
    io::write_file_atomic(root / "methods.csv", csv);
  }

  {
    std::string picks = "target,method,pick,picks_to_best\n";
    std::string gains = "target,best_true,p2l_pick,method,method_pick,method_perf,gain\n";
    for (const auto& t : r.targets) {
      for (const auto& [method, pick] : t.picks) {
        const auto ptb = t.picks_to_best.find(method);
        picks += t.target + "," + method + "," + pick_or_none(pick) + "," +
                 (ptb != t.picks_to_best.end() ? std::to_string(ptb->second) : "") + "\n";
      }
      for (const auto& g : t.gains) {
        gains += t.target + "," + t.best_true + "," + pick_or_none(t.picks.at("P2L")) + "," + g.method + "," +
                 pick_or_none(g.pick) + "," + format_double(g.perf) + "," + format_double(g.gain) + "\n";
      }
    }
    io::write_file_atomic(root / "picks.csv", picks);
    io::write_file_atomic(root / "gains.csv", gains);
  }

  {
    const io::ProfileRegistry registry(root / "registry");
    for (const auto* group : {&r.source_profiles, &r.target_profiles, &r.calibration_profiles}) {
      for (const auto& p : *group) registry.save(p, /*overwrite=*/true);
    }
  }

  io::write_file_atomic(root / "summary.txt", study_summary_text(r));
}

void write_merged_report(const MergedStudyReport& r, const std::string& path) {
  std::string csv = "target,distance_to_reference,distance_to_merged,merged_score";
  for (std::size_t i = 0; i < r.rate_scales.size(); ++i) {
    csv += ",ref_acc@" + format_double(r.rate_scales[i]) + ",merged_acc@" + format_double(r.rate_scales[i]);
  }
  csv += "\n";
  for (const auto& t : r.targets) {
    csv += t.target + "," + format_double(t.distance_to_reference) + "," + format_double(t.distance_to_merged) + "," +
           std::to_string(t.merged_score);
    for (std::size_t i = 0; i < t.reference_accuracy.size(); ++i) {
      csv += "," + format_double(t.reference_accuracy[i]) + "," + format_double(t.merged_accuracy[i]);
    }
    csv += "\n";
  }
  io::write_file_atomic(path, csv);
}

}  // namespace p2l::oracle
