#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "fracpath/continuation.hpp"

namespace fracpath {

struct TaskSpec {
  std::string type;  // "trivial_branch" or "switch_continue"
  std::string name;
  double mu0 = 0.0;      // trivial_branch: corrected start at this mu
  std::string from;      // switch_continue: parent task name
  int branch_point = 1;  // 1-based among the parent's branch_point events
  double amplitude = 0.1;
  ContinuationSettings settings;  // global settings with task overrides
};

struct RunConfig {
  std::string model;
  double s = 0.5;
  int np = 0;
  double gamma = 1.0;  // allen_cahn
  double nu = 2.0;     // swift_hohenberg
  double d = 60.0;     // schnakenberg
  double sigma = 0.0;
  bool tuned = false;
  int tuned_m = 0;
  double a = 0.0, b = 1.0;  // resolved domain (also for tuned)
  ContinuationSettings settings;
  std::vector<TaskSpec> tasks;
  std::string output_dir = "out";
  bool plot_diagram = false;
  bool plot_profiles = false;
  unsigned seed = 0;
  std::uint64_t config_hash = 0;
  std::string domain_note;
};

/// Strict JSON config: unknown keys are rejected and every violation is
/// reported in one ValidationError. Defaults are filled in the result.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

std::unique_ptr<Model> build_model(const RunConfig& cfg);

/// Executes the configured tasks in order, writing branch CSVs, manifests
/// and event snapshots into the output directory (FRACPATH_OUT overrides).
/// Returns 0 when every task succeeded, 1 otherwise; on failure the outputs
/// of the failing task carry a .partial suffix.
int run(const RunConfig& cfg);

}  // namespace fracpath
