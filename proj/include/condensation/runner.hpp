#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "condensation/io.hpp"

namespace condensation {

/// Executes a condensation run end to end: load the input table, condense,
/// persist the trace directory and a manifest that suffices to reproduce the
/// run exactly.
struct RunResult {
  CondensationTrace trace;
  std::filesystem::path outdir;
  std::filesystem::path manifest_path;
};

inline RunResult run_condensation(const std::filesystem::path& input,
                                  const CondensationConfig& config,
                                  const std::filesystem::path& outdir,
                                  const KeyValues& extra = {}) {
  const auto start = std::chrono::steady_clock::now();
  const PointCloud X0 = read_point_cloud(input);
  RunResult result;
  result.trace = condense(X0, config);
  result.outdir = outdir;
  write_trace(outdir, result.trace, config);
  const auto elapsed = std::chrono::steady_clock::now() - start;

  KeyValues kv = extra;
  config_to_kv(config, kv);
  kv["input"] = std::filesystem::absolute(input).string();
  kv["termination"] = termination_name(result.trace.termination);
  kv["steps"] = std::to_string(result.trace.steps());
  kv["wall_time_ms"] = std::to_string(
      std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count());
  kv["artifact_steps"] = "step_%04d.csv";
  kv["artifact_merges"] = "merges.csv";
  kv["artifact_diagnostics"] = "diagnostics.csv";
  result.manifest_path = outdir / "manifest.txt";
  write_key_values(result.manifest_path, kv);
  return result;
}

inline RunResult rerun_from_manifest(const std::filesystem::path& manifest_path,
                                     const std::filesystem::path& outdir) {
  const KeyValues kv = read_key_values(manifest_path);
  const CondensationConfig config = config_from_kv(kv);
  const auto input = detail::require(kv, "input");
  return run_condensation(input, config, outdir);
}

/// Loads the trace a run directory holds, using the manifest stored next to
/// the step files.
inline std::pair<CondensationTrace, CondensationConfig> load_run(
    const std::filesystem::path& rundir, bool with_degrees = false) {
  const KeyValues kv = read_key_values(rundir / "manifest.txt");
  CondensationConfig config = config_from_kv(kv);
  CondensationTrace trace = read_trace(rundir, config, with_degrees);
  const auto it = kv.find("termination");
  if (it != kv.end()) {
    if (it->second == "converged") trace.termination = Termination::Converged;
    else if (it->second == "fixed-point") trace.termination = Termination::FixedPoint;
    else trace.termination = Termination::MaxSteps;
  }
  return {std::move(trace), std::move(config)};
}

}  // namespace condensation
