#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "condensation/datasets.hpp"
#include "condensation/spectral.hpp"
#include "condensation/topology.hpp"

namespace condensation {

// All numeric CSV output uses the shortest decimal that round-trips the
// exact double, so reruns are byte-comparable.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, result.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw error(errc::bad_params, "cannot parse number: '" + s + "'");
  }
}

// Exact column headers; FORMATS.md documents the same strings and the tests
// pin them.
inline constexpr const char* kMergesHeader = "step,survivor,absorbed";
inline constexpr const char* kDiagnosticsHeader = "step,epsilon,diameter,lambda2,hausdorff_to_prev";
inline constexpr const char* kDiagramHeader = "birth,death,dim,essential";
inline constexpr const char* kBarcodeHeader = "id,birth,death";
inline constexpr const char* kLinkageHeader = "merge_index,left_ref,right_ref,height,size";
inline constexpr const char* kActivityHeader = "step,cumulative_persistence";

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  const bool has_comma = line.find(',') != std::string::npos;
  std::istringstream in(line);
  if (has_comma) {
    while (std::getline(in, field, ',')) fields.push_back(field);
  } else {
    while (in >> field) fields.push_back(field);
  }
  return fields;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw error(errc::bad_params, "cannot open for writing: " + path.string());
  return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::bad_params, "cannot open for reading: " + path.string());
  return in;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Point cloud tables: one point per row, d coordinate columns, no header.
// ---------------------------------------------------------------------------

inline void write_point_cloud(const std::filesystem::path& path, const PointCloud& X) {
  auto out = detail::open_out(path);
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    for (Eigen::Index j = 0; j < X.dim(); ++j) {
      if (j) out << ',';
      out << format_double(X.coords(i, j));
    }
    out << '\n';
  }
}

/// Reads a coordinate table (comma- or whitespace-separated). Rows get ids
/// 0..N-1 and unit multiplicity.
inline PointCloud read_point_cloud(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    if (!rows.empty() && rows.front().size() != row.size())
      throw error(errc::bad_params, "ragged rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw error(errc::bad_params, "empty point cloud file: " + path.string());
  Matrix coords(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      coords(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return make_cloud(std::move(coords));
}

// ---------------------------------------------------------------------------
// Flat key=value records for kernels, schedules, configs and dataset specs.
// ---------------------------------------------------------------------------

using KeyValues = std::map<std::string, std::string>;

inline void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  auto out = detail::open_out(path);
  for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
}

inline KeyValues read_key_values(const std::filesystem::path& path) {
  auto in = detail::open_in(path);
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw error(errc::bad_params, "expected key=value, got: '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

namespace detail {

inline const std::string& require(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw error(errc::bad_params, "missing config key: " + key);
  return it->second;
}

inline std::string get_or(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

}  // namespace detail

inline void kernel_to_kv(const KernelSpec& spec, KeyValues& kv) {
  kv["kernel"] = kernel_family_name(spec.family);
  kv["kernel_epsilon"] = format_double(spec.epsilon);
  if (spec.family == KernelFamily::AlphaDecay) kv["kernel_alpha"] = format_double(spec.alpha);
  if (spec.family == KernelFamily::DensityNormalized) {
    kv["kernel_beta"] = format_double(spec.beta);
    kv["kernel_base"] = kernel_family_name(spec.base->family);
    if (spec.base->family == KernelFamily::AlphaDecay)
      kv["kernel_alpha"] = format_double(spec.base->alpha);
  }
}

inline KernelFamily kernel_family_from_string(const std::string& s) {
  for (KernelFamily f : {KernelFamily::Box, KernelFamily::Gaussian, KernelFamily::Laplace,
                         KernelFamily::AlphaDecay, KernelFamily::DensityNormalized})
    if (s == kernel_family_name(f)) return f;
  throw error(errc::bad_params, "unknown kernel family: " + s);
}

inline KernelSpec kernel_from_kv(const KeyValues& kv) {
  KernelSpec spec;
  spec.family = kernel_family_from_string(detail::require(kv, "kernel"));
  spec.epsilon = parse_double(detail::get_or(kv, "kernel_epsilon", "1"));
  if (spec.family == KernelFamily::AlphaDecay)
    spec.alpha = parse_double(detail::require(kv, "kernel_alpha"));
  if (spec.family == KernelFamily::DensityNormalized) {
    KernelSpec base;
    base.family = kernel_family_from_string(detail::require(kv, "kernel_base"));
    base.epsilon = spec.epsilon;
    if (base.family == KernelFamily::AlphaDecay)
      base.alpha = parse_double(detail::require(kv, "kernel_alpha"));
    spec.beta = parse_double(detail::require(kv, "kernel_beta"));
    spec.base = std::make_shared<KernelSpec>(base);
  }
  return spec;
}

inline void schedule_to_kv(const ScheduleSpec& spec, KeyValues& kv) {
  kv["schedule"] = schedule_policy_name(spec.policy);
  switch (spec.policy) {
    case SchedulePolicy::Fixed:
      kv["schedule_epsilon0"] = format_double(spec.epsilon0);
      break;
    case SchedulePolicy::Doubling:
      kv["schedule_epsilon0"] = format_double(spec.epsilon0);
      kv["schedule_stall_threshold"] = format_double(spec.stall_threshold);
      break;
    case SchedulePolicy::GeometricGuarantee:
    case SchedulePolicy::SpectralGuarantee:
      kv["schedule_delta"] = format_double(spec.delta);
      break;
    case SchedulePolicy::MinDistance:
      break;
  }
}

inline SchedulePolicy schedule_policy_from_string(const std::string& s) {
  for (SchedulePolicy p : {SchedulePolicy::Fixed, SchedulePolicy::Doubling,
                           SchedulePolicy::MinDistance, SchedulePolicy::GeometricGuarantee,
                           SchedulePolicy::SpectralGuarantee})
    if (s == schedule_policy_name(p)) return p;
  throw error(errc::bad_params, "unknown schedule policy: " + s);
}

inline ScheduleSpec schedule_from_kv(const KeyValues& kv) {
  ScheduleSpec spec;
  spec.policy = schedule_policy_from_string(detail::require(kv, "schedule"));
  switch (spec.policy) {
    case SchedulePolicy::Fixed:
      spec.epsilon0 = parse_double(detail::require(kv, "schedule_epsilon0"));
      break;
    case SchedulePolicy::Doubling:
      spec.epsilon0 = parse_double(detail::require(kv, "schedule_epsilon0"));
      spec.stall_threshold = parse_double(detail::get_or(kv, "schedule_stall_threshold", "1e-4"));
      break;
    case SchedulePolicy::GeometricGuarantee:
    case SchedulePolicy::SpectralGuarantee:
      spec.delta = parse_double(detail::require(kv, "schedule_delta"));
      break;
    case SchedulePolicy::MinDistance:
      break;
  }
  return spec;
}

inline void config_to_kv(const CondensationConfig& config, KeyValues& kv) {
  kernel_to_kv(config.kernel, kv);
  schedule_to_kv(config.schedule, kv);
  kv["tau"] = std::to_string(config.tau);
  if (!config.tau_schedule.empty()) {
    std::string joined;
    for (size_t i = 0; i < config.tau_schedule.size(); ++i) {
      if (i) joined += ',';
      joined += std::to_string(config.tau_schedule[i]);
    }
    kv["tau_schedule"] = joined;
  }
  kv["zeta"] = format_double(config.zeta);
  kv["zeta_tracks_epsilon"] = config.zeta_tracks_epsilon ? "1" : "0";
  if (config.zeta_tracks_epsilon) kv["zeta_fraction"] = format_double(config.zeta_fraction);
  kv["max_steps"] = std::to_string(config.max_steps);
  kv["convergence_tol"] = format_double(config.convergence_tol);
  kv["fixed_point_tol"] = format_double(config.fixed_point_tol);
  kv["multiplicity_weighted"] = config.multiplicity_weighted ? "1" : "0";
}

inline CondensationConfig config_from_kv(const KeyValues& kv) {
  CondensationConfig config;
  config.kernel = kernel_from_kv(kv);
  config.schedule = schedule_from_kv(kv);
  config.tau = static_cast<int>(parse_double(detail::get_or(kv, "tau", "1")));
  if (kv.count("tau_schedule")) {
    std::stringstream in(kv.at("tau_schedule"));
    std::string item;
    while (std::getline(in, item, ','))
      config.tau_schedule.push_back(static_cast<int>(parse_double(item)));
  }
  config.zeta = parse_double(detail::get_or(kv, "zeta", "0"));
  config.zeta_tracks_epsilon = detail::get_or(kv, "zeta_tracks_epsilon", "0") == "1";
  config.zeta_fraction = parse_double(detail::get_or(kv, "zeta_fraction", "0.5"));
  config.max_steps = static_cast<int>(parse_double(detail::get_or(kv, "max_steps", "1000")));
  config.convergence_tol = parse_double(detail::get_or(kv, "convergence_tol", "1e-8"));
  config.fixed_point_tol = parse_double(detail::get_or(kv, "fixed_point_tol", "1e-12"));
  config.multiplicity_weighted = detail::get_or(kv, "multiplicity_weighted", "1") == "1";
  return config;
}

// ---------------------------------------------------------------------------
// Trace directories: step_%04d.csv per snapshot plus merges.csv and
// diagnostics.csv. Together with the config these reconstruct the run.
// ---------------------------------------------------------------------------

inline std::string step_file_name(int t) {
  char name[32];
  std::snprintf(name, sizeof(name), "step_%04d.csv", t);
  return name;
}

inline void write_trace(const std::filesystem::path& dir, const CondensationTrace& trace,
                        const CondensationConfig& config) {
  std::filesystem::create_directories(dir);
  for (int t = 0; t < static_cast<int>(trace.snapshots.size()); ++t)
    write_point_cloud(dir / step_file_name(t), trace.snapshots[static_cast<size_t>(t)]);

  {
    auto out = detail::open_out(dir / "merges.csv");
    out << kMergesHeader << '\n';
    for (const auto& e : trace.merges)
      out << e.step << ',' << e.survivor << ',' << e.absorbed << '\n';
  }
  {
    auto out = detail::open_out(dir / "diagnostics.csv");
    out << kDiagnosticsHeader << '\n';
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int t = 0; t < static_cast<int>(trace.snapshots.size()); ++t) {
      const bool has_step = t < trace.steps();
      double l2 = nan;
      if (has_step) {
        const DiffusionOperator op = detail::rebuild_operator(trace, config, t);
        l2 = lambda2(op);
      }
      const double hausdorff_prev =
          t > 0 ? hausdorff_distance(trace.snapshots[static_cast<size_t>(t)],
                                     trace.snapshots[static_cast<size_t>(t) - 1])
                : nan;
      out << t << ',' << format_double(has_step ? trace.epsilons[static_cast<size_t>(t)] : nan)
          << ',' << format_double(trace.diameters[static_cast<size_t>(t)]) << ','
          << format_double(l2) << ',' << format_double(hausdorff_prev) << '\n';
    }
  }
}

/// Rebuilds a trace from a directory written by write_trace. Ids and
/// multiplicities are replayed from merges.csv; degrees are recomputed from
/// the snapshots when with_degrees is set (spectral audits need them).
inline CondensationTrace read_trace(const std::filesystem::path& dir,
                                    const CondensationConfig& config, bool with_degrees = false) {
  CondensationTrace trace;
  trace.zeta = config.zeta_tracks_epsilon ? 0.0 : config.zeta;
  for (int t = 0;; ++t) {
    const auto path = dir / step_file_name(t);
    if (!std::filesystem::exists(path)) break;
    trace.snapshots.push_back(read_point_cloud(path));
  }
  if (trace.snapshots.empty())
    throw error(errc::bad_params, "no step files in " + dir.string());

  {
    auto in = detail::open_in(dir / "merges.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = detail::split_fields(line);
      if (fields.size() != 3) throw error(errc::bad_params, "bad merges.csv row: " + line);
      trace.merges.push_back({static_cast<int>(parse_double(fields[0])),
                              static_cast<int>(parse_double(fields[1])),
                              static_cast<int>(parse_double(fields[2]))});
    }
  }
  {
    auto in = detail::open_in(dir / "diagnostics.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = detail::split_fields(line);
      if (fields.size() != 5) throw error(errc::bad_params, "bad diagnostics.csv row: " + line);
      const int t = static_cast<int>(parse_double(fields[0]));
      if (t < trace.steps()) trace.epsilons.push_back(parse_double(fields[1]));
    }
  }
  if (static_cast<int>(trace.epsilons.size()) != trace.steps())
    throw error(errc::bad_params, "diagnostics.csv does not match the step files");

  // Replay ids and multiplicities through the merge events.
  size_t next_event = 0;
  for (int t = 1; t < static_cast<int>(trace.snapshots.size()); ++t) {
    const PointCloud& prev = trace.snapshots[static_cast<size_t>(t) - 1];
    std::vector<int> ids = prev.ids;
    std::vector<int> mult = prev.multiplicity;
    while (next_event < trace.merges.size() && trace.merges[next_event].step == t) {
      const MergeEvent& e = trace.merges[next_event];
      const auto survivor = std::find(ids.begin(), ids.end(), e.survivor);
      const auto absorbed = std::find(ids.begin(), ids.end(), e.absorbed);
      if (survivor == ids.end() || absorbed == ids.end())
        throw error(errc::bad_params, "merges.csv references unknown ids at step " +
                                          std::to_string(t));
      mult[static_cast<size_t>(survivor - ids.begin())] +=
          mult[static_cast<size_t>(absorbed - ids.begin())];
      mult.erase(mult.begin() + (absorbed - ids.begin()));
      ids.erase(absorbed);
      ++next_event;
    }
    PointCloud& snap = trace.snapshots[static_cast<size_t>(t)];
    if (ids.size() != static_cast<size_t>(snap.size()))
      throw error(errc::bad_params, "merge events do not match snapshot sizes at step " +
                                        std::to_string(t));
    snap.ids = std::move(ids);
    snap.multiplicity = std::move(mult);
  }

  for (const auto& snap : trace.snapshots) trace.diameters.push_back(diameter(snap));
  for (double eps : trace.epsilons) trace.zetas.push_back(config.merge_radius(eps));
  if (with_degrees)
    for (int t = 0; t < trace.steps(); ++t)
      trace.degrees.push_back(detail::rebuild_operator(trace, config, t).degrees);
  return trace;
}

// ---------------------------------------------------------------------------
// Topology artifacts.
// ---------------------------------------------------------------------------

inline void write_diagram(const std::filesystem::path& path, const PersistenceDiagram& diagram) {
  auto out = detail::open_out(path);
  out << kDiagramHeader << '\n';
  for (const auto& p : diagram.points)
    out << format_double(p.birth) << ',' << format_double(p.death) << ',' << p.dim << ','
        << (p.essential ? 1 : 0) << '\n';
}

inline void write_barcode(const std::filesystem::path& path, const PersistenceDiagram& diagram) {
  auto out = detail::open_out(path);
  out << kBarcodeHeader << '\n';
  int id = 0;
  for (const auto& p : diagram.points)
    out << id++ << ',' << format_double(p.birth) << ',' << format_double(p.death) << '\n';
}

inline void write_linkage(const std::filesystem::path& path, const Dendrogram& dendrogram) {
  auto out = detail::open_out(path);
  out << kLinkageHeader << '\n';
  for (size_t k = 0; k < dendrogram.merges.size(); ++k) {
    const auto& m = dendrogram.merges[k];
    out << k << ',' << m.left << ',' << m.right << ',' << format_double(m.height) << ','
        << m.size << '\n';
  }
}

inline void write_activity(const std::filesystem::path& path,
                           const std::vector<std::pair<int, double>>& curve) {
  auto out = detail::open_out(path);
  out << kActivityHeader << '\n';
  for (const auto& [step, value] : curve) out << step << ',' << format_double(value) << '\n';
}

/// spectral.csv: per-step eigen diagnostics plus the product-bound audit,
/// one observed/bound column pair per coordinate.
inline void write_spectral(const std::filesystem::path& path, const CondensationTrace& trace,
                           const CondensationConfig& config) {
  auto out = detail::open_out(path);
  const int d = static_cast<int>(trace.initial().dim());
  out << "step,lambda2,lambda2_bound,degree_delta";
  for (int c = 0; c < d; ++c) out << ",observed_h_norm_" << c << ",bound_rhs_" << c;
  out << '\n';

  std::vector<std::vector<NonconstantNormAudit>> audits;
  for (int c = 0; c < d; ++c) audits.push_back(nonconstant_norm_audit(trace, config, c));
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int t = 0; t < trace.steps(); ++t) {
    const DiffusionOperator op = detail::rebuild_operator(trace, config, t);
    double bound = nan;
    if (op.kernel.minCoeff() > 0.0) bound = lambda2_bound(op).bound;
    double degree_delta = nan;
    if (t + 1 < trace.steps() &&
        trace.degrees.size() > static_cast<size_t>(t) + 1 &&
        trace.degrees[static_cast<size_t>(t)].size() ==
            trace.degrees[static_cast<size_t>(t) + 1].size())
      degree_delta =
          (trace.degrees[static_cast<size_t>(t)] - trace.degrees[static_cast<size_t>(t) + 1]).norm();
    out << t << ',' << format_double(lambda2(op)) << ',' << format_double(bound) << ','
        << format_double(degree_delta);
    for (int c = 0; c < d; ++c) {
      const auto& rows = audits[static_cast<size_t>(c)];
      const bool audited = t < static_cast<int>(rows.size());
      out << ',' << format_double(audited ? rows[static_cast<size_t>(t)].observed : nan) << ','
          << format_double(audited ? rows[static_cast<size_t>(t)].bound : nan);
    }
    out << '\n';
  }
}

}  // namespace condensation
