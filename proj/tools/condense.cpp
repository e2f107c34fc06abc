// Batch front end: generate datasets, run condensation, compute spectral and
// topological audits, and compare against the clustering oracles. All
// artifacts are flat CSV/text; FORMATS.md documents the schemas.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "condensation/clustering.hpp"
#include "condensation/io.hpp"
#include "condensation/runner.hpp"

namespace fs = std::filesystem;
using namespace condensation;

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitMismatch = 3;

int exit_code_for(const error& e) {
  return e.code() == errc::bad_params ? kExitUsage : kExitNumeric;
}

struct KernelFlags {
  std::string family = "gaussian";
  double epsilon = 1.0;
  double alpha = 2.0;
  double beta = 0.5;
  std::string base = "gaussian";

  KernelSpec build() const {
    KernelSpec spec;
    spec.family = kernel_family_from_string(family);
    spec.epsilon = epsilon;
    spec.alpha = alpha;
    if (spec.family == KernelFamily::DensityNormalized) {
      KernelSpec b;
      b.family = kernel_family_from_string(base);
      b.epsilon = epsilon;
      b.alpha = alpha;
      spec = density_normalized_kernel(b, beta);
    }
    return spec;
  }
};

struct ScheduleFlags {
  std::string policy = "fixed";
  double delta = 0.1;
  double stall_threshold = 1e-4;

  ScheduleSpec build(double epsilon) const {
    ScheduleSpec spec;
    spec.policy = schedule_policy_from_string(policy);
    spec.epsilon0 = epsilon;
    spec.delta = delta;
    spec.stall_threshold = stall_threshold;
    return spec;
  }
};

void add_kernel_flags(CLI::App* app, KernelFlags& flags) {
  app->add_option("--kernel", flags.family,
                  "kernel family: box, gaussian, laplace, alpha-decay, density-normalized")
      ->capture_default_str();
  app->add_option("--epsilon", flags.epsilon, "kernel bandwidth (also the initial bandwidth)")
      ->capture_default_str();
  app->add_option("--alpha", flags.alpha, "alpha-decay exponent")->capture_default_str();
  app->add_option("--beta", flags.beta, "density normalization factor")->capture_default_str();
  app->add_option("--base", flags.base, "base family for density-normalized kernels")
      ->capture_default_str();
}

void add_schedule_flags(CLI::App* app, ScheduleFlags& flags) {
  app->add_option("--schedule", flags.policy,
                  "bandwidth schedule: fixed, doubling, min-distance, geometric-guarantee, "
                  "spectral-guarantee")
      ->capture_default_str();
  app->add_option("--delta", flags.delta, "contraction parameter for guarantee schedules")
      ->capture_default_str();
  app->add_option("--stall-threshold", flags.stall_threshold,
                  "movement threshold that triggers doubling")
      ->capture_default_str();
}

std::vector<int> parse_dims(const std::string& dims) {
  std::vector<int> out;
  std::stringstream in(dims);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(static_cast<int>(parse_double(item)));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffusion condensation toolkit"};
  app.require_subcommand(1);

  // generate ----------------------------------------------------------------
  auto* cmd_generate = app.add_subcommand("generate", "write a dataset as a CSV point table");
  std::string gen_name = "uniform";
  std::string gen_out = "dataset.csv";
  DatasetSpec dataset;
  cmd_generate->add_option("--name", gen_name,
                           "petals, hyperuniform-circle, double-annulus, barbell, two-moons, "
                           "simplex, gaussian-blob, uniform")
      ->required();
  cmd_generate->add_option("--n", dataset.n, "number of points")->capture_default_str();
  cmd_generate->add_option("--seed", dataset.seed, "PRNG seed")->capture_default_str();
  cmd_generate->add_option("--noise", dataset.noise, "noise level where applicable")
      ->capture_default_str();
  cmd_generate->add_option("--petals", dataset.petal_count, "petal count")->capture_default_str();
  cmd_generate->add_option("--k", dataset.simplex_k, "simplex corner count")->capture_default_str();
  cmd_generate->add_option("--dim", dataset.dim, "ambient dimension for blob/uniform")
      ->capture_default_str();
  cmd_generate->add_option("--out", gen_out, "output file")->capture_default_str();

  // condense ----------------------------------------------------------------
  auto* cmd_condense = app.add_subcommand("condense", "run diffusion condensation on a point table");
  std::string condense_input, condense_outdir = "run", condense_manifest;
  KernelFlags kernel_flags;
  ScheduleFlags schedule_flags;
  int tau = 1;
  double zeta = 0.0;
  int max_steps = 1000;
  double convergence_tol = 1e-8, fixed_point_tol = 1e-12;
  bool unit_weights = false;
  cmd_condense->add_option("--input", condense_input, "input point table");
  cmd_condense->add_option("--outdir", condense_outdir, "trace output directory")
      ->capture_default_str();
  cmd_condense->add_option("--from-manifest", condense_manifest,
                           "rerun the exact configuration stored in a manifest");
  add_kernel_flags(cmd_condense, kernel_flags);
  add_schedule_flags(cmd_condense, schedule_flags);
  cmd_condense->add_option("--tau", tau, "diffusion steps per iteration")->capture_default_str();
  cmd_condense->add_option("--zeta", zeta, "merge radius")->capture_default_str();
  cmd_condense->add_option("--max-steps", max_steps, "iteration cap")->capture_default_str();
  cmd_condense->add_option("--convergence-tol", convergence_tol, "diameter declaring convergence")
      ->capture_default_str();
  cmd_condense->add_option("--fixed-point-tol", fixed_point_tol,
                           "displacement declaring a fixed point")
      ->capture_default_str();
  cmd_condense->add_flag("--unit-weights", unit_weights,
                         "ignore row multiplicities when building operators");

  // homology ----------------------------------------------------------------
  auto* cmd_homology = app.add_subcommand("homology", "topological summaries of a trace");
  std::string homology_trace, homology_outdir = "homology";
  bool per_step = false;
  std::string dims = "0,1";
  double max_scale = std::numeric_limits<double>::infinity();
  cmd_homology->add_option("--trace", homology_trace, "trace directory")->required();
  cmd_homology->add_option("--outdir", homology_outdir, "artifact directory")
      ->capture_default_str();
  cmd_homology->add_flag("--per-step", per_step,
                         "Vietoris-Rips diagrams per snapshot instead of condensation homology");
  cmd_homology->add_option("--dims", dims, "diagram dimensions for --per-step")
      ->capture_default_str();
  cmd_homology->add_option("--max-scale", max_scale, "Rips scale cap")->capture_default_str();

  // spectra -----------------------------------------------------------------
  auto* cmd_spectra = app.add_subcommand("spectra", "spectral audit of a trace");
  std::string spectra_trace, spectra_out = "spectral.csv";
  cmd_spectra->add_option("--trace", spectra_trace, "trace directory")->required();
  cmd_spectra->add_option("--out", spectra_out, "output CSV")->capture_default_str();

  // compare-clustering --------------------------------------------------------
  auto* cmd_compare = app.add_subcommand(
      "compare-clustering", "check condensation against the centroid/median linkage oracle");
  std::string compare_input, compare_mode = "upgmc", compare_outdir = "compare";
  cmd_compare->add_option("--input", compare_input, "input point table")->required();
  cmd_compare->add_option("--mode", compare_mode, "upgmc or wpgmc")->capture_default_str();
  cmd_compare->add_option("--outdir", compare_outdir, "linkage table directory")
      ->capture_default_str();

  // report --------------------------------------------------------------------
  auto* cmd_report = app.add_subcommand("report", "concatenate run manifests");
  std::vector<std::string> report_manifests;
  cmd_report->add_option("manifests", report_manifests, "manifest files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitUsage;
  }

  try {
    if (cmd_generate->parsed()) {
      dataset.name = dataset_name_from_string(gen_name);
      const PointCloud cloud = generate(dataset);
      write_point_cloud(gen_out, cloud);
      std::cout << gen_out << '\n';
      return kExitSuccess;
    }

    if (cmd_condense->parsed()) {
      RunResult result;
      if (!condense_manifest.empty()) {
        result = rerun_from_manifest(condense_manifest, condense_outdir);
      } else {
        if (condense_input.empty())
          throw error(errc::bad_params, "condense needs --input or --from-manifest");
        CondensationConfig config;
        config.kernel = kernel_flags.build();
        config.schedule = schedule_flags.build(kernel_flags.epsilon);
        config.tau = tau;
        config.zeta = zeta;
        config.max_steps = max_steps;
        config.convergence_tol = convergence_tol;
        config.fixed_point_tol = fixed_point_tol;
        config.multiplicity_weighted = !unit_weights;
        result = run_condensation(condense_input, config, condense_outdir);
      }
      std::cout << result.manifest_path.string() << '\n'
                << "termination=" << termination_name(result.trace.termination) << '\n'
                << "steps=" << result.trace.steps() << '\n';
      return kExitSuccess;
    }

    if (cmd_homology->parsed()) {
      auto [trace, config] = load_run(homology_trace);
      fs::create_directories(homology_outdir);
      if (per_step) {
        for (int d : parse_dims(dims)) {
          for (int t = 0; t < static_cast<int>(trace.snapshots.size()); ++t) {
            const PersistenceDiagram diagram =
                vr_persistence(trace.snapshots[static_cast<size_t>(t)], d, max_scale);
            char name[48];
            std::snprintf(name, sizeof(name), "diagram_dim%d_t%04d.csv", d, t);
            write_diagram(fs::path(homology_outdir) / name, diagram);
          }
        }
      } else {
        const CondensationHomology homology = condensation_homology(trace);
        write_diagram(fs::path(homology_outdir) / "diagram.csv", homology.diagram);
        write_barcode(fs::path(homology_outdir) / "barcode.csv", homology.diagram);
        const Dendrogram dendrogram =
            dendrogram_from_pairing(homology.pairing, trace.initial().ids);
        write_linkage(fs::path(homology_outdir) / "dendrogram.csv", dendrogram);
        write_activity(fs::path(homology_outdir) / "activity.csv",
                       topological_activity(homology.diagram));
      }
      std::cout << homology_outdir << '\n';
      return kExitSuccess;
    }

    if (cmd_spectra->parsed()) {
      auto [trace, config] = load_run(spectra_trace, /*with_degrees=*/true);
      write_spectral(spectra_out, trace, config);
      std::cout << spectra_out << '\n';
      return kExitSuccess;
    }

    if (cmd_compare->parsed()) {
      const PointCloud X0 = read_point_cloud(compare_input);
      const bool upgmc = compare_mode == "upgmc";
      if (!upgmc && compare_mode != "wpgmc")
        throw error(errc::bad_params, "mode must be upgmc or wpgmc");
      const Dendrogram oracle = agglomerate(X0, upgmc ? Linkage::UPGMC : Linkage::WPGMC);
      const Dendrogram condensed = condensation_as_clustering(
          X0, upgmc ? EquivalenceMode::UPGMC_equiv : EquivalenceMode::WPGMC_equiv);
      fs::create_directories(compare_outdir);
      write_linkage(fs::path(compare_outdir) / "linkage_agglomerative.csv", oracle);
      write_linkage(fs::path(compare_outdir) / "linkage_condensation.csv", condensed);
      const bool equivalent = same_merge_tree(oracle, condensed);
      std::cout << (equivalent ? "equivalent" : "different") << '\n';
      return equivalent ? kExitSuccess : kExitMismatch;
    }

    if (cmd_report->parsed()) {
      for (const auto& path : report_manifests) {
        std::cout << "# " << path << '\n';
        for (const auto& [key, value] : read_key_values(path))
          std::cout << key << '=' << value << '\n';
        std::cout << '\n';
      }
      return kExitSuccess;
    }
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
