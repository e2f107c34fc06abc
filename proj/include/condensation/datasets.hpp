#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "condensation/types.hpp"

namespace condensation {

enum class DatasetName {
  Petals,
  HyperuniformCircle,
  DoubleAnnulus,
  Barbell,
  TwoMoons,
  SimplexCorners,
  GaussianBlob,
  Uniform,
};

inline const char* dataset_name_string(DatasetName n) {
  switch (n) {
    case DatasetName::Petals: return "petals";
    case DatasetName::HyperuniformCircle: return "hyperuniform-circle";
    case DatasetName::DoubleAnnulus: return "double-annulus";
    case DatasetName::Barbell: return "barbell";
    case DatasetName::TwoMoons: return "two-moons";
    case DatasetName::SimplexCorners: return "simplex";
    case DatasetName::GaussianBlob: return "gaussian-blob";
    case DatasetName::Uniform: return "uniform";
  }
  return "?";
}

/// Generation is a pure function of the spec: the same spec yields the same
/// bytes on every platform. Randomness comes from std::mt19937_64 (whose
/// output sequence the standard pins down exactly) with uniform doubles
/// taken as (x >> 11) * 2^-53 and normals via Box-Muller; none of the
/// distribution classes from <random> are used since their streams are
/// implementation-defined.
struct DatasetSpec {
  DatasetName name = DatasetName::Uniform;
  int n = 128;
  std::uint64_t seed = 42;
  double noise = 0.0;

  // Shape-specific parameters.
  int petal_count = 6;
  double petal_radius = 1.0;
  double petal_spread = 0.18;
  double annulus_inner = 0.15;
  double annulus_outer = 0.3;
  int simplex_k = 3;
  int dim = 2;
};

namespace detail {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; draws two uniforms per pair of normals.
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * M_PI * v;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detail

inline PointCloud generate(const DatasetSpec& spec) {
  if (spec.n < 1) throw error(errc::bad_params, "need n >= 1");
  if (spec.noise < 0.0) throw error(errc::bad_params, "noise must be nonnegative");
  detail::Rng rng(spec.seed);

  switch (spec.name) {
    case DatasetName::Petals: {
      if (spec.petal_count < 1) throw error(errc::bad_params, "need at least one petal");
      Matrix coords(spec.n, 2);
      for (int i = 0; i < spec.n; ++i) {
        const int petal = i % spec.petal_count;
        const double angle = 2.0 * M_PI * petal / spec.petal_count;
        coords(i, 0) = spec.petal_radius * std::cos(angle) + spec.petal_spread * rng.normal();
        coords(i, 1) = spec.petal_radius * std::sin(angle) + spec.petal_spread * rng.normal();
      }
      return make_cloud(std::move(coords));
    }
    case DatasetName::HyperuniformCircle: {
      // Exactly equally spaced; no randomness at all.
      Matrix coords(spec.n, 2);
      for (int i = 0; i < spec.n; ++i) {
        const double angle = 2.0 * M_PI * i / spec.n;
        coords(i, 0) = std::cos(angle);
        coords(i, 1) = std::sin(angle);
      }
      return make_cloud(std::move(coords));
    }
    case DatasetName::DoubleAnnulus: {
      if (!(spec.annulus_inner > 0.0 && spec.annulus_inner < spec.annulus_outer))
        throw error(errc::bad_params, "need 0 < inner radius < outer radius");
      // Two tangent annuli stacked vertically; the second is scaled to 5/6
      // of the first so the tangency stays while the shapes differ.
      const double scale2 = 5.0 / 6.0;
      const double cx = 0.3;
      const double cy1 = spec.annulus_outer;
      const double cy2 = cy1 + spec.annulus_outer * (1.0 + scale2);
      Matrix coords(spec.n, 2);
      for (int i = 0; i < spec.n; ++i) {
        const bool second = i >= spec.n / 2;
        const double scale = second ? scale2 : 1.0;
        const double radius = scale * rng.uniform(spec.annulus_inner, spec.annulus_outer);
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        coords(i, 0) = cx + radius * std::cos(angle);
        coords(i, 1) = (second ? cy2 : cy1) + radius * std::sin(angle);
      }
      return make_cloud(std::move(coords));
    }
    case DatasetName::Barbell: {
      // Two discs of radius 1/2 joined by a thin bridge along y = 1/2.
      const double r = 0.5;
      const double left_x = 0.5, right_x = 2.25, y0 = 0.5;
      Matrix coords(spec.n, 2);
      for (int i = 0; i < spec.n; ++i) {
        const int slot = i % 20;  // 9:9:2 split between discs and bridge
        if (slot < 18) {
          const double cx = slot < 9 ? left_x : right_x;
          const double radius = r * std::sqrt(rng.uniform());
          const double angle = rng.uniform(0.0, 2.0 * M_PI);
          coords(i, 0) = cx + radius * std::cos(angle);
          coords(i, 1) = y0 + radius * std::sin(angle);
        } else {
          coords(i, 0) = rng.uniform(left_x + r, right_x - r);
          coords(i, 1) = y0 + 0.05 * (rng.uniform() - 0.5);
        }
      }
      return make_cloud(std::move(coords));
    }
    case DatasetName::TwoMoons: {
      Matrix coords(spec.n, 2);
      for (int i = 0; i < spec.n; ++i) {
        const bool second = i >= spec.n / 2;
        const double angle = M_PI * rng.uniform();
        double x = std::cos(angle), y = std::sin(angle);
        if (second) {
          x = 1.0 - x;
          y = 0.5 - y;
        }
        coords(i, 0) = x + spec.noise * rng.normal();
        coords(i, 1) = y + spec.noise * rng.normal();
      }
      return make_cloud(std::move(coords));
    }
    case DatasetName::SimplexCorners: {
      // The k standard basis points of R^k: all pairwise distances sqrt(2).
      if (spec.simplex_k < 2) throw error(errc::bad_params, "need k >= 2");
      Matrix coords = Matrix::Zero(spec.simplex_k, spec.simplex_k);
      for (int i = 0; i < spec.simplex_k; ++i) coords(i, i) = 1.0;
      return make_cloud(std::move(coords));
    }
    case DatasetName::GaussianBlob: {
      if (spec.dim < 1) throw error(errc::bad_params, "need dim >= 1");
      Matrix coords(spec.n, spec.dim);
      for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.dim; ++j) coords(i, j) = rng.normal();
      return make_cloud(std::move(coords));
    }
    case DatasetName::Uniform: {
      if (spec.dim < 1) throw error(errc::bad_params, "need dim >= 1");
      Matrix coords(spec.n, spec.dim);
      for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.dim; ++j) coords(i, j) = rng.uniform();
      return make_cloud(std::move(coords));
    }
  }
  throw error(errc::bad_params, "unknown dataset name");
}

inline DatasetName dataset_name_from_string(const std::string& s) {
  for (DatasetName n : {DatasetName::Petals, DatasetName::HyperuniformCircle,
                        DatasetName::DoubleAnnulus, DatasetName::Barbell, DatasetName::TwoMoons,
                        DatasetName::SimplexCorners, DatasetName::GaussianBlob,
                        DatasetName::Uniform})
    if (s == dataset_name_string(n)) return n;
  throw error(errc::bad_params, "unknown dataset name: " + s);
}

}  // namespace condensation
