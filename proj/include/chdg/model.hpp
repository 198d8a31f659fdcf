#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "chdg/mesh.hpp"
#include "chdg/space.hpp"
#include "chdg/types.hpp"

namespace chdg {

enum class PotentialKind {
  double_well,   // F = (1-u^2)^2 / 4
  logarithmic,   // F = (theta/2)(u ln u + (1-u) ln(1-u)) + (theta_c/2) u(1-u)
  quadratic,     // F = u^2 / 2; linear f, used as a harness potential
};

struct PotentialSpec {
  PotentialKind kind = PotentialKind::double_well;
  double theta = 0;
  double theta_c = 0;

  friend bool operator==(const PotentialSpec&, const PotentialSpec&) = default;
};

struct PotentialValue {
  double F, f, fp;  // F, F', F''
};

// The logarithmic potential is evaluated with its argument clamped into
// [delta, 1-delta]; every clamp is counted so runs can surface how often the
// singular range was touched.
class Potential {
 public:
  static constexpr double kClampDelta = 1e-9;

  explicit Potential(const PotentialSpec& spec)
      : spec_(spec), clamp_count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
    if (spec.kind == PotentialKind::logarithmic && !(spec.theta > 0 && spec.theta <= spec.theta_c))
      throw std::invalid_argument("Potential: logarithmic kind requires 0 < theta <= theta_c");
  }

  const PotentialSpec& spec() const { return spec_; }

  PotentialValue eval(double u) const {
    switch (spec_.kind) {
      case PotentialKind::double_well: {
        double s = 1.0 - u * u;
        return {0.25 * s * s, u * u * u - u, 3.0 * u * u - 1.0};
      }
      case PotentialKind::quadratic:
        return {0.5 * u * u, u, 1.0};
      case PotentialKind::logarithmic: {
        double uc = u;
        if (uc < kClampDelta) {
          uc = kClampDelta;
          clamp_count_->fetch_add(1, std::memory_order_relaxed);
        } else if (uc > 1.0 - kClampDelta) {
          uc = 1.0 - kClampDelta;
          clamp_count_->fetch_add(1, std::memory_order_relaxed);
        }
        const double th = spec_.theta, tc = spec_.theta_c;
        double F = 0.5 * th * (uc * std::log(uc) + (1.0 - uc) * std::log(1.0 - uc)) +
                   0.5 * tc * uc * (1.0 - uc);
        double f = 0.5 * th * (std::log(uc) - std::log(1.0 - uc)) + 0.5 * tc * (1.0 - 2.0 * uc);
        double fp = 0.5 * th / (uc * (1.0 - uc)) - tc;
        return {F, f, fp};
      }
    }
    throw std::logic_error("Potential: unreachable");
  }

  // quadrature degree for integrals of f(u_h) * basis
  int nonlinear_quad_degree(int q) const {
    switch (spec_.kind) {
      case PotentialKind::double_well: return 3 * q + 1;
      case PotentialKind::quadratic: return 2 * q + 2;
      case PotentialKind::logarithmic: return 3 * q + 3;
    }
    return 3 * q + 1;
  }

  std::uint64_t clamp_count() const { return clamp_count_->load(std::memory_order_relaxed); }

 private:
  PotentialSpec spec_;
  std::shared_ptr<std::atomic<std::uint64_t>> clamp_count_;
};

inline PotentialValue potential_eval(const Potential& potential, double u) {
  return potential.eval(u);
}

enum class MobilityKind { constant, u_one_minus_u, one_minus_u_sq };

struct MobilitySpec {
  MobilityKind kind = MobilityKind::constant;
  double beta = 1.0;

  friend bool operator==(const MobilitySpec&, const MobilitySpec&) = default;
};

// clamped at zero: the scheme requires a non-negative mobility
inline double mobility_eval(const MobilitySpec& spec, double u) {
  double mu = 0;
  switch (spec.kind) {
    case MobilityKind::constant: mu = spec.beta; break;
    case MobilityKind::u_one_minus_u: mu = spec.beta * u * (1.0 - u); break;
    case MobilityKind::one_minus_u_sq: mu = spec.beta * (1.0 - u * u); break;
  }
  return std::max(mu, 0.0);
}

// Closed-form experiment descriptions. exact/source take the interface
// parameter epsilon as an argument so diffusivity overrides stay consistent.
struct ProblemPreset {
  std::string name;
  Domain domain;
  BcKind bc = BcKind::neumann;
  double epsilon = 1.0;
  MobilitySpec mobility;
  PotentialSpec potential;

  bool has_exact = false;
  double (*exact_fn)(double x, double y, double t, double eps) = nullptr;
  double (*source_fn)(double x, double y, double t, double eps) = nullptr;

  bool random_ic = false;
  double ic_mean = 0;
  double ic_amplitude = 0;

  // run defaults; dt_auto_per_level means dt = 0.5 * width/(2 nx) recomputed per mesh
  int q = 1;
  int nx = 16, ny = 16;
  double dt = 0;  // 0: derive from dt_rule
  double T = 1.0;
  bool dt_auto_per_level = false;
};

namespace presets_detail {

// u = e^{cos t} cos(pi x) cos(pi y); mu = 1; f = u^3 - u
inline double ex1_exact(double x, double y, double t, double) {
  return std::exp(std::cos(t)) * std::cos(M_PI * x) * std::cos(M_PI * y);
}
inline double ex1_source(double x, double y, double t, double eps) {
  const double pi2 = M_PI * M_PI;
  double e = std::exp(std::cos(t));
  double u = e * std::cos(M_PI * x) * std::cos(M_PI * y);
  double sx = std::sin(M_PI * x), sy = std::sin(M_PI * y);
  double cx = std::cos(M_PI * x), cy = std::cos(M_PI * y);
  double grad2 = e * e * pi2 * (sx * sx * cy * cy + cx * cx * sy * sy);
  return -std::sin(t) * u + 2.0 * pi2 * (2.0 * pi2 * eps * eps - 1.0) * u +
         6.0 * pi2 * u * u * u - 6.0 * u * grad2;
}

// u = e^{-2t} sin x sin y; mu = 1 - u^2; f = u^3 - u
inline double ex2_exact(double x, double y, double t, double) {
  return std::exp(-2.0 * t) * std::sin(x) * std::sin(y);
}
inline double ex2_source(double x, double y, double t, double eps) {
  double e = std::exp(-2.0 * t);
  double u = e * std::sin(x) * std::sin(y);
  double u2 = u * u;
  double cx = std::cos(x), sy = std::sin(y), sx = std::sin(x), cy = std::cos(y);
  double grad2 = e * e * (cx * cx * sy * sy + sx * sx * cy * cy);
  double e2 = eps * eps;
  double Q = -3.0 * u2 * u2 + (4.0 - 2.0 * e2) * u2 + (2.0 * e2 - 1.0);
  double Qp = -12.0 * u2 * u + (8.0 - 4.0 * e2) * u;
  return -2.0 * u + 2.0 * u * Q - Qp * grad2;
}

}  // namespace presets_detail

inline const std::vector<ProblemPreset>& presets() {
  static const std::vector<ProblemPreset> table = [] {
    std::vector<ProblemPreset> v;
    {
      ProblemPreset p;
      p.name = "ex1";
      p.domain = {-1, 1, -1, 1};
      p.bc = BcKind::neumann;
      p.epsilon = 0.1;
      p.mobility = {MobilityKind::constant, 1.0};
      p.potential = {PotentialKind::double_well};
      p.has_exact = true;
      p.exact_fn = presets_detail::ex1_exact;
      p.source_fn = presets_detail::ex1_source;
      p.q = 1;
      p.nx = p.ny = 16;
      p.T = 1.0;
      p.dt_auto_per_level = true;  // dt = 0.5 * dx with the tables' dx = width/(2 nx)
      v.push_back(p);
    }
    {
      ProblemPreset p;
      p.name = "ex2";
      p.domain = {0, 2 * M_PI, 0, 2 * M_PI};
      p.bc = BcKind::periodic;
      p.epsilon = 1.0;
      p.mobility = {MobilityKind::one_minus_u_sq, 1.0};
      p.potential = {PotentialKind::double_well};
      p.has_exact = true;
      p.exact_fn = presets_detail::ex2_exact;
      p.source_fn = presets_detail::ex2_source;
      p.q = 1;
      p.nx = p.ny = 16;
      p.T = 1.0;
      p.dt = 0.0032 * M_PI;  // q = 2 runs use 0.00032 * pi instead
      v.push_back(p);
    }
    {
      ProblemPreset p;
      p.name = "ex3_spinodal";
      p.domain = {0, 1, 0, 1};
      p.bc = BcKind::neumann;
      p.epsilon = 1e-5;
      p.mobility = {MobilityKind::constant, 1.0};
      p.potential = {PotentialKind::double_well};
      p.random_ic = true;
      p.ic_mean = 0.0;
      p.ic_amplitude = 0.005;
      p.q = 1;
      p.nx = p.ny = 32;  // desk-scale default; the reference resolution is unstated
      p.dt = 1e-5;
      p.T = 0.4;
      v.push_back(p);
    }
    {
      ProblemPreset p = v.back();
      p.name = "ex3_nucleation";
      p.ic_mean = 0.4;
      v.push_back(p);
    }
    {
      ProblemPreset p;
      p.name = "ex4";
      p.domain = {-0.5, 0.5, -0.5, 0.5};
      p.bc = BcKind::neumann;
      p.epsilon = 1.0;
      p.mobility = {MobilityKind::u_one_minus_u, 1.0};
      p.potential = {PotentialKind::logarithmic, 6000.0, 18000.0};
      p.random_ic = true;
      p.ic_mean = 0.63;
      p.ic_amplitude = 0.05;
      p.q = 3;
      p.nx = p.ny = 16;  // desk-scale default
      p.dt = 1e-7;
      p.T = 0.2;
      v.push_back(p);
    }
    return v;
  }();
  return table;
}

inline const ProblemPreset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown preset '" + name + "'");
}

// g = u_t - div(mu(u) grad w), w = -eps^2 lap u + f(u), from the closed form
inline double manufactured_source(const ProblemPreset& preset, double x, double y, double t,
                                  double epsilon) {
  if (!preset.has_exact)
    throw std::invalid_argument("manufactured_source: preset '" + preset.name +
                                "' has no exact solution");
  return preset.source_fn(x, y, t, epsilon);
}

inline double manufactured_source(const ProblemPreset& preset, double x, double y, double t) {
  return manufactured_source(preset, x, y, t, preset.epsilon);
}

// Physics of one run: everything the integrator needs besides the space.
struct Model {
  double epsilon = 1.0;
  MobilitySpec mobility;
  Potential potential;
  const ProblemPreset* preset = nullptr;  // for exact solution / source terms

  bool has_source() const { return preset != nullptr && preset->has_exact; }
};

// Projected constant state plus an independent uniform perturbation on every
// dof coefficient; bitwise reproducible for a fixed seed.
inline Vec random_perturbed_constant(const DgSpace& space, double mean, double amplitude,
                                     std::uint64_t seed) {
  Vec coeffs = constant_field(space, mean);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < space.n_dof(); ++i) {
    double r = (rng() >> 11) * 0x1.0p-53;  // uniform in [0,1)
    coeffs(i) += amplitude * (2.0 * r - 1.0);
  }
  return coeffs;
}

}  // namespace chdg
