#pragma once

#include <Eigen/SparseLU>
#if defined(CHDG_HAVE_UMFPACK)
#include <Eigen/UmfPackSupport>
#endif
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chdg/assembly.hpp"
#include "chdg/diagnostics.hpp"
#include "chdg/model.hpp"
#include "chdg/space.hpp"
#include "chdg/types.hpp"

namespace chdg {

struct StateVector {
  Vec xi;     // phase field coefficients
  Vec zeta;   // chemical potential coefficients
  double t = 0;
};

struct NewtonSettings {
  double tol = 1e-10;  // infinity norm of the stacked residual
  int max_iter = 100;  // per solve attempt, not per step
  int tau_points = 2;  // Gauss points for the average over tau in [0,1]

  friend bool operator==(const NewtonSettings&, const NewtonSettings&) = default;
};

struct StepStats {
  int newton_iters = 0;
  int factorizations = 0;  // Jacobian factorizations consumed by the step
  double residual_norm = 0;
  std::uint64_t clamp_events = 0;
};

namespace detail {

inline void append_scaled_block(std::vector<Triplet>& trip, const SparseMat& m, int row0, int col0,
                                double scale) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it)
      trip.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()),
                        scale * it.value());
}

inline std::string step_error(const char* what, double t, int iter, double res) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "AvfIntegrator::step: %s at t=%.6g, iteration %d, residual %.3e",
                what, t, iter, res);
  return buf;
}

// Direct solver for the stacked Newton systems
//   [ D            dt/2 A_mu ] [dx]   [r1]
//   [ 1/2 A_eps + J_b  -D/2  ] [dz] = [r2]
// exploiting that the mass matrix D is diagonal: eliminating dx leaves the
// half-size Schur complement S = D/2 + dt/2 (1/2 A_eps + J_b) D^{-1} A_mu.
// solve() recovers dx from the first block row with the A_mu and dt of the
// system actually being solved, so that row is satisfied to componentwise
// roundoff even when the factors are stale; the caller may therefore keep
// factors across iterations and steps and only refresh them when the
// iteration slows. S has a state-independent sparsity pattern, so the
// symbolic analysis runs once.
class SchurStepSolver {
 public:
  bool factorize(const Vec& D, const SparseMat& A_eps, const SparseMat& Jb,
                 const SparseMat& A_mu, double dt) {
    Dinv_ = D.cwiseInverse();
    C_ = 0.5 * A_eps + Jb;
    // S_ is a member because some backends keep pointers into the factored
    // matrix for the solve phase
    S_ = (0.5 * dt) * (C_ * (SparseMat(Dinv_.asDiagonal()) * A_mu));
    S_ += SparseMat(Vec(0.5 * D).asDiagonal());
    if (!analyzed_) {
      lu_.analyzePattern(S_);
      analyzed_ = true;
    }
    lu_.factorize(S_);
    ready_ = lu_.info() == Eigen::Success;
    return ready_;
  }

  bool ready() const { return ready_; }
  void invalidate() { ready_ = false; }

  // [dx; dz] for the system with the given A_mu and dt (not necessarily the
  // ones the factors were built from)
  Vec solve(const Vec& R, const SparseMat& A_mu, double dt) const {
    const auto n = Dinv_.size();
    Vec r1 = R.head(n);
    Vec dz = lu_.solve(Vec(C_ * Vec(r1.cwiseProduct(Dinv_)) - R.tail(n)));
    Vec out(2 * n);
    out.head(n) = Dinv_.cwiseProduct(Vec(r1 - 0.5 * dt * (A_mu * dz)));
    out.tail(n) = dz;
    return out;
  }

 private:
#if defined(CHDG_HAVE_UMFPACK)
  Eigen::UmfPackLU<SparseMat> lu_;
#else
  Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> lu_;
#endif
  bool analyzed_ = false;
  bool ready_ = false;
  SparseMat C_;  // second block row of the factored system
  SparseMat S_;  // Schur complement backing the factors
  Vec Dinv_;
};

// residual with the nonlinear average already assembled:
//   R1 = M (xi+ - xi_n) + dt/2 A_mu (zeta+ + zeta_n) - dt load_avg
//   R2 = 1/2 A_eps (xi+ + xi_n) + b_avg - 1/2 M (zeta+ + zeta_n)
inline Vec avf_residual_with(const SparseMat& M, const SparseMat& A_eps, const SparseMat& A_mu,
                             const Vec& xi_n, const Vec& zeta_n, const Vec& xi_next,
                             const Vec& zeta_next, double dt, const Vec& load_avg,
                             const Vec& b_avg) {
  const auto n = M.rows();
  Vec R(2 * n);
  R.head(n) = M * (xi_next - xi_n) + 0.5 * dt * (A_mu * (zeta_next + zeta_n)) - dt * load_avg;
  R.tail(n) = 0.5 * (A_eps * (xi_next + xi_n)) + b_avg - 0.5 * (M * (zeta_next + zeta_n));
  return R;
}

}  // namespace detail

// residual of one step of the scheme, stacked [R1; R2]
inline Vec avf_residual(const DgSpace& space, const Potential& potential, const SparseMat& M,
                        const SparseMat& A_eps, const SparseMat& A_mu, const Vec& xi_n,
                        const Vec& zeta_n, const Vec& xi_next, const Vec& zeta_next, double dt,
                        const Vec& load_avg, int tau_points) {
  Vec b_avg = assemble_avf_b(space, potential, xi_n, xi_next, tau_points);
  return detail::avf_residual_with(M, A_eps, A_mu, xi_n, zeta_n, xi_next, zeta_next, dt, load_avg,
                                   b_avg);
}

// exact Jacobian of the stacked residual w.r.t. (xi+, zeta+):
//   [ M                  dt/2 A_mu ]
//   [ 1/2 A_eps + J_b   -1/2 M     ]
inline SparseMat avf_jacobian_from(const SparseMat& M, const SparseMat& A_eps,
                                   const SparseMat& A_mu, const SparseMat& Jb, double dt) {
  const int n = static_cast<int>(M.rows());
  std::vector<Triplet> trip;
  trip.reserve(2 * M.nonZeros() + A_eps.nonZeros() + A_mu.nonZeros() + Jb.nonZeros());
  detail::append_scaled_block(trip, M, 0, 0, 1.0);
  detail::append_scaled_block(trip, A_mu, 0, n, 0.5 * dt);
  detail::append_scaled_block(trip, A_eps, n, 0, 0.5);
  detail::append_scaled_block(trip, Jb, n, 0, 1.0);
  detail::append_scaled_block(trip, M, n, n, -0.5);
  SparseMat J(2 * n, 2 * n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

inline SparseMat avf_jacobian(const DgSpace& space, const Potential& potential, const SparseMat& M,
                              const SparseMat& A_eps, const SparseMat& A_mu, const Vec& xi_n,
                              const Vec& xi_next, double dt, int tau_points) {
  auto [b_avg, Jb] = assemble_avf_nonlinear(space, potential, xi_n, xi_next, tau_points);
  return avf_jacobian_from(M, A_eps, A_mu, Jb, dt);
}

class AvfIntegrator {
 public:
  AvfIntegrator(const DgSpace& space, const Model& model, NewtonSettings settings = {})
      : space_(&space), model_(&model), settings_(settings) {
    if (!(settings.tol > 0)) throw std::invalid_argument("AvfIntegrator: tol must be positive");
    if (settings.max_iter < 1)
      throw std::invalid_argument("AvfIntegrator: max_iter must be at least 1");
    if (settings.tau_points < 2 || settings.tau_points > 5)
      throw std::invalid_argument("AvfIntegrator: tau_points must be in 2..5");
    M_ = assemble_mass(space);
    mass_diag_ = M_.diagonal();
    A_eps_ = assemble_stiffness(space, CoefficientField::constant(model.epsilon * model.epsilon));
    if (model.mobility.kind == MobilityKind::constant)
      A_mu_const_ = assemble_stiffness(space, CoefficientField::constant(model.mobility.beta));
  }

  const DgSpace& space() const { return *space_; }
  const Model& model() const { return *model_; }
  const NewtonSettings& settings() const { return settings_; }
  const SparseMat& mass() const { return M_; }
  const SparseMat& stiffness_eps() const { return A_eps_; }

  SparseMat mobility_stiffness(const Vec& xi) const {
    if (A_mu_const_) return *A_mu_const_;
    return assemble_stiffness(*space_, CoefficientField::lagged_mobility(model_->mobility, xi));
  }

  // zeta_0 from M zeta_0 = A_eps xi_0 + b(xi_0), so the algebraic constraint
  // holds at t_0 (the mass matrix is diagonal with this basis)
  StateVector initialize(const Vec& xi0, double t0 = 0) const {
    if (xi0.size() != space_->n_dof())
      throw std::invalid_argument("AvfIntegrator::initialize: coefficient vector length mismatch");
    StateVector s;
    s.xi = xi0;
    Vec rhs = A_eps_ * xi0 + assemble_nonlinear(*space_, model_->potential, xi0);
    s.zeta = rhs.cwiseQuotient(mass_diag_);
    s.t = t0;
    return s;
  }

  StepStats step(StateVector& state, double dt) {
    if (!(dt > 0) || !std::isfinite(dt))
      throw std::invalid_argument("AvfIntegrator::step: dt must be positive and finite");
    const int n = space_->n_dof();
    if (state.xi.size() != n || state.zeta.size() != n)
      throw std::invalid_argument("AvfIntegrator::step: state vector length mismatch");
    const Potential& pot = model_->potential;
    const std::uint64_t clamps_before = pot.clamp_count();

    // the mobility is lagged at the step's base state, so one matrix serves
    // every solve of this step including the continuation guesses
    SparseMat A_mu = mobility_stiffness(state.xi);

    StepStats stats;
    NewtonOutcome out = newton_solve_(state, dt, A_mu, state.xi, state.zeta, stats);
    const double near = kJumpFactor * (1.0 + std::sqrt(state.xi.dot(M_ * state.xi)));
    if (!out.converged || out.jump > near) {
      // the implicit system can lose uniqueness for coarse steps and plain
      // Newton then wanders between roots; follow the dt -> 0 continuation
      // branch instead, reusing roots of the same system at reduced step
      // sizes (same base state) as initial guesses
      out = continuation_solve_(state, dt, A_mu, stats);
      if (!out.converged)
        throw std::runtime_error(
            detail::step_error(out.reason, state.t, stats.newton_iters, out.residual));
    }
    stats.residual_norm = out.residual;
    stats.clamp_events = pot.clamp_count() - clamps_before;
    state.xi = std::move(out.xi);
    state.zeta = std::move(out.zeta);
    state.t += dt;
    return stats;
  }

 private:
  struct NewtonOutcome {
    bool converged = false;
    Vec xi, zeta;
    double residual = 0;
    double jump = 0;  // L2 distance of the root from the base state
    const char* reason = "";
  };

  // transient residual overshoots of many orders are normal for the cubic
  // nonlinearity and contract on their own; the guard only cuts off hopeless
  // flailing near overflow
  static constexpr double kWanderFactor = 1e12;
  // a root below this L2 distance from the base state (relative to the
  // solution scale) is physical regardless of how it was found
  static constexpr double kJumpFactor = 1.0;
  // along the continuation branch the root distance from the base state
  // grows about linearly in the step size; spurious roots violate this
  static constexpr double kBranchGrowth = 2.0;
  static constexpr double kMinStride = 1.0 / 16384.0;  // of the full step
  static constexpr int kMaxContinuationSolves = 96;

  // demanded residual reduction per iteration while running on kept factors;
  // anything slower triggers a fresh factorization at the current iterate
  static constexpr double kChordContraction = 0.2;
  // within this many decades of the tolerance, slow-but-monotone kept-factor
  // iterations are cheaper than refactoring, so only a genuine stall refreshes
  static constexpr double kChordEndgame = 1e4;
  static constexpr double kChordStall = 0.9;
  // a kept-factor move that inflates the residual this much is rolled back
  static constexpr double kChordBlowup = 10.0;

  // full-step Newton on the AVF system with base state (s.xi, s.zeta) and
  // step dt, started from (xi_g, zeta_g). Backtracking is used only to
  // recover from non-finite trial residuals: monotone damping provably
  // stalls at local minima of |R| where the Jacobian degenerates. Jacobian
  // factors are kept across iterations and steps while they contract the
  // residual fast enough; the recovery of the first unknown block inside
  // SchurStepSolver::solve always uses the current system, so R1 (linear in
  // the unknowns) is nulled to componentwise roundoff by the final full
  // step; that is what makes the per-step mass balance exact.
  NewtonOutcome newton_solve_(const StateVector& s, double dt, const SparseMat& A_mu,
                              const Vec& xi_g, const Vec& zeta_g, StepStats& stats) const {
    const int n = space_->n_dof();
    const Potential& pot = model_->potential;
    Vec load_avg = Vec::Zero(n);
    if (model_->has_source()) {
      auto [tau, tau_w] = gauss_legendre_01(settings_.tau_points);
      for (int k = 0; k < settings_.tau_points; ++k)
        load_avg +=
            tau_w(k) * assemble_load(*space_, *model_->preset, model_->epsilon, s.t + tau(k) * dt);
    }
    auto residual_at = [&](const Vec& xi_t, const Vec& zeta_t) {
      Vec b = assemble_avf_b(*space_, pot, s.xi, xi_t, settings_.tau_points);
      return detail::avf_residual_with(M_, A_eps_, A_mu, s.xi, s.zeta, xi_t, zeta_t, dt, load_avg,
                                       b);
    };

    NewtonOutcome out;
    out.xi = xi_g;
    out.zeta = zeta_g;
    Vec R = residual_at(out.xi, out.zeta);
    double res = R.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(res)) {
      out.reason = "non-finite residual at initial guess";
      return out;
    }
    const double wander_limit = kWanderFactor * std::max(res, 1.0);
    double last_alpha = 1.0;
    bool refactor = !lin_.ready();  // try kept factors first when they exist
    bool fresh = false;             // factors were built at the current iterate
    int iters = 0;
    while (!(res < settings_.tol && last_alpha == 1.0)) {
      out.residual = res;
      if (res > wander_limit) {
        out.reason = "Newton left the local basin";
        return out;
      }
      if (iters >= settings_.max_iter) {
        out.reason = "Newton stalled";
        return out;
      }
      if (refactor) {
        auto [b_here, Jb] =
            assemble_avf_nonlinear(*space_, pot, s.xi, out.xi, settings_.tau_points);
        if (!lin_.factorize(mass_diag_, A_eps_, Jb, A_mu, dt)) {
          lin_.invalidate();
          out.reason = "Jacobian factorization failed";
          return out;
        }
        ++stats.factorizations;
        refactor = false;
        fresh = true;
      }
      Vec delta = lin_.solve(R, A_mu, dt);
      double alpha = 1.0;
      Vec xi_new, zeta_new, R_new;
      double res_new = 0;
      for (int halvings = 0;; ++halvings) {
        Vec xi_try = out.xi - alpha * delta.head(n);
        Vec zeta_try = out.zeta - alpha * delta.tail(n);
        Vec R_try = residual_at(xi_try, zeta_try);
        double res_try = R_try.lpNorm<Eigen::Infinity>();
        if (std::isfinite(res_try)) {
          xi_new = std::move(xi_try);
          zeta_new = std::move(zeta_try);
          R_new = std::move(R_try);
          res_new = res_try;
          break;
        }
        if (halvings == 60) {
          out.reason = "line search failed";
          return out;
        }
        alpha *= 0.5;
      }
      ++iters;
      ++stats.newton_iters;
      if (!fresh && res_new > kChordBlowup * res) {
        refactor = true;  // kept factors misfired: retry this move with fresh ones
        continue;
      }
      out.xi = std::move(xi_new);
      out.zeta = std::move(zeta_new);
      R = std::move(R_new);
      const bool slow = res_new >= kChordContraction * res;
      const bool endgame = res_new < kChordEndgame * settings_.tol;
      const bool stall = res_new >= kChordStall * res;
      refactor = (slow && !endgame) || stall || alpha < 1.0;
      res = res_new;
      last_alpha = alpha;
      fresh = false;
    }
    Vec d = out.xi - s.xi;
    out.jump = std::sqrt(d.dot(M_ * d));
    out.converged = true;
    out.residual = res;
    return out;
  }

  // root of the full-step system reached by step-size continuation: walk the
  // substep fraction lam from 0 to 1, solving the base-state system at
  // lam * dt and chaining each accepted root into the next solve's guess.
  // The root distance from the base state grows about linearly in lam along
  // the physical branch, so each move is held to a proportional growth bound
  // (with an absolute floor at the solution scale); a rejected move halves
  // the stride instead of abandoning the branch. Only the root of the
  // full-step system is returned, so the scheme itself is unchanged.
  NewtonOutcome continuation_solve_(const StateVector& s, double dt, const SparseMat& A_mu,
                                    StepStats& stats) const {
    const double scale = kJumpFactor * (1.0 + std::sqrt(s.xi.dot(M_ * s.xi)));
    double lam = 0;
    double stride = 0.5;
    NewtonOutcome at;  // accepted root at lam * dt; starts as the base state
    at.xi = s.xi;
    at.zeta = s.zeta;
    NewtonOutcome fail;
    fail.reason = "continuation exhausted";
    for (int attempts = 0; stride >= kMinStride && attempts < kMaxContinuationSolves; ++attempts) {
      const double lam_try = std::min(lam + stride, 1.0);
      NewtonOutcome root = newton_solve_(s, lam_try * dt, A_mu, at.xi, at.zeta, stats);
      const double limit =
          lam > 0 ? std::max(kBranchGrowth * at.jump * (lam_try / lam), scale) : scale;
      if (root.converged && root.jump <= limit) {
        if (lam_try == 1.0) return root;
        lam = lam_try;
        at = std::move(root);
        stride = std::min(2 * stride, 1.0);
      } else {
        if (root.converged) root.reason = "root left the continuation branch";
        root.converged = false;
        fail = std::move(root);
        stride *= 0.5;
      }
    }
    return fail;
  }

  const DgSpace* space_;
  const Model* model_;
  NewtonSettings settings_;
  SparseMat M_, A_eps_;
  Vec mass_diag_;
  std::optional<SparseMat> A_mu_const_;
  mutable detail::SchurStepSolver lin_;  // kept factors; correctness never depends on them
};

struct TimeLoopOptions {
  double t_end = 1.0;
  double dt = 0;
  double t_start = 0;
  // throw if the source-free energy decrease or mass balance is violated
  bool check_invariants = false;
  int record_stride = 1;    // diagnostics row every this many steps (plus t_start and t_end)
  int snapshot_stride = 0;  // 0: only initial and final snapshots (if callback set)
  std::function<void(const StateVector&, int step)> snapshot_cb;
  std::function<void(const DiagnosticsRow&)> row_cb;  // fires as rows are recorded
};

struct TimeLoopResult {
  DiagnosticsSeries series;  // one row per step, including t_start
  StateVector state;
  int steps = 0;
};

// tolerated violations for the source-free invariant checks
inline constexpr double kEnergyIncreaseTol = 1e-9;   // relative to max(1, |E_0|)
inline constexpr double kMassDriftTol = 1e-10;       // relative to |m_0| + 1

inline TimeLoopResult run_time_loop(AvfIntegrator& integrator, const Vec& xi0,
                                    const TimeLoopOptions& opt) {
  if (!(opt.dt > 0) || !std::isfinite(opt.dt))
    throw std::invalid_argument("run_time_loop: dt must be positive and finite");
  if (!(opt.t_end >= opt.t_start))
    throw std::invalid_argument("run_time_loop: t_end must not precede t_start");
  if ((opt.t_end - opt.t_start) / opt.dt > 1e8)
    throw std::invalid_argument("run_time_loop: more than 1e8 steps requested");
  if (opt.record_stride < 1)
    throw std::invalid_argument("run_time_loop: record_stride must be at least 1");
  const bool source_free = !integrator.model().has_source();
  if (opt.check_invariants && !source_free)
    throw std::invalid_argument("run_time_loop: invariant checks require a source-free model");

  const DgSpace& space = integrator.space();
  const Model& model = integrator.model();

  TimeLoopResult out;
  const std::uint64_t clamps_init_before = model.potential.clamp_count();
  out.state = integrator.initialize(xi0, opt.t_start);
  const std::uint64_t init_clamps = model.potential.clamp_count() - clamps_init_before;

  auto record = [&](int iters, std::uint64_t clamps) {
    DiagnosticsRow row;
    row.t = out.state.t;
    row.energy = discrete_energy(space, model.epsilon, model.potential, out.state.xi);
    row.mass = total_mass(space, out.state.xi);
    row.newton_iters = iters;
    row.clamp_events = clamps;
    out.series.push_back(row);
    if (opt.row_cb) opt.row_cb(row);
    return row;
  };

  DiagnosticsRow row0 = record(0, init_clamps);
  if (opt.snapshot_cb) opt.snapshot_cb(out.state, 0);

  const double mass0 = row0.mass;
  const double energy_slack = kEnergyIncreaseTol * std::max(1.0, std::abs(row0.energy));
  const double mass_slack = kMassDriftTol * (std::abs(mass0) + 1.0);
  double energy_prev = row0.energy;

  const double tiny = 1e-9 * opt.dt;
  int step = 0;
  int window_iters = 0;            // Newton iterations since the last recorded row
  std::uint64_t window_clamps = 0; // clamp events since the last recorded row
  while (out.state.t < opt.t_end - tiny) {
    const bool last = out.state.t + opt.dt >= opt.t_end - tiny;
    const double h = last ? opt.t_end - out.state.t : opt.dt;
    StepStats stats = integrator.step(out.state, h);
    if (last) out.state.t = opt.t_end;
    ++step;
    window_iters += stats.newton_iters;
    window_clamps += stats.clamp_events;

    if (last || step % opt.record_stride == 0) {
      DiagnosticsRow row = record(window_iters, window_clamps);
      window_iters = 0;
      window_clamps = 0;
      if (opt.check_invariants) {
        if (row.energy > energy_prev + energy_slack)
          throw std::runtime_error("run_time_loop: energy increased at t=" + std::to_string(row.t) +
                                   " (" + std::to_string(energy_prev) + " -> " +
                                   std::to_string(row.energy) + ")");
        if (std::abs(row.mass - mass0) > mass_slack)
          throw std::runtime_error("run_time_loop: mass drifted at t=" + std::to_string(row.t) +
                                   " by " + std::to_string(row.mass - mass0));
      }
      energy_prev = row.energy;
    }

    if (opt.snapshot_cb && (last || (opt.snapshot_stride > 0 && step % opt.snapshot_stride == 0)))
      opt.snapshot_cb(out.state, step);
  }
  out.steps = step;
  return out;
}

}  // namespace chdg
