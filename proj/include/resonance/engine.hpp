#pragma once

// Damped fixed-point iteration of the Lyapunov-Schmidt map: the kernel
// coefficients xi are updated from the projected equation while the
// complement part U is recomputed by an exact resonant resolvent solve.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "anderson.hpp"
#include "canonical.hpp"
#include "conditions.hpp"
#include "errors.hpp"
#include "nonlinearity.hpp"
#include "problem.hpp"
#include "solvability.hpp"
#include "spectral.hpp"

namespace resonance {

enum class Accel { none, anderson };

inline std::string to_string(Accel a) { return a == Accel::none ? "none" : "anderson"; }

inline std::optional<Accel> parse_accel(const std::string& s) {
  if (s == "none") return Accel::none;
  if (s == "anderson") return Accel::anderson;
  return std::nullopt;
}

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 500;
  double relax = 0.5;
  Accel accel = Accel::anderson;
  int depth = 5;
  bool gate = false;
  double divergence_bound = 1e6;
  std::optional<Eigen::VectorXd> init;  ///< warm start (full state vector); zero otherwise

  void validate() const {
    if (!(tol > 0.0)) throw ConfigurationError("tol must be > 0");
    if (max_iter < 1) throw ConfigurationError("max_iter must be >= 1");
    if (!(relax > 0.0 && relax <= 1.0)) throw ConfigurationError("relax must lie in (0, 1]");
    if (depth < 1) throw ConfigurationError("Anderson depth must be >= 1");
  }
};

enum class SolveStatus { converged, max_iter, diverged, condition_violated };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::condition_violated: return "condition_violated";
  }
  return "?";
}

struct IterationRecord {
  Eigen::VectorXd xi;
  double dxi = 0.0;
  double dU = 0.0;
  double residual = 0.0;
};

/// Kernel coefficients, complement part and history of an iteration.
struct LSState {
  Eigen::VectorXd xi;
  std::vector<Field> U;
  int iteration = 0;
  std::vector<IterationRecord> history;
};

struct SolveReport {
  SolveStatus status = SolveStatus::max_iter;
  std::vector<Field> solution;  ///< u, or (u, v) for systems
  double residual_l2 = std::numeric_limits<double>::quiet_NaN();
  double residual_sup = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::vector<ConditionReport> conditions;
  LSState state;
  std::optional<CanonicalForm> canonical;
  std::optional<SystemClass> classification;
  std::string stop_reason;
  std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// Generic driver

struct MapValue {
  Eigen::VectorXd image;  ///< T(z)
  double residual = 0.0;  ///< equation residual at z (L2)
};

struct DriverResult {
  SolveStatus status = SolveStatus::max_iter;
  Eigen::VectorXd z;
  int iterations = 0;
  std::string reason;
  std::vector<IterationRecord> trace;
};

inline constexpr int drift_burn_in = 20;
inline constexpr int drift_window = 50;

/// True when |xi| grew strictly over the last `drift_window` steps after the
/// burn-in without the increments or the residual decaying: the iterate is
/// running away rather than converging slowly.
inline bool drifting(const std::vector<IterationRecord>& trace) {
  const std::size_t n = trace.size();
  if (n < static_cast<std::size_t>(drift_burn_in + drift_window + 1)) return false;
  const std::size_t first = n - drift_window - 1;
  for (std::size_t i = first + 1; i < n; ++i)
    if (!(trace[i].xi.norm() > trace[i - 1].xi.norm())) return false;
  const double inc_first = trace[first + 1].xi.norm() - trace[first].xi.norm();
  const double inc_last = trace[n - 1].xi.norm() - trace[n - 2].xi.norm();
  return inc_last >= 0.5 * inc_first && trace[n - 1].residual >= 0.5 * trace[first].residual;
}

/// Damped (optionally Anderson-accelerated) iteration z <- z + w (T(z) - z).
/// `is_xi` marks the kernel entries of z; the rest is the complement part.
template <class Eval>
DriverResult run_fixed_point(Eigen::VectorXd z, const std::vector<bool>& is_xi, const Eval& eval,
                             const SolveOptions& opts) {
  opts.validate();
  DriverResult out;
  AndersonMixer mixer(opts.accel == Accel::anderson ? opts.depth : 0, opts.relax);
  std::optional<Eigen::VectorXd> prev;
  double min_res = std::numeric_limits<double>::infinity();
  auto split = [&](const Eigen::VectorXd& v) {
    Eigen::Index m = 0;
    for (bool b : is_xi) m += b;
    Eigen::VectorXd xi(m);
    double rest = 0.0;
    Eigen::Index j = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (is_xi[static_cast<std::size_t>(i)])
        xi(j++) = v(i);
      else
        rest += v(i) * v(i);
    }
    return std::pair{xi, std::sqrt(rest)};
  };

  for (int it = 0;; ++it) {
    out.z = z;
    out.iterations = it;
    MapValue mv;
    try {
      mv = eval(z);
    } catch (const EvaluationError& e) {
      out.status = SolveStatus::diverged;
      out.reason = std::string("non-finite evaluation: ") + e.what();
      return out;
    }
    IterationRecord rec;
    rec.xi = split(z).first;
    rec.residual = mv.residual;
    if (prev) {
      const auto [dxi, dU] = split(z - *prev);
      rec.dxi = dxi.norm();
      rec.dU = dU;
    }
    out.trace.push_back(rec);

    if (!std::isfinite(mv.residual) || !mv.image.allFinite()) {
      out.status = SolveStatus::diverged;
      out.reason = "non-finite iterate";
      return out;
    }
    if (mv.residual <= opts.tol) {
      out.status = SolveStatus::converged;
      out.reason = "residual below tolerance";
      return out;
    }
    if (rec.xi.norm() > opts.divergence_bound) {
      out.status = SolveStatus::diverged;
      out.reason = "|xi| exceeded divergence bound";
      return out;
    }
    min_res = std::min(min_res, mv.residual);
    if (mv.residual > 1e3 * min_res) {
      out.status = SolveStatus::diverged;
      out.reason = "residual grew 1e3x above its minimum";
      return out;
    }
    if (drifting(out.trace)) {
      out.status = SolveStatus::diverged;
      out.reason = "monotone drift of xi";
      return out;
    }
    if (it == opts.max_iter) {
      out.status = SolveStatus::max_iter;
      out.reason = "iteration limit reached";
      return out;
    }
    prev = z;
    z = mixer.step(z, mv.image - z);
  }
}

// ---------------------------------------------------------------------------
// Resonant group problems:  Laplace u + lambda u + N(u) = f

/// Nonlinear term N(u) in coefficients for a scalar family.
using NonlinearTerm = std::function<Eigen::VectorXd(const Field&)>;

inline NonlinearTerm scalar_term(const ProblemSpec& p, const SpectralBasis& basis) {
  const Nonlinearity g = *p.g;
  if (p.family == Family::periodic_damped)
    return [&basis, g](const Field& u) {
      return apply_with_derivative(basis, [&g](double x, double dx) { return g(x) * dx; }, u).coeffs;
    };
  return [&basis, g](const Field& u) { return apply_pointwise(basis, g, u).coeffs; };
}

/// Residual coefficients of  Laplace u + lambda u + N(u) - f.
inline Eigen::VectorXd group_residual(const SpectralBasis& basis, double lambda, const Eigen::VectorXd& f,
                                      const NonlinearTerm& N, const Eigen::VectorXd& u) {
  return apply_shifted_laplacian(basis, lambda, u) + N(synthesize(basis, u)) - f;
}

/// Iterates the map T for a resonant group: complement by the resonant
/// resolvent, kernel by xi <- eta + (A - <N(u), phi>) (relaxed). With
/// `orthogonal_forcing` the kernel update uses A = 0.
inline SolveReport solve_group(const SpectralBasis& basis, std::size_t group_index, const Eigen::VectorXd& f,
                               const NonlinearTerm& N, const SolveOptions& opts, bool orthogonal_forcing = false) {
  const EigenGroup& grp = basis.group(group_index);
  const double lambda = grp.value;
  const Eigen::Index n = basis.size();
  std::vector<bool> is_xi(static_cast<std::size_t>(n), false);
  for (std::size_t i : grp.members) is_xi[i] = true;

  Eigen::VectorXd A = Eigen::VectorXd::Zero(n);
  if (!orthogonal_forcing)
    for (std::size_t i : grp.members) A(static_cast<Eigen::Index>(i)) = f(static_cast<Eigen::Index>(i));

  auto eval = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd gn = N(synthesize(basis, z));
    MapValue mv;
    mv.residual = (apply_shifted_laplacian(basis, lambda, z) + gn - f).norm();
    Eigen::VectorXd rhs = f - gn;
    remove_group(rhs, grp);
    mv.image = resolvent_coeffs(basis, lambda, rhs, group_index);
    for (std::size_t i : grp.members) {
      const auto j = static_cast<Eigen::Index>(i);
      mv.image(j) = z(j) + A(j) - gn(j);
    }
    return mv;
  };

  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(n);
  if (opts.init) {
    if (opts.init->size() != n) throw DimensionError("initial state does not match basis");
    z0 = *opts.init;
  }
  DriverResult d = run_fixed_point(z0, is_xi, eval, opts);

  SolveReport r;
  r.status = d.status;
  r.iterations = d.iterations;
  r.stop_reason = d.reason;
  const Field u = synthesize(basis, d.z);
  r.solution = {u};
  r.state.iteration = d.iterations;
  r.state.xi.resize(static_cast<Eigen::Index>(grp.size()));
  for (std::size_t i = 0; i < grp.size(); ++i)
    r.state.xi(static_cast<Eigen::Index>(i)) = d.z(static_cast<Eigen::Index>(grp.members[i]));
  Eigen::VectorXd rest = d.z;
  remove_group(rest, grp);
  r.state.U = {synthesize(basis, rest)};
  r.state.history = std::move(d.trace);
  if (d.status != SolveStatus::diverged || d.z.allFinite()) {
    try {
      const Field res = synthesize(basis, group_residual(basis, lambda, f, N, d.z));
      r.residual_l2 = l2_norm(res);
      r.residual_sup = sup_norm(res);
    } catch (const EvaluationError&) {
    }
  }
  return r;
}

/// Runs the family's condition checks and applies the gating policy.
/// Returns true when the solve should stop with condition_violated.
inline bool attach_conditions(const ProblemSpec& p, const SolveOptions& opts, SolveReport& r) {
  r.conditions = check_problem(p);
  if (opts.gate && !conditions_permit(r.conditions)) {
    r.status = SolveStatus::condition_violated;
    r.stop_reason = "solvability condition does not hold (gated)";
    return true;
  }
  if (!conditions_permit(r.conditions))
    r.notes.push_back("condition does not hold; iterating ungated, non-convergence is expected");
  return false;
}

inline SolveReport solve_resonant_family(const ProblemSpec& p, const SolveOptions& opts) {
  SolveReport pre;
  if (attach_conditions(p, opts, pre)) return pre;
  const SpectralBasis basis = p.basis();
  const std::size_t grp = basis.group_for_index(p.resonant_index());
  const NonlinearTerm N = scalar_term(p, basis);
  SolveReport r = solve_group(basis, grp, p.forcing.vector(basis), N, opts, p.family == Family::periodic_FN);
  r.conditions = std::move(pre.conditions);
  r.notes.insert(r.notes.begin(), pre.notes.begin(), pre.notes.end());
  if (r.status != SolveStatus::converged)
    r.notes.push_back("no convergence; this does not show that no solution exists");
  return r;
}

inline SolveReport solve_scalar_resonant(const ProblemSpec& p, const SolveOptions& opts) {
  if (p.family != Family::scalar_resonant) throw SpecificationError("expected family scalar_resonant");
  return solve_resonant_family(p, opts);
}

inline SolveReport solve_multi_resonant(const ProblemSpec& p, const SolveOptions& opts) {
  if (p.family != Family::scalar_multi) throw SpecificationError("expected family scalar_multi");
  return solve_resonant_family(p, opts);
}

inline SolveReport solve_periodic(const ProblemSpec& p, const SolveOptions& opts) {
  if (!is_periodic(p.family)) throw SpecificationError("expected a periodic family");
  return solve_resonant_family(p, opts);
}

}  // namespace resonance
