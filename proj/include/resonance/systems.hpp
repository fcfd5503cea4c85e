#pragma once

// 2x2 systems  Laplace (u,v) + A (u,v) + (f,g)(u,v) = (h,k). Linear blocks are
// solved mode by mode; resonant systems are iterated in canonical coordinates
// w = Q^-1 (u,v), where the coupling is diagonal or a Jordan block.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canonical.hpp"
#include "conditions.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "problem.hpp"
#include "spectral.hpp"

namespace resonance {

struct FieldPair {
  Field u;
  Field v;
};

namespace detail {

inline double det_tol(const Eigen::Matrix2d& M) { return 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff() * M.cwiseAbs().maxCoeff()); }

inline Eigen::VectorXd combine(double a, const Eigen::VectorXd& x, double b, const Eigen::VectorXd& y) {
  return a * x + b * y;
}

/// Mode-wise Cramer solve of (A - lambda_n I)(u_n, v_n) = (f_n, g_n); nullopt
/// when some block is singular.
inline std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> direct_blocks(const SpectralBasis& basis,
                                                                                const Eigen::Matrix2d& A,
                                                                                const Eigen::VectorXd& f,
                                                                                const Eigen::VectorXd& g) {
  Eigen::VectorXd u(f.size()), v(f.size());
  const auto modes = basis.modes();
  for (Eigen::Index n = 0; n < f.size(); ++n) {
    const double ln = modes[static_cast<std::size_t>(n)].eigenvalue;
    const double a = A(0, 0) - ln, b = A(0, 1), c = A(1, 0), d = A(1, 1) - ln;
    const double det = a * d - b * c;
    Eigen::Matrix2d blk;
    blk << a, b, c, d;
    if (std::abs(det) <= det_tol(blk)) return std::nullopt;
    u(n) = (d * f(n) - b * g(n)) / det;
    v(n) = (a * g(n) - c * f(n)) / det;
  }
  return std::pair{u, v};
}

/// Mode-wise solve of the canonical system (J - lambda_n I) w_n = F_n with the
/// Fredholm selection (zero kernel component) on resonant modes.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> canonical_blocks(const SpectralBasis& basis,
                                                                    const CanonicalForm& form,
                                                                    const Eigen::VectorXd& F1,
                                                                    const Eigen::VectorXd& F2) {
  const double tol = ortho_rel_tol * std::sqrt(F1.squaredNorm() + F2.squaredNorm());
  Eigen::VectorXd w1(F1.size()), w2(F2.size());
  const auto modes = basis.modes();
  auto check = [&](Eigen::Index n, const char* comp, double value) {
    if (std::abs(value) > tol) throw ResonantModeNonOrthogonal(static_cast<std::size_t>(n), comp, value);
  };
  for (Eigen::Index n = 0; n < F1.size(); ++n) {
    const double ln = modes[static_cast<std::size_t>(n)].eigenvalue;
    if (form.kind == CanonicalForm::Kind::diagonal) {
      const double s1 = form.mu1 - ln, s2 = form.mu2 - ln;
      if (std::abs(s1) < group_tol) {
        check(n, "u", F1(n));
        w1(n) = 0.0;
      } else {
        w1(n) = F1(n) / s1;
      }
      if (std::abs(s2) < group_tol) {
        check(n, "v", F2(n));
        w2(n) = 0.0;
      } else {
        w2(n) = F2(n) / s2;
      }
    } else {
      const double s = form.mu1 - ln;
      if (std::abs(s) < group_tol) {
        // Second equation first: v is selected orthogonal to the kernel,
        // after which the first equation needs F1 orthogonal as well.
        check(n, "v", F2(n));
        check(n, "u", F1(n));
        w1(n) = w2(n) = 0.0;
      } else {
        w2(n) = F2(n) / s;
        w1(n) = (F1(n) - w2(n)) / s;
      }
    }
  }
  return {w1, w2};
}

}  // namespace detail

/// Solves  Laplace (u,v) + A (u,v) = (f,g). Mode-wise 2x2 solves when every
/// block is invertible; otherwise in canonical coordinates with the Fredholm
/// selection on the resonant modes.
inline FieldPair solve_linear_system(const SpectralBasis& basis, const CouplingMatrix& A, const Field& f,
                                     const Field& g) {
  if (f.coeffs.size() != basis.size() || g.coeffs.size() != basis.size())
    throw DimensionError("forcings do not match basis");
  const Eigen::Matrix2d M = to_matrix(A);
  if (auto direct = detail::direct_blocks(basis, M, f.coeffs, g.coeffs))
    return {synthesize(basis, direct->first), synthesize(basis, direct->second)};
  const CanonicalForm form = canonical_reduce(A);
  const Eigen::VectorXd F1 = detail::combine(form.Q_inv(0, 0), f.coeffs, form.Q_inv(0, 1), g.coeffs);
  const Eigen::VectorXd F2 = detail::combine(form.Q_inv(1, 0), f.coeffs, form.Q_inv(1, 1), g.coeffs);
  const auto [w1, w2] = detail::canonical_blocks(basis, form, F1, F2);
  return {synthesize(basis, detail::combine(form.Q(0, 0), w1, form.Q(0, 1), w2)),
          synthesize(basis, detail::combine(form.Q(1, 0), w1, form.Q(1, 1), w2))};
}

/// Same solve forced through the canonical route (for equivariance checks).
inline FieldPair solve_linear_system_canonical(const SpectralBasis& basis, const CouplingMatrix& A,
                                               const Field& f, const Field& g) {
  const CanonicalForm form = canonical_reduce(A);
  const Eigen::VectorXd F1 = detail::combine(form.Q_inv(0, 0), f.coeffs, form.Q_inv(0, 1), g.coeffs);
  const Eigen::VectorXd F2 = detail::combine(form.Q_inv(1, 0), f.coeffs, form.Q_inv(1, 1), g.coeffs);
  const auto [w1, w2] = detail::canonical_blocks(basis, form, F1, F2);
  return {synthesize(basis, detail::combine(form.Q(0, 0), w1, form.Q(0, 1), w2)),
          synthesize(basis, detail::combine(form.Q(1, 0), w1, form.Q(1, 1), w2))};
}

// ---------------------------------------------------------------------------
// Residuals

/// Nonlinear terms (f(u,v), g(u,v)) in coefficients.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> pair_terms(const SpectralBasis& basis,
                                                              const PairNonlinearity& f,
                                                              const PairNonlinearity& g, const Field& u,
                                                              const Field& v) {
  return {apply_pointwise(basis, f, u, v).coeffs, apply_pointwise(basis, g, u, v).coeffs};
}

/// Residual coefficients of both equations in original coordinates.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> system_residual_coeffs(const ProblemSpec& p,
                                                                          const SpectralBasis& basis,
                                                                          const Eigen::VectorXd& u,
                                                                          const Eigen::VectorXd& v) {
  const CouplingMatrix& A = *p.matrix;
  Eigen::VectorXd r1 = apply_shifted_laplacian(basis, A.a, u) + A.b * v - p.forcing_h.vector(basis);
  Eigen::VectorXd r2 = A.c * u + apply_shifted_laplacian(basis, A.d, v) - p.forcing_k.vector(basis);
  if (p.f_uv && p.g_uv) {
    const auto [fn, gn] = pair_terms(basis, *p.f_uv, *p.g_uv, synthesize(basis, u), synthesize(basis, v));
    r1 += fn;
    r2 += gn;
  }
  return {r1, r2};
}

// ---------------------------------------------------------------------------
// Nonlinear systems

namespace detail {

inline void fill_report(SolveReport& r, const ProblemSpec& p, const SpectralBasis& basis, DriverResult& d,
                        const Eigen::Matrix2d& Q, const std::vector<bool>& is_xi) {
  const Eigen::Index n = basis.size();
  const Eigen::VectorXd w1 = d.z.head(n), w2 = d.z.tail(n);
  const Eigen::VectorXd u = Q(0, 0) * w1 + Q(0, 1) * w2;
  const Eigen::VectorXd v = Q(1, 0) * w1 + Q(1, 1) * w2;
  r.status = d.status;
  r.iterations = d.iterations;
  r.stop_reason = d.reason;
  r.solution = {synthesize(basis, u), synthesize(basis, v)};
  std::vector<double> xi;
  Eigen::VectorXd U1 = w1, U2 = w2;
  for (Eigen::Index i = 0; i < 2 * n; ++i)
    if (is_xi[static_cast<std::size_t>(i)]) {
      xi.push_back(d.z(i));
      (i < n ? U1(i) : U2(i - n)) = 0.0;
    }
  r.state.xi = Eigen::Map<Eigen::VectorXd>(xi.data(), static_cast<Eigen::Index>(xi.size()));
  r.state.U = {synthesize(basis, U1), synthesize(basis, U2)};
  r.state.iteration = d.iterations;
  r.state.history = std::move(d.trace);
  try {
    const auto [r1, r2] = system_residual_coeffs(p, basis, u, v);
    r.residual_l2 = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
    r.residual_sup = std::max(sup_norm(synthesize(basis, r1)), sup_norm(synthesize(basis, r2)));
  } catch (const EvaluationError&) {
  }
}

inline SystemClass classify_or_nonresonant(const ProblemSpec& p, const SpectralBasis& basis,
                                           std::optional<CanonicalForm>& form) {
  try {
    form = canonical_reduce(*p.matrix);
  } catch (const UnsupportedError&) {
    // Complex spectrum: no real eigenvalue can meet the Dirichlet spectrum.
    if (p.family == Family::system_linear || p.family == Family::system_nonresonant) return {};
    throw;
  }
  return classify_system(*form, basis);
}

inline void require_family_match(const ProblemSpec& p, const SystemClass& cls) {
  const Family expected = [&] {
    switch (cls.kind) {
      case SystemClass::Case::nonresonant: return Family::system_nonresonant;
      case SystemClass::Case::case_A: return Family::system_case_A;
      case SystemClass::Case::case_B: return Family::system_case_B;
      case SystemClass::Case::case_C: return Family::system_case_C;
    }
    return Family::system_nonresonant;
  }();
  if (p.family != Family::system_linear && p.family != expected)
    throw SpecificationError("coupling matrix classifies as " + describe(cls) + " but family is " +
                             to_string(p.family));
}

}  // namespace detail

/// Damped Picard on (w, z) -> solve_linear_system(A, h - f(w,z), k - g(w,z)).
inline SolveReport solve_system_nonresonant(const ProblemSpec& p, const SolveOptions& opts) {
  const SpectralBasis basis = p.basis();
  SolveReport r;
  std::optional<CanonicalForm> form;
  const SystemClass cls = detail::classify_or_nonresonant(p, basis, form);
  detail::require_family_match(p, cls);
  if (cls.kind != SystemClass::Case::nonresonant) throw SpecificationError("system is resonant");
  r.canonical = form;
  r.classification = cls;
  if (attach_conditions(p, opts, r)) return r;

  const Eigen::Index n = basis.size();
  const Eigen::Matrix2d A = to_matrix(*p.matrix);
  const Eigen::VectorXd h = p.forcing_h.vector(basis), k = p.forcing_k.vector(basis);
  const PairNonlinearity f = p.f_uv.value_or(PairNonlinearity::zero());
  const PairNonlinearity g = p.g_uv.value_or(PairNonlinearity::zero());

  auto eval = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd u = z.head(n), v = z.tail(n);
    const auto [fn, gn] = pair_terms(basis, f, g, synthesize(basis, u), synthesize(basis, v));
    const Eigen::VectorXd r1 = apply_shifted_laplacian(basis, A(0, 0), u) + A(0, 1) * v + fn - h;
    const Eigen::VectorXd r2 = A(1, 0) * u + apply_shifted_laplacian(basis, A(1, 1), v) + gn - k;
    MapValue mv;
    mv.residual = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
    const auto blocks = detail::direct_blocks(basis, A, h - fn, k - gn);
    if (!blocks) throw ConfigurationError("singular block in a nonresonant system");
    mv.image.resize(2 * n);
    mv.image << blocks->first, blocks->second;
    return mv;
  };
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(2 * n);
  if (opts.init) {
    if (opts.init->size() != 2 * n) throw DimensionError("initial state does not match system size");
    z0 = *opts.init;
  }
  const std::vector<bool> is_xi(static_cast<std::size_t>(2 * n), false);
  DriverResult d = run_fixed_point(z0, is_xi, eval, opts);
  const auto conditions = std::move(r.conditions);
  detail::fill_report(r, p, basis, d, Eigen::Matrix2d::Identity(), is_xi);
  r.conditions = conditions;
  return r;
}

/// Resonant cases in canonical coordinates w = Q^-1 (u, v):
///  case A / B: kernel coefficient(s) updated by xi <- alpha + A_k - <f~, phi_k>;
///  case C (Jordan): V first, then U from rhs1 - V; xi <- alpha + B_k - <g~, phi_k>,
///  eta <- A_k - <f~, phi_k> (assigned, not incremented).
inline SolveReport solve_system_resonant(const ProblemSpec& p, const SolveOptions& opts) {
  const SpectralBasis basis = p.basis();
  SolveReport r;
  std::optional<CanonicalForm> maybe_form;
  const SystemClass cls = detail::classify_or_nonresonant(p, basis, maybe_form);
  detail::require_family_match(p, cls);
  if (cls.kind == SystemClass::Case::nonresonant) throw SpecificationError("system is nonresonant");
  const CanonicalForm form = *maybe_form;
  r.canonical = form;
  r.classification = cls;
  if (!form.identity_transform())
    r.notes.push_back("solving in canonical coordinates; thresholds were taken as declared for them");
  if (attach_conditions(p, opts, r)) return r;

  const Eigen::Index n = basis.size();
  const Eigen::Matrix2d& Q = form.Q;
  const Eigen::Matrix2d& Qi = form.Q_inv;
  const auto [H1, H2] = detail::canonical_forcings(p, basis, form);
  const PairNonlinearity& f = *p.f_uv;
  const PairNonlinearity& g = *p.g_uv;

  // Kernel mode of each canonical component (if resonant).
  std::optional<Eigen::Index> kern1, kern2;
  auto mode_of = [&](int index) {
    return static_cast<Eigen::Index>(basis.group(basis.group_for_index(index)).members.front());
  };
  switch (cls.kind) {
    case SystemClass::Case::case_A: (cls.resonant_component == 0 ? kern1 : kern2) = mode_of(cls.k); break;
    case SystemClass::Case::case_B:
      kern1 = mode_of(cls.k);
      kern2 = mode_of(cls.m);
      break;
    case SystemClass::Case::case_C: kern1 = kern2 = mode_of(cls.k); break;
    case SystemClass::Case::nonresonant: break;
  }
  std::vector<bool> is_xi(static_cast<std::size_t>(2 * n), false);
  if (kern1) is_xi[static_cast<std::size_t>(*kern1)] = true;
  if (kern2) is_xi[static_cast<std::size_t>(n + *kern2)] = true;

  const auto modes = basis.modes();
  const bool jordan = form.kind == CanonicalForm::Kind::jordan;

  auto eval = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd w1 = z.head(n), w2 = z.tail(n);
    const Field u = synthesize(basis, Q(0, 0) * w1 + Q(0, 1) * w2);
    const Field v = synthesize(basis, Q(1, 0) * w1 + Q(1, 1) * w2);
    const auto [fn, gn] = pair_terms(basis, f, g, u, v);
    const Eigen::VectorXd F1 = Qi(0, 0) * fn + Qi(0, 1) * gn;
    const Eigen::VectorXd F2 = Qi(1, 0) * fn + Qi(1, 1) * gn;

    // Canonical residual, reported in original coordinates.
    Eigen::VectorXd R1 = apply_shifted_laplacian(basis, form.mu1, w1) + F1 - H1;
    Eigen::VectorXd R2 = apply_shifted_laplacian(basis, form.mu2, w2) + F2 - H2;
    if (jordan) R1 += w2;
    MapValue mv;
    mv.residual = std::sqrt((Q(0, 0) * R1 + Q(0, 1) * R2).squaredNorm() + (Q(1, 0) * R1 + Q(1, 1) * R2).squaredNorm());

    Eigen::VectorXd n1(n), n2(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double ln = modes[static_cast<std::size_t>(j)].eigenvalue;
      if (jordan) {
        if (j == *kern1) {
          n1(j) = w1(j) + H2(j) - F2(j);
          n2(j) = H1(j) - F1(j);
        } else {
          n2(j) = (H2(j) - F2(j)) / (form.mu1 - ln);
          n1(j) = (H1(j) - F1(j) - n2(j)) / (form.mu1 - ln);
        }
        continue;
      }
      n1(j) = (kern1 && j == *kern1) ? w1(j) + (H1(j) - F1(j)) : (H1(j) - F1(j)) / (form.mu1 - ln);
      n2(j) = (kern2 && j == *kern2) ? w2(j) + (H2(j) - F2(j)) : (H2(j) - F2(j)) / (form.mu2 - ln);
    }
    mv.image.resize(2 * n);
    mv.image << n1, n2;
    return mv;
  };

  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(2 * n);
  if (opts.init) {
    if (opts.init->size() != 2 * n) throw DimensionError("initial state does not match system size");
    z0 = Eigen::VectorXd(2 * n);
    const Eigen::VectorXd u0 = opts.init->head(n), v0 = opts.init->tail(n);
    z0 << Qi(0, 0) * u0 + Qi(0, 1) * v0, Qi(1, 0) * u0 + Qi(1, 1) * v0;
  }
  DriverResult d = run_fixed_point(z0, is_xi, eval, opts);
  const auto conditions = std::move(r.conditions);
  detail::fill_report(r, p, basis, d, Q, is_xi);
  r.conditions = conditions;
  if (r.status != SolveStatus::converged)
    r.notes.push_back("no convergence; this does not show that no solution exists");
  return r;
}

/// system_linear: a single linear solve, reported like an iteration.
inline SolveReport solve_system_linear(const ProblemSpec& p) {
  const SpectralBasis basis = p.basis();
  SolveReport r;
  std::optional<CanonicalForm> form;
  r.classification = detail::classify_or_nonresonant(p, basis, form);
  r.canonical = form;
  const FieldPair s = solve_linear_system(basis, *p.matrix, p.forcing_h.field(basis), p.forcing_k.field(basis));
  r.solution = {s.u, s.v};
  const auto [r1, r2] = system_residual_coeffs(p, basis, s.u.coeffs, s.v.coeffs);
  r.residual_l2 = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
  r.residual_sup = std::max(sup_norm(synthesize(basis, r1)), sup_norm(synthesize(basis, r2)));
  r.status = SolveStatus::converged;
  r.iterations = 1;
  r.stop_reason = "direct mode-wise solve";
  return r;
}

}  // namespace resonance
