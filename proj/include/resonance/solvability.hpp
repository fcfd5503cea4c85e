#pragma once

// Solvability conditions for resonant problems as signed margins:
// positive margin <=> the strict inequality holds.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "nonlinearity.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"

namespace resonance {

inline constexpr double boundary_tol = 1e-9;

enum class ConditionId { LL_interval, Williams, LazerLeach, KormanLi, FN_sign, system_A, system_B, system_C };

inline std::string to_string(ConditionId id) {
  switch (id) {
    case ConditionId::LL_interval: return "LL_interval";
    case ConditionId::Williams: return "Williams";
    case ConditionId::LazerLeach: return "LazerLeach";
    case ConditionId::KormanLi: return "KormanLi";
    case ConditionId::FN_sign: return "FN_sign";
    case ConditionId::system_A: return "system_A";
    case ConditionId::system_B: return "system_B";
    case ConditionId::system_C: return "system_C";
  }
  return "?";
}

enum class Verdict { holds, fails, boundary };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::boundary: return "boundary";
  }
  return "?";
}

inline Verdict verdict_for(double margin) {
  if (margin > boundary_tol) return Verdict::holds;
  if (margin < -boundary_tol) return Verdict::fails;
  return Verdict::boundary;
}

struct ConditionReport {
  ConditionId id = ConditionId::LL_interval;
  std::vector<std::pair<std::string, double>> quantities;  ///< in insertion order
  double margin = 0.0;
  Verdict verdict = Verdict::boundary;
  std::optional<Eigen::VectorXd> witness;
  std::string qualifier;
  std::vector<std::string> notes;

  void set(const std::string& name, double value) {
    for (auto& [k, v] : quantities)
      if (k == name) {
        v = value;
        return;
      }
    quantities.emplace_back(name, value);
  }
  double quantity(const std::string& name) const {
    for (const auto& [k, v] : quantities)
      if (k == name) return v;
    throw std::out_of_range("no quantity " + name);
  }
  void finish(double m) {
    margin = m;
    verdict = verdict_for(m);
  }
};

// ---------------------------------------------------------------------------
// Landesman-Lazer interval

struct LLInterval {
  double L1 = 0.0;
  double L2 = 0.0;
  double positive = 0.0;  ///< int_{phi>0} phi
  double negative = 0.0;  ///< int_{phi<0} phi
};

/// L2 = D P + C N,  L1 = C P + D N  with P, N the sign-split integrals of phi_k.
inline LLInterval landesman_lazer_interval(const SpectralBasis& basis, std::size_t group_index, double C,
                                           double D) {
  const EigenGroup& g = basis.group(group_index);
  if (!g.simple())
    throw MultiplicityError("eigenvalue " + std::to_string(g.value) + " has multiplicity " +
                            std::to_string(g.size()) + "; use williams_margin");
  if (!(C < D)) throw SpecificationError("thresholds.C must be < thresholds.D");
  const SignSplit s = sign_split(basis, ModeTerms{{g.members.front(), 1.0}});
  return {C * s.positive + D * s.negative, D * s.positive + C * s.negative, s.positive, s.negative};
}

/// L1 < projection < L2 as a report; shared by the scalar and system checks.
inline ConditionReport interval_condition(ConditionId id, const SpectralBasis& basis, std::size_t group_index,
                                          const Thresholds& t, double projection,
                                          const std::string& prefix = "L", const std::string& proj_name = "A_k") {
  const LLInterval iv = landesman_lazer_interval(basis, group_index, t.C, t.D);
  ConditionReport r;
  r.id = id;
  r.set(prefix + "1", iv.L1);
  r.set(prefix + "2", iv.L2);
  r.set(proj_name, projection);
  r.set("C", t.C);
  r.set("D", t.D);
  r.set("positive_integral", iv.positive);
  r.set("negative_integral", iv.negative);
  r.finish(std::min(projection - iv.L1, iv.L2 - projection));
  return r;
}

// ---------------------------------------------------------------------------
// Williams condition over the unit sphere of an eigenspace

inline std::uint64_t default_seed() {
  if (const char* s = std::getenv("RESONANCE_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(s, &end, 10);
    if (end != s) return v;
  }
  return 42;
}

namespace detail {

/// Directions on the circle use the trigonometric scaling w = a cos nt + b sin nt,
/// so the margin is directly comparable with the Lazer-Leach quantities.
inline double direction_scale(const SpectralBasis& basis) {
  return basis.kind() == DomainKind::circle ? std::sqrt(std::numbers::pi) : 1.0;
}

template <class F>
std::pair<double, double> golden_minimize(const F& f, double a, double b, double tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

}  // namespace detail

/// Minimizes  margin(w) = g+ int_{w>0} w + g- int_{w<0} w - <f, w>  over unit
/// directions w = sum theta_i phi_i of the group; w = 0 is excluded.
inline ConditionReport williams_margin(const SpectralBasis& basis, std::size_t group_index,
                                       const Eigen::VectorXd& f, Limits g_limits, int n_dirs,
                                       std::uint64_t seed = default_seed()) {
  const EigenGroup& g = basis.group(group_index);
  if (f.size() != basis.size()) throw DimensionError("forcing does not match basis");
  if (!(g_limits.minus < g_limits.plus)) throw SpecificationError("Williams margin needs g(-inf) < g(+inf)");
  if (n_dirs < 8) throw SpecificationError("n_dirs must be >= 8");
  const double scale = detail::direction_scale(basis);
  const Eigen::Index m = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd proj(m);
  for (Eigen::Index i = 0; i < m; ++i) proj(i) = scale * f(static_cast<Eigen::Index>(g.members[i]));

  long evaluations = 0;
  auto parts = [&](const Eigen::VectorXd& theta) {
    ModeTerms terms;
    for (Eigen::Index i = 0; i < m; ++i) terms.emplace_back(g.members[i], scale * theta(i));
    ++evaluations;
    const SignSplit s = sign_split(basis, terms);
    const double rhs = g_limits.plus * s.positive + g_limits.minus * s.negative;
    return std::pair{rhs, theta.dot(proj)};
  };
  auto margin_of = [&](const Eigen::VectorXd& theta) {
    const auto [rhs, lhs] = parts(theta);
    return rhs - lhs;
  };

  Eigen::VectorXd best;
  double best_margin = std::numeric_limits<double>::infinity();
  auto consider = [&](const Eigen::VectorXd& theta, double value) {
    if (value < best_margin) {
      best_margin = value;
      best = theta;
    }
  };

  std::string method;
  if (m == 1) {
    method = "exhaustive (two directions)";
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd th = Eigen::VectorXd::Constant(1, s);
      consider(th, margin_of(th));
    }
  } else if (m == 2) {
    method = "angular grid + golden-section refinement";
    const double step = 2.0 * std::numbers::pi / n_dirs;
    auto at = [](double a) {
      Eigen::VectorXd th(2);
      th << std::cos(a), std::sin(a);
      return th;
    };
    int best_j = 0;
    for (int j = 0; j < n_dirs; ++j) {
      const double v = margin_of(at(j * step));
      if (v < best_margin) best_j = j;
      consider(at(j * step), v);
    }
    const auto [angle, value] = detail::golden_minimize([&](double a) { return margin_of(at(a)); },
                                                        (best_j - 1) * step, (best_j + 1) * step, 1e-10);
    consider(at(angle), value);
  } else {
    method = "random sphere sampling + local descent, 8 restarts";
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_unit = [&] {
      Eigen::VectorXd th(m);
      for (Eigen::Index i = 0; i < m; ++i) th(i) = normal(rng);
      return Eigen::VectorXd(th.normalized());
    };
    for (int restart = 0; restart < 8; ++restart) {
      Eigen::VectorXd x;
      double fx = std::numeric_limits<double>::infinity();
      for (int s = 0; s < n_dirs; ++s) {
        Eigen::VectorXd th = random_unit();
        const double v = margin_of(th);
        if (v < fx) {
          fx = v;
          x = th;
        }
      }
      double step = 0.5;
      while (step > 1e-8) {
        bool improved = false;
        for (Eigen::Index i = 0; i < m && !improved; ++i)
          for (double sgn : {1.0, -1.0}) {
            Eigen::VectorXd y = x;
            y(i) += sgn * step;
            if (y.norm() == 0.0) continue;
            y.normalize();
            const double v = margin_of(y);
            if (v < fx) {
              fx = v;
              x = y;
              improved = true;
              break;
            }
          }
        if (!improved) step *= 0.5;
      }
      consider(x, fx);
    }
  }

  const auto [rhs, lhs] = parts(best);
  ConditionReport r;
  r.id = ConditionId::Williams;
  r.set("g_minus", g_limits.minus);
  r.set("g_plus", g_limits.plus);
  r.set("multiplicity", static_cast<double>(m));
  r.set("rhs_at_witness", rhs);
  r.set("projection_at_witness", lhs);
  r.set("n_dirs", n_dirs);
  r.set("evaluations", static_cast<double>(evaluations));
  r.witness = best;
  r.notes.push_back("minimum over unit directions only (w = 0 excluded)");
  r.notes.push_back("search: " + method + "; margin is an upper bound on the true minimum");
  if (basis.kind() == DomainKind::circle) r.notes.push_back("directions scaled as a cos nt + b sin nt");
  r.finish(best_margin);
  return r;
}

// ---------------------------------------------------------------------------
// Forced oscillators on the circle

/// Fourier numbers A = int f cos nt, B = int f sin nt of a circle field.
inline std::pair<double, double> fourier_numbers(const SpectralBasis& basis, const Eigen::VectorXd& f, int n) {
  if (basis.kind() != DomainKind::circle) throw ConfigurationError("Fourier numbers need the circle basis");
  if (n < 1 || n > basis.modes_parameter()) throw ConfigurationError("frequency n outside basis");
  if (f.size() != basis.size()) throw DimensionError("forcing does not match basis");
  const double s = std::sqrt(std::numbers::pi);
  return {s * f(2 * n - 1), s * f(2 * n)};
}

/// sqrt(A^2 + B^2) < 2 (g(+inf) - g(-inf)).
inline ConditionReport lazer_leach_check(const SpectralBasis& basis, const Eigen::VectorXd& f, int n,
                                         Limits g_limits) {
  const auto [A, B] = fourier_numbers(basis, f, n);
  const double threshold = 2.0 * (g_limits.plus - g_limits.minus);
  ConditionReport r;
  r.id = ConditionId::LazerLeach;
  r.set("A", A);
  r.set("B", B);
  r.set("amplitude", std::hypot(A, B));
  r.set("threshold", threshold);
  r.set("n", n);
  r.finish(threshold - std::hypot(A, B));
  return r;
}

/// sqrt(A^2 + B^2) < 2 n (G(+inf) - G(-inf)) for u'' + g(u) u' + n^2 u = f.
inline ConditionReport korman_li_check(const SpectralBasis& basis, const Eigen::VectorXd& f, int n,
                                       Limits G_limits) {
  const auto [A, B] = fourier_numbers(basis, f, n);
  const double threshold = 2.0 * n * (G_limits.plus - G_limits.minus);
  ConditionReport r;
  r.id = ConditionId::KormanLi;
  r.set("A", A);
  r.set("B", B);
  r.set("amplitude", std::hypot(A, B));
  r.set("threshold", threshold);
  r.set("n", n);
  r.notes.push_back("threshold scales with the frequency n");
  r.finish(threshold - std::hypot(A, B));
  return r;
}

// ---------------------------------------------------------------------------
// de Figueiredo-Ni type sign condition

/// Combines the declared sign property u g(u) > 0 (spot-checked), the sign of
/// the declared limits, and orthogonality of the forcing to the resonant group.
/// Margin: 1 - max|<e,phi_i>| / ortho_tol when the qualitative requirements
/// hold (positive <=> orthogonal within tolerance), -1 otherwise.
inline ConditionReport fn_sign_check(const Nonlinearity& desc, const Eigen::VectorXd& forcing,
                                     const SpectralBasis& basis, std::size_t group_index) {
  if (!desc.sign_property) throw SpecificationError("FN check needs a declared sign property u g(u) > 0");
  if (forcing.size() != basis.size()) throw DimensionError("forcing does not match basis");
  const EigenGroup& g = basis.group(group_index);

  const ValidationReport v = validate_nonlinearity(desc, 10.0, 2000);
  const bool sign_ok = v.find("sign_property")->status == PropertyStatus::consistent;
  const bool limits_ok = desc.limits && desc.limits->plus > 0.0 && desc.limits->minus < 0.0;

  double worst = 0.0;
  for (std::size_t i : g.members) worst = std::max(worst, std::abs(forcing(static_cast<Eigen::Index>(i))));
  const double tol = ortho_rel_tol * forcing.norm();

  const bool principal = basis.kind() != DomainKind::circle && group_index == 0 && g.simple();
  ConditionReport r;
  r.id = ConditionId::FN_sign;
  r.set("sign_property", sign_ok ? 1.0 : 0.0);
  r.set("limit_signs", limits_ok ? 1.0 : 0.0);
  r.set("max_projection", worst);
  r.set("ortho_tol", tol);
  r.qualifier = limits_ok ? "FN-extended" : "FN-only";
  if (!desc.limits) r.notes.push_back("limits not declared; liminf/limsup sign requirement unknown");
  if (!sign_ok) r.notes.push_back("sign property violated on sampled range");

  bool qualitative = sign_ok;
  if (!principal && !limits_ok) {
    qualitative = false;
    r.notes.push_back("non-principal eigenvalue requires liminf g(+inf) > 0 and limsup g(-inf) < 0");
  }
  double margin = -1.0;
  if (qualitative) margin = tol > 0.0 ? 1.0 - worst / tol : (worst == 0.0 ? 1.0 : -1.0);
  if (margin < 0.0 && qualitative) r.notes.push_back("forcing not orthogonal to the resonant group");
  r.finish(margin);
  return r;
}

/// Sign-split integrals of cos(n t - delta) over (0, 2 pi); both magnitudes equal 2.
inline std::pair<double, double> lemma2_integrals(int n, double delta, int cells = 4096) {
  if (n < 1) throw ConfigurationError("n must be >= 1");
  const SignSplit s = sign_split_1d([&](double t) { return std::cos(n * t - delta); }, 0.0,
                                    2.0 * std::numbers::pi, cells);
  return {s.positive, s.negative};
}

}  // namespace resonance
