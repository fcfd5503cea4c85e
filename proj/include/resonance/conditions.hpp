#pragma once

// Family-level condition checks: picks the right inequality for a problem,
// computes its projections and returns the reports attached to a solve.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "canonical.hpp"
#include "errors.hpp"
#include "problem.hpp"
#include "solvability.hpp"

namespace resonance {

inline constexpr int default_williams_directions = 64;

namespace detail {

inline const Thresholds& require_thresholds(const std::optional<Thresholds>& t, const std::string& who) {
  if (!t) throw SpecificationError("missing thresholds for " + who);
  return *t;
}

/// Forcings of the canonical system, (h~, k~) = Q^-1 (h, k), mode by mode.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> canonical_forcings(const ProblemSpec& p,
                                                                      const SpectralBasis& basis,
                                                                      const CanonicalForm& form) {
  const Eigen::VectorXd h = p.forcing_h.vector(basis);
  const Eigen::VectorXd k = p.forcing_k.vector(basis);
  return {form.Q_inv(0, 0) * h + form.Q_inv(0, 1) * k, form.Q_inv(1, 0) * h + form.Q_inv(1, 1) * k};
}

}  // namespace detail

/// Threshold (interval) condition of a scalar or resonant system problem.
/// For system_case_B both inequalities are evaluated and the margin is the
/// smaller one. System thresholds are read in canonical coordinates.
inline ConditionReport check_scalar_condition(const ProblemSpec& p) {
  const SpectralBasis basis = p.basis();
  if (!is_system(p.family)) {
    if (p.family != Family::scalar_resonant)
      throw SpecificationError("interval condition applies to scalar_resonant and resonant systems");
    const auto& t = detail::require_thresholds(p.g->thresholds, "g");
    const std::size_t grp = basis.group_for_index(p.k);
    const double Ak = p.forcing.vector(basis)(static_cast<Eigen::Index>(basis.group(grp).members.front()));
    return interval_condition(ConditionId::LL_interval, basis, grp, t, Ak);
  }

  const CanonicalForm form = canonical_reduce(*p.matrix);
  const SystemClass cls = classify_system(form, basis);
  const auto [h, k] = detail::canonical_forcings(p, basis, form);
  auto coef = [&](const Eigen::VectorXd& v, int index) {
    return v(static_cast<Eigen::Index>(basis.group(basis.group_for_index(index)).members.front()));
  };
  ConditionReport r;
  switch (cls.kind) {
    case SystemClass::Case::nonresonant:
      throw SpecificationError("system is nonresonant; no interval condition applies");
    case SystemClass::Case::case_A: {
      const bool first = cls.resonant_component == 0;
      const auto& pair = first ? p.f_uv : p.g_uv;
      const auto& t = detail::require_thresholds(pair->thresholds, first ? "f" : "g");
      r = interval_condition(ConditionId::system_A, basis, basis.group_for_index(cls.k), t,
                             coef(first ? h : k, cls.k), "L", first ? "A_k" : "B_k");
      break;
    }
    case SystemClass::Case::case_B: {
      const auto& tf = detail::require_thresholds(p.f_uv->thresholds, "f");
      const auto& tg = detail::require_thresholds(p.g_uv->thresholds, "g");
      const ConditionReport a =
          interval_condition(ConditionId::system_B, basis, basis.group_for_index(cls.k), tf, coef(h, cls.k));
      const ConditionReport b = interval_condition(ConditionId::system_B, basis, basis.group_for_index(cls.m),
                                                   tg, coef(k, cls.m), "M", "B_m");
      r.id = ConditionId::system_B;
      for (const auto& [name, v] : a.quantities) r.set(name, v);
      for (const auto& [name, v] : b.quantities) r.set("m." + name, v);
      r.set("margin_k", a.margin);
      r.set("margin_m", b.margin);
      r.finish(std::min(a.margin, b.margin));
      break;
    }
    case SystemClass::Case::case_C: {
      const auto& t = detail::require_thresholds(p.g_uv->thresholds, "g");
      r = interval_condition(ConditionId::system_C, basis, basis.group_for_index(cls.k), t, coef(k, cls.k), "N",
                             "B_k");
      break;
    }
  }
  if (!form.identity_transform())
    r.notes.push_back("thresholds are read in canonical coordinates (Q is not the identity)");
  return r;
}

/// All condition reports relevant to a problem's family (possibly none).
inline std::vector<ConditionReport> check_problem(const ProblemSpec& p) {
  validate_structure(p);
  const SpectralBasis basis = p.basis();
  std::vector<ConditionReport> out;
  auto limits = [&](const char* what) {
    if (!p.g->limits) throw SpecificationError(std::string("g limits are required for ") + what);
    return *p.g->limits;
  };
  switch (p.family) {
    case Family::scalar_resonant:
      if (p.g->thresholds)
        out.push_back(check_scalar_condition(p));
      else if (p.g->sign_property)
        out.push_back(fn_sign_check(*p.g, p.forcing.vector(basis), basis, basis.group_for_index(p.k)));
      else
        throw SpecificationError("scalar_resonant needs g thresholds (or a declared sign property)");
      break;
    case Family::scalar_multi:
      out.push_back(williams_margin(basis, basis.group_for_index(p.k), p.forcing.vector(basis), limits("Williams"),
                                    default_williams_directions));
      break;
    case Family::periodic_LL:
      out.push_back(lazer_leach_check(basis, p.forcing.vector(basis), p.n, limits("Lazer-Leach")));
      break;
    case Family::periodic_damped:
      if (!p.g->antiderivative_limits)
        throw SpecificationError("G_limits (antiderivative limits) are required for periodic_damped");
      out.push_back(korman_li_check(basis, p.forcing.vector(basis), p.n, *p.g->antiderivative_limits));
      break;
    case Family::periodic_FN:
      out.push_back(fn_sign_check(*p.g, p.forcing.vector(basis), basis, basis.group_for_index(p.n)));
      break;
    case Family::system_linear:
    case Family::system_nonresonant: break;
    case Family::system_case_A:
    case Family::system_case_B:
    case Family::system_case_C: out.push_back(check_scalar_condition(p)); break;
  }
  return out;
}

/// Gating verdict: the solve may proceed when no condition applies or at
/// least one report holds.
inline bool conditions_permit(const std::vector<ConditionReport>& reports) {
  if (reports.empty()) return true;
  for (const auto& r : reports)
    if (r.verdict == Verdict::holds) return true;
  return false;
}

}  // namespace resonance
