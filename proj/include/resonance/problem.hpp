#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <string>

#include "errors.hpp"
#include "nonlinearity.hpp"
#include "spectral.hpp"

namespace resonance {

enum class Family {
  scalar_resonant,     // Delta u + lambda_k u + g(u) = f, simple lambda_k
  scalar_multi,        // same at an eigenvalue of any multiplicity
  periodic_LL,         // u'' + n^2 u + g(u) = f(t)
  periodic_damped,     // u'' + g(u) u' + n^2 u = f(t)
  periodic_FN,         // u'' + n^2 u + g(u) = e(t), e orthogonal to cos nt, sin nt
  system_linear,       // Delta (u,v) + A (u,v) = (h,k)
  system_nonresonant,  // Delta (u,v) + A (u,v) + (f,g)(u,v) = (h,k), no resonance
  system_case_A,       // diag(lambda_k, mu)
  system_case_B,       // diag(lambda_k, lambda_m)
  system_case_C,       // Jordan block at lambda_k
};

inline constexpr Family all_families[] = {
    Family::scalar_resonant, Family::scalar_multi,       Family::periodic_LL,
    Family::periodic_damped, Family::periodic_FN,        Family::system_linear,
    Family::system_nonresonant, Family::system_case_A,   Family::system_case_B,
    Family::system_case_C};

inline std::string to_string(Family f) {
  switch (f) {
    case Family::scalar_resonant: return "scalar_resonant";
    case Family::scalar_multi: return "scalar_multi";
    case Family::periodic_LL: return "periodic_LL";
    case Family::periodic_damped: return "periodic_damped";
    case Family::periodic_FN: return "periodic_FN";
    case Family::system_linear: return "system_linear";
    case Family::system_nonresonant: return "system_nonresonant";
    case Family::system_case_A: return "system_case_A";
    case Family::system_case_B: return "system_case_B";
    case Family::system_case_C: return "system_case_C";
  }
  return "?";
}

inline std::optional<Family> parse_family(const std::string& s) {
  for (Family f : all_families)
    if (to_string(f) == s) return f;
  return std::nullopt;
}

inline bool is_system(Family f) {
  return f == Family::system_linear || f == Family::system_nonresonant || f == Family::system_case_A ||
         f == Family::system_case_B || f == Family::system_case_C;
}

inline bool is_periodic(Family f) {
  return f == Family::periodic_LL || f == Family::periodic_damped || f == Family::periodic_FN;
}

/// Forcing as finitely many orthonormal-basis coefficients keyed by mode index.
struct ForcingSpec {
  std::map<std::size_t, double> coeffs;
  std::string description;

  bool operator==(const ForcingSpec&) const = default;

  Eigen::VectorXd vector(const SpectralBasis& basis) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.size());
    for (const auto& [i, c] : coeffs) {
      if (static_cast<Eigen::Index>(i) >= basis.size())
        throw DimensionError("forcing mode " + std::to_string(i) + " outside basis of " +
                             std::to_string(basis.size()) + " modes");
      out(static_cast<Eigen::Index>(i)) = c;
    }
    return out;
  }

  Field field(const SpectralBasis& basis) const { return synthesize(basis, vector(basis)); }

  ForcingSpec scaled(double t) const {
    ForcingSpec out = *this;
    for (auto& [i, c] : out.coeffs) c *= t;
    return out;
  }

  static ForcingSpec from_vector(const Eigen::VectorXd& v, std::string description = {}) {
    ForcingSpec f;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (v(i) != 0.0) f.coeffs[static_cast<std::size_t>(i)] = v(i);
    f.description = std::move(description);
    return f;
  }
};

/// Constant 2x2 coupling [[a, b], [c, d]] acting as Delta(u,v) + A(u,v).
struct CouplingMatrix {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  bool operator==(const CouplingMatrix&) const = default;
};

struct ProblemSpec {
  Family family = Family::scalar_resonant;
  Domain domain;
  int n_modes = 0;

  int k = 0;  ///< resonant eigenvalue index (Dirichlet ordinal, 1-based)
  int m = 0;  ///< second resonant index (system case B)
  int n = 0;  ///< oscillator frequency (circle)
  double mu = 0.0;  ///< non-resonant second eigenvalue (system case A)
  std::optional<CouplingMatrix> matrix;

  std::optional<Nonlinearity> g;        ///< scalar and periodic families
  std::optional<PairNonlinearity> f_uv;  ///< systems: first equation
  std::optional<PairNonlinearity> g_uv;  ///< systems: second equation

  ForcingSpec forcing;    ///< scalar forcing f (or e)
  ForcingSpec forcing_h;  ///< systems: first equation
  ForcingSpec forcing_k;  ///< systems: second equation

  bool operator==(const ProblemSpec&) const = default;

  SpectralBasis basis() const { return build_basis(domain, n_modes); }

  /// Index used to address the resonant group (k, or n on the circle).
  int resonant_index() const { return domain.kind == DomainKind::circle ? n : k; }
};

/// Family arity and index checks that do not need the canonical reduction.
/// Throws SpecificationError naming the offending field.
inline void validate_structure(const ProblemSpec& p) {
  const SpectralBasis basis = p.basis();
  const bool circle = p.domain.kind == DomainKind::circle;
  if (is_periodic(p.family) && !circle)
    throw SpecificationError("family " + to_string(p.family) + " requires domain circle");
  if (!is_periodic(p.family) && circle)
    throw SpecificationError("family " + to_string(p.family) + " requires a Dirichlet domain");

  auto check_forcing = [&](const ForcingSpec& f, const char* name) {
    for (const auto& [i, c] : f.coeffs) {
      if (static_cast<Eigen::Index>(i) >= basis.size())
        throw SpecificationError(std::string(name) + ": mode outside basis");
      if (!std::isfinite(c)) throw SpecificationError(std::string(name) + ": non-finite coefficient");
    }
  };

  if (!is_system(p.family)) {
    if (!p.g) throw SpecificationError("nonlinearity g is required for family " + to_string(p.family));
    if (const auto msg = metadata_problem(*p.g); !msg.empty()) throw SpecificationError(msg);
    if (p.f_uv || p.g_uv) throw SpecificationError("pair nonlinearities only apply to systems");
    const std::size_t grp = basis.group_for_index(p.resonant_index());
    if (circle && p.n < 1) throw SpecificationError("oscillator frequency n must be >= 1");
    if (p.family == Family::scalar_resonant && !basis.group(grp).simple())
      throw SpecificationError("scalar_resonant needs a simple eigenvalue; use scalar_multi");
    check_forcing(p.forcing, "forcing");
    return;
  }

  if (p.g) throw SpecificationError("systems take pair nonlinearities f(u,v), g(u,v)");
  if (!p.matrix) throw SpecificationError("systems require a coupling matrix");
  if (p.family == Family::system_linear) {
    if (p.f_uv || p.g_uv) throw SpecificationError("system_linear takes no nonlinearities");
  } else if (!p.f_uv || !p.g_uv) {
    throw SpecificationError("family " + to_string(p.family) + " needs both f(u,v) and g(u,v)");
  }
  for (const auto* q : {&p.f_uv, &p.g_uv}) {
    if (*q && (*q)->thresholds) {
      const auto& t = *(*q)->thresholds;
      if (!(t.c < t.d)) throw SpecificationError("thresholds.c must be < thresholds.d");
      if (!(t.C < t.D)) throw SpecificationError("thresholds.C must be < thresholds.D");
    }
  }
  check_forcing(p.forcing_h, "forcing.h");
  check_forcing(p.forcing_k, "forcing.k");
}

}  // namespace resonance
