#pragma once

// Closed registry of bounded nonlinearities together with the analytic
// metadata the solvability conditions consume (bound, limits at +-infinity,
// threshold quadruple, limits of the antiderivative, sign property).
// Metadata is declared, never inferred: validate_nonlinearity only spot-checks it.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace resonance {

enum class BaseFunction { zero, arctan, tanh, bounded_gaussian, rational };

inline std::string to_string(BaseFunction f) {
  switch (f) {
    case BaseFunction::zero: return "zero";
    case BaseFunction::arctan: return "arctan";
    case BaseFunction::tanh: return "tanh";
    case BaseFunction::bounded_gaussian: return "bounded_gaussian";
    case BaseFunction::rational: return "rational";
  }
  return "?";
}

inline std::optional<BaseFunction> parse_base_function(const std::string& s) {
  for (auto f : {BaseFunction::zero, BaseFunction::arctan, BaseFunction::tanh,
                 BaseFunction::bounded_gaussian, BaseFunction::rational})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

/// Pair (value at -infinity, value at +infinity).
struct Limits {
  double minus = 0.0;
  double plus = 0.0;
  bool operator==(const Limits&) const = default;
};

/// g(u) > D for u > d and g(u) < C for u < c.
struct Thresholds {
  double c = 0.0;
  double d = 0.0;
  double C = 0.0;
  double D = 0.0;
  bool operator==(const Thresholds&) const = default;
};

/// g(u) = amp * base(scale * u + shift) plus declared metadata.
struct Nonlinearity {
  BaseFunction base = BaseFunction::zero;
  double amp = 1.0;
  double scale = 1.0;
  double shift = 0.0;

  double declared_bound = 0.0;
  std::optional<Limits> limits;
  std::optional<Thresholds> thresholds;
  std::optional<Limits> antiderivative_limits;
  bool sign_property = false;

  bool operator==(const Nonlinearity&) const = default;

  double operator()(double u) const {
    const double z = scale * u + shift;
    switch (base) {
      case BaseFunction::zero: return 0.0;
      case BaseFunction::arctan: return amp * std::atan(z);
      case BaseFunction::tanh: return amp * std::tanh(z);
      case BaseFunction::bounded_gaussian: return amp * z * std::exp(-z * z);
      case BaseFunction::rational: return amp / (1.0 + z * z);
    }
    return 0.0;
  }

  /// Registry entry with the exact metadata of amp * base(scale u + shift).
  static Nonlinearity make(BaseFunction base, double amp = 1.0, double scale = 1.0,
                           double shift = 0.0) {
    using std::numbers::pi;
    if (!(amp > 0.0) || !(scale > 0.0))
      throw SpecificationError("nonlinearity amp and scale must be positive");
    Nonlinearity g;
    g.base = base;
    g.amp = amp;
    g.scale = scale;
    g.shift = shift;
    const bool odd_centered = shift == 0.0;
    switch (base) {
      case BaseFunction::zero:
        g.amp = 1.0;
        g.scale = 1.0;
        g.shift = 0.0;
        g.declared_bound = 0.0;
        g.limits = Limits{0.0, 0.0};
        g.antiderivative_limits = Limits{0.0, 0.0};
        break;
      case BaseFunction::arctan:
        g.declared_bound = amp * pi / 2.0;
        g.limits = Limits{-amp * pi / 2.0, amp * pi / 2.0};
        g.sign_property = odd_centered;
        break;
      case BaseFunction::tanh:
        g.declared_bound = amp;
        g.limits = Limits{-amp, amp};
        g.sign_property = odd_centered;
        break;
      case BaseFunction::bounded_gaussian: {
        g.declared_bound = amp / std::sqrt(2.0 * std::numbers::e);
        g.limits = Limits{0.0, 0.0};
        const double G = amp / (2.0 * scale) * std::exp(-shift * shift);
        g.antiderivative_limits = Limits{G, G};
        g.sign_property = odd_centered;
        break;
      }
      case BaseFunction::rational: {
        g.declared_bound = amp;
        g.limits = Limits{0.0, 0.0};
        const double a0 = std::atan(shift);
        g.antiderivative_limits = Limits{amp / scale * (-pi / 2.0 - a0), amp / scale * (pi / 2.0 - a0)};
        break;
      }
    }
    return g;
  }

  static Nonlinearity zero() { return make(BaseFunction::zero); }
  static Nonlinearity arctan(double amp = 1.0, double scale = 1.0, double shift = 0.0) {
    return make(BaseFunction::arctan, amp, scale, shift);
  }
  static Nonlinearity tanh(double amp = 1.0, double scale = 1.0, double shift = 0.0) {
    return make(BaseFunction::tanh, amp, scale, shift);
  }
  static Nonlinearity bounded_gaussian(double amp = 1.0, double scale = 1.0, double shift = 0.0) {
    return make(BaseFunction::bounded_gaussian, amp, scale, shift);
  }
  static Nonlinearity rational(double amp = 1.0, double scale = 1.0, double shift = 0.0) {
    return make(BaseFunction::rational, amp, scale, shift);
  }

  Nonlinearity with_thresholds(Thresholds t) const {
    Nonlinearity g = *this;
    g.thresholds = t;
    return g;
  }
};

/// Checks the construction invariants of declared metadata; returns the first
/// problem as "key: message" or an empty string.
inline std::string metadata_problem(const Nonlinearity& g) {
  if (g.thresholds) {
    if (!(g.thresholds->c < g.thresholds->d)) return "thresholds.c must be < thresholds.d";
    if (!(g.thresholds->C < g.thresholds->D)) return "thresholds.C must be < thresholds.D";
    if (g.declared_bound < std::max(std::abs(g.thresholds->C), std::abs(g.thresholds->D)))
      return "bound must be >= max(|thresholds.C|, |thresholds.D|)";
  }
  if (g.limits) {
    // Equal limits are allowed so that functions decaying to zero at both
    // ends (u exp(-u^2)) can be declared; strict bracketing g(-inf) < g(+inf) is then
    // reported by validation rather than rejected here.
    if (g.limits->minus > g.limits->plus) return "limits.minus must be <= limits.plus";
    if (g.declared_bound < std::max(std::abs(g.limits->minus), std::abs(g.limits->plus)))
      return "bound must be >= max(|limits|)";
  }
  if (g.antiderivative_limits && g.antiderivative_limits->minus > g.antiderivative_limits->plus)
    return "G_limits.minus must be <= G_limits.plus";
  if (g.declared_bound < 0.0) return "bound must be non-negative";
  return {};
}

/// G(u) = int_0^u g(t) dt by adaptive Gauss-Kronrod quadrature.
inline double primitive_eval(const Nonlinearity& g, double u) {
  if (u == 0.0) return 0.0;
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double t) { return g(t); }, 0.0, u, 20, 1e-14, &err);
  if (!std::isfinite(value)) throw EvaluationError("antiderivative is not finite at u=" + std::to_string(u));
  return value;
}

/// f(u, v) = u_term(u) + v_term(v), bounded, with threshold metadata whose
/// argument (u or v) depends on the system family.
struct PairNonlinearity {
  Nonlinearity u_term = Nonlinearity::zero();
  Nonlinearity v_term = Nonlinearity::zero();
  double declared_bound = 0.0;
  std::optional<Thresholds> thresholds;

  bool operator==(const PairNonlinearity&) const = default;

  double operator()(double u, double v) const { return u_term(u) + v_term(v); }

  static PairNonlinearity of(Nonlinearity u_term, Nonlinearity v_term,
                             std::optional<Thresholds> t = std::nullopt) {
    PairNonlinearity p;
    p.declared_bound = u_term.declared_bound + v_term.declared_bound;
    p.u_term = std::move(u_term);
    p.v_term = std::move(v_term);
    p.thresholds = t;
    return p;
  }
  static PairNonlinearity zero() { return of(Nonlinearity::zero(), Nonlinearity::zero()); }
};

enum class PropertyStatus { consistent, violated, not_declared };

inline std::string to_string(PropertyStatus s) {
  switch (s) {
    case PropertyStatus::consistent: return "consistent";
    case PropertyStatus::violated: return "violated";
    case PropertyStatus::not_declared: return "not_declared";
  }
  return "?";
}

struct PropertyCheck {
  std::string property;
  PropertyStatus status = PropertyStatus::not_declared;
  std::optional<double> at;  ///< witness u for a violation
  std::string detail;
};

struct ValidationReport {
  std::vector<PropertyCheck> checks;

  const PropertyCheck* find(const std::string& property) const {
    for (const auto& c : checks)
      if (c.property == property) return &c;
    return nullptr;
  }
  bool all_consistent() const {
    for (const auto& c : checks)
      if (c.status == PropertyStatus::violated) return false;
    return true;
  }
};

/// Samples u on [-R, R] (endpoints included as proxies for +-infinity) and
/// reports every declared property as consistent or violated-at(u).
inline ValidationReport validate_nonlinearity(const Nonlinearity& g, double range, int samples) {
  if (!(range > 0.0)) throw SpecificationError("validation range must be positive");
  if (samples < 16) throw SpecificationError("validation needs at least 16 samples");

  std::vector<double> us(static_cast<std::size_t>(samples) + 1), gs(us.size());
  for (std::size_t i = 0; i < us.size(); ++i) {
    us[i] = -range + 2.0 * range * static_cast<double>(i) / samples;
    gs[i] = g(us[i]);
    if (!std::isfinite(gs[i])) throw EvaluationError("nonlinearity not finite at u=" + std::to_string(us[i]));
  }

  ValidationReport report;
  auto add = [&](std::string name, std::optional<double> bad, std::string detail) {
    report.checks.push_back({std::move(name), bad ? PropertyStatus::violated : PropertyStatus::consistent,
                             bad, std::move(detail)});
  };

  {
    std::size_t worst = 0;
    for (std::size_t i = 0; i < us.size(); ++i)
      if (std::abs(gs[i]) >= std::abs(gs[worst])) worst = i;
    const double peak = std::abs(gs[worst]);
    add("bound", peak > g.declared_bound ? std::optional<double>(us[worst]) : std::nullopt,
        "max |g| = " + std::to_string(peak) + " vs declared " + std::to_string(g.declared_bound));
  }

  if (g.limits) {
    std::optional<double> bad;
    for (std::size_t i = 0; i < us.size() && !bad; ++i)
      if (!(g.limits->minus < gs[i] && gs[i] < g.limits->plus)) bad = us[i];
    add("limits", bad, "g(-inf) < g(u) < g(+inf) on sampled range");
  } else {
    report.checks.push_back({"limits", PropertyStatus::not_declared, std::nullopt, {}});
  }

  if (g.thresholds) {
    const auto& t = *g.thresholds;
    std::optional<double> bad_hi, bad_lo;
    for (std::size_t i = 0; i < us.size(); ++i) {
      if (!bad_hi && us[i] > t.d && !(gs[i] > t.D)) bad_hi = us[i];
      if (!bad_lo && us[i] < t.c && !(gs[i] < t.C)) bad_lo = us[i];
    }
    add("thresholds.upper", bad_hi, "g(u) > D for u > d");
    add("thresholds.lower", bad_lo, "g(u) < C for u < c");
  } else {
    report.checks.push_back({"thresholds", PropertyStatus::not_declared, std::nullopt, {}});
  }

  if (g.antiderivative_limits) {
    std::optional<double> bad;
    for (std::size_t i = 0; i < us.size() && !bad; ++i) {
      const double G = primitive_eval(g, us[i]);
      if (!(g.antiderivative_limits->minus < G && G < g.antiderivative_limits->plus)) bad = us[i];
    }
    add("antiderivative_limits", bad, "G(-inf) < G(u) < G(+inf) on sampled range");
  } else {
    report.checks.push_back({"antiderivative_limits", PropertyStatus::not_declared, std::nullopt, {}});
  }

  if (g.sign_property) {
    std::optional<double> bad;
    for (std::size_t i = 0; i < us.size() && !bad; ++i)
      if (us[i] != 0.0 && !(us[i] * gs[i] > 0.0)) bad = us[i];
    add("sign_property", bad, "u g(u) > 0 for u != 0");
  } else {
    report.checks.push_back({"sign_property", PropertyStatus::not_declared, std::nullopt, {}});
  }
  return report;
}

}  // namespace resonance
