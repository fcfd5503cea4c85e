#pragma once

// Sign-split integrals  int_{w>0} w  and  int_{w<0} w  of band-limited
// functions. Nodal points are located by bisection inside every grid cell
// whose endpoint values change sign; each piece is then integrated with
// Gauss-Legendre, so the kink at the nodal set costs no accuracy.

#include <boost/math/quadrature/gauss.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "spectral.hpp"

namespace resonance {

struct SignSplit {
  double positive = 0.0;  ///< integral over {w > 0}
  double negative = 0.0;  ///< integral over {w < 0}, non-positive
};

/// (mode index, coefficient) pairs describing w = sum c_i phi_i.
using ModeTerms = std::vector<std::pair<std::size_t, double>>;

namespace detail {

inline constexpr int gl_points = 10;

struct GaussRule {
  std::array<double, gl_points> x{};  // on [-1, 1]
  std::array<double, gl_points> w{};
};

inline const GaussRule& gauss_rule() {
  static const GaussRule rule = [] {
    using G = boost::math::quadrature::gauss<double, gl_points>;
    GaussRule r;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    int p = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.x[p] = a[i];
      r.w[p++] = wt[i];
      if (a[i] != 0.0) {
        r.x[p] = -a[i];
        r.w[p++] = wt[i];
      }
    }
    return r;
  }();
  return rule;
}

template <class F>
double gauss_integrate(const F& f, double a, double b) {
  const auto& r = gauss_rule();
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (int q = 0; q < gl_points; ++q) s += r.w[q] * f(mid + half * r.x[q]);
  return s * half;
}

template <class F>
double bisect_root(const F& f, double a, double b, double fa) {
  for (int it = 0; it < 200 && b - a > 4e-16 * (1.0 + std::abs(a)); ++it) {
    const double c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0.0) return c;
    if ((fc < 0.0) == (fa < 0.0)) {
      a = c;
      fa = fc;
    } else {
      b = c;
    }
  }
  return 0.5 * (a + b);
}

inline void accumulate(SignSplit& s, double piece) {
  if (piece > 0.0)
    s.positive += piece;
  else
    s.negative += piece;
}

}  // namespace detail

/// Sign-split integral of a continuous function on [a, b] with `cells` bracketing cells.
template <class F>
SignSplit sign_split_1d(const F& f, double a, double b, int cells) {
  SignSplit out;
  const double h = (b - a) / cells;
  double xl = a, fl = f(a);
  for (int c = 0; c < cells; ++c) {
    const double xr = (c + 1 == cells) ? b : a + (c + 1) * h;
    const double fr = f(xr);
    if ((fl < 0.0 && fr > 0.0) || (fl > 0.0 && fr < 0.0)) {
      const double r = detail::bisect_root(f, xl, xr, fl);
      detail::accumulate(out, detail::gauss_integrate(f, xl, r));
      detail::accumulate(out, detail::gauss_integrate(f, r, xr));
    } else {
      detail::accumulate(out, detail::gauss_integrate(f, xl, xr));
    }
    xl = xr;
    fl = fr;
  }
  return out;
}

/// Sign-split integrals of w = sum c_i phi_i over the basis domain.
/// `cells` defaults to the basis grid size (per dimension).
inline SignSplit sign_split(const SpectralBasis& basis, const ModeTerms& terms, int cells = 0) {
  using std::numbers::pi;
  if (cells <= 0) cells = std::max(basis.grid_size(), 64);
  switch (basis.kind()) {
    case DomainKind::interval:
    case DomainKind::circle: {
      const double b = basis.kind() == DomainKind::circle ? 2.0 * pi : pi;
      auto w = [&](double x) {
        double s = 0.0;
        for (const auto& [i, c] : terms) s += c * basis.eval_mode(i, x);
        return s;
      };
      return sign_split_1d(w, 0.0, b, cells);
    }
    case DomainKind::square: break;
  }

  // Square: Gauss-Legendre in x over `cells` panels, exact sign split in y.
  // The inner y-grid is shared by every x, so sin(l y) is tabulated once.
  const auto& rule = detail::gauss_rule();
  const int q = detail::gl_points;
  const double h = pi / cells;
  const std::size_t nt = terms.size();
  std::vector<double> ends(nt * (cells + 1));
  std::vector<double> inner(nt * static_cast<std::size_t>(cells) * q);
  for (std::size_t t = 0; t < nt; ++t) {
    const int l = basis.mode(terms[t].first).j;
    for (int c = 0; c <= cells; ++c) ends[t * (cells + 1) + c] = std::sin(l * (c * h));
    for (int c = 0; c < cells; ++c)
      for (int p = 0; p < q; ++p)
        inner[(t * cells + c) * q + p] = std::sin(l * ((c + 0.5) * h + 0.5 * h * rule.x[p]));
  }

  std::vector<double> amp(nt);
  auto inner_split = [&](double x) {
    for (std::size_t t = 0; t < nt; ++t) {
      const Mode& m = basis.mode(terms[t].first);
      amp[t] = terms[t].second * (2.0 / pi) * std::sin(m.i * x);
    }
    auto w = [&](double y) {
      double s = 0.0;
      for (std::size_t t = 0; t < nt; ++t) s += amp[t] * std::sin(basis.mode(terms[t].first).j * y);
      return s;
    };
    SignSplit s;
    double fl = 0.0;
    for (std::size_t t = 0; t < nt; ++t) fl += amp[t] * ends[t * (cells + 1)];
    for (int c = 0; c < cells; ++c) {
      double fr = 0.0;
      for (std::size_t t = 0; t < nt; ++t) fr += amp[t] * ends[t * (cells + 1) + c + 1];
      const double yl = c * h, yr = (c + 1) * h;
      if ((fl < 0.0 && fr > 0.0) || (fl > 0.0 && fr < 0.0)) {
        const double r = detail::bisect_root(w, yl, yr, fl);
        detail::accumulate(s, detail::gauss_integrate(w, yl, r));
        detail::accumulate(s, detail::gauss_integrate(w, r, yr));
      } else {
        double acc = 0.0;
        for (int p = 0; p < q; ++p) {
          double v = 0.0;
          for (std::size_t t = 0; t < nt; ++t) v += amp[t] * inner[(t * cells + c) * q + p];
          acc += rule.w[p] * v;
        }
        detail::accumulate(s, 0.5 * h * acc);
      }
      fl = fr;
    }
    return s;
  };

  SignSplit total;
  for (int c = 0; c < cells; ++c)
    for (int p = 0; p < q; ++p) {
      const double x = (c + 0.5) * h + 0.5 * h * rule.x[p];
      const SignSplit s = inner_split(x);
      total.positive += 0.5 * h * rule.w[p] * s.positive;
      total.negative += 0.5 * h * rule.w[p] * s.negative;
    }
  return total;
}

}  // namespace resonance
