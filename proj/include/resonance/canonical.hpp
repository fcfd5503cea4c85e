#pragma once

// Real canonical form Q^-1 A Q of a 2x2 coupling matrix and the resonance
// classification of the resulting system against a basis spectrum.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "problem.hpp"
#include "spectral.hpp"

namespace resonance {

struct CanonicalForm {
  enum class Kind { diagonal, jordan };
  Kind kind = Kind::diagonal;
  double mu1 = 0.0;  ///< first diagonal entry (or the Jordan eigenvalue)
  double mu2 = 0.0;  ///< second diagonal entry (equals mu1 for Jordan)
  Eigen::Matrix2d Q = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d Q_inv = Eigen::Matrix2d::Identity();
  std::vector<std::string> warnings;

  Eigen::Matrix2d form() const {
    Eigen::Matrix2d f;
    if (kind == Kind::jordan)
      f << mu1, 1.0, 0.0, mu1;
    else
      f << mu1, 0.0, 0.0, mu2;
    return f;
  }
  bool identity_transform() const { return Q == Eigen::Matrix2d::Identity(); }
  std::string describe() const;
};

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string CanonicalForm::describe() const {
  if (kind == Kind::jordan) return "jordan(" + format_number(mu1) + ")";
  return "diagonal(" + format_number(mu1) + ", " + format_number(mu2) + ")";
}

inline Eigen::Matrix2d to_matrix(const CouplingMatrix& A) {
  Eigen::Matrix2d m;
  m << A.a, A.b, A.c, A.d;
  return m;
}

namespace detail {

/// Unit vector in the kernel of the rank-one matrix M (orthogonal to its larger row).
inline Eigen::Vector2d kernel_vector(const Eigen::Matrix2d& M) {
  const Eigen::Vector2d r = M.row(0).norm() >= M.row(1).norm() ? Eigen::Vector2d(M.row(0))
                                                                : Eigen::Vector2d(M.row(1));
  Eigen::Vector2d v(-r(1), r(0));
  const double n = v.norm();
  if (n == 0.0) return Eigen::Vector2d(1.0, 0.0);
  return v / n;
}

}  // namespace detail

/// Eigenvalues from the characteristic polynomial in closed form. Complex
/// spectra are rejected.
inline CanonicalForm canonical_reduce(const CouplingMatrix& A) {
  CanonicalForm out;
  const Eigen::Matrix2d M = to_matrix(A);
  if (!M.allFinite()) throw SpecificationError("coupling matrix has non-finite entries");
  if (A.b == 0.0 && A.c == 0.0) {
    out.mu1 = A.a;
    out.mu2 = A.d;
    return out;
  }
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const double gap_tol = 1e-8 * scale;
  const double tr = A.a + A.d;
  const double det = A.a * A.d - A.b * A.c;
  const double disc = (A.a - A.d) * (A.a - A.d) + 4.0 * A.b * A.c;
  // Rounding in disc is of order eps * scale^2, which dominates gap_tol^2.
  const double disc_tol = gap_tol * gap_tol + 64.0 * std::numeric_limits<double>::epsilon() * scale * scale;
  if (disc < -disc_tol)
    throw UnsupportedError("coupling matrix has complex eigenvalues (discriminant " + format_number(disc) +
                           "); only real canonical forms are supported");
  const double s = std::sqrt(std::max(disc, 0.0));

  if (disc > disc_tol) {
    // Stable pair: the larger-magnitude root directly, the other from det.
    const double big = 0.5 * (tr + std::copysign(s, tr == 0.0 ? 1.0 : tr));
    const double small = big != 0.0 ? det / big : 0.5 * (tr - s);
    out.mu1 = std::max(big, small);
    out.mu2 = std::min(big, small);
    const Eigen::Vector2d v1 = detail::kernel_vector(M - out.mu1 * Eigen::Matrix2d::Identity());
    const Eigen::Vector2d v2 = detail::kernel_vector(M - out.mu2 * Eigen::Matrix2d::Identity());
    out.Q.col(0) = v1;
    out.Q.col(1) = v2;
    out.Q_inv = out.Q.inverse();
    if (s < 1e-6 * scale)
      out.warnings.push_back("eigenvalue gap " + format_number(s) + " is small; Q is ill-conditioned");
    return out;
  }

  const double lambda = 0.5 * tr;
  const Eigen::Matrix2d N = M - lambda * Eigen::Matrix2d::Identity();
  out.mu1 = out.mu2 = lambda;
  if (N.cwiseAbs().maxCoeff() <= gap_tol) {
    out.warnings.push_back("double eigenvalue with near-scalar matrix; treated as diagonal");
    return out;
  }
  out.kind = CanonicalForm::Kind::jordan;
  const int j = N.col(0).norm() >= N.col(1).norm() ? 0 : 1;
  const Eigen::Vector2d q2 = Eigen::Vector2d::Unit(j);
  out.Q.col(0) = N * q2;
  out.Q.col(1) = q2;
  out.Q_inv = out.Q.inverse();
  return out;
}

struct SystemClass {
  enum class Case { nonresonant, case_A, case_B, case_C };
  Case kind = Case::nonresonant;
  int k = 0;                  ///< resonant index (Dirichlet ordinal)
  int m = 0;                  ///< second resonant index (case B)
  double mu = 0.0;            ///< non-resonant eigenvalue (case A)
  int resonant_component = 0; ///< case A: canonical component (0 or 1) at lambda_k
};

inline std::string to_string(SystemClass::Case c) {
  switch (c) {
    case SystemClass::Case::nonresonant: return "nonresonant";
    case SystemClass::Case::case_A: return "case_A";
    case SystemClass::Case::case_B: return "case_B";
    case SystemClass::Case::case_C: return "case_C";
  }
  return "?";
}

inline std::string describe(const SystemClass& s) {
  switch (s.kind) {
    case SystemClass::Case::nonresonant: return "nonresonant";
    case SystemClass::Case::case_A:
      return "case_A(k=" + std::to_string(s.k) + ", mu=" + format_number(s.mu) + ")";
    case SystemClass::Case::case_B:
      return "case_B(k=" + std::to_string(s.k) + ", m=" + std::to_string(s.m) + ")";
    case SystemClass::Case::case_C: return "case_C(k=" + std::to_string(s.k) + ")";
  }
  return "?";
}

/// Matches the form's eigenvalues against the basis spectrum within group_tol.
/// Resonance at a multiple eigenvalue is outside the treated cases.
inline SystemClass classify_system(const CanonicalForm& form, const SpectralBasis& basis) {
  SystemClass out;
  auto simple_index = [&](std::size_t g) {
    if (!basis.group(g).simple())
      throw UnsupportedError("resonance at eigenvalue " + format_number(basis.group(g).value) +
                             " of multiplicity " + std::to_string(basis.group(g).size()) +
                             " is not a treated system case");
    return basis.index_for_group(g);
  };
  if (form.kind == CanonicalForm::Kind::jordan) {
    if (const auto g = basis.find_group(form.mu1)) {
      out.kind = SystemClass::Case::case_C;
      out.k = simple_index(*g);
    }
    return out;
  }
  const auto g1 = basis.find_group(form.mu1);
  const auto g2 = basis.find_group(form.mu2);
  if (g1 && g2) {
    out.kind = SystemClass::Case::case_B;
    out.k = simple_index(*g1);
    out.m = simple_index(*g2);
  } else if (g1 || g2) {
    out.kind = SystemClass::Case::case_A;
    out.resonant_component = g1 ? 0 : 1;
    out.k = simple_index(g1 ? *g1 : *g2);
    out.mu = g1 ? form.mu2 : form.mu1;
  }
  return out;
}

}  // namespace resonance
