#pragma once

// Closed-form eigenbases of -Laplace on the interval (0,pi), the square
// (0,pi)^2 (Dirichlet) and the 2pi-periodic circle, with quadrature-based
// transforms, kernel projections and Fredholm resolvent solves.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace resonance {

/// Two eigenvalues closer than this share one group.
inline constexpr double group_tol = 1e-9;
/// Fredholm precondition: |<f,phi_i>| <= ortho_rel_tol * ||f||.
inline constexpr double ortho_rel_tol = 1e-8;
/// Minimum grid points per mode and dimension.
inline constexpr int oversampling = 4;

enum class DomainKind { interval, square, circle };

inline std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::square: return "square";
    case DomainKind::circle: return "circle";
  }
  return "?";
}

inline std::optional<DomainKind> parse_domain_kind(const std::string& s) {
  if (s == "interval") return DomainKind::interval;
  if (s == "square") return DomainKind::square;
  if (s == "circle") return DomainKind::circle;
  return std::nullopt;
}

struct Domain {
  DomainKind kind = DomainKind::interval;
  int grid_size = 0;  ///< points per dimension
  bool operator==(const Domain&) const = default;
};

enum class ModeKind { sine, sine_product, constant, cosine, sine_periodic };

/// One eigenfunction. Interval: sqrt(2/pi) sin(i x). Square: (2/pi) sin(i x) sin(j y).
/// Circle: 1/sqrt(2pi), cos(i t)/sqrt(pi), sin(i t)/sqrt(pi).
struct Mode {
  ModeKind kind = ModeKind::sine;
  int i = 0;
  int j = 0;
  double eigenvalue = 0.0;
};

inline std::string mode_label(const Mode& m) {
  switch (m.kind) {
    case ModeKind::sine: return std::to_string(m.i);
    case ModeKind::sine_product: return std::to_string(m.i) + "," + std::to_string(m.j);
    case ModeKind::constant: return "c0";
    case ModeKind::cosine: return "c" + std::to_string(m.i);
    case ModeKind::sine_periodic: return "s" + std::to_string(m.i);
  }
  return "?";
}

/// L2 norm of the un-normalized trigonometric function behind a mode
/// (sin kx, sin jx sin ly, 1, cos nt, sin nt).
inline double trig_norm(const Mode& m) {
  using std::numbers::pi;
  switch (m.kind) {
    case ModeKind::sine: return std::sqrt(pi / 2.0);
    case ModeKind::sine_product: return pi / 2.0;
    case ModeKind::constant: return std::sqrt(2.0 * pi);
    case ModeKind::cosine:
    case ModeKind::sine_periodic: return std::sqrt(pi);
  }
  return 1.0;
}

struct EigenGroup {
  double value = 0.0;
  std::vector<std::size_t> members;  ///< ascending mode indices

  std::size_t size() const noexcept { return members.size(); }
  bool simple() const noexcept { return members.size() == 1; }
  bool contains(std::size_t mode) const {
    return std::find(members.begin(), members.end(), mode) != members.end();
  }
};

/// Coefficients in the eigenbasis plus the matching samples on the grid.
struct Field {
  Eigen::VectorXd coeffs;
  Eigen::VectorXd samples;
};

class SpectralBasis {
 public:
  SpectralBasis(Domain domain, int n_modes) : domain_(domain), per_dim_(n_modes) {
    if (n_modes < 1) throw ConfigurationError("n_modes must be >= 1");
    if (domain.grid_size < oversampling * n_modes)
      throw ConfigurationError("grid_size " + std::to_string(domain.grid_size) + " < " +
                               std::to_string(oversampling) + " x n_modes (" +
                               std::to_string(n_modes) + ")");
    build();
  }

  const Domain& domain() const noexcept { return domain_; }
  DomainKind kind() const noexcept { return domain_.kind; }
  int dimension() const noexcept { return domain_.kind == DomainKind::square ? 2 : 1; }
  /// The mode parameter (per dimension; n_max on the circle).
  int modes_parameter() const noexcept { return per_dim_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(modes_.size()); }
  Eigen::Index grid_points() const noexcept { return weights_.size(); }
  int grid_size() const noexcept { return domain_.grid_size; }

  std::span<const Mode> modes() const noexcept { return modes_; }
  const Mode& mode(std::size_t i) const { return modes_.at(i); }
  std::span<const EigenGroup> groups() const noexcept { return groups_; }
  const EigenGroup& group(std::size_t g) const { return groups_.at(g); }
  const Eigen::VectorXd& quad_weights() const noexcept { return weights_; }
  /// One-dimensional node coordinates (the square grid is their tensor product).
  const Eigen::VectorXd& nodes() const noexcept { return nodes_; }

  /// Coordinates of grid node `p` (x, and y on the square).
  std::pair<double, double> node(Eigen::Index p) const {
    if (domain_.kind == DomainKind::square) {
      const Eigen::Index m = domain_.grid_size;
      return {nodes_(p / m), nodes_(p % m)};
    }
    return {nodes_(p), 0.0};
  }

  std::optional<std::size_t> find_group(double lambda) const {
    for (std::size_t g = 0; g < groups_.size(); ++g)
      if (std::abs(groups_[g].value - lambda) < group_tol) return g;
    return std::nullopt;
  }

  /// Group addressed by a problem index: the k-th distinct Dirichlet eigenvalue
  /// (1-based) or, on the circle, the oscillator frequency n (eigenvalue n^2).
  std::size_t group_for_index(int index) const {
    if (domain_.kind == DomainKind::circle) {
      if (index < 0 || index > per_dim_)
        throw ConfigurationError("circle frequency n=" + std::to_string(index) + " outside 0.." +
                                 std::to_string(per_dim_));
      return static_cast<std::size_t>(index);
    }
    if (index < 1 || static_cast<std::size_t>(index) > groups_.size())
      throw ConfigurationError("eigenvalue index k=" + std::to_string(index) + " outside 1.." +
                               std::to_string(groups_.size()));
    return static_cast<std::size_t>(index - 1);
  }

  int index_for_group(std::size_t g) const {
    if (domain_.kind == DomainKind::circle) return static_cast<int>(g);
    return static_cast<int>(g) + 1;
  }

  /// Index of a mode from its label ("3", "1,2", "c0", "c2", "s2").
  std::optional<std::size_t> mode_from_label(const std::string& label) const {
    for (std::size_t i = 0; i < modes_.size(); ++i)
      if (mode_label(modes_[i]) == label) return i;
    return std::nullopt;
  }

  /// Value of eigenfunction `index` at an arbitrary point.
  double eval_mode(std::size_t index, double x, double y = 0.0) const {
    using std::numbers::pi;
    const Mode& m = modes_.at(index);
    switch (m.kind) {
      case ModeKind::sine: return std::sqrt(2.0 / pi) * std::sin(m.i * x);
      case ModeKind::sine_product: return (2.0 / pi) * std::sin(m.i * x) * std::sin(m.j * y);
      case ModeKind::constant: return 1.0 / std::sqrt(2.0 * pi);
      case ModeKind::cosine: return std::cos(m.i * x) / std::sqrt(pi);
      case ModeKind::sine_periodic: return std::sin(m.i * x) / std::sqrt(pi);
    }
    return 0.0;
  }

  Eigen::VectorXd to_samples(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != size())
      throw DimensionError("coefficient vector has length " + std::to_string(coeffs.size()) +
                           ", basis has " + std::to_string(size()) + " modes");
    if (domain_.kind == DomainKind::square) {
      const Eigen::Index n = per_dim_, m = domain_.grid_size;
      Eigen::Map<const RowMatrix> c(coeffs.data(), n, n);
      Eigen::VectorXd out(m * m);
      Eigen::Map<RowMatrix> s(out.data(), m, m);
      s.noalias() = table_.transpose() * c * table_;
      return out;
    }
    return table_.transpose() * coeffs;
  }

  Eigen::VectorXd to_coeffs(const Eigen::VectorXd& samples) const {
    if (samples.size() != grid_points())
      throw DimensionError("sample vector has length " + std::to_string(samples.size()) +
                           ", grid has " + std::to_string(grid_points()) + " nodes");
    if (domain_.kind == DomainKind::square) {
      const Eigen::Index n = per_dim_, m = domain_.grid_size;
      const double h = nodes_weight_;
      Eigen::Map<const RowMatrix> s(samples.data(), m, m);
      Eigen::VectorXd out(n * n);
      Eigen::Map<RowMatrix> c(out.data(), n, n);
      c.noalias() = (h * h) * (table_ * s * table_.transpose());
      return out;
    }
    return nodes_weight_ * (table_ * samples);
  }

  /// Samples of du/dx (du/dt) for a field given by coefficients.
  Eigen::VectorXd derivative_samples(const Eigen::VectorXd& coeffs) const {
    if (coeffs.size() != size()) throw DimensionError("coefficient length mismatch in derivative");
    switch (domain_.kind) {
      case DomainKind::interval: return dtable_.transpose() * coeffs;
      case DomainKind::circle: {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(size());
        for (int n = 1; n <= per_dim_; ++n) {
          d(2 * n - 1) = n * coeffs(2 * n);
          d(2 * n) = -n * coeffs(2 * n - 1);
        }
        return to_samples(d);
      }
      case DomainKind::square: break;
    }
    throw UnsupportedError("spectral derivative is only provided in one dimension");
  }

 private:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  void build() {
    using std::numbers::pi;
    const int m = domain_.grid_size;
    const int n = per_dim_;
    nodes_.resize(m);
    switch (domain_.kind) {
      case DomainKind::interval:
      case DomainKind::square: {
        nodes_weight_ = pi / m;
        for (int p = 0; p < m; ++p) nodes_(p) = (p + 0.5) * pi / m;
        table_.resize(n, m);
        for (int k = 1; k <= n; ++k)
          for (int p = 0; p < m; ++p) table_(k - 1, p) = std::sqrt(2.0 / pi) * std::sin(k * nodes_(p));
        if (domain_.kind == DomainKind::interval) {
          dtable_.resize(n, m);
          for (int k = 1; k <= n; ++k)
            for (int p = 0; p < m; ++p)
              dtable_(k - 1, p) = std::sqrt(2.0 / pi) * k * std::cos(k * nodes_(p));
          for (int k = 1; k <= n; ++k)
            modes_.push_back({ModeKind::sine, k, 0, static_cast<double>(k) * k});
          weights_ = Eigen::VectorXd::Constant(m, nodes_weight_);
        } else {
          for (int j = 1; j <= n; ++j)
            for (int l = 1; l <= n; ++l)
              modes_.push_back({ModeKind::sine_product, j, l, static_cast<double>(j * j + l * l)});
          weights_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m) * m,
                                               nodes_weight_ * nodes_weight_);
        }
        break;
      }
      case DomainKind::circle: {
        nodes_weight_ = 2.0 * pi / m;
        for (int p = 0; p < m; ++p) nodes_(p) = 2.0 * pi * p / m;
        table_.resize(2 * n + 1, m);
        modes_.push_back({ModeKind::constant, 0, 0, 0.0});
        for (int p = 0; p < m; ++p) table_(0, p) = 1.0 / std::sqrt(2.0 * pi);
        for (int k = 1; k <= n; ++k) {
          modes_.push_back({ModeKind::cosine, k, 0, static_cast<double>(k) * k});
          modes_.push_back({ModeKind::sine_periodic, k, 0, static_cast<double>(k) * k});
          for (int p = 0; p < m; ++p) {
            table_(2 * k - 1, p) = std::cos(k * nodes_(p)) / std::sqrt(pi);
            table_(2 * k, p) = std::sin(k * nodes_(p)) / std::sqrt(pi);
          }
        }
        weights_ = Eigen::VectorXd::Constant(m, nodes_weight_);
        break;
      }
    }

    std::vector<std::size_t> order(modes_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return modes_[a].eigenvalue < modes_[b].eigenvalue;
    });
    for (std::size_t idx : order) {
      const double lambda = modes_[idx].eigenvalue;
      if (!groups_.empty() && std::abs(groups_.back().value - lambda) < group_tol)
        groups_.back().members.push_back(idx);
      else
        groups_.push_back({lambda, {idx}});
    }
    for (auto& g : groups_) std::sort(g.members.begin(), g.members.end());
  }

  Domain domain_;
  int per_dim_;
  double nodes_weight_ = 0.0;
  std::vector<Mode> modes_;
  std::vector<EigenGroup> groups_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd table_;
  Eigen::MatrixXd dtable_;
};

inline SpectralBasis build_basis(const Domain& domain, int n_modes) { return {domain, n_modes}; }

/// Default grid for a mode count: exactly the oversampling rule.
inline Domain make_domain(DomainKind kind, int n_modes) { return {kind, oversampling * n_modes}; }

inline Field synthesize(const SpectralBasis& basis, const Eigen::VectorXd& coeffs) {
  return {coeffs, basis.to_samples(coeffs)};
}

/// Projects samples onto the basis; the returned samples are the band-limited
/// reconstruction so that coeffs and samples stay consistent.
inline Field analyze(const SpectralBasis& basis, const Eigen::VectorXd& samples) {
  Eigen::VectorXd c = basis.to_coeffs(samples);
  return synthesize(basis, c);
}

inline Field zero_field(const SpectralBasis& basis) {
  return {Eigen::VectorXd::Zero(basis.size()), Eigen::VectorXd::Zero(basis.grid_points())};
}

inline double l2_norm(const Field& f) { return f.coeffs.norm(); }

inline double sup_norm(const Field& f) {
  return f.samples.size() == 0 ? 0.0 : f.samples.cwiseAbs().maxCoeff();
}

/// Quadrature L2 norm of the samples.
inline double quadrature_l2(const SpectralBasis& basis, const Eigen::VectorXd& samples) {
  return std::sqrt(basis.quad_weights().dot(samples.cwiseProduct(samples)));
}

struct Projection {
  Eigen::VectorXd in_group;  ///< one coefficient per group member
  Field complement;
};

inline Projection project(const SpectralBasis& basis, const Field& field, std::size_t group_index) {
  const EigenGroup& g = basis.group(group_index);
  if (field.coeffs.size() != basis.size()) throw DimensionError("field does not match basis");
  Projection out;
  out.in_group.resize(static_cast<Eigen::Index>(g.size()));
  Eigen::VectorXd rest = field.coeffs;
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.in_group(static_cast<Eigen::Index>(i)) = field.coeffs(static_cast<Eigen::Index>(g.members[i]));
    rest(static_cast<Eigen::Index>(g.members[i])) = 0.0;
  }
  out.complement = synthesize(basis, rest);
  return out;
}

/// Zeroes the coefficients of a group in place.
inline void remove_group(Eigen::VectorXd& coeffs, const EigenGroup& g) {
  for (std::size_t i : g.members) coeffs(static_cast<Eigen::Index>(i)) = 0.0;
}

/// Mode-wise solve of (Laplace + shift) u = f in coefficients. At a resonant
/// shift the forcing must be orthogonal to the group, and the returned u is the
/// representative with zero group coefficients.
inline Eigen::VectorXd resolvent_coeffs(const SpectralBasis& basis, double shift,
                                        const Eigen::VectorXd& f,
                                        std::optional<std::size_t> orthogonal_to = std::nullopt) {
  if (f.size() != basis.size()) throw DimensionError("forcing does not match basis");
  const auto resonant = basis.find_group(shift);
  if (resonant) {
    if (!orthogonal_to || *orthogonal_to != *resonant)
      throw ConfigurationError("shift " + std::to_string(shift) +
                               " is resonant; orthogonal_to must name group " +
                               std::to_string(*resonant));
    const double tol = ortho_rel_tol * f.norm();
    double worst = 0.0;
    for (std::size_t i : basis.group(*resonant).members)
      worst = std::max(worst, std::abs(f(static_cast<Eigen::Index>(i))));
    if (worst > tol) throw NonOrthogonalForcing(*resonant, worst, tol);
  } else if (orthogonal_to) {
    throw ConfigurationError("orthogonal_to given for a non-resonant shift");
  }
  Eigen::VectorXd u(f.size());
  const auto modes = basis.modes();
  for (Eigen::Index n = 0; n < f.size(); ++n) {
    const double lambda_n = modes[static_cast<std::size_t>(n)].eigenvalue;
    if (resonant && basis.group(*resonant).contains(static_cast<std::size_t>(n)))
      u(n) = 0.0;
    else
      u(n) = f(n) / (shift - lambda_n);
  }
  return u;
}

inline Field resolvent_solve(const SpectralBasis& basis, double shift, const Field& f,
                             std::optional<std::size_t> orthogonal_to = std::nullopt) {
  return synthesize(basis, resolvent_coeffs(basis, shift, f.coeffs, orthogonal_to));
}

/// (Laplace + shift) applied mode-wise.
inline Eigen::VectorXd apply_shifted_laplacian(const SpectralBasis& basis, double shift,
                                               const Eigen::VectorXd& u) {
  Eigen::VectorXd out(u.size());
  const auto modes = basis.modes();
  for (Eigen::Index n = 0; n < u.size(); ++n)
    out(n) = (shift - modes[static_cast<std::size_t>(n)].eigenvalue) * u(n);
  return out;
}

namespace detail {

inline void require_finite(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v(i)))
      throw EvaluationError(std::string(what) + " is not finite at grid node " + std::to_string(i));
}

}  // namespace detail

/// Applies `map` nodewise to the samples of `u` and projects back to the basis.
template <class Map>
  requires std::invocable<const Map&, double>
Field apply_pointwise(const SpectralBasis& basis, const Map& map, const Field& u) {
  if (u.samples.size() != basis.grid_points()) throw DimensionError("field samples do not match grid");
  Eigen::VectorXd out(u.samples.size());
  for (Eigen::Index p = 0; p < out.size(); ++p) out(p) = map(u.samples(p));
  detail::require_finite(out, "pointwise map");
  return analyze(basis, out);
}

template <class Map>
  requires std::invocable<const Map&, double, double>
Field apply_pointwise(const SpectralBasis& basis, const Map& map, const Field& u, const Field& v) {
  if (u.samples.size() != basis.grid_points() || v.samples.size() != basis.grid_points())
    throw DimensionError("field samples do not match grid");
  Eigen::VectorXd out(u.samples.size());
  for (Eigen::Index p = 0; p < out.size(); ++p) out(p) = map(u.samples(p), v.samples(p));
  detail::require_finite(out, "pointwise map");
  return analyze(basis, out);
}

/// Applies map(u, u') nodewise; u' is the spectral derivative of u.
template <class Map>
  requires std::invocable<const Map&, double, double>
Field apply_with_derivative(const SpectralBasis& basis, const Map& map, const Field& u) {
  const Eigen::VectorXd du = basis.derivative_samples(u.coeffs);
  Eigen::VectorXd out(u.samples.size());
  for (Eigen::Index p = 0; p < out.size(); ++p) out(p) = map(u.samples(p), du(p));
  detail::require_finite(out, "pointwise map");
  return analyze(basis, out);
}

}  // namespace resonance
