#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "resonance/dispatch.hpp"

using namespace resonance;
using oracle::pi;

namespace {

ProblemSpec scalar(Family family, DomainKind kind, int modes, int index, Nonlinearity g) {
  ProblemSpec p;
  p.family = family;
  p.n_modes = modes;
  p.domain = make_domain(kind, modes);
  if (kind == DomainKind::circle)
    p.n = index;
  else
    p.k = index;
  p.g = std::move(g);
  return p;
}

SolveOptions options(Accel accel = Accel::anderson) {
  SolveOptions o;
  o.accel = accel;
  return o;
}

// u(t) from circle coefficients, written out from the closed-form basis.
double circle_value(const Eigen::VectorXd& c, double t) {
  double s = c(0) / std::sqrt(2 * pi);
  for (Eigen::Index n = 1; 2 * n < c.size(); ++n)
    s += (c(2 * n - 1) * std::cos(n * t) + c(2 * n) * std::sin(n * t)) / std::sqrt(pi);
  return s;
}

double circle_derivative(const Eigen::VectorXd& c, double t) {
  double s = 0.0;
  for (Eigen::Index n = 1; 2 * n < c.size(); ++n)
    s += n * (-c(2 * n - 1) * std::sin(n * t) + c(2 * n) * std::cos(n * t)) / std::sqrt(pi);
  return s;
}

// Group projections of N(u) as seen by the library, minus the forcing's.
double fixed_point_gap(const ProblemSpec& p, const SolveReport& r) {
  const SpectralBasis b = p.basis();
  const Eigen::VectorXd gn = scalar_term(p, b)(r.solution[0]);
  const Eigen::VectorXd f = p.forcing.vector(b);
  double worst = 0.0;
  for (std::size_t i : b.group(b.group_for_index(p.resonant_index())).members)
    worst = std::max(worst, std::abs(gn(static_cast<Eigen::Index>(i)) - f(static_cast<Eigen::Index>(i))));
  return worst;
}

}  // namespace

TEST(ScalarResonant, ZeroForcingGivesZeroSolution) {
  const ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 16, 1, Nonlinearity::arctan());
  const SolveReport r = solve(p, options());
  EXPECT_EQ(r.status, SolveStatus::converged);
  EXPECT_LT(l2_norm(r.solution[0]), 1e-8);
}

TEST(ScalarResonant, RecoversManufacturedSolution) {
  const int N = 16;
  ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, N, 1, Nonlinearity::arctan());
  // u* = 0.3 phi_2:  f = (lambda_1 - lambda_2) 0.3 phi_2 + band-limited arctan(u*).
  for (int j = 1; j <= N; ++j) {
    double c = oracle::integrate(
        [j](double x) { return std::atan(0.3 * oracle::phi_interval(2, x)) * oracle::phi_interval(j, x); }, 0.0, pi);
    if (j == 2) c += (1.0 - 4.0) * 0.3;
    if (std::abs(c) > 1e-15) p.forcing.coeffs[static_cast<std::size_t>(j - 1)] = c;
  }
  Eigen::VectorXd star = Eigen::VectorXd::Zero(N);
  star(1) = 0.3;
  EXPECT_LT(residual(p, {synthesize(p.basis(), star)}).l2, 1e-10);

  const SolveReport r = solve(p, options());
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_LT(r.residual_l2, 1e-8);
  EXPECT_LT(fixed_point_gap(p, r), 1e-8);
  EXPECT_LT((r.solution[0].coeffs - star).norm(), 1e-7);
}

TEST(ScalarResonant, ViolatedConditionIsGatedOrDrifts) {
  ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 64, 1,
                         Nonlinearity::tanh().with_thresholds({-1.5, 1.5, -0.9, 0.9}));
  p.forcing.coeffs[0] = 2.0;
  ASSERT_GT(2.0 - check_scalar_condition(p).quantity("L2"), 0.1);

  SolveOptions gated = options(Accel::none);
  gated.gate = true;
  const SolveReport g = solve(p, gated);
  EXPECT_EQ(g.status, SolveStatus::condition_violated);
  EXPECT_EQ(g.iterations, 0);

  const SolveReport r = solve(p, options(Accel::none));
  EXPECT_EQ(r.status, SolveStatus::diverged);
  EXPECT_EQ(r.stop_reason, "monotone drift of xi");
  const auto& h = r.state.history;
  ASSERT_GT(h.size(), static_cast<std::size_t>(drift_burn_in + drift_window));
  for (std::size_t i = drift_burn_in + 1; i < h.size(); ++i) EXPECT_GT(h[i].xi(0), h[i - 1].xi(0)) << i;
}

TEST(ScalarResonant, ConvergedRunsSatisfyTheKernelEquation) {
  ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 32, 2,
                         Nonlinearity::tanh().with_thresholds({-1.5, 1.5, -0.9, 0.9}));
  p.forcing.coeffs = {{0, 0.4}, {1, 0.5}, {3, -0.2}};
  const SolveReport r = solve(p, options());
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_LE(r.residual_l2, 1e-8);
  EXPECT_LE(fixed_point_gap(p, r), 10 * 1e-8);
}

TEST(ScalarResonant, ComplementStaysOrthogonalAtEveryIteration) {
  ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 16, 2, Nonlinearity::arctan());
  p.forcing.coeffs = {{0, 1.0}, {1, 0.3}};
  for (int it = 1; it <= 6; ++it) {
    SolveOptions o = options();
    o.max_iter = it;
    o.tol = 1e-300;
    const SolveReport r = solve(p, o);
    EXPECT_EQ(r.state.U[0].coeffs(1), 0.0);
    EXPECT_LT(std::abs(r.state.U[0].coeffs(1)), 1e-10);
    ASSERT_EQ(r.state.xi.size(), 1);
    EXPECT_EQ(r.state.xi(0), r.solution[0].coeffs(1));
  }
}

TEST(ScalarResonant, DeterministicTraces) {
  ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 16, 1, Nonlinearity::arctan());
  p.forcing.coeffs = {{0, 0.5}, {2, 0.1}};
  const SolveReport a = solve(p, options());
  const SolveReport b = solve(p, options());
  ASSERT_EQ(a.state.history.size(), b.state.history.size());
  for (std::size_t i = 0; i < a.state.history.size(); ++i) EXPECT_EQ(a.state.history[i].residual, b.state.history[i].residual);
  EXPECT_EQ(a.solution[0].coeffs, b.solution[0].coeffs);
}

TEST(ScalarResonant, MaxIterationsIsReported) {
  ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 16, 1, Nonlinearity::arctan());
  p.forcing.coeffs = {{0, 0.5}, {2, 0.1}};
  SolveOptions o = options();
  o.max_iter = 2;
  const SolveReport r = solve(p, o);
  EXPECT_EQ(r.status, SolveStatus::max_iter);
  EXPECT_EQ(r.iterations, 2);
}

TEST(ScalarResonant, OptionsAreValidated) {
  const ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 8, 1, Nonlinearity::arctan());
  SolveOptions o;
  o.relax = 0.0;
  EXPECT_THROW(solve(p, o), ConfigurationError);
  o = SolveOptions{};
  o.tol = -1.0;
  EXPECT_THROW(solve(p, o), ConfigurationError);
  o = SolveOptions{};
  o.init = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(solve(p, o), DimensionError);
}

TEST(ScalarResonant, WarmStartFromSolutionConvergesImmediately) {
  ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 16, 1, Nonlinearity::arctan());
  p.forcing.coeffs = {{0, 0.5}, {2, 0.1}};
  const SolveReport a = solve(p, options());
  ASSERT_EQ(a.status, SolveStatus::converged);
  SolveOptions o = options();
  o.init = a.solution[0].coeffs;
  const SolveReport b = solve(p, o);
  EXPECT_EQ(b.status, SolveStatus::converged);
  EXPECT_LE(b.iterations, 1);
}

TEST(MultiResonant, ZeroForcingOnSquareGroup) {
  const ProblemSpec p = scalar(Family::scalar_multi, DomainKind::square, 8, 2, Nonlinearity::arctan());
  const SolveReport r = solve(p, options());
  EXPECT_EQ(r.status, SolveStatus::converged);
  EXPECT_LT(l2_norm(r.solution[0]), 1e-8);
}

TEST(MultiResonant, SquareGroupWithComplementForcing) {
  ProblemSpec p = scalar(Family::scalar_multi, DomainKind::square, 32, 2, Nonlinearity::arctan());
  const SpectralBasis b = p.basis();
  ASSERT_EQ(b.group(b.group_for_index(2)).value, 5.0);
  p.forcing.coeffs = {{*b.mode_from_label("1,2"), 0.4}, {*b.mode_from_label("2,1"), 0.2}, {*b.mode_from_label("1,1"), 1.0}};
  const SolveReport r = solve(p, options());
  ASSERT_EQ(r.conditions.size(), 1u);
  EXPECT_EQ(r.conditions[0].verdict, Verdict::holds);
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_LT(r.residual_l2, 1e-8);
  EXPECT_EQ(r.state.xi.size(), 2);
  EXPECT_LE(fixed_point_gap(p, r), 10 * 1e-8);
}

TEST(MultiResonant, SingleMemberGroupMatchesScalarSolver) {
  const Nonlinearity g = Nonlinearity::tanh().with_thresholds({-1.5, 1.5, -0.9, 0.9});
  ProblemSpec a = scalar(Family::scalar_resonant, DomainKind::interval, 16, 2, g);
  a.forcing.coeffs = {{0, 0.3}, {1, 0.2}};
  ProblemSpec m = a;
  m.family = Family::scalar_multi;
  const SolveReport ra = solve(a, options());
  const SolveReport rm = solve(m, options());
  ASSERT_EQ(ra.state.history.size(), rm.state.history.size());
  for (std::size_t i = 0; i < ra.state.history.size(); ++i)
    EXPECT_NEAR(ra.state.history[i].xi(0), rm.state.history[i].xi(0), 1e-12);
  EXPECT_LT((ra.solution[0].coeffs - rm.solution[0].coeffs).norm(), 1e-12);
}

TEST(Periodic, ZeroForcing) {
  const ProblemSpec p = scalar(Family::periodic_LL, DomainKind::circle, 16, 1, Nonlinearity::arctan());
  const SolveReport r = solve(p, options());
  EXPECT_EQ(r.status, SolveStatus::converged);
  EXPECT_LT(l2_norm(r.solution[0]), 1e-8);
}

TEST(Periodic, LazerLeachCosineForcing) {
  ProblemSpec p = scalar(Family::periodic_LL, DomainKind::circle, 64, 2, Nonlinearity::arctan());
  ASSERT_EQ(p.domain.grid_size, 256);
  const SpectralBasis b = p.basis();
  p.forcing.coeffs[*b.mode_from_label("c2")] = std::sqrt(pi);  // cos 2t
  const SolveReport r = solve(p, options());
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_LT(r.residual_l2, 1e-8);
  ASSERT_EQ(r.state.xi.size(), 2);

  // int g(u) cos 2t = A and int g(u) sin 2t = B, by quadrature of the explicit series.
  const Eigen::VectorXd c = r.solution[0].coeffs;
  const double gc = oracle::integrate_panels([&](double t) { return std::atan(circle_value(c, t)) * std::cos(2 * t); },
                                             0.0, 2 * pi, 16);
  const double gs = oracle::integrate_panels([&](double t) { return std::atan(circle_value(c, t)) * std::sin(2 * t); },
                                             0.0, 2 * pi, 16);
  EXPECT_NEAR(gc, pi, 1e-7);
  EXPECT_NEAR(gs, 0.0, 1e-7);
}

TEST(Periodic, DampedOscillator) {
  ProblemSpec p = scalar(Family::periodic_damped, DomainKind::circle, 32, 1, Nonlinearity::rational());
  const SpectralBasis b = p.basis();
  p.forcing.coeffs[*b.mode_from_label("c1")] = std::sqrt(pi);  // cos t
  const SolveReport r = solve(p, options());
  ASSERT_EQ(r.conditions.at(0).id, ConditionId::KormanLi);
  EXPECT_EQ(r.conditions.at(0).verdict, Verdict::holds);
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_LE(r.residual_l2, 1e-7);

  // u'' + u'/(1+u^2) + u - cos t at off-grid points from the explicit series.
  const Eigen::VectorXd c = r.solution[0].coeffs;
  double worst = 0.0;
  for (int i = 0; i < 97; ++i) {
    const double t = 2 * pi * (i + 0.37) / 97;
    double upp = 0.0;
    for (Eigen::Index n = 1; 2 * n < c.size(); ++n)
      upp -= n * n * (c(2 * n - 1) * std::cos(n * t) + c(2 * n) * std::sin(n * t)) / std::sqrt(pi);
    const double u = circle_value(c, t);
    worst = std::max(worst, std::abs(upp + circle_derivative(c, t) / (1 + u * u) + u - std::cos(t)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Periodic, OrthogonalForcingVariant) {
  Nonlinearity g = Nonlinearity::arctan();
  ProblemSpec p = scalar(Family::periodic_FN, DomainKind::circle, 32, 1, g);
  const SpectralBasis b = p.basis();
  p.forcing.coeffs = {{*b.mode_from_label("c2"), 1.0}, {*b.mode_from_label("s3"), -0.5}};
  const SolveReport r = solve(p, options());
  EXPECT_EQ(r.conditions.at(0).verdict, Verdict::holds);
  ASSERT_EQ(r.status, SolveStatus::converged);
  EXPECT_LT(r.residual_l2, 1e-8);
}

TEST(Residual, ZeroCandidateOnHomogeneousProblem) {
  for (const ProblemSpec& p :
       {scalar(Family::scalar_resonant, DomainKind::interval, 8, 1, Nonlinearity::arctan()),
        scalar(Family::periodic_damped, DomainKind::circle, 8, 2, Nonlinearity::rational())}) {
    const ResidualNorms n = residual(p, {zero_field(p.basis())});
    EXPECT_LT(n.l2, 1e-14);
    EXPECT_LT(n.sup, 1e-14);
  }
}

TEST(Residual, ReportedValueMatchesRecomputation) {
  ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 16, 1, Nonlinearity::arctan());
  p.forcing.coeffs = {{0, 0.5}, {2, 0.1}};
  const SolveReport r = solve(p, options());
  const ResidualNorms n = residual(p, r.solution);
  EXPECT_NEAR(n.l2, r.residual_l2, 1e-12);
  EXPECT_NEAR(n.sup, r.residual_sup, 1e-12);
}

TEST(Residual, ArityMismatch) {
  const ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 8, 1, Nonlinearity::arctan());
  const Field z = zero_field(p.basis());
  EXPECT_THROW(residual(p, {z, z}), DimensionError);
  EXPECT_THROW(residual(p, {}), DimensionError);
}

TEST(MeshConsistency, DoublingTheGridKeepsTheSolution) {
  const double tol = 1e-8;
  std::vector<ProblemSpec> gallery;
  {
    ProblemSpec p = scalar(Family::scalar_resonant, DomainKind::interval, 16, 1, Nonlinearity::arctan());
    p.forcing.coeffs = {{0, 0.5}, {2, 0.1}};
    gallery.push_back(p);
  }
  {
    ProblemSpec p = scalar(Family::periodic_LL, DomainKind::circle, 16, 2, Nonlinearity::arctan());
    p.forcing.coeffs = {{3, std::sqrt(pi)}, {1, 0.2}};
    gallery.push_back(p);
  }
  {
    ProblemSpec p = scalar(Family::scalar_multi, DomainKind::square, 8, 2, Nonlinearity::arctan());
    p.forcing.coeffs = {{0, 1.0}, {1, 0.4}};
    gallery.push_back(p);
  }
  for (const ProblemSpec& p : gallery) {
    ProblemSpec fine = p;
    fine.domain.grid_size *= 2;
    const SolveReport a = solve(p, options());
    const SolveReport b = solve(fine, options());
    ASSERT_EQ(a.status, SolveStatus::converged) << to_string(p.family);
    ASSERT_EQ(b.status, SolveStatus::converged) << to_string(p.family);
    EXPECT_LT((a.solution[0].coeffs - b.solution[0].coeffs).norm(), 10 * tol) << to_string(p.family);
  }
}
