#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "resonance/quadrature.hpp"
#include "resonance/spectral.hpp"

using namespace resonance;
using oracle::pi;

namespace {

SpectralBasis interval(int n) { return build_basis(make_domain(DomainKind::interval, n), n); }
SpectralBasis square(int n) { return build_basis(make_domain(DomainKind::square, n), n); }
SpectralBasis circle(int n) { return build_basis(make_domain(DomainKind::circle, n), n); }

Eigen::VectorXd unit(const SpectralBasis& b, Eigen::Index i) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(b.size());
  c(i) = 1.0;
  return c;
}

}  // namespace

TEST(BuildBasis, IntervalSpectrumIsSquaresWithSingletonGroups) {
  const SpectralBasis b = interval(8);
  ASSERT_EQ(b.groups().size(), 8u);
  for (int k = 1; k <= 8; ++k) {
    EXPECT_DOUBLE_EQ(b.group(k - 1).value, k * k);
    EXPECT_TRUE(b.group(k - 1).simple());
  }
}

TEST(BuildBasis, CircleGroupsArePairsAfterTheConstantMode) {
  const SpectralBasis b = circle(3);
  ASSERT_EQ(b.groups().size(), 4u);
  EXPECT_DOUBLE_EQ(b.group(0).value, 0.0);
  EXPECT_EQ(b.group(0).size(), 1u);
  for (int n = 1; n <= 3; ++n) {
    EXPECT_DOUBLE_EQ(b.group(n).value, n * n);
    ASSERT_EQ(b.group(n).size(), 2u);
    EXPECT_EQ(mode_label(b.mode(b.group(n).members[0])), "c" + std::to_string(n));
    EXPECT_EQ(mode_label(b.mode(b.group(n).members[1])), "s" + std::to_string(n));
  }
}

TEST(BuildBasis, SquareGroupAtFiveHasBothProducts) {
  const SpectralBasis b = square(4);
  const auto g = b.find_group(5.0);
  ASSERT_TRUE(g);
  ASSERT_EQ(b.group(*g).size(), 2u);
  EXPECT_EQ(mode_label(b.mode(b.group(*g).members[0])), "1,2");
  EXPECT_EQ(mode_label(b.mode(b.group(*g).members[1])), "2,1");
  // Groups ascend and the triple eigenvalue 50 = 1+49 = 49+1 = 25+25 appears with enough modes.
  for (std::size_t i = 1; i < b.groups().size(); ++i) EXPECT_LT(b.group(i - 1).value, b.group(i).value);
  const SpectralBasis big = square(7);
  ASSERT_TRUE(big.find_group(50.0));
  EXPECT_EQ(big.group(*big.find_group(50.0)).size(), 3u);
}

TEST(BuildBasis, RejectsUndersampledGridAndZeroModes) {
  EXPECT_THROW(build_basis({DomainKind::interval, 31}, 8), ConfigurationError);
  EXPECT_THROW(build_basis({DomainKind::interval, 32}, 0), ConfigurationError);
  EXPECT_NO_THROW(build_basis({DomainKind::interval, 32}, 8));
}

TEST(BuildBasis, GroupsRespectTolerance) {
  const SpectralBasis b = interval(4);
  EXPECT_TRUE(b.find_group(4.0 + 0.5e-9));
  EXPECT_FALSE(b.find_group(4.0 + 2e-9));
}

TEST(Orthonormality, QuadratureGramMatrixIsIdentity) {
  for (const SpectralBasis& b : {interval(16), square(6), circle(12)}) {
    Eigen::MatrixXd S(b.grid_points(), b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) S.col(i) = b.to_samples(unit(b, i));
    const Eigen::MatrixXd G = S.transpose() * b.quad_weights().asDiagonal() * S;
    EXPECT_LT((G - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff(), 1e-12)
        << to_string(b.kind());
  }
}

TEST(Orthonormality, EigenfunctionsMatchClosedForms) {
  const SpectralBasis b = interval(8);
  const Field f = synthesize(b, unit(b, 1));
  double err = 0.0;
  for (Eigen::Index p = 0; p < b.grid_points(); ++p)
    err = std::max(err, std::abs(f.samples(p) - oracle::phi_interval(2, b.node(p).first)));
  EXPECT_LT(err, 1e-12);

  const SpectralBasis s = square(4);
  const std::size_t i = *s.mode_from_label("2,3");
  const Field g = synthesize(s, unit(s, static_cast<Eigen::Index>(i)));
  err = 0.0;
  for (Eigen::Index p = 0; p < s.grid_points(); ++p) {
    const auto [x, y] = s.node(p);
    err = std::max(err, std::abs(g.samples(p) - oracle::phi_square(2, 3, x, y)));
  }
  EXPECT_LT(err, 1e-12);
}

TEST(Transforms, AnalyzeSineGivesFirstUnitVector) {
  const SpectralBasis b = interval(16);
  Eigen::VectorXd s(b.grid_points());
  for (Eigen::Index p = 0; p < s.size(); ++p) s(p) = std::sqrt(2.0 / pi) * std::sin(b.node(p).first);
  const Field f = analyze(b, s);
  EXPECT_NEAR(f.coeffs(0), 1.0, 1e-13);
  EXPECT_LT(f.coeffs.tail(f.coeffs.size() - 1).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Transforms, ProductToSumGivesExactlyModesOneAndThree) {
  const SpectralBasis b = interval(16);
  Eigen::VectorXd s(b.grid_points());
  for (Eigen::Index p = 0; p < s.size(); ++p) s(p) = std::sin(2.0 * b.node(p).first) * std::cos(b.node(p).first);
  const Field f = analyze(b, s);
  for (int k = 1; k <= 16; ++k) {
    const double ref = oracle::integrate(
        [k](double x) { return std::sin(2 * x) * std::cos(x) * oracle::phi_interval(k, x); }, 0.0, pi);
    EXPECT_NEAR(f.coeffs(k - 1), ref, 1e-13) << "mode " << k;
    if (k == 1 || k == 3)
      EXPECT_NEAR(ref, 0.5 * std::sqrt(pi / 2.0), 1e-13);
    else
      EXPECT_NEAR(ref, 0.0, 1e-13);
  }
}

TEST(Transforms, ProductOfSinesLivesOnEvenModes) {
  // sin x sin 2x = (cos x - cos 3x)/2 is not a finite sine sum: its sine
  // coefficients vanish on odd modes and decay like k^-3 on even ones.
  const SpectralBasis b = interval(32);
  Eigen::VectorXd s(b.grid_points());
  for (Eigen::Index p = 0; p < s.size(); ++p) s(p) = std::sin(b.node(p).first) * std::sin(2.0 * b.node(p).first);
  const Field f = analyze(b, s);
  for (int k = 1; k <= 8; ++k) {
    const double ref = oracle::integrate(
        [k](double x) { return std::sin(x) * std::sin(2 * x) * oracle::phi_interval(k, x); }, 0.0, pi);
    if (k % 2 == 1) {
      EXPECT_NEAR(ref, 0.0, 1e-13);
      EXPECT_NEAR(f.coeffs(k - 1), 0.0, 1e-13);
    } else {
      EXPECT_NEAR(f.coeffs(k - 1), ref, 1e-4 * std::abs(ref)) << "mode " << k;
    }
  }
}

TEST(Transforms, RoundTripAndParsevalOnEveryDomain) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const SpectralBasis& b : {interval(32), square(8), circle(16)}) {
    Eigen::VectorXd c(b.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = U(rng);
    const Field f = synthesize(b, c);
    EXPECT_LT((b.to_coeffs(f.samples) - c).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(quadrature_l2(b, f.samples), c.norm(), 1e-10 * c.norm());
    const Field g = analyze(b, f.samples);
    EXPECT_LT((g.samples - f.samples).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Transforms, LengthMismatchIsADimensionError) {
  const SpectralBasis b = interval(8);
  EXPECT_THROW(b.to_samples(Eigen::VectorXd::Zero(7)), DimensionError);
  EXPECT_THROW(analyze(b, Eigen::VectorXd::Zero(5)), DimensionError);
}

TEST(Project, SplitsGroupAndComplement) {
  const SpectralBasis b = interval(8);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(b.size());
  c(0) = 2.0;
  c(1) = 3.0;
  const Projection p = project(b, synthesize(b, c), 0);
  ASSERT_EQ(p.in_group.size(), 1);
  EXPECT_DOUBLE_EQ(p.in_group(0), 2.0);
  EXPECT_DOUBLE_EQ(p.complement.coeffs(0), 0.0);
  EXPECT_DOUBLE_EQ(p.complement.coeffs(1), 3.0);

  const Projection q = project(b, p.complement, 0);
  EXPECT_DOUBLE_EQ(q.in_group(0), 0.0);
}

TEST(Project, CircleGroupGivesFourierNumbersOverPi) {
  const SpectralBasis b = circle(8);
  Eigen::VectorXd s(b.grid_points());
  for (Eigen::Index p = 0; p < s.size(); ++p) {
    const double t = b.node(p).first;
    s(p) = 4 * std::cos(2 * t) + std::sin(2 * t) + std::cos(5 * t);
  }
  const Field f = analyze(b, s);
  const Projection p = project(b, f, 2);
  // Coefficients on cos(2t)/sqrt(pi), sin(2t)/sqrt(pi): A/sqrt(pi), B/sqrt(pi).
  const double A = oracle::integrate([](double t) {
    return (4 * std::cos(2 * t) + std::sin(2 * t) + std::cos(5 * t)) * std::cos(2 * t);
  }, 0.0, 2 * pi);
  EXPECT_NEAR(A, 4 * pi, 1e-10);
  EXPECT_NEAR(p.in_group(0), A / std::sqrt(pi), 1e-12);
  EXPECT_NEAR(p.in_group(1), std::sqrt(pi), 1e-12);
  EXPECT_NEAR(p.complement.coeffs(*b.mode_from_label("c5")), std::sqrt(pi), 1e-12);
}

TEST(Resolvent, ResonantShiftWithOrthogonalForcing) {
  const SpectralBasis b = interval(8);
  const Field u = resolvent_solve(b, 1.0, synthesize(b, unit(b, 1)), 0);
  EXPECT_NEAR(u.coeffs(1), -1.0 / 3.0, 1e-15);
  EXPECT_EQ(u.coeffs(0), 0.0);
}

TEST(Resolvent, ResonantShiftWithKernelForcingThrows) {
  const SpectralBasis b = interval(8);
  EXPECT_THROW(resolvent_solve(b, 1.0, synthesize(b, unit(b, 0)), 0), NonOrthogonalForcing);
}

TEST(Resolvent, NonresonantShift) {
  const SpectralBasis b = interval(8);
  const Field u = resolvent_solve(b, 2.5, synthesize(b, unit(b, 0)));
  EXPECT_NEAR(u.coeffs(0), 1.0 / 1.5, 1e-15);
}

TEST(Resolvent, OrthogonalToMustNameTheResonantGroup) {
  const SpectralBasis b = interval(8);
  const Field f = synthesize(b, unit(b, 2));
  EXPECT_THROW(resolvent_solve(b, 1.0, f), ConfigurationError);
  EXPECT_THROW(resolvent_solve(b, 1.0, f, 1), ConfigurationError);
  EXPECT_THROW(resolvent_solve(b, 2.5, f, 0), ConfigurationError);
}

TEST(Resolvent, ExactInverseOnSquareGroup) {
  const SpectralBasis b = square(8);
  const std::size_t g = *b.find_group(5.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXd f(b.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = N(rng);
  remove_group(f, b.group(g));
  const Eigen::VectorXd u = resolvent_coeffs(b, 5.0, f, g);
  EXPECT_LT((apply_shifted_laplacian(b, 5.0, u) - f).norm(), 1e-12);
  for (std::size_t i : b.group(g).members) EXPECT_EQ(u(static_cast<Eigen::Index>(i)), 0.0);
}

TEST(Pointwise, ZeroMapAndArctanOfZero) {
  const SpectralBasis b = interval(8);
  const Field u = synthesize(b, unit(b, 0));
  EXPECT_EQ(apply_pointwise(b, [](double) { return 0.0; }, u).coeffs.norm(), 0.0);
  EXPECT_EQ(apply_pointwise(b, [](double x) { return std::atan(x); }, zero_field(b)).coeffs.norm(), 0.0);
}

TEST(Pointwise, TanhOfLargeSineAgainstFineQuadrature) {
  const SpectralBasis b = interval(64);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(b.size());
  c(0) = 10.0;
  const Field r = apply_pointwise(b, [](double x) { return std::tanh(x); }, synthesize(b, c));
  const double ref = oracle::integrate_panels(
      [](double x) { return std::tanh(10.0 * oracle::phi_interval(1, x)) * oracle::phi_interval(1, x); }, 0.0, pi,
      64);
  EXPECT_NEAR(r.coeffs(0), ref, 1e-8);
  EXPECT_GT(r.coeffs(0), 0.9 * 2.0 * std::sqrt(2.0 / pi));
}

TEST(Pointwise, NonFiniteOutputIsAnEvaluationError) {
  const SpectralBasis b = interval(8);
  EXPECT_THROW(apply_pointwise(b, [](double) { return std::nan(""); }, zero_field(b)), EvaluationError);
}

TEST(Pointwise, DerivativeMatchesAnalyticOnIntervalAndCircle) {
  const SpectralBasis b = interval(16);
  const Eigen::VectorXd d = b.derivative_samples(unit(b, 2));
  for (Eigen::Index p = 0; p < b.grid_points(); ++p)
    EXPECT_NEAR(d(p), 3.0 * std::sqrt(2.0 / pi) * std::cos(3.0 * b.node(p).first), 1e-12);

  const SpectralBasis c = circle(8);
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(c.size());
  coef(*c.mode_from_label("c2")) = std::sqrt(pi);  // cos 2t
  coef(*c.mode_from_label("s3")) = std::sqrt(pi);  // sin 3t
  const Eigen::VectorXd e = c.derivative_samples(coef);
  for (Eigen::Index p = 0; p < c.grid_points(); ++p) {
    const double t = c.node(p).first;
    EXPECT_NEAR(e(p), -2 * std::sin(2 * t) + 3 * std::cos(3 * t), 1e-12);
  }
}

TEST(SignSplit, SecondSineHalves) {
  const SpectralBasis b = interval(16);
  const SignSplit s = sign_split(b, {{1, 1.0}});
  EXPECT_NEAR(s.positive, std::sqrt(2.0 / pi), 1e-12);
  EXPECT_NEAR(s.negative, -std::sqrt(2.0 / pi), 1e-12);
}

TEST(SignSplit, SquareModeAgainstClosedForm) {
  const SpectralBasis b = square(8);
  const SignSplit s = sign_split(b, {{*b.mode_from_label("1,2"), 1.0}});
  // |phi_12| integrates to (2/pi) * 2 * 2; positive and negative parts are equal.
  EXPECT_NEAR(s.positive, 4.0 / pi, 1e-10);
  EXPECT_NEAR(s.negative, -4.0 / pi, 1e-10);
}
