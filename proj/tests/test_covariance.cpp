#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fracfield/covariance.hpp"

using namespace fracfield;

namespace {

// Independent oracle at H = 1/2: the noise is white, so
// E u(t,x)u(t',x') = int_0^t int_R G_{t-s}(x-y) G_{t'-s}(x'-y) dy ds.
// Heat: the Gaussian convolution gives int_0^t p_{t+t'-2s}(x-x') ds.
double heat_white_cov(double t, double t2, double dx) {
  auto f = [&](double s) {
    const double v = t + t2 - 2.0 * s;
    return std::exp(-dx * dx / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
  };
  return integrate_adaptive(f, 0.0, t, 1e-15, 1e-13).value;
}

// Wave: 1/4 times the overlap length of the two cones' sections, integrated in s.
double wave_white_cov(double t, double t2, double dx) {
  auto f = [&](double s) {
    const double a = t - s, b = t2 - s;
    const double lo = std::max(-a, dx - b), hi = std::min(a, dx + b);
    return 0.25 * std::max(0.0, hi - lo);
  };
  std::vector<double> br;
  for (int i = 0; i <= 64; ++i) br.push_back(t * i / 64.0);
  return integrate_adaptive(f, std::span<const double>(br), 1e-15, 1e-13, 100000).value;
}

}  // namespace

TEST(NoiseFieldCov, ClosedFormAndBrownianSheet) {
  const HurstIndex half(0.5);
  for (double t : {0.3, 1.0}) {
    for (double s : {0.5, 2.0}) {
      for (double x : {0.2, 1.5}) {
        for (double y : {0.7, 3.0}) {
          EXPECT_NEAR(noise_field_cov(half, {t, x}, {s, y}), std::min(t, s) * std::min(x, y), 1e-15);
          EXPECT_NEAR(noise_field_cov(half, {t, -x}, {s, -y}), std::min(t, s) * std::min(x, y), 1e-15);
        }
      }
    }
  }
  const HurstIndex h(0.3);
  EXPECT_NEAR(noise_field_cov(h, {1.0, 2.0}, {3.0, -1.0}),
              0.5 * (std::pow(2.0, 0.6) + 1.0 - std::pow(3.0, 0.6)), 1e-15);
}

TEST(TimeKernel, SeriesBranchMatchesClosedForm) {
  for (double xi : {0.05, 0.12, 0.16}) {
    const double t = 1.0, t2 = 2.0;
    const double d = t2 - t, S = t + t2;
    const double closed = (0.5 * t * std::cos(d * xi) - (std::sin(S * xi) - std::sin(d * xi)) / (4.0 * xi)) / (xi * xi);
    EXPECT_NEAR(time_kernel(EquationKind::Wave, t, t2, xi), closed, 1e-9 * std::abs(closed));
  }
}

TEST(TimeKernel, MatchesDirectTimeIntegral) {
  for (auto eqn : {EquationKind::Wave, EquationKind::Heat}) {
    for (double xi : {0.01, 0.7, 5.0}) {
      const double t = 0.8, t2 = 1.3;
      const auto direct = integrate_adaptive(
          [&](double s) { return fourier_kernel(eqn, t - s, xi) * fourier_kernel(eqn, t2 - s, xi); }, 0.0, t, 1e-16,
          1e-13);
      EXPECT_NEAR(time_kernel(eqn, t, t2, xi), direct.value, 1e-12) << to_string(eqn) << " " << xi;
    }
  }
  EXPECT_THROW(time_kernel(EquationKind::Heat, 2.0, 1.0, 1.0), ValidationError);
}

TEST(ConvCov, ExactVariancesAtHalf) {
  const HurstIndex half(0.5);
  const double heat = conv_cov(EquationKind::Heat, half, {1.0, 0.3}, {1.0, 0.3}).value;
  EXPECT_NEAR(heat / (1.0 / std::sqrt(std::numbers::pi)), 1.0, 1e-6);
  const double wave = conv_cov(EquationKind::Wave, half, {2.0, -0.4}, {2.0, -0.4}).value;
  EXPECT_NEAR(wave, 1.0, 1e-6);
}

TEST(ConvCov, MatchesWhiteNoiseOracleOffDiagonal) {
  const HurstIndex half(0.5);
  for (double dx : {0.0, 0.4, 1.7}) {
    EXPECT_NEAR(conv_cov(EquationKind::Heat, half, {0.6, 0.0}, {1.4, dx}).value, heat_white_cov(0.6, 1.4, dx), 1e-9)
        << dx;
    EXPECT_NEAR(conv_cov(EquationKind::Wave, half, {0.6, 0.0}, {1.4, dx}).value, wave_white_cov(0.6, 1.4, dx), 1e-8)
        << dx;
  }
}

TEST(ConvCov, SymmetricTranslationInvariantAndZeroAtTimeZero) {
  const HurstIndex h(0.3);
  for (auto eqn : {EquationKind::Wave, EquationKind::Heat}) {
    const double a = conv_cov(eqn, h, {0.5, 0.1}, {1.2, 0.9}).value;
    const double b = conv_cov(eqn, h, {1.2, 0.9}, {0.5, 0.1}).value;
    const double c = conv_cov(eqn, h, {0.5, 5.1}, {1.2, 5.9}).value;
    EXPECT_EQ(a, b);
    EXPECT_NEAR(a, c, 1e-14);
    EXPECT_EQ(conv_cov(eqn, h, {0.0, 0.0}, {1.0, 0.0}).value, 0.0);
  }
}

TEST(ConvCov, CauchySchwarz) {
  for (double H : {0.3, 0.7}) {
    const HurstIndex h(H);
    for (auto eqn : {EquationKind::Wave, EquationKind::Heat}) {
      const SpaceTimePoint p{0.7, 0.0}, q{1.5, 0.8};
      const double c = conv_cov(eqn, h, p, q).value;
      const double vp = conv_cov(eqn, h, p, p).value, vq = conv_cov(eqn, h, q, q).value;
      EXPECT_LE(c * c, vp * vq * (1.0 + 1e-10));
    }
  }
}

TEST(IncrementMoment, AgreesWithCovarianceCombination) {
  const HurstIndex h(0.6);
  for (auto eqn : {EquationKind::Wave, EquationKind::Heat}) {
    const SpaceTimePoint p{1.0, 0.0}, q{1.25, 0.5};
    const double direct = increment_moment2(eqn, h, p, q).value;
    const double combo = conv_cov(eqn, h, p, p).value + conv_cov(eqn, h, q, q).value - 2.0 * conv_cov(eqn, h, p, q).value;
    EXPECT_NEAR(direct, combo, 1e-8);
    EXPECT_EQ(increment_moment2(eqn, h, p, p).value, 0.0);
  }
}

TEST(IncrementMoment, SpatialIncrementAtHalfIsExact) {
  // heat, H = 1/2, equal times: E|u(t,x+h)-u(t,x)|^2 = 2 int_0^t (p_{2s}(0) - p_{2s}(h)) ds
  const double t = 1.0, lag = 0.01;
  auto f = [&](double s) {
    const double v = 2.0 * s;
    return 2.0 * (1.0 - std::exp(-lag * lag / (2.0 * v))) / std::sqrt(2.0 * std::numbers::pi * v);
  };
  const double oracle = integrate_adaptive(f, 0.0, t, 1e-17, 1e-12).value;
  const double got = increment_moment2(EquationKind::Heat, HurstIndex(0.5), {t, 0.0}, {t, lag}).value;
  EXPECT_NEAR(got / oracle, 1.0, 1e-6);
}

TEST(CovMatrix, SymmetricPsdDiagonalAndThreadIndependent) {
  std::vector<SpaceTimePoint> pts;
  for (double t : {0.5, 1.0}) {
    for (double x : {-0.5, 0.0, 0.5}) pts.push_back({t, x});
  }
  const auto a = cov_matrix(EquationKind::Heat, HurstIndex(0.4), pts, {}, 1);
  const auto b = cov_matrix(EquationKind::Heat, HurstIndex(0.4), pts, {}, 4);
  EXPECT_EQ(a.entries, b.entries);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_GT(a(i, i), 0.0);
    for (std::size_t j = 0; j < pts.size(); ++j) EXPECT_EQ(a(i, j), a(j, i));
  }
  EXPECT_THROW(cov_matrix(EquationKind::Heat, HurstIndex(0.4), std::vector<SpaceTimePoint>{}), ValidationError);
}
