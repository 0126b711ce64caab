#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>
#include <reslab/asymptotics.hpp>

using namespace reslab;

namespace {

PotentialSpec unit_gaussian() { return PotentialSpec(Gaussian{1.0, 1.0, 0.0}, "g"); }
PotentialSpec zero_potential() { return PotentialSpec(Gaussian{0.0, 1.0, 0.0}, "zero"); }
PotentialSpec two_gaussian() {
  return PotentialSpec(GaussianSum{{Gaussian{1.0, 1.0, -0.5}, Gaussian{-0.6, 0.5, 1.0}}}, "two");
}

const std::vector<double> ladder{2.0, 4.0, 6.0, 8.0, 10.0};

}  // namespace

TEST(Indicator, ExponentialClosedForm) {
  const AnalyticFunction f = [](cplx k) { return std::exp(-I * k); };
  EXPECT_NEAR(indicator(f, 0.5 * pi, 1.0, ladder), 1.0, 1e-12);
  EXPECT_NEAR(indicator(f, -0.5 * pi, 1.0, ladder), -1.0, 1e-12);
  EXPECT_NEAR(indicator(f, 0.0, 1.0, ladder), 0.0, 1e-12);
}

TEST(Indicator, GaussianTransform) {
  const AnalyticFunction f = [g = unit_gaussian()](cplx z) { return fourier(g, z); };
  EXPECT_NEAR(indicator(f, 0.5 * pi, 2.0, ladder), 0.25, 1e-10);
  EXPECT_NEAR(indicator(f, 0.0, 2.0, ladder), -0.25, 1e-10);
  const IndicatorEstimate e = indicator_of_fourier(unit_gaussian(), 2.0, {0.0, 0.25 * pi, 0.5 * pi, -0.5 * pi});
  EXPECT_NEAR(e.h_values[1], 0.0, 1e-10);  // cos(2 theta) = 0
  EXPECT_NEAR(e.h_values[3], 0.25, 1e-10);
  EXPECT_NEAR(e.theta_grid[3], 1.5 * pi, 1e-15);
  for (double r : e.fit_residuals) EXPECT_TRUE(std::isfinite(r));
}

TEST(Indicator, LadderValidation) {
  const AnalyticFunction f = [](cplx k) { return std::exp(-I * k); };
  EXPECT_THROW(indicator(f, 0.0, 1.0, {1.0, 2.0, 3.0, 4.0}), validation_error);
  EXPECT_THROW(indicator(f, 0.0, 1.0, {1.0, 3.0, 2.0, 4.0, 5.0}), validation_error);
  EXPECT_THROW(indicator(f, 0.0, 0.0, ladder), validation_error);
}

TEST(Indicator, UnderflowShrinksLadder) {
  // e^{-k^4} underflows on the real axis beyond r ~ 5.2
  const IndicatorFit fit = indicator_fit([](cplx z) { return std::log(std::abs(std::exp(-z * z * z * z))); }, 0.0,
                                         4.0, {1.0, 2.0, 3.0, 4.0, 6.0, 8.0});
  EXPECT_TRUE(fit.shrunk);
  EXPECT_EQ(fit.radii_used.size(), 4u);
  EXPECT_NEAR(fit.h, -1.0, 1e-10);
}

TEST(Indicator, ProductAdditivity) {
  // cos has completely regular growth, so h_{fg} = h_f + h_g
  const AnalyticFunction f = [](cplx k) { return std::exp(-I * k); };
  const AnalyticFunction g = [](cplx k) { return std::cos(k); };
  const AnalyticFunction fg = [&](cplx k) { return f(k) * g(k); };
  const std::vector<double> big{10.0, 15.0, 20.0, 25.0, 30.0};
  for (double theta : {pi / 3.0, -pi / 3.0, 0.5 * pi, -0.75 * pi}) {
    const double sum = indicator(f, theta, 1.0, big) + indicator(g, theta, 1.0, big);
    EXPECT_NEAR(indicator(fg, theta, 1.0, big), sum, 1e-3) << theta;
    EXPECT_NEAR(indicator(g, theta, 1.0, big), std::abs(std::sin(theta)), 1e-3) << theta;
  }
}

TEST(Indicator, MaximumIsTypeForGaussian) {
  std::vector<double> thetas;
  for (int i = 0; i < 72; ++i) thetas.push_back(2.0 * pi * i / 72);
  const IndicatorEstimate e = indicator_of_fourier(unit_gaussian(), 2.0, thetas);
  const double hmax = *std::max_element(e.h_values.begin(), e.h_values.end());
  EXPECT_NEAR(hmax, 0.25, 0.025);
}

TEST(Indicator, PredictedProfileOfD) {
  EXPECT_DOUBLE_EQ(predicted_indicator_of_D(-0.5 * pi, 2.0, 0.25, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(predicted_indicator_of_D(0.0, 2.0, 0.25, 0.25), 0.0);
  EXPECT_DOUBLE_EQ(predicted_indicator_of_D(0.5 * pi, 2.0, 0.25, 0.25), 0.0);
  EXPECT_NEAR(predicted_indicator_of_D(-0.5 * pi + 0.2, 2.0, 0.25, 0.25), 2.0 * std::cos(0.4), 1e-15);
}

TEST(Indicator, DeterminantProfileForGaussian) {
  const IndicatorEstimate e = indicator_of_D(unit_gaussian(), 2.0, {-0.5 * pi, 0.0, 0.5 * pi});
  EXPECT_NEAR(e.h_values[0], 2.0, 0.3);
  EXPECT_LT(std::abs(e.h_values[1]), 0.05);
  EXPECT_LT(std::abs(e.h_values[2]), 0.05);
}

TEST(Sigma, EmptyIntegral) {
  EXPECT_EQ(sigma_integral(unit_gaussian(), 0.0).value, 0.0);
  EXPECT_EQ(sigma_integral(two_gaussian(), 0.0).value, 0.0);
}

TEST(Sigma, GaussianClosedForm) {
  for (double t : {0.5, 2.0, -1.5, 4.0}) {
    const double exact = t * std::log(std::sqrt(pi)) - t * t * t / 12.0;
    EXPECT_NEAR(sigma_integral(unit_gaussian(), t).value, exact, 1e-6) << t;
  }
}

TEST(Sigma, ReflectionInvariant) {
  for (double t : {0.5, 1.0, 2.0, 3.0}) {
    EXPECT_NEAR(sigma_integral(two_gaussian(), t).value, sigma_integral(two_gaussian().reflected(), t).value, 1e-10)
        << t;
  }
}

TEST(Sigma, AdditiveUnderSplitting) {
  // positive Gaussians at one centre keep V^ positive on the real axis
  const PotentialSpec v(GaussianSum{{Gaussian{1.0, 1.0, 0.0}, Gaussian{0.5, 0.5, 0.0}}});
  boost::math::quadrature::tanh_sinh<double> ts;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.2, 2.5);
  for (int i = 0; i < 4; ++i) {
    const double t1 = u(rng), t2 = u(rng);
    const double piece = ts.integrate([&](double x) { return std::log(std::abs(fourier(v, x))); }, t1, t1 + t2);
    EXPECT_NEAR(sigma_integral(v, t1 + t2).value, sigma_integral(v, t1).value + piece, 1e-8);
  }
}

TEST(Counting, ZeroPotentialFlagged) {
  const CountingReport r = counting_law_compare(zero_potential(), {6.0, 9.0, 12.0});
  EXPECT_TRUE(r.trivial_potential);
  EXPECT_EQ(r.measured_n, (std::vector<int>{0, 0, 0}));
}

TEST(Counting, PredictedConstantFormula) {
  EXPECT_NEAR(predicted_counting_constant(2.0, 0.25, 0.25), 1.0 / pi, 1e-15);
}

TEST(Counting, SquareWellGrowsLinearly) {
  // order one, so outside the rho > 1 regime; the count still grows like r
  CountingLawOptions o;
  o.counting.cell = 2.0;
  const CountingReport r = counting_law_compare(PotentialSpec(SquareWell{-2.0, 1.0}), {16.0, 24.0, 32.0}, o);
  EXPECT_TRUE(r.order_at_most_one);
  ASSERT_TRUE(r.fitted_exponent.has_value());
  EXPECT_GE(*r.fitted_exponent, 0.9);
  EXPECT_LE(*r.fitted_exponent, 1.1);
  for (std::size_t i = 1; i < r.measured_n.size(); ++i) EXPECT_GE(r.measured_n[i], r.measured_n[i - 1]);
}

TEST(Born, ConditionClosedForm) {
  const AnalyticFunction b = born_condition(unit_gaussian());
  for (cplx k : {cplx(1.0, -1.0), cplx(3.0, -2.5), cplx(-0.5, 0.7)}) {
    const cplx exact = 4.0 * k * k + pi * std::exp(-2.0 * k * k);
    EXPECT_LT(std::abs(b(k) - exact), 1e-12 * std::max(1.0, std::abs(exact)));
  }
}

TEST(Born, ZerosSolveConditionAndAreSymmetric) {
  const ResonanceSet rs = born_condition_zeros(unit_gaussian(), {-6.013, 6.0, -6.0, -0.5});
  ASSERT_GE(rs.zeros.size(), 4u);
  for (const auto& z : rs.zeros) {
    const cplx k = z.location;
    EXPECT_LT(std::abs(pi * std::exp(-2.0 * k * k) + 4.0 * k * k), 1e-9 * std::max(1.0, std::norm(k)));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : rs.zeros) best = std::min(best, std::abs(y.location + std::conj(k)));
    EXPECT_LT(best, 1e-8);
  }
}

TEST(Born, ZeroPotentialEmpty) {
  const BornComparison bc = born_zero_compare(zero_potential(), {0.5, 8.0, -8.0, -0.05});
  EXPECT_TRUE(bc.resonances.zeros.empty());
  EXPECT_TRUE(bc.born_zeros.zeros.empty());
  EXPECT_TRUE(bc.pairs.empty());
}

TEST(Born, PairingSkipsShallowResonances) {
  const std::vector<Zero> res{{cplx(1.0, -0.5)}, {cplx(2.0, -1.5)}};
  const std::vector<Zero> born{{cplx(2.1, -1.5)}, {cplx(5.0, -5.0)}};
  const auto pairs = born_pairing(res, born);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_NEAR(pairs[0].distance, 0.1, 1e-12);
  EXPECT_TRUE(born_pairing(res, {}).front().distance == std::numeric_limits<double>::infinity());
}

TEST(Uniqueness, TestSetAndDistance) {
  const auto ks = standard_test_set();
  ASSERT_EQ(ks.size(), 100u);
  for (cplx k : ks) {
    EXPECT_GE(std::abs(k), 1.0);
    EXPECT_LE(std::abs(k), 6.0);
    EXPECT_GE(k.imag(), -4.0);
    EXPECT_LE(k.imag(), -0.2);
  }
  EXPECT_EQ(ks, standard_test_set());
  const std::vector<Zero> a{{cplx(1.0, -1.0)}, {cplx(2.0, -1.0)}};
  const std::vector<Zero> b{{cplx(2.0, -1.0)}, {cplx(1.0, -1.1)}};
  EXPECT_NEAR(resonance_set_distance(a, b), 0.1, 1e-12);
  EXPECT_EQ(resonance_set_distance(a, a), 0.0);
  EXPECT_TRUE(std::isinf(resonance_set_distance(a, {b[0]})));
}

TEST(Uniqueness, IdenticalInputsGiveZeroDifferences) {
  UniquenessOptions o;
  o.region = {0.2, 3.0, -2.5, -0.1};
  const UniquenessReport r = uniqueness_compare(two_gaussian(), two_gaussian(), o);
  EXPECT_FALSE(r.resonances_a.zeros.empty());
  EXPECT_LT(r.resonance_set_distance, 1e-10);
  EXPECT_LT(r.sup_D_difference, 1e-10);
  EXPECT_LT(r.sup_absFT_difference, 1e-10);
  EXPECT_LT(r.sigma_difference, 1e-10);
  EXPECT_LT(r.born_product_difference, 1e-10);
}

TEST(Uniqueness, ReflectionPreservesDiagnostics) {
  UniquenessOptions o;
  o.region = {0.2, 3.0, -2.5, -0.1};
  const UniquenessReport r = uniqueness_compare(two_gaussian(), two_gaussian().reflected(), o);
  EXPECT_LT(r.resonance_set_distance, 1e-6);
  EXPECT_LT(r.sup_D_difference, 1e-8);
  EXPECT_LT(r.sup_absFT_difference, 1e-10);
  EXPECT_LT(r.born_product_difference, 1e-10);
}

TEST(Uniqueness, DistinctPotentialsSeparated) {
  UniquenessOptions o;
  o.region = {0.2, 3.0, -2.5, -0.1};
  const UniquenessReport r = uniqueness_compare(unit_gaussian(), PotentialSpec(SquareWell{-2.0, 1.0}), o);
  EXPECT_GE(r.resonance_set_distance, 0.1);
  EXPECT_GE(r.sup_absFT_difference, 0.1);
  EXPECT_GT(r.sup_D_difference, 0.1);
}
