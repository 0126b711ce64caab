#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <reslab/asymptotics.hpp>
#include <reslab/jost.hpp>

using namespace reslab;

namespace {

PotentialSpec unit_gaussian() { return PotentialSpec(Gaussian{1.0, 1.0, 0.0}, "g"); }
PotentialSpec zero_potential() { return PotentialSpec(Gaussian{0.0, 1.0, 0.0}, "zero"); }

}  // namespace

TEST(Volterra, ZeroPotential) {
  for (Side s : {Side::plus, Side::minus}) {
    const JostCorrection jc = solve_correction(zero_potential(), cplx(2.0, -1.0), s);
    EXPECT_EQ(jc.sup_norm, 0.0);
    for (const cplx& m : jc.m) EXPECT_EQ(m, cplx(1.0, 0.0));
    EXPECT_EQ(jc.jost, cplx(1.0, 0.0));
  }
}

TEST(Volterra, FirstIterateMatchesDirectQuadrature) {
  const PotentialSpec g = unit_gaussian();
  const cplx k(4.0, -0.5);
  const double L = 7.0;
  VolterraOptions o;
  o.picard = true;
  o.max_iterations = 1;
  const QuadratureRule rule = volterra_rule(L, 40);
  const VolterraSolution sol = solve_volterra(g, rule, k, Side::plus, o);
  EXPECT_EQ(sol.iterations, 1);
  using boost::math::quadrature::gauss_kronrod;
  for (std::size_t i = 0; i < rule.size(); i += 37) {
    const double x = rule.nodes[i];
    auto kern = [&](double t) { return (std::exp(2.0 * I * k * (t - x)) - 1.0) / (2.0 * I * k) * g(t); };
    const double re = gauss_kronrod<double, 61>::integrate([&](double t) { return kern(t).real(); }, x, L, 15, 1e-14);
    const double im = gauss_kronrod<double, 61>::integrate([&](double t) { return kern(t).imag(); }, x, L, 15, 1e-14);
    EXPECT_LT(std::abs(sol.m[i] - (1.0 + cplx(re, im))), 1e-9) << "x = " << x;
  }
}

TEST(Volterra, PicardAgreesWithMarching) {
  const PotentialSpec g = unit_gaussian();
  const cplx k(3.0, -0.3);
  const QuadratureRule rule = volterra_rule(7.0, 40);
  VolterraOptions p;
  p.picard = true;
  const VolterraSolution a = solve_volterra(g, rule, k, Side::plus, p);
  const VolterraSolution b = solve_volterra(g, rule, k, Side::plus);
  EXPECT_GT(a.iterations, 1);
  for (std::size_t i = 0; i < rule.size(); ++i) EXPECT_LT(std::abs(a.m[i] - b.m[i]), 1e-12);
}

TEST(Volterra, ResidualBelowTolerance) {
  const PotentialSpec v(GaussianSum{{Gaussian{1.0, 1.0, -0.5}, Gaussian{-0.6, 0.5, 1.0}}});
  for (cplx k : {cplx(1.0, -0.5), cplx(5.0, -1.0), cplx(-2.0, -3.0), cplx(0.0, -8.0), cplx(2.0, 1.0)}) {
    for (Side s : {Side::plus, Side::minus}) {
      const JostCorrection jc = solve_correction(v, k, s);
      EXPECT_LT(jc.residual, 1e-10) << k;
    }
  }
}

TEST(Volterra, CorrectionsDecayOutsideSupport) {
  // beyond the support f_+ = c e^{2ikx} on the left and f_- = c e^{-2ikx} on the right;
  // f = 1 - m/D cancels, so only samples above 1e-11 are compared
  const PotentialSpec g = unit_gaussian();
  for (cplx k : {cplx(2.0, -1.0), cplx(0.0, -1.5), cplx(5.0, -0.5)}) {
    const JostCorrection p = solve_correction(g, k, Side::plus);
    const JostCorrection m = solve_correction(g, k, Side::minus);
    const auto& x = p.rule->nodes;
    const std::size_t n = x.size();
    std::size_t outside = 0;
    while (outside < n && g(x[outside]) < 1e-13) ++outside;
    ASSERT_GT(outside, 4u) << k;
    const std::size_t ref = outside - 1;
    const cplx cp = p.values[ref] * std::exp(-2.0 * I * k * x[ref]);
    const cplx cm = m.values[n - 1 - ref] * std::exp(2.0 * I * k * x[n - 1 - ref]);
    int compared = 0;
    for (std::size_t i = 0; i < outside; ++i) {
      if (std::abs(p.values[i]) < 1e-11) continue;
      ++compared;
      const cplx phase = std::exp(-2.0 * I * k * x[i]);
      const double floor = 1e-14 * std::abs(phase);  // cancellation in 1 - m/D
      EXPECT_LT(std::abs(p.values[i] * phase - cp), 1e-4 * std::abs(cp) + floor) << k;
      EXPECT_LT(std::abs(m.values[n - 1 - i] * phase - cm), 1e-4 * std::abs(cm) + floor) << k;
    }
    EXPECT_GE(compared, 2) << k;
    EXPECT_LT(std::abs(p.values.front()), std::abs(p.values[ref])) << k;
    EXPECT_LT(std::abs(m.values.back()), std::abs(m.values[n - 1 - ref])) << k;
  }
}

TEST(Volterra, ReflectionSwapsSides) {
  const PotentialSpec v(GaussianSum{{Gaussian{1.0, 1.0, -0.5}, Gaussian{-0.6, 0.5, 1.0}}});
  const cplx k(2.0, -0.7);
  const QuadratureRule rule = volterra_rule(7.0, 60);
  const JostCorrection a = solve_correction(v, k, Side::plus, rule);
  const JostCorrection b = solve_correction(v.reflected(), k, Side::minus, rule);
  const std::size_t n = a.values.size();
  for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(a.values[i] - b.values[n - 1 - i]), 1e-12);
}

TEST(Volterra, JostValueMatchesFredholm) {
  const PotentialSpec g = unit_gaussian();
  for (cplx k : {cplx(1.5, -0.5), cplx(4.0, -2.5), cplx(-1.0, 0.5)}) {
    const cplx a = jost_determinant(g, k).D;
    const cplx b = evaluate_determinant(g, k).D;
    EXPECT_LT(std::abs(a - b), 1e-8 * std::max(1.0, std::abs(b))) << k;
  }
}

TEST(BoundConstant, LargeKBoundByCalibratedConstant) {
  const PotentialSpec g = unit_gaussian();
  const double C = correction_bound_constant(g, {cplx(5.0, -1.0)});
  for (cplx k : {cplx(10.0, -1.0), cplx(20.0, -1.0)}) {
    for (Side s : {Side::plus, Side::minus}) {
      EXPECT_LE(std::abs(k) * solve_correction(g, k, s).sup_norm, C * (1.0 + 1e-9)) << k;
    }
  }
}

TEST(BoundConstant, ImaginaryAxisBoundedAndSaturating) {
  const PotentialSpec g = unit_gaussian();
  const double limit = 0.5 * std::sqrt(pi);  // (1/2) int |V|
  std::vector<double> vals;
  for (int j = 1; j <= 5; ++j) {
    const cplx k(0.0, -std::pow(2.0, j));
    double v = 0.0;
    for (Side s : {Side::plus, Side::minus}) v = std::max(v, std::abs(k) * solve_correction(g, k, s).sup_norm);
    vals.push_back(v);
  }
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  EXPECT_LT(*hi / *lo, 3.0);
  for (double v : vals) EXPECT_LE(v, limit * (1.0 + 1e-6));
  for (std::size_t i = 2; i < vals.size(); ++i) {
    EXPECT_LE(vals[i] - vals[i - 1], vals[i - 1] - vals[i - 2] + 1e-12);
  }
}

TEST(TMatrix, ZeroPotential) {
  const TMatrix t = t_matrix(zero_potential(), cplx(1.0, -1.0));
  EXPECT_EQ(t.T11, cplx(0.0));
  EXPECT_EQ(t.T12, cplx(0.0));
  EXPECT_EQ(t.T21, cplx(0.0));
  EXPECT_EQ(t.T22, cplx(0.0));
  EXPECT_EQ(e_det_2x2(zero_potential(), cplx(1.0, -1.0)), cplx(1.0));
}

TEST(TMatrix, DiagonalEntriesApproachTransformAtZero) {
  const PotentialSpec g = unit_gaussian();
  const cplx v0 = std::sqrt(pi);
  const TMatrix t20 = t_matrix(g, cplx(0.0, -20.0));
  EXPECT_LT(std::abs(t20.T11 - v0), 0.1);
  EXPECT_LT(std::abs(t20.T22 - v0), 0.1);
  double prev = std::numeric_limits<double>::infinity();
  for (double s : {5.0, 10.0, 20.0, 30.0}) {
    const TMatrix t = t_matrix(g, cplx(0.0, -s));
    const double e = std::abs(t.T11 - v0);
    EXPECT_LT(e, prev);
    EXPECT_LT(e * s, 1.0);  // O(1/|k|) with constant below 1
    prev = e;
  }
}

TEST(TMatrix, OffDiagonalMatchesBornTail) {
  // |T21 - s_n| is bounded by the geometric tail of the computed terms
  const PotentialSpec g = unit_gaussian();
  for (cplx k : {cplx(6.0, -0.5), cplx(0.0, -4.0), cplx(2.0, -2.0)}) {
    const TMatrix t = t_matrix(g, k);
    const BornSeries b = born_series(g, k, born_max_order);
    ASSERT_TRUE(b.contraction_estimate.has_value());
    const double q = *b.contraction_estimate;
    ASSERT_LT(q, 1.0);
    const double tail = std::abs(b.terms.back()) * q / (1.0 - q);
    EXPECT_LE(std::abs(t.T21 - b.partial_sums.back()), 10.0 * tail + 1e-12 * t.integrand_scale) << k;
  }
}

TEST(TMatrix, ReflectionSwapsOffDiagonal) {
  const PotentialSpec v(GaussianSum{{Gaussian{1.0, 1.0, -0.5}, Gaussian{-0.6, 0.5, 1.0}}});
  const cplx k(2.0, -1.0);
  const TMatrix a = t_matrix(v, k);
  const TMatrix b = t_matrix(v.reflected(), k);
  EXPECT_LT(std::abs(a.T12 - b.T21), 1e-9 * std::max(1.0, std::abs(a.T12)));
  EXPECT_LT(std::abs(a.T11 - b.T22), 1e-9);
}

TEST(EDet, MatchesScatteringDeterminant) {
  const PotentialSpec g = unit_gaussian();
  for (cplx k : {cplx(3.0, -1.0), cplx(1.0, -0.3), cplx(-2.0, -2.0)}) {
    const cplx a = e_det_2x2(g, k);
    const cplx b = scattering_det(g, k);
    EXPECT_LT(std::abs(a - b), std::max(1e-6, 1e-3 * std::abs(b))) << k;
  }
}

TEST(EDet, RealAxisAgreement) {
  const PotentialSpec g = unit_gaussian();
  DeterminantOptions o;
  o.tol = 1e-12;
  const cplx a = e_det_2x2(g, 5.0);
  const cplx b = scattering_det(g, 5.0, o);
  EXPECT_LT(std::abs(a - b), 1e-8);
  EXPECT_NEAR(std::abs(a), 1.0, 1e-8);  // |D(-k)| = |D(k)| for real k and real V
}

TEST(Born, OrderZeroIsTransform) {
  const PotentialSpec g = unit_gaussian();
  for (cplx k : {cplx(1.0, -0.5), cplx(6.0, -0.5), cplx(0.0, -3.0)}) {
    EXPECT_EQ(born_series(g, k, 0).partial_sums.front(), fourier(g, 2.0 * k));
    EXPECT_EQ(born_series(g, k, 0, BornTarget::T12).partial_sums.front(), fourier(g, -2.0 * k));
  }
}

TEST(Born, ZeroPotential) {
  const BornSeries b = born_series(zero_potential(), cplx(1.0, -1.0), 5);
  ASSERT_EQ(b.partial_sums.size(), 6u);
  for (const cplx& s : b.partial_sums) EXPECT_EQ(s, cplx(0.0));
  EXPECT_FALSE(b.contraction_estimate.has_value());
}

TEST(Born, ContractionImprovesDeeper) {
  const PotentialSpec g = unit_gaussian();
  const auto c4 = born_series(g, cplx(0.0, -4.0), born_max_order).contraction_estimate;
  const auto c8 = born_series(g, cplx(0.0, -8.0), born_max_order).contraction_estimate;
  ASSERT_TRUE(c4 && c8);
  EXPECT_LT(*c8, *c4);
}

TEST(Born, Preconditions) {
  const PotentialSpec g = unit_gaussian();
  EXPECT_THROW(born_series(g, cplx(1.0, 0.5), 2), validation_error);
  EXPECT_THROW(born_series(g, cplx(1.0, -0.5), 9), validation_error);
}

TEST(Oracle, SquareWellResonances) {
  const SquareWell w{-2.0, 1.0};
  const ResonanceSet rs = transfer_matrix_resonances(w, {0.0, 6.0, -3.0, -0.05});
  ASSERT_FALSE(rs.zeros.empty());
  EXPECT_EQ(rs.method, ZeroMethod::jost_oracle);
  for (const auto& z : rs.zeros) EXPECT_LT(std::abs(square_well_jost(w, z.location)), 1e-10);
}

TEST(Oracle, SymmetricUnderReflection) {
  const SquareWell w{-2.0, 1.0};
  const ResonanceSet rs = transfer_matrix_resonances(w, {-6.013, 6.0, -3.0, -0.05});
  for (const auto& z : rs.zeros) {
    const cplx mirror = -std::conj(z.location);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : rs.zeros) best = std::min(best, std::abs(y.location - mirror));
    EXPECT_LT(best, 1e-8) << z.location;
  }
}

TEST(Oracle, DepthZeroHasNoZeros) {
  const ResonanceSet rs = transfer_matrix_resonances(SquareWell{0.0, 1.0}, {0.0, 6.0, -3.0, -0.05});
  EXPECT_TRUE(rs.zeros.empty());
}

TEST(Oracle, MatchesFredholmDeterminant) {
  const SquareWell w{-2.0, 1.0};
  const PotentialSpec s(w);
  for (cplx k : {cplx(1.0, -0.5), cplx(3.0, -2.0), cplx(0.5, 1.0), cplx(-4.0, -1.0)}) {
    const cplx a = square_well_jost(w, k);
    const cplx b = evaluate_determinant(s, k).D;
    EXPECT_LT(std::abs(a - b), 1e-7 * std::max(1.0, std::abs(a))) << k;
  }
}

TEST(Oracle, RejectsNonWell) {
  EXPECT_THROW(transfer_matrix_resonances(unit_gaussian(), {0.0, 6.0, -3.0, -0.05}), validation_error);
  EXPECT_THROW(transfer_matrix_resonances(SquareWell{-2.0, 1.0}, {-1.0, 1.0, -1.0, 1.0}), validation_error);
}
