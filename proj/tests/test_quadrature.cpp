#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <reslab/quadrature.hpp>

using namespace reslab;

TEST(BuildRule, WeightsSumToIntervalLength) {
  for (RuleKind kind : {RuleKind::gauss_legendre_composite, RuleKind::clenshaw_curtis, RuleKind::trapezoid}) {
    for (int n : {8, 16, 33, 64, 200}) {
      const QuadratureRule r = build_rule(1.0, n, kind);
      ASSERT_EQ(r.nodes.size(), r.weights.size());
      EXPECT_EQ(static_cast<int>(r.size()), n);
      const double s = std::accumulate(r.weights.begin(), r.weights.end(), 0.0);
      EXPECT_NEAR(s, 2.0, 1e-14) << to_string(kind) << " n=" << n;
    }
  }
}

TEST(BuildRule, NodesAscendingInsideInterval) {
  for (RuleKind kind : {RuleKind::gauss_legendre_composite, RuleKind::clenshaw_curtis, RuleKind::trapezoid}) {
    const QuadratureRule r = build_rule(3.5, 97, kind);
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_GE(r.nodes[i], -3.5);
      EXPECT_LE(r.nodes[i], 3.5);
      EXPECT_GT(r.weights[i], 0.0);
      if (i > 0) EXPECT_GT(r.nodes[i], r.nodes[i - 1]);
    }
  }
}

TEST(BuildRule, PolynomialExactness) {
  for (RuleKind kind : {RuleKind::gauss_legendre_composite, RuleKind::clenshaw_curtis}) {
    const QuadratureRule r = build_rule(1.0, 16, kind);
    EXPECT_NEAR(integrate_real(r, [](double x) { return x * x; }), 2.0 / 3.0, 1e-13);
    EXPECT_NEAR(integrate_real(r, [](double x) { return std::pow(x, 10); }), 2.0 / 11.0, 1e-13);
  }
}

TEST(BuildRule, GaussianIntegral) {
  for (RuleKind kind : {RuleKind::gauss_legendre_composite, RuleKind::trapezoid}) {
    for (int n : {64, 128, 256}) {
      const QuadratureRule r = build_rule(8.0, n, kind);
      EXPECT_NEAR(integrate_real(r, [](double x) { return std::exp(-x * x); }), std::sqrt(pi), 1e-12)
          << to_string(kind) << " n=" << n;
    }
  }
}

TEST(BuildRule, ClenshawCurtisGaussianNeedsMoreNodes) {
  // one global polynomial over [-8, 8]: 64 nodes leave ~3e-12
  const auto f = [](double x) { return std::exp(-x * x); };
  EXPECT_NEAR(integrate_real(build_rule(8.0, 64, RuleKind::clenshaw_curtis), f), std::sqrt(pi), 1e-11);
  for (int n : {96, 128, 256}) {
    EXPECT_NEAR(integrate_real(build_rule(8.0, n, RuleKind::clenshaw_curtis), f), std::sqrt(pi), 1e-12) << n;
  }
}

TEST(BuildRule, RotatedRuleIntegratesEntireFunction) {
  // int over the ray s e^{i phi}, s in [-L, L], of e^{-z^2} equals sqrt(pi) when the tails vanish
  const QuadratureRule r = build_rule(8.0, 256, RuleKind::gauss_legendre_composite, 0.3);
  const cplx v = integrate(r, [](cplx z) { return std::exp(-z * z); });
  EXPECT_LT(std::abs(v - std::sqrt(pi)), 1e-12);
}

TEST(BuildRule, RejectsInvalidParameters) {
  EXPECT_THROW(build_rule(0.0, 16, RuleKind::gauss_legendre_composite), validation_error);
  EXPECT_THROW(build_rule(-1.0, 16, RuleKind::gauss_legendre_composite), validation_error);
  EXPECT_THROW(build_rule(1.0, 7, RuleKind::clenshaw_curtis), validation_error);
}

TEST(ReferenceRules, GaussLegendreKnownNodes) {
  const ReferenceRule r = gauss_legendre(3);
  EXPECT_NEAR(r.nodes[0], -std::sqrt(0.6), 1e-15);
  EXPECT_NEAR(r.nodes[1], 0.0, 1e-15);
  EXPECT_NEAR(r.weights[0], 5.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.weights[1], 8.0 / 9.0, 1e-15);
}

TEST(ReferenceRules, ClenshawCurtisIncludesEndpoints) {
  const ReferenceRule r = clenshaw_curtis(9);
  EXPECT_DOUBLE_EQ(r.nodes.front(), -1.0);
  EXPECT_DOUBLE_EQ(r.nodes.back(), 1.0);
}

TEST(IntegrationMatrices, PartialIntegralsOfPolynomials) {
  const ReferenceRule ref = gauss_legendre(16);
  const IntegrationMatrices im = integration_matrices(ref);
  const std::size_t n = im.n;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = ref.nodes[i];
    double head = 0.0, tail = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double f = ref.nodes[j] * ref.nodes[j];
      head += im.head[i * n + j] * f;
      tail += im.tail[i * n + j] * f;
    }
    EXPECT_NEAR(head, (u * u * u + 1.0) / 3.0, 1e-14);
    EXPECT_NEAR(tail, (1.0 - u * u * u) / 3.0, 1e-14);
  }
}

TEST(IntegrationMatrices, AttachedToEveryPanel) {
  QuadratureRule r = build_rule(1.0, 48, RuleKind::gauss_legendre_composite);
  ensure_integration(r);
  EXPECT_EQ(r.panels.size(), 3u);
  for (const auto& p : r.panels) EXPECT_TRUE(p.integ);
  QuadratureRule t = build_rule(1.0, 48, RuleKind::trapezoid);
  EXPECT_THROW(ensure_integration(t), validation_error);
}
