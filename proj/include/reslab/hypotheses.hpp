#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "common.hpp"
#include "fit.hpp"
#include "jost.hpp"
#include "potential.hpp"
#include "rootfinder.hpp"

namespace reslab {

/// Sector half-angles for order rho: alpha = pi / rho.
inline double sector_alpha(double rho) {
  if (!(rho > 0.0)) throw validation_error("sector_alpha: rho must be positive");
  return pi / rho;
}

/// Signed angular distance from a to b, in (-pi, pi].
inline double angle_diff(double a, double b) { return std::remainder(a - b, 2.0 * pi); }

/// Gamma = {|arg k| <= (pi - alpha)/2}.
inline bool in_gamma(cplx k, double rho) {
  return std::abs(std::arg(k)) <= 0.5 * (pi - sector_alpha(rho));
}
inline bool in_minus_gamma(cplx k, double rho) { return in_gamma(-k, rho); }
/// Gamma_- = {|arg k + pi/2| <= alpha/2}.
inline bool in_gamma_lower(cplx k, double rho) {
  return std::abs(angle_diff(std::arg(k), -0.5 * pi)) <= 0.5 * sector_alpha(rho);
}
inline bool in_minus_gamma_lower(cplx k, double rho) { return in_gamma_lower(-k, rho); }

enum class ZeroHalfPlane { upper, lower, zero_free, mixed };

inline const char* to_string(ZeroHalfPlane z) {
  switch (z) {
    case ZeroHalfPlane::upper: return "upper";
    case ZeroHalfPlane::lower: return "lower";
    case ZeroHalfPlane::zero_free: return "zero_free";
    case ZeroHalfPlane::mixed: return "mixed";
  }
  return "mixed";
}

struct HypothesisOptions {
  std::vector<double> radius_ladder{2.0, 3.0, 4.5, 6.5, 9.0, 12.0, 16.0, 21.0, 25.0, 30.0};
  int circle_samples = 360;
  double h3_delta = 0.1;
  double h3_lambda_max = 10.0;
  std::vector<cplx> h3_calibration{cplx(0, -2), cplx(0, -4), cplx(0, -8)};
  double h4_box = 8.0;     // half side of the zero-scan rectangles
  double h4_strip = 0.05;  // half height of the real-axis strip
  std::uint64_t seed = 1;
};

/// Fitted orders within this of 1 count as order 1 for H1.
inline constexpr double order_margin = 0.05;

/// Sampled diagnostics for H1-H4. Nothing here is a proof: order and type
/// come from a fit of ln M(r) = c + sigma r^rho, H2 and H3 are sampled, and
/// H4 is a winding-number scan of V^ over finite rectangles.
struct HypothesisReport {
  double order_estimate = 0.0;
  double type_estimate = 0.0;
  double fit_rms = 0.0;
  std::vector<double> radius_ladder;
  std::vector<double> log_max_modulus;
  bool h1_order_above_one = false;
  double b = 0.0;
  double h2_bound_margin = 0.0;
  double h3_sampled_fraction = 0.0;
  double h3_constant = 0.0;  // C of |f| <= C/|k|, estimated
  int h3_samples = 0;
  ZeroHalfPlane h4_zero_halfplane = ZeroHalfPlane::zero_free;
  int zeros_upper = 0;
  int zeros_lower = 0;
  int zeros_real_strip = 0;
};

/// ln max_{|z| = r} |V^(z)| by sampling the circle.
inline double log_max_modulus(const PotentialSpec& spec, double r, int samples) {
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < samples; ++j) {
    const cplx z = std::polar(r, 2.0 * pi * j / samples);
    const double a = std::abs(fourier(spec, z));
    if (a > 0.0) best = std::max(best, std::log(a));
  }
  return best;
}

/// int e^{2 lambda x} |V(x)| dx, the transform of |V| at 2 i lambda.
inline double abs_potential_transform(const PotentialSpec& spec, double lambda) {
  const double L = truncation_radius(spec, 1e-14, lambda);
  const QuadratureRule rule = build_rule(L, 16 * std::max(8, static_cast<int>(std::ceil(2.0 * L / feature_scale(spec)))),
                                         RuleKind::gauss_legendre_composite);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double x = rule.nodes[i];
    const double v = std::abs(spec(x));
    if (v > 0.0) acc += rule.weights[i] * std::exp(2.0 * lambda * x + std::log(v));
  }
  return acc;
}

namespace detail {

inline int winding_with_jitter(const AnalyticFunction& f, ContourRegion r) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    try {
      return winding_number(f, r);
    } catch (const boundary_zero_error&) {
      r.re_min -= 1e-3;
      r.re_max += 1.3e-3;
    }
  }
  return winding_number(f, r);
}

}  // namespace detail

inline HypothesisReport hypothesis_check(const PotentialSpec& spec, double b, int sample_count,
                                         const HypothesisOptions& opt = {}) {
  if (spec.is_trivial()) throw validation_error("hypothesis_check: potential is identically zero");
  if (!(b > 0.0)) throw validation_error("hypothesis_check: b must be positive");
  if (sample_count < 1) throw validation_error("hypothesis_check: sample_count must be positive");
  if (opt.radius_ladder.size() < 3) throw validation_error("hypothesis_check: radius ladder too short");
  HypothesisReport rep;
  rep.b = b;
  rep.radius_ladder = opt.radius_ladder;

  // H1: order and type
  for (double r : opt.radius_ladder) rep.log_max_modulus.push_back(log_max_modulus(spec, r, opt.circle_samples));
  for (double v : rep.log_max_modulus) {
    if (!std::isfinite(v)) throw numerical_error("hypothesis_check: V^ vanishes on a sampling circle");
  }
  for (std::size_t i = 1; i < rep.log_max_modulus.size(); ++i) {
    if (rep.log_max_modulus[i] < rep.log_max_modulus[i - 1]) {
      throw numerical_error("hypothesis_check: max modulus is not increasing, order fit undefined");
    }
  }
  const PowerFit pf = power_fit(opt.radius_ladder, rep.log_max_modulus);
  rep.order_estimate = pf.rho;
  rep.type_estimate = pf.scale;
  rep.fit_rms = pf.rms;
  rep.h1_order_above_one = pf.rho > 1.0 + order_margin;

  // H2: sampled bound on +-Gamma
  if (rep.h1_order_above_one) {
    const double half = 0.5 * (pi - sector_alpha(pf.rho));
    const int rays = 9;
    for (int side = 0; side < 2; ++side) {
      for (int j = 0; j < rays; ++j) {
        const double theta = -half + 2.0 * half * j / (rays - 1) + (side ? pi : 0.0);
        for (double r : opt.radius_ladder) {
          const cplx k = std::polar(r, theta);
          const FourierJet jet = fourier_jet(spec, k);
          const double m = std::abs(jet.value) + std::abs(jet.d1) + std::abs(jet.d2);
          rep.h2_bound_margin = std::max(rep.h2_bound_margin, m * std::exp(-b * std::abs(k.imag())));
        }
      }
    }
  }

  // H3: sampled fraction of lambda with |V|^(2i lambda) <= (1 - delta)/C |lambda| |V^(2i lambda)|
  rep.h3_constant = correction_bound_constant(spec, opt.h3_calibration);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> mag(1.0, opt.h3_lambda_max);
  std::bernoulli_distribution sign(0.5);
  int ok = 0;
  for (int s = 0; s < sample_count; ++s) {
    const double lambda = (sign(rng) ? 1.0 : -1.0) * mag(rng);
    const double lhs = abs_potential_transform(spec, lambda);
    const double rhs = (1.0 - opt.h3_delta) / rep.h3_constant * std::abs(lambda) *
                       std::abs(fourier(spec, cplx(0.0, 2.0 * lambda)));
    if (lhs <= rhs) ++ok;
  }
  rep.h3_samples = sample_count;
  rep.h3_sampled_fraction = static_cast<double>(ok) / sample_count;

  // H4: zero scan of V^
  const AnalyticFunction vhat = [&](cplx z) { return fourier(spec, z); };
  const double R = opt.h4_box, eta = opt.h4_strip;
  rep.zeros_upper = detail::winding_with_jitter(vhat, {-R, R, eta, R});
  rep.zeros_lower = detail::winding_with_jitter(vhat, {-R, R, -R, -eta});
  rep.zeros_real_strip = detail::winding_with_jitter(vhat, {-R, R, -eta, eta});
  if (rep.zeros_upper == 0 && rep.zeros_lower == 0 && rep.zeros_real_strip == 0) {
    rep.h4_zero_halfplane = ZeroHalfPlane::zero_free;
  } else if (rep.zeros_real_strip == 0 && rep.zeros_lower == 0) {
    rep.h4_zero_halfplane = ZeroHalfPlane::upper;
  } else if (rep.zeros_real_strip == 0 && rep.zeros_upper == 0) {
    rep.h4_zero_halfplane = ZeroHalfPlane::lower;
  } else {
    rep.h4_zero_halfplane = ZeroHalfPlane::mixed;
  }
  return rep;
}

}  // namespace reslab
