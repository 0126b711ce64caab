#pragma once

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "common.hpp"
#include "determinant.hpp"
#include "fit.hpp"
#include "hypotheses.hpp"
#include "parallel.hpp"
#include "potential.hpp"
#include "rootfinder.hpp"

namespace reslab {

using LogModulus = std::function<double(cplx)>;

/// Memoised D(k) that uses D(-conj k) = conj D(k) for real potentials, so
/// only Re k >= 0 is ever evaluated.
inline AnalyticFunction determinant_function(const PotentialSpec& spec, const DeterminantOptions& opt = {}) {
  auto s = std::make_shared<const PotentialSpec>(spec);
  auto cache = std::make_shared<CachedFunction>([s, opt](cplx k) { return evaluate_determinant(*s, k, opt).D; });
  return [cache](cplx k) -> cplx {
    if (k.real() < 0.0) return std::conj((*cache)(-std::conj(k)));
    return (*cache)(k);
  };
}

// ---------------------------------------------------------------------------
// Indicator functions

struct IndicatorFit {
  double h = 0.0;
  double residual = 0.0;  // rms of the straight-line fit
  std::vector<double> radii_used;
  bool shrunk = false;    // some ladder points dropped for underflow
};

/// Least-squares slope of ln|f(r e^{i theta})| against r^rho.
inline IndicatorFit indicator_fit(const LogModulus& log_abs, double theta, double rho,
                                  const std::vector<double>& ladder) {
  if (ladder.size() < 5) throw validation_error("indicator: ladder needs at least 5 radii");
  if (!(rho > 0.0)) throw validation_error("indicator: rho must be positive");
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (!(ladder[i] > ladder[i - 1])) throw validation_error("indicator: ladder must be ascending");
  }
  std::vector<double> x, y;
  IndicatorFit out;
  for (double r : ladder) {
    const double v = log_abs(std::polar(r, theta));
    if (!std::isfinite(v)) {
      out.shrunk = true;
      continue;
    }
    x.push_back(std::pow(r, rho));
    y.push_back(v);
    out.radii_used.push_back(r);
  }
  if (x.size() < 3) throw numerical_error("indicator: fewer than three usable ladder points");
  const LinearFit f = linear_fit(x, y);
  out.h = f.slope;
  out.residual = f.rms;
  return out;
}

inline double indicator(const AnalyticFunction& f, double theta, double rho, const std::vector<double>& ladder) {
  return indicator_fit([&](cplx z) { return std::log(std::abs(f(z))); }, theta, rho, ladder).h;
}

struct IndicatorEstimate {
  std::vector<double> theta_grid;  // in [0, 2 pi)
  std::vector<double> h_values;
  double rho_used = 0.0;
  std::vector<double> radius_ladder;
  std::vector<double> fit_residuals;
  std::vector<char> shrunk;
};

inline double wrap_angle(double theta) {
  double t = std::fmod(theta, 2.0 * pi);
  if (t < 0.0) t += 2.0 * pi;
  return t;
}

inline IndicatorEstimate indicator_profile(const LogModulus& log_abs, double rho, const std::vector<double>& thetas,
                                           const std::vector<double>& ladder, int threads = 1) {
  IndicatorEstimate est;
  est.rho_used = rho;
  est.radius_ladder = ladder;
  est.theta_grid.resize(thetas.size());
  est.h_values.resize(thetas.size());
  est.fit_residuals.resize(thetas.size());
  est.shrunk.resize(thetas.size());
  parallel_for(thetas.size(), threads, [&](std::size_t i) {
    const IndicatorFit f = indicator_fit(log_abs, thetas[i], rho, ladder);
    est.theta_grid[i] = wrap_angle(thetas[i]);
    est.h_values[i] = f.h;
    est.fit_residuals[i] = f.residual;
    est.shrunk[i] = f.shrunk;
  });
  return est;
}

inline const std::vector<double>& default_determinant_ladder() {
  static const std::vector<double> ladder{4.0, 6.0, 8.0, 10.0, 12.0};
  return ladder;
}

/// h_D(theta) from ln|D| evaluated in log scale along each ray.
inline IndicatorEstimate indicator_of_D(const PotentialSpec& spec, double rho, const std::vector<double>& thetas,
                                        const std::vector<double>& ladder = default_determinant_ladder(),
                                        const DeterminantOptions& opt = {}, int threads = 1) {
  return indicator_profile([&](cplx k) { return evaluate_determinant(spec, k, opt).log_abs; }, rho, thetas, ladder,
                           threads);
}

/// h of V^ along rays, with ln|V^| from the transform.
inline IndicatorEstimate indicator_of_fourier(const PotentialSpec& spec, double rho, const std::vector<double>& thetas,
                                              const std::vector<double>& ladder = HypothesisOptions{}.radius_ladder) {
  return indicator_profile([&](cplx z) { return std::log(std::abs(fourier(spec, z))); }, rho, thetas, ladder);
}

/// 2^rho (h_up + h_down) cos(rho (theta + pi/2)) inside Gamma_-, 0 outside.
inline double predicted_indicator_of_D(double theta, double rho, double h_up, double h_down) {
  const double psi = angle_diff(theta, -0.5 * pi);
  if (std::abs(psi) < 0.5 * sector_alpha(rho)) return std::pow(2.0, rho) * (h_up + h_down) * std::cos(rho * psi);
  return 0.0;
}

// ---------------------------------------------------------------------------
// Counting law

struct CountingLawOptions {
  std::optional<double> rho;  // default: order estimate from hypothesis_check
  DeterminantOptions determinant;
  CountingOptions counting;
  HypothesisOptions hypotheses;
};

struct CountingReport {
  std::vector<double> radii;
  std::vector<int> measured_n;
  std::vector<int> unconverged_n;  // zeros within r whose Newton polish did not converge
  double rho = 0.0;
  double h_up = 0.0;    // h_{V^}(pi/2)
  double h_down = 0.0;  // h_{V^}(-pi/2)
  double predicted_constant = 0.0;
  double fitted_constant = 0.0;
  double relative_error = 0.0;
  std::optional<double> fitted_exponent;
  bool trivial_potential = false;
  bool order_at_most_one = false;  // outside the rho > 1 regime of the law
  std::vector<Zero> zeros;
};

/// 2^rho (h(pi/2) + h(-pi/2)) / (2 pi).
inline double predicted_counting_constant(double rho, double h_up, double h_down) {
  return std::pow(2.0, rho) * (h_up + h_down) / (2.0 * pi);
}

inline CountingReport counting_law_compare(const PotentialSpec& spec, const std::vector<double>& radii,
                                           const CountingLawOptions& opt = {}) {
  CountingReport rep;
  rep.radii = radii;
  if (spec.is_trivial()) {
    rep.trivial_potential = true;
    rep.measured_n.assign(radii.size(), 0);
    rep.unconverged_n.assign(radii.size(), 0);
    return rep;
  }
  rep.rho = opt.rho ? *opt.rho : power_fit(opt.hypotheses.radius_ladder, [&] {
    std::vector<double> y;
    for (double r : opt.hypotheses.radius_ladder) y.push_back(log_max_modulus(spec, r, opt.hypotheses.circle_samples));
    return y;
  }()).rho;
  rep.order_at_most_one = rep.rho <= 1.0 + order_margin;
  const LogModulus lv = [&](cplx z) { return std::log(std::abs(fourier(spec, z))); };
  rep.h_up = indicator_fit(lv, 0.5 * pi, rep.rho, opt.hypotheses.radius_ladder).h;
  rep.h_down = indicator_fit(lv, -0.5 * pi, rep.rho, opt.hypotheses.radius_ladder).h;
  rep.predicted_constant = predicted_counting_constant(rep.rho, rep.h_up, rep.h_down);

  const CountingResult cr = counting_function(determinant_function(spec, opt.determinant), radii, opt.counting);
  rep.measured_n = cr.counts;
  rep.zeros = cr.zeros;
  for (double r : radii) {
    int u = 0;
    for (const auto& z : cr.zeros) {
      if (std::abs(z.location) <= r && !z.converged) u += z.multiplicity;
    }
    rep.unconverged_n.push_back(u);
  }
  std::vector<double> x, y, lx, ly;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    x.push_back(std::pow(radii[i], rep.rho));
    y.push_back(rep.measured_n[i]);
    if (rep.measured_n[i] > 0) {
      lx.push_back(std::log(radii[i]));
      ly.push_back(std::log(static_cast<double>(rep.measured_n[i])));
    }
  }
  rep.fitted_constant = proportional_fit(x, y);
  rep.relative_error = rep.predicted_constant != 0.0
                           ? std::abs(rep.fitted_constant - rep.predicted_constant) / std::abs(rep.predicted_constant)
                           : std::numeric_limits<double>::infinity();
  if (lx.size() >= 2) rep.fitted_exponent = linear_fit(lx, ly).slope;
  return rep;
}

// ---------------------------------------------------------------------------
// Born approximation

/// 4k^2 + V^(2k) V^(-2k): zeros are those of 1 + V^(2k) V^(-2k)/(4k^2) away from 0.
inline AnalyticFunction born_condition(const PotentialSpec& spec) {
  auto s = std::make_shared<const PotentialSpec>(spec);
  return [s](cplx k) { return 4.0 * k * k + fourier(*s, 2.0 * k) * fourier(*s, -2.0 * k); };
}

struct BornPair {
  cplx resonance;
  std::optional<cplx> born_zero;
  double distance = std::numeric_limits<double>::infinity();
};

struct BornComparison {
  ResonanceSet resonances;
  ResonanceSet born_zeros;
  std::vector<BornPair> pairs;

  /// Mean pairing distance over resonances with r_lo < |k| < r_hi.
  std::optional<double> mean_distance(double r_lo, double r_hi) const {
    double s = 0.0;
    int n = 0;
    for (const auto& p : pairs) {
      const double a = std::abs(p.resonance);
      if (a > r_lo && a < r_hi) {
        s += p.distance;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return s / n;
  }
};

inline constexpr double born_min_abs_im = 1.0;

/// Pair every resonance with |Im k| >= 1 with its nearest Born zero.
inline std::vector<BornPair> born_pairing(const std::vector<Zero>& resonances, const std::vector<Zero>& born) {
  std::vector<BornPair> out;
  for (const auto& r : resonances) {
    if (std::abs(r.location.imag()) < born_min_abs_im) continue;
    BornPair p;
    p.resonance = r.location;
    for (const auto& b : born) {
      const double d = std::abs(b.location - r.location);
      if (d < p.distance) {
        p.distance = d;
        p.born_zero = b.location;
      }
    }
    out.push_back(p);
  }
  return out;
}

/// Zeros of the Born condition in a rectangle. Its phase turns like
/// e^{-2 k^2}, about 4|k| radians per unit length, so the edges are sampled
/// densely enough that no turn can alias between samples.
inline ResonanceSet born_condition_zeros(const PotentialSpec& spec, const ContourRegion& region, double tol = 1e-10,
                                         FindOptions opt = {}) {
  region.validate();
  const double kmax = std::max(std::abs(cplx(region.re_min, region.im_min)),
                               std::max(std::abs(cplx(region.re_max, region.im_min)),
                                        std::max(std::abs(cplx(region.re_min, region.im_max)),
                                                 std::abs(cplx(region.re_max, region.im_max)))));
  const double side = std::max(region.width(), region.height());
  opt.winding.initial_steps = std::max(opt.winding.initial_steps, static_cast<int>(std::ceil(8.0 * kmax * side)));
  ResonanceSet rs = find_zeros(born_condition(spec), region, tol, opt, ZeroMethod::born);
  rs.evaluator = "closed_form";
  return rs;
}

struct BornCompareOptions {
  DeterminantOptions determinant;
  FindOptions find;
  double tol = 1e-8;
  double born_margin = 1.0;  // Born zeros are searched in the region grown by this much
};

inline BornComparison born_zero_compare(const PotentialSpec& spec, const ContourRegion& region,
                                        const BornCompareOptions& opt = {}) {
  region.validate();
  if (region.contains(0.0, k_min)) throw validation_error("born_zero_compare: region contains k = 0");
  BornComparison bc;
  if (spec.is_trivial()) {
    bc.resonances.region = bc.born_zeros.region = region;
    bc.resonances.method = ZeroMethod::fredholm;
    bc.born_zeros.method = ZeroMethod::born;
    return bc;
  }
  bc.resonances = find_zeros(determinant_function(spec, opt.determinant), region, opt.tol, opt.find, ZeroMethod::fredholm);
  bc.resonances.evaluator = "nystrom";
  ContourRegion wide{region.re_min - opt.born_margin, region.re_max + opt.born_margin,
                     region.im_min - opt.born_margin, std::min(region.im_max + opt.born_margin, -0.5 * born_min_abs_im)};
  if (region.im_min > 0.0) wide.im_max = region.im_max + opt.born_margin;
  bc.born_zeros = born_condition_zeros(spec, wide, 1e-10, opt.find);
  bc.pairs = born_pairing(bc.resonances.zeros, bc.born_zeros.zeros);
  return bc;
}

// ---------------------------------------------------------------------------
// sigma(t) = int_0^t ln|V^(x + i y)| dx as y -> 0+

struct SigmaValue {
  double value = 0.0;      // extrapolated to y = 0
  double at_y = 0.0;
  double at_half_y = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

/// Points of [a, b] where |V^(x + i y)| has a sharp local minimum, located
/// by golden-section search; these are split points for the log integrand.
inline std::vector<double> near_zeros(const PotentialSpec& spec, double a, double b, double y) {
  constexpr int n = 2000;
  std::vector<double> m(n + 1);
  for (int i = 0; i <= n; ++i) m[i] = std::abs(fourier(spec, cplx(a + (b - a) * i / n, y)));
  std::vector<double> out;
  for (int i = 1; i < n; ++i) {
    if (!(m[i] <= m[i - 1] && m[i] <= m[i + 1])) continue;
    if (!(m[i] < 1e-2 * std::max(m[i - 1], m[i + 1]) || m[i] < 1e-6 * std::max(1.0, m[i - 1]))) {
      // shallow minimum; only a deep one produces a near-singular log
      const double lo = std::min(m[i - 1], m[i + 1]);
      if (!(m[i] < 0.5 * lo)) continue;
    }
    double lo = a + (b - a) * (i - 1) / n, hi = a + (b - a) * (i + 1) / n;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
      const double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
      if (std::abs(fourier(spec, cplx(c, y))) < std::abs(fourier(spec, cplx(d, y)))) {
        hi = d;
      } else {
        lo = c;
      }
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

inline double log_abs_fourier_integral(const PotentialSpec& spec, double t, double y) {
  if (t == 0.0) return 0.0;
  const double a = std::min(0.0, t), b = std::max(0.0, t);
  auto f = [&](double x) { return std::log(std::abs(fourier(spec, cplx(x, y)))); };
  std::vector<double> cuts{a};
  for (double c : near_zeros(spec, a, b, y)) {
    if (c > cuts.back() + 1e-12) cuts.push_back(c);
  }
  if (b > cuts.back()) cuts.push_back(b);
  boost::math::quadrature::tanh_sinh<double> ts;
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0, l1 = 0.0;
    const double piece = ts.integrate(f, cuts[i], cuts[i + 1], 1e-12, &err, &l1);
    if (!std::isfinite(piece) || err > 1e-8 * std::max(1.0, l1)) {
      throw numerical_error("sigma_integral: log singularity of V^ on [" + std::to_string(cuts[i]) + ", " +
                            std::to_string(cuts[i + 1]) + "] is not resolved");
    }
    v += piece;
  }
  return t >= 0.0 ? v : -v;
}

}  // namespace detail

/// Tanh-sinh quadrature split at the near-zeros of V^, then Richardson
/// extrapolation in y from y and y/2; the linear term in y is
/// removed, which also makes the result insensitive to y -> -y.
inline SigmaValue sigma_integral(const PotentialSpec& spec, double t, double y = 1e-4) {
  if (!std::isfinite(t)) throw validation_error("sigma_integral: t must be finite");
  if (!(y >= 0.0)) throw validation_error("sigma_integral: y must be non-negative");
  SigmaValue s;
  if (t == 0.0) return s;
  s.at_y = detail::log_abs_fourier_integral(spec, t, y);
  if (y == 0.0) {
    s.value = s.at_half_y = s.at_y;
    return s;
  }
  s.at_half_y = detail::log_abs_fourier_integral(spec, t, 0.5 * y);
  s.value = 2.0 * s.at_half_y - s.at_y;
  s.error_estimate = std::abs(s.value - s.at_half_y);
  return s;
}

// ---------------------------------------------------------------------------
// Uniqueness diagnostics

/// Pseudo-random k with 1 <= |k| <= 6 and -4 <= Im k <= -0.2.
inline std::vector<cplx> standard_test_set(int count = 100, std::uint64_t seed = 20240611) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> re(-6.0, 6.0), im(-4.0, -0.2);
  std::vector<cplx> ks;
  while (static_cast<int>(ks.size()) < count) {
    const cplx k(re(rng), im(rng));
    if (std::abs(k) >= 1.0 && std::abs(k) <= 6.0) ks.push_back(k);
  }
  return ks;
}

/// Greedy matching after sorting by |k|; infinity when cardinalities differ.
inline double resonance_set_distance(std::vector<Zero> a, std::vector<Zero> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  auto by_abs = [](const Zero& x, const Zero& y) { return std::abs(x.location) < std::abs(y.location); };
  std::sort(a.begin(), a.end(), by_abs);
  std::sort(b.begin(), b.end(), by_abs);
  std::vector<char> used(b.size(), 0);
  double worst = 0.0;
  for (const auto& z : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(z.location - b[j].location);
      if (d < best) {
        best = d;
        bi = j;
      }
    }
    used[bi] = 1;
    worst = std::max(worst, best);
  }
  return worst;
}

struct UniquenessOptions {
  ContourRegion region{-4.0, 4.0, -4.0, -0.1};
  std::vector<double> real_axis_grid;     // default: 401 points on [-10, 10]
  std::vector<cplx> k_test_set;           // default: standard_test_set()
  std::vector<double> sigma_t{0.5, 1.0, 2.0, 3.0, 4.0};
  double sigma_y = 1e-4;
  DeterminantOptions determinant;
  FindOptions find;
  double tol = 1e-9;
};

struct UniquenessReport {
  double resonance_set_distance = 0.0;
  double sup_D_difference = 0.0;         // sup |D_A - D_B| / max(1, |D_A|)
  double sup_absFT_difference = 0.0;     // sup ||V^_A| - |V^_B|| on the real grid
  double sigma_difference = 0.0;         // max_t |sigma_A(t) - sigma_B(t)|
  double born_product_difference = 0.0;  // sup |V^_A(2k)V^_A(-2k) - V^_B(2k)V^_B(-2k)| on the real grid
  ResonanceSet resonances_a;
  ResonanceSet resonances_b;
};

inline UniquenessReport uniqueness_compare(const PotentialSpec& a, const PotentialSpec& b,
                                           const UniquenessOptions& opt = {}) {
  UniquenessReport rep;
  std::vector<double> grid = opt.real_axis_grid;
  if (grid.empty()) {
    for (int i = 0; i <= 400; ++i) grid.push_back(-10.0 + 20.0 * i / 400.0);
  }
  const std::vector<cplx> ks = opt.k_test_set.empty() ? standard_test_set() : opt.k_test_set;

  auto search = [&](const PotentialSpec& s) {
    ResonanceSet rs;
    if (s.is_trivial()) {
      rs.region = opt.region;
    } else {
      rs = find_zeros(determinant_function(s, opt.determinant), opt.region, opt.tol, opt.find, ZeroMethod::fredholm);
    }
    rs.method = ZeroMethod::fredholm;
    rs.evaluator = "nystrom";
    return rs;
  };
  rep.resonances_a = search(a);
  rep.resonances_b = search(b);
  rep.resonance_set_distance = resonance_set_distance(rep.resonances_a.zeros, rep.resonances_b.zeros);

  for (cplx k : ks) {
    const DeterminantValue da = evaluate_determinant(a, k, opt.determinant);
    const DeterminantValue db = evaluate_determinant(b, k, opt.determinant);
    rep.sup_D_difference = std::max(rep.sup_D_difference, std::abs(da.D - db.D) / std::max(1.0, std::abs(da.D)));
  }
  for (double x : grid) {
    rep.sup_absFT_difference =
        std::max(rep.sup_absFT_difference, std::abs(std::abs(fourier(a, x)) - std::abs(fourier(b, x))));
    const cplx pa = fourier(a, 2.0 * x) * fourier(a, -2.0 * x);
    const cplx pb = fourier(b, 2.0 * x) * fourier(b, -2.0 * x);
    rep.born_product_difference = std::max(rep.born_product_difference, std::abs(pa - pb));
  }
  if (!a.is_trivial() && !b.is_trivial()) {
    for (double t : opt.sigma_t) {
      const double d = std::abs(sigma_integral(a, t, opt.sigma_y).value - sigma_integral(b, t, opt.sigma_y).value);
      rep.sigma_difference = std::max(rep.sigma_difference, d);
    }
  } else if (a.is_trivial() != b.is_trivial()) {
    rep.sigma_difference = std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace reslab
