#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "common.hpp"
#include "parallel.hpp"
#include "potential.hpp"
#include "quadrature.hpp"

namespace reslab {

/// Radius of the exclusion disk around the 1/k pole of the free resolvent.
inline constexpr double k_min = 1e-3;

inline void require_away_from_pole(cplx k) {
  if (!finite(k)) throw validation_error("k must be finite");
  if (std::abs(k) < k_min) {
    throw pole_proximity_error("|k| = " + std::to_string(std::abs(k)) + " is inside the exclusion disk |k| < " +
                               std::to_string(k_min));
  }
}

namespace detail {

inline constexpr double ladder_step = 0.1;
inline constexpr int ladder_top = 1000;  // L up to 100

inline bool tail_below(const PotentialSpec& spec, double L, double log_eps, double growth, double rotation) {
  const cplx dir = std::polar(1.0, rotation);
  const double lift = 2.0 * growth * L;
  return spec.log_abs_at(L * dir) + lift < log_eps && spec.log_abs_at(-L * dir) + lift < log_eps;
}

}  // namespace detail

/// Smallest L on the ladder 0.1, 0.2, ..., 100 such that
/// |V(+-L' e^{i rotation})| e^{2 |max_im| L'} < eps for every ladder L' >= L.
/// Compactly supported potentials return their support radius.
inline double truncation_radius(const PotentialSpec& spec, double eps, double max_im, double rotation = 0.0) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw validation_error("truncation_radius: eps must be positive");
  if (!std::isfinite(max_im)) throw validation_error("truncation_radius: max_im must be finite");
  if (auto r = spec.support_radius()) {
    if (rotation != 0.0) throw validation_error("truncation_radius: compactly supported potential cannot be rotated");
    return *r;
  }
  const double growth = std::abs(max_im);
  const double log_eps = std::log(eps);
  using detail::ladder_step;
  using detail::ladder_top;
  if (!detail::tail_below(spec, ladder_top * ladder_step, log_eps, growth, rotation)) {
    throw truncation_error("truncation_radius: decay too slow for |Im k| <= " + std::to_string(growth),
                           std::numeric_limits<double>::infinity());
  }
  for (int m = ladder_top - 1; m >= 1; --m) {
    if (!detail::tail_below(spec, m * ladder_step, log_eps, growth, rotation)) return (m + 1) / 10.0;
  }
  return ladder_step;
}

/// Integration contour x = s e^{i rotation}, s in [-radius, radius].
struct Contour {
  double rotation = 0.0;
  double radius = 0.0;
  double cancellation = 0.0;  // estimated digits lost, natural-log scale
};

/// Estimated log of the worst 2x2-minor magnitude of the discretized kernel
/// relative to the Born value of D: large values mean the determinant is
/// computed from cancelling terms.
inline double cancellation_exponent(const PotentialSpec& spec, cplx k, double rotation, double radius,
                                    double log_born = 0.0) {
  const double g = std::max(0.0, -(k * std::polar(1.0, rotation)).imag());
  const cplx dir = std::polar(1.0, rotation);
  constexpr int n = 801;
  double best = -std::numeric_limits<double>::infinity();
  double prefix = best;
  for (int i = 0; i < n; ++i) {
    const double s = -radius + 2.0 * radius * i / (n - 1);
    const double l = spec.is_analytic() ? spec.log_abs_at(s * dir) : std::log(std::abs(spec(s)));
    prefix = std::max(prefix, l - 2.0 * g * s);
    best = std::max(best, l + 2.0 * g * s + prefix);
  }
  return best - std::log(4.0 * std::norm(k)) - std::max(0.0, log_born);
}

/// ln|1 + V^(2k) V^(-2k) / (4k^2)|, the leading large-|k| form of ln|D|.
inline double log_abs_born_determinant(const PotentialSpec& spec, cplx k) {
  const cplx p = fourier(spec, 2.0 * k) * fourier(spec, -2.0 * k) / (4.0 * k * k);
  if (!finite(p)) return std::numeric_limits<double>::max();
  const double a = std::abs(1.0 + p);
  return a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
}

/// Contour for evaluating D(k). Real axis in the closed upper half plane and
/// for non-analytic potentials; otherwise the smallest rotation (sign of
/// Re k) whose cancellation estimate fits the budget.
inline Contour choose_contour(const PotentialSpec& spec, cplx k, double eps = 1e-12, double budget = 14.0) {
  require_away_from_pole(k);
  Contour c;
  if (!spec.is_analytic() || k.imag() >= 0.0 || spec.is_trivial()) {
    c.radius = truncation_radius(spec, eps, std::max(0.0, -k.imag()));
    c.cancellation = k.imag() < 0.0 ? cancellation_exponent(spec, k, 0.0, c.radius) : 0.0;
    return c;
  }
  const double sign = k.real() >= 0.0 ? 1.0 : -1.0;
  const double limit = 0.9 * spec.decay_sector();
  double log_born = 0.0;
  try {
    log_born = log_abs_born_determinant(spec, k);
  } catch (const numerical_error&) {
    log_born = 0.0;
  }
  std::optional<Contour> best;
  for (int j = 0; j * 0.02 <= limit; ++j) {
    const double phi = sign * j * 0.02;
    const double g = std::max(0.0, -(k * std::polar(1.0, phi)).imag());
    double L = 0.0;
    try {
      L = truncation_radius(spec, eps, g, phi);
    } catch (const truncation_error&) {
      continue;
    }
    const double e = cancellation_exponent(spec, k, phi, L, log_born);
    if (!best || e < best->cancellation) best = Contour{phi, L, e};
    if (e <= budget) return Contour{phi, L, e};
  }
  if (!best) throw truncation_error("choose_contour: no admissible contour", std::numeric_limits<double>::infinity());
  return *best;
}

/// Nystrom discretization of V^{1/2} R_0(k) |V|^{1/2}:
/// entries(i, j) = a_i G(x_i, x_j; k) b_j with a_i b_i = V(x_i) w_i e^{i rotation}.
/// On the real axis a_i = w_i^{1/2} V/|V|^{1/2}(x_i), b_j = |V|^{1/2}(x_j) w_j^{1/2}.
struct KernelMatrix {
  cplx k;
  Eigen::MatrixXcd entries;
  std::shared_ptr<const QuadratureRule> rule;
  std::shared_ptr<const PotentialSpec> spec;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
};

inline KernelMatrix assemble_kernel(const PotentialSpec& spec, const QuadratureRule& rule, cplx k) {
  require_away_from_pole(k);
  if (rule.rotation != 0.0 && !spec.is_analytic()) {
    throw validation_error("assemble_kernel: rotated contour needs an analytic potential");
  }
  const std::size_t n = rule.size();
  const cplx J = rule.jacobian();
  const cplx kappa = k * J;
  const cplx pref = I / (2.0 * k);

  std::vector<cplx> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rule.rotation == 0.0) {
      const SqrtSplit sp = sqrt_split(spec(rule.nodes[i]));
      const double sw = std::sqrt(rule.weights[i]);
      a[i] = sw * sp.signed_root;
      b[i] = sp.abs_root * sw;
    } else {
      a[i] = b[i] = std::sqrt(spec.at(rule.point(i)) * rule.weights[i] * J);
    }
  }

  KernelMatrix km;
  km.k = k;
  km.rule = std::make_shared<const QuadratureRule>(rule);
  km.spec = std::make_shared<const PotentialSpec>(spec);
  km.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const cplx g = pref * std::exp(I * kappa * std::abs(rule.nodes[i] - rule.nodes[j]));
      km.entries(i, j) = a[i] * g * b[j];
      km.entries(j, i) = a[j] * g * b[i];
    }
  }
  return km;
}

/// det(I + K) in log-polar form.
struct LogDet {
  double log_abs = 0.0;
  double phase = 0.0;
  cplx value() const {
    return log_abs == -std::numeric_limits<double>::infinity() ? cplx(0.0) : std::exp(cplx(log_abs, phase));
  }
};

inline LogDet log_det_identity_plus(const Eigen::MatrixXcd& K) {
  Eigen::MatrixXcd A = K;
  A.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const Eigen::MatrixXcd& U = lu.matrixLU();
  LogDet r;
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    const cplx u = U(i, i);
    if (u == 0.0) {
      r.log_abs = -std::numeric_limits<double>::infinity();
      r.phase = 0.0;
      return r;
    }
    r.log_abs += std::log(std::abs(u));
    r.phase += std::arg(u);
  }
  if (lu.permutationP().determinant() < 0) r.phase += pi;
  r.phase = std::remainder(r.phase, 2.0 * pi);
  if (!std::isfinite(r.log_abs)) throw numerical_error("fredholm_det: factorization produced non-finite pivots");
  return r;
}

/// det(I + K) for the Nystrom matrix on `rule` without forming it.
///
/// The free kernel is semiseparable, so det(I + G diag(V w)) equals the
/// (2,2) entry of a product of unimodular 2x2 transfer matrices, one per
/// node. The product is carried in the frame diag(e^{i kappa s}, e^{-i kappa s})
/// with a running log scale, so only local factors e^{+-i kappa h} appear.
/// Agrees with log_det_identity_plus(assemble_kernel(...).entries) to
/// rounding and costs O(N).
inline LogDet transfer_log_det(const PotentialSpec& spec, const QuadratureRule& rule, cplx k) {
  require_away_from_pole(k);
  if (rule.rotation != 0.0 && !spec.is_analytic()) {
    throw validation_error("transfer_log_det: rotated contour needs an analytic potential");
  }
  const std::size_t n = rule.size();
  const cplx J = rule.jacobian();
  const cplx kappa = k * J;
  const cplx alpha = I / (2.0 * k);
  cplx v1 = 0.0, v2 = 1.0;
  double log_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const cplx e = std::exp(I * kappa * (rule.nodes[i] - rule.nodes[i - 1]));
      v1 *= e;
      v2 /= e;
    }
    const cplx vx = rule.rotation == 0.0 ? cplx(spec(rule.nodes[i])) : spec.at(rule.point(i));
    const cplx ad = alpha * vx * rule.weights[i] * J;
    const cplx n1 = (1.0 - ad) * v1 - ad * v2;
    const cplx n2 = ad * v1 + (1.0 + ad) * v2;
    v1 = n1;
    v2 = n2;
    const double m = std::max(std::abs(v1), std::abs(v2));
    if (m > 0.0 && std::isfinite(m)) {
      v1 /= m;
      v2 /= m;
      log_scale += std::log(m);
    } else if (!std::isfinite(m)) {
      throw numerical_error("transfer_log_det: non-finite transfer state");
    }
  }
  LogDet r;
  if (v2 == 0.0) {
    r.log_abs = -std::numeric_limits<double>::infinity();
    return r;
  }
  const double span = rule.nodes.back() - rule.nodes.front();
  r.log_abs = log_scale + std::log(std::abs(v2)) - kappa.imag() * span;
  r.phase = std::remainder(std::arg(v2) + kappa.real() * span, 2.0 * pi);
  return r;
}

struct DeterminantValue {
  cplx k;
  cplx D;
  double log_abs = 0.0;
  double phase = 0.0;
  int N = 0;
  double refinement_delta = std::numeric_limits<double>::infinity();  // |D_N - D_{N/2}|
  bool converged = false;
  double rotation = 0.0;
  double radius = 0.0;
};

namespace detail {

/// |D_a - D_b| / max(1, |D_a|) from log-polar values.
inline double scaled_difference(const LogDet& a, const LogDet& b) {
  if (a.log_abs == -std::numeric_limits<double>::infinity()) return std::abs(b.value());
  const cplx ratio = std::exp(cplx(b.log_abs - a.log_abs, b.phase - a.phase));
  const double rel = std::abs(1.0 - ratio);
  return a.log_abs > 0.0 ? rel : rel * std::exp(a.log_abs);
}

inline DeterminantValue make_value(cplx k, const LogDet& full, const LogDet& half, int N, double tol,
                                   const QuadratureRule& rule) {
  DeterminantValue v;
  v.k = k;
  v.log_abs = full.log_abs;
  v.phase = full.phase;
  v.D = full.value();
  v.N = N;
  const double scaled = scaled_difference(full, half);
  v.refinement_delta = full.log_abs > 0.0 ? scaled * std::exp(full.log_abs) : scaled;
  v.converged = scaled <= tol;
  v.rotation = rule.rotation;
  v.radius = rule.interval_radius;
  return v;
}

/// Node count of the rule one resolution level coarser.
inline int half_resolution(const QuadratureRule& rule) {
  const int n = static_cast<int>(rule.size());
  return rule.kind == RuleKind::trapezoid ? (n - 1) / 2 + 1 : n / 2;
}

}  // namespace detail

/// D = det(I + entries) by pivoted LU; the refinement delta re-assembles the
/// same kernel at half resolution. No extrapolation is applied.
inline DeterminantValue fredholm_det(const KernelMatrix& km, double tol = 1e-8) {
  const LogDet full = log_det_identity_plus(km.entries);
  const int N = static_cast<int>(km.size());
  const int half_n = detail::half_resolution(*km.rule);
  if (half_n >= 8 && km.spec) {
    const QuadratureRule half_rule = build_rule(km.rule->interval_radius, half_n, km.rule->kind, km.rule->rotation);
    const LogDet half = log_det_identity_plus(assemble_kernel(*km.spec, half_rule, km.k).entries);
    return detail::make_value(km.k, full, half, N, tol, *km.rule);
  }
  DeterminantValue v;
  v.k = km.k;
  v.log_abs = full.log_abs;
  v.phase = full.phase;
  v.D = full.value();
  v.N = N;
  v.rotation = km.rule->rotation;
  v.radius = km.rule->interval_radius;
  return v;
}

struct DeterminantOptions {
  double tol = 1e-8;
  int n_start = 64;  // coarsest level, nodes
  int n_max = 16385;  // cap on the node count of the finest level
  double truncation_eps = 1e-12;
  RuleKind kind = RuleKind::trapezoid;
  bool use_lu = false;    // factor the assembled matrix instead of the transfer recursion
  int romberg_depth = 3;  // h^2 elimination steps; 0 disables extrapolation
  double max_phase_step = 1.0;  // bound on h |k| at the coarsest level
  bool allow_rotation = true;
  double cancellation_budget = 14.0;
  std::optional<double> rotation;  // force the contour angle
  std::optional<double> radius;    // force the truncation radius
};

/// Contour used by the adaptive evaluators for a given k.
inline Contour contour_for(const PotentialSpec& spec, cplx k, const DeterminantOptions& opt) {
  Contour c;
  if (opt.rotation) {
    c.rotation = *opt.rotation;
    c.radius = opt.radius ? *opt.radius
                          : truncation_radius(spec, opt.truncation_eps,
                                              std::max(0.0, -(k * std::polar(1.0, c.rotation)).imag()), c.rotation);
    return c;
  }
  if (opt.allow_rotation) {
    c = choose_contour(spec, k, opt.truncation_eps, opt.cancellation_budget);
  } else {
    c.radius = truncation_radius(spec, opt.truncation_eps, std::max(0.0, -k.imag()));
  }
  if (opt.radius) c.radius = *opt.radius;
  return c;
}

/// Shortest length over which V changes appreciably.
inline double feature_scale(const PotentialSpec& spec) {
  const auto& fam = spec.family();
  if (const auto* g = std::get_if<Gaussian>(&fam)) return g->width;
  if (const auto* sg = std::get_if<SuperGaussian>(&fam)) return sg->width / std::sqrt(double(sg->power));
  if (const auto* gs = std::get_if<GaussianSum>(&fam)) {
    double w = gs->terms.front().width;
    for (const auto& t : gs->terms) w = std::min(w, t.width);
    return w;
  }
  if (const auto* sw = std::get_if<SquareWell>(&fam)) return sw->half_width;
  const auto& t = std::get<Tabulated>(fam);
  double h = t.x.back() - t.x.front();
  for (std::size_t i = 1; i < t.x.size(); ++i) h = std::min(h, t.x[i] - t.x[i - 1]);
  return 4.0 * h;
}

/// Node counts of the resolution ladder for a contour: the coarsest level
/// resolves both the oscillation e^{i k x} and the potential.
inline std::vector<int> resolution_ladder(const PotentialSpec& spec, cplx k, const Contour& c,
                                          const DeterminantOptions& opt) {
  const bool trap = opt.kind == RuleKind::trapezoid;
  const double step = std::min(opt.max_phase_step / std::max(1.0, std::abs(k)), 0.5 * feature_scale(spec));
  int n = std::max(16, opt.n_start);
  auto spacing = [&](int m) { return 2.0 * c.radius / (trap ? m - 1 : m); };
  while (spacing(n) > step && 2 * n + (trap ? 1 : 0) <= opt.n_max) n *= 2;
  std::vector<int> ladder;
  for (int m = n; m <= std::max(n, opt.n_max); m *= 2) {
    const int nodes = trap ? m + 1 : m;
    if (nodes > opt.n_max && !ladder.empty()) break;
    ladder.push_back(nodes);
  }
  return ladder;
}

/// D(k) on the resolution ladder with Richardson elimination of the h^2, h^4,
/// ... error terms. Refinement stops when two successive extrapolated values
/// agree to tol max(1, |D|); the reported delta is their difference.
inline DeterminantValue evaluate_determinant(const PotentialSpec& spec, cplx k,
                                             const DeterminantOptions& opt = {}) {
  require_away_from_pole(k);
  if (!(opt.tol > 0.0)) throw validation_error("tolerance must be positive");
  if (spec.is_trivial()) {
    DeterminantValue one;
    one.k = k;
    one.D = 1.0;
    one.refinement_delta = 0.0;
    one.converged = true;
    return one;
  }
  const Contour c = contour_for(spec, k, opt);
  const std::vector<int> ladder = resolution_ladder(spec, k, c, opt);

  std::vector<LogDet> raw;
  std::vector<std::vector<cplx>> table;  // scaled by exp(-scale)
  double scale = 0.0;
  DeterminantValue v;
  v.k = k;
  v.rotation = c.rotation;
  v.radius = c.radius;
  cplx prev_best = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t level = 0; level < ladder.size(); ++level) {
    const QuadratureRule rule = build_rule(c.radius, ladder[level], opt.kind, c.rotation);
    raw.push_back(opt.use_lu ? log_det_identity_plus(assemble_kernel(spec, rule, k).entries)
                             : transfer_log_det(spec, rule, k));
    if (level == 0) scale = std::max(0.0, raw[0].log_abs);
    auto scaled = [&](const LogDet& d) {
      return d.log_abs == -std::numeric_limits<double>::infinity() ? cplx(0.0)
                                                                    : std::exp(cplx(d.log_abs - scale, d.phase));
    };
    std::vector<cplx> row{scaled(raw.back())};
    const int depth = std::min<int>(opt.romberg_depth, static_cast<int>(level));
    for (int l = 1; l <= depth; ++l) {
      const double f = std::pow(4.0, l);
      row.push_back((f * row[l - 1] - table[level - 1][l - 1]) / (f - 1.0));
    }
    table.push_back(row);
    const cplx best = row.back();
    v.N = ladder[level];
    if (level > 0) {
      const double diff = std::abs(best - prev_best);
      const double mag = std::abs(best);
      v.refinement_delta = diff * std::exp(scale);  // may overflow; the test below stays in scaled units
      v.converged = std::isfinite(diff) && diff <= opt.tol * std::max(std::exp(-scale), mag);
    }
    v.log_abs = std::abs(best) > 0.0 ? std::log(std::abs(best)) + scale : -std::numeric_limits<double>::infinity();
    v.phase = std::arg(best);
    v.D = std::abs(best) > 0.0 ? std::exp(cplx(v.log_abs, v.phase)) : cplx(0.0);
    prev_best = best;
    if (v.converged) break;
  }
  return v;
}

/// Row-major field over a rectangle; row index runs over Im k ascending.
struct DetGrid {
  ContourRegion region;
  int nx = 0;
  int ny = 0;
  std::vector<DeterminantValue> values;
  std::vector<char> masked;

  cplx point(int ix, int iy) const {
    const double re = nx == 1 ? region.re_min : region.re_min + region.width() * ix / (nx - 1);
    const double im = ny == 1 ? region.im_min : region.im_min + region.height() * iy / (ny - 1);
    return {re, im};
  }
};

template <class Evaluate>
DetGrid det_grid_with(const ContourRegion& region, int nx, int ny, Evaluate&& eval, int threads = 1) {
  region.validate();
  if (nx < 1 || ny < 1) throw validation_error("det_grid: resolution must be positive");
  DetGrid g;
  g.region = region;
  g.nx = nx;
  g.ny = ny;
  const std::size_t total = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  g.values.resize(total);
  g.masked.assign(total, 0);
  parallel_for(total, threads, [&](std::size_t idx) {
    const int ix = static_cast<int>(idx % nx), iy = static_cast<int>(idx / nx);
    const cplx k = g.point(ix, iy);
    if (std::abs(k) < k_min) {
      g.masked[idx] = 1;
      DeterminantValue v;
      v.k = k;
      v.D = cplx(std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN());
      v.converged = false;
      g.values[idx] = v;
      return;
    }
    g.values[idx] = eval(k);
  });
  return g;
}

inline DetGrid det_grid(const PotentialSpec& spec, const ContourRegion& region, int nx, int ny,
                        const DeterminantOptions& opt = {}, int threads = 1) {
  return det_grid_with(
      region, nx, ny, [&](cplx k) { return evaluate_determinant(spec, k, opt); }, threads);
}

/// E(-k) = D(k) / D(-k).
inline cplx scattering_det(const PotentialSpec& spec, cplx k, const DeterminantOptions& opt = {}) {
  const DeterminantValue num = evaluate_determinant(spec, k, opt);
  const DeterminantValue den = evaluate_determinant(spec, -k, opt);
  // also refuse when |D(-k)| is not resolved from zero at the achieved accuracy
  if (den.log_abs < std::log(std::max(1e-13, 10.0 * den.refinement_delta))) {
    throw numerical_error("scattering_det: |D(-k)| indistinguishable from 0, -k is at a resonance");
  }
  return std::exp(cplx(num.log_abs - den.log_abs, num.phase - den.phase));
}

}  // namespace reslab
