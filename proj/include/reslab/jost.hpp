#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "common.hpp"
#include "determinant.hpp"
#include "potential.hpp"
#include "quadrature.hpp"
#include "rootfinder.hpp"

namespace reslab {

enum class Side { plus, minus };

inline const char* to_string(Side s) { return s == Side::plus ? "plus" : "minus"; }

struct VolterraOptions {
  double truncation_eps = 1e-13;
  double panel_phase = 6.0;        // bound on 2|k| times the panel length
  int panels = 0;                  // 0 chooses from panel_phase and the feature scale
  bool picard = false;             // fixed-point iteration instead of panel marching
  int max_iterations = 500;        // Picard only
  double iteration_tol = 1e-14;    // Picard only, relative sup change
  double residual_tol = 1e-10;
  bool check_residual = true;
  std::optional<double> radius;
};

/// Symmetric composite Gauss-Legendre rule (16 nodes per panel) on
/// [-L, L] e^{i rotation}, with partial-integral matrices attached.
inline QuadratureRule volterra_rule(double L, int panels, double rotation = 0.0) {
  if (panels < 3) panels = 3;
  QuadratureRule rule = build_rule(L, panels * default_panel_order, RuleKind::gauss_legendre_composite, rotation);
  ensure_integration(rule);
  return rule;
}

/// Panel count for which every panel spans a bounded phase of e^{2ikx} and
/// at most two feature lengths of V.
inline int volterra_panels(const PotentialSpec& spec, cplx k, double L, const VolterraOptions& opt) {
  if (opt.panels > 0) return std::max(3, opt.panels);
  const double len = std::min(opt.panel_phase / (2.0 * std::max(1.0, std::abs(k))), 2.0 * feature_scale(spec));
  return std::max(3, static_cast<int>(std::ceil(2.0 * L / len)));
}

namespace detail {

inline std::vector<cplx> weighted_potential(const PotentialSpec& spec, const QuadratureRule& rule) {
  std::vector<cplx> w(rule.size());
  const cplx J = rule.jacobian();
  for (std::size_t i = 0; i < rule.size(); ++i) {
    w[i] = (rule.rotation == 0.0 ? cplx(spec(rule.nodes[i])) : spec.at(rule.point(i))) * J;
  }
  return w;
}

inline void require_symmetric(const QuadratureRule& rule) {
  const std::size_t n = rule.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(rule.nodes[i] + rule.nodes[n - 1 - i]) > 1e-12 * rule.interval_radius) {
      throw validation_error("Volterra rule must be symmetric about 0");
    }
  }
}

}  // namespace detail

/// t_i -> int_{s_i}^{L} e^{lambda (t - s_i)} F(t) dt on a panelled rule.
inline std::vector<cplx> tail_integral(const QuadratureRule& rule, cplx lambda, const std::vector<cplx>& F) {
  std::vector<cplx> out(rule.size());
  cplx T = 0.0;
  for (auto p = rule.panels.rbegin(); p != rule.panels.rend(); ++p) {
    const double hp = 0.5 * (p->b - p->a);
    const auto& S = p->integ->tail;
    const std::size_t n = p->count;
    for (std::size_t i = 0; i < n; ++i) {
      const double si = rule.nodes[p->first + i];
      cplx acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += S[i * n + j] * std::exp(lambda * (rule.nodes[p->first + j] - si)) * F[p->first + j];
      }
      out[p->first + i] = hp * acc + std::exp(lambda * (p->b - si)) * T;
    }
    cplx panel = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      panel += rule.weights[p->first + j] * std::exp(lambda * (rule.nodes[p->first + j] - p->a)) * F[p->first + j];
    }
    T = panel + std::exp(lambda * (p->b - p->a)) * T;
  }
  return out;
}

/// h_i -> int_{-L}^{s_i} e^{lambda (s_i - t)} F(t) dt on a panelled rule.
inline std::vector<cplx> head_integral(const QuadratureRule& rule, cplx lambda, const std::vector<cplx>& F) {
  std::vector<cplx> out(rule.size());
  cplx H = 0.0;
  for (const auto& p : rule.panels) {
    const double hp = 0.5 * (p.b - p.a);
    const auto& S = p.integ->head;
    const std::size_t n = p.count;
    for (std::size_t i = 0; i < n; ++i) {
      const double si = rule.nodes[p.first + i];
      cplx acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += S[i * n + j] * std::exp(lambda * (si - rule.nodes[p.first + j])) * F[p.first + j];
      }
      out[p.first + i] = hp * acc + std::exp(lambda * (si - p.a)) * H;
    }
    cplx panel = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      panel += rule.weights[p.first + j] * std::exp(lambda * (p.b - rule.nodes[p.first + j])) * F[p.first + j];
    }
    H = panel + std::exp(lambda * (p.b - p.a)) * H;
  }
  return out;
}

/// v_i -> int_{s_i}^{L} (e^{lambda (t - s_i)} - 1) F(t) dt, with the
/// difference formed inside each panel.
inline std::vector<cplx> volterra_tail(const QuadratureRule& rule, cplx lambda, const std::vector<cplx>& F) {
  std::vector<cplx> out(rule.size());
  cplx Tl = 0.0, T0 = 0.0;
  for (auto p = rule.panels.rbegin(); p != rule.panels.rend(); ++p) {
    const double hp = 0.5 * (p->b - p->a);
    const auto& S = p->integ->tail;
    const std::size_t n = p->count;
    for (std::size_t i = 0; i < n; ++i) {
      const double si = rule.nodes[p->first + i];
      cplx acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += S[i * n + j] * (std::exp(lambda * (rule.nodes[p->first + j] - si)) - 1.0) * F[p->first + j];
      }
      out[p->first + i] = hp * acc + std::exp(lambda * (p->b - si)) * Tl - T0;
    }
    cplx pl = 0.0, p0 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const cplx wf = rule.weights[p->first + j] * F[p->first + j];
      pl += std::exp(lambda * (rule.nodes[p->first + j] - p->a)) * wf;
      p0 += wf;
    }
    Tl = pl + std::exp(lambda * (p->b - p->a)) * Tl;
    T0 += p0;
  }
  return out;
}

struct VolterraSolution {
  std::vector<cplx> m;
  cplx jost = 1.0;        // 1 - (1/2ik) int V m
  int iterations = 0;     // 0 for panel marching
  double residual = 0.0;  // sup |m - 1 - K m| / max(1, sup |m|)
};

namespace detail {

/// m(s) = 1 + c int_s^L (e^{lambda (t - s)} - 1) W(t) m(t) dt by marching
/// panel by panel from the right.
inline std::vector<cplx> march_plus(const QuadratureRule& rule, cplx c, cplx lambda, const std::vector<cplx>& W) {
  std::vector<cplx> m(rule.size());
  cplx Tl = 0.0, T0 = 0.0;
  Eigen::MatrixXcd A;
  Eigen::VectorXcd rhs;
  for (auto p = rule.panels.rbegin(); p != rule.panels.rend(); ++p) {
    const double hp = 0.5 * (p->b - p->a);
    const auto& S = p->integ->tail;
    const auto n = static_cast<Eigen::Index>(p->count);
    A.setIdentity(n, n);
    rhs.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double si = rule.nodes[p->first + i];
      for (Eigen::Index j = 0; j < n; ++j) {
        const double sj = rule.nodes[p->first + j];
        A(i, j) -= c * hp * S[i * n + j] * (std::exp(lambda * (sj - si)) - 1.0) * W[p->first + j];
      }
      rhs(i) = 1.0 + c * (std::exp(lambda * (p->b - si)) * Tl - T0);
    }
    const Eigen::VectorXcd x = A.partialPivLu().solve(rhs);
    cplx pl = 0.0, p0 = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      m[p->first + j] = x(j);
      const cplx wf = rule.weights[p->first + j] * W[p->first + j] * x(j);
      pl += std::exp(lambda * (rule.nodes[p->first + j] - p->a)) * wf;
      p0 += wf;
    }
    Tl = pl + std::exp(lambda * (p->b - p->a)) * Tl;
    T0 += p0;
  }
  return m;
}

inline std::vector<cplx> apply_plus(const QuadratureRule& rule, cplx c, cplx lambda, const std::vector<cplx>& W,
                                    const std::vector<cplx>& m) {
  std::vector<cplx> F(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) F[i] = W[i] * m[i];
  std::vector<cplx> out = volterra_tail(rule, lambda, F);
  for (auto& v : out) v = 1.0 + c * v;
  return out;
}

inline double sup_abs(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace detail

/// Solve the Volterra equation for m_side(., k) on the given panelled rule:
///   m_plus(x)  = 1 + int_x^inf  (e^{2ik(t-x)} - 1)/(2ik) V(t) m_plus(t) dt
///   m_minus(x) = 1 + int_-inf^x (e^{2ik(x-t)} - 1)/(2ik) V(t) m_minus(t) dt
/// The rotation of the rule is honoured (x = s e^{i rotation}).
inline VolterraSolution solve_volterra(const PotentialSpec& spec, const QuadratureRule& rule, cplx k, Side side,
                                       const VolterraOptions& opt = {}) {
  require_away_from_pole(k);
  if (rule.panels.empty() || !rule.panels.front().integ) {
    throw validation_error("solve_volterra: rule needs panels with integration matrices");
  }
  const std::size_t n = rule.size();
  std::vector<cplx> W = detail::weighted_potential(spec, rule);
  if (side == Side::minus) {
    detail::require_symmetric(rule);
    std::reverse(W.begin(), W.end());
  }
  const cplx c = 1.0 / (2.0 * I * k);
  const cplx lambda = 2.0 * I * k * rule.jacobian();

  VolterraSolution sol;
  if (!opt.picard) {
    sol.m = detail::march_plus(rule, c, lambda, W);
  } else {
    sol.m.assign(n, 1.0);
    bool done = false;
    for (int it = 1; it <= opt.max_iterations; ++it) {
      std::vector<cplx> next = detail::apply_plus(rule, c, lambda, W, sol.m);
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - sol.m[i]));
      sol.m.swap(next);
      sol.iterations = it;
      if (!finite(sol.m.front()) || !finite(sol.m.back())) break;
      if (change <= opt.iteration_tol * std::max(1.0, detail::sup_abs(sol.m))) {
        done = true;
        break;
      }
    }
    if (!done && opt.max_iterations >= 100) {
      throw continuation_error("solve_volterra: fixed-point iteration did not contract",
                               0.5 * std::abs(k.imag()));
    }
  }

  cplx integral = 0.0;
  for (std::size_t i = 0; i < n; ++i) integral += rule.weights[i] * W[i] * sol.m[i];
  sol.jost = 1.0 - c * integral;

  if (opt.check_residual && (!opt.picard || opt.max_iterations >= 100)) {
    const std::vector<cplx> Km = detail::apply_plus(rule, c, lambda, W, sol.m);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(sol.m[i] - Km[i]));
    sol.residual = r / std::max(1.0, detail::sup_abs(sol.m));
    if (!(sol.residual < opt.residual_tol)) {
      throw continuation_error("solve_volterra: residual " + std::to_string(sol.residual) + " above tolerance",
                               0.5 * std::abs(k.imag()));
    }
  }
  if (side == Side::minus) std::reverse(sol.m.begin(), sol.m.end());
  return sol;
}

/// Truncation radius for the Jost quantities at k: the weights e^{+-2ikx} of
/// the off-diagonal T entries grow like e^{2|Im k| |x|}.
inline double jost_radius(const PotentialSpec& spec, cplx k, const VolterraOptions& opt) {
  if (opt.radius) return *opt.radius;
  return truncation_radius(spec, opt.truncation_eps, std::abs(k.imag()));
}

/// f_side(x, k) = 1 - m_side(x, -k) / D(-k) sampled on the rule nodes, where
/// m_side solves the Volterra equation at -k and D(-k) is the Jost value of
/// the same solution. f_plus vanishes as x -> -inf, f_minus as x -> +inf.
struct JostCorrection {
  cplx k;
  Side side = Side::plus;
  std::vector<cplx> values;   // f_side at rule nodes
  std::vector<cplx> m;        // m_side(., -k) at rule nodes
  cplx jost = 1.0;            // D(-k)
  std::shared_ptr<const QuadratureRule> rule;
  double sup_norm = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

inline JostCorrection solve_correction(const PotentialSpec& spec, cplx k, Side side, const QuadratureRule& rule,
                                       const VolterraOptions& opt = {}) {
  require_away_from_pole(k);
  QuadratureRule r = rule;
  if (r.panels.empty()) throw validation_error("solve_correction: rule must be a panelled rule");
  ensure_integration(r);
  const VolterraSolution sol = solve_volterra(spec, r, -k, side, opt);
  JostCorrection jc;
  jc.k = k;
  jc.side = side;
  jc.m = sol.m;
  jc.jost = sol.jost;
  jc.iterations = sol.iterations;
  jc.residual = sol.residual;
  if (std::abs(sol.jost) < 1e-13) {
    throw numerical_error("solve_correction: D(-k) vanishes, -k is a zero of the determinant");
  }
  jc.values.resize(sol.m.size());
  for (std::size_t i = 0; i < sol.m.size(); ++i) {
    jc.values[i] = 1.0 - sol.m[i] / sol.jost;
    jc.sup_norm = std::max(jc.sup_norm, std::abs(jc.values[i]));
  }
  jc.rule = std::make_shared<const QuadratureRule>(std::move(r));
  return jc;
}

inline JostCorrection solve_correction(const PotentialSpec& spec, cplx k, Side side, const VolterraOptions& opt = {}) {
  require_away_from_pole(k);
  const double L = jost_radius(spec, k, opt);
  return solve_correction(spec, k, side, volterra_rule(L, volterra_panels(spec, k, L, opt)), opt);
}

/// Estimate of C in |f_+-(x, k)| <= C/|k|: the largest |k| sup_x |f| over a
/// calibration set of k, raised to the large-|k| limit (1/2) int |V| if
/// that is larger.
inline double correction_bound_constant(const PotentialSpec& spec, const std::vector<cplx>& ks,
                                        const VolterraOptions& opt = {}) {
  const double L = truncation_radius(spec, opt.truncation_eps, 0.0);
  const QuadratureRule rule = volterra_rule(L, volterra_panels(spec, 1.0, L, opt));
  double C = 0.5 * integrate_real(rule, [&](double x) { return std::abs(spec(x)); });
  for (cplx k : ks) {
    for (Side s : {Side::plus, Side::minus}) {
      C = std::max(C, std::abs(k) * solve_correction(spec, k, s, opt).sup_norm);
    }
  }
  return C;
}

/// D(k) from the Volterra solution, D = 1 - (1/2ik) int V m_plus(., k), on
/// the same contour the Fredholm evaluator would use. Panels are doubled
/// until two levels agree to tol max(1, |D|).
inline DeterminantValue jost_determinant(const PotentialSpec& spec, cplx k, double tol = 1e-10,
                                         const VolterraOptions& opt = {}) {
  require_away_from_pole(k);
  DeterminantOptions dopt;
  dopt.truncation_eps = opt.truncation_eps;
  const Contour c = contour_for(spec, k, dopt);
  const double L = opt.radius ? *opt.radius : c.radius;
  int panels = volterra_panels(spec, k, L, opt);
  VolterraOptions vo = opt;
  vo.check_residual = false;
  DeterminantValue v;
  v.k = k;
  v.rotation = c.rotation;
  v.radius = L;
  cplx prev = std::numeric_limits<double>::quiet_NaN();
  for (int level = 0; level < 8; ++level, panels *= 2) {
    const QuadratureRule rule = volterra_rule(L, panels, c.rotation);
    const cplx d = solve_volterra(spec, rule, k, Side::plus, vo).jost;
    if (!finite(d)) throw numerical_error("jost_determinant: overflow in the Volterra solution");
    v.D = d;
    v.N = static_cast<int>(rule.size());
    if (level > 0) {
      v.refinement_delta = std::abs(d - prev);
      v.converged = v.refinement_delta <= tol * std::max(1.0, std::abs(d));
      if (v.converged) break;
    }
    prev = d;
  }
  v.log_abs = std::abs(v.D) > 0.0 ? std::log(std::abs(v.D)) : -std::numeric_limits<double>::infinity();
  v.phase = std::arg(v.D);
  return v;
}

/// T11..T22 at k as they enter E(-k), each integral normalised by D(-k):
///   T11 = int V (1 - f_+),        T22 = int V (1 - f_-),
///   T12 = int e^{2ikx} V (1 - f_-), T21 = int e^{-2ikx} V (1 - f_+).
struct TMatrix {
  cplx k;
  cplx T11, T12, T21, T22;
  cplx jost = 1.0;  // D(-k)
  double radius = 0.0;
  int N = 0;
  double refinement_delta = 0.0;
  double integrand_scale = 0.0;  // largest sum of |integrand| weights, the cancellation floor
};

namespace detail {

/// V(x) e^{z} without forming the two factors separately.
inline cplx potential_times_exp(const PotentialSpec& spec, double x, cplx z) {
  const double v = spec(x);
  if (v == 0.0) return 0.0;
  const double la = spec.log_abs_at(cplx(x)) + z.real();
  return std::polar(std::exp(la), z.imag() + (v < 0.0 ? pi : 0.0));
}

inline TMatrix t_matrix_on(const PotentialSpec& spec, cplx k, const QuadratureRule& rule, const VolterraOptions& opt) {
  const JostCorrection fp = solve_correction(spec, k, Side::plus, rule, opt);
  const JostCorrection fm = solve_correction(spec, k, Side::minus, rule, opt);
  TMatrix t;
  t.k = k;
  t.jost = fp.jost;
  t.radius = rule.interval_radius;
  t.N = static_cast<int>(rule.size());
  t.T11 = t.T12 = t.T21 = t.T22 = 0.0;
  double s11 = 0.0, s12 = 0.0, s21 = 0.0, s22 = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double x = rule.nodes[i];
    const double w = rule.weights[i];
    const cplx gp = 1.0 - fp.values[i], gm = 1.0 - fm.values[i];
    const cplx v = spec(x);
    const cplx a11 = w * v * gp, a22 = w * v * gm;
    const cplx a12 = w * potential_times_exp(spec, x, 2.0 * I * k * x) * gm;
    const cplx a21 = w * potential_times_exp(spec, x, -2.0 * I * k * x) * gp;
    t.T11 += a11;
    t.T22 += a22;
    t.T12 += a12;
    t.T21 += a21;
    s11 += std::abs(a11);
    s22 += std::abs(a22);
    s12 += std::abs(a12);
    s21 += std::abs(a21);
  }
  t.integrand_scale = std::max({s11, s12, s21, s22});
  return t;
}

}  // namespace detail

/// T-matrix on the real line, refined by panel doubling until the entries
/// agree to tol max(1, |T|) or to the rounding floor of their integrands.
inline TMatrix t_matrix(const PotentialSpec& spec, cplx k, const VolterraOptions& opt = {}, double tol = 1e-10) {
  require_away_from_pole(k);
  const double L = jost_radius(spec, k, opt);
  int panels = volterra_panels(spec, k, L, opt);
  TMatrix prev = detail::t_matrix_on(spec, k, volterra_rule(L, panels), opt);
  if (opt.panels > 0) return prev;
  for (int level = 0; level < 6; ++level) {
    panels *= 2;
    TMatrix next = detail::t_matrix_on(spec, k, volterra_rule(L, panels), opt);
    double delta = 0.0, mag = 1.0;
    const cplx a[4] = {prev.T11, prev.T12, prev.T21, prev.T22};
    const cplx b[4] = {next.T11, next.T12, next.T21, next.T22};
    for (int j = 0; j < 4; ++j) {
      delta = std::max(delta, std::abs(a[j] - b[j]));
      mag = std::max(mag, std::abs(b[j]));
    }
    next.refinement_delta = delta;
    if (delta <= tol * mag + 1e-13 * next.integrand_scale) return next;
    prev = next;
  }
  throw numerical_error("t_matrix: panel refinement did not converge");
}

/// det(I + (i/2k) T) for the 2x2 T-matrix at k; equals D(k)/D(-k).
inline cplx e_det_2x2(const TMatrix& t) {
  const cplx a = I / (2.0 * t.k);
  return (1.0 + a * t.T11) * (1.0 + a * t.T22) - a * a * t.T12 * t.T21;
}

inline cplx e_det_2x2(const PotentialSpec& spec, cplx k, const VolterraOptions& opt = {}) {
  if (spec.is_trivial()) {
    require_away_from_pole(k);
    return 1.0;
  }
  return e_det_2x2(t_matrix(spec, k, opt));
}

enum class BornTarget { T12, T21 };

inline const char* to_string(BornTarget t) { return t == BornTarget::T12 ? "T12" : "T21"; }

/// Neumann partial sums of T21 (or T12) at k in the lower half plane. The
/// normalised solution g = m_+(., -k)/D(-k) obeys
///   g = 1 + (i/2k) [ int_-inf^x V g + int_x^inf e^{-2ik(t-x)} V g ] =: 1 + A g,
/// and s_n = V^(2k) + sum_{j=1..n} int e^{-2ikx} V A^j 1 (mirrored for T12).
struct BornSeries {
  cplx k;
  BornTarget target = BornTarget::T21;
  std::vector<cplx> partial_sums;
  std::vector<cplx> terms;  // s_j - s_{j-1}, kept separately so ratios avoid cancellation
  std::optional<double> contraction_estimate;
};

inline constexpr int born_max_order = 8;

inline BornSeries born_series(const PotentialSpec& spec, cplx k, int n, BornTarget target = BornTarget::T21,
                              const VolterraOptions& opt = {}) {
  require_away_from_pole(k);
  if (!(k.imag() < 0.0)) throw validation_error("born_series: requires Im k < 0");
  if (n < 0 || n > born_max_order) throw validation_error("born_series: order must be in [0, 8]");
  BornSeries bs;
  bs.k = k;
  bs.target = target;
  const double sgn = target == BornTarget::T21 ? 1.0 : -1.0;
  bs.partial_sums.push_back(fourier(spec, sgn * 2.0 * k));
  bs.terms.push_back(bs.partial_sums.back());
  if (n > 0) {
    const double L = jost_radius(spec, k, opt);
    const QuadratureRule rule = volterra_rule(L, 2 * volterra_panels(spec, k, L, opt));
    const std::size_t N = rule.size();
    std::vector<cplx> V(N), weight(N);
    for (std::size_t i = 0; i < N; ++i) {
      V[i] = spec(rule.nodes[i]);
      weight[i] = rule.weights[i] * detail::potential_times_exp(spec, rule.nodes[i], -sgn * 2.0 * I * k * rule.nodes[i]);
    }
    const cplx a = I / (2.0 * k);
    const cplx lambda = -2.0 * I * k;
    std::vector<cplx> g(N, 1.0), F(N);
    for (int j = 1; j <= n; ++j) {
      for (std::size_t i = 0; i < N; ++i) F[i] = V[i] * g[i];
      const std::vector<cplx> near = target == BornTarget::T21 ? head_integral(rule, 0.0, F)
                                                               : tail_integral(rule, 0.0, F);
      const std::vector<cplx> far = target == BornTarget::T21 ? tail_integral(rule, lambda, F)
                                                              : head_integral(rule, lambda, F);
      cplx term = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        g[i] = a * (near[i] + far[i]);
        term += weight[i] * g[i];
      }
      bs.terms.push_back(term);
      bs.partial_sums.push_back(bs.partial_sums.back() + term);
    }
  }
  if (n >= 2) {
    const double num = std::abs(bs.terms[n]);
    const double den = std::abs(bs.terms[n - 1]);
    if (den > 0.0) bs.contraction_estimate = num / den;
  }
  return bs;
}

/// Jost determinant of the square well V = depth on |x| < a from plane-wave
/// matching at x = +-a:
///   D(k) = e^{2ika} [ cos 2qa - i (k^2 + q^2)/(2k) sin(2qa)/q ],  q^2 = k^2 - depth.
/// The bracket is even in q, so no branch of the square root enters.
inline cplx square_well_jost(double depth, double half_width, cplx k) {
  require_away_from_pole(k);
  if (depth == 0.0) return 1.0;
  const double a = half_width;
  const cplx q2 = k * k - depth;
  const cplx q = std::sqrt(q2);
  const cplx z = 2.0 * q * a;
  cplx sinc;  // sin(2qa)/q
  if (std::abs(z) < 1e-4) {
    sinc = 2.0 * a * (1.0 - z * z / 6.0 + z * z * z * z / 120.0);
  } else {
    sinc = std::sin(z) / q;
  }
  return std::exp(2.0 * I * k * a) * (std::cos(z) - I * (k * k + q2) / (2.0 * k) * sinc);
}

inline cplx square_well_jost(const SquareWell& w, cplx k) { return square_well_jost(w.depth, w.half_width, k); }

/// Zeros of the closed-form square-well Jost determinant in the region.
inline ResonanceSet transfer_matrix_resonances(const SquareWell& well, const ContourRegion& region,
                                               double tol = 1e-12, const FindOptions& fopt = {}) {
  region.validate();
  if (region.contains(0.0, k_min)) throw validation_error("transfer_matrix_resonances: region contains k = 0");
  ResonanceSet rs;
  if (well.depth == 0.0) {
    rs.region = region;
    rs.method = ZeroMethod::jost_oracle;
    rs.evaluator = "transfer_matrix";
    rs.tol = tol;
    return rs;
  }
  rs = find_zeros([&](cplx k) { return square_well_jost(well, k); }, region, tol, fopt, ZeroMethod::jost_oracle);
  rs.evaluator = "transfer_matrix";
  return rs;
}

inline ResonanceSet transfer_matrix_resonances(const PotentialSpec& spec, const ContourRegion& region,
                                               double tol = 1e-12, const FindOptions& fopt = {}) {
  const auto* w = std::get_if<SquareWell>(&spec.family());
  if (!w) throw validation_error("transfer_matrix_resonances: potential is not a square well");
  return transfer_matrix_resonances(*w, region, tol, fopt);
}

}  // namespace reslab
