#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "common.hpp"

namespace reslab {

/// Nodes and weights on the reference interval [-1, 1], ascending.
struct ReferenceRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> bary;  // barycentric interpolation weights
};

namespace detail {

inline std::vector<double> barycentric_weights(const std::vector<double>& u) {
  const std::size_t n = u.size();
  std::vector<double> b(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t m = 0; m < n; ++m) {
      if (m != j) b[j] *= 2.0 * (u[j] - u[m]);
    }
    b[j] = 1.0 / b[j];
  }
  const double scale = *std::max_element(b.begin(), b.end(),
                                         [](double a, double c) { return std::abs(a) < std::abs(c); });
  for (auto& v : b) v /= std::abs(scale);
  return b;
}

}  // namespace detail

/// Gauss-Legendre rule with n points, nodes from Newton iteration on the
/// three-term recurrence.
inline ReferenceRule gauss_legendre(int n) {
  if (n < 1) throw validation_error("gauss_legendre: n must be positive");
  ReferenceRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  if (n == 1) {
    r.weights[0] = 2.0;
    r.bary = {1.0};
    return r;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        // one more pass so dp matches the final x
        p0 = 1.0;
        p1 = x;
        for (int j = 2; j <= n; ++j) {
          const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  r.bary = detail::barycentric_weights(r.nodes);
  return r;
}

/// Clenshaw-Curtis rule with n >= 2 points including both endpoints.
inline ReferenceRule clenshaw_curtis(int n) {
  if (n < 2) throw validation_error("clenshaw_curtis: n must be >= 2");
  const int m = n - 1;
  ReferenceRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int j = 0; j <= m; ++j) {
    const double theta = pi * j / m;
    double s = 0.0;
    for (int k = 1; k <= m / 2; ++k) {
      const double b = (2 * k == m) ? 1.0 : 2.0;
      s += b * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
    }
    const double c = (j == 0 || j == m) ? 1.0 : 2.0;
    // ascending order: node index m - j carries cos(theta_j)
    r.nodes[m - j] = std::cos(theta);
    r.weights[m - j] = c / m * (1.0 - s);
  }
  r.nodes.front() = -1.0;
  r.nodes.back() = 1.0;
  // closed-form barycentric weights for Chebyshev extreme points
  r.bary.resize(n);
  for (int j = 0; j <= m; ++j) {
    r.bary[m - j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == m) ? 0.5 : 1.0);
  }
  return r;
}

/// Lagrange basis values l_j(u) for all j, barycentric form.
inline void lagrange_basis(const ReferenceRule& ref, double u, std::vector<double>& out) {
  const std::size_t n = ref.nodes.size();
  out.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (u == ref.nodes[j]) {
      out[j] = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = ref.bary[j] / (u - ref.nodes[j]);
    denom += out[j];
  }
  for (auto& v : out) v /= denom;
}

/// Partial-integral matrices on the reference panel:
/// tail(i, j) = int_{u_i}^{1} l_j, head(i, j) = int_{-1}^{u_i} l_j.
struct IntegrationMatrices {
  std::vector<double> tail;  // row-major n x n
  std::vector<double> head;
  std::size_t n = 0;
};

inline IntegrationMatrices integration_matrices(const ReferenceRule& ref) {
  const std::size_t n = ref.nodes.size();
  const ReferenceRule gl = gauss_legendre(static_cast<int>(n) + 2);
  IntegrationMatrices im;
  im.n = n;
  im.tail.assign(n * n, 0.0);
  im.head.assign(n * n, 0.0);
  std::vector<double> basis;
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = ref.nodes[i];
    for (int pass = 0; pass < 2; ++pass) {
      const double a = pass == 0 ? ui : -1.0;
      const double b = pass == 0 ? 1.0 : ui;
      const double half = 0.5 * (b - a);
      if (half <= 0.0) continue;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double u = a + half * (gl.nodes[q] + 1.0);
        lagrange_basis(ref, u, basis);
        for (std::size_t j = 0; j < n; ++j) {
          (pass == 0 ? im.tail : im.head)[i * n + j] += half * gl.weights[q] * basis[j];
        }
      }
    }
  }
  return im;
}

enum class RuleKind { gauss_legendre_composite, clenshaw_curtis, trapezoid };

inline const char* to_string(RuleKind k) {
  switch (k) {
    case RuleKind::gauss_legendre_composite: return "gauss_legendre_composite";
    case RuleKind::clenshaw_curtis: return "clenshaw_curtis";
    case RuleKind::trapezoid: return "trapezoid";
  }
  return "unknown";
}

/// One panel [a, b] of a composite rule, nodes [first, first + count).
struct Panel {
  double a = 0.0;
  double b = 0.0;
  std::size_t first = 0;
  std::size_t count = 0;
  std::shared_ptr<const ReferenceRule> ref;
  std::shared_ptr<const IntegrationMatrices> integ;
};

/// Quadrature on [-L, L] along the ray x = s e^{i rotation}. The real
/// parameters s are stored in `nodes`; `point(i)` returns the complex node.
/// With rotation == 0 this is an ordinary real rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double interval_radius = 0.0;
  RuleKind kind = RuleKind::gauss_legendre_composite;
  double rotation = 0.0;
  std::vector<Panel> panels;

  std::size_t size() const { return nodes.size(); }
  cplx jacobian() const { return std::polar(1.0, rotation); }
  cplx point(std::size_t i) const { return nodes[i] * jacobian(); }
};

namespace detail {

inline std::shared_ptr<const ReferenceRule> cached_reference(RuleKind kind, int n) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const ReferenceRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(static_cast<int>(kind), n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto r = std::make_shared<const ReferenceRule>(kind == RuleKind::gauss_legendre_composite
                                                     ? gauss_legendre(n)
                                                     : clenshaw_curtis(n));
  cache.emplace(key, r);
  return r;
}

inline std::shared_ptr<const IntegrationMatrices> cached_integration(
    const std::shared_ptr<const ReferenceRule>& ref) {
  static std::mutex mu;
  static std::map<const ReferenceRule*, std::shared_ptr<const IntegrationMatrices>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(ref.get());
  if (it != cache.end()) return it->second;
  auto m = std::make_shared<const IntegrationMatrices>(integration_matrices(*ref));
  cache.emplace(ref.get(), m);
  return m;
}

}  // namespace detail

inline constexpr int default_panel_order = 16;

/// Build a rule with N nodes on [-L, L].
///
/// gauss_legendre_composite splits [-L, L] into ceil(N / 16) equal panels
/// (a single panel when N <= 32) and distributes the N nodes as evenly as
/// possible. clenshaw_curtis is one global panel including both endpoints.
/// trapezoid uses N equispaced nodes including both endpoints and carries no
/// panels.
inline QuadratureRule build_rule(double L, int N, RuleKind kind, double rotation = 0.0) {
  if (!(L > 0.0) || !std::isfinite(L)) throw validation_error("build_rule: L must be positive");
  if (N < 8) throw validation_error("build_rule: N must be >= 8");
  QuadratureRule rule;
  rule.interval_radius = L;
  rule.kind = kind;
  rule.rotation = rotation;
  rule.nodes.reserve(N);
  rule.weights.reserve(N);

  if (kind == RuleKind::trapezoid) {
    const double h = 2.0 * L / (N - 1);
    for (int i = 0; i < N; ++i) {
      rule.nodes.push_back(i + 1 == N ? L : -L + i * h);
      rule.weights.push_back((i == 0 || i + 1 == N) ? 0.5 * h : h);
    }
    return rule;
  }

  int panels = 1;
  if (kind == RuleKind::gauss_legendre_composite && N > 32) {
    panels = (N + default_panel_order - 1) / default_panel_order;
  }
  const double h = 2.0 * L / panels;
  std::size_t first = 0;
  for (int p = 0; p < panels; ++p) {
    const int count = N / panels + (p < N % panels ? 1 : 0);
    Panel panel;
    panel.a = -L + p * h;
    panel.b = (p + 1 == panels) ? L : -L + (p + 1) * h;
    panel.first = first;
    panel.count = static_cast<std::size_t>(count);
    panel.ref = detail::cached_reference(kind, count);
    const double half = 0.5 * (panel.b - panel.a);
    for (int j = 0; j < count; ++j) {
      rule.nodes.push_back(panel.a + half * (panel.ref->nodes[j] + 1.0));
      rule.weights.push_back(half * panel.ref->weights[j]);
    }
    first += count;
    rule.panels.push_back(std::move(panel));
  }
  return rule;
}

/// Attach partial-integral matrices (needed by the Volterra solvers).
inline void ensure_integration(QuadratureRule& rule) {
  if (rule.panels.empty()) throw validation_error("ensure_integration: rule has no panels");
  for (auto& p : rule.panels) {
    if (!p.integ) p.integ = detail::cached_integration(p.ref);
  }
}

/// Sum of f(x_i) w_i along the rule, complex Jacobian included.
template <class F>
cplx integrate(const QuadratureRule& rule, F&& f) {
  cplx acc{};
  for (std::size_t i = 0; i < rule.size(); ++i) acc += cplx(f(rule.point(i))) * rule.weights[i];
  return acc * rule.jacobian();
}

/// Real-line convenience for rules with zero rotation.
template <class F>
double integrate_real(const QuadratureRule& rule, F&& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) acc += f(rule.nodes[i]) * rule.weights[i];
  return acc;
}

}  // namespace reslab
