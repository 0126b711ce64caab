#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "parallel.hpp"

namespace reslab {

using AnalyticFunction = std::function<cplx(cplx)>;

enum class ZeroMethod { fredholm, jost_oracle, fourier_hat, born, generic };

inline const char* to_string(ZeroMethod m) {
  switch (m) {
    case ZeroMethod::fredholm: return "fredholm";
    case ZeroMethod::jost_oracle: return "jost_oracle";
    case ZeroMethod::fourier_hat: return "fourier_hat";
    case ZeroMethod::born: return "born";
    case ZeroMethod::generic: return "generic";
  }
  return "generic";
}

struct Zero {
  cplx location;
  int multiplicity = 1;
  double residual = 0.0;  // |f(location)|
  bool converged = false;
};

struct ResonanceSet {
  std::vector<Zero> zeros;
  ContourRegion region;
  int total_winding = 0;
  ZeroMethod method = ZeroMethod::generic;
  std::string evaluator;
  double tol = 0.0;

  int multiplicity_sum() const {
    int s = 0;
    for (const auto& z : zeros) s += z.multiplicity;
    return s;
  }
};

/// Thread-safe memo of f on points rounded to a 1e-12 lattice, so that edges
/// shared between neighbouring cells are evaluated once.
class CachedFunction {
 public:
  explicit CachedFunction(AnalyticFunction f) : f_(std::move(f)) {}

  cplx operator()(cplx z) const {
    const Key key{std::llround(z.real() * 1e12), std::llround(z.imag() * 1e12)};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    const cplx v = f_(z);
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(key, v);
    return v;
  }

  std::size_t evaluations() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.size();
  }

 private:
  using Key = std::pair<long long, long long>;
  AnalyticFunction f_;
  mutable std::mutex mu_;
  mutable std::map<Key, cplx> cache_;
};

struct WindingOptions {
  int initial_steps = 32;       // samples per edge before refinement
  int max_points = 1 << 16;     // per edge
  double zero_ratio = 1e-12;    // |f| relative to the smaller neighbour that flags a boundary zero
};

namespace detail {

/// Phase change of f along the segment a -> b, refined until every sample
/// increment is below pi/2. Throws boundary_zero_error on a (near) zero.
template <class F>
double edge_phase(const F& f, cplx a, cplx b, const WindingOptions& opt, int refine_extra) {
  std::vector<double> t;
  std::vector<cplx> v;
  const int n0 = std::max(2, opt.initial_steps);
  for (int i = 0; i <= n0; ++i) t.push_back(static_cast<double>(i) / n0);
  for (double ti : t) v.push_back(f(a + (b - a) * ti));

  auto check_zero = [&](std::size_t j) {
    const double m = std::abs(v[j]);
    if (!std::isfinite(v[j].real()) || !std::isfinite(v[j].imag())) {
      throw numerical_error("winding_number: non-finite function value on the contour");
    }
    // a zero is a dip below both neighbours; steep monotone growth is not
    const bool interior = j > 0 && j + 1 < v.size();
    const double nb = interior ? std::min(std::abs(v[j - 1]), std::abs(v[j + 1])) : 0.0;
    if (m == 0.0 || m < opt.zero_ratio * nb) {
      throw boundary_zero_error("winding_number: zero on or near the contour", a + (b - a) * t[j]);
    }
  };

  auto refine_once = [&](bool all) {
    std::vector<double> nt;
    std::vector<cplx> nv;
    bool changed = false;
    for (std::size_t j = 0; j + 1 < t.size(); ++j) {
      nt.push_back(t[j]);
      nv.push_back(v[j]);
      const double d = std::abs(std::arg(v[j + 1] / v[j]));
      if (!all && d >= 0.5 * pi && t[j + 1] - t[j] < 1e-9) {
        throw boundary_zero_error("winding_number: phase jump does not resolve, zero on the contour",
                                  a + (b - a) * (0.5 * (t[j] + t[j + 1])));
      }
      if (all || d >= 0.5 * pi) {
        const double tm = 0.5 * (t[j] + t[j + 1]);
        nt.push_back(tm);
        nv.push_back(f(a + (b - a) * tm));
        changed = true;
      }
    }
    nt.push_back(t.back());
    nv.push_back(v.back());
    t.swap(nt);
    v.swap(nv);
    if (static_cast<int>(t.size()) > opt.max_points) {
      std::size_t worst = 0;
      for (std::size_t j = 1; j < v.size(); ++j) {
        if (std::abs(v[j]) < std::abs(v[worst])) worst = j;
      }
      throw boundary_zero_error("winding_number: boundary refinement limit reached", a + (b - a) * t[worst]);
    }
    return changed;
  };

  auto total = [&] {
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < v.size(); ++j) s += std::arg(v[j + 1] / v[j]);
    return s;
  };

  for (std::size_t j = 0; j < v.size(); ++j) check_zero(j);
  while (refine_once(false)) {
    for (std::size_t j = 0; j < v.size(); ++j) check_zero(j);
  }
  double phase = total();
  for (int r = 0; r < refine_extra; ++r) {
    refine_once(true);
    for (std::size_t j = 0; j < v.size(); ++j) check_zero(j);
    while (refine_once(false)) {
      for (std::size_t j = 0; j < v.size(); ++j) check_zero(j);
    }
    const double again = total();
    if (std::abs(again - phase) > 0.25 * pi) {
      throw boundary_zero_error("winding_number: phase unstable under refinement", 0.5 * (a + b));
    }
    phase = again;
  }
  return phase;
}

}  // namespace detail

/// Winding number of f around the positively oriented boundary of the
/// rectangle. Each edge is refined until all phase increments are below pi/2,
/// then refined once more everywhere to confirm the integer.
template <class F>
int winding_number(const F& f, const ContourRegion& region, const WindingOptions& opt = {}) {
  region.validate();
  const cplx c0(region.re_min, region.im_min), c1(region.re_max, region.im_min);
  const cplx c2(region.re_max, region.im_max), c3(region.re_min, region.im_max);
  const double total = detail::edge_phase(f, c0, c1, opt, 1) + detail::edge_phase(f, c1, c2, opt, 1) +
                       detail::edge_phase(f, c2, c3, opt, 1) + detail::edge_phase(f, c3, c0, opt, 1);
  const double w = total / (2.0 * pi);
  const double r = std::round(w);
  if (std::abs(w - r) > 0.1) {
    throw boundary_zero_error("winding_number: non-integer winding " + std::to_string(w), region.center());
  }
  return static_cast<int>(r);
}

template <class F>
int winding_number(const F& f, const ContourRegion& region, int initial_steps) {
  WindingOptions opt;
  opt.initial_steps = initial_steps;
  return winding_number(f, region, opt);
}

struct FindOptions {
  double min_diameter = 0.05;
  int perturb_attempts = 4;  // outward moves of an edge that carries a zero
  int newton_max = 50;
  WindingOptions winding;
  int threads = 1;
  /// Optional function used for Newton polishing in place of the search
  /// function (e.g. a more accurate evaluation of the same zeros).
  AnalyticFunction polish;
};

struct NewtonResult {
  cplx z;
  double residual = 0.0;
  bool converged = false;
};

/// Newton iteration with central-difference derivative, step 1e-6 max(1, |z|).
/// An evaluation failure at an iterate counts as divergence.
template <class F>
NewtonResult newton_refine(const F& f, cplx z, double tol, int max_iter = 50) {
  cplx fz;
  try {
    fz = f(z);
  } catch (const std::exception&) {
    return {z, std::numeric_limits<double>::infinity(), false};
  }
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(fz) < tol) return {z, std::abs(fz), true};
    const double h = 1e-6 * std::max(1.0, std::abs(z));
    cplx next, fnext;
    try {
      const cplx d = (f(z + h) - f(z - h)) / (2.0 * h);
      if (d == 0.0 || !finite(d)) break;
      const cplx step = fz / d;
      if (!finite(step)) break;
      next = z - step;
      fnext = f(next);
    } catch (const std::exception&) {
      break;
    }
    const double step_size = std::abs(next - z);
    z = next;
    fz = fnext;
    if (step_size < 1e-14 * std::max(1.0, std::abs(z))) return {z, std::abs(fz), true};
  }
  return {z, std::abs(fz), std::abs(fz) < tol};
}

namespace detail {

template <class F, class P>
void find_in_cell(const F& f, const P& polish, const ContourRegion& cell, int w, double tol, const FindOptions& opt,
                  std::vector<Zero>& out, int depth) {
  if (w == 0) return;
  if (w < 0) throw numerical_error("find_zeros: negative winding number (pole inside region)");
  const double diam = cell.diameter();
  const double slack = 1e-9 * std::max(1.0, diam);
  if (w == 1 || diam < opt.min_diameter || depth > 40) {
    NewtonResult nr = newton_refine(polish, cell.center(), tol, opt.newton_max);
    const bool inside = cell.contains(nr.z, slack);
    if (inside && (nr.converged || diam < opt.min_diameter || depth > 40)) {
      out.push_back(Zero{nr.z, w, nr.residual, nr.converged});
      return;
    }
    if (diam < opt.min_diameter || depth > 40) {
      const double r = std::abs(polish(cell.center()));
      out.push_back(Zero{cell.center(), w, r, false});
      return;
    }
  }
  // quadrisect, nudging the split off any zero that lands on an internal edge
  static constexpr double shifts[] = {0.0, 0.0173, -0.0219, 0.0311, -0.0377};
  for (double sh : shifts) {
    const double xm = cell.re_min + (0.5 + sh) * cell.width();
    const double ym = cell.im_min + (0.5 + 0.7 * sh) * cell.height();
    const ContourRegion kids[4] = {{cell.re_min, xm, cell.im_min, ym},
                                   {xm, cell.re_max, cell.im_min, ym},
                                   {cell.re_min, xm, ym, cell.im_max},
                                   {xm, cell.re_max, ym, cell.im_max}};
    int wk[4];
    try {
      for (int q = 0; q < 4; ++q) wk[q] = winding_number(f, kids[q], opt.winding);
    } catch (const boundary_zero_error&) {
      continue;
    }
    if (wk[0] + wk[1] + wk[2] + wk[3] != w) continue;
    for (int q = 0; q < 4; ++q) find_in_cell(f, polish, kids[q], wk[q], tol, opt, out, depth + 1);
    return;
  }
  throw boundary_zero_error("find_zeros: could not split cell without touching a zero", cell.center());
}

}  // namespace detail

/// Copy of the region with the edge nearest to `where` moved outward by d.
inline ContourRegion push_edge_out(const ContourRegion& r, cplx where, double d) {
  ContourRegion out = r;
  const double dist[4] = {std::abs(where.real() - r.re_min), std::abs(where.real() - r.re_max),
                          std::abs(where.imag() - r.im_min), std::abs(where.imag() - r.im_max)};
  const int e = static_cast<int>(std::min_element(dist, dist + 4) - dist);
  if (e == 0) out.re_min -= d;
  if (e == 1) out.re_max += d;
  if (e == 2) out.im_min -= d;
  if (e == 3) out.im_max += d;
  return out;
}

/// Zeros of f in the region by recursive quadrisection and Newton polishing.
/// A zero on the boundary moves that edge outward (by 1e-3 of the diameter,
/// growing with each attempt), so zeros on the closed region are reported;
/// `region` in the result is the rectangle actually searched.
inline ResonanceSet find_zeros(const AnalyticFunction& f, const ContourRegion& region, double tol,
                               const FindOptions& opt = {}, ZeroMethod method = ZeroMethod::generic) {
  region.validate();
  if (!(tol > 0.0)) throw validation_error("find_zeros: tol must be positive");
  CachedFunction cf(f);
  ResonanceSet rs;
  rs.region = region;
  rs.method = method;
  rs.tol = tol;
  for (int attempt = 0;; ++attempt) {
    try {
      rs.total_winding = winding_number(cf, rs.region, opt.winding);
      break;
    } catch (const boundary_zero_error& e) {
      if (attempt >= opt.perturb_attempts) throw;
      rs.region = push_edge_out(rs.region, e.where(), 1e-3 * (attempt + 1) * region.diameter());
    }
  }
  const AnalyticFunction& pf = opt.polish ? opt.polish : f;
  detail::find_in_cell(cf, pf, rs.region, rs.total_winding, tol, opt, rs.zeros, 0);
  std::sort(rs.zeros.begin(), rs.zeros.end(), [](const Zero& a, const Zero& b) {
    return a.location.real() != b.location.real() ? a.location.real() < b.location.real()
                                                  : a.location.imag() < b.location.imag();
  });
  return rs;
}

struct CountingOptions {
  double cell = 1.75;      // target tile side
  double hole = 0.01;      // half side of the excluded square around k = 0
  double tol = 1e-8;       // Newton residual target
  FindOptions find;
  int max_jitter = 4;
};

struct CountingResult {
  std::vector<double> radii;
  std::vector<int> counts;
  std::vector<Zero> zeros;  // every zero located in the tiling
  double covered_radius = 0.0;
};

/// Tiling of [-R, R]^2 into cells of side ~cell, dropping cells outside the
/// disk |k| <= R and replacing the cell containing 0 by four rectangles
/// around the hole [-hole, hole]^2.
inline std::vector<ContourRegion> disk_tiling(double R, double cell, double hole, double offset = 0.0) {
  if (!(R > 0.0)) throw validation_error("disk_tiling: radius must be positive");
  const double Rc = R + std::abs(offset);
  int m = static_cast<int>(std::ceil(2.0 * Rc / cell));
  if (m % 2 == 0) ++m;
  const double side = 2.0 * Rc / m;
  std::vector<ContourRegion> tiles;
  const int mid = (m - 1) / 2;
  for (int iy = 0; iy < m; ++iy) {
    for (int ix = 0; ix < m; ++ix) {
      ContourRegion c{-Rc + ix * side + offset, -Rc + (ix + 1) * side + offset, -Rc + iy * side + 0.7 * offset,
                      -Rc + (iy + 1) * side + 0.7 * offset};
      const double dx = std::max({c.re_min, 0.0, -c.re_max});
      const double dy = std::max({c.im_min, 0.0, -c.im_max});
      if (std::hypot(dx, dy) > R) continue;
      if (ix == mid && iy == mid) {
        if (!(c.re_min < -hole && c.re_max > hole && c.im_min < -hole && c.im_max > hole)) {
          throw validation_error("disk_tiling: central cell does not contain the hole");
        }
        tiles.push_back({c.re_min, c.re_max, hole, c.im_max});
        tiles.push_back({c.re_min, c.re_max, c.im_min, -hole});
        tiles.push_back({c.re_min, -hole, -hole, hole});
        tiles.push_back({hole, c.re_max, -hole, hole});
        continue;
      }
      tiles.push_back(c);
    }
  }
  return tiles;
}

/// n(r) = number of zeros (with multiplicity) of f with |k| <= r, from a
/// winding-number search over a disk tiling of the largest radius.
inline CountingResult counting_function(const AnalyticFunction& f, std::vector<double> radii,
                                        const CountingOptions& opt = {}) {
  if (radii.empty()) throw validation_error("counting_function: no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && radii[i] < radii[i - 1])) {
      throw validation_error("counting_function: radii must be positive and ascending");
    }
  }
  const double R = radii.back();
  CachedFunction cf(f);
  for (int attempt = 0; attempt <= opt.max_jitter; ++attempt) {
    const double offset = attempt == 0 ? 0.0 : 1e-3 * attempt;
    const std::vector<ContourRegion> tiles = disk_tiling(R, opt.cell, opt.hole, offset);
    std::vector<std::vector<Zero>> found(tiles.size());
    try {
      parallel_for(tiles.size(), opt.find.threads, [&](std::size_t t) {
        const int w = winding_number(cf, tiles[t], opt.find.winding);
        const AnalyticFunction& pf = opt.find.polish ? opt.find.polish : f;
        detail::find_in_cell(cf, pf, tiles[t], w, opt.tol, opt.find, found[t], 0);
      });
    } catch (const boundary_zero_error&) {
      if (attempt == opt.max_jitter) throw;
      continue;
    }
    CountingResult res;
    res.radii = radii;
    res.covered_radius = R;
    for (auto& v : found) res.zeros.insert(res.zeros.end(), v.begin(), v.end());
    std::sort(res.zeros.begin(), res.zeros.end(),
              [](const Zero& a, const Zero& b) { return std::abs(a.location) < std::abs(b.location); });
    for (double r : radii) {
      int n = 0;
      for (const auto& z : res.zeros) {
        if (std::abs(z.location) <= r) n += z.multiplicity;
      }
      res.counts.push_back(n);
    }
    return res;
  }
  throw boundary_zero_error("counting_function: jitter attempts exhausted", cplx(0.0));
}

}  // namespace reslab
