#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "common.hpp"
#include "quadrature.hpp"

namespace reslab {

// Potential families. All are real on the real axis; the three Gaussian-type
// families are entire and can be evaluated at complex x.

struct Gaussian {
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
};

struct SuperGaussian {
  double amplitude = 1.0;
  double width = 1.0;
  int power = 4;
  double center = 0.0;
};

struct GaussianSum {
  std::vector<Gaussian> terms;
};

/// V = depth on |x| <= half_width, zero outside.
struct SquareWell {
  double depth = -1.0;
  double half_width = 1.0;
};

/// Linear interpolation between samples, zero outside [x.front(), x.back()].
struct Tabulated {
  std::vector<double> x;
  std::vector<double> v;
};

using PotentialFamily = std::variant<Gaussian, SuperGaussian, GaussianSum, SquareWell, Tabulated>;

/// Fourier convention: V^(zeta) = int e^{-i zeta x} V(x) dx.
struct FourierValue {
  enum class Method { closed_form, quadrature };
  cplx argument;
  cplx value;
  Method method = Method::closed_form;
};

inline const char* to_string(FourierValue::Method m) {
  return m == FourierValue::Method::closed_form ? "closed_form" : "quadrature";
}

/// Immutable, validated description of a real potential.
class PotentialSpec {
 public:
  PotentialSpec(PotentialFamily family, std::string label = "potential")
      : family_(std::move(family)), label_(std::move(label)) {
    validate();
  }

  const PotentialFamily& family() const { return family_; }
  const std::string& label() const { return label_; }

  /// V(x) for real x.
  double operator()(double x) const {
    return std::visit([x](const auto& f) { return value(f, x); }, family_);
  }

  /// Entire families only: V continued to complex x.
  cplx at(cplx x) const {
    return std::visit(
        [x, this](const auto& f) -> cplx {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Gaussian>) {
            return gaussian_at(f, x);
          } else if constexpr (std::is_same_v<T, SuperGaussian>) {
            const cplx u = (x - f.center) / f.width;
            return f.amplitude * std::exp(-std::pow(u, f.power));
          } else if constexpr (std::is_same_v<T, GaussianSum>) {
            cplx s = 0.0;
            for (const auto& g : f.terms) s += gaussian_at(g, x);
            return s;
          } else {
            if (x.imag() != 0.0) {
              throw validation_error("potential '" + label_ + "' has no analytic continuation");
            }
            return (*this)(x.real());
          }
        },
        family_);
  }

  /// ln|V(x)|, computed without underflow for the entire families.
  double log_abs_at(cplx x) const {
    auto log_gauss = [x](const Gaussian& g) {
      if (g.amplitude == 0.0) return -std::numeric_limits<double>::infinity();
      const cplx u = (x - g.center) / g.width;
      return std::log(std::abs(g.amplitude)) - (u * u).real();
    };
    if (const auto* g = std::get_if<Gaussian>(&family_)) return log_gauss(*g);
    if (const auto* sg = std::get_if<SuperGaussian>(&family_)) {
      if (sg->amplitude == 0.0) return -std::numeric_limits<double>::infinity();
      const cplx u = (x - sg->center) / sg->width;
      return std::log(std::abs(sg->amplitude)) - std::pow(u, sg->power).real();
    }
    if (const auto* gs = std::get_if<GaussianSum>(&family_)) {
      // log|sum| from a common scale; exact cancellation gives -inf
      double top = -std::numeric_limits<double>::infinity();
      for (const auto& t : gs->terms) top = std::max(top, log_gauss(t));
      if (!std::isfinite(top)) return top;
      cplx s = 0.0;
      for (const auto& t : gs->terms) {
        if (t.amplitude == 0.0) continue;
        const cplx u = (x - t.center) / t.width;
        s += t.amplitude * std::exp(-u * u - top);
      }
      const double a = std::abs(s);
      return a > 0.0 ? std::log(a) + top : -std::numeric_limits<double>::infinity();
    }
    const double v = std::abs(at(x));
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  }

  bool is_analytic() const {
    return std::holds_alternative<Gaussian>(family_) ||
           std::holds_alternative<SuperGaussian>(family_) ||
           std::holds_alternative<GaussianSum>(family_);
  }

  /// Largest |phi| for which V(s e^{i phi}) still decays super-exponentially
  /// as |s| grows; zero for non-analytic families.
  double decay_sector() const {
    if (std::holds_alternative<Gaussian>(family_) || std::holds_alternative<GaussianSum>(family_)) {
      return pi / 4.0;
    }
    if (const auto* sg = std::get_if<SuperGaussian>(&family_)) return pi / (2.0 * sg->power);
    return 0.0;
  }

  /// Radius of the support when it is compact.
  std::optional<double> support_radius() const {
    if (const auto* sw = std::get_if<SquareWell>(&family_)) return sw->half_width;
    if (const auto* t = std::get_if<Tabulated>(&family_)) {
      return std::max(std::abs(t->x.front()), std::abs(t->x.back()));
    }
    return std::nullopt;
  }

  /// True when V vanishes identically.
  bool is_trivial() const {
    return std::visit(
        [](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Gaussian> || std::is_same_v<T, SuperGaussian>) {
            return f.amplitude == 0.0;
          } else if constexpr (std::is_same_v<T, GaussianSum>) {
            return std::all_of(f.terms.begin(), f.terms.end(),
                               [](const Gaussian& g) { return g.amplitude == 0.0; });
          } else if constexpr (std::is_same_v<T, SquareWell>) {
            return f.depth == 0.0;
          } else {
            return std::all_of(f.v.begin(), f.v.end(), [](double v) { return v == 0.0; });
          }
        },
        family_);
  }

  /// The mirrored potential x -> -x.
  PotentialSpec reflected(std::string label = {}) const {
    if (label.empty()) label = label_ + "-reflected";
    return std::visit(
        [&](const auto& f) -> PotentialSpec {
          using T = std::decay_t<decltype(f)>;
          T g = f;
          if constexpr (std::is_same_v<T, Gaussian> || std::is_same_v<T, SuperGaussian>) {
            g.center = -f.center;
          } else if constexpr (std::is_same_v<T, GaussianSum>) {
            for (auto& t : g.terms) t.center = -t.center;
          } else if constexpr (std::is_same_v<T, Tabulated>) {
            const std::size_t n = f.x.size();
            for (std::size_t i = 0; i < n; ++i) {
              g.x[i] = -f.x[n - 1 - i];
              g.v[i] = f.v[n - 1 - i];
            }
          }
          return PotentialSpec(g, label);
        },
        family_);
  }

  /// -V, same shape.
  PotentialSpec negated(std::string label = {}) const {
    if (label.empty()) label = label_ + "-negated";
    return std::visit(
        [&](const auto& f) -> PotentialSpec {
          using T = std::decay_t<decltype(f)>;
          T g = f;
          if constexpr (std::is_same_v<T, Gaussian> || std::is_same_v<T, SuperGaussian>) {
            g.amplitude = -f.amplitude;
          } else if constexpr (std::is_same_v<T, GaussianSum>) {
            for (auto& t : g.terms) t.amplitude = -t.amplitude;
          } else if constexpr (std::is_same_v<T, SquareWell>) {
            g.depth = -f.depth;
          } else {
            for (auto& v : g.v) v = -v;
          }
          return PotentialSpec(g, label);
        },
        family_);
  }

 private:
  static cplx gaussian_at(const Gaussian& g, cplx x) {
    const cplx u = (x - g.center) / g.width;
    return g.amplitude * std::exp(-u * u);
  }

  static double value(const Gaussian& g, double x) {
    const double u = (x - g.center) / g.width;
    return g.amplitude * std::exp(-u * u);
  }
  static double value(const SuperGaussian& g, double x) {
    const double u = (x - g.center) / g.width;
    return g.amplitude * std::exp(-std::pow(u, g.power));
  }
  static double value(const GaussianSum& g, double x) {
    double s = 0.0;
    for (const auto& t : g.terms) s += value(t, x);
    return s;
  }
  static double value(const SquareWell& w, double x) {
    return std::abs(x) <= w.half_width ? w.depth : 0.0;
  }
  static double value(const Tabulated& t, double x) {
    if (x < t.x.front() || x > t.x.back()) return 0.0;
    auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
    if (it == t.x.end()) return t.v.back();
    const std::size_t j = static_cast<std::size_t>(it - t.x.begin());
    const double x0 = t.x[j - 1], x1 = t.x[j];
    const double s = (x - x0) / (x1 - x0);
    return (1.0 - s) * t.v[j - 1] + s * t.v[j];
  }

  void validate() const {
    auto need = [this](bool ok, const char* msg) {
      if (!ok) throw validation_error("potential '" + label_ + "': " + msg);
    };
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Gaussian>) {
            need(f.width > 0.0 && std::isfinite(f.width), "width must be positive");
            need(std::isfinite(f.amplitude) && std::isfinite(f.center), "non-finite parameter");
          } else if constexpr (std::is_same_v<T, SuperGaussian>) {
            need(f.width > 0.0 && std::isfinite(f.width), "width must be positive");
            need(f.power >= 2 && f.power % 2 == 0, "power must be an even integer >= 2");
            need(std::isfinite(f.amplitude) && std::isfinite(f.center), "non-finite parameter");
          } else if constexpr (std::is_same_v<T, GaussianSum>) {
            need(!f.terms.empty(), "gaussian_sum needs at least one term");
            for (const auto& g : f.terms) {
              need(g.width > 0.0 && std::isfinite(g.width), "width must be positive");
              need(std::isfinite(g.amplitude) && std::isfinite(g.center), "non-finite parameter");
            }
          } else if constexpr (std::is_same_v<T, SquareWell>) {
            need(f.half_width > 0.0 && std::isfinite(f.half_width), "half_width must be positive");
            need(std::isfinite(f.depth), "non-finite depth");
          } else {
            need(f.x.size() >= 2 && f.x.size() == f.v.size(), "tabulated needs >= 2 (x, V) samples");
            for (std::size_t i = 0; i < f.x.size(); ++i) {
              need(std::isfinite(f.x[i]) && std::isfinite(f.v[i]), "non-finite sample");
              if (i > 0) need(f.x[i] > f.x[i - 1], "sample abscissae must be strictly increasing");
            }
          }
        },
        family_);
  }

  PotentialFamily family_;
  std::string label_;
};

/// V(x); tabulated specs return 0 outside their sample range.
inline double evaluate(const PotentialSpec& spec, double x) {
  if (!std::isfinite(x)) throw validation_error("evaluate: x must be finite");
  return spec(x);
}

struct SqrtSplit {
  double signed_root = 0.0;  // V / |V|^{1/2}
  double abs_root = 0.0;     // |V|^{1/2}
};

inline SqrtSplit sqrt_split(double v) {
  if (v == 0.0) return {};
  const double r = std::sqrt(std::abs(v));
  return {v > 0.0 ? r : -r, r};
}

inline SqrtSplit sqrt_split(const PotentialSpec& spec, double x) { return sqrt_split(spec(x)); }

namespace detail {

inline cplx sinc_times(double a, cplx z) {
  // sin(a z) / z, regular at z = 0
  const cplx az = a * z;
  if (std::abs(az) < 1e-4) {
    const cplx az2 = az * az;
    return a * (1.0 - az2 / 6.0 + az2 * az2 / 120.0);
  }
  return std::sin(az) / z;
}

/// int_{-inf}^{inf} exp(-u^p) exp(-i w u) du for even p by composite
/// Gauss-Legendre with panel doubling.
inline cplx super_gaussian_integral(int p, cplx w) {
  const double grow = std::abs(w.imag());
  double U = 1.0;
  while (-std::pow(U, p) + grow * U > std::log(1e-17) && U < 1e4) U += 0.25;
  if (U >= 1e4) throw truncation_error("super_gaussian transform: argument too deep", U);
  const ReferenceRule gl = gauss_legendre(16);
  double mass = 0.0;  // int |integrand|, the rounding floor under cancellation
  auto eval = [&](int panels) {
    cplx acc = 0.0;
    mass = 0.0;
    const double h = 2.0 * U / panels;
    for (int k = 0; k < panels; ++k) {
      const double a = -U + k * h;
      for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
        const double u = a + 0.5 * h * (gl.nodes[j] + 1.0);
        const cplx term = 0.5 * h * gl.weights[j] * std::exp(-std::pow(u, p) - I * w * u);
        acc += term;
        mass += std::abs(term);
      }
    }
    return acc;
  };
  int panels = std::max(8, static_cast<int>(U * (std::abs(w) + p * std::pow(U, p - 1)) / 4.0));
  cplx prev = eval(panels);
  for (int it = 0; it < 10; ++it) {
    panels *= 2;
    const cplx cur = eval(panels);
    if (std::abs(cur - prev) <= 1e-14 * std::max(1.0, std::abs(cur)) + 1e-13 * mass) return cur;
    prev = cur;
  }
  throw numerical_error("super_gaussian transform: quadrature did not converge");
}

}  // namespace detail

/// V^(zeta) = int e^{-i zeta x} V(x) dx.
///
/// Closed forms for gaussian, gaussian_sum and square_well. super_gaussian
/// uses adaptive composite Gauss-Legendre; tabulated uses the trapezoid rule
/// on the samples and refuses arguments whose growth e^{Im(zeta) x} makes the
/// cut-off data unrepresentative.
inline FourierValue fourier_transform(const PotentialSpec& spec, cplx zeta) {
  FourierValue out;
  out.argument = zeta;
  out.method = FourierValue::Method::closed_form;
  const auto& fam = spec.family();
  auto gauss = [&](const Gaussian& g) {
    const cplx zw = zeta * g.width;
    return g.amplitude * g.width * std::sqrt(pi) * std::exp(-I * zeta * g.center - zw * zw / 4.0);
  };
  if (const auto* g = std::get_if<Gaussian>(&fam)) {
    out.value = gauss(*g);
  } else if (const auto* gs = std::get_if<GaussianSum>(&fam)) {
    out.value = 0.0;
    for (const auto& t : gs->terms) out.value += gauss(t);
  } else if (const auto* sw = std::get_if<SquareWell>(&fam)) {
    out.value = 2.0 * sw->depth * detail::sinc_times(sw->half_width, zeta);
  } else if (const auto* sg = std::get_if<SuperGaussian>(&fam)) {
    out.method = FourierValue::Method::quadrature;
    out.value = sg->amplitude * sg->width * std::exp(-I * zeta * sg->center) *
                detail::super_gaussian_integral(sg->power, zeta * sg->width);
  } else {
    const auto& t = std::get<Tabulated>(fam);
    out.method = FourierValue::Method::quadrature;
    const double growth = zeta.imag();
    double peak = 0.0;
    for (std::size_t i = 0; i < t.x.size(); ++i) {
      peak = std::max(peak, std::abs(t.v[i]) * std::exp(growth * t.x[i]));
    }
    const double edge = std::max(std::abs(t.v.front()) * std::exp(growth * t.x.front()),
                                 std::abs(t.v.back()) * std::exp(growth * t.x.back()));
    if (!(edge <= 1e-12 * std::max(1.0, peak))) {
      // Linear extrapolation of the log-decay at each end to the radius where
      // the weighted tail would drop below the bound.
      double need = std::max(std::abs(t.x.front()), std::abs(t.x.back()));
      const std::size_t n = t.x.size();
      for (int side = 0; side < 2; ++side) {
        const std::size_t i0 = side == 0 ? 0 : n - 1;
        const std::size_t i1 = side == 0 ? 1 : n - 2;
        const double a0 = std::abs(t.v[i0]), a1 = std::abs(t.v[i1]);
        if (a0 <= 0.0 || a1 <= 0.0) continue;
        const double slope = (std::log(a0) - std::log(a1)) / std::abs(t.x[i0] - t.x[i1]);
        const double rate = slope + (side == 0 ? -growth : growth);
        if (rate < 0.0) {
          const double target = std::log(1e-12 * std::max(1.0, peak));
          const double here = std::log(a0) + growth * t.x[i0];
          need = std::max(need, std::abs(t.x[i0]) + (here - target) / (-rate));
        } else {
          need = std::numeric_limits<double>::infinity();
        }
      }
      throw truncation_error("tabulated transform: tail bound fails at Im(zeta) = " +
                                 std::to_string(zeta.imag()) + ", required radius " +
                                 std::to_string(need),
                             need);
    }
    cplx acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.x.size(); ++i) {
      const double h = t.x[i + 1] - t.x[i];
      acc += 0.5 * h *
             (std::exp(-I * zeta * t.x[i]) * t.v[i] + std::exp(-I * zeta * t.x[i + 1]) * t.v[i + 1]);
    }
    out.value = acc;
  }
  return out;
}

inline cplx fourier(const PotentialSpec& spec, cplx zeta) { return fourier_transform(spec, zeta).value; }

/// V^, V^' and V^'' by central differences of the transform.
struct FourierJet {
  cplx value, d1, d2;
};

inline FourierJet fourier_jet(const PotentialSpec& spec, cplx zeta) {
  const double h = 1e-3 * std::max(1.0, std::abs(zeta));
  const cplx f0 = fourier(spec, zeta);
  const cplx fp = fourier(spec, zeta + h);
  const cplx fm = fourier(spec, zeta - h);
  return {f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)};
}

}  // namespace reslab
