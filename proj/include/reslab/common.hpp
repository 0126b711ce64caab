#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace reslab {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Input that violates a documented precondition: malformed potential,
/// degenerate region, non-positive tolerance and so on.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not reach its accuracy target.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature of a tabulated or slowly decaying potential cannot bound the
/// tail at the requested complex argument.
class truncation_error : public numerical_error {
 public:
  truncation_error(const std::string& what, double required_radius)
      : numerical_error(what), required_radius_(required_radius) {}
  double required_radius() const noexcept { return required_radius_; }

 private:
  double required_radius_;
};

/// |k| fell inside the exclusion disk around the 1/k pole of the kernel.
class pole_proximity_error : public validation_error {
 public:
  using validation_error::validation_error;
};

/// The argument principle saw a (near) zero on the contour.
class boundary_zero_error : public numerical_error {
 public:
  boundary_zero_error(const std::string& what, cplx where)
      : numerical_error(what), where_(where) {}
  cplx where() const noexcept { return where_; }

 private:
  cplx where_;
};

/// The Volterra fixed-point iteration did not contract.
class continuation_error : public numerical_error {
 public:
  continuation_error(const std::string& what, double suggested_max_im)
      : numerical_error(what), suggested_max_im_(suggested_max_im) {}
  double suggested_max_im() const noexcept { return suggested_max_im_; }

 private:
  double suggested_max_im_;
};

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Axis-aligned rectangle [re_min, re_max] x [im_min, im_max] in the k plane.
struct ContourRegion {
  double re_min = 0.0;
  double re_max = 0.0;
  double im_min = 0.0;
  double im_max = 0.0;

  void validate() const {
    if (!(std::isfinite(re_min) && std::isfinite(re_max) && std::isfinite(im_min) &&
          std::isfinite(im_max))) {
      throw validation_error("region bounds must be finite");
    }
    if (!(re_min < re_max) || !(im_min < im_max)) {
      throw validation_error("region must satisfy re_min < re_max and im_min < im_max");
    }
  }
  double width() const { return re_max - re_min; }
  double height() const { return im_max - im_min; }
  double diameter() const { return std::hypot(width(), height()); }
  cplx center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
  bool contains(cplx z, double slack = 0.0) const {
    return z.real() >= re_min - slack && z.real() <= re_max + slack && z.imag() >= im_min - slack &&
           z.imag() <= im_max + slack;
  }
};

}  // namespace reslab
