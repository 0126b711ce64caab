#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "common.hpp"

namespace reslab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;  // root-mean-square residual
};

/// Ordinary least squares y = intercept + slope x.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw validation_error("linear_fit: need at least two paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw numerical_error("linear_fit: abscissae are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

/// Least squares y = c x through the origin.
inline double proportional_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  if (!(sxx > 0.0)) throw numerical_error("proportional_fit: all abscissae are zero");
  return sxy / sxx;
}

/// Fit y = c + s r^rho + beta ln r, scanning rho on [rho_min, rho_max] and
/// solving the linear problem for (c, s, beta) at each rho; the rho with the
/// smallest residual wins. The log term absorbs power-law prefactors of the
/// maximum modulus (M(r) ~ r^beta e^{s r^rho}).
struct PowerFit {
  double rho = 0.0;
  double scale = 0.0;   // s
  double offset = 0.0;  // c
  double log_coefficient = 0.0;  // beta
  double rms = 0.0;
};

inline PowerFit power_fit(const std::vector<double>& r, const std::vector<double>& y, double rho_min = 0.25,
                          double rho_max = 4.0, bool log_term = true) {
  const std::size_t n = r.size();
  if (n < (log_term ? 4u : 3u) || y.size() != n) throw validation_error("power_fit: too few samples");
  const Eigen::Index cols = log_term ? 3 : 2;
  Eigen::VectorXd b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) b(static_cast<Eigen::Index>(i)) = y[i];
  PowerFit best;
  best.rms = std::numeric_limits<double>::infinity();
  auto try_rho = [&](double rho) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(n), cols);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      A(row, 0) = 1.0;
      A(row, 1) = std::pow(r[i], rho);
      if (log_term) A(row, 2) = std::log(r[i]);
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    const double rms = std::sqrt((A * x - b).squaredNorm() / n);
    if (rms < best.rms) best = PowerFit{rho, x(1), x(0), log_term ? x(2) : 0.0, rms};
  };
  double step = 0.01;
  for (double rho = rho_min; rho <= rho_max + 1e-12; rho += step) try_rho(rho);
  for (int pass = 0; pass < 3; ++pass) {
    const double centre = best.rho;
    const double lo = std::max(rho_min, centre - step), hi = std::min(rho_max, centre + step);
    step /= 20.0;
    for (double rho = lo; rho <= hi + 1e-15; rho += step) try_rho(rho);
  }
  return best;
}

}  // namespace reslab
