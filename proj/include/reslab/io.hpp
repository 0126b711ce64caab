#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "common.hpp"
#include "determinant.hpp"
#include "hypotheses.hpp"
#include "potential.hpp"
#include "rootfinder.hpp"

namespace reslab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Potential schema
//
//   { "label": "g", "family": "gaussian", "amplitude": 1, "width": 1, "center": 0 }
//   { "family": "super_gaussian", "amplitude": 1, "width": 1, "power": 4, "center": 0 }
//   { "family": "gaussian_sum", "terms": [ {"amplitude": 1, "width": 1, "center": -1}, ... ] }
//   { "family": "square_well", "depth": -2, "half_width": 1 }
//   { "family": "tabulated", "x": [...], "v": [...] }
//
// Missing numeric keys take the family defaults; unknown keys are rejected.

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; })) {
      throw validation_error(where + ": unknown key '" + it.key() + "'");
    }
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw validation_error(std::string("key '") + key + "' has the wrong type");
  }
}

inline Gaussian gaussian_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw validation_error(where + ": expected an object");
  reject_unknown(j, {"amplitude", "width", "center"}, where);
  Gaussian g;
  g.amplitude = get_or(j, "amplitude", g.amplitude);
  g.width = get_or(j, "width", g.width);
  g.center = get_or(j, "center", g.center);
  return g;
}

inline json gaussian_to(const Gaussian& g) {
  return {{"amplitude", g.amplitude}, {"width", g.width}, {"center", g.center}};
}

}  // namespace detail

inline PotentialSpec potential_from_json(const json& j) {
  if (!j.is_object()) throw validation_error("potential: expected an object");
  if (!j.contains("family")) throw validation_error("potential: missing 'family'");
  const std::string family = detail::get_or<std::string>(j, "family", "");
  const std::string label = detail::get_or<std::string>(j, "label", family);
  const std::string where = "potential '" + label + "'";
  if (family == "gaussian") {
    json body = j;
    body.erase("family");
    body.erase("label");
    return PotentialSpec(detail::gaussian_from(body, where), label);
  }
  if (family == "super_gaussian") {
    detail::reject_unknown(j, {"family", "label", "amplitude", "width", "power", "center"}, where);
    SuperGaussian s;
    s.amplitude = detail::get_or(j, "amplitude", s.amplitude);
    s.width = detail::get_or(j, "width", s.width);
    s.power = detail::get_or(j, "power", s.power);
    s.center = detail::get_or(j, "center", s.center);
    return PotentialSpec(s, label);
  }
  if (family == "gaussian_sum") {
    detail::reject_unknown(j, {"family", "label", "terms"}, where);
    if (!j.contains("terms") || !j.at("terms").is_array()) throw validation_error(where + ": 'terms' must be a list");
    GaussianSum s;
    for (const auto& t : j.at("terms")) s.terms.push_back(detail::gaussian_from(t, where));
    return PotentialSpec(s, label);
  }
  if (family == "square_well") {
    detail::reject_unknown(j, {"family", "label", "depth", "half_width"}, where);
    SquareWell w;
    w.depth = detail::get_or(j, "depth", w.depth);
    w.half_width = detail::get_or(j, "half_width", w.half_width);
    return PotentialSpec(w, label);
  }
  if (family == "tabulated") {
    detail::reject_unknown(j, {"family", "label", "x", "v"}, where);
    Tabulated t;
    t.x = detail::get_or(j, "x", t.x);
    t.v = detail::get_or(j, "v", t.v);
    return PotentialSpec(t, label);
  }
  throw validation_error(where + ": unknown family '" + family + "'");
}

inline json potential_to_json(const PotentialSpec& spec) {
  json j = std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          json o = detail::gaussian_to(f);
          o["family"] = "gaussian";
          return o;
        } else if constexpr (std::is_same_v<T, SuperGaussian>) {
          return {{"family", "super_gaussian"},
                  {"amplitude", f.amplitude},
                  {"width", f.width},
                  {"power", f.power},
                  {"center", f.center}};
        } else if constexpr (std::is_same_v<T, GaussianSum>) {
          json terms = json::array();
          for (const auto& g : f.terms) terms.push_back(detail::gaussian_to(g));
          return {{"family", "gaussian_sum"}, {"terms", terms}};
        } else if constexpr (std::is_same_v<T, SquareWell>) {
          return {{"family", "square_well"}, {"depth", f.depth}, {"half_width", f.half_width}};
        } else {
          return {{"family", "tabulated"}, {"x", f.x}, {"v", f.v}};
        }
      },
      spec.family());
  j["label"] = spec.label();
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw validation_error("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// Loads a potential file; the label defaults to the file stem.
inline PotentialSpec load_potential(const std::string& path) {
  json j = read_json_file(path);
  if (j.is_object() && !j.contains("label")) {
    std::string stem = path.substr(path.find_last_of('/') + 1);
    stem = stem.substr(0, stem.find_last_of('.'));
    j["label"] = stem;
  }
  return potential_from_json(j);
}

// ---------------------------------------------------------------------------
// Result records

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const ContourRegion& r) {
  return {{"re_min", r.re_min}, {"re_max", r.re_max}, {"im_min", r.im_min}, {"im_max", r.im_max}};
}

inline json to_json(const Zero& z) {
  return {{"re", z.location.real()},
          {"im", z.location.imag()},
          {"multiplicity", z.multiplicity},
          {"residual", z.residual},
          {"converged", z.converged}};
}

inline json to_json(const std::vector<Zero>& zs) {
  json a = json::array();
  for (const auto& z : zs) a.push_back(to_json(z));
  return a;
}

inline json to_json(const ResonanceSet& rs) {
  return {{"region", to_json(rs.region)},
          {"method", to_string(rs.method)},
          {"evaluator", rs.evaluator},
          {"tol", rs.tol},
          {"total_winding", rs.total_winding},
          {"multiplicity_sum", rs.multiplicity_sum()},
          {"zeros", to_json(rs.zeros)}};
}

inline json to_json(const CountingReport& c) {
  json j = {{"radii", c.radii},
            {"measured_n", c.measured_n},
            {"unconverged_n", c.unconverged_n},
            {"rho", c.rho},
            {"h_up", c.h_up},
            {"h_down", c.h_down},
            {"predicted_constant", c.predicted_constant},
            {"fitted_constant", c.fitted_constant},
            {"relative_error", c.relative_error},
            {"trivial_potential", c.trivial_potential},
            {"order_at_most_one", c.order_at_most_one},
            {"zeros", to_json(c.zeros)}};
  j["fitted_exponent"] = c.fitted_exponent ? json(*c.fitted_exponent) : json(nullptr);
  return j;
}

inline json to_json(const BornComparison& b) {
  json pairs = json::array();
  for (const auto& p : b.pairs) {
    pairs.push_back({{"resonance", to_json(p.resonance)},
                     {"born_zero", p.born_zero ? to_json(*p.born_zero) : json(nullptr)},
                     {"distance", p.distance}});
  }
  return {{"resonances", to_json(b.resonances)}, {"born_zeros", to_json(b.born_zeros)}, {"pairs", pairs}};
}

inline json to_json(const IndicatorEstimate& e) {
  return {{"rho", e.rho_used},
          {"radius_ladder", e.radius_ladder},
          {"theta", e.theta_grid},
          {"h", e.h_values},
          {"fit_residuals", e.fit_residuals},
          {"shrunk", e.shrunk}};
}

inline json to_json(const SigmaValue& s) {
  return {{"value", s.value}, {"at_y", s.at_y}, {"at_half_y", s.at_half_y}, {"error_estimate", s.error_estimate}};
}

inline json to_json(const UniquenessReport& u) {
  return {{"resonance_set_distance", u.resonance_set_distance},
          {"sup_D_difference", u.sup_D_difference},
          {"sup_absFT_difference", u.sup_absFT_difference},
          {"sigma_difference", u.sigma_difference},
          {"born_product_difference", u.born_product_difference},
          {"resonances_a", to_json(u.resonances_a)},
          {"resonances_b", to_json(u.resonances_b)}};
}

inline json to_json(const HypothesisReport& h) {
  return {{"order_estimate", h.order_estimate},
          {"type_estimate", h.type_estimate},
          {"fit_rms", h.fit_rms},
          {"radius_ladder", h.radius_ladder},
          {"log_max_modulus", h.log_max_modulus},
          {"h1_order_above_one", h.h1_order_above_one},
          {"b", h.b},
          {"h2_bound_margin", h.h2_bound_margin},
          {"h3_sampled_fraction", h.h3_sampled_fraction},
          {"h3_constant", h.h3_constant},
          {"h3_samples", h.h3_samples},
          {"h4_zero_halfplane", to_string(h.h4_zero_halfplane)},
          {"zeros_upper", h.zeros_upper},
          {"zeros_lower", h.zeros_lower},
          {"zeros_real_strip", h.zeros_real_strip}};
}

// ---------------------------------------------------------------------------
// CSV, 17 significant digits

inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string det_grid_csv(const DetGrid& g) {
  std::ostringstream out;
  out << "re_k,im_k,re_D,im_D,abs_D,converged\n";
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const auto& v = g.values[i];
    out << fmt17(v.k.real()) << ',' << fmt17(v.k.imag()) << ',' << fmt17(v.D.real()) << ',' << fmt17(v.D.imag())
        << ',' << fmt17(std::abs(v.D)) << ',' << (v.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

inline std::string counting_csv(const CountingReport& c) {
  std::ostringstream out;
  out << "r,n\n";
  for (std::size_t i = 0; i < c.radii.size(); ++i) out << fmt17(c.radii[i]) << ',' << c.measured_n[i] << '\n';
  return out.str();
}

inline std::string indicator_csv(const IndicatorEstimate& e) {
  std::ostringstream out;
  out << "theta,h\n";
  for (std::size_t i = 0; i < e.theta_grid.size(); ++i) {
    out << fmt17(e.theta_grid[i]) << ',' << fmt17(e.h_values[i]) << '\n';
  }
  return out.str();
}

inline std::string zeros_csv(const std::vector<Zero>& zs) {
  std::ostringstream out;
  out << "re_k,im_k,multiplicity,residual,converged\n";
  for (const auto& z : zs) {
    out << fmt17(z.location.real()) << ',' << fmt17(z.location.imag()) << ',' << z.multiplicity << ','
        << fmt17(z.residual) << ',' << (z.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// SVG scatter

struct ScatterSeries {
  std::string name;
  std::string color;
  std::vector<cplx> points;
  bool hollow = false;
};

inline std::string scatter_svg(const std::vector<ScatterSeries>& series, const std::string& title) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (cplx p : s.points) {
      x0 = std::min(x0, p.real());
      x1 = std::max(x1, p.real());
      y0 = std::min(y0, p.imag());
      y1 = std::max(y1, p.imag());
    }
  }
  if (!std::isfinite(x0)) x0 = -1, x1 = 1, y0 = -1, y1 = 1;
  const double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1.0});
  x0 -= pad, x1 += pad, y0 -= pad, y1 += pad;
  const double W = 640, H = 480, m = 50;
  auto sx = [&](double x) { return m + (W - 2 * m) * (x - x0) / (x1 - x0); };
  auto sy = [&](double y) { return H - m - (H - 2 * m) * (y - y0) / (y1 - y0); };
  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title << "</text>\n";
  o << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (y0 < 0 && y1 > 0) {
    o << "<line x1=\"" << m << "\" y1=\"" << sy(0) << "\" x2=\"" << W - m << "\" y2=\"" << sy(0)
      << "\" stroke=\"#bbb\"/>\n";
  }
  if (x0 < 0 && x1 > 0) {
    o << "<line x1=\"" << sx(0) << "\" y1=\"" << m << "\" x2=\"" << sx(0) << "\" y2=\"" << H - m
      << "\" stroke=\"#bbb\"/>\n";
  }
  o << "<text x=\"" << m << "\" y=\"" << H - m + 16 << "\" font-size=\"11\">" << x0 << "</text>\n";
  o << "<text x=\"" << W - m << "\" y=\"" << H - m + 16 << "\" font-size=\"11\" text-anchor=\"end\">" << x1
    << "</text>\n";
  o << "<text x=\"" << m - 4 << "\" y=\"" << H - m << "\" font-size=\"11\" text-anchor=\"end\">" << y0 << "</text>\n";
  o << "<text x=\"" << m - 4 << "\" y=\"" << m + 10 << "\" font-size=\"11\" text-anchor=\"end\">" << y1
    << "</text>\n";
  double ly = m + 16;
  for (const auto& s : series) {
    for (cplx p : s.points) {
      o << "<circle cx=\"" << sx(p.real()) << "\" cy=\"" << sy(p.imag()) << "\" r=\"3\" "
        << (s.hollow ? "fill=\"none\" stroke=\"" + s.color + "\"" : "fill=\"" + s.color + "\"") << "/>\n";
    }
    o << "<text x=\"" << W - m - 6 << "\" y=\"" << ly << "\" font-size=\"12\" text-anchor=\"end\" fill=\""
      << s.color << "\">" << s.name << "</text>\n";
    ly += 16;
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace reslab
