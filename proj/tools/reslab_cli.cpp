// reslab: batch front end. One command per run; every output file is listed
// with its CRC-32 in <out>/manifest.json.

#include <CLI11.hpp>
#include <boost/crc.hpp>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <reslab/reslab.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace reslab;

namespace {

const std::vector<std::string> kCommands{"det-grid", "resonances", "counting",  "born-compare",
                                         "indicator", "sigma",     "uniqueness", "hypotheses"};

struct RunConfig {
  std::string command;
  std::vector<std::string> potentials;
  std::optional<ContourRegion> region;
  std::vector<double> radii;
  double tol = 1e-8;
  std::string out = ".";
  bool svg = false;
  int threads = 1;
  std::uint64_t seed = 1;
  int nx = 41, ny = 41;
  std::optional<double> rho;
  int thetas = 72;
  std::vector<double> t{0.5, 1.0, 2.0, 3.0, 4.0};
  double b = 1.0;
  int samples = 200;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw validation_error(what + ": '" + s + "' is not a number");
  }
}

ContourRegion parse_region(const std::string& s) {
  const auto p = split(s, ':');
  if (p.size() != 4) throw validation_error("--region expects re_min:re_max:im_min:im_max");
  ContourRegion r{to_double(p[0], "region"), to_double(p[1], "region"), to_double(p[2], "region"),
                  to_double(p[3], "region")};
  r.validate();
  return r;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> v;
  for (const auto& p : split(s, ',')) v.push_back(to_double(p, what));
  if (v.empty()) throw validation_error(what + " is empty");
  return v;
}

/// Values from a JSON config; relative paths in it resolve against the
/// config file's directory.
void apply_config(RunConfig& cfg, const std::string& path) {
  const json j = read_json_file(path);
  if (!j.is_object()) throw validation_error("config: expected an object");
  const fs::path base = fs::path(path).parent_path();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    try {
      if (key == "command") {
        cfg.command = v.get<std::string>();
      } else if (key == "potentials") {
        cfg.potentials.clear();
        for (const auto& p : v) {
          fs::path q = p.get<std::string>();
          cfg.potentials.push_back((q.is_relative() ? base / q : q).string());
        }
      } else if (key == "region") {
        cfg.region = v.is_string() ? parse_region(v.get<std::string>())
                                   : ContourRegion{v.at(0).get<double>(), v.at(1).get<double>(),
                                                   v.at(2).get<double>(), v.at(3).get<double>()};
        cfg.region->validate();
      } else if (key == "radii") {
        cfg.radii = v.get<std::vector<double>>();
      } else if (key == "tol") {
        cfg.tol = v.get<double>();
      } else if (key == "out") {
        const fs::path q = v.get<std::string>();
        cfg.out = (q.is_relative() ? base / q : q).string();
      } else if (key == "svg") {
        cfg.svg = v.get<bool>();
      } else if (key == "threads") {
        cfg.threads = v.get<int>();
      } else if (key == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (key == "grid") {
        cfg.nx = v.at(0).get<int>();
        cfg.ny = v.at(1).get<int>();
      } else if (key == "rho") {
        cfg.rho = v.get<double>();
      } else if (key == "thetas") {
        cfg.thetas = v.get<int>();
      } else if (key == "t") {
        cfg.t = v.get<std::vector<double>>();
      } else if (key == "b") {
        cfg.b = v.get<double>();
      } else if (key == "samples") {
        cfg.samples = v.get<int>();
      } else {
        throw validation_error("config: unknown key '" + key + "'");
      }
    } catch (const json::exception&) {
      throw validation_error("config: key '" + key + "' has the wrong type");
    }
  }
}

json config_to_json(const RunConfig& c) {
  json j = {{"command", c.command}, {"potentials", c.potentials}, {"radii", c.radii}, {"tol", c.tol},
            {"out", c.out},         {"svg", c.svg},               {"threads", c.threads}, {"seed", c.seed},
            {"grid", {c.nx, c.ny}}, {"thetas", c.thetas},         {"t", c.t},           {"b", c.b},
            {"samples", c.samples}};
  j["region"] = c.region ? to_json(*c.region) : json(nullptr);
  j["rho"] = c.rho ? json(*c.rho) : json(nullptr);
  return j;
}

void validate(const RunConfig& c) {
  if (std::find(kCommands.begin(), kCommands.end(), c.command) == kCommands.end()) {
    throw validation_error("unknown command '" + c.command + "'");
  }
  const std::size_t need = c.command == "uniqueness" ? 2 : 1;
  if (c.potentials.size() != need) {
    throw validation_error(c.command + " needs " + std::to_string(need) + " --potential file(s)");
  }
  for (const auto& p : c.potentials) {
    if (!fs::exists(p)) throw validation_error("potential file '" + p + "' does not exist");
  }
  if (!(c.tol > 0.0)) throw validation_error("--tol must be positive");
  if (c.threads < 1) throw validation_error("--threads must be at least 1");
  if (c.nx < 1 || c.ny < 1) throw validation_error("grid must be at least 1x1");
  if (c.thetas < 1) throw validation_error("--thetas must be positive");
  if (c.samples < 1) throw validation_error("--samples must be positive");
  for (double r : c.radii) {
    if (!(r > 0.0)) throw validation_error("radii must be positive");
  }
  if (c.command == "indicator" && !c.radii.empty() && c.radii.size() < 5) {
    throw validation_error("indicator needs at least 5 radii");
  }
}

struct Output {
  std::string name;
  std::string content;
};

struct Outcome {
  std::vector<Output> files;
  bool partial = false;  // some values did not reach the tolerance
  std::string note;
};

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

std::vector<cplx> locations(const std::vector<Zero>& zs) {
  std::vector<cplx> out;
  for (const auto& z : zs) out.push_back(z.location);
  return out;
}

bool all_converged(const std::vector<Zero>& zs) {
  return std::all_of(zs.begin(), zs.end(), [](const Zero& z) { return z.converged; });
}

Outcome run_command(const RunConfig& c) {
  std::vector<PotentialSpec> specs;
  for (const auto& p : c.potentials) specs.push_back(load_potential(p));
  const PotentialSpec& v = specs.front();
  const std::string stem = c.command + "-" + v.label();
  DeterminantOptions dopt;
  dopt.tol = std::min(1e-8, c.tol);
  FindOptions fopt;
  fopt.threads = c.threads;
  Outcome out;

  if (c.command == "det-grid") {
    const ContourRegion region = c.region.value_or(ContourRegion{-5.0, 5.0, -5.0, -0.1});
    const DetGrid g = det_grid(v, region, c.nx, c.ny, dopt, c.threads);
    int unconverged = 0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      if (!g.masked[i] && !g.values[i].converged) ++unconverged;
    }
    out.partial = unconverged > 0;
    out.files.push_back({stem + ".csv", det_grid_csv(g)});
    out.files.push_back({stem + ".json", json_text({{"potential", potential_to_json(v)},
                                                    {"region", to_json(region)},
                                                    {"nx", c.nx},
                                                    {"ny", c.ny},
                                                    {"unconverged_points", unconverged}})});
  } else if (c.command == "resonances") {
    const ContourRegion region = c.region.value_or(ContourRegion{0.0, 6.0, -3.0, -0.05});
    ResonanceSet rs;
    if (v.is_trivial()) {
      rs.region = region;
      rs.tol = c.tol;
    } else {
      rs = find_zeros(determinant_function(v, dopt), region, c.tol, fopt, ZeroMethod::fredholm);
    }
    rs.method = ZeroMethod::fredholm;
    rs.evaluator = "nystrom";
    out.partial = !all_converged(rs.zeros);
    json j = to_json(rs);
    j["potential"] = potential_to_json(v);
    out.files.push_back({stem + ".json", json_text(j)});
    out.files.push_back({stem + ".csv", zeros_csv(rs.zeros)});
    if (c.svg) {
      out.files.push_back({stem + ".svg", scatter_svg({{"resonances", "#c0392b", locations(rs.zeros), false}},
                                                      "resonances: " + v.label())});
    }
  } else if (c.command == "counting") {
    CountingLawOptions opt;
    opt.rho = c.rho;
    opt.determinant = dopt;
    opt.counting.tol = c.tol;
    opt.counting.find = fopt;
    opt.hypotheses.seed = c.seed;
    const std::vector<double> radii = c.radii.empty() ? std::vector<double>{6.0, 9.0, 12.0} : c.radii;
    const CountingReport rep = counting_law_compare(v, radii, opt);
    out.partial = std::any_of(rep.unconverged_n.begin(), rep.unconverged_n.end(), [](int n) { return n > 0; });
    json j = to_json(rep);
    j["potential"] = potential_to_json(v);
    out.files.push_back({stem + ".json", json_text(j)});
    out.files.push_back({stem + ".csv", counting_csv(rep)});
    if (c.svg) {
      out.files.push_back({stem + ".svg", scatter_svg({{"zeros of D", "#c0392b", locations(rep.zeros), false}},
                                                      "counting: " + v.label())});
    }
  } else if (c.command == "born-compare") {
    const ContourRegion region = c.region.value_or(ContourRegion{0.0, 8.0, -8.0, -0.05});
    BornCompareOptions opt;
    opt.determinant = dopt;
    opt.find = fopt;
    opt.tol = c.tol;
    const BornComparison bc = born_zero_compare(v, region, opt);
    out.partial = !all_converged(bc.resonances.zeros) || !all_converged(bc.born_zeros.zeros);
    json j = to_json(bc);
    j["potential"] = potential_to_json(v);
    out.files.push_back({stem + ".json", json_text(j)});
    std::ostringstream csv;
    csv << "re_k,im_k,re_born,im_born,distance\n";
    for (const auto& p : bc.pairs) {
      const cplx bz = p.born_zero.value_or(cplx(std::nan(""), std::nan("")));
      csv << fmt17(p.resonance.real()) << ',' << fmt17(p.resonance.imag()) << ',' << fmt17(bz.real()) << ','
          << fmt17(bz.imag()) << ',' << fmt17(p.distance) << '\n';
    }
    out.files.push_back({stem + ".csv", csv.str()});
    if (c.svg) {
      out.files.push_back({stem + ".svg", scatter_svg({{"resonances", "#c0392b", locations(bc.resonances.zeros), false},
                                                       {"Born zeros", "#2471a3", locations(bc.born_zeros.zeros), true}},
                                                      "resonances vs Born zeros: " + v.label())});
    }
  } else if (c.command == "indicator") {
    if (v.is_trivial()) throw validation_error("indicator: potential is identically zero");
    const double rho = c.rho ? *c.rho : hypothesis_check(v, c.b, 1, HypothesisOptions{}).order_estimate;
    std::vector<double> thetas;
    for (int i = 0; i < c.thetas; ++i) thetas.push_back(2.0 * pi * i / c.thetas);
    const std::vector<double> ladder = c.radii.empty() ? default_determinant_ladder() : c.radii;
    const IndicatorEstimate est = indicator_of_D(v, rho, thetas, ladder, dopt, c.threads);
    json j = to_json(est);
    j["potential"] = potential_to_json(v);
    out.files.push_back({stem + ".json", json_text(j)});
    out.files.push_back({stem + ".csv", indicator_csv(est)});
  } else if (c.command == "sigma") {
    if (v.is_trivial()) throw validation_error("sigma: potential is identically zero");
    json values = json::array();
    std::ostringstream csv;
    csv << "t,sigma,error_estimate\n";
    for (double t : c.t) {
      const SigmaValue s = sigma_integral(v, t);
      json e = to_json(s);
      e["t"] = t;
      values.push_back(e);
      csv << fmt17(t) << ',' << fmt17(s.value) << ',' << fmt17(s.error_estimate) << '\n';
    }
    out.files.push_back({stem + ".json", json_text({{"potential", potential_to_json(v)}, {"sigma", values}})});
    out.files.push_back({stem + ".csv", csv.str()});
  } else if (c.command == "uniqueness") {
    const PotentialSpec& w = specs[1];
    UniquenessOptions opt;
    if (c.region) opt.region = *c.region;
    opt.determinant = dopt;
    opt.find = fopt;
    opt.tol = std::min(c.tol, 1e-9);
    opt.sigma_t = c.t;
    const UniquenessReport rep = uniqueness_compare(v, w, opt);
    out.partial = !all_converged(rep.resonances_a.zeros) || !all_converged(rep.resonances_b.zeros);
    json j = to_json(rep);
    j["potential_a"] = potential_to_json(v);
    j["potential_b"] = potential_to_json(w);
    const std::string name = c.command + "-" + v.label() + "-vs-" + w.label();
    out.files.push_back({name + ".json", json_text(j)});
  } else if (c.command == "hypotheses") {
    HypothesisOptions opt;
    opt.seed = c.seed;
    if (!c.radii.empty()) opt.radius_ladder = c.radii;
    const HypothesisReport rep = hypothesis_check(v, c.b, c.samples, opt);
    json j = to_json(rep);
    j["potential"] = potential_to_json(v);
    j["seed"] = c.seed;
    out.files.push_back({stem + ".json", json_text(j)});
  }
  return out;
}

std::string crc32_hex(const std::string& data) {
  boost::crc_32_type crc;
  crc.process_bytes(data.data(), data.size());
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", crc.checksum());
  return buf;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw validation_error("cannot write '" + p.string() + "'");
  f << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering resonances of compactly and super-exponentially decaying 1D potentials"};
  app.set_version_flag("--version", std::string(reslab::version));
  std::string command, region, radii, config, t_list, grid;
  std::vector<std::string> potentials;
  double tol = 0.0, rho = 0.0, b = 0.0;
  int threads = 0, thetas = 0, samples = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool svg = false;
  app.add_option("command", command, "det-grid | resonances | counting | born-compare | indicator | sigma | "
                                     "uniqueness | hypotheses");
  app.add_option("--potential", potentials, "potential file (JSON); repeat for uniqueness");
  app.add_option("--region", region, "re_min:re_max:im_min:im_max");
  app.add_option("--radii", radii, "r1,r2,... (counting radii, indicator or hypothesis ladder)");
  app.add_option("--tol", tol, "tolerance");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--svg", svg, "also write an SVG scatter");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--config", config, "JSON config; flags override its values");
  app.add_option("--seed", seed, "seed for sampled hypothesis checks");
  app.add_option("--grid", grid, "nx:ny for det-grid");
  app.add_option("--rho", rho, "order used by indicator and counting");
  app.add_option("--thetas", thetas, "number of indicator directions");
  app.add_option("--t", t_list, "t1,t2,... for sigma");
  app.add_option("--b", b, "exponent b in the H2 bound");
  app.add_option("--samples", samples, "H3 sample count");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  RunConfig cfg;
  fs::path out_path;
  int exit_code = 0;
  json error_record;
  Outcome outcome;
  try {
    if (!config.empty()) apply_config(cfg, config);
    if (!command.empty()) cfg.command = command;
    if (app.count("--potential")) cfg.potentials = potentials;
    if (app.count("--region")) cfg.region = parse_region(region);
    if (app.count("--radii")) cfg.radii = parse_list(radii, "--radii");
    if (app.count("--tol")) cfg.tol = tol;
    if (app.count("--out")) cfg.out = out_dir;
    if (app.count("--svg")) cfg.svg = svg;
    if (app.count("--threads")) cfg.threads = threads;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--grid")) {
      const auto g = split(grid, ':');
      if (g.size() != 2) throw validation_error("--grid expects nx:ny");
      cfg.nx = static_cast<int>(to_double(g[0], "--grid"));
      cfg.ny = static_cast<int>(to_double(g[1], "--grid"));
    }
    if (app.count("--rho")) cfg.rho = rho;
    if (app.count("--thetas")) cfg.thetas = thetas;
    if (app.count("--t")) cfg.t = parse_list(t_list, "--t");
    if (app.count("--b")) cfg.b = b;
    if (app.count("--samples")) cfg.samples = samples;
    out_path = cfg.out;
    fs::create_directories(out_path);
    validate(cfg);
    outcome = run_command(cfg);
    if (outcome.partial) {
      exit_code = 3;
      error_record = {{"type", "numerical_error"},
                      {"exit_code", 3},
                      {"message", "some values did not reach the requested tolerance; outputs are partial"}};
    }
  } catch (const validation_error& e) {
    exit_code = 2;
    error_record = {{"type", "validation_error"}, {"exit_code", 2}, {"message", e.what()}};
  } catch (const numerical_error& e) {
    exit_code = 3;
    error_record = {{"type", "numerical_error"}, {"exit_code", 3}, {"message", e.what()}};
  } catch (const fs::filesystem_error& e) {
    exit_code = 2;
    error_record = {{"type", "validation_error"}, {"exit_code", 2}, {"message", e.what()}};
  }
  // a failure before the overrides were applied still honours --out
  if (out_path.empty()) out_path = app.count("--out") ? fs::path(out_dir) : fs::path(cfg.out);

  if (exit_code != 0) {
    error_record["command"] = cfg.command;
    outcome.files.push_back({"error.json", json_text(error_record)});
    std::cerr << "reslab: " << error_record["message"].get<std::string>() << "\n";
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    fs::create_directories(out_path);
    json files = json::array();
    for (const auto& f : outcome.files) {
      write_file(out_path / f.name, f.content);
      files.push_back({{"file", f.name}, {"crc32", crc32_hex(f.content)}, {"bytes", f.content.size()}});
    }
    const json manifest = {{"tool_version", reslab::version},
                           {"command", cfg.command},
                           {"config", config_to_json(cfg)},
                           {"wall_time_seconds", wall},
                           {"exit_code", exit_code},
                           {"partial", outcome.partial},
                           {"outputs", files}};
    write_file(out_path / "manifest.json", json_text(manifest));
  } catch (const std::exception& e) {
    std::cerr << "reslab: cannot write outputs: " << e.what() << "\n";
    return 2;
  }
  for (const auto& f : outcome.files) std::cout << (out_path / f.name).string() << "\n";
  return exit_code;
}
