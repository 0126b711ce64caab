#include <gtest/gtest.h>
#include <sys/wait.h>

#include <boost/crc.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <reslab/io.hpp>
#include <reslab/jost.hpp>
#include <sstream>

namespace fs = std::filesystem;
using namespace reslab;

namespace {

const std::string cli = RESLAB_CLI_PATH;
const fs::path samples = RESLAB_SAMPLES_DIR;

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("reslab_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string pot(const std::string& name) { return "--potential \"" + (samples / name).string() + "\""; }

}  // namespace

TEST(Cli, ResonancesMatchOracle) {
  const fs::path out = fresh_dir("res");
  ASSERT_EQ(run("resonances " + pot("square_well.json") + " --region 0:6:-3:-0.05 --tol 1e-10 --svg --out " +
                out.string()),
            0);
  const json j = read_json_file((out / "resonances-square_well.json").string());
  EXPECT_EQ(j.at("method"), "fredholm");
  const ResonanceSet oracle = transfer_matrix_resonances(SquareWell{-2.0, 1.0}, {0.0, 6.0, -3.0, -0.05});
  ASSERT_EQ(j.at("zeros").size(), oracle.zeros.size());
  for (std::size_t i = 0; i < oracle.zeros.size(); ++i) {
    const cplx z(j.at("zeros")[i].at("re").get<double>(), j.at("zeros")[i].at("im").get<double>());
    EXPECT_LT(std::abs(z - oracle.zeros[i].location), 1e-6);
  }
  EXPECT_TRUE(fs::exists(out / "resonances-square_well.csv"));
  EXPECT_TRUE(fs::exists(out / "resonances-square_well.svg"));
}

TEST(Cli, DetGridOfZeroPotentialIsOne) {
  const fs::path out = fresh_dir("grid");
  ASSERT_EQ(run("det-grid " + pot("zero.json") + " --region -5:5:0.1:5 --grid 11:7 --out " + out.string()), 0);
  std::istringstream in(slurp(out / "det-grid-zero.csv"));
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    ASSERT_EQ(cols.size(), 6u);
    EXPECT_EQ(std::stod(cols[4]), 1.0);
    ++rows;
  }
  EXPECT_EQ(rows, 77);
}

TEST(Cli, UniquenessOfIdenticalInputs) {
  const fs::path out = fresh_dir("uniq");
  ASSERT_EQ(run("uniqueness " + pot("two_gaussian.json") + " " + pot("two_gaussian.json") +
                " --region 0.2:3:-2.5:-0.1 --out " + out.string()),
            0);
  const json j = read_json_file((out / "uniqueness-two_gaussian-vs-two_gaussian.json").string());
  for (const char* k : {"resonance_set_distance", "sup_D_difference", "sup_absFT_difference", "sigma_difference",
                        "born_product_difference"}) {
    EXPECT_LT(j.at(k).get<double>(), 1e-10) << k;
  }
}

TEST(Cli, ValidationErrorExitsTwoWithRecord) {
  const fs::path out = fresh_dir("bad");
  const fs::path bad = out / "bad.json";
  std::ofstream(bad) << R"({"family": "gaussian", "width": -1})";
  EXPECT_EQ(run("resonances --potential " + bad.string() + " --out " + out.string()), 2);
  const json e = read_json_file((out / "error.json").string());
  EXPECT_EQ(e.at("type"), "validation_error");
  EXPECT_EQ(e.at("exit_code"), 2);
  EXPECT_EQ(e.at("command"), "resonances");
  EXPECT_EQ(read_json_file((out / "manifest.json").string()).at("exit_code"), 2);

  const fs::path early = fresh_dir("bad_region");
  EXPECT_EQ(run("det-grid " + pot("gaussian.json") + " --region 1:0:0:1 --out " + early.string()), 2);
  EXPECT_TRUE(fs::exists(early / "error.json"));
  EXPECT_EQ(run("no-such-command " + pot("gaussian.json") + " --out " + out.string()), 2);
  EXPECT_EQ(run("det-grid --potential /nonexistent.json --out " + out.string()), 2);
}

TEST(Cli, ManifestListsEveryOutputWithChecksum) {
  const fs::path out = fresh_dir("manifest");
  ASSERT_EQ(run("resonances " + pot("square_well.json") + " --svg --out " + out.string()), 0);
  const json m = read_json_file((out / "manifest.json").string());
  EXPECT_EQ(m.at("command"), "resonances");
  EXPECT_EQ(m.at("exit_code"), 0);
  EXPECT_TRUE(m.contains("tool_version"));
  EXPECT_TRUE(m.contains("wall_time_seconds"));
  std::set<std::string> listed;
  for (const auto& f : m.at("outputs")) {
    const std::string name = f.at("file");
    listed.insert(name);
    const std::string data = slurp(out / name);
    boost::crc_32_type crc;
    crc.process_bytes(data.data(), data.size());
    char hex[16];
    std::snprintf(hex, sizeof hex, "%08x", crc.checksum());
    EXPECT_EQ(f.at("crc32"), hex) << name;
    EXPECT_EQ(f.at("bytes"), data.size()) << name;
  }
  for (const auto& e : fs::directory_iterator(out)) {
    const std::string name = e.path().filename().string();
    if (name != "manifest.json") EXPECT_TRUE(listed.count(name)) << name;
  }
  EXPECT_EQ(listed.size(), 3u);
}

TEST(Cli, DeterministicCsv) {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  const std::string args = "det-grid " + pot("two_gaussian.json") + " --region -2:2:-2:-0.2 --grid 5:4 --threads 2";
  ASSERT_EQ(run(args + " --out " + a.string()), 0);
  ASSERT_EQ(run(args + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "det-grid-two_gaussian.csv"), slurp(b / "det-grid-two_gaussian.csv"));
  const fs::path c = fresh_dir("det_c"), d = fresh_dir("det_d");
  ASSERT_EQ(run("hypotheses " + pot("gaussian.json") + " --samples 20 --seed 5 --out " + c.string()), 0);
  ASSERT_EQ(run("hypotheses " + pot("gaussian.json") + " --samples 20 --seed 5 --out " + d.string()), 0);
  EXPECT_EQ(slurp(c / "hypotheses-gaussian.json"), slurp(d / "hypotheses-gaussian.json"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path out = fresh_dir("config");
  const fs::path cfg = out / "run.json";
  std::ofstream(cfg) << R"({"command": "det-grid", "potentials": [")" << (samples / "gaussian.json").string()
                     << R"("], "region": "0.5:2:-1:-0.5", "grid": [3, 2], "out": "from_config"})";
  ASSERT_EQ(run("--config " + cfg.string()), 0);
  EXPECT_TRUE(fs::exists(out / "from_config" / "det-grid-gaussian.csv"));
  ASSERT_EQ(run("--config " + cfg.string() + " --grid 2:2 --out " + (out / "flag").string()), 0);
  const std::string csv = slurp(out / "flag" / "det-grid-gaussian.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);  // header + 4 rows
  const json m = read_json_file((out / "flag" / "manifest.json").string());
  EXPECT_EQ(m.at("config").at("command"), "det-grid");
}

TEST(Cli, SampleConfigRuns) {
  // the shipped config writes next to itself; copy it so the source tree stays clean
  const fs::path out = fresh_dir("sample_cfg");
  fs::copy_file(samples / "square_well_resonances.config.json", out / "cfg.json");
  fs::copy_file(samples / "square_well.json", out / "square_well.json");
  ASSERT_EQ(run("--config " + (out / "cfg.json").string()), 0);
  EXPECT_TRUE(fs::exists(out / "out" / "resonances-square_well.json"));
  EXPECT_TRUE(fs::exists(out / "out" / "resonances-square_well.svg"));
}

TEST(Cli, VersionFlag) { EXPECT_EQ(run("--version"), 0); }
