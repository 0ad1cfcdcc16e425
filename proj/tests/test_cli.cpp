#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "chac/config.hpp"
#include "chac/io.hpp"

namespace fs = std::filesystem;
using namespace chac;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const fs::path outfile = fs::temp_directory_path() / "chac_cli_out.txt";
  const std::string cmd = std::string(CHAC_CLI_PATH) + " " + args + " > " +
                          outfile.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WEXITSTATUS(rc);
  std::ifstream in(outfile);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  return res;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << text;
  return p;
}

const char* kMinimalConfig = R"(
[model]
d = 1
alpha = 0.1

[discretization]
n_modes = 32
dt = 1e-3
t_end = 0.02

[initial]
kind = "smooth_random"
amplitude = 0.3

[run]
seed = 99
paths = 1
snapshot_stride = 5
)";

}  // namespace

TEST_CASE("config parsing: sections, lists, comments, errors") {
  const ConfigMap map = parse_config_text(
      "# comment\n[model]\nd = 2\nrho = 0.5 # inline\nf_poly = [2, 0, -1, 0]\n"
      "[run]\nseed = 7\n");
  CHECK(map.get_int("model.d", 1) == 2);
  CHECK(map.get_double("model.rho", 1.0) == 0.5);
  const auto poly = map.get_list("model.f_poly", {});
  REQUIRE(poly.size() == 4);
  CHECK(poly[0] == 2.0);
  CHECK(map.get_double("run.seed", 0) == 7.0);

  CHECK_THROWS_AS(parse_config_text("novalue\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[unterminated\n"), ConfigError);
  const ConfigMap bad = parse_config_text("[model]\nd = abc\n");
  CHECK_THROWS_AS(bad.get_int("model.d", 1), ConfigError);
}

TEST_CASE("build_sim_config: defaults and initial fields") {
  ConfigMap map = parse_config_text("[model]\nd = 1\n");
  const SimConfig cfg = build_sim_config(map);
  CHECK(cfg.modes == 256);
  CHECK(cfg.dt == 1e-4);
  CHECK(cfg.q_norm == 4.0);
  CHECK(cfg.f.enabled);
  CHECK(cfg.u0.coeffs.abs().maxCoeff() == 0.0);

  ConfigMap m2 = parse_config_text(
      "[model]\nd = 1\n[discretization]\nn_modes = 16\n"
      "[initial]\nkind = \"constant\"\nvalue = 2.0\n");
  const SimConfig c2 = build_sim_config(m2);
  CHECK(c2.u0.coeffs[0] == doctest::Approx(2.0 * std::sqrt(M_PI)).epsilon(1e-14));

  ConfigMap m3 = parse_config_text(
      "[model]\nd = 2\n[discretization]\nn_modes = 8\n"
      "[initial]\nkind = \"single_mode\"\nk = [1, 2]\namplitude = 3.0\n");
  const SimConfig c3 = build_sim_config(m3);
  CHECK(c3.u0.coeffs[1 * 8 + 2] == 3.0);
}

TEST_CASE("simulate: outputs exist and reruns are byte-identical") {
  const fs::path cfg = write_config("chac_min.cfg", kMinimalConfig);
  const fs::path out1 = fs::temp_directory_path() / "chac_run1";
  const fs::path out2 = fs::temp_directory_path() / "chac_run2";
  fs::remove_all(out1);
  fs::remove_all(out2);

  const RunResult r1 =
      run_cli("simulate --config " + cfg.string() + " --out-dir " + out1.string());
  CHECK(r1.exit_code == 0);
  CHECK(fs::exists(out1 / "manifest.json"));
  CHECK(fs::exists(out1 / "path_0000_snapshots.bin"));
  CHECK(fs::exists(out1 / "path_0000_snapshots.json"));
  CHECK(fs::exists(out1 / "path_0000_energy.csv"));

  const RunResult r2 =
      run_cli("simulate --config " + cfg.string() + " --out-dir " + out2.string());
  CHECK(r2.exit_code == 0);
  CHECK(file_digest(out1 / "path_0000_snapshots.bin") ==
        file_digest(out2 / "path_0000_snapshots.bin"));
  CHECK(file_digest(out1 / "path_0000_energy.csv") ==
        file_digest(out2 / "path_0000_energy.csv"));

  // worker count must not change the bytes
  const fs::path out3 = fs::temp_directory_path() / "chac_run3";
  fs::remove_all(out3);
  const RunResult r3 = run_cli("simulate --config " + cfg.string() + " --paths 3 " +
                               "--workers 3 --out-dir " + out3.string());
  CHECK(r3.exit_code == 0);
  const fs::path out4 = fs::temp_directory_path() / "chac_run4";
  fs::remove_all(out4);
  const RunResult r4 = run_cli("simulate --config " + cfg.string() + " --paths 3 " +
                               "--workers 1 --out-dir " + out4.string());
  CHECK(r4.exit_code == 0);
  for (int p = 0; p < 3; ++p) {
    char name[64];
    std::snprintf(name, sizeof(name), "path_%04d_snapshots.bin", p);
    CHECK(file_digest(out3 / name) == file_digest(out4 / name));
  }
}

TEST_CASE("simulate: alpha gate and unknown keys exit with code 3") {
  const fs::path bad = write_config("chac_alpha.cfg", std::string(kMinimalConfig) +
                                                          "\n[model2]\nx = 1\n");
  const RunResult r0 = run_cli("simulate --config " + bad.string());
  CHECK(r0.exit_code == 3);
  CHECK(r0.out.find("unknown key") != std::string::npos);

  std::string alpha_cfg(kMinimalConfig);
  const auto pos = alpha_cfg.find("alpha = 0.1");
  alpha_cfg.replace(pos, 11, "alpha = 0.2");
  const fs::path cfg = write_config("chac_alpha2.cfg", alpha_cfg);
  const fs::path out = fs::temp_directory_path() / "chac_alpha_out";
  const RunResult r1 =
      run_cli("simulate --config " + cfg.string() + " --out-dir " + out.string());
  CHECK(r1.exit_code == 3);
  CHECK(r1.out.find("alpha outside (0,1/9)") != std::string::npos);

  const RunResult r2 = run_cli("simulate --config " + cfg.string() +
                               " --override-alpha --out-dir " + out.string());
  CHECK(r2.exit_code == 0);
}

TEST_CASE("green-verify: reduced d=1 suite passes; forced c2 fails") {
  const fs::path cfg = write_config("chac_green.cfg",
                                    "[green]\ndims = [1]\nt_points = 6\n");
  const fs::path out = fs::temp_directory_path() / "chac_green_out";
  const RunResult ok = run_cli("green-verify --config " + cfg.string() +
                               " --out-dir " + out.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("\"pass\":true") != std::string::npos);
  CHECK(fs::exists(out / "green_report.jsonl"));

  const fs::path forced = write_config(
      "chac_green_forced.cfg", "[green]\ndims = [1]\nt_points = 6\nforce_c2 = 50.0\n");
  const RunResult bad = run_cli("green-verify --config " + forced.string() +
                                " --out-dir " + out.string());
  CHECK(bad.exit_code == 1);
}

TEST_CASE("holder: two paths come back flagged as low-confidence") {
  const std::string cfg_text = R"(
[model]
d = 1
sigma_form = "constant"
c_sigma = 1.0

[discretization]
n_modes = 64
dt = 2e-4
t_end = 0.05

[run]
seed = 5
paths = 2
)";
  const fs::path cfg = write_config("chac_holder.cfg", cfg_text);
  const fs::path out = fs::temp_directory_path() / "chac_holder_out";
  const RunResult r = run_cli("holder --config " + cfg.string() + " --out-dir " +
                              out.string() + " --override-alpha");
  CHECK(r.exit_code == 2);  // inconclusive: too few paths
  CHECK(fs::exists(out / "structure_space.csv"));
  CHECK(fs::exists(out / "holder_summary.json"));
}
