#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir() {
  static int counter = 0;
  fs::path d = fs::temp_directory_path() /
               ("resdelta_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::create_directories(d);
  return d;
}

const char* cli_path() { return std::getenv("RESDELTA_CLI"); }
const char* config_dir() { return std::getenv("RESDELTA_CONFIG_DIR"); }

RunResult run_cli(const std::string& args) {
  RunResult r;
  if (cli_path() == nullptr) return r;
  fs::path dir = fresh_dir();
  fs::path so = dir / "stdout.txt", se = dir / "stderr.txt";
  std::string cmd = std::string(cli_path()) + " " + args + " > " + so.string() + " 2> " + se.string();
  int status = std::system(cmd.c_str());
  if (status == -1) return r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(so);
  r.err = slurp(se);
  return r;
}

fs::path write_config(const std::string& text) {
  fs::path p = fresh_dir() / "config.json";
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

}  // namespace

TEST_CASE("verify subcommand on the smoke configuration") {
  REQUIRE(cli_path() != nullptr);
  REQUIRE(config_dir() != nullptr);
  fs::path cfg = fs::path(config_dir()) / "smoke.json";
  REQUIRE(fs::exists(cfg));

  fs::path out = fresh_dir();
  RunResult r = run_cli("verify --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 0);
  CHECK(r.out == "verify: 1/1 passed\n");
  std::string report = slurp(out / "report.txt");
  CHECK(report.find("result: PASS") != std::string::npos);
  CHECK(report.find("lhs_localized=0.2820947") != std::string::npos);
  CHECK(report.find("summary: 1/1 passed") != std::string::npos);

  // Byte-identical rerun, also under a different worker count.
  fs::path out2 = fresh_dir();
  RunResult r2 =
      run_cli("verify --config " + cfg.string() + " --out " + out2.string() + " --workers 3");
  CHECK(r2.code == 0);
  CHECK(r2.out == r.out);
  CHECK(slurp(out2 / "report.txt") == report);
}

TEST_CASE("verify reports coincident roots as divergent") {
  REQUIRE(cli_path() != nullptr);
  REQUIRE(config_dir() != nullptr);
  fs::path cfg = write_config(
      "{\"seed\": 1, \"configs\": [{\"a\": 1.0, \"b\": 1.0, \"u\": [0.0, 0.0001], "
      "\"v\": [3.0], \"width\": 1.0}]}");
  fs::path out = fresh_dir();
  RunResult r = run_cli("verify --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 1);
  std::string report = slurp(out / "report.txt");
  CHECK(report.find("result: Divergent (pair 1,2)") != std::string::npos);
}

TEST_CASE("malformed configuration exits 2 and writes nothing") {
  REQUIRE(cli_path() != nullptr);
  REQUIRE(config_dir() != nullptr);
  fs::path cfg = write_config("{ this is not json");
  fs::path out = fresh_dir();
  RunResult r = run_cli("verify --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
  CHECK(!fs::exists(out / "report.txt"));

  fs::path unknown = write_config("{\"seed\": 1, \"bogus\": 2, \"configs\": []}");
  CHECK(run_cli("verify --config " + unknown.string() + " --out " + out.string()).code == 2);

  fs::path noseed = write_config(
      "{\"configs\": [{\"a\": 1.0, \"b\": 1.0, \"u\": [0.0], \"v\": [0.0], \"width\": 1.0}]}");
  CHECK(run_cli("verify --config " + noseed.string() + " --out " + out.string()).code == 2);

  CHECK(run_cli("verify --config " + fs::path(fs::path(config_dir()) / "smoke.json").string() +
                " --out " + (out / "missing" / "deeper").string())
            .code == 2);

  CHECK(run_cli("frobnicate").code == 2);
}

TEST_CASE("integrate subcommand") {
  REQUIRE(cli_path() != nullptr);
  REQUIRE(config_dir() != nullptr);
  fs::path parallel = fs::path(config_dir()) / "integrate_parallel.json";
  RunResult r = run_cli("integrate --config " + parallel.string());
  CHECK(r.code == 0);
  CHECK(r.out.substr(0, 8) == "0.640913");

  fs::path axes = fs::path(config_dir()) / "integrate_axes.json";
  RunResult rd = run_cli("integrate --config " + axes.string());
  CHECK(rd.code == 0);
  CHECK(rd.out == "DIVERGENT (pair 1,2)\n");

  fs::path single = write_config(
      "{\"seed\": 1, \"factors\": [{\"gradient\": [1.0, 0.0], \"offset\": 0.0}], "
      "\"test_function\": {\"kind\": \"gaussian\", \"center\": [0.0, 0.0], \"width\": 1.0}}");
  RunResult rs = run_cli("integrate --config " + single.string());
  CHECK(rs.code == 0);
  CHECK(rs.out.substr(0, 8) == "0.398942");

  fs::path propor = write_config(
      "{\"seed\": 1, \"factors\": [{\"gradient\": [1.0, 0.0], \"offset\": 0.0}, "
      "{\"gradient\": [2.0, 0.0], \"offset\": 0.0}], "
      "\"test_function\": {\"kind\": \"gaussian\", \"center\": [0.0, 0.0], \"width\": 1.0}}");
  CHECK(run_cli("integrate --config " + propor.string()).code == 2);
}

TEST_CASE("expand-j subcommand") {
  REQUIRE(cli_path() != nullptr);
  REQUIRE(config_dir() != nullptr);
  RunResult r11 = run_cli("expand-j --size-a 1 --size-b 1");
  CHECK(r11.code == 0);
  CHECK(r11.out == "1\n");

  RunResult r22 = run_cli("expand-j --size-a 2 --size-b 2");
  CHECK(r22.code == 0);
  CHECK(r22.out == "u1 + u2 - v1 - v2\n");

  RunResult rab = run_cli("expand-j --size-a 2 --size-b 2 --a=2 --b=-3");
  CHECK(rab.code == 0);
  CHECK(rab.out == "-6*u1 - 6*u2 + 6*v1 + 6*v2\n");

  RunResult rr = run_cli("expand-j --size-a 1 --size-b 2 --a=3/2");
  CHECK(rr.code == 0);
  CHECK(rr.out == "-3/2\n");

  CHECK(run_cli("expand-j --size-a 5 --size-b 1").code == 2);
  CHECK(run_cli("expand-j --size-a 1 --size-b 1 --a 0").code == 2);
  CHECK(run_cli("expand-j --size-a 1 --size-b 1 --a 1/0").code == 2);
  CHECK(run_cli("expand-j --size-b 1").code == 2);
}

TEST_CASE("horn subcommand is deterministic") {
  REQUIRE(cli_path() != nullptr);
  REQUIRE(config_dir() != nullptr);
  fs::path cfg = fs::path(config_dir()) / "horn_degenerate.json";
  REQUIRE(fs::exists(cfg));
  fs::path out1 = fresh_dir(), out2 = fresh_dir();
  RunResult r1 = run_cli("horn --config " + cfg.string() + " --out " + out1.string());
  CHECK(r1.code == 0);
  CHECK(r1.out.substr(0, 15) == "horn: bins=100 ");
  for (const char* name : {"mc_grid.csv", "localized_grid.csv", "compare.csv"}) {
    CHECK(fs::exists(out1 / name));
  }
  RunResult r2 = run_cli("horn --config " + cfg.string() + " --out " + out2.string());
  CHECK(r2.out == r1.out);
  for (const char* name : {"mc_grid.csv", "localized_grid.csv", "compare.csv"}) {
    CHECK(slurp(out2 / name) == slurp(out1 / name));
    CHECK(!slurp(out1 / name).empty());
  }

  std::string header = slurp(out1 / "compare.csv").substr(0, 41);
  CHECK(header == "p_lo,p_hi,q_lo,q_hi,mc,sigma,localized,z,");
}
