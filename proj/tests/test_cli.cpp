#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kBin = ERGOTOOL_BIN;
const std::string kCfg = std::string(ERGO_DATA_DIR) + "/default.cfg";

int run(const std::string& args) {
  const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json report(const fs::path& dir, const std::string& name) {
  return nlohmann::json::parse(slurp(dir / (name + "_report.json")));
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::current_path() / tag) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("optimize returns the published region with exit 0") {
  TempDir out("cli_optimize");
  REQUIRE(run("optimize --config " + kCfg + " --out " + out.path.string()) == 0);
  const auto doc = report(out.path, "optimize");
  CHECK(doc["solver"]["status"] == "optimal");
  CHECK(std::abs(doc["solver"]["geometry"]["oe_cm"].get<double>() - 78.0) <= 1.0);
  CHECK(std::abs(doc["solver"]["geometry"]["cb_cm"].get<double>() - 24.0) <= 1.0);
  CHECK(std::abs(doc["solver"]["geometry"]["bd_cm"].get<double>() - 4.0) <= 1.0);
  CHECK(doc["solver"]["objective"].get<double>() >= 1.379);
  CHECK(doc["solver_within_oracle_margin"].get<bool>());
}

TEST_CASE("check accepts the default geometry") {
  TempDir out("cli_check");
  REQUIRE(run("check --config " + kCfg + " --out " + out.path.string()) == 0);
  CHECK(report(out.path, "check")["slacks"]["feasible"].get<bool>());
}

TEST_CASE("scoop reports the four depths and the plate length") {
  TempDir out("cli_scoop");
  REQUIRE(run("scoop --config " + kCfg + " --out " + out.path.string()) == 0);
  const auto doc = report(out.path, "scoop");
  REQUIRE(doc["materials"].size() == 4);
  const double expected[] = {6.32, 8.98, 8.94, 16.11};
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(std::abs(doc["materials"][i]["depth_cm"].get<double>() - expected[i]) <= 0.02);
  CHECK(doc["plate_length_cm"].get<int>() == 6);
}

TEST_CASE("handle reports the compromise height and the tier list") {
  TempDir out("cli_handle");
  REQUIRE(run("handle --config " + kCfg + " --out " + out.path.string()) == 0);
  const auto doc = report(out.path, "handle");
  CHECK(doc["maneuver"]["height_cm"].get<double>() == 92.5);
  CHECK(doc["lift"]["min_height_cm"].get<double>() == 80.0);
  const std::vector<double> tiers = doc["tiers_cm"].get<std::vector<double>>();
  CHECK(tiers == std::vector<double>{175, 155, 135, 115, 95});
}

TEST_CASE("doe emits model, anova, r-squared and desirability") {
  TempDir out("cli_doe");
  REQUIRE(run("doe --config " + kCfg + " --out " + out.path.string()) == 0);
  const auto doc = report(out.path, "doe");
  CHECK(doc["design"]["runs"].get<int>() == 216);
  CHECK(doc["r_squared_pct"].get<double>() > 90.0);
  CHECK(doc["anova"].size() >= 5);
  CHECK(doc["desirability"]["settings"][3]["value"] == "cement");
  CHECK(doc["desirability"]["settings"][4]["value"] == "pull");
}

TEST_CASE("reba scores the shipped postures") {
  TempDir out("cli_reba");
  REQUIRE(run("reba --config " + kCfg + " --out " + out.path.string()) == 0);
  const auto doc = report(out.path, "reba");
  REQUIRE(doc["rows"].size() == 4);
  CHECK(doc["rows"][0]["left"]["final"].get<int>() == 1);
  CHECK(doc["rows"][3]["left"]["final"].get<int>() == 15);
}

TEST_CASE("csv format adds table mirrors") {
  TempDir out("cli_mirror");
  REQUIRE(run("scoop --config " + kCfg + " --format csv --out " + out.path.string()) == 0);
  CHECK(fs::exists(out.path / "scoop_depths.csv"));
  REQUIRE(run("doe --config " + kCfg + " --format csv --out " + out.path.string()) == 0);
  CHECK(fs::exists(out.path / "anova.csv"));
}

TEST_CASE("exit code contract") {
  TempDir out("cli_exit");

  // 1: input/config trouble
  CHECK(run("optimize --config /nonexistent.cfg --out " + out.path.string()) == 1);
  const auto bad_key = out.path / "bad_key.cfg";
  std::ofstream(bad_key) << "[geometry]\nof = 78\n";
  CHECK(run("optimize --config " + bad_key.string() + " --out " + out.path.string()) == 1);
  const auto missing_file = out.path / "missing_file.cfg";
  std::ofstream(missing_file) << "[scoop]\nmaterials = nowhere.csv\n";
  CHECK(run("scoop --config " + missing_file.string() + " --out " + out.path.string()) == 1);
  std::ofstream(out.path / "broken.csv") << "name,density_kgm3,mu,effective_rho_mu\ngravel,abc,0.8,\n";
  const auto broken_cfg = out.path / "broken.cfg";
  std::ofstream(broken_cfg) << "[scoop]\nmaterials = broken.csv\n";
  CHECK(run("scoop --config " + broken_cfg.string() + " --out " + out.path.string()) == 1);
  CHECK(run("--config " + kCfg) != 0);  // a subcommand is required

  // 2: domain infeasibility
  const auto infeasible = out.path / "infeasible.cfg";
  std::ofstream(infeasible) << "[bounds]\nmin_container_volume = 1000000000\n";
  CHECK(run("optimize --config " + infeasible.string() + " --out " + out.path.string()) == 2);
  const auto tight = out.path / "tight.cfg";
  std::ofstream(tight) << "[geometry]\noe = 0\ncb = 20\nbd = 10\n";
  CHECK(run("check --config " + tight.string() + " --out " + out.path.string()) == 2);
}

TEST_CASE("full pipeline reports are byte-identical across runs") {
  TempDir out1("cli_det1"), out2("cli_det2");
  const char* cmds[] = {"optimize", "scoop", "handle", "doe", "reba", "check"};
  for (const auto* cmd : cmds) {
    REQUIRE(run(std::string(cmd) + " --config " + kCfg + " --format csv --out " +
                out1.path.string()) == 0);
    REQUIRE(run(std::string(cmd) + " --config " + kCfg + " --format csv --out " +
                out2.path.string()) == 0);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(out1.path)) {
    const auto twin = out2.path / entry.path().filename();
    REQUIRE(fs::exists(twin));
    REQUIRE(slurp(entry.path()) == slurp(twin));
    ++compared;
  }
  CHECK(compared >= 8);  // six reports plus csv mirrors
}
