#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "nkcurv/scenario.hpp"

using namespace nkcurv;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "nkcurv_scenario_test";
  fs::create_directories(dir);
  return dir;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string("\"") + NKVERIFY_PATH + "\" " + args;
  const int status = std::system(cmd.c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

const fs::path kSource = NKCURV_SOURCE_DIR;

}  // namespace

TEST_CASE("config parsing", "[scenario][config]") {
  const ScenarioConfig cfg = parse_config(
      "# comment line\n"
      "model = cpn   # trailing comment\n"
      "n=4\n"
      "c = 2.5\n"
      "checks = prop1, structure, prop1\n"
      "seed = 18446744073709551615\n");
  CHECK(cfg.model == "cpn");
  CHECK(cfg.n == 4);
  CHECK(cfg.c == 2.5);
  CHECK(cfg.checks == std::vector<std::string>{"structure", "prop1"});
  CHECK(cfg.seed == 18446744073709551615ULL);
  CHECK(cfg.samples == 200);

  auto code_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("model = unknown-name\n") == ErrorCode::Configuration);
  CHECK(code_of("modle = s6\n") == ErrorCode::Configuration);
  CHECK(code_of("n = three\n") == ErrorCode::Configuration);
  CHECK(code_of("n = 3\nn = 3\n") == ErrorCode::Configuration);
  CHECK(code_of("samples = 0\n") == ErrorCode::Configuration);
  CHECK(code_of("tol_chart = -1\n") == ErrorCode::Configuration);
  CHECK(code_of("checks = structure, bogus\n") == ErrorCode::Configuration);
  CHECK(code_of("model = cpn\nc = -4\n") == ErrorCode::Configuration);
  CHECK(code_of("model = s6\nn = 4\n") == ErrorCode::Configuration);
  CHECK(code_of("just text\n") == ErrorCode::Configuration);
}

TEST_CASE("config round trip through the report", "[scenario][config]") {
  ScenarioConfig cfg;
  cfg.model = "cdn";
  cfg.n = 3;
  cfg.c = -0.1;
  cfg.tol_chart = 3e-5;
  cfg.samples = 17;
  cfg.seed = 99;
  cfg.checks = {"structure", "classify"};
  cfg.report_path = "out/report.txt";
  const Report report = run_scenario(cfg);
  CHECK(config_from_report(format_report(report)) == cfg);
  CHECK(parse_config(format_config(cfg)) == cfg);
}

TEST_CASE("report format", "[scenario][report]") {
  ScenarioConfig cfg;
  cfg.checks = {"structure", "symmetry", "classify"};
  const Report report = run_scenario(cfg);
  const std::string text = format_report(report);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "TOOLKIT nkcurv 0.1.0");
  const std::regex check_line(R"(CHECK [a-z0-9_.]+ (PASS|FAIL) defect=-?\d\.\d{16}e[+-]\d{2,3} tol=\S+)");
  int checks = 0;
  std::string last;
  while (std::getline(in, line)) {
    if (line.rfind("CHECK ", 0) == 0) {
      CHECK(std::regex_match(line, check_line));
      ++checks;
    }
    last = line;
  }
  CHECK(checks == 7);
  CHECK(last == "SUMMARY pass=7 fail=0 seed=1");
  for (const auto& r : report.records) CHECK(r.pass == (r.defect <= r.tolerance));
}

TEST_CASE("tolerance below round-off fails", "[scenario][report]") {
  ScenarioConfig cfg;
  cfg.tol_structural = 1e-30;
  cfg.checks = {"structure", "symmetry", "prop1"};
  const Report report = run_scenario(cfg);
  CHECK(report.fail_count() > 0);
  CHECK_FALSE(report.all_pass());
}

TEST_CASE("every model runs and the expected ones pass", "[scenario]") {
  for (const std::string model : {"cn", "cpn", "cdn", "s6"}) {
    ScenarioConfig cfg;
    cfg.model = model;
    cfg.c = model == "cdn" ? -4.0 : 4.0;
    cfg.samples = 50;
    const Report report = run_scenario(cfg);
    INFO(format_report(report));
    CHECK(report.all_pass());
    CHECK(report.records.size() == 27);
  }
  SECTION("a product violates the constant-curvature checks but is classified correctly") {
    ScenarioConfig cfg;
    cfg.model = "product";
    cfg.samples = 50;
    const Report report = run_scenario(cfg);
    CHECK_FALSE(report.all_pass());
    for (const auto& r : report.records) {
      if (r.id == "classify.label" || r.id.rfind("identities.", 0) == 0 || r.id.rfind("symmetry.", 0) == 0)
        CHECK(r.pass);
      if (r.id == "prop1.nu_range") CHECK_FALSE(r.pass);
    }
  }
  SECTION("errors inside a check become FAIL records") {
    ScenarioConfig cfg;
    cfg.model = "custom-chart";
    cfg.n = 2;
    cfg.samples = 20;
    cfg.checks = {"lemma", "classify"};
    const Report report = run_scenario(cfg);
    bool saw_error = false;
    for (const auto& r : report.records)
      if (!r.message.empty()) {
        saw_error = true;
        CHECK_FALSE(r.pass);
        CHECK(std::isinf(r.defect));
      }
    CHECK(saw_error);
  }
}

TEST_CASE("golden report for the s6 scenario", "[scenario][golden]") {
  const ScenarioConfig cfg = load_config((kSource / "scenarios" / "s6.cfg").string());
  const std::string golden = read_file(kSource / "tests" / "data" / "s6.report");
  REQUIRE(!golden.empty());
  CHECK(format_report(run_scenario(cfg)) == golden);
  CHECK(format_report(run_scenario(cfg)) == format_report(run_scenario(cfg)));
}

TEST_CASE("command line", "[scenario][cli]") {
  const fs::path dir = scratch_dir();
  const std::string config = (kSource / "scenarios" / "s6.cfg").string();
  const fs::path first = dir / "first.report", second = dir / "second.report";
  fs::remove(first);
  fs::remove(second);

  REQUIRE(run_tool("verify --config \"" + config + "\" --out \"" + first.string() + "\"") == 0);
  REQUIRE(run_tool("verify --config \"" + config + "\" --out \"" + second.string() + "\"") == 0);
  const std::string a = read_file(first);
  const std::string b = read_file(second);
  REQUIRE(!a.empty());
  // Only the echoed report_path differs between the two files.
  CHECK(std::regex_replace(a, std::regex("report_path = .*"), "") ==
        std::regex_replace(b, std::regex("report_path = .*"), ""));

  const fs::path stdout_copy = dir / "stdout.report";
  REQUIRE(run_tool("verify --config \"" + config + "\" > \"" + stdout_copy.string() + "\"") == 0);
  CHECK(read_file(stdout_copy) == read_file(kSource / "tests" / "data" / "s6.report"));

  SECTION("JSON mirror") {
    const auto j = nlohmann::json::parse(read_file(first.string() + ".json"));
    CHECK(j["toolkit"] == "nkcurv");
    CHECK(j["config"]["model"] == "s6");
    CHECK(j["summary"]["fail"] == 0);
    CHECK(j["checks"].size() == 27);
    CHECK(j["checks"][0]["id"] == "structure.j_square");
  }

  SECTION("exit codes") {
    const fs::path bad = dir / "bad.cfg";
    std::ofstream(bad) << "model = unknown-name\n";
    const fs::path bad_out = dir / "bad.report";
    fs::remove(bad_out);
    CHECK(run_tool("verify --config \"" + bad.string() + "\" --out \"" + bad_out.string() + "\" 2>/dev/null") == 2);
    CHECK_FALSE(fs::exists(bad_out));

    const fs::path strict = dir / "strict.cfg";
    std::ofstream(strict) << "model = s6\ntol_structural = 1e-30\nchecks = structure, prop1\n";
    CHECK(run_tool("verify --config \"" + strict.string() + "\" --out \"" + (dir / "strict.report").string() +
                   "\"") == 1);

    CHECK(run_tool("verify --config \"" + config + "\" --out /nonexistent-dir/x.report 2>/dev/null") == 2);
    CHECK(run_tool("bogus-subcommand 2>/dev/null >/dev/null") == 2);
    CHECK(run_tool("classify --model product --n 3 --c 4 > \"" + (dir / "classify.txt").string() + "\"") == 0);
    CHECK(read_file(dir / "classify.txt").find("label NonConstant") != std::string::npos);
    CHECK(run_tool("range --model cpn --n 3 --c 4 > \"" + (dir / "range.txt").string() + "\"") == 0);
    const std::string range = read_file(dir / "range.txt");
    const auto at = range.find("nu_min ");
    REQUIRE(at != std::string::npos);
    CHECK(std::abs(std::stod(range.substr(at + 7)) - 1.0) < 1e-12);
    CHECK(run_tool("report-schema > \"" + (dir / "schema.txt").string() + "\"") == 0);
    CHECK(read_file(dir / "schema.txt").find("SUMMARY pass=<k>") != std::string::npos);
  }
}
