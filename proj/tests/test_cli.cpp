#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

/**
 * End-to-end driver tests: the binary under FEDOSOV_CLI_PATH is run as a
 * subprocess against the golden configs under FEDOSOV_CONFIG_DIR, checking
 * exit codes, report bytes, and determinism.
 */

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_file(const std::string& stem) {
  static int counter = 0;
  return std::filesystem::temp_directory_path() /
         ("fedosov_cli_" + stem + "_" + std::to_string(++counter));
}

RunResult run_cli(const std::string& args) {
  const std::filesystem::path out = temp_file("stdout"), err = temp_file("stderr");
  const std::string cmd = std::string("\"") + FEDOSOV_CLI_PATH + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  std::filesystem::remove(out);
  std::filesystem::remove(err);
  return r;
}

std::string config_path(const std::string& name) {
  return (std::filesystem::path(FEDOSOV_CONFIG_DIR) / name).string();
}

std::filesystem::path write_temp_config(const std::string& stem, const std::string& body) {
  const std::filesystem::path p = temp_file(stem + ".json");
  std::ofstream(p, std::ios::binary) << body;
  return p;
}

}  // namespace

TEST_CASE("every command reproduces its golden report byte for byte") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"validate", "flat2.json"},        {"build", "flat2.json"},
      {"star", "flat2.json"},            {"cochains", "flat2.json"},
      {"assoc-check", "flat2.json"},     {"naturality", "flat2.json"},
      {"extract-connection", "curved_x2.json"},
      {"equiv-apply", "flat2.json"},     {"equiv-construct", "flat2.json"},
      {"derivation-check", "flat2.json"},{"moment-map", "flat2.json"},
      {"cartan-check", "flat2.json"},    {"invariance-check", "flat2.json"},
      {"transport", "flat2.json"},
  };
  for (const auto& [command, config] : cases) {
    INFO(command);
    const std::filesystem::path out = temp_file("report");
    const RunResult r = run_cli(command + " --config \"" + config_path(config) + "\" --out \"" +
                                out.string() + "\"");
    CHECK(r.exit_code == 0);
    CHECK(r.out.empty());  // --out diverts the report away from stdout
    CHECK(slurp(out) ==
          slurp(std::filesystem::path(FEDOSOV_CONFIG_DIR) / "expected" / (command + ".json")));
    std::filesystem::remove(out);
  }
}

TEST_CASE("reports are deterministic and land on stdout by default") {
  const std::string args = "star --config \"" + config_path("flat2.json") + "\"";
  const RunResult first = run_cli(args);
  const RunResult second = run_cli(args);
  CHECK(first.exit_code == 0);
  CHECK(first.out == second.out);
  CHECK(first.out ==
        slurp(std::filesystem::path(FEDOSOV_CONFIG_DIR) / "expected" / "star.json"));
  CHECK(first.out.find("\"nu^1\": \"-1/2\"") != std::string::npos);
}

TEST_CASE("mathematical failures exit with code 1 and a failing report") {
  SECTION("moment-map on a non-symplectic field") {
    const auto cfg = write_temp_config("scaling", R"({
      "dimension": 2,
      "omega": [["0", "1"], ["-1", "0"]],
      "truncation": {"nu_order": 2},
      "symmetry": {"vector_field": ["x1", "0"]}
    })");
    const RunResult r = run_cli("moment-map --config \"" + cfg.string() + "\"");
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("\"lie_omega_zero\"") != std::string::npos);
    CHECK(r.out.find("\"pass\": false") != std::string::npos);
    std::filesystem::remove(cfg);
  }
  SECTION("invariance under a map with a wrong inverse surfaces the module error") {
    const auto cfg = write_temp_config("badinv", R"({
      "dimension": 2,
      "omega": [["0", "1"], ["-1", "0"]],
      "truncation": {"nu_order": 1},
      "invariance": {"map": ["x1 + 1", "x2"], "inverse": ["x1", "x2"]}
    })");
    const RunResult r = run_cli("invariance-check --config \"" + cfg.string() + "\"");
    CHECK(r.exit_code == 1);
    CHECK(r.out.find("map and inverse do not compose to the identity") != std::string::npos);
    std::filesystem::remove(cfg);
  }
}

TEST_CASE("input problems exit with code 2 and an error on stderr") {
  SECTION("validate on a good config exits 0") {
    const RunResult r = run_cli("validate --config \"" + config_path("flat2.json") + "\"");
    CHECK(r.exit_code == 0);
  }
  SECTION("unknown command") {
    const RunResult r = run_cli("frobnicate --config \"" + config_path("flat2.json") + "\"");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("unknown command") != std::string::npos);
  }
  SECTION("malformed JSON") {
    const auto cfg = write_temp_config("notjson", "{\"dimension\": 2,");
    const RunResult r = run_cli("validate --config \"" + cfg.string() + "\"");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("not valid JSON") != std::string::npos);
    std::filesystem::remove(cfg);
  }
  SECTION("a variable beyond the chart dimension names its position") {
    const auto cfg = write_temp_config("x3", R"({
      "dimension": 2,
      "omega": [["0", "x3"], ["-x3", "0"]],
      "truncation": {"nu_order": 1}
    })");
    const RunResult r = run_cli("validate --config \"" + cfg.string() + "\"");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("/omega/0/1") != std::string::npos);
    CHECK(r.err.find("x3") != std::string::npos);
    std::filesystem::remove(cfg);
  }
  SECTION("a non-closed symplectic form names the dOmega component") {
    const auto cfg = write_temp_config("notclosed", R"({
      "dimension": 4,
      "omega": [["0", "1", "x2", "0"], ["-1", "0", "0", "0"],
                 ["-x2", "0", "0", "1"], ["0", "0", "-1", "0"]],
      "lambda": [["0", "-1", "0", "0"], ["1", "0", "0", "0"],
                  ["0", "0", "0", "-1"], ["0", "0", "1", "0"]],
      "truncation": {"nu_order": 1}
    })");
    const RunResult r = run_cli("validate --config \"" + cfg.string() + "\"");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("omega_closed") != std::string::npos);
    CHECK(r.err.find("(d omega)") != std::string::npos);
    std::filesystem::remove(cfg);
  }
  SECTION("a command without its configuration block") {
    const auto cfg = write_temp_config("nostar", R"({
      "dimension": 2,
      "omega": [["0", "1"], ["-1", "0"]],
      "truncation": {"nu_order": 1}
    })");
    const RunResult r = run_cli("star --config \"" + cfg.string() + "\"");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("/star") != std::string::npos);
    std::filesystem::remove(cfg);
  }
  SECTION("missing --config") {
    const RunResult r = run_cli("validate");
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("custom coordinate names map onto the canonical grammar") {
  const auto cfg = write_temp_config("named", R"({
    "dimension": 2,
    "coordinates": ["q", "p"],
    "omega": [["0", "1"], ["-1", "0"]],
    "truncation": {"nu_order": 2},
    "star": {"u": "q", "v": "p"}
  })");
  const RunResult r = run_cli("star --config \"" + cfg.string() + "\"");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"nu^0\": \"x1*x2\"") != std::string::npos);
  CHECK(r.out.find("\"nu^1\": \"-1/2\"") != std::string::npos);
  std::filesystem::remove(cfg);
}
