#include "doctest.h"

#include "lieop/cli.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lieop::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run_args(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return std::string(LIEOP_SOURCE_DIR) + "/configs/" + name; }

std::string temp_config(const std::string& name, const std::string& text) {
  auto p = fs::temp_directory_path() / ("lieop_test_" + name + ".cfg");
  std::ofstream(p) << text;
  return p.string();
}

std::string last_line(const std::string& s) {
  auto t = s.substr(0, s.find_last_not_of('\n') + 1);
  return t.substr(t.find_last_of('\n') + 1);
}

}  // namespace

TEST_CASE("config parser") {
  auto c = parse_config("# top\n[group]\nfamily = abelian  # trailing\nn = 2\n\n[check]\nseed=7\n");
  REQUIRE(c.section("group"));
  CHECK(c.section("group")->find("family")->value == "abelian");
  CHECK(c.section("group")->find("n")->line == 4);
  CHECK(c.section("check")->find("seed")->value_column == 6);
  try {
    parse_config("[a]\nx = 1\n  y 2\n");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(parse_config("x = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[a]\nx = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[a]\n[a]\n"), ConfigError);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("canonical configs pass") {
  const std::vector<std::pair<std::vector<std::string>, std::string>> runs = {
      {{"group", "check"}, "group_check.cfg"},         {{"hormander"}, "hormander.cfg"},
      {{"operator", "check"}, "operator_check.cfg"},   {{"kolmogorov", "check"}, "kolmogorov_check.cfg"},
      {{"apply"}, "apply.cfg"},                        {{"psi"}, "psi.cfg"},
      {{"represent", "verify"}, "represent_verify.cfg"}, {{"lp", "scan"}, "lp_scan.cfg"},
  };
  for (const auto& [cmd, file] : runs) {
    auto args = cmd;
    args.insert(args.end(), {"--config", config(file)});
    auto r = run_args(args);
    CAPTURE(file);
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(last_line(r.out) == "verdict: pass");
  }
}

TEST_CASE("documented command examples") {
  auto demo = run_args({"demo", "heat_counterexample"});
  CHECK(demo.code == 0);
  CHECK(demo.out.find("harmonic: true") != std::string::npos);
  CHECK(last_line(demo.out) == "verdict: consistent");

  auto k = run_args({"kolmogorov", "check", "--config", config("kolmogorov_check.cfg"), "--format", "json"});
  CHECK(k.code == 0);
  auto kj = nlohmann::json::parse(k.out);
  CHECK(kj["checks"][0]["results"]["criterion"] == "pass");

  auto g = run_args({"group", "check", "--config", config("group_check.cfg")});
  CHECK(g.out.find("density: exp(-1*t)") != std::string::npos);
  CHECK(g.out.find("unimodular: false") != std::string::npos);

  auto a = run_args({"apply", "--config", config("apply.cfg")});
  CHECK(a.out.find("Lu: -x1*x2") != std::string::npos);
}

TEST_CASE("failed verdicts exit 1") {
  // A = diag(1, 0) with B = 0 never reaches x2
  auto p = temp_config("degenerate", "[kolmogorov]\nA = [[1, 0], [0, 0]]\nB = [[0, 0], [0, 0]]\n");
  auto r = run_args({"kolmogorov", "check", "--config", p});
  CHECK(r.code == 1);
  CHECK(last_line(r.out) == "verdict: fail");
  auto h = temp_config("rank", "[group]\nfamily = abelian\nn = 3\n[hormander]\nfields = d_x1, d_x2\n");
  CHECK(run_args({"hormander", "--config", h}).code == 1);
}

TEST_CASE("config errors exit 2 with a position") {
  auto check = [](const std::string& text, const std::vector<std::string>& cmd, const std::string& where) {
    auto p = temp_config("err", text);
    auto args = cmd;
    args.insert(args.end(), {"--config", p});
    auto r = run_args(args);
    CAPTURE(text);
    CHECK(r.code == 2);
    CHECK(r.err.find(where) != std::string::npos);
  };
  check("[group]\nfamily = abelian\nn = 2\ncolour = red\n", {"group", "check"}, "config:4:1:");
  check("[group]\nfamily = matrix_exponential\nB = [[1, 0], [0]]\n", {"group", "check"}, "config:3:5:");
  check("[group]\nfamily = banana\n", {"group", "check"}, "config:2:10:");
  check("[group]\nfamily = abelian\nn = 2\n[hormander]\nfields = d_x1, X_zz\n", {"hormander"}, "config:5:16:");
  check("[operator]\nform = heat\nn = 1\n[functions]\nu = x1 + * t\n", {"apply"}, "config:5:10:");
  check("[group]\nfamily = abelian\nn = 2\n[oops]\n", {"group", "check"}, "config:4:1:");
  check("[kolmogorov]\nA = [[1, 0], [0, -1]]\nB = [[0, 0], [1, 0]]\n", {"kolmogorov", "check"}, "config:2:5:");
  CHECK(run_args({"group", "check"}).code == 2);
  CHECK(run_args({"frobnicate"}).code == 2);
  CHECK(run_args({"demo", "nope"}).code == 2);
  CHECK(run_args({"demo", "heat_counterexample", "--format", "xml"}).code == 2);
  CHECK(run_args({"group", "check", "--config", "/nonexistent/x.cfg"}).code == 2);
}

TEST_CASE("json report shape and determinism") {
  std::vector<std::string> args{"operator", "check", "--config", config("operator_check.cfg"), "--format", "json"};
  auto a = run_args(args);
  auto b = run_args(args);
  CHECK(a.out == b.out);
  auto j = nlohmann::json::parse(a.out);
  CHECK(j["schema"] == kSchema);
  CHECK(j["toolkit_version"] == kVersion);
  CHECK(j["config_hash"].get<std::string>().rfind("fnv1a64:", 0) == 0);
  CHECK(j["seed"] == 20140907);
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("inputs_digest"));
    CHECK(c.contains("method"));
    CHECK(c.contains("tolerances"));
    CHECK(c.contains("results"));
    CHECK(c["verdict"] == "pass");
  }
  CHECK(j["verdict"] == "pass");

  auto s = run_args({"operator", "check", "--config", config("operator_check.cfg"), "--format", "json", "--seed", "5"});
  CHECK(nlohmann::json::parse(s.out)["seed"] == 5);

  auto out = (fs::temp_directory_path() / "lieop_test_out.json").string();
  std::vector<std::string> with_out = args;
  with_out.insert(with_out.end(), {"--out", out});
  auto w = run_args(with_out);
  CHECK(w.code == 0);
  CHECK(w.out.empty());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == a.out);
}

TEST_CASE("flags reach the commands") {
  auto r = run_args({"lp", "scan", "--config", config("lp_scan.cfg"), "--radii", "1,2", "--format", "json"});
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["checks"][0]["results"]["radii"].size() == 2);
  auto h = run_args({"hormander", "--config", config("hormander.cfg"), "--max-depth", "0"});
  CHECK(h.code == 1);
  CHECK(h.out.find("failed up to depth 0") != std::string::npos);
}
