#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kData = FSFMB_TEST_DATA_DIR;
const fs::path kGolden = FSFMB_GOLDEN_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fsfmb-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run fsfmb(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + FSFMB_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

double as_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "NaN") return std::nan("");
  return s == "Infinity" ? INFINITY : -INFINITY;
}

bool numeric_like(const Json& j) {
  if (j.is_number()) return true;
  if (!j.is_string()) return false;
  const auto s = j.get<std::string>();
  return s == "NaN" || s == "Infinity" || s == "-Infinity";
}

// Same structure, same strings, numbers equal to a relative 1e-9.
void compare(const Json& got, const Json& want, const std::string& path) {
  INFO("at ", path);
  if (numeric_like(got) && numeric_like(want) && !(got.is_string() && want.is_string())) {
    const double a = as_number(got), b = as_number(want);
    if (std::isnan(b)) {
      CHECK(std::isnan(a));
    } else if (std::isinf(b)) {
      CHECK(a == b);
    } else {
      CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)));
    }
    return;
  }
  REQUIRE(got.type() == want.type());
  if (got.is_object()) {
    REQUIRE(got.size() == want.size());
    for (auto it = want.begin(); it != want.end(); ++it) {
      REQUIRE(got.contains(it.key()));
      compare(got[it.key()], it.value(), path + "." + it.key());
    }
  } else if (got.is_array()) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) compare(got[i], want[i], path + "[" + std::to_string(i) + "]");
  } else {
    CHECK(got == want);
  }
}

}  // namespace

TEST_CASE("expand prints one label per term") {
  const fs::path dir = scratch("expand");
  const Run r = fsfmb("expand --base 6 --degree 3", dir);
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 57);
  CHECK(r.out.rfind("A2\n", 0) == 0);
  CHECK_FALSE(fs::exists(dir / "fsfmb-out"));

  const Run named = fsfmb("expand --base Mkt-RF,SMB --degree 2", dir);
  CHECK(named.out == "Mkt-RF2\nSMB2\nMkt-RF*SMB\n");
}

TEST_CASE("select matches the golden result") {
  const fs::path dir = scratch("golden");
  const Run r = fsfmb("select --config \"" + (kData / "fixture.toml").string() + "\" --output \"" +
                          (dir / "out").string() + "\"",
                      dir);
  REQUIRE(r.code == 0);
  const Json report = Json::parse(slurp(dir / "out" / "select.json"));
  CHECK(report["command"] == "select");
  CHECK_FALSE(report.contains("created_utc"));
  const Json golden = Json::parse(slurp(kGolden / "select.json"));
  compare(report["result"], golden, "result");

  const Json manifest = Json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest.contains("created_utc"));
  CHECK(manifest["command"] == "select");
  CHECK(manifest["inputs"].size() >= 2);
  CHECK(fs::exists(dir / "out" / "select.csv"));
  CHECK(fs::exists(dir / "out" / "select_plot.csv"));
}

TEST_CASE("missing input file exits 2 and names the path") {
  const fs::path dir = scratch("missing");
  std::ofstream(dir / "cfg.toml") << "[data]\nreturns = \"nowhere/returns.csv\"\nfactors = \"nowhere/factors.csv\"\n";
  const Run r = fsfmb("select --config \"" + (dir / "cfg.toml").string() + "\"", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("nowhere/returns.csv") != std::string::npos);

  const Run c = fsfmb("select --config /definitely/not/here.toml", dir);
  CHECK(c.code == 2);
  CHECK(c.err.find("/definitely/not/here.toml") != std::string::npos);
}

TEST_CASE("usage and configuration errors exit 2") {
  const fs::path dir = scratch("usage");
  CHECK(fsfmb("", dir).code == 2);
  CHECK(fsfmb("frobnicate", dir).code == 2);
  CHECK(fsfmb("expand --base 3 --hac-lag 2 --hac-auto", dir).code == 2);
  CHECK(fsfmb("expand --base 3 --degree 9", dir).code == 2);
  const std::string cfg = "--config \"" + (kData / "fixture.toml").string() + "\"";
  CHECK(fsfmb("select " + cfg + " --stop-eps 0.1 --stop-count 2", dir).code == 2);
}

TEST_CASE("computation errors exit 1") {
  const fs::path dir = scratch("budget");
  const Run r = fsfmb("select --config \"" + (kData / "fixture.toml").string() + "\" --stop-count 400 --output \"" +
                          (dir / "out").string() + "\"",
                      dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("BudgetExceedsRank") != std::string::npos);
}
