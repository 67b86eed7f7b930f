#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "fsfmb/config.hpp"
#include "fsfmb/error.hpp"
#include "fsfmb/io.hpp"
#include "fsfmb/pipeline.hpp"
#include "fsfmb/report.hpp"
#include "synthetic.hpp"

using namespace fsfmb;
namespace fs = std::filesystem;

namespace {

const fs::path kData = FSFMB_TEST_DATA_DIR;

template <class Fn>
std::pair<ErrorCode, std::string> error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return {e.code(), e.what()};
  }
  return {ErrorCode::Io, "no error"};
}

RawPanel parse(const std::string& text, PanelKind kind = PanelKind::Factors, bool percent = false) {
  PanelFile f;
  f.kind = kind;
  f.percent_scale = percent;
  return parse_panel_csv(text, f, "mem.csv");
}

std::string monthly(int y0, int m0, int y1, int m1, const std::string& header, double value) {
  std::string out = header + "\n";
  for (int y = y0, m = m0; y < y1 || (y == y1 && m <= m1);) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", y, m);
    out += std::string(buf) + "," + std::to_string(value) + "\n";
    if (++m == 13) m = 1, ++y;
  }
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fsfmb-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("period parsing") {
  CHECK(Period::parse("1990-01") == Period{1990, 1});
  CHECK(Period::parse("2019-12-31") == Period{2019, 12});
  CHECK_FALSE(Period::parse("2019-13").has_value());
  CHECK_FALSE(Period::parse("199001").has_value());
  CHECK(Period{1973, 10}.to_string() == "1973-10");
}

TEST_CASE("csv lines with quotes") {
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split_csv_line("\"x,y\",\"he said \"\"hi\"\"\",z") ==
        std::vector<std::string>{"x,y", "he said \"hi\"", "z"});
}

TEST_CASE("panel csv parsing") {
  const RawPanel p = parse("\xEF\xBB\xBF" "date,a,b\n1990-01,1.5,NA\n1990-02,2,\n1990-03,-1e-3,NaN\n",
                           PanelKind::Returns, true);
  CHECK(p.columns == std::vector<std::string>{"a", "b"});
  CHECK(p.dates.size() == 3);
  CHECK(p.values(0, 0) == doctest::Approx(0.015));
  CHECK(std::isnan(p.values(0, 1)));
  CHECK(std::isnan(p.values(1, 1)));
  CHECK(std::isnan(p.values(2, 1)));

  auto [code, msg] = error_of([] { parse("date,a\n1990-01,abc\n"); });
  CHECK(code == ErrorCode::ParseError);
  CHECK(msg.find("mem.csv") != std::string::npos);
  CHECK(msg.find("row 2") != std::string::npos);
  CHECK(msg.find("column 2") != std::string::npos);

  CHECK(error_of([] { parse("date,a\n1990-02,1\n1990-01,2\n"); }).first == ErrorCode::NonMonotoneDates);
  CHECK(error_of([] { parse("date,a\n1990-01,1\n1990-01,2\n"); }).first == ErrorCode::NonMonotoneDates);
  CHECK(error_of([] { parse("date,a\nJan90,1\n"); }).first == ErrorCode::ParseError);
  CHECK(error_of([] { parse("when,a\n1990-01,1\n"); }).first == ErrorCode::ParseError);

  PanelFile pick;
  pick.value_columns = {"b"};
  const RawPanel only = parse_panel_csv("date,a,b\n1990-01,1,2\n", pick, "x");
  CHECK(only.columns == std::vector<std::string>{"b"});
  CHECK(only.values(0, 0) == 2.0);
}

TEST_CASE("missing files name the path") {
  PanelFile f;
  f.path = "/no/such/returns.csv";
  auto [code, msg] = error_of([&] { read_panel_csv(f); });
  CHECK(code == ErrorCode::Io);
  CHECK(is_io_error(code));
  CHECK(msg.find("/no/such/returns.csv") != std::string::npos);
  CHECK(error_of([] { load_config("/no/such/cfg.toml"); }).second.find("/no/such/cfg.toml") != std::string::npos);
}

TEST_CASE("inner join on identical ranges keeps everything") {
  const auto a = parse(monthly(1990, 1, 1991, 12, "date,x", 1.0));
  const auto b = parse(monthly(1990, 1, 1991, 12, "date,y", 2.0));
  const JoinedPanels j = inner_join({a, b});
  CHECK(j.dates.size() == 24);
  CHECK(j.warnings.empty());
  CHECK(j.panels[1].values.rows() == 24);
}

TEST_CASE("inner join starts at the later start date") {
  const auto a = parse(monthly(1973, 10, 2019, 12, "date,x", 1.0));
  const auto b = parse(monthly(1990, 1, 2019, 12, "date,y", 2.0));
  const JoinedPanels j = inner_join({a, b});
  CHECK(j.dates.front() == Period{1990, 1});
  CHECK(j.dates.back() == Period{2019, 12});
  CHECK(j.dates.size() == 360);
  CHECK(j.panels[0].values.rows() == 360);

  const auto c = parse(monthly(1960, 1, 1969, 12, "date,z", 0.0));
  CHECK(error_of([&] { inner_join({a, c}); }).first == ErrorCode::EmptyIntersection);
}

TEST_CASE("inner join drops a column with a blank in the window") {
  const auto a = parse("date,x,y\n1990-01,1,2\n1990-02,1,\n1990-03,1,2\n");
  const auto b = parse("date,z\n1990-01,5\n1990-02,5\n1990-03,5\n");
  const JoinedPanels j = inner_join({a, b});
  CHECK(j.panels[0].columns == std::vector<std::string>{"x"});
  REQUIRE(j.warnings.size() == 1);
  CHECK(j.warnings[0].find("'y'") != std::string::npos);

  // Outside the window a blank does not matter.
  const auto c = parse("date,x,y\n1989-12,1,\n1990-01,1,2\n1990-02,1,2\n");
  const auto d = parse("date,z\n1990-01,5\n1990-02,5\n");
  CHECK(inner_join({c, d}).panels[0].columns.size() == 2);
  CHECK(to_factor_panel(inner_join({c, d}).panels[0]).names == std::vector<std::string>{"x", "y"});
}

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_config(R"(
[data]
returns = { path = "r.csv", percent_scale = true }
factors = "sub/f.csv"

[model]
base_factors = ["a", "b"]
degree = 3
mode = "powers"
objective = "r2"
intercept = false

[stop]
rule = "fixed_count"
count = 4

[hac]
lag = 3

[run]
seed = 11
threads = 2
output = "out"
)",
                                     "/base");
  CHECK(cfg.data.returns->path == "/base/r.csv");
  CHECK(cfg.data.returns->percent_scale);
  CHECK(cfg.data.factors->path == "/base/sub/f.csv");
  CHECK(cfg.base_factors == std::vector<std::string>{"a", "b"});
  CHECK(cfg.expansion.max_degree == 3);
  CHECK(cfg.expansion.kind == ExpansionKind::PowersOnly);
  CHECK(cfg.objective == Objective::R2);
  CHECK_FALSE(cfg.with_intercept);
  CHECK(cfg.stop.kind == StopRule::Kind::FixedCount);
  CHECK(cfg.stop.count == 4);
  CHECK(cfg.hac.lag == 3);
  CHECK_FALSE(cfg.hac.automatic);
  CHECK(cfg.seed == 11);
  CHECK(cfg.threads == 2);
  CHECK(cfg.output == "/base/out");
  CHECK_NOTHROW(validate(cfg, "select"));
}

TEST_CASE("config errors") {
  CHECK(error_of([] { parse_config("[model]\nbogus = 1\n"); }).first == ErrorCode::Config);
  CHECK(error_of([] { parse_config("[model]\ndegree = \"three\"\n"); }).first == ErrorCode::Config);
  CHECK(error_of([] { parse_config("[nope]\n"); }).first == ErrorCode::Config);
  CHECK(error_of([] { parse_config("not toml ==="); }).first == ErrorCode::Config);
  RunConfig c;
  CHECK(error_of([&] { validate(c, "select"); }).first == ErrorCode::Config);
  CHECK_NOTHROW(validate(c, "expand"));
  c.expansion.max_degree = 7;
  CHECK(error_of([&] { validate(c, "expand"); }).first == ErrorCode::Config);
}

TEST_CASE("report json round-trips byte for byte") {
  SelectionResult r;
  r.base_set = {0, 1};
  r.base_r2 = 0.1;
  r.base_adj_r2 = -0.0;
  r.steps.push_back({4, 0.5, std::numeric_limits<double>::quiet_NaN(), 0.25, std::numeric_limits<double>::infinity()});
  r.steps.push_back({2, 1.0 / 3.0, -std::numeric_limits<double>::infinity(), std::nullopt, std::nullopt});
  r.final_set = {0, 1, 4, 2};
  const std::string a = dump(to_json(r));
  const SelectionResult back = from_json<SelectionResult>(Json::parse(a));
  CHECK(dump(to_json(back)) == a);
  CHECK(back.steps[0].alpha_t == std::numeric_limits<double>::infinity());
  CHECK(std::isnan(back.steps[0].adj_r2));
  CHECK(std::signbit(back.base_adj_r2));
  CHECK(back.steps[1].r2 == 1.0 / 3.0);

  CHECK(num_from(num(0.1)) == 0.1);
  CHECK(num(std::numeric_limits<double>::quiet_NaN()) == "NaN");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-Inf");
}

TEST_CASE("tables quote where needed") {
  Table t{{"name", "value"}, {{"a,b", "1"}, {"say \"x\"", "2"}}};
  CHECK(t.to_csv() == "name,value\n\"a,b\",1\n\"say \"\"x\"\"\",2\n");
  const Table h = histogram({-10.0, 0.1, 0.2, 0.6, 10.0}, 0.0, 1.0, 0.5);
  CHECK(h.rows.size() == 4);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path dir = scratch("sha");
  write_text(dir / "a" / "b.txt", "abc");
  CHECK(sha256_file(dir / "a" / "b.txt") == sha256_hex("abc"));
  CHECK(error_of([&] { sha256_file(dir / "missing"); }).first == ErrorCode::Io);
}

TEST_CASE("expand stage") {
  const StageResult s = run_expand(generic_base_names(6), {ExpansionKind::Full, 3});
  CHECK(s.lines.size() == 57);
  CHECK(s.result["counts"]["total_with_base"] == 63);
  CHECK(generic_base_names(28)[26] == "AA");
}

TEST_CASE("pipeline output is reproducible and thread independent") {
  RunConfig cfg = load_config(kData / "fixture.toml");
  cfg.oos_reps = 4;
  cfg.sim_count = 3;
  for (const std::string cmd : {"select", "oos", "simulate"}) {
    const StageResult a = run_stage(cmd, cfg);
    const StageResult b = run_stage(cmd, cfg);
    RunConfig two = cfg;
    two.threads = 2;
    const StageResult c = run_stage(cmd, two);
    CHECK(dump(report_document(a, cfg)) == dump(report_document(b, cfg)));
    CHECK(dump(a.result) == dump(c.result));
    CHECK(a.table.to_csv() == c.table.to_csv());
  }

  const fs::path dir = scratch("artifacts");
  const StageResult s = run_stage("select", cfg);
  const auto written = write_artifacts(s, cfg, dir);
  CHECK(written.size() == 4);
  for (const auto* name : {"select.json", "select.csv", "select_plot.csv", "manifest.json"}) {
    CHECK(fs::exists(dir / name));
  }
  std::ifstream in(dir / "manifest.json");
  const Json manifest = Json::parse(in);
  CHECK(manifest.contains("created_utc"));
  CHECK(manifest["outputs"].size() == 3);
  std::ifstream rep(dir / "select.json");
  const std::string text((std::istreambuf_iterator<char>(rep)), std::istreambuf_iterator<char>());
  CHECK(text.find("created_utc") == std::string::npos);
}
