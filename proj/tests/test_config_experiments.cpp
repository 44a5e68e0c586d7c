#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "raceway/config.hpp"
#include "raceway/errors.hpp"
#include "raceway/experiments.hpp"

using namespace raceway;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI and captures standard output; standard error is discarded.
Run cli(const std::string& args) {
  const std::string cmd = std::string(RACEWAY_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream l(line);
    std::string cell;
    while (std::getline(l, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("grid parsing") {
  CHECK(parse_grid("1000") == std::vector<double>{1000});
  CHECK(parse_grid("1,500,1000") == std::vector<double>{1, 500, 1000});
  const auto lin = parse_grid("lin:0:2500:26");
  REQUIRE(lin.size() == 26);
  CHECK(lin.front() == 0.0);
  CHECK(lin[1] == doctest::Approx(100.0));
  CHECK(lin.back() == 2500.0);
  const auto lg = parse_grid("log:0.001:0.1:41");
  REQUIRE(lg.size() == 41);
  CHECK(lg.front() == 0.001);
  CHECK(lg[20] == doctest::Approx(0.01));
  CHECK(lg.back() == 0.1);
  CHECK(parse_grid("lin:3:3:1") == std::vector<double>{3});
  CHECK_THROWS_AS(parse_grid(""), InvalidInput);
  CHECK_THROWS_AS(parse_grid("lin:0:1"), InvalidInput);
  CHECK_THROWS_AS(parse_grid("log:0:1:5"), InvalidInput);
  CHECK_THROWS_AS(parse_grid("1,,2"), InvalidInput);
  CHECK_THROWS_AS(parse_grid("abc"), InvalidInput);
}

TEST_CASE("config text") {
  SUBCASE("round trip") {
    auto c = ExperimentConfig::defaults(Mode::sweep);
    c.set("k_d", "0.0003");
    c.set("perm", "2 1 3");
    c.set("out", "x.csv");
    c.set("T", "log:1:1000:7");
    ExperimentConfig back;
    back.apply_text(c.serialize());
    CHECK(back == c);
  }
  SUBCASE("defaults per mode") {
    const auto s = ExperimentConfig::defaults(Mode::sweep);
    CHECK(s.layers == 7);
    CHECK(s.surface_intensity.size() == 26);
    CHECK(s.bottom_fraction.size() == 41);
    CHECK(s.lap_time == std::vector<double>{1, 500, 1000});
    const auto r = ExperimentConfig::defaults(Mode::ratios);
    CHECK(r.bottom_fraction == std::vector<double>{0.001});
    CHECK(r.lap_time.size() == 20);
    const auto o = ExperimentConfig::defaults(Mode::optimize);
    CHECK(o.layers == 11);
    CHECK(o.grid_points() == 1);
  }
  SUBCASE("comments and blank lines") {
    ExperimentConfig c;
    c.apply_text("# device\n\nN = 5\nq=0.01\n");
    CHECK(c.layers == 5);
    CHECK(c.bottom_fraction == std::vector<double>{0.01});
  }
  SUBCASE("rejections") {
    ExperimentConfig c;
    CHECK_THROWS_AS(c.set("colour", "red"), InvalidInput);
    CHECK_THROWS_AS(c.set("N", "seven"), InvalidInput);
    CHECK_THROWS_AS(c.apply_text("N7\n"), InvalidInput);
    CHECK_THROWS_AS(parse_mode("fit"), InvalidInput);
    for (const auto& [k, v] : std::vector<std::pair<const char*, const char*>>{
             {"q", "0"}, {"q", "1.5"}, {"T", "0"}, {"Is", "-1"}, {"N", "0"},
             {"h", "0"}, {"k_r", "-1"}, {"workers", "0"}}) {
      ExperimentConfig bad;
      bad.set(k, v);
      CHECK_THROWS_AS(bad.validate(), InvalidInput);
    }
  }
}

TEST_CASE("budget") {
  auto c = ExperimentConfig::defaults(Mode::sweep);
  CHECK(estimated_evaluations(c) == 5040ULL * 26 * 41 * 3);
  c.budget = 1000;
  CHECK_THROWS_AS(require_budget(c), LimitExceeded);
  c.layers = 13;
  CHECK_THROWS_AS(require_budget(c), LimitExceeded);
}

TEST_CASE("limiting regimes") {
  auto c = ExperimentConfig::defaults(Mode::optimize);
  c.layers = 5;

  SUBCASE("uniform light makes every strategy equal") {
    const auto p = evaluate_point(c, 1500.0, 1.0, 100.0, SearchOptions{});
    CHECK(p.report.ties_best == 120);
    CHECK(p.report.best.is_identity());
    CHECK(p.report.mu_best == doctest::Approx(p.report.mu_identity).epsilon(1e-14));
    CHECK(p.report.mu_worst == doctest::Approx(p.report.mu_identity).epsilon(1e-14));
  }
  SUBCASE("darkness: growth is -R and ratios vanish") {
    const auto p = evaluate_point(c, 0.0, 0.1, 100.0, SearchOptions{});
    CHECK(p.report.mu_best == doctest::Approx(-c.params.R).epsilon(1e-14));
    CHECK(p.ratios.r1 == 0.0);
    CHECK(p.ratios.r2 == 0.0);
    CHECK(p.ratios.r3 == 0.0);
    CHECK(p.ratios.negative_denominator);
  }
  SUBCASE("one layer") {
    c.layers = 1;
    const auto p = evaluate_point(c, 2000.0, 0.1, 10.0, SearchOptions{});
    CHECK(p.report.best.is_identity());
    CHECK(p.ratios.r1 == 0.0);
  }
}

TEST_CASE("grid evaluation order and worker independence") {
  auto c = ExperimentConfig::defaults(Mode::sweep);
  c.layers = 5;
  c.surface_intensity = {500, 2000};
  c.bottom_fraction = {0.01, 0.1};
  c.lap_time = {1, 100};
  const auto serial = evaluate_grid(c);
  REQUIRE(serial.size() == 8);
  CHECK(serial[0].lap_time == 1);
  CHECK(serial[0].bottom_fraction == 0.01);
  CHECK(serial[0].surface_intensity == 500);
  CHECK(serial[1].surface_intensity == 2000);
  CHECK(serial[2].bottom_fraction == 0.1);
  CHECK(serial[4].lap_time == 100);

  c.workers = 3;
  const auto parallel = evaluate_grid(c);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].report.to_text() == parallel[i].report.to_text());
  }
}

TEST_CASE("ratios and optimize agree") {
  auto c = ExperimentConfig::defaults(Mode::ratios);
  c.layers = 6;
  c.surface_intensity = {2000};
  c.lap_time = {10};
  std::ostringstream ratios_out, optimize_out, diag;
  cmd_ratios(c, ratios_out, diag);
  c.mode = Mode::optimize;
  cmd_optimize(c, optimize_out, diag);

  const auto rows = csv(ratios_out.str());
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"T", "I_s", "q", "r1", "r2", "r3"});
  const std::string text = optimize_out.str();
  CHECK(text.find("r1=" + rows[1][3] + "\n") != std::string::npos);
  CHECK(text.find("r2=" + rows[1][4] + "\n") != std::string::npos);
  CHECK(text.find("r3=" + rows[1][5] + "\n") != std::string::npos);
}

TEST_CASE("simulate converges to the fixed point") {
  auto c = ExperimentConfig::defaults(Mode::simulate);
  c.layers = 4;
  c.perm = "2 3 4 1";
  c.lap_time = {100};
  c.bottom_fraction = {0.01};
  c.laps = 300;
  std::ostringstream out, diag;
  cmd_simulate(c, out, diag);
  const auto rows = csv(out.str());
  REQUIRE(rows.size() == 302);
  CHECK(rows[0].front() == "k");
  CHECK(rows[0].back() == "err_inf");
  CHECK(rows[1][1] == "0");
  CHECK(std::stod(rows.back().back()) < 1e-12);
  CHECK(diag.str().find("permutation order: 4") != std::string::npos);

  c.start = "fixed";
  std::ostringstream out2;
  cmd_simulate(c, out2, diag);
  for (const auto& row : csv(out2.str())) {
    if (row.front() == "k") continue;
    CHECK(std::stod(row.back()) < 1e-14);
  }

  c.perm = "2 1 3";
  CHECK_THROWS_AS(cmd_simulate(c, out, diag), InvalidInput);
  c.perm = "";
  c.start = "0.1,0.2";
  CHECK_THROWS_AS(cmd_simulate(c, out, diag), InvalidInput);
}

TEST_CASE("command line") {
  SUBCASE("optimize prints matrices and flags") {
    const auto r = cli("optimize --N 4 --q 0.01 --T 100");
    CHECK(r.status == 0);
    CHECK(r.out.find("P_max: ") != std::string::npos);
    CHECK(r.out.find("P_min: ") != std::string::npos);
    CHECK(r.out.find("P_max_approx: ") != std::string::npos);
    CHECK(r.out.find("best_is_identity=") != std::string::npos);
    CHECK(r.out.find("evaluated=24\n") != std::string::npos);
  }
  SUBCASE("sweep CSV is stable across runs and worker counts") {
    const std::string args = "sweep --N 4 --Is 500,2000 --q log:0.001:0.1:3 --T 1,1000";
    const auto a = cli(args);
    const auto b = cli(args + " --workers 3");
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    const auto rows = csv(a.out);
    REQUIRE(rows.size() == 13);
    CHECK(rows[0].size() == 9);
  }
  SUBCASE("params file with flag override") {
    const auto dir = std::filesystem::temp_directory_path() / "raceway_cli_test";
    std::filesystem::create_directories(dir);
    const auto file = dir / "p.txt";
    std::ofstream(file) << "N=3\nq=0.5\nT=10\nIs=100\n";
    const auto out = dir / "out.txt";
    const auto r = cli("optimize --params-file " + file.string() + " --N 5 --out " +
                       out.string());
    CHECK(r.status == 0);
    CHECK(r.out.empty());
    std::ifstream in(out);
    std::stringstream s;
    s << in.rdbuf();
    CHECK(s.str().find("N=5\n") != std::string::npos);
    CHECK(s.str().find("q=0.5\n") != std::string::npos);
    std::filesystem::remove_all(dir);
  }
  SUBCASE("exit codes") {
    CHECK(cli("optimize --q 0").status == 1);
    CHECK(cli("optimize --N 3 --perm x --Is lin:0:1").status == 1);
    CHECK(cli("simulate --N 3 --perm \"1 1 2\"").status == 1);
    CHECK(cli("optimize --N 13").status == 2);
    CHECK(cli("sweep --budget 10").status == 2);
    CHECK(cli("optimize --N 3 --q 0.1,0.2").status == 1);
  }
}
