#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hgl/config.hpp"
#include "hgl/field_io.hpp"
#include "hgl/pipeline.hpp"
#include "hgl/solver.hpp"

using namespace hgl;

namespace {

std::string minimal_config() {
  return "n = 1\n"
         "omega = 1 0\n"
         "potential.kind = quartic\n";
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("minimal config fills the documented defaults") {
  RunConfig cfg = parse_config(minimal_config());
  CHECK(cfg.n == 1);
  CHECK(cfg.cell_delta == 0.1);
  CHECK(cfg.cell_M == 10.0);
  CHECK(cfg.cell_p == 1);
  CHECK(cfg.theta == 0.9);
  CHECK(cfg.theta0 == 0.9);
  CHECK(cfg.mode == RunMode::solve);
  CHECK(cfg.omega_is_rational);
  CHECK(cfg.potential.kind == PotentialKind::quartic);
}

TEST_CASE("malformed configs are rejected with line numbers") {
  auto expect_fail = [](const std::string& text, const std::string& needle) {
    try {
      parse_config(text);
      FAIL("expected rejection for: " << text);
    } catch (const std::exception& e) {
      const std::string msg = e.what();
      INFO(msg);
      CHECK(msg.find(needle) != std::string::npos);
    }
  };

  expect_fail(minimal_config() + "cell.delta = 0.7\n", "delta must lie in (0, 1/2)");
  expect_fail(minimal_config() + "unknown.key = 3\n", "unknown key");
  expect_fail(minimal_config() + "cell.M = 10\ncell.M = 11\n", "duplicate key");
  expect_fail(minimal_config() + "cell.L = abc\n", "malformed number");
  expect_fail("omega = 1 0\npotential.kind = quartic\n", "missing required key 'n'");
  expect_fail("n = 1\npotential.kind = quartic\n", "missing required key 'omega'");
  expect_fail(minimal_config() + "solver.tol = -1\n", "tol must be positive");
  expect_fail(minimal_config() + "grid.resolutions = 8 8\n", "grid.resolutions needs 3");
  expect_fail("n = 1\nomega = 0 0\npotential.kind = quartic\n", "nonzero");
  expect_fail("n = 1\nomega = 1.5 0\npotential.kind = quartic\n", "sequence mode");
  expect_fail(minimal_config() + "mode = dance\n", "mode must be one of");

  // Duplicate detection reports both lines.
  try {
    parse_config("n = 1\nn = 2\nomega = 1 0\npotential.kind = quartic\n");
    FAIL("expected duplicate rejection");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("line 1") != std::string::npos);
  }
}

TEST_CASE("rational omega entries") {
  RunConfig cfg = parse_config("n = 1\nomega = 1/2 1/3\npotential.kind = quartic\n");
  CHECK(cfg.omega[0] == Rational(1, 2));
  CHECK(cfg.omega[1] == Rational(1, 3));

  RunConfig seq = parse_config(
      "n = 1\nomega = 1 0.618034\npotential.kind = quartic\nmode = sequence\n");
  CHECK_FALSE(seq.omega_is_rational);
  CHECK(seq.omega_real[1] == doctest::Approx(0.618034));
}

TEST_CASE("field dump round-trips bitwise") {
  CellSpec cell;
  cell.base = build_integer_base(RationalVector{Rational(1), Rational(1)});
  cell.p = 1;
  cell.M = 10;
  cell.L = 11.3;
  cell.delta = 0.1;
  auto grid = make_grid(cell, GridResolution{{8}, 64, 8});
  Field f = init_ramp(grid);
  for (std::int64_t i = 0; i < grid->size(); ++i)
    f.values[i] += 1e-17 * static_cast<double>(i % 97);

  const std::string path = tmp_path("roundtrip.hgpf");
  dump_field(f, path);
  Field g = load_field(path);
  REQUIRE(g.values.size() == f.values.size());
  for (std::int64_t i = 0; i < f.values.size(); ++i) {
    // Bitwise equality, not approximate.
    CHECK(std::memcmp(&g.values[i], &f.values[i], sizeof(double)) == 0);
  }

  Field h = load_field(path, grid);
  CHECK((h.values - f.values).abs().maxCoeff() == 0.0);

  // Mismatched grids are rejected.
  CellSpec other = cell;
  other.M = 10.5;
  auto grid2 = make_grid(other, GridResolution{{8}, 64, 8});
  CHECK_THROWS(load_field(path, grid2));

  // Truncated payloads are detected.
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 16);
  CHECK_THROWS(load_field(path));

  // Bad magic is detected.
  const std::string bad = tmp_path("bad.hgpf");
  std::ofstream(bad, std::ios::binary) << "NOPE!\nx = 1\n\n";
  CHECK_THROWS(load_field(bad));
}

TEST_CASE("pipeline writes deterministic outputs") {
  const std::string cfg_text =
      "n = 1\n"
      "omega = 1 0\n"
      "potential.kind = quartic\n"
      "cell.M = 10\n"
      "cell.L = 16\n"
      "grid.resolutions = 8 64 8\n"
      "solver.tol = 1e-4\n"
      "solver.max_iters = 4000\n"
      "mode = solve\n";
  RunConfig cfg = parse_config(cfg_text);

  auto run_once = [&](const std::string& dir) {
    PipelineOptions opt;
    opt.out_dir = dir;
    opt.deterministic = true;
    std::ostringstream log;
    const int rc = run_pipeline(cfg, opt, log);
    CHECK(rc == 0);
    std::ifstream is(dir + "/trace.csv", std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
  };

  const std::string a = run_once(tmp_path("hgl_run_a"));
  const std::string b = run_once(tmp_path("hgl_run_b"));
  CHECK(!a.empty());
  CHECK(a == b);
}
