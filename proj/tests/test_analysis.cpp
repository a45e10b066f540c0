#include <doctest.h>

#include <cmath>

#include "hgl/analysis.hpp"
#include "hgl/solver.hpp"

using namespace hgl;

namespace {

CellSpec cell1(std::initializer_list<Rational> omega, int p = 1, double M = 10,
               double L = 16.0) {
  CellSpec c;
  c.base = build_integer_base(RationalVector(omega));
  c.p = p;
  c.M = M;
  c.L = L;
  c.delta = 0.1;
  return c;
}

PotentialSpec quartic(double mean = 1.0, double amp = 0.0) {
  PotentialSpec s;
  s.kind = PotentialKind::quartic;
  s.d = 2.0;
  s.modulation.mean = mean;
  s.modulation.amplitude = amp;
  s.modulation.frequency = Eigen::VectorXi::Ones(2);
  return s;
}

Field of_a(const std::shared_ptr<const Grid>& grid,
           const std::function<double(double)>& f) {
  Field out(grid);
  for (std::int64_t i = 0; i < grid->size(); ++i) out.values[i] = f(grid->node_a(i));
  return out;
}

}  // namespace

TEST_CASE("level sets and slab width") {
  auto grid = make_grid(cell1({1, 0}), GridResolution{{8}, 256, 8});
  Field one(grid);
  one.values.setConstant(1.0);
  CHECK(level_set(one, 0.9).empty());
  CHECK(slab_width(one, 0.9, 8.0).width == 0.0);

  Field ramp = init_ramp(grid);
  for (std::int64_t node : level_set(ramp, 0.5))
    CHECK(std::abs(grid->node_a(node)) <= 0.125 + 1e-12);

  SlabReport rep = slab_width(ramp, 0.9, 1.0);
  CHECK(rep.width == doctest::Approx(0.225).epsilon(0.1));
  CHECK(rep.pass);

  // Nondecreasing width in theta.
  CHECK(slab_width(ramp, 0.5, 8).width <= slab_width(ramp, 0.9, 8).width + 1e-15);

  Field het = of_a(grid, [](double a) { return std::tanh(a); });
  const double th = std::tanh(1.0);
  double amax = 0;
  for (std::int64_t node : level_set(het, th))
    amax = std::max(amax, std::abs(grid->node_a(node)));
  CHECK(amax <= 1.0 + 1e-9);
  CHECK(amax >= 1.0 - grid->da() - 1e-9);
}

TEST_CASE("density profile on synthetic fields") {
  auto grid = make_grid(cell1({1, 0}), GridResolution{{16}, 128, 16});
  PotentialSpec spec = quartic();

  // Pure phase: zero energies, one-sided volumes matching ball volumes.
  Field one(grid);
  one.values.setConstant(1.0);
  GroupPoint center = grid->node_point(grid->flat({8}, 64, 8));
  std::vector<double> radii{2.0, 2.83, 4.0, 5.66, 8.0};
  DensityReport rep = density_profile(one, spec, center, radii, 0.5, 0.9, true);
  const double pi2 = 9.869604401089358;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    CHECK(rep.ball_energies[i] == 0.0);
    CHECK(rep.band_volumes[i] == 0.0);
    const double exact = 0.5 * pi2 * std::pow(radii[i], 4);
    CHECK(rep.suplevel_volumes[i] == doctest::Approx(exact).epsilon(0.03));
    CHECK(rep.sublevel_volumes[i] == 0.0);
  }
  CHECK(rep.fit_sup.valid);
  CHECK(rep.fit_sup.slope == doctest::Approx(4.0).epsilon(0.05));

  // Volumes are nondecreasing in r by nesting.
  for (std::size_t i = 1; i < radii.size(); ++i)
    CHECK(rep.suplevel_volumes[i] >= rep.suplevel_volumes[i - 1]);

  // Off-interface center is rejected without the bypass.
  CHECK_THROWS(density_profile(one, spec, center, radii, 0.5, 0.9));

  // Plane profile: band volume scales like r^{Q-1}, both phases like r^Q.
  Field het = of_a(grid, [](double a) { return std::tanh(a); });
  GroupPoint c0 = grid->node_point(grid->flat({8}, 64, 8));
  // Phase volumes at the sign level; the band at theta0.
  DensityReport rh = density_profile(het, spec, c0, radii, 0.0, 0.9);
  CHECK(rh.fit_sup.slope > 3.6);
  CHECK(rh.fit_sup.slope < 4.2);
  CHECK(rh.fit_sub.slope > 3.6);
  CHECK(rh.fit_sub.slope < 4.2);
  CHECK(rh.fit_band.slope > 2.6);
  CHECK(rh.fit_band.slope < 3.4);
  CHECK(rh.fit_energy.slope > 2.6);
  CHECK(rh.fit_energy.slope < 3.4);
}

TEST_CASE("epsilon rescaling contracts a plane band") {
  auto grid = make_grid(cell1({1, 0}), GridResolution{{8}, 256, 8});
  // Narrow linear band around zero, well inside the sampling window.
  const double w = 16 * grid->da();
  Field f = of_a(grid, [w](double a) { return std::clamp(a / w, -1.0, 1.0); });

  std::vector<double> eps{1.0, 0.5, 0.25};
  std::vector<double> d = epsilon_rescale_distance(f, eps, 0.5, 3.0);
  REQUIRE(d.size() == 3);
  CHECK(d[1] == doctest::Approx(0.5 * d[0]).epsilon(0.05));
  CHECK(d[2] == doctest::Approx(0.25 * d[0]).epsilon(0.05));

  CHECK_THROWS(epsilon_rescale_distance(f, {0.5, 1.0}, 0.5, 3.0));  // not decreasing
}

TEST_CASE("Birkhoff audit") {
  auto grid = make_grid(cell1({1, 0}), GridResolution{{8}, 64, 8});
  Field het = of_a(grid, [](double a) { return std::tanh(a); });
  BirkhoffReport rep = birkhoff_audit(het, 2);
  CHECK(rep.tested > 0);
  CHECK(rep.worst_violation <= 1e-12);
  CHECK(rep.worst_perp_deviation <= 1e-12);
  for (const auto& row : rep.rows) CHECK(row.sublevel_violations == 0);

  // A bump on the wrong side shows up as a located violation.
  Field bad = het;
  for (std::int64_t i = 0; i < grid->size(); ++i) {
    const double a = grid->node_a(i);
    if (a > 0.9 && a < 2.1) bad.values[i] = bad.values[i] - 0.8;
  }
  BirkhoffReport rb = birkhoff_audit(bad, 1);
  CHECK(rb.worst_violation > 0.1);
}

TEST_CASE("clean ball search") {
  auto grid = make_grid(cell1({1, 0}), GridResolution{{8}, 128, 16});
  Field one(grid);
  one.values.setConstant(1.0);
  CleanBallReport cb = clean_ball_search(one, 0.1, 5.0, 1.0);
  CHECK(cb.found);
  CHECK(cb.pass);
  CHECK(cb.ball.radius >= 1.0);

  Field ramp = init_ramp(grid);
  CleanBallReport cr = clean_ball_search(ramp, 0.1, 5.0, 0.5);
  CHECK(cr.found);
  // The ball sits inside a pure phase, beyond the ramp transition.
  const double ca = cr.ball.center.z.dot(grid->base().omega_hat());
  CHECK(std::abs(ca) > 0.225);

  Field zero(grid);
  zero.values.setZero();
  project_constraints_inplace(zero);
  CleanBallReport cz = clean_ball_search(zero, 0.1, 5.0, 0.5);
  CHECK_FALSE(cz.found);
}

TEST_CASE("strip scan") {
  auto grid = make_grid(cell1({1, 0}), GridResolution{{8}, 128, 8});
  Field minus(grid);
  minus.values.setConstant(-1.0);
  auto strips = strip_scan(minus, 0.1);
  CHECK(!strips.empty());
  for (const auto& s : strips) CHECK(s.phase == -1);

  Field ramp = init_ramp(grid);
  auto sr = strip_scan(ramp, 0.1);
  for (const auto& s : sr) CHECK(std::abs(s.lambda) > 1.0);  // nothing near zero
  bool above = false;
  for (const auto& s : sr) above = above || (s.lambda > 1.2 && s.phase == 1);
  CHECK(above);
}

TEST_CASE("interface extraction") {
  auto grid = make_grid(cell1({1, 0}), GridResolution{{8}, 256, 8});
  Field step = of_a(grid, [](double a) { return a >= 0 ? 1.0 : -1.0; });
  InterfaceReport rs = interface_extract(step, 0.9);
  CHECK(rs.band_nodes == 0);
  CHECK(rs.thickness == 0.0);

  Field het = of_a(grid, [](double a) { return std::tanh(a); });
  InterfaceReport rh = interface_extract(het, 0.9);
  const double expect = 2.0 * std::atanh(0.9);
  CHECK(rh.thickness == doctest::Approx(expect).epsilon(0.08));
  CHECK(rh.confinement == doctest::Approx(std::atanh(0.9)).epsilon(0.08));
}
