#include "hgl/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hgl/analysis.hpp"
#include "hgl/field_io.hpp"
#include "hgl/parallel.hpp"
#include "hgl/solver.hpp"

namespace hgl {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string trace_csv(const MinimizerBundle& b) {
  std::ostringstream os;
  os << "iteration,dirichlet,potential,total,step\n";
  for (const auto& row : b.trace)
    os << row.iteration << "," << fmt(row.dirichlet) << "," << fmt(row.potential) << ","
       << fmt(row.total) << "," << fmt(row.step) << "\n";
  return os.str();
}

std::string density_csv(const DensityReport& r) {
  std::ostringstream os;
  os << "r,energy,vol_plus,vol_minus,vol_band\n";
  for (std::size_t i = 0; i < r.radii.size(); ++i)
    os << fmt(r.radii[i]) << "," << fmt(r.ball_energies[i]) << "," << fmt(r.suplevel_volumes[i])
       << "," << fmt(r.sublevel_volumes[i]) << "," << fmt(r.band_volumes[i]) << "\n";
  os << "# slopes: energy=" << fmt(r.fit_energy.slope) << " vol_plus=" << fmt(r.fit_sup.slope)
     << " vol_minus=" << fmt(r.fit_sub.slope) << " vol_band=" << fmt(r.fit_band.slope) << "\n";
  return os.str();
}

std::string birkhoff_csv(const BirkhoffReport& r) {
  std::ostringstream os;
  os << "k,omega_dot_k,tested,worst_violation,perp_deviation,sublevel_violations\n";
  for (const auto& row : r.rows) {
    os << "\"";
    for (int i = 0; i < row.k.size(); ++i) os << (i ? " " : "") << row.k[i];
    os << "\"," << fmt(row.omega_dot_k) << "," << (row.tested ? 1 : 0) << ","
       << fmt(row.violation) << "," << fmt(row.perp_deviation) << ","
       << row.sublevel_violations << "\n";
  }
  return os.str();
}

std::string slab_csv(const std::vector<SlabReport>& reps) {
  std::ostringstream os;
  os << "theta,width,pass\n";
  for (const auto& r : reps)
    os << fmt(r.theta) << "," << fmt(r.width) << "," << (r.pass ? 1 : 0) << "\n";
  return os.str();
}

// Interface anchor: the node where |u| is smallest, ties by index.
std::int64_t interface_node(const Field& f) {
  std::int64_t best = 0;
  double bu = 1e300;
  for (std::int64_t i = 0; i < f.values.size(); ++i) {
    const double v = std::abs(f.values[i]);
    if (v < bu) {
      bu = v;
      best = i;
    }
  }
  return best;
}

// Shift of the heteroclinic profile: zero crossing of the slice means.
double profile_center(const Field& f) {
  const Grid& g = *f.grid;
  const int na = g.along_res();
  const int ntau = g.vertical_res();
  std::vector<double> mean(na, 0.0);
  const std::int64_t cols = g.size() / (static_cast<std::int64_t>(na) * ntau);
  std::int64_t node = 0;
  for (std::int64_t ts = 0; ts < cols; ++ts)
    for (int ia = 0; ia < na; ++ia)
      for (int it = 0; it < ntau; ++it, ++node) mean[ia] += f.values[node];
  for (int ia = 0; ia < na; ++ia) mean[ia] /= static_cast<double>(cols * ntau);
  for (int ia = 0; ia + 1 < na; ++ia) {
    if (mean[ia] <= 0.0 && mean[ia + 1] > 0.0) {
      const double a0 = (ia - g.center_a()) * g.dalpha() * g.k_omega_norm();
      const double frac = mean[ia + 1] - mean[ia] != 0.0
                              ? -mean[ia] / (mean[ia + 1] - mean[ia])
                              : 0.0;
      return a0 + frac * g.da();
    }
  }
  return 0.0;
}

double tanh_mismatch(const Field& f, double center) {
  const Grid& g = *f.grid;
  double sup = 0;
  for (std::int64_t i = 0; i < f.values.size(); ++i)
    sup = std::max(sup, std::abs(f.values[i] - std::tanh(g.a_coords()[i] - center)));
  return sup;
}

struct Checker {
  std::ostream& log;
  bool ok = true;

  void check(const std::string& name, bool pass, const std::string& detail) {
    log << (pass ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) log << " (" << detail << ")";
    log << "\n";
    ok = ok && pass;
  }
};

}  // namespace

int run_pipeline(const RunConfig& cfg, const PipelineOptions& opt, std::ostream& log) {
  set_num_threads(opt.deterministic ? 1 : opt.threads);
  std::filesystem::create_directories(opt.out_dir);
  const std::string out = opt.out_dir + "/";

  if (cfg.mode == RunMode::sequence) {
    SequencePolicy policy;
    policy.M = cfg.cell_M;
    policy.L = cfg.cell_L;
    policy.delta = cfg.cell_delta;
    policy.p = cfg.cell_p;
    policy.target_da = 2.0 * cfg.cell_L / cfg.resolutions.along;
    policy.ntau_min = cfg.resolutions.vertical;
    policy.ns_min = cfg.resolutions.transverse.empty() ? 8 : cfg.resolutions.transverse[0];
    policy.kmax = cfg.kmax;
    SequenceReport rep = rational_sequence_solve(cfg.omega_real, cfg.denominators,
                                                 cfg.potential, cfg.solver, policy);
    std::ostringstream os;
    os << "q,omega,window_diff_prev,slab_width,birkhoff_worst,converged\n";
    for (std::size_t i = 0; i < rep.members.size(); ++i) {
      const auto& m = rep.members[i];
      SlabReport slab = slab_width(m.bundle.field, 1.0 - cfg.cell_delta, cfg.M0_bound);
      BirkhoffReport audit = birkhoff_audit(m.bundle.field, cfg.kmax);
      os << m.denominator << ",\"";
      for (std::size_t j = 0; j < m.omega.size(); ++j)
        os << (j ? " " : "") << m.omega[j].str();
      os << "\"," << (i == 0 ? std::string("") : fmt(rep.window_sup_diffs[i - 1])) << ","
         << fmt(slab.width) << "," << fmt(audit.worst_violation) << ","
         << (m.bundle.converged ? 1 : 0) << "\n";
      dump_field(m.bundle.field, out + "field_q" + std::to_string(m.denominator) + ".hgpf");
    }
    write_text(out + "sequence.csv", os.str());
    log << "sequence: " << rep.members.size() << " members, window diffs:";
    for (double d : rep.window_sup_diffs) log << " " << d;
    log << "\n";
    bool converged = true;
    for (const auto& m : rep.members) converged = converged && m.bundle.converged;
    return converged ? 0 : 1;
  }

  if (cfg.mode == RunMode::gamma) {
    ModulationSpec alpha;
    alpha.mean = cfg.alpha_mean;
    alpha.amplitude = cfg.alpha_amplitude;
    alpha.frequency = cfg.potential.modulation.frequency;
    GammaReport rep = gamma_sequence_solve(alpha, cfg.gamma_scales, cfg.make_cell(),
                                           cfg.resolutions, cfg.solver);
    std::ostringstream os;
    os << "N,thickness,confinement,dirichlet,potential,total,converged\n";
    for (const auto& m : rep.members) {
      os << m.scale << "," << fmt(m.interface_thickness) << "," << fmt(m.confinement_width)
         << "," << fmt(m.bundle.energy.dirichlet) << "," << fmt(m.bundle.energy.potential)
         << "," << fmt(m.bundle.energy.total) << "," << (m.bundle.converged ? 1 : 0) << "\n";
      dump_field(m.bundle.field, out + "field_N" + std::to_string(m.scale) + ".hgpf");
    }
    write_text(out + "gamma.csv", os.str());
    log << "gamma: " << rep.members.size() << " scales\n";
    return 0;
  }

  // Common path: a single grid.
  CellSpec cell = cfg.make_cell();
  auto grid = make_grid(cell, cfg.resolutions);
  log << grid->describe() << "\n";

  Field start = cfg.field_path.empty() ? init_ramp(grid) : load_field(cfg.field_path, grid);
  const EnergyBreakdown ramp_energy = energy_total(init_ramp(grid), cfg.potential);

  MinimizerBundle bundle = minimize(start, cfg.potential, cfg.solver);
  write_text(out + "trace.csv", trace_csv(bundle));
  dump_field(bundle.field, out + "field.hgpf");
  log << "solve: iterations=" << bundle.iterations
      << " converged=" << (bundle.converged ? "yes" : "no")
      << " energy=" << fmt(bundle.energy.total) << "\n";

  if (cfg.mode == RunMode::solve) return 0;

  std::vector<LatticeVector> gens = birkhoff_generators(*grid, cfg.kmax);
  MinimizerBundle refined = birkhoff_refine(bundle, cfg.potential, cfg.solver, gens);
  dump_field(refined.field, out + "field_refined.hgpf");
  log << "refine: passes=" << refined.refinement_passes
      << " energy=" << fmt(refined.energy.total) << "\n";

  if (cfg.mode == RunMode::refine) return 0;

  // Analysis outputs.
  std::vector<SlabReport> slabs;
  slabs.push_back(slab_width(refined.field, cfg.theta, cfg.M0_bound));
  slabs.push_back(slab_width(refined.field, 1.0 - cfg.cell_delta, cfg.M0_bound));
  write_text(out + "slab.csv", slab_csv(slabs));

  BirkhoffReport audit = birkhoff_audit(refined.field, cfg.kmax);
  write_text(out + "birkhoff.csv", birkhoff_csv(audit));

  {
    auto strips = strip_scan(refined.field, cfg.cell_delta);
    std::ostringstream os;
    os << "lambda,phase\n";
    for (const auto& s : strips) os << fmt(s.lambda) << "," << s.phase << "\n";
    write_text(out + "strips.csv", os.str());
  }
  {
    CleanBallReport cb = clean_ball_search(refined.field, cfg.cell_delta, cfg.a_window, cfg.r0);
    std::ostringstream os;
    os << "found,radius,center_a,pass\n";
    os << (cb.found ? 1 : 0) << "," << fmt(cb.found ? cb.ball.radius : 0.0) << ","
       << fmt(cb.found ? cb.ball.center.z.dot(grid->base().omega_hat()) : 0.0) << ","
       << (cb.pass ? 1 : 0) << "\n";
    write_text(out + "cleanball.csv", os.str());
  }
  std::vector<double> eps_dist;
  if (!cfg.epsilons.empty()) {
    const double window = std::min(3.0, 0.9 * cfg.cell_L * cfg.epsilons.back());
    eps_dist = epsilon_rescale_distance(refined.field, cfg.epsilons, cfg.theta, window);
    std::ostringstream os;
    os << "eps,distance\n";
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
      os << fmt(cfg.epsilons[i]) << "," << fmt(eps_dist[i]) << "\n";
    write_text(out + "epsilon.csv", os.str());
  }
  DensityReport density;
  bool have_density = false;
  if (!cfg.radii.empty()) {
    const GroupPoint center = grid->node_point(interface_node(refined.field));
    // Phase volumes at the sign level, the interface band at theta0.
    density = density_profile(refined.field, cfg.potential, center, cfg.radii, 0.0,
                              cfg.theta0);
    write_text(out + "density.csv", density_csv(density));
    have_density = true;
  }

  if (cfg.mode == RunMode::analyze) return 0;

  // Verify mode: the composed checks.
  Checker c{log};
  {
    std::vector<double> us;
    for (double u = -1.0; u <= 1.0 + 1e-12; u += 0.05) us.push_back(u);
    std::vector<GroupPoint> xis;
    const std::int64_t stride = std::max<std::int64_t>(1, grid->size() / 128);
    for (std::int64_t i = 0; i < grid->size(); i += stride)
      xis.push_back(grid->node_point(i));
    StructuralReport sr = structural_check(cfg.potential, us, xis);
    c.check("structural_potential", sr.pass,
            sr.pass ? "growth_const=" + fmt(sr.growth_const) : sr.failures.front());
  }
  c.check("solver_converged", bundle.converged && refined.converged,
          "iterations=" + std::to_string(bundle.iterations));
  c.check("feasible", feasibility_violation(refined.field) <= 1e-14, "");
  {
    bool mono = true;
    for (std::size_t i = 1; i < bundle.trace.size(); ++i)
      mono = mono &&
             bundle.trace[i].total <= bundle.trace[i - 1].total +
                                          1e-10 * std::max(1.0, bundle.trace[i - 1].total);
    c.check("energy_trace_monotone", mono, "");
  }
  c.check("competitor_bound", refined.energy.total <= ramp_energy.total + 1e-9,
          "energy=" + fmt(refined.energy.total) + " ramp=" + fmt(ramp_energy.total));
  if (cfg.potential.kind == PotentialKind::quartic &&
      cfg.potential.modulation.amplitude == 0.0 &&
      cfg.potential.modulation.mean == 1.0) {
    const double mism = tanh_mismatch(refined.field, profile_center(refined.field));
    c.check("tanh_profile", mism <= 5e-2, "sup_diff=" + fmt(mism));
  }
  c.check("slab_confinement", slabs[1].pass,
          "width=" + fmt(slabs[1].width) + " bound=" + fmt(cfg.M0_bound));
  c.check("birkhoff", audit.worst_violation <= 1e-6 && audit.worst_perp_deviation <= 2e-6,
          "worst=" + fmt(audit.worst_violation) + " tested=" + std::to_string(audit.tested));
  if (have_density && cfg.n == 1 && cfg.radii.size() >= 5) {
    const bool vol_ok = density.fit_sup.slope >= 3.6 && density.fit_sup.slope <= 4.2 &&
                        density.fit_sub.slope >= 3.6 && density.fit_sub.slope <= 4.2;
    const bool surf_ok = density.fit_band.slope >= 2.6 && density.fit_band.slope <= 3.4 &&
                         density.fit_energy.slope >= 2.6 && density.fit_energy.slope <= 3.4;
    c.check("density_exponents", vol_ok && surf_ok,
            "vol=(" + fmt(density.fit_sup.slope) + "," + fmt(density.fit_sub.slope) +
                ") band=" + fmt(density.fit_band.slope) +
                " energy=" + fmt(density.fit_energy.slope));
  }
  if (eps_dist.size() >= 2) {
    bool mono = true;
    for (std::size_t i = 1; i < eps_dist.size(); ++i)
      mono = mono && eps_dist[i] <= 1.10 * eps_dist[i - 1];
    c.check("epsilon_scaling", mono, "");
  }
  return c.ok ? 0 : 1;
}

}  // namespace hgl
