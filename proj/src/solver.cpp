#include "hgl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hgl/analysis.hpp"

namespace hgl {

Field init_ramp(std::shared_ptr<const Grid> grid) {
  Field f(grid);
  const auto& a = grid->a_coords();
  for (std::int64_t i = 0; i < grid->size(); ++i)
    f.values[i] = std::clamp(4.0 * a[i], -1.0, 1.0);
  return f;
}

void project_constraints_inplace(Field& field) {
  const Grid& g = *field.grid;
  const double m = g.spec().M;
  const double lo = -1.0 + g.spec().delta;
  const double hi = 1.0 - g.spec().delta;
  const auto& a = g.a_coords();
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double v = std::clamp(field.values[i], -1.0, 1.0);
    if (a[i] >= m)
      v = std::max(v, hi);
    else if (a[i] <= -m)
      v = std::min(v, lo);
    field.values[i] = v;
  }
}

Field project_constraints(const Field& field) {
  Field out = field;
  project_constraints_inplace(out);
  return out;
}

double feasibility_violation(const Field& field) {
  Field p = project_constraints(field);
  return (p.values - field.values).abs().maxCoeff();
}

MinimizerBundle minimize(const Field& start, const PotentialSpec& spec,
                         const SolveConfig& cfg, EnergyWeights w) {
  if (cfg.max_iters < 1 || !(cfg.tol > 0))
    throw std::invalid_argument("minimize: need max_iters >= 1 and tol > 0");
  const Grid& g = *start.grid;
  spec.validate(g.dim_z());
  const bool d0 = cfg.d0_mode || spec.kind == PotentialKind::indicator;
  if (spec.kind == PotentialKind::indicator && !d0)
    throw std::invalid_argument("minimize: indicator potential requires d0 mode");

  PotentialTable pot = tabulate_potential(g, spec);
  const EnergyWeights grad_w{w.dirichlet, d0 ? 0.0 : w.potential};

  MinimizerBundle out;
  out.field = project_constraints(start);
  Field& u = out.field;

  auto objective = [&](const EnergyBreakdown& e) { return d0 ? e.dirichlet : e.total; };
  EnergyBreakdown e_cur = energy_total(u, pot, w);

  double eta = cfg.eta0 > 0 ? cfg.eta0 : 1.0;
  if (cfg.record_trace)
    out.trace.push_back({0, e_cur.dirichlet, e_cur.potential, e_cur.total, 0.0});

  for (int it = 1; it <= cfg.max_iters; ++it) {
    Field grad = el_gradient(u, pot, grad_w);
    Field trial(u.grid);
    double step_sup = 0;
    EnergyBreakdown e_trial;
    bool accepted = false;
    while (eta > 1e-18) {
      trial.values = u.values - eta * grad.values;
      project_constraints_inplace(trial);
      e_trial = energy_total(trial, pot, w);
      if (objective(e_trial) <=
          objective(e_cur) + 1e-14 * std::max(1.0, std::abs(objective(e_cur)))) {
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) {
      out.converged = false;
      out.iterations = it;
      break;
    }
    step_sup = (trial.values - u.values).abs().maxCoeff();
    u.values.swap(trial.values);
    e_cur = e_trial;
    out.iterations = it;
    if (cfg.record_trace)
      out.trace.push_back({it, e_cur.dirichlet, e_cur.potential, e_cur.total, step_sup});
    if (step_sup < cfg.tol) {
      out.converged = true;
      break;
    }
    eta *= 1.15;
  }
  out.energy = e_cur;
  return out;
}

namespace {

void check_same_grid(const Field& u, const Field& v, const char* who) {
  if (u.grid.get() != v.grid.get())
    throw std::invalid_argument(std::string(who) + ": fields live on different grids");
}

}  // namespace

Field min_combine(const Field& u, const Field& v) {
  check_same_grid(u, v, "min_combine");
  return Field(u.grid, u.values.min(v.values));
}

Field max_combine(const Field& u, const Field& v) {
  check_same_grid(u, v, "max_combine");
  return Field(u.grid, u.values.max(v.values));
}

std::vector<LatticeVector> birkhoff_generators(const Grid& grid, int kmax) {
  if (kmax < 1) throw std::invalid_argument("birkhoff_generators: kmax >= 1");
  const int dz = grid.dim_z();
  const auto& omega = grid.base().omega;
  std::vector<LatticeVector> out;
  LatticeVector k(dz);
  std::vector<int> digits(dz, -kmax);
  while (true) {
    for (int i = 0; i < dz; ++i) k[i] = digits[i];
    bool zero = true;
    for (int i = 0; i < dz; ++i) zero = zero && k[i] == 0;
    if (!zero) {
      Rational dotk(0);
      for (int i = 0; i < dz; ++i) dotk += omega[i] * Rational(k[i]);
      if (dotk >= Rational(0) && is_commensurate(grid, k)) out.push_back(k);
    }
    int i = 0;
    for (; i < dz; ++i) {
      if (++digits[i] <= kmax) break;
      digits[i] = -kmax;
    }
    if (i == dz) break;
  }
  return out;
}

MinimizerBundle birkhoff_refine(const MinimizerBundle& bundle, const PotentialSpec& spec,
                                const SolveConfig& cfg,
                                const std::vector<LatticeVector>& generators,
                                EnergyWeights w) {
  const Grid& g = *bundle.field.grid;
  std::vector<TranslatePlan> plans;
  plans.reserve(generators.size());
  for (const auto& k : generators) plans.push_back(plan_translate(g, k));

  // Exact vertical shifts by 2j inside the cell period (nontrivial only for
  // p*theta > 1).
  std::vector<std::int64_t> vshifts;
  const std::int64_t ptheta = g.spec().p * g.base().theta;
  for (std::int64_t j = 1; j < ptheta; ++j) vshifts.push_back(j);

  MinimizerBundle cur = bundle;
  cur.refinement_passes = 0;
  for (int pass = 0; pass < cfg.refine_max_passes; ++pass) {
    Field swept = cur.field;
    for (const auto& plan : plans) swept = min_combine(swept, apply_translate(swept, plan));
    for (std::int64_t j : vshifts) swept = min_combine(swept, vertical_shift(swept, j));
    const double change = (swept.values - cur.field.values).abs().maxCoeff();
    cur.refinement_passes = pass + 1;
    if (change <= cfg.refine_tol) {
      cur.field = swept;  // post-sweep state certifies the fixed point
      cur.energy = energy_total(cur.field, spec, w);
      cur.converged = true;
      return cur;
    }
    MinimizerBundle re = minimize(swept, spec, cfg, w);
    cur.field = re.field;
    cur.energy = re.energy;
    cur.iterations += re.iterations;
    cur.converged = re.converged;
  }
  cur.energy = energy_total(cur.field, spec, w);
  cur.converged = false;  // sweep never reached its fixed point
  return cur;
}

EnlargeReport enlarge_check(const MinimizerBundle& bundle, const PotentialSpec& spec,
                            const SolveConfig& cfg, double a_extra, EnergyWeights w) {
  const Grid& g = *bundle.field.grid;
  CellSpec enlarged = g.spec();
  enlarged.M += a_extra;
  if (!(enlarged.L > enlarged.M))
    throw std::invalid_argument("enlarge_check: L too small for M + a_extra");
  GridResolution res;
  res.transverse.resize(g.num_transverse());
  for (int j = 0; j < g.num_transverse(); ++j) res.transverse[j] = g.transverse_res(j);
  res.along = g.along_res();
  res.vertical = g.vertical_res();
  auto grid2 = make_grid(enlarged, res);

  MinimizerBundle other = minimize(init_ramp(grid2), spec, cfg, w);
  EnlargeReport rep;
  rep.threshold = 10.0 * cfg.tol;
  rep.sup_diff = (other.field.values - bundle.field.values).abs().maxCoeff();
  rep.pass = rep.sup_diff <= rep.threshold;
  return rep;
}

Rational best_rational(double x, std::int64_t max_den) {
  if (max_den < 1) throw std::invalid_argument("best_rational: max_den >= 1");
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;  // convergent recurrence seeds
  const bool neg = x < 0;
  double v = std::abs(x);
  std::int64_t bp = 0, bq = 1;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(v);
    if (fl > 9.0e17) break;
    const std::int64_t a = static_cast<std::int64_t>(fl);
    const std::int64_t p2 = a * p1 + p0;
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) break;
    bp = p2;
    bq = q2;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double rem = v - fl;
    if (rem < 1e-12) break;
    v = 1.0 / rem;
  }
  return Rational(neg ? -bp : bp, bq);
}

GridResolution plan_resolution(const IntegerBase& base, const SequencePolicy& policy) {
  const int nt = 2 * base.n - 1;
  GridResolution res;
  res.transverse.resize(nt);
  for (int j = 0; j < nt; ++j) {
    const std::int64_t dj = base.k[j].squaredNorm() * policy.p;
    std::int64_t nsj = dj;
    while (nsj < policy.ns_min) nsj += dj;
    res.transverse[j] = static_cast<int>(nsj);
  }
  // Vertical resolution: match the lattice denominator when cheap, so that
  // small translations stay exactly commensurate.
  const std::int64_t d = base.k_omega().squaredNorm();
  std::int64_t ntau = policy.ntau_min;
  const bool full = d <= policy.ntau_full_audit_cap;
  if (full) {
    ntau = d;
    while (ntau < policy.ntau_min) ntau += d;
  }
  res.vertical = static_cast<int>(ntau);
  // Spacing along the flow: dalpha = 1/(d*r). Exactness of small translations
  // needs (d*r) | 2*ntau; without the full-audit match, r | 2*ntau keeps at
  // least the wrap twists exact.
  const std::int64_t r_cap = full ? 2 * ntau / d : 2 * ntau;
  const double komega = base.k_omega_norm();
  std::int64_t r_req = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::llround(komega / (d * policy.target_da))));
  std::int64_t r_best = 1;
  double best_gap = 1e300;
  for (std::int64_t r = 1; r <= r_cap; ++r) {
    if (r_cap % r != 0) continue;
    const double gap = std::abs(std::log(static_cast<double>(r) / r_req));
    if (gap < best_gap) {
      best_gap = gap;
      r_best = r;
    }
  }
  const double dalpha = 1.0 / static_cast<double>(d * r_best);
  int na = 2 * static_cast<int>(std::ceil(policy.L / (dalpha * komega)));
  res.along = std::max(na, 8);
  return res;
}

SequenceReport rational_sequence_solve(const Eigen::VectorXd& omega_target,
                                       const std::vector<std::int64_t>& denominators,
                                       const PotentialSpec& spec, const SolveConfig& cfg,
                                       const SequencePolicy& policy) {
  if (omega_target.size() % 2 != 0 || omega_target.norm() == 0)
    throw std::invalid_argument("rational_sequence_solve: bad target direction");
  const int dz = static_cast<int>(omega_target.size());

  SequenceReport rep;
  for (std::int64_t q : denominators) {
    SequenceMember member;
    member.denominator = q;
    member.omega.resize(dz);
    for (int i = 0; i < dz; ++i) member.omega[i] = best_rational(omega_target[i], q);
    IntegerBase base = build_integer_base(member.omega);

    CellSpec cell;
    cell.base = base;
    cell.p = policy.p;
    cell.M = policy.M;
    cell.L = policy.L;
    cell.delta = policy.delta;
    GridResolution res = plan_resolution(base, policy);
    // Recompute L to exactly match the planned spacing; make_grid snaps the
    // rest.
    auto grid = make_grid(cell, res);

    MinimizerBundle solved = minimize(init_ramp(grid), spec, cfg);
    member.bundle =
        birkhoff_refine(solved, spec, cfg, birkhoff_generators(*grid, policy.kmax));
    rep.members.push_back(std::move(member));
  }

  // Locally uniform comparison on a fixed compact window.
  const int ns = policy.window_samples;
  for (std::size_t i = 0; i + 1 < rep.members.size(); ++i) {
    const Field& a = rep.members[i].bundle.field;
    const Field& b = rep.members[i + 1].bundle.field;
    double sup = 0;
    Eigen::VectorXd z(dz);
    for (int iz = 0; iz < ns; ++iz)
      for (int jz = 0; jz < ns; ++jz)
        for (int it = 0; it < 5; ++it) {
          z.setZero();
          z[0] = -policy.window_halfwidth + 2.0 * policy.window_halfwidth * iz / (ns - 1);
          z[1] = -policy.window_halfwidth + 2.0 * policy.window_halfwidth * jz / (ns - 1);
          const double t = -policy.window_t + 2.0 * policy.window_t * it / 4.0;
          const GroupPoint xi(z, t);
          sup = std::max(sup, std::abs(a.grid->sample_at(a.values, xi) -
                                       b.grid->sample_at(b.values, xi)));
        }
    rep.window_sup_diffs.push_back(sup);
  }
  return rep;
}

GammaReport gamma_sequence_solve(const ModulationSpec& alpha, const std::vector<int>& scales,
                                 const CellSpec& cell, const GridResolution& res,
                                 const SolveConfig& cfg) {
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1])
      throw std::invalid_argument("gamma_sequence_solve: scales must increase");

  PotentialSpec spec;
  spec.kind = PotentialKind::quartic;
  spec.d = 2.0;
  spec.modulation = alpha;
  spec.modulation.squared = true;  // the metric factor enters as alpha^2

  auto grid = make_grid(cell, res);
  GammaReport rep;
  for (int n : scales) {
    GammaMember member;
    member.scale = n;
    EnergyWeights w{1.0 / n, static_cast<double>(n)};
    member.bundle = minimize(init_ramp(grid), spec, cfg, w);
    InterfaceReport iface = interface_extract(member.bundle.field, 0.9);
    member.interface_thickness = iface.thickness;
    member.confinement_width = iface.confinement;
    rep.members.push_back(std::move(member));
  }
  return rep;
}

}  // namespace hgl
