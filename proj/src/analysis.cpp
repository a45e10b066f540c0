#include "hgl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hgl {

std::vector<std::int64_t> level_set(const Field& field, double theta) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = 0; i < field.values.size(); ++i)
    if (std::abs(field.values[i]) <= theta) out.push_back(i);
  return out;
}

SlabReport slab_width(const Field& field, double theta, double M0_bound) {
  SlabReport rep;
  rep.theta = theta;
  rep.M0_bound = M0_bound;
  const auto& a = field.grid->a_coords();
  double w = 0;
  for (std::int64_t i = 0; i < field.values.size(); ++i)
    if (std::abs(field.values[i]) <= theta) w = std::max(w, std::abs(a[i]));
  rep.width = w;
  rep.pass = w <= M0_bound;
  return rep;
}

namespace {

ExponentFit fit_loglog(const std::vector<double>& radii, const std::vector<double>& ys) {
  ExponentFit fit;
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (ys[i] > 0) {
      xs.push_back(std::log(radii[i]));
      ls.push_back(std::log(ys[i]));
    }
  const std::size_t n = xs.size();
  if (n < 3) return fit;
  double xm = 0, ym = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += xs[i];
    ym += ls[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ls[i] - ym);
  }
  fit.slope = sxy / sxx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ls[i] - ym - fit.slope * (xs[i] - xm);
    ss += r * r;
  }
  fit.half_width = n > 2 ? 2.0 * std::sqrt(ss / (n - 2) / sxx) : 0.0;
  fit.valid = true;
  return fit;
}

}  // namespace

DensityReport density_profile(const Field& field, const PotentialSpec& spec,
                              const GroupPoint& center, const std::vector<double>& radii,
                              double theta, double theta0, bool force_center) {
  const Grid& g = *field.grid;
  if (radii.empty()) throw std::invalid_argument("density_profile: need at least one radius");
  if (!force_center) {
    const double uc = g.sample_at(field.values, center);
    if (std::abs(uc) > theta0)
      throw std::invalid_argument("density_profile: center is off the interface (|u|=" +
                                  std::to_string(std::abs(uc)) + " > theta0)");
  }

  PotentialTable pot = tabulate_potential(g, spec);
  Eigen::ArrayXd dir, potv;
  node_energy_split(field, pot, dir, potv);
  Eigen::ArrayXd sup_ind(g.size()), sub_ind(g.size()), band_ind(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const double u = field.values[i];
    sup_ind[i] = u >= theta ? 1.0 : 0.0;
    sub_ind[i] = u <= theta ? 1.0 : 0.0;
    band_ind[i] = std::abs(u) <= theta0 ? 1.0 : 0.0;
  }
  RingPrefix pe(g, (dir + potv).eval()), psup(g, sup_ind), psub(g, sub_ind), pband(g, band_ind);

  DensityReport rep;
  rep.radii = radii;
  std::sort(rep.radii.begin(), rep.radii.end());
  const double vol = g.node_volume();
  for (double r : rep.radii) {
    double e = 0, vs = 0, vb = 0, vband = 0;
    for_each_ball_column(g, KoranyiBall(center, r),
                         [&](std::int64_t col, std::int64_t tw, std::int64_t ilo,
                             std::int64_t ihi) {
                           e += pe.range_sum(col, tw, ilo, ihi);
                           vs += psup.range_sum(col, tw, ilo, ihi);
                           vb += psub.range_sum(col, tw, ilo, ihi);
                           vband += pband.range_sum(col, tw, ilo, ihi);
                           return true;
                         });
    rep.ball_energies.push_back(e * vol);
    rep.suplevel_volumes.push_back(vs * vol);
    rep.sublevel_volumes.push_back(vb * vol);
    rep.band_volumes.push_back(vband * vol);
  }
  // Radii near the resolution floor are theory-free; keep them out of the
  // exponent fits (they stay in the reported lists).
  double floor_spacing = g.da();
  for (int j = 0; j < g.num_transverse(); ++j) {
    const double kn = std::sqrt(static_cast<double>(g.base().k[j].squaredNorm()));
    floor_spacing = std::max(floor_spacing, g.spec().p * kn * g.ds(j));
  }
  std::vector<double> fit_r;
  std::vector<double> fe, fs, fb, fd;
  for (std::size_t i = 0; i < rep.radii.size(); ++i) {
    if (rep.radii[i] < 3.0 * floor_spacing) continue;
    fit_r.push_back(rep.radii[i]);
    fe.push_back(rep.ball_energies[i]);
    fs.push_back(rep.suplevel_volumes[i]);
    fb.push_back(rep.sublevel_volumes[i]);
    fd.push_back(rep.band_volumes[i]);
  }
  rep.fit_energy = fit_loglog(fit_r, fe);
  rep.fit_sup = fit_loglog(fit_r, fs);
  rep.fit_sub = fit_loglog(fit_r, fb);
  rep.fit_band = fit_loglog(fit_r, fd);
  return rep;
}

std::vector<double> epsilon_rescale_distance(const Field& field,
                                             const std::vector<double>& epsilons,
                                             double theta, double window_halfwidth) {
  const Grid& g = *field.grid;
  for (std::size_t i = 1; i < epsilons.size(); ++i)
    if (epsilons[i] >= epsilons[i - 1])
      throw std::invalid_argument("epsilon_rescale_distance: epsilons must decrease");

  // Sample points: the cell nodes inside the window.
  std::vector<std::int64_t> samples;
  for (std::int64_t i = 0; i < g.size(); ++i)
    if (std::abs(g.a_coords()[i]) <= window_halfwidth) samples.push_back(i);
  if (samples.empty())
    throw std::invalid_argument("epsilon_rescale_distance: empty window");

  std::vector<double> out;
  for (double eps : epsilons) {
    if (!(eps > 0 && eps <= 1))
      throw std::invalid_argument("epsilon_rescale_distance: eps must lie in (0,1]");
    std::vector<double> band_a;
    for (std::int64_t node : samples) {
      GroupPoint xi = g.node_point(node);
      const GroupPoint scaled(xi.z / eps, xi.t / (eps * eps));
      // Stay a cell away from the pads so interpolation never mixes them in.
      const double a_scaled = g.a_coords()[node] / eps;
      if (a_scaled > g.a_max() - g.da() || a_scaled < g.a_min() + g.da()) continue;
      const double ue = g.sample_at(field.values, scaled);
      if (std::abs(ue) <= theta) band_a.push_back(g.a_coords()[node]);
    }
    if (band_a.empty()) {
      out.push_back(0.0);
      continue;
    }
    std::sort(band_a.begin(), band_a.end());
    const double median = band_a[band_a.size() / 2];
    double sup = 0;
    for (double a : band_a) sup = std::max(sup, std::abs(a - median));
    out.push_back(sup);
  }
  return out;
}

BirkhoffReport birkhoff_audit(const Field& field, int kmax) {
  if (kmax < 1) throw std::invalid_argument("birkhoff_audit: kmax >= 1");
  const Grid& g = *field.grid;
  const int dz = g.dim_z();
  const auto& omega = g.base().omega;

  BirkhoffReport rep;
  LatticeVector k(dz);
  std::vector<int> digits(dz, -kmax);
  while (true) {
    for (int i = 0; i < dz; ++i) k[i] = digits[i];
    bool zero = true;
    for (int i = 0; i < dz; ++i) zero = zero && k[i] == 0;
    if (!zero) {
      BirkhoffRow row;
      row.k = k;
      Rational dotk(0);
      for (int i = 0; i < dz; ++i) dotk += omega[i] * Rational(k[i]);
      row.omega_dot_k = dotk.to_double();
      std::string why;
      if (is_commensurate(g, k, &why)) {
        row.tested = true;
        ++rep.tested;
        Field tk = translate_field(field, k);
        if (dotk.is_zero()) {
          row.perp_deviation = (tk.values - field.values).abs().maxCoeff();
          rep.worst_perp_deviation = std::max(rep.worst_perp_deviation, row.perp_deviation);
        } else {
          const double sign = dotk > Rational(0) ? 1.0 : -1.0;
          const double worst = (sign * (tk.values - field.values)).minCoeff();
          row.violation = std::max(0.0, -worst);
          rep.worst_violation = std::max(rep.worst_violation, row.violation);
        }
        // Sublevel-set inclusion on {u < 0}: translating the sublevel set
        // with the direction of increase must stay inside it.
        if (dotk >= Rational(0)) {
          Field tmk = translate_field(field, -k);
          for (std::int64_t i = 0; i < g.size(); ++i)
            if (field.values[i] < 0.0 && tmk.values[i] >= 1e-6) ++row.sublevel_violations;
        }
      } else {
        ++rep.skipped;
      }
      rep.rows.push_back(std::move(row));
    }
    int i = 0;
    for (; i < dz; ++i) {
      if (++digits[i] <= kmax) break;
      digits[i] = -kmax;
    }
    if (i == dz) break;
  }
  return rep;
}

CleanBallReport clean_ball_search(const Field& field, double delta, double a_window,
                                  double r0) {
  const Grid& g = *field.grid;
  CleanBallReport rep;
  rep.r0 = r0;
  const double lo = 1.0 - delta;

  Eigen::ArrayXd dirty(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i)
    dirty[i] = std::abs(field.values[i]) > lo ? 0.0 : 1.0;
  RingPrefix pdirty(g, dirty);

  // Clearance of each flow slice from the nearest slice that touches the
  // interface; the hostable radius is capped by it and by the window.
  const int na = g.along_res();
  const int ntau = g.vertical_res();
  std::vector<char> slice_dirty(na, 0);
  {
    const std::int64_t cols = g.size() / (static_cast<std::int64_t>(na) * ntau);
    std::int64_t node = 0;
    for (std::int64_t ts = 0; ts < cols; ++ts)
      for (int ia = 0; ia < na; ++ia)
        for (int it = 0; it < ntau; ++it, ++node)
          if (dirty[node] != 0.0) slice_dirty[ia] = 1;
  }
  auto slice_clearance = [&](int ia) {
    double best = 1e300;
    for (int ib = 0; ib < na; ++ib)
      if (slice_dirty[ib])
        best = std::min(best, std::abs(g.a_coords()[static_cast<std::int64_t>(ia) * ntau] -
                                       g.a_coords()[static_cast<std::int64_t>(ib) * ntau]));
    return best;
  };
  std::vector<double> clearance(na);
  for (int ia = 0; ia < na; ++ia) clearance[ia] = slice_clearance(ia);

  // Deterministic candidates, best hostable radius first.
  std::vector<std::int64_t> candidates;
  const std::int64_t stride = std::max<std::int64_t>(1, g.size() / 8192);
  auto score = [&](std::int64_t i) {
    const double away = a_window - std::abs(g.a_coords()[i]);
    return std::min(away, clearance[g.ia_of(i)]);
  };
  for (std::int64_t i = 0; i < g.size(); i += stride)
    if (dirty[i] == 0.0 && std::abs(g.a_coords()[i]) <= a_window) candidates.push_back(i);
  std::sort(candidates.begin(), candidates.end(), [&](std::int64_t a, std::int64_t b) {
    const double sa = score(a), sb = score(b);
    if (sa != sb) return sa > sb;
    return a < b;
  });
  if (candidates.size() > 24) candidates.resize(24);

  const double r_cap = std::min(a_window, 0.5 * (g.a_max() - g.a_min()) - g.da());
  const double r_floor = std::max(2.0 * g.da(), 1e-6);
  std::vector<double> ladder;
  for (double r = r_cap; r >= r_floor; r /= std::pow(2.0, 0.25)) ladder.push_back(r);

  for (double r : ladder) {
    for (std::int64_t c : candidates) {
      const double ac = g.a_coords()[c];
      if (std::abs(ac) + r > a_window) continue;
      if (ac - r < g.a_min() - 0.5 * g.da() || ac + r > g.a_max() + 0.5 * g.da()) continue;
      bool clean = true;
      for_each_ball_column(g, KoranyiBall(g.node_point(c), r),
                           [&](std::int64_t col, std::int64_t tw, std::int64_t ilo,
                               std::int64_t ihi) {
                             if (pdirty.range_sum(col, tw, ilo, ihi) > 0.0) {
                               clean = false;
                               return false;
                             }
                             return true;
                           });
      if (clean) {
        rep.found = true;
        rep.ball = KoranyiBall(g.node_point(c), r);
        rep.pass = r >= r0;
        return rep;
      }
    }
  }
  return rep;
}

std::vector<Strip> strip_scan(const Field& field, double delta) {
  const Grid& g = *field.grid;
  const double lo = 1.0 - delta;
  const int na = g.along_res();

  // Slice aggregates over everything but the flow index.
  std::vector<double> slice_min(na, 1e300), slice_max(na, -1e300);
  const int ntau = g.vertical_res();
  const std::int64_t cols = g.size() / (static_cast<std::int64_t>(na) * ntau);
  std::int64_t node = 0;
  for (std::int64_t ts = 0; ts < cols; ++ts)
    for (int ia = 0; ia < na; ++ia)
      for (int it = 0; it < ntau; ++it, ++node) {
        slice_min[ia] = std::min(slice_min[ia], field.values[node]);
        slice_max[ia] = std::max(slice_max[ia], field.values[node]);
      }

  const double quarter = g.spec().M / 4.0;
  std::vector<Strip> out;
  for (int ia = 0; ia < na; ++ia) {
    const double lambda = (ia - g.center_a()) * g.dalpha() * g.k_omega_norm();
    if (std::abs(lambda) > quarter) continue;
    bool all_pos = true, all_neg = true;
    bool any = false;
    for (int ib = 0; ib < na; ++ib) {
      const double a = (ib - g.center_a()) * g.dalpha() * g.k_omega_norm();
      if (a < lambda - 1.0 || a > lambda + 1.0) continue;
      any = true;
      all_pos = all_pos && slice_min[ib] > lo;
      all_neg = all_neg && slice_max[ib] < -lo;
    }
    if (!any) continue;
    if (all_pos)
      out.push_back({lambda, +1});
    else if (all_neg)
      out.push_back({lambda, -1});
  }
  return out;
}

InterfaceReport interface_extract(const Field& field, double theta) {
  const Grid& g = *field.grid;
  InterfaceReport rep;
  const int na = g.along_res();
  const int ntau = g.vertical_res();
  const std::int64_t cols = g.size() / (static_cast<std::int64_t>(na) * ntau);
  for (std::int64_t ts = 0; ts < cols; ++ts)
    for (int it = 0; it < ntau; ++it) {
      double amin = 1e300, amax = -1e300;
      for (int ia = 0; ia < na; ++ia) {
        const std::int64_t node = (ts * na + ia) * ntau + it;
        if (std::abs(field.values[node]) <= theta) {
          ++rep.band_nodes;
          const double a = g.a_coords()[node];
          amin = std::min(amin, a);
          amax = std::max(amax, a);
          rep.confinement = std::max(rep.confinement, std::abs(a));
        }
      }
      if (amax >= amin) rep.thickness = std::max(rep.thickness, amax - amin + g.da());
    }
  return rep;
}

}  // namespace hgl
