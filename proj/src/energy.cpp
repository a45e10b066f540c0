#include "hgl/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "hgl/parallel.hpp"

namespace hgl {

namespace {

inline double read_value(const double* v, std::int32_t idx) {
  if (idx >= 0) return v[idx];
  return idx == Grid::kPadLow ? -1.0 : 1.0;
}

std::int64_t floordiv64(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

// Shared per-grid stencil context.
struct Kernel {
  const Grid& g;
  int n, dz, nt, stride;
  double inv2dtau, inv2dalpha;
  std::array<double, 8> inv2ds{};
  const std::int32_t* nbr;
  const double* z;
  const double* zaslope;

  explicit Kernel(const Grid& grid)
      : g(grid),
        n(grid.n()),
        dz(grid.dim_z()),
        nt(grid.num_transverse()),
        stride(2 * (grid.num_transverse() + 2)),
        inv2dtau(0.5 / grid.dtau()),
        inv2dalpha(0.5 / grid.dalpha()),
        nbr(grid.neighbor_data()),
        z(grid.z_coords().data()),
        zaslope(grid.zeta_alpha_slope().data()) {
    for (int j = 0; j < nt; ++j) inv2ds[j] = 0.5 * grid.transverse_res(j);
  }

  // Index-space differences at a node; dper holds the per-unit-s and
  // per-unit-alpha directional derivatives with the shear removed. The flow
  // difference is dropped on the two boundary columns (the stencil would
  // otherwise manufacture a jump against the far-field pad).
  inline void differences(const double* u, std::int64_t node, int ia, double& dt,
                          double* dper) const {
    const std::int32_t* nb = nbr + node * stride;
    dt = (read_value(u, nb[2 * nt + 2]) - read_value(u, nb[2 * nt + 3])) * inv2dtau;
    for (int j = 0; j < nt; ++j) {
      const double d = (read_value(u, nb[2 * j]) - read_value(u, nb[2 * j + 1])) * inv2ds[j];
      dper[j] = d - g.zeta_s_slope(j, ia) * dt;
    }
    const std::int32_t up = nb[2 * nt], dn = nb[2 * nt + 1];
    const double da = (up >= 0 && dn >= 0) ? (u[up] - u[dn]) * inv2dalpha : 0.0;
    dper[nt] = da - zaslope[node] * dt;
  }
};

}  // namespace

PotentialTable tabulate_potential(const Grid& grid, const PotentialSpec& spec) {
  spec.validate(grid.dim_z());
  PotentialTable table;
  table.spec = spec;
  table.q.resize(grid.size());
  Eigen::VectorXd z(grid.dim_z());
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    z = grid.z_coords().row(i).transpose();
    table.q[i] = spec.modulation.value(z);
  }
  return table;
}

double well_value(const PotentialSpec& spec, double q, double u) {
  switch (spec.kind) {
    case PotentialKind::quartic: {
      const double w = 1.0 - u * u;
      return q * w * w;
    }
    case PotentialKind::power_d:
      return q * std::pow(std::max(0.0, 1.0 - u * u), spec.d);
    case PotentialKind::indicator:
      return std::abs(u) < 1.0 ? q : 0.0;
  }
  return 0.0;
}

double well_deriv(const PotentialSpec& spec, double q, double u) {
  if (spec.kind == PotentialKind::quartic) return -4.0 * q * u * (1.0 - u * u);
  if (spec.kind == PotentialKind::indicator)
    throw std::invalid_argument("well_deriv: indicator kind has no derivative");
  if (spec.d < 1.0) u = std::clamp(u, -1.0 + 1e-9, 1.0 - 1e-9);
  return -2.0 * spec.d * q * u * std::pow(std::max(0.0, 1.0 - u * u), spec.d - 1.0);
}

Eigen::VectorXd horizontal_gradient(const Field& field, std::int64_t node) {
  const Grid& g = *field.grid;
  Kernel k(g);
  const double* u = field.values.data();
  double dt;
  std::array<double, 8> dper{};
  k.differences(u, node, g.ia_of(node), dt, dper.data());

  const auto& vinv = g.vinv();
  Eigen::VectorXd gz = Eigen::VectorXd::Zero(g.dim_z());
  for (int r = 0; r < g.dim_z(); ++r)
    for (int c = 0; c < g.dim_z(); ++c) gz[r] += vinv(r, c) * dper[c];

  Eigen::VectorXd out(g.dim_z());
  const int n = g.n();
  for (int kk = 0; kk < n; ++kk) {
    out[kk] = gz[kk] + 2.0 * g.z_coords()(node, n + kk) * dt;         // X_k
    out[n + kk] = gz[n + kk] - 2.0 * g.z_coords()(node, kk) * dt;     // Y_k
  }
  return out;
}

Eigen::ArrayXXd horizontal_gradient_all(const Field& field) {
  const Grid& g = *field.grid;
  Eigen::ArrayXXd out(g.size(), g.dim_z());
  Kernel k(g);
  const double* u = field.values.data();
  const auto& vinv = g.vinv();
  const int n = g.n(), dz = g.dim_z();
  const int ntau = g.vertical_res(), na = g.along_res();
  const std::int64_t ncols = g.size() / ntau;
  parallel_for(ncols, [&](std::int64_t c0, std::int64_t c1) {
    std::array<double, 8> dper{};
    std::array<double, 8> gz{};
    for (std::int64_t col = c0; col < c1; ++col) {
      const int ia = static_cast<int>(col % na);
      std::int64_t node = col * ntau;
      for (int it = 0; it < ntau; ++it, ++node) {
        double dt;
        k.differences(u, node, ia, dt, dper.data());
        for (int r = 0; r < dz; ++r) {
          double acc = 0;
          for (int c = 0; c < dz; ++c) acc += vinv(r, c) * dper[c];
          gz[r] = acc;
        }
        for (int kk = 0; kk < n; ++kk) {
          out(node, kk) = gz[kk] + 2.0 * k.z[node * dz + n + kk] * dt;
          out(node, n + kk) = gz[n + kk] - 2.0 * k.z[node * dz + kk] * dt;
        }
      }
    }
  });
  return out;
}

void node_energy_split(const Field& field, const PotentialTable& pot,
                       Eigen::ArrayXd& dirichlet, Eigen::ArrayXd& potential) {
  const Grid& g = *field.grid;
  Eigen::ArrayXXd grad = horizontal_gradient_all(field);
  dirichlet = grad.square().rowwise().sum();
  potential.resize(g.size());
  const double* u = field.values.data();
  for (std::int64_t i = 0; i < g.size(); ++i)
    potential[i] = well_value(pot.spec, pot.q[i], u[i]);
}

double pairwise_sum(const double* data, std::int64_t n) {
  if (n <= 32) {
    double s = 0;
    for (std::int64_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::int64_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

EnergyBreakdown energy_total(const Field& field, const PotentialTable& pot, EnergyWeights w) {
  Eigen::ArrayXd dir, potv;
  node_energy_split(field, pot, dir, potv);
  const double vol = field.grid->node_volume();
  EnergyBreakdown e;
  e.dirichlet = w.dirichlet * vol * pairwise_sum(dir.data(), dir.size());
  e.potential = w.potential * vol * pairwise_sum(potv.data(), potv.size());
  e.total = e.dirichlet + e.potential;
  return e;
}

EnergyBreakdown energy_total(const Field& field, const PotentialSpec& spec, EnergyWeights w) {
  return energy_total(field, tabulate_potential(*field.grid, spec), w);
}

Field el_gradient(const Field& field, const PotentialTable& pot, EnergyWeights w) {
  const Grid& g = *field.grid;
  if (!pot.spec.differentiable() && w.potential != 0.0)
    throw std::invalid_argument("el_gradient: indicator potential has no derivative");
  const int n = g.n(), dz = g.dim_z(), nt = g.num_transverse();
  const int naxes = nt + 2;

  Kernel k(g);
  const double* u = field.values.data();
  const auto& vinv = g.vinv();

  // Per-axis accumulators q_axis = sum_comp c_{comp,axis} * g_comp.
  Eigen::ArrayXXd q(g.size(), naxes);
  const int ntau = g.vertical_res(), na = g.along_res();
  const std::int64_t ncols = g.size() / ntau;
  parallel_for(ncols, [&](std::int64_t c0, std::int64_t c1) {
    std::array<double, 8> dper{};
    std::array<double, 8> comp{};
    for (std::int64_t col = c0; col < c1; ++col) {
      const int ia = static_cast<int>(col % na);
      std::int64_t node = col * ntau;
      for (int it = 0; it < ntau; ++it, ++node) {
        double dt;
        k.differences(u, node, ia, dt, dper.data());
        for (int r = 0; r < dz; ++r) {
          double acc = 0;
          for (int c = 0; c < dz; ++c) acc += vinv(r, c) * dper[c];
          comp[r] = acc;
        }
        double wsum = 0.0;  // sum_k (2 y_k gX_k - 2 x_k gY_k)
        for (int kk = 0; kk < n; ++kk) {
          comp[kk] += 2.0 * k.z[node * dz + n + kk] * dt;
          comp[n + kk] -= 2.0 * k.z[node * dz + kk] * dt;
          wsum += 2.0 * k.z[node * dz + n + kk] * comp[kk] -
                  2.0 * k.z[node * dz + kk] * comp[n + kk];
        }
        double qt = wsum;
        const bool edge = ia == 0 || ia == na - 1;
        for (int m = 0; m < dz; ++m) {
          double acc = 0;
          for (int r = 0; r < dz; ++r) acc += vinv(r, m) * comp[r];
          const double slope = m < nt ? g.zeta_s_slope(m, ia) : k.zaslope[node];
          qt -= slope * acc;
          // The flow-difference rows vanish on the boundary columns, so the
          // transpose must read them as zero there.
          q(node, m) = (m == dz - 1 && edge) ? 0.0 : acc;
        }
        q(node, dz) = qt;
      }
    }
  });

  // el = 2 w_d * sum_axis D_axis^T q_axis + w_p * F_u, with zero pads in the
  // transpose along the flow axis.
  Field out(field.grid);
  const std::int32_t* nb = g.neighbor_data();
  const int stride = 2 * naxes;
  parallel_for(g.size(), [&](std::int64_t n0, std::int64_t n1) {
    for (std::int64_t node = n0; node < n1; ++node) {
      const std::int32_t* row = nb + node * stride;
      double acc = 0;
      for (int ax = 0; ax < naxes; ++ax) {
        const std::int32_t up = row[2 * ax];
        const std::int32_t dn = row[2 * ax + 1];
        const double qm = dn >= 0 ? q(dn, ax) : 0.0;
        const double qp = up >= 0 ? q(up, ax) : 0.0;
        const double inv2d = ax < nt ? k.inv2ds[ax] : (ax == nt ? k.inv2dalpha : k.inv2dtau);
        acc += (qm - qp) * inv2d;
      }
      const double fu =
          w.potential != 0.0 ? w.potential * well_deriv(pot.spec, pot.q[node], u[node]) : 0.0;
      out.values[node] = 2.0 * w.dirichlet * acc + fu;
    }
  });
  return out;
}

Field el_gradient(const Field& field, const PotentialSpec& spec, EnergyWeights w) {
  return el_gradient(field, tabulate_potential(*field.grid, spec), w);
}

RingPrefix::RingPrefix(const Grid& grid, const Eigen::ArrayXd& per_node)
    : ntau(grid.vertical_res()) {
  const std::int64_t cols = grid.size() / ntau;
  prefix.resize(cols * (ntau + 1));
  for (std::int64_t c = 0; c < cols; ++c) {
    const std::int64_t pcol = c * (ntau + 1);
    prefix[pcol] = 0;
    for (std::int64_t i = 0; i < ntau; ++i)
      prefix[pcol + i + 1] = prefix[pcol + i] + per_node[c * ntau + i];
  }
}

double RingPrefix::range_sum(std::int64_t column_flat, std::int64_t twist, std::int64_t ilo,
                             std::int64_t ihi) const {
  if (ihi < ilo) return 0.0;
  const std::int64_t pcol = (column_flat / ntau) * (ntau + 1);
  const std::int64_t len = ihi - ilo + 1;
  const std::int64_t full = len / ntau;
  const std::int64_t rem = len % ntau;
  double s = static_cast<double>(full) * prefix[pcol + ntau];
  if (rem > 0) {
    std::int64_t start = (ilo + twist) % ntau;
    if (start < 0) start += ntau;
    if (start + rem <= ntau) {
      s += prefix[pcol + start + rem] - prefix[pcol + start];
    } else {
      s += prefix[pcol + ntau] - prefix[pcol + start];
      s += prefix[pcol + start + rem - ntau];
    }
  }
  return s;
}

void for_each_ball_column(
    const Grid& grid, const KoranyiBall& ball,
    const std::function<bool(std::int64_t, std::int64_t, std::int64_t, std::int64_t)>& fn) {
  const int dz = grid.dim_z();
  const int nt = grid.num_transverse();
  const double r = ball.radius;
  const GroupPoint& c = ball.center;
  if (c.dim_z() != dz) throw std::invalid_argument("ball scan: dimension mismatch");

  // The ball must stay within the covered a-extent.
  const Eigen::VectorXd ccoef = grid.k_inverse() * c.z;
  const double a_center = ccoef[dz - 1] * grid.k_omega_norm();
  const double half = 0.5 * grid.da();
  if (a_center - r < grid.a_min() - half || a_center + r > grid.a_max() + half)
    throw std::runtime_error("ball scan: ball leaves the computational extent along the flow");

  const auto& kmat = grid.k_matrix();
  const auto& th = grid.base().theta_pairings;
  const int p = grid.spec().p;
  const double r2 = r * r, r4 = r2 * r2;

  // Extended transverse index ranges from the orthogonality of the base.
  std::array<std::int64_t, 8> elo{}, ehi{};
  for (int j = 0; j < nt; ++j) {
    const double kn = std::sqrt(static_cast<double>(grid.base().k[j].squaredNorm()));
    const double halfwidth = r / (p * kn);  // in s-units
    const int nsj = grid.transverse_res(j);
    elo[j] = static_cast<std::int64_t>(std::floor((ccoef[j] - halfwidth + 0.5) * nsj)) - 1;
    ehi[j] = static_cast<std::int64_t>(std::ceil((ccoef[j] + halfwidth + 0.5) * nsj)) + 1;
  }
  const double alpha_c = ccoef[dz - 1];
  const double ralpha = r / grid.k_omega_norm();
  int ia_lo = static_cast<int>(std::floor((alpha_c - ralpha) / grid.dalpha())) + grid.center_a() - 1;
  int ia_hi = static_cast<int>(std::ceil((alpha_c + ralpha) / grid.dalpha())) + grid.center_a() + 1;
  ia_lo = std::max(ia_lo, 0);
  ia_hi = std::min(ia_hi, grid.along_res() - 1);

  const std::int64_t ntau = grid.vertical_res();
  const double ptheta = p * static_cast<double>(grid.base().theta);

  // Odometer over the extended transverse box.
  std::array<std::int64_t, 8> e{};
  for (int j = 0; j < nt; ++j) e[j] = elo[j];
  Eigen::VectorXd z(dz);
  while (true) {
    // Base indices, wraps, and the column part of the twist.
    std::array<std::int64_t, 8> base{}, wraps{};
    for (int j = 0; j < nt; ++j) {
      const std::int64_t nsj = grid.transverse_res(j);
      wraps[j] = floordiv64(e[j], nsj);
      base[j] = e[j] - wraps[j] * nsj;
    }
    std::int64_t ts = 0;
    for (int j = 0; j < nt; ++j) ts = ts * grid.transverse_res(j) + base[j];

    for (int ia = ia_lo; ia <= ia_hi; ++ia) {
      const double alpha = (ia - grid.center_a()) * grid.dalpha();
      z.setZero();
      double shear = 0.0;
      for (int j = 0; j < nt; ++j) {
        const double sj = -0.5 + static_cast<double>(e[j]) / grid.transverse_res(j);
        z += (p * sj) * kmat.col(j);
        shear += p * sj * static_cast<double>(th(dz - 1, j));
      }
      z += alpha * kmat.col(dz - 1);
      const double rho2 = (z - c.z).squaredNorm();
      if (rho2 * rho2 > r4) continue;
      const double hgt = std::sqrt(r4 - rho2 * rho2);
      const double tc = c.t + 2.0 * symplectic_pairing(c.z, z);
      const double zeta = 2.0 * alpha * shear;
      // Extended tau index range covering [tc-hgt, tc+hgt].
      const double lo = (tc - hgt - zeta + ptheta) / grid.dtau();
      const double hi = (tc + hgt - zeta + ptheta) / grid.dtau();
      const std::int64_t ilo = static_cast<std::int64_t>(std::ceil(lo - 1e-12));
      const std::int64_t ihi = static_cast<std::int64_t>(std::floor(hi + 1e-12));
      if (ihi < ilo) continue;

      std::int64_t twist = 0;
      for (int j = 0; j < nt; ++j) {
        if (wraps[j] == 0) continue;
        std::int64_t w = grid.twist_A(j) * (ia - grid.center_a()) + grid.twist_E(j);
        for (int m = 0; m < nt; ++m) w += grid.twist_C(j, m) * base[m];
        twist += wraps[j] * w;
      }
      if (!fn((ts * grid.along_res() + ia) * ntau, twist, ilo, ihi)) return;
    }

    int j = 0;
    for (; j < nt; ++j) {
      if (++e[j] <= ehi[j]) break;
      e[j] = elo[j];
    }
    if (j == nt) break;
  }
}

EnergyBreakdown energy_in_ball(const Field& field, const PotentialSpec& spec,
                               const KoranyiBall& ball, EnergyWeights w) {
  const Grid& g = *field.grid;
  PotentialTable pot = tabulate_potential(g, spec);
  Eigen::ArrayXd dir, potv;
  node_energy_split(field, pot, dir, potv);
  RingPrefix dir_prefix(g, dir);
  RingPrefix pot_prefix(g, potv);

  double sdir = 0, spot = 0;
  for_each_ball_column(g, ball,
                       [&](std::int64_t col, std::int64_t twist, std::int64_t ilo,
                           std::int64_t ihi) {
                         sdir += dir_prefix.range_sum(col, twist, ilo, ihi);
                         spot += pot_prefix.range_sum(col, twist, ilo, ihi);
                         return true;
                       });

  EnergyBreakdown e;
  e.dirichlet = w.dirichlet * g.node_volume() * sdir;
  e.potential = w.potential * g.node_volume() * spot;
  e.total = e.dirichlet + e.potential;
  e.region = ball;
  return e;
}

std::pair<double, double> kohn_laplacian_radial_check(const RadialFunction& f,
                                                      const GroupPoint& xi, double h) {
  const double rho = koranyi_gauge(xi);
  if (!(rho > 1e-12))
    throw std::invalid_argument("kohn_laplacian_radial_check: gauge vanishes at xi");
  const int dz = xi.dim_z();
  const int n = dz / 2;
  const double q = 2.0 * (n + 1);
  const double zr = xi.z.norm() / rho;
  const double analytic = zr * zr * (f.ddv(rho) + (q - 1.0) / rho * f.dv(rho));

  double fd = 0.0;
  const double center = f.v(rho);
  Eigen::VectorXd step(dz);
  for (int dir = 0; dir < dz; ++dir) {
    step.setZero();
    step[dir] = h;
    const GroupPoint plus = group_mul(GroupPoint(step, 0.0), xi);
    step[dir] = -h;
    const GroupPoint minus = group_mul(GroupPoint(step, 0.0), xi);
    fd += f.v(koranyi_gauge(plus)) + f.v(koranyi_gauge(minus)) - 2.0 * center;
  }
  return {analytic, fd / (h * h)};
}

}  // namespace hgl
