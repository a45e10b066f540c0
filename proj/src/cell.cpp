#include "hgl/cell.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hgl {

namespace {

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if (a % b != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floormod(std::int64_t a, std::int64_t b) { return a - floordiv(a, b) * b; }

// Best rational approximation with bounded denominator (continued fractions);
// used only when a direction has no twist quantum to snap to.
Rational rational_approx(double x, std::int64_t max_den) {
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double v = x;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(v);
    if (fl > 9.0e17) break;
    const std::int64_t a = static_cast<std::int64_t>(fl);
    if (q1 != 0 && a > (max_den - q0) / q1) break;
    const std::int64_t p2 = a * p1 + p0;
    const std::int64_t q2 = a * q1 + q0;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double rem = v - fl;
    if (rem < 1e-15) break;
    v = 1.0 / rem;
  }
  if (q1 == 0) throw std::runtime_error("rational_approx failed");
  return Rational(p1, q1);
}

}  // namespace

void CellSpec::validate() const {
  validate_integer_base(base);
  if (p < 1) throw std::invalid_argument("cell: p must be a positive integer");
  if (!(delta > 0.0 && delta < 0.5))
    throw std::invalid_argument("cell: delta must lie in (0, 1/2)");
  if (!(M >= 10.0)) throw std::invalid_argument("cell: M must be >= 10");
  if (!(L > M)) throw std::invalid_argument("cell: L must exceed M");
}

std::int64_t Grid::flat(const std::vector<int>& s, int ia, int itau) const {
  std::int64_t f = 0;
  for (int j = 0; j < num_transverse(); ++j) f = f * res_.transverse[j] + s[j];
  f = f * res_.along + ia;
  f = f * res_.vertical + itau;
  return f;
}

void Grid::decode(std::int64_t node, std::vector<int>& s, int& ia, int& itau) const {
  itau = static_cast<int>(node % res_.vertical);
  node /= res_.vertical;
  ia = static_cast<int>(node % res_.along);
  node /= res_.along;
  s.resize(num_transverse());
  for (int j = num_transverse() - 1; j >= 0; --j) {
    s[j] = static_cast<int>(node % res_.transverse[j]);
    node /= res_.transverse[j];
  }
}

std::int64_t Grid::reduce_extended(const std::array<std::int64_t, 8>& s_ext, int ia,
                                   std::int64_t itau_ext) const {
  const int nt = num_transverse();
  std::int64_t twist = 0;
  std::array<std::int64_t, 8> base{};
  for (int j = 0; j < nt; ++j) {
    const std::int64_t nsj = res_.transverse[j];
    const std::int64_t wraps = floordiv(s_ext[j], nsj);
    base[j] = s_ext[j] - wraps * nsj;
    if (wraps != 0) {
      std::int64_t w = twist_A_[j] * (ia - center_a_) + twist_E_[j];
      twist += wraps * w;
    }
  }
  // The cross terms use the reduced transverse indices of the *other* axes.
  for (int j = 0; j < nt; ++j) {
    const std::int64_t wraps = floordiv(s_ext[j], static_cast<std::int64_t>(res_.transverse[j]));
    if (wraps == 0) continue;
    for (int m = 0; m < nt; ++m)
      if (twist_C_(j, m) != 0) twist += wraps * twist_C_(j, m) * base[m];
  }
  const std::int64_t itau = floormod(itau_ext + twist, res_.vertical);
  std::int64_t f = 0;
  for (int j = 0; j < nt; ++j) f = f * res_.transverse[j] + base[j];
  f = f * res_.along + ia;
  f = f * res_.vertical + itau;
  return f;
}

double Grid::read_extended(const Eigen::ArrayXd& values,
                           const std::array<std::int64_t, 8>& s_ext, std::int64_t ia,
                           std::int64_t itau_ext) const {
  if (ia < 0) return -1.0;
  if (ia >= res_.along) return 1.0;
  return values[reduce_extended(s_ext, static_cast<int>(ia), itau_ext)];
}

std::int64_t Grid::wrap_index(std::int64_t node, int j, int dir) const {
  std::vector<int> s;
  int ia, itau;
  decode(node, s, ia, itau);
  std::array<std::int64_t, 8> e{};
  for (int m = 0; m < num_transverse(); ++m) e[m] = s[m];
  e[j] += dir > 0 ? res_.transverse[j] : -res_.transverse[j];
  return reduce_extended(e, ia, itau);
}

std::int64_t Grid::twist_count(std::int64_t node, int j) const {
  std::vector<int> s;
  int ia, itau;
  decode(node, s, ia, itau);
  std::int64_t w = twist_A_[j] * (ia - center_a_) + twist_E_[j];
  for (int m = 0; m < num_transverse(); ++m) w += twist_C_(j, m) * s[m];
  return w;
}

void Grid::build_twists() {
  const int nt = num_transverse();
  const int dz = dim_z();
  const auto& th = spec_.base.theta_pairings;
  const Rational p(spec_.p);

  twist_A_.assign(nt, 0);
  twist_E_.assign(nt, 0);
  twist_C_.setZero(nt, nt);

  for (int j = 0; j < nt; ++j) {
    const Rational a = Rational(4) * p * Rational(th(dz - 1, j)) * dalpha_rat_ / dtau_rat_;
    if (!a.is_integer())
      throw std::runtime_error("grid: non-integer wrap twist along direction " +
                               std::to_string(j + 1) + " (got " + a.str() + " dtau steps)");
    twist_A_[j] = a.num();

    Rational e(0);
    for (int m = 0; m < nt; ++m) {
      if (m == j) continue;
      const Rational c =
          Rational(-2) * p * p * Rational(th(j, m)) * Rational(1, res_.transverse[m]) / dtau_rat_;
      if (!c.is_integer())
        throw std::runtime_error(
            "grid: transverse resolutions incommensurate with the pairing Theta(" +
            std::to_string(j + 1) + "," + std::to_string(m + 1) +
            "); twist per step = " + c.str() + " dtau");
      twist_C_(j, m) = c.num();
      const Rational ejm = p * p * Rational(th(j, m)) / dtau_rat_;
      if (!ejm.is_integer())
        throw std::runtime_error("grid: vertical resolution incommensurate with Theta(" +
                                 std::to_string(j + 1) + "," + std::to_string(m + 1) + ")");
      e += ejm;
    }
    twist_E_[j] = e.num();
  }
}

void Grid::build_geometry() {
  const int dz = dim_z();
  const int nt = num_transverse();
  const auto& base = spec_.base;

  kmat_.resize(dz, dz);
  for (int j = 0; j < dz; ++j)
    for (int i = 0; i < dz; ++i) kmat_(i, j) = static_cast<double>(base.k[j][i]);

  k_omega_norm_ = base.k_omega_norm();

  // Direction matrix: rows p*k^j (transverse), then k^{2n} (per unit alpha).
  Eigen::MatrixXd v(dz, dz);
  for (int j = 0; j < nt; ++j) v.row(j) = spec_.p * kmat_.col(j).transpose();
  v.row(dz - 1) = kmat_.col(dz - 1).transpose();
  vinv_ = v.inverse();

  Eigen::MatrixXd kcoef(dz, dz);  // z = kcoef * (s_1..s_{2n-1}, alpha)
  for (int j = 0; j < nt; ++j) kcoef.col(j) = spec_.p * kmat_.col(j);
  kcoef.col(dz - 1) = kmat_.col(dz - 1);
  kinv_ = kcoef.inverse();

  double vol = dtau_d_ * dalpha_d_ * k_omega_norm_;
  for (int j = 0; j < nt; ++j)
    vol *= spec_.p * std::sqrt(static_cast<double>(base.k[j].squaredNorm())) / res_.transverse[j];
  node_volume_ = vol;

  z_coords_.resize(node_count_, dz);
  a_coords_.resize(node_count_);
  t_coords_.resize(node_count_);
  zeta_alpha_slope_.resize(node_count_);
  zeta_s_slope_.assign(nt, std::vector<double>(res_.along, 0.0));

  const auto& th = base.theta_pairings;
  for (int j = 0; j < nt; ++j)
    for (int ia = 0; ia < res_.along; ++ia)
      zeta_s_slope_[j][ia] = 2.0 * spec_.p * (ia - center_a_) * dalpha_d_ *
                             static_cast<double>(th(dz - 1, j));

  std::vector<int> s;
  int ia, itau;
  Eigen::VectorXd z(dz);
  for (std::int64_t node = 0; node < node_count_; ++node) {
    decode(node, s, ia, itau);
    const double alpha = (ia - center_a_) * dalpha_d_;
    z.setZero();
    double shear_sum = 0.0;  // sum_m (p s_m) Theta_{2n,m}
    for (int j = 0; j < nt; ++j) {
      const double sj = -0.5 + static_cast<double>(s[j]) / res_.transverse[j];
      z += (spec_.p * sj) * kmat_.col(j);
      shear_sum += spec_.p * sj * static_cast<double>(th(dz - 1, j));
    }
    z += alpha * kmat_.col(dz - 1);
    const double zeta = 2.0 * alpha * shear_sum;
    const double tau = -spec_.p * static_cast<double>(base.theta) + itau * dtau_d_;
    z_coords_.row(node) = z.transpose();
    a_coords_[node] = alpha * k_omega_norm_;
    t_coords_[node] = tau + zeta;
    zeta_alpha_slope_[node] = 2.0 * shear_sum;
  }
}

void Grid::build_neighbors() {
  const int nt = num_transverse();
  const int naxes = nt + 2;
  nbr_.resize(node_count_, 2 * naxes);

  std::vector<int> s;
  int ia, itau;
  std::array<std::int64_t, 8> e{};
  for (std::int64_t node = 0; node < node_count_; ++node) {
    decode(node, s, ia, itau);
    for (int m = 0; m < nt; ++m) e[m] = s[m];
    for (int j = 0; j < nt; ++j) {
      e[j] = s[j] + 1;
      nbr_(node, 2 * j) = static_cast<std::int32_t>(reduce_extended(e, ia, itau));
      e[j] = s[j] - 1;
      nbr_(node, 2 * j + 1) = static_cast<std::int32_t>(reduce_extended(e, ia, itau));
      e[j] = s[j];
    }
    // Along the flow: pads outside the computational extent.
    nbr_(node, 2 * nt) =
        ia + 1 < res_.along ? static_cast<std::int32_t>(node + res_.vertical) : kPadHigh;
    nbr_(node, 2 * nt + 1) =
        ia - 1 >= 0 ? static_cast<std::int32_t>(node - res_.vertical) : kPadLow;
    // Vertical ring.
    const std::int64_t col = node - itau;
    nbr_(node, 2 * nt + 2) = static_cast<std::int32_t>(col + (itau + 1) % res_.vertical);
    nbr_(node, 2 * nt + 3) =
        static_cast<std::int32_t>(col + (itau - 1 + res_.vertical) % res_.vertical);
  }
}

double Grid::sample_at(const Eigen::ArrayXd& values, const GroupPoint& xi) const {
  const int dz = dim_z();
  const int nt = num_transverse();
  if (xi.dim_z() != dz) throw std::invalid_argument("sample_at: dimension mismatch");

  Eigen::VectorXd coef = kinv_ * xi.z;  // (s_1..s_{2n-1}, alpha)
  const double alpha = coef[dz - 1];
  const auto& th = spec_.base.theta_pairings;
  double shear_sum = 0.0;
  for (int m = 0; m < nt; ++m)
    shear_sum += spec_.p * coef[m] * static_cast<double>(th(dz - 1, m));
  const double zeta = 2.0 * alpha * shear_sum;
  const double tau = xi.t - zeta;

  // Fractional index coordinates.
  std::array<double, 8> x{};
  for (int j = 0; j < nt; ++j) x[j] = (coef[j] + 0.5) * res_.transverse[j];
  const double xa = alpha / dalpha_d_ + center_a_;
  const double xt = (tau + spec_.p * static_cast<double>(spec_.base.theta)) / dtau_d_;

  std::array<std::int64_t, 8> i0{};
  std::array<double, 8> w{};
  for (int j = 0; j < nt; ++j) {
    i0[j] = static_cast<std::int64_t>(std::floor(x[j]));
    w[j] = x[j] - static_cast<double>(i0[j]);
  }
  const std::int64_t ia0 = static_cast<std::int64_t>(std::floor(xa));
  const double wa = xa - static_cast<double>(ia0);
  const std::int64_t it0 = static_cast<std::int64_t>(std::floor(xt));
  const double wt = xt - static_cast<double>(it0);

  const int corners = 1 << (nt + 2);
  double acc = 0.0;
  std::array<std::int64_t, 8> e{};
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    for (int j = 0; j < nt; ++j) {
      const int b = (c >> j) & 1;
      e[j] = i0[j] + b;
      weight *= b ? w[j] : 1.0 - w[j];
    }
    const int ba = (c >> nt) & 1;
    const int bt = (c >> (nt + 1)) & 1;
    weight *= ba ? wa : 1.0 - wa;
    weight *= bt ? wt : 1.0 - wt;
    if (weight == 0.0) continue;
    acc += weight * read_extended(values, e, ia0 + ba, it0 + bt);
  }
  return acc;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << "grid n=" << n() << " p=" << spec_.p << " res=(";
  for (int j = 0; j < num_transverse(); ++j) os << res_.transverse[j] << ",";
  os << res_.along << "," << res_.vertical << ")";
  os << " dalpha=" << dalpha_rat_.str() << " da=" << da() << " dtau=" << dtau_rat_.str()
     << " a in [" << a_min() << "," << a_max() << "]"
     << " nodes=" << node_count_;
  return os.str();
}

std::shared_ptr<const Grid> make_grid(const CellSpec& spec, const GridResolution& res) {
  spec.validate();
  const int nt = 2 * spec.base.n - 1;
  if (static_cast<int>(res.transverse.size()) != nt)
    throw std::invalid_argument("make_grid: need one transverse resolution per direction (" +
                                std::to_string(nt) + ")");
  for (int v : res.transverse)
    if (v < 8) throw std::invalid_argument("make_grid: resolutions must be >= 8 per axis");
  if (res.along < 8 || res.vertical < 8)
    throw std::invalid_argument("make_grid: resolutions must be >= 8 per axis");

  auto grid = std::make_shared<Grid>();
  Grid& g = *grid;
  g.spec_ = spec;
  g.res_ = res;
  g.center_a_ = res.along / 2;

  g.node_count_ = 1;
  for (int v : res.transverse) g.node_count_ *= v;
  g.node_count_ *= res.along;
  g.node_count_ *= res.vertical;
  if (g.node_count_ > (std::int64_t(1) << 31) - 2)
    throw std::invalid_argument("make_grid: grid too large for 32-bit node indices");

  g.dtau_rat_ = Rational(2 * spec.p * spec.base.theta, res.vertical);
  g.dtau_d_ = g.dtau_rat_.to_double();

  // Snap dalpha to the twist quantum so every wrap is an exact re-indexing.
  const double komega = spec.base.k_omega_norm();
  const double dalpha_req = 2.0 * (spec.L / komega) / res.along;
  const int dz = 2 * spec.base.n;
  std::int64_t gt = 0;
  for (int j = 0; j < nt; ++j) gt = gcd64(gt, spec.base.theta_pairings(dz - 1, j));
  if (gt > 0) {
    const Rational quantum = g.dtau_rat_ / Rational(4 * spec.p * gt);
    const double qd = quantum.to_double();
    std::int64_t mult = static_cast<std::int64_t>(std::llround(dalpha_req / qd));
    if (mult < 1) mult = 1;
    const double snapped = static_cast<double>(mult) * qd;
    if (std::abs(snapped - dalpha_req) > 0.05 * dalpha_req + 1e-15)
      throw std::runtime_error(
          "make_grid: requested spacing along the flow is incommensurate with the "
          "vertical twist (quantum " + quantum.str() + ", requested " +
          std::to_string(dalpha_req) + ") and cannot be repaired within 5%");
    g.dalpha_rat_ = quantum * Rational(mult);
  } else {
    g.dalpha_rat_ = rational_approx(dalpha_req, std::int64_t(1) << 20);
  }
  g.dalpha_d_ = g.dalpha_rat_.to_double();

  g.build_twists();
  g.build_geometry();

  if (!(g.a_max() > spec.M && -g.a_min() > spec.M))
    throw std::invalid_argument("make_grid: computational extent does not cover the slab |a| <= M");

  g.build_neighbors();
  return grid;
}

Field vertical_shift(const Field& field, std::int64_t j) {
  const Grid& g = *field.grid;
  const Rational shift = Rational(2 * j) / Rational(2 * g.spec().p * g.base().theta,
                                                    g.vertical_res());
  if (!shift.is_integer())
    throw std::invalid_argument("vertical_shift: 2j is not a multiple of dtau");
  const std::int64_t d = floormod(shift.num(), g.vertical_res());
  Field out(field.grid);
  const int ntau = g.vertical_res();
  for (std::int64_t col = 0; col < g.size(); col += ntau)
    for (int i = 0; i < ntau; ++i)
      out.values[col + i] = field.values[col + (i + d) % ntau];
  return out;
}

TranslatePlan plan_translate(const Grid& grid, const LatticeVector& k) {
  const auto& base = grid.base();
  const int dz = grid.dim_z();
  const int nt = grid.num_transverse();
  if (k.size() != dz) throw std::invalid_argument("translate: lattice vector dimension mismatch");

  // Exact coefficients of k in the orthogonal base.
  std::vector<Rational> c(dz);
  for (int j = 0; j < dz; ++j) {
    std::int64_t num = 0;
    for (int i = 0; i < dz; ++i) num += k[i] * base.k[j][i];
    c[j] = Rational(num, base.k[j].squaredNorm());
  }

  const Rational p(grid.spec().p);
  std::vector<std::int64_t> dis(nt);
  for (int j = 0; j < nt; ++j) {
    const Rational r = c[j] * Rational(grid.transverse_res(j)) / p;
    if (!r.is_integer())
      throw std::invalid_argument("translate: k is incommensurate transversally (direction " +
                                  std::to_string(j + 1) + ", offset " + r.str() + " steps)");
    dis[j] = r.num();
  }
  const Rational dia_r = c[dz - 1] / grid.dalpha_exact();
  if (!dia_r.is_integer())
    throw std::invalid_argument("translate: k is incommensurate along the flow (offset " +
                                dia_r.str() + " steps)");
  const std::int64_t dia = dia_r.num();

  // tau shift of the translated read, as an integer linear form in the node
  // indices: T(node) = Ra*(ia - c_a) + sum_m Rm*i_m + R0.
  const auto& th = base.theta_pairings;
  const Rational& dtau = grid.dtau_exact();
  Rational sum_cm_th(0);  // sum_m c_m Theta_{2n,m}
  for (int m = 0; m < nt; ++m) sum_cm_th += c[m] * Rational(th(dz - 1, m));

  const Rational ra = Rational(-4) * grid.dalpha_exact() * sum_cm_th / dtau;
  std::vector<Rational> rm(nt, Rational(0));
  for (int m = 0; m < nt; ++m) {
    Rational s(0);
    for (int j = 0; j < nt; ++j) s += c[j] * Rational(th(j, m));
    rm[m] = Rational(2) * p * Rational(1, grid.transverse_res(m)) * s / dtau;
  }
  Rational r0 = Rational(-2) * c[dz - 1] * sum_cm_th / dtau;
  for (int j = 0; j < nt; ++j)
    for (int m = 0; m < nt; ++m) r0 -= p * c[j] * Rational(th(j, m)) / dtau;

  std::string bad;
  if (!ra.is_integer()) bad = "column coefficient " + ra.str();
  for (int m = 0; m < nt && bad.empty(); ++m)
    if (!rm[m].is_integer()) bad = "transverse coefficient " + rm[m].str();
  if (bad.empty() && !r0.is_integer()) bad = "offset " + r0.str();
  if (!bad.empty())
    throw std::invalid_argument("translate: k induces a fractional vertical twist (" + bad +
                                " dtau steps)");

  TranslatePlan plan;
  plan.k = k;
  plan.source.resize(grid.size());

  std::vector<int> s;
  int ia, itau;
  std::array<std::int64_t, 8> e{};
  const int na = grid.along_res();
  for (std::int64_t node = 0; node < grid.size(); ++node) {
    grid.decode(node, s, ia, itau);
    const std::int64_t ia2 = ia + dia;
    if (ia2 < 0) {
      plan.source[node] = Grid::kPadLow;
      continue;
    }
    if (ia2 >= na) {
      plan.source[node] = Grid::kPadHigh;
      continue;
    }
    std::int64_t t = ra.num() * (ia - grid.center_a()) + r0.num();
    for (int m = 0; m < nt; ++m) {
      e[m] = s[m] + dis[m];
      t += rm[m].num() * s[m];
    }
    plan.source[node] =
        static_cast<std::int32_t>(grid.reduce_extended(e, static_cast<int>(ia2), itau + t));
  }
  return plan;
}

Field apply_translate(const Field& field, const TranslatePlan& plan) {
  Field out(field.grid);
  const auto& src = plan.source;
  for (std::int64_t i = 0; i < out.values.size(); ++i) {
    const std::int32_t s = src[i];
    out.values[i] = s >= 0 ? field.values[s] : (s == Grid::kPadLow ? -1.0 : 1.0);
  }
  return out;
}

Field translate_field(const Field& field, const LatticeVector& k) {
  return apply_translate(field, plan_translate(*field.grid, k));
}

bool is_commensurate(const Grid& grid, const LatticeVector& k, std::string* why) {
  try {
    plan_translate(grid, k);
    return true;
  } catch (const std::exception& e) {
    if (why) *why = e.what();
    return false;
  }
}

}  // namespace hgl
