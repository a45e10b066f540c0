#include "hgl/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace hgl {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Reduce to [0,1) before multiplying by the frequency so that z and z + k
// produce bit-identical arguments whenever z + k is exact in binary.
double cos_periodic(int freq, double zj) {
  const double frac = zj - std::floor(zj);
  return std::cos(kTwoPi * (static_cast<double>(freq) * frac -
                            std::floor(static_cast<double>(freq) * frac)));
}

}  // namespace

double ModulationSpec::value(const Eigen::VectorXd& z) const {
  double prod = 1.0;
  if (amplitude != 0.0) {
    for (int j = 0; j < z.size(); ++j) {
      const int f = frequency.size() > j ? frequency[j] : 1;
      prod *= cos_periodic(f, z[j]);
    }
  }
  const double base = mean + amplitude * prod;
  return squared ? base * base : base;
}

double ModulationSpec::min_value() const {
  const double base = mean - amplitude;
  return squared ? base * base : base;
}

double ModulationSpec::max_value() const {
  const double base = mean + amplitude;
  return squared ? base * base : base;
}

void ModulationSpec::validate(int dim_z) const {
  if (amplitude < 0) throw std::invalid_argument("modulation: amplitude must be >= 0");
  if (!(mean > amplitude))
    throw std::invalid_argument("modulation: mean must exceed amplitude (positive lower bound)");
  if (frequency.size() != 0 && frequency.size() != dim_z)
    throw std::invalid_argument("modulation: frequency list must have one entry per z-coordinate");
  for (int j = 0; j < frequency.size(); ++j)
    if (frequency[j] < 1)
      throw std::invalid_argument("modulation: frequencies must be positive integers");
}

std::string to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::quartic: return "quartic";
    case PotentialKind::power_d: return "power_d";
    case PotentialKind::indicator: return "indicator";
  }
  return "?";
}

void PotentialSpec::validate(int dim_z) const {
  modulation.validate(dim_z);
  if (d < 0 || d > 2) throw std::invalid_argument("potential: d must lie in [0,2]");
  if (kind == PotentialKind::quartic && d != 2.0)
    throw std::invalid_argument("potential: quartic kind requires d == 2");
  if (kind == PotentialKind::indicator && d != 0.0)
    throw std::invalid_argument("potential: indicator kind requires d == 0");
  if (kind == PotentialKind::power_d && !(d > 0 && d <= 2))
    throw std::invalid_argument("potential: power_d kind requires d in (0,2]");
  if (!(ell > 0 && ell < 1)) throw std::invalid_argument("potential: ell must lie in (0,1)");
}

double potential_eval(const PotentialSpec& spec, const Eigen::VectorXd& z, double u) {
  if (std::abs(u) > 1.0)
    throw std::invalid_argument("potential_eval: |u| must be <= 1");
  const double q = spec.modulation.value(z);
  switch (spec.kind) {
    case PotentialKind::quartic: {
      const double w = 1.0 - u * u;
      return q * w * w;
    }
    case PotentialKind::power_d:
      return q * std::pow(1.0 - u * u, spec.d);
    case PotentialKind::indicator:
      return std::abs(u) < 1.0 ? q : 0.0;
  }
  return 0.0;
}

double potential_eval(const PotentialSpec& spec, const GroupPoint& xi, double u) {
  return potential_eval(spec, xi.z, u);
}

double potential_deriv(const PotentialSpec& spec, const Eigen::VectorXd& z, double u) {
  if (spec.kind == PotentialKind::indicator)
    throw std::invalid_argument("potential_deriv: indicator kind has no derivative");
  if (!(std::abs(u) < 1.0))
    throw std::invalid_argument("potential_deriv: |u| must be < 1");
  const double q = spec.modulation.value(z);
  if (spec.kind == PotentialKind::quartic) return -4.0 * q * u * (1.0 - u * u);
  return -2.0 * spec.d * q * u * std::pow(1.0 - u * u, spec.d - 1.0);
}

double potential_deriv(const PotentialSpec& spec, const GroupPoint& xi, double u) {
  return potential_deriv(spec, xi.z, u);
}

double potential_deriv_clamped(const PotentialSpec& spec, const Eigen::VectorXd& z, double u) {
  if (spec.kind == PotentialKind::indicator)
    throw std::invalid_argument("potential_deriv_clamped: indicator kind has no derivative");
  if (spec.d >= 1.0) {
    const double q = spec.modulation.value(z);
    const double uc = std::clamp(u, -1.0, 1.0);
    if (spec.kind == PotentialKind::quartic) return -4.0 * q * uc * (1.0 - uc * uc);
    return -2.0 * spec.d * q * uc * std::pow(1.0 - uc * uc, spec.d - 1.0);
  }
  const double uc = std::clamp(u, -1.0 + 1e-9, 1.0 - 1e-9);
  return potential_deriv(spec, z, uc);
}

StructuralReport structural_check(const PotentialSpec& spec,
                                  const std::vector<double>& us,
                                  const std::vector<GroupPoint>& xis) {
  if (us.empty() || xis.empty())
    throw std::invalid_argument("structural_check: sample sets must be nonempty");

  StructuralReport rep;
  try {
    spec.validate(static_cast<int>(xis.front().z.size()));
  } catch (const std::exception& e) {
    rep.pass = false;
    rep.failures.emplace_back(e.what());
    return rep;
  }
  rep.inf_F = std::numeric_limits<double>::infinity();
  rep.sup_F = 0.0;
  double g0 = std::numeric_limits<double>::infinity();
  double g05 = std::numeric_limits<double>::infinity();
  double g09 = std::numeric_limits<double>::infinity();
  double growth = std::numeric_limits<double>::infinity();

  auto fail = [&rep](std::string msg) {
    rep.pass = false;
    rep.failures.push_back(std::move(msg));
  };

  for (const auto& xi : xis) {
    for (double u : us) {
      if (std::abs(u) > 1.0) continue;
      const double f = potential_eval(spec, xi, u);
      if (!(f >= 0.0))
        fail("negative value F=" + std::to_string(f) + " at u=" + std::to_string(u));
      rep.inf_F = std::min(rep.inf_F, f);
      rep.sup_F = std::max(rep.sup_F, f);
      const double au = std::abs(u);
      if (au <= 0.0 + 1e-15) g0 = std::min(g0, f);
      if (au <= 0.5) g05 = std::min(g05, f);
      if (au <= 0.9) g09 = std::min(g09, f);
      if (au > spec.ell && au < 1.0) {
        const double denom = std::pow(1.0 - au, spec.d);
        if (denom > 0) growth = std::min(growth, f / denom);
      }
      if (au == 1.0 && f != 0.0) fail("F does not vanish at u=+-1");
      if (au < 1.0 && f == 0.0 && spec.kind != PotentialKind::indicator)
        fail("interior zero of F at u=" + std::to_string(u));
    }
    // Group-periodicity of the coefficient at integer lattice shifts.
    const double q0 = spec.modulation.value(xi.z);
    Eigen::VectorXd shifted = xi.z;
    for (int j = 0; j < shifted.size(); ++j) shifted[j] += (j % 3) + 1;
    if (spec.modulation.value(shifted) != q0)
      fail("modulation not invariant under integer shift");
  }

  if (!std::isfinite(g0)) {
    g0 = std::numeric_limits<double>::infinity();
    for (const auto& xi : xis) g0 = std::min(g0, potential_eval(spec, xi, 0.0));
    g05 = std::min(g05, g0);
    g09 = std::min(g09, g0);
  }
  rep.gamma_theta0 = g0;
  rep.gamma_theta05 = g05;
  rep.gamma_theta09 = g09;
  rep.growth_const = std::isfinite(growth) ? growth : 0.0;
  if (!(g0 > 0)) fail("gamma(0) not positive");
  if (!(g05 > 0)) fail("gamma(0.5) not positive");
  if (!(g09 > 0)) fail("gamma(0.9) not positive");
  if (!(rep.growth_const > 0)) fail("growth constant not positive on (ell,1)");
  if (!std::isfinite(rep.sup_F)) fail("F unbounded on samples");
  return rep;
}

}  // namespace hgl
