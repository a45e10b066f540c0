#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hgl/group.hpp"

namespace hgl {

// Periodic coefficient Q(z) = mean + amplitude * prod_j cos(2 pi f_j z_j),
// optionally squared (used when the coefficient enters as a metric factor
// alpha^2). Depends on z only, so invariance under integer lattice shifts is
// automatic and no vertical automorphy factor is needed.
struct ModulationSpec {
  double mean = 1.0;
  double amplitude = 0.0;
  Eigen::VectorXi frequency;  // one positive integer per z-coordinate
  bool squared = false;

  double value(const Eigen::VectorXd& z) const;
  double min_value() const;
  double max_value() const;
  void validate(int dim_z) const;
};

enum class PotentialKind { quartic, power_d, indicator };

std::string to_string(PotentialKind k);

// Double-well family F(xi, u) = Q(z) * (1 - u^2)^d for d in (0, 2]
// (d = 2 is the classical quartic well) and Q(z) * 1_{(-1,1)}(u) for the
// degenerate indicator case d = 0.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::quartic;
  double d = 2.0;
  double ell = 0.25;  // threshold of the growth condition, in (0,1)
  ModulationSpec modulation;

  void validate(int dim_z) const;
  bool differentiable() const { return kind != PotentialKind::indicator; }
};

double potential_eval(const PotentialSpec& spec, const Eigen::VectorXd& z, double u);
double potential_eval(const PotentialSpec& spec, const GroupPoint& xi, double u);

double potential_deriv(const PotentialSpec& spec, const Eigen::VectorXd& z, double u);
double potential_deriv(const PotentialSpec& spec, const GroupPoint& xi, double u);

// Derivative extended to the closed interval [-1,1]; what the discrete
// Euler-Lagrange field uses at clamped nodes. For d < 1 the slope blows up
// at the wells and is capped a hair inside.
double potential_deriv_clamped(const PotentialSpec& spec, const Eigen::VectorXd& z, double u);

struct StructuralReport {
  bool pass = true;
  double inf_F = 0.0;
  double sup_F = 0.0;
  double gamma_theta0 = 0.0;   // inf F over |u| <= 0
  double gamma_theta05 = 0.0;  // inf F over |u| <= 0.5
  double gamma_theta09 = 0.0;  // inf F over |u| <= 0.9
  double growth_const = 0.0;   // inf F / (1-|u|)^d over |u| in (ell,1)
  std::vector<std::string> failures;
};

// Verifies the structural assumptions on sample sets: nonnegativity,
// boundedness, zeros only at +-1, positive gamma(theta), the growth bound,
// and group-periodicity of the modulation at integer shifts.
StructuralReport structural_check(const PotentialSpec& spec,
                                  const std::vector<double>& us,
                                  const std::vector<GroupPoint>& xis);

}  // namespace hgl
