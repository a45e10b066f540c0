#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "hgl/cell.hpp"
#include "hgl/potential.hpp"

namespace hgl {

// Relative weights of the two energy terms; the N-scaled functional uses
// (1/N, N), everything else (1, 1).
struct EnergyWeights {
  double dirichlet = 1.0;
  double potential = 1.0;
};

struct EnergyBreakdown {
  double dirichlet = 0.0;
  double potential = 0.0;
  double total = 0.0;
  std::optional<KoranyiBall> region;
};

// Modulation coefficient tabulated once per grid; the inner kernels only see
// the per-node value.
struct PotentialTable {
  PotentialSpec spec;
  Eigen::ArrayXd q;
};

PotentialTable tabulate_potential(const Grid& grid, const PotentialSpec& spec);

double well_value(const PotentialSpec& spec, double q, double u);
double well_deriv(const PotentialSpec& spec, double q, double u);

// Horizontal gradient (X_1 u .. X_n u, Y_1 u .. Y_n u) at one node, centered
// second-order differences chain-ruled through the sheared node map.
Eigen::VectorXd horizontal_gradient(const Field& field, std::int64_t node);

// All nodes at once; column per component.
Eigen::ArrayXXd horizontal_gradient_all(const Field& field);

// |grad_H u|^2 and F(xi,u) per node (unweighted by the quadrature).
void node_energy_split(const Field& field, const PotentialTable& pot,
                       Eigen::ArrayXd& dirichlet, Eigen::ArrayXd& potential);

EnergyBreakdown energy_total(const Field& field, const PotentialTable& pot,
                             EnergyWeights w = {});
EnergyBreakdown energy_total(const Field& field, const PotentialSpec& spec,
                             EnergyWeights w = {});

// Quadrature restricted to the periodic extension inside a Koranyi ball. The
// ball may wrap any number of times transversally and vertically but must not
// leave the computational extent along the flow.
EnergyBreakdown energy_in_ball(const Field& field, const PotentialSpec& spec,
                               const KoranyiBall& ball, EnergyWeights w = {});

// Discrete Euler-Lagrange field 2*w_d*(G^T G u) + w_p*F_u, the gradient of the
// energy under the quadrature inner product; descent directions come from it.
Field el_gradient(const Field& field, const PotentialTable& pot, EnergyWeights w = {});
Field el_gradient(const Field& field, const PotentialSpec& spec, EnergyWeights w = {});

// Deterministic pairwise reduction used by every energy sum.
double pairwise_sum(const double* data, std::int64_t n);

struct RadialFunction {
  std::function<double(double)> v;
  std::function<double(double)> dv;
  std::function<double(double)> ddv;
};

// Cross-validation of the radial form of the Kohn Laplacian: returns
// (analytic value, centered finite-difference value at spacing h).
std::pair<double, double> kohn_laplacian_radial_check(const RadialFunction& f,
                                                      const GroupPoint& xi, double h);

// Enumerates the ball's intersection with the extended lattice column by
// column: fn(base_column_flat, twist, itau_lo, itau_hi) receives the extended
// tau index range and the ring rotation mapping extended indices to stored
// ones; returning false aborts the scan. Throws if the ball leaves the
// a-extent.
void for_each_ball_column(
    const Grid& grid, const KoranyiBall& ball,
    const std::function<bool(std::int64_t, std::int64_t, std::int64_t, std::int64_t)>& fn);

// Prefix sums over the vertical ring of every column; range_sum evaluates
// sums of a per-node quantity over extended tau index ranges in O(1).
struct RingPrefix {
  Eigen::ArrayXd prefix;
  std::int64_t ntau = 0;

  RingPrefix(const Grid& grid, const Eigen::ArrayXd& per_node);
  double range_sum(std::int64_t column_flat, std::int64_t twist, std::int64_t ilo,
                   std::int64_t ihi) const;
};

}  // namespace hgl
