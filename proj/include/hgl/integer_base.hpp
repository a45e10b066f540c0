#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hgl/group.hpp"
#include "hgl/rational.hpp"

namespace hgl {

// Integer lattice base adapted to a rational direction omega: vectors
// k^1..k^{2n-1} span the sublattice orthogonal to omega and k^{2n} is
// parallel to it. The pairings Theta_ij = Im(conj(k^i) k^j) fix the vertical
// period of omega-periodic functions.
struct IntegerBase {
  int n = 1;
  RationalVector omega;                 // length 2n, nonzero
  std::vector<LatticeVector> k;         // 2n vectors; k[2n-1] parallel to omega
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> theta_pairings;
  std::int64_t theta = 1;               // vertical half-period
  std::int64_t q_den = 1;               // k[2n-1] == q_den * omega

  int dim_z() const { return 2 * n; }
  const LatticeVector& k_omega() const { return k.back(); }
  double k_omega_norm() const {
    return std::sqrt(static_cast<double>(k_omega().squaredNorm()));
  }
  Eigen::VectorXd omega_double() const {
    Eigen::VectorXd w(dim_z());
    for (int i = 0; i < dim_z(); ++i) w[i] = omega[i].to_double();
    return w;
  }
  Eigen::VectorXd omega_hat() const { return omega_double().normalized(); }
};

// Builds the base by Gram-Schmidt over the rationals seeded with coordinate
// vectors (lowest index first), clears denominators per vector, and fixes
// signs/order so that some transverse Theta_ij is positive. For n = 1 the
// vertical half-period is set to 1; the pairing Theta_21 is still exposed.
IntegerBase build_integer_base(const RationalVector& omega);

// Checks every structural invariant of the base exactly; throws on failure.
void validate_integer_base(const IntegerBase& base);

}  // namespace hgl
