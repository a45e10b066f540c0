#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace hgl {

// Ambient Heisenberg group H^n: points (z, t) in R^{2n+1} with
// z = (x_1..x_n, y_1..y_n) identified with a point of C^n via
// z_k = x_k + i y_k. The homogeneous dimension Q = 2(n+1) governs
// ball-volume scaling.
struct GroupContext {
  int n = 1;

  explicit GroupContext(int n_) : n(n_) {
    if (n < 1) throw std::invalid_argument("GroupContext: n must be >= 1");
  }
  int dim_z() const { return 2 * n; }
  int hom_dim() const { return 2 * (n + 1); }
};

struct GroupPoint {
  Eigen::VectorXd z;  // layout (x_1..x_n, y_1..y_n)
  double t = 0.0;

  GroupPoint() = default;
  GroupPoint(Eigen::VectorXd z_, double t_) : z(std::move(z_)), t(t_) {}
  int dim_z() const { return static_cast<int>(z.size()); }
};

using LatticeVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

GroupPoint group_origin(const GroupContext& ctx);

// Im(conj(a) . b) under the componentwise complex identification; the
// symplectic pairing that twists vertical coordinates under translation.
double symplectic_pairing(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
std::int64_t theta_pairing(const LatticeVector& ki, const LatticeVector& kj);

GroupPoint group_mul(const GroupPoint& a, const GroupPoint& b);
GroupPoint group_inv(const GroupPoint& a);

// Closed-form product (K^(l),0) o ... o (K^(1),0) o xi.
GroupPoint iterated_action(const std::vector<Eigen::VectorXd>& ks, const GroupPoint& xi);

double koranyi_gauge(const GroupPoint& xi);
double koranyi_dist(const GroupPoint& a, const GroupPoint& b);

struct KoranyiBall {
  GroupPoint center;
  double radius = 0.0;

  KoranyiBall() = default;
  KoranyiBall(GroupPoint c, double r) : center(std::move(c)), radius(r) {
    if (!(radius > 0)) throw std::invalid_argument("KoranyiBall: radius must be positive");
  }
};

// Monte Carlo estimate of the Lebesgue measure of a Koranyi ball; measure is
// translation invariant so the sampling box sits at the origin. Reproducible
// for a fixed seed across platforms (no std::uniform_real_distribution).
double ball_volume_estimate(const KoranyiBall& ball, std::int64_t samples,
                            std::uint64_t seed);

}  // namespace hgl
