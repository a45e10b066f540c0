#include "hgl/group.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hgl {

namespace {

void check_same_dim(const GroupPoint& a, const GroupPoint& b, const char* who) {
  if (a.dim_z() != b.dim_z())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace

GroupPoint group_origin(const GroupContext& ctx) {
  return GroupPoint(Eigen::VectorXd::Zero(ctx.dim_z()), 0.0);
}

double symplectic_pairing(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() % 2 != 0)
    throw std::invalid_argument("symplectic_pairing: bad dimensions");
  const int n = static_cast<int>(a.size()) / 2;
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += a[k] * b[n + k] - a[n + k] * b[k];
  return s;
}

std::int64_t theta_pairing(const LatticeVector& ki, const LatticeVector& kj) {
  if (ki.size() != kj.size() || ki.size() % 2 != 0)
    throw std::invalid_argument("theta_pairing: bad dimensions");
  const int n = static_cast<int>(ki.size()) / 2;
  std::int64_t s = 0;
  for (int k = 0; k < n; ++k) s += ki[k] * kj[n + k] - ki[n + k] * kj[k];
  return s;
}

GroupPoint group_mul(const GroupPoint& a, const GroupPoint& b) {
  check_same_dim(a, b, "group_mul");
  return GroupPoint(a.z + b.z, a.t + b.t + 2.0 * symplectic_pairing(a.z, b.z));
}

GroupPoint group_inv(const GroupPoint& a) { return GroupPoint(-a.z, -a.t); }

GroupPoint iterated_action(const std::vector<Eigen::VectorXd>& ks, const GroupPoint& xi) {
  Eigen::VectorXd zsum = Eigen::VectorXd::Zero(xi.dim_z());
  double im = 0.0;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    if (ks[j].size() != xi.z.size())
      throw std::invalid_argument("iterated_action: dimension mismatch");
    im += symplectic_pairing(ks[j], xi.z);
    for (std::size_t m = 0; m < j; ++m) im += symplectic_pairing(ks[j], ks[m]);
    zsum += ks[j];
  }
  return GroupPoint(xi.z + zsum, xi.t + 2.0 * im);
}

double koranyi_gauge(const GroupPoint& xi) {
  const double z2 = xi.z.squaredNorm();
  return std::pow(z2 * z2 + xi.t * xi.t, 0.25);
}

double koranyi_dist(const GroupPoint& a, const GroupPoint& b) {
  check_same_dim(a, b, "koranyi_dist");
  return koranyi_gauge(group_mul(group_inv(a), b));
}

double ball_volume_estimate(const KoranyiBall& ball, std::int64_t samples,
                            std::uint64_t seed) {
  if (samples < 10000)
    throw std::invalid_argument("ball_volume_estimate: need at least 1e4 samples");
  const int dz = ball.center.dim_z();
  const double r = ball.radius;
  const double r2 = r * r;

  std::mt19937_64 rng(seed);
  auto unit = [&rng]() {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
  };

  // Bounding box [-r,r]^{2n} x [-r^2,r^2] contains the ball by gauge
  // homogeneity.
  double box = std::pow(2.0 * r, dz) * (2.0 * r2);
  std::int64_t hits = 0;
  Eigen::VectorXd z(dz);
  const double r4 = r2 * r2;
  for (std::int64_t s = 0; s < samples; ++s) {
    for (int i = 0; i < dz; ++i) z[i] = (2.0 * unit() - 1.0) * r;
    const double t = (2.0 * unit() - 1.0) * r2;
    const double z2 = z.squaredNorm();
    if (z2 * z2 + t * t <= r4) ++hits;
  }
  return box * static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace hgl
