#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hgl/group.hpp"
#include "hgl/integer_base.hpp"
#include "hgl/rational.hpp"

namespace hgl {

// Fundamental cell of a direction omega: the lattice box spanned by
// p*k^1..p*k^{2n-1}, flowed along k^{2n}, with vertical period 2*p*theta.
// M is the slab half-width of the constraint (in units of omega_hat . z),
// L the computational half-extent along omega_hat, delta the constraint
// level.
struct CellSpec {
  IntegerBase base;
  int p = 1;
  double M = 10.0;
  double L = 16.0;
  double delta = 0.1;

  void validate() const;
};

struct GridResolution {
  std::vector<int> transverse;  // one entry per transverse direction
  int along = 128;
  int vertical = 8;
};

// Node layout: indices (i_1..i_{2n-1}, i_a, i_tau), flattened with the
// transverse indices slowest and tau fastest. Coordinates:
//   s_j   = -1/2 + i_j / N_j                 in [-1/2, 1/2)
//   alpha = (i_a - c_a) * dalpha             flow parameter along k^{2n}
//   tau   = -p*theta + i_tau * dtau          vertical offset
//   z     = sum_j (p s_j) k^j + alpha k^{2n}
//   t     = tau + zeta(z)
// where zeta is the vertical shear of the flowed cell. A transverse wrap by
// a full period p*k^j re-enters the cell with a tau shift that is an exact
// integer number of dtau steps; those integers are precomputed so that all
// wraps, translations and stencil reads are exact re-indexings.
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXi32 =
    Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Grid {
 public:
  static constexpr std::int32_t kPadLow = -1;   // reads below a-extent: value -1
  static constexpr std::int32_t kPadHigh = -2;  // reads above a-extent: value +1

  const CellSpec& spec() const { return spec_; }
  const IntegerBase& base() const { return spec_.base; }
  int n() const { return spec_.base.n; }
  int dim_z() const { return 2 * n(); }
  int num_transverse() const { return dim_z() - 1; }
  int transverse_res(int j) const { return res_.transverse[j]; }
  int along_res() const { return res_.along; }
  int vertical_res() const { return res_.vertical; }
  std::int64_t size() const { return node_count_; }

  double ds(int j) const { return 1.0 / res_.transverse[j]; }
  double dalpha() const { return dalpha_d_; }
  double dtau() const { return dtau_d_; }
  const Rational& dalpha_exact() const { return dalpha_rat_; }
  const Rational& dtau_exact() const { return dtau_rat_; }
  int center_a() const { return center_a_; }
  double da() const { return dalpha_d_ * k_omega_norm_; }
  double node_volume() const { return node_volume_; }
  double vertical_period() const { return 2.0 * spec_.p * spec_.base.theta; }
  double k_omega_norm() const { return k_omega_norm_; }
  double alpha_min() const { return -center_a_ * dalpha_d_; }
  double alpha_max() const { return (res_.along - 1 - center_a_) * dalpha_d_; }
  double a_min() const { return alpha_min() * k_omega_norm_; }
  double a_max() const { return alpha_max() * k_omega_norm_; }

  std::int64_t flat(const std::vector<int>& s, int ia, int itau) const;
  void decode(std::int64_t node, std::vector<int>& s, int& ia, int& itau) const;

  int ia_of(std::int64_t node) const {
    return static_cast<int>((node / res_.vertical) % res_.along);
  }
  int itau_of(std::int64_t node) const { return static_cast<int>(node % res_.vertical); }

  // Node geometry (precomputed).
  const RowMatrixXd& z_coords() const { return z_coords_; }  // size N x 2n
  const Eigen::VectorXd& a_coords() const { return a_coords_; }
  const Eigen::VectorXd& t_coords() const { return t_coords_; }
  double node_a(std::int64_t node) const { return a_coords_[node]; }
  GroupPoint node_point(std::int64_t node) const {
    return GroupPoint(z_coords_.row(node).transpose(), t_coords_[node]);
  }

  const Eigen::MatrixXd& k_matrix() const { return kmat_; }
  const Eigen::MatrixXd& k_inverse() const { return kinv_; }
  const std::int32_t* neighbor_data() const { return nbr_.data(); }
  std::int64_t twist_A(int j) const { return twist_A_[j]; }
  std::int64_t twist_E(int j) const { return twist_E_[j]; }
  std::int64_t twist_C(int j, int m) const { return twist_C_(j, m); }

  // Reduction of an extended lattice index (transverse indices and the tau
  // index unbounded, i_a in range) to the node carrying its value.
  std::int64_t reduce_extended(const std::array<std::int64_t, 8>& s_ext, int ia,
                               std::int64_t itau_ext) const;

  // Value of the periodic extension, with constant pads beyond the a-extent.
  double read_extended(const Eigen::ArrayXd& values,
                       const std::array<std::int64_t, 8>& s_ext, std::int64_t ia,
                       std::int64_t itau_ext) const;

  // Stencil neighbour (axis 0..2n-2: transverse, 2n-1: along, 2n: vertical).
  std::int32_t neighbor(std::int64_t node, int axis, int dir) const {
    return nbr_(node, 2 * axis + (dir > 0 ? 0 : 1));
  }

  // Full-period transverse wrap: the node representing (+-p k^j, 0) o xi.
  std::int64_t wrap_index(std::int64_t node, int j, int dir) const;

  // Integer tau-twist incurred by a full-period wrap in direction j from the
  // column of `node`.
  std::int64_t twist_count(std::int64_t node, int j) const;

  // Shear slope data used by the differential kernels.
  double zeta_s_slope(int j, int ia) const { return zeta_s_slope_[j][ia]; }
  const Eigen::VectorXd& zeta_alpha_slope() const { return zeta_alpha_slope_; }
  const Eigen::MatrixXd& vinv() const { return vinv_; }

  // Interpolated sample of the periodic extension at an arbitrary point.
  double sample_at(const Eigen::ArrayXd& values, const GroupPoint& xi) const;

  std::string describe() const;

 private:
  friend std::shared_ptr<const Grid> make_grid(const CellSpec&, const GridResolution&);

  void build_geometry();
  void build_twists();
  void build_neighbors();

  CellSpec spec_;
  GridResolution res_;
  std::int64_t node_count_ = 0;
  int center_a_ = 0;

  Rational dalpha_rat_;
  Rational dtau_rat_;
  double dalpha_d_ = 0;
  double dtau_d_ = 0;
  double k_omega_norm_ = 0;
  double node_volume_ = 0;

  // Integer twist linear forms: wrap in direction j from column (ia, i_m)
  // shifts the tau index by A_j*(ia-c_a) + sum_m C_jm*i_m + E_j.
  std::vector<std::int64_t> twist_A_;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> twist_C_;
  std::vector<std::int64_t> twist_E_;

  Eigen::MatrixXd kmat_;  // columns k^1..k^{2n}
  Eigen::MatrixXd vinv_;
  Eigen::MatrixXd kinv_;  // maps z to coefficients (s_1..s_{2n-1}, alpha)

  RowMatrixXd z_coords_;
  Eigen::VectorXd a_coords_;
  Eigen::VectorXd t_coords_;
  Eigen::VectorXd zeta_alpha_slope_;
  std::vector<std::vector<double>> zeta_s_slope_;

  RowMatrixXi32 nbr_;
};

std::shared_ptr<const Grid> make_grid(const CellSpec& spec, const GridResolution& res);

// Scalar values on grid nodes; the object being optimized.
struct Field {
  std::shared_ptr<const Grid> grid;
  Eigen::ArrayXd values;

  Field() = default;
  explicit Field(std::shared_ptr<const Grid> g)
      : grid(std::move(g)), values(Eigen::ArrayXd::Zero(grid->size())) {}
  Field(std::shared_ptr<const Grid> g, Eigen::ArrayXd v)
      : grid(std::move(g)), values(std::move(v)) {}
};

// Re-indexing by the exact vertical translation t -> t + 2j.
Field vertical_shift(const Field& field, std::int64_t j);

// Field of values u((k,0) o xi). k must be commensurate with the grid; reads
// beyond the a-extent return the pad constants. The plan form is cached by
// callers that translate repeatedly.
struct TranslatePlan {
  LatticeVector k;
  Eigen::Array<std::int32_t, Eigen::Dynamic, 1> source;  // node index or pad sentinel
};

TranslatePlan plan_translate(const Grid& grid, const LatticeVector& k);
Field apply_translate(const Field& field, const TranslatePlan& plan);
Field translate_field(const Field& field, const LatticeVector& k);
bool is_commensurate(const Grid& grid, const LatticeVector& k, std::string* why = nullptr);

}  // namespace hgl
