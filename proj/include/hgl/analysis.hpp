#pragma once

#include <cstdint>
#include <vector>

#include "hgl/cell.hpp"
#include "hgl/energy.hpp"

namespace hgl {

// Nodes with |u| <= theta.
std::vector<std::int64_t> level_set(const Field& field, double theta);

struct SlabReport {
  double theta = 0;
  double width = 0;      // max |omega_hat . z| over the level set
  double M0_bound = 0;
  bool pass = false;
};

SlabReport slab_width(const Field& field, double theta, double M0_bound);

struct ExponentFit {
  double slope = 0;
  double half_width = 0;  // ~95% confidence half-width
  bool valid = false;
};

struct DensityReport {
  std::vector<double> radii;
  std::vector<double> ball_energies;      // F restricted to B_r
  std::vector<double> suplevel_volumes;   // |{u >= theta} ∩ B_r|
  std::vector<double> sublevel_volumes;   // |{u <= theta} ∩ B_r|
  std::vector<double> band_volumes;       // |{|u| <= theta0} ∩ B_r|
  ExponentFit fit_energy, fit_sup, fit_sub, fit_band;
};

// Ball energies and level-set volumes against the radius, with log-log
// least-squares exponents. The center must sit on the interface
// (|u(center)| <= theta0) unless force_center is set (tests use a pure-phase
// center to pin the zero-energy behaviour).
DensityReport density_profile(const Field& field, const PotentialSpec& spec,
                              const GroupPoint& center, const std::vector<double>& radii,
                              double theta, double theta0, bool force_center = false);

// Sup-distance of the band {|u_eps| <= theta} to its own median plane inside
// a fixed window, for the anisotropic rescaling u_eps(z,t) = u(z/eps, t/eps^2).
std::vector<double> epsilon_rescale_distance(const Field& field,
                                             const std::vector<double>& epsilons,
                                             double theta, double window_halfwidth = 3.0);

struct BirkhoffRow {
  LatticeVector k;
  double omega_dot_k = 0;
  bool tested = false;       // grid-commensurate
  double violation = 0;      // max(0, -min (T_k u - u) sign(omega.k))
  double perp_deviation = 0; // max |T_k u - u| when omega.k == 0
  std::int64_t sublevel_violations = 0;
};

struct BirkhoffReport {
  std::vector<BirkhoffRow> rows;
  double worst_violation = 0;
  double worst_perp_deviation = 0;
  int tested = 0;
  int skipped = 0;
};

// Monotonicity audit under all commensurate lattice translations with
// |k|_inf <= kmax, plus the sublevel-set inclusion on {u < 0}.
BirkhoffReport birkhoff_audit(const Field& field, int kmax);

struct CleanBallReport {
  bool found = false;
  KoranyiBall ball;
  double r0 = 0;
  bool pass = false;
};

// Largest Koranyi ball (geometric radius ladder, centers on nodes) contained
// in {|u| > 1-delta} within the slab |omega_hat . z| <= a_window.
CleanBallReport clean_ball_search(const Field& field, double delta, double a_window,
                                  double r0);

struct Strip {
  double lambda = 0;
  int phase = 0;  // +1 or -1
};

// All grid-resolved lambda in [-M/4, M/4] whose unit-width strip lies in a
// single deep phase.
std::vector<Strip> strip_scan(const Field& field, double delta);

struct InterfaceReport {
  std::int64_t band_nodes = 0;
  double thickness = 0;    // max band extent along omega_hat over columns
  double confinement = 0;  // max |omega_hat . z| over the band
};

InterfaceReport interface_extract(const Field& field, double theta = 0.9);

}  // namespace hgl
