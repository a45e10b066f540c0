#pragma once

#include <cstdint>
#include <vector>

#include "hgl/cell.hpp"
#include "hgl/energy.hpp"
#include "hgl/potential.hpp"

namespace hgl {

struct SolveConfig {
  int max_iters = 50000;
  double tol = 1e-5;   // sup-norm of the projected step
  double eta0 = 1.0;   // initial step; backtracking tunes it
  std::uint64_t seed = 1;
  bool d0_mode = false;  // obstacle treatment of the indicator well
  bool record_trace = true;
  int refine_max_passes = 25;
  double refine_tol = 1e-9;
};

struct TraceRow {
  int iteration = 0;
  double dirichlet = 0, potential = 0, total = 0;
  double step = 0;
};

struct MinimizerBundle {
  Field field;
  EnergyBreakdown energy;
  int iterations = 0;
  bool converged = false;
  int refinement_passes = 0;
  std::vector<TraceRow> trace;
};

// The ramp competitor clamp(4 omega_hat . z); feasible for every M >= 1/4.
Field init_ramp(std::shared_ptr<const Grid> grid);

// Clamp to [-1,1] and enforce the slab constraints u >= 1-delta on
// {a >= M}, u <= -1+delta on {a <= -M}. Idempotent.
void project_constraints_inplace(Field& field);
Field project_constraints(const Field& field);
double feasibility_violation(const Field& field);

// Projected gradient descent with backtracking halving; stops when the
// sup-norm of the projected step falls below tol. The energy trace along
// accepted steps is non-increasing (Dirichlet part only in d0 mode, where
// the indicator term has no derivative and the clamp realizes the
// variational inequality).
MinimizerBundle minimize(const Field& start, const PotentialSpec& spec,
                         const SolveConfig& cfg, EnergyWeights w = {});

Field min_combine(const Field& u, const Field& v);
Field max_combine(const Field& u, const Field& v);

// Grid-commensurate lattice vectors with |k|_inf <= kmax and omega . k >= 0.
std::vector<LatticeVector> birkhoff_generators(const Grid& grid, int kmax = 2);

// Iterates u <- min(u, T_k u) over the generators and over the exact
// vertical shifts, re-minimizing after each sweep, until a sweep is a
// fixed point. The result is the computable stand-in for the minimal
// minimizer (referred to as the refined minimizer).
MinimizerBundle birkhoff_refine(const MinimizerBundle& bundle, const PotentialSpec& spec,
                                const SolveConfig& cfg,
                                const std::vector<LatticeVector>& generators,
                                EnergyWeights w = {});

struct EnlargeReport {
  double sup_diff = 0;
  double threshold = 0;
  bool pass = false;
};

// Re-solves with the slab half-width M + a_extra from the same start and
// compares; with M above the confinement threshold the constraint never
// binds and the two runs coincide.
EnlargeReport enlarge_check(const MinimizerBundle& bundle, const PotentialSpec& spec,
                            const SolveConfig& cfg, double a_extra, EnergyWeights w = {});

// Best rational approximation with denominator <= cap (continued-fraction
// convergents).
Rational best_rational(double x, std::int64_t max_den);

struct SequencePolicy {
  double M = 10.0;
  double L = 12.0;
  double delta = 0.1;
  int p = 1;
  double target_da = 0.08;
  int ntau_min = 8;
  int ns_min = 8;
  int ntau_full_audit_cap = 64;  // match N_tau to the lattice when feasible
  double window_halfwidth = 2.0;
  double window_t = 1.0;
  int window_samples = 9;
  int kmax = 2;
};

struct SequenceMember {
  RationalVector omega;
  std::int64_t denominator = 0;
  MinimizerBundle bundle;
};

struct SequenceReport {
  std::vector<SequenceMember> members;
  std::vector<double> window_sup_diffs;  // consecutive pairs
};

// Solves the constrained problem for the best rational approximations of an
// (irrational) direction and measures locally-uniform convergence on a fixed
// compact window.
SequenceReport rational_sequence_solve(const Eigen::VectorXd& omega_target,
                                       const std::vector<std::int64_t>& denominators,
                                       const PotentialSpec& spec, const SolveConfig& cfg,
                                       const SequencePolicy& policy);

// Picks commensurate resolutions for a direction under the policy.
GridResolution plan_resolution(const IntegerBase& base, const SequencePolicy& policy);

struct GammaMember {
  int scale = 1;
  MinimizerBundle bundle;
  double interface_thickness = 0;
  double confinement_width = 0;
};

struct GammaReport {
  std::vector<GammaMember> members;
};

// N-scaled functional (1/N)|grad_H u|^2 + N Q (1-u^2)^2 with Q = alpha^2;
// sharpening interfaces as N grows.
GammaReport gamma_sequence_solve(const ModulationSpec& alpha, const std::vector<int>& scales,
                                 const CellSpec& cell, const GridResolution& res,
                                 const SolveConfig& cfg);

}  // namespace hgl
