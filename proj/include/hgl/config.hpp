#pragma once

#include <string>
#include <vector>

#include "hgl/cell.hpp"
#include "hgl/potential.hpp"
#include "hgl/solver.hpp"

namespace hgl {

enum class RunMode { solve, refine, analyze, sequence, gamma, verify };

std::string mode_name(RunMode m);

struct RunConfig {
  int n = 1;
  RationalVector omega;        // exact direction (fractions or integers)
  Eigen::VectorXd omega_real;  // sequence-mode target, possibly irrational
  bool omega_is_rational = true;

  PotentialSpec potential;

  double cell_M = 10.0;
  double cell_L = 16.0;
  double cell_delta = 0.1;
  int cell_p = 1;

  GridResolution resolutions{{8}, 128, 8};
  bool resolutions_given = false;

  SolveConfig solver;

  double theta = 0.9;
  double theta0 = 0.9;
  std::vector<double> radii;
  std::vector<double> epsilons{1.0, 0.5, 0.25};
  int kmax = 2;
  double r0 = 1.0;
  double M0_bound = 8.0;
  double a_window = 0.0;  // 0: use M/2

  std::vector<std::int64_t> denominators{2, 5, 13};
  std::vector<int> gamma_scales{1, 2, 4};
  double alpha_mean = 1.0;
  double alpha_amplitude = 0.0;

  std::string field_path;

  RunMode mode = RunMode::solve;

  CellSpec make_cell() const;
};

// Line-oriented "key = value" text with dotted section prefixes and '#'
// comments. Unknown keys, duplicates and out-of-range values are rejected
// with their line numbers.
RunConfig parse_config(const std::string& text);

}  // namespace hgl
