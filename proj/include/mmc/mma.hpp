#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mmc {

/// Box bounds and per-iteration move limits, in the caller's units.
struct MmaBounds {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> move_limit;

  void validate(std::size_t n) const;
};

/// Optimizer memory between updates. Asymptotes and previous iterates are
/// stored in variables normalized to [0, 1] by the bounds.
struct MmaState {
  std::vector<double> lower_asymptotes;
  std::vector<double> upper_asymptotes;
  std::vector<double> x_prev;
  std::vector<double> x_prev2;
  int iteration = 0;
};

struct MmaSettings {
  double initial_span = 0.5;
  double expand = 1.2;
  double shrink = 0.7;
  double asymptote_margin = 0.1;  // fraction of the asymptote gap kept clear
  double raa0 = 1e-5;
  double dual_tolerance = 1e-10;
};

/// Dense m x n constraint Jacobian, one row per constraint.
using ConstraintJacobian = std::vector<std::vector<double>>;

struct MmaStep {
  std::vector<double> x;
  MmaState state;
  std::vector<double> multipliers;
  /// Value of each convex approximation g~_i at the new point (g~_i <= 0 up to tolerance).
  std::vector<double> approx_constraints;
};

/// One Method of Moving Asymptotes update for
///   minimize f(x)  s.t.  g_i(x) <= 0,  lower <= x <= upper.
/// Builds the separable convex approximation around x, solves it through its
/// dual, and clamps to bounds, move limits and the asymptote margin.
/// Throws NumericalError for non-finite gradients or an infeasible subproblem.
MmaStep mma_update(std::span<const double> x, double f, std::span<const double> df,
                   std::span<const double> g, const ConstraintJacobian& dg,
                   const MmaBounds& bounds, const MmaState& state,
                   const MmaSettings& settings = {});

}  // namespace mmc
