#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mmc/config.hpp"
#include "mmc/export.hpp"
#include "mmc/fem.hpp"
#include "mmc/geometry.hpp"
#include "mmc/mma.hpp"
#include "mmc/problems.hpp"

namespace mmc {

/// A config turned into concrete numerical objects.
struct ResolvedProblem {
  ProblemSpec spec;
  Mesh mesh;
  BoundaryConditions bc;
  Material material;
  /// Heaviside used for volume accounting.
  Regularization volume_reg;
  /// Heaviside used for the stiffness interpolation (differs only in alpha).
  Regularization stiffness_reg;
  int cells_x = 0;
  int cells_y = 0;
};

ResolvedProblem resolve_problem(const RunConfig& config);

/// Densities, solve and gradients for one design.
struct Evaluation {
  std::vector<double> densities;
  FemSolution solution;
  double compliance = 0.0;
  double volume = 0.0;
  std::vector<double> d_compliance;
  std::vector<double> d_volume;
};

Evaluation evaluate_design(std::span<const Component> comps, const ResolvedProblem& problem,
                           bool with_gradients = true);

struct RunResult {
  std::vector<Component> initial_design;
  std::vector<Component> final_design;
  std::vector<IterationRecord> history;
  std::size_t design_variable_count = 0;
  bool converged = false;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// analyse -> gradients -> MMA update until the normalized design change
/// stays below convergence_tol for 3 consecutive iterations or
/// max_iterations analyses have run. The final design is the last one
/// analysed, so history.back() describes it. Writes the configured artifacts
/// into config.output_dir when `write_outputs` is set.
RunResult run_optimization(const RunConfig& config, bool write_outputs = true,
                           const IterationCallback& on_iteration = {},
                           std::optional<std::vector<Component>> initial_design = std::nullopt);

/// Writes history.csv, components.csv, contour.svg and cad.svg as configured.
void write_artifacts(const RunConfig& config, const ResolvedProblem& problem, const RunResult& result);

struct GradientCheckReport {
  std::vector<Component> design;
  std::vector<double> analytic_compliance;
  std::vector<double> fd_compliance;
  std::vector<double> analytic_volume;
  std::vector<double> fd_volume;
  double max_rel_error_compliance = 0.0;
  double max_rel_error_volume = 0.0;
};

/// |a - b| / max(|a|, |b|, floor)
double relative_error(double analytic, double reference, double floor = 1e-8);

/// Random 3-component design for the 20x10 cantilever: three jittered,
/// nearly horizontal bars anchored on the clamped edge, the middle one
/// reaching the load. Draws whose component boundary bands cross at a Gauss
/// point are redrawn, since there the min-delta overlap rule differs from the
/// derivative of the max.
std::vector<Component> random_gradcheck_design(const ResolvedProblem& problem, std::uint64_t seed);

/// Compares analytic compliance and volume gradients against central
/// differences with step 1e-5 of each variable's bound range.
GradientCheckReport gradient_check(const RunConfig& config, std::uint64_t seed);

}  // namespace mmc
