#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mmc/fem.hpp"
#include "mmc/geometry.hpp"

namespace mmc {

struct GradientVector {
  std::vector<double> d_compliance;
  std::vector<double> d_volume;
};

/// Overlap-aware delta weight of component i: min(delta(phi_i), delta(phi^s)).
/// A component whose boundary band lies inside another component's solid
/// region gets zero weight there.
double overlap_delta(double phi_component, double phi_structure, const Regularization& reg);

/// Generic boundary integral
///   out[5i+k] = sum_e weight_e * sum_g (h^2/4) delta_i(phi^s) dphi_i/dd_k
/// on the same Gauss points used for the element densities. Compliance and
/// volume gradients are the two instances in use.
std::vector<double> weighted_boundary_integral(std::span<const Component> comps, const Mesh& mesh,
                                               const Regularization& reg,
                                               std::span<const double> element_weight);

/// dI/dd for I = f^T u. The field weight is minus the element-averaged
/// unit-density strain energy density, which makes this the exact derivative
/// of the discrete compliance whenever the min-delta rule coincides with the
/// derivative of the max (no two component bands crossing at a Gauss point).
std::vector<double> compliance_gradient(std::span<const Component> comps, const Mesh& mesh,
                                        const Regularization& reg, const FemSolution& solution);

std::vector<double> volume_gradient(std::span<const Component> comps, const Mesh& mesh,
                                    const Regularization& reg);

using ScalarObjective = std::function<double(std::span<const double>)>;

/// Central differences of `objective` with per-variable step. When a bound
/// would be crossed the difference falls back to the one-sided quotient on
/// the admissible side. Throws NumericalError on a non-finite evaluation.
std::vector<double> finite_difference_oracle(const ScalarObjective& objective,
                                             std::span<const double> design,
                                             std::span<const double> steps,
                                             std::span<const double> lower = {},
                                             std::span<const double> upper = {});

/// Same step for every variable, no bounds.
std::vector<double> finite_difference_oracle(const ScalarObjective& objective,
                                             std::span<const double> design, double step);

}  // namespace mmc
