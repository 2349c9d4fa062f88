#include "mmc/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mmc/errors.hpp"

namespace mmc {

double overlap_delta(double phi_component, double phi_structure, const Regularization& reg) {
  return std::min(smoothed_delta(phi_component, reg), smoothed_delta(phi_structure, reg));
}

std::vector<double> weighted_boundary_integral(std::span<const Component> comps, const Mesh& mesh,
                                               const Regularization& reg,
                                               std::span<const double> element_weight) {
  if (comps.empty()) throw std::invalid_argument("sensitivity: design has no components");
  if (element_weight.size() != mesh.element_count()) {
    throw std::invalid_argument("sensitivity: element weight length does not match the mesh");
  }
  const std::size_t nc = comps.size();
  const double gauss_weight = 0.25 * mesh.h() * mesh.h();

  std::vector<double> out(kVarsPerComponent * nc, 0.0);
  std::vector<double> element_acc(kVarsPerComponent * nc, 0.0);
  std::vector<std::size_t> touched;
  std::vector<double> phi(nc);
  ComponentGradient grad{};

  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    touched.clear();
    for (const Point& gp : mesh.gauss_points(e)) {
      double phi_s = 0.0;
      for (std::size_t i = 0; i < nc; ++i) {
        phi[i] = component_tdf(comps[i], gp, reg.exponent);
        phi_s = (i == 0) ? phi[i] : std::max(phi_s, phi[i]);
      }
      if (smoothed_delta(phi_s, reg) == 0.0) continue;
      for (std::size_t i = 0; i < nc; ++i) {
        const double delta = overlap_delta(phi[i], phi_s, reg);
        if (delta == 0.0) continue;
        component_tdf_with_gradient(comps[i], gp, reg.exponent, grad);
        if (std::find(touched.begin(), touched.end(), i) == touched.end()) touched.push_back(i);
        for (std::size_t k = 0; k < kVarsPerComponent; ++k) {
          element_acc[kVarsPerComponent * i + k] += gauss_weight * delta * grad[k];
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::size_t i : touched) {
      for (std::size_t k = 0; k < kVarsPerComponent; ++k) {
        double& acc = element_acc[kVarsPerComponent * i + k];
        out[kVarsPerComponent * i + k] += element_weight[e] * acc;
        acc = 0.0;
      }
    }
  }
  return out;
}

std::vector<double> compliance_gradient(std::span<const Component> comps, const Mesh& mesh,
                                        const Regularization& reg, const FemSolution& solution) {
  if (solution.element_energy.size() != mesh.element_count()) {
    throw std::invalid_argument("compliance_gradient: solution does not belong to this mesh");
  }
  const double inv_area = 1.0 / (mesh.h() * mesh.h());
  std::vector<double> weight(mesh.element_count());
  for (std::size_t e = 0; e < weight.size(); ++e) weight[e] = -solution.element_energy[e] * inv_area;
  return weighted_boundary_integral(comps, mesh, reg, weight);
}

std::vector<double> volume_gradient(std::span<const Component> comps, const Mesh& mesh,
                                    const Regularization& reg) {
  const std::vector<double> weight(mesh.element_count(), 1.0);
  return weighted_boundary_integral(comps, mesh, reg, weight);
}

std::vector<double> finite_difference_oracle(const ScalarObjective& objective,
                                             std::span<const double> design,
                                             std::span<const double> steps,
                                             std::span<const double> lower,
                                             std::span<const double> upper) {
  const std::size_t n = design.size();
  if (steps.size() != n) throw std::invalid_argument("finite_difference_oracle: step count mismatch");
  if ((!lower.empty() && lower.size() != n) || (!upper.empty() && upper.size() != n)) {
    throw std::invalid_argument("finite_difference_oracle: bound length mismatch");
  }
  auto evaluate = [&](std::span<const double> d) {
    const double v = objective(d);
    if (!std::isfinite(v)) throw NumericalError("finite_difference_oracle: objective is not finite");
    return v;
  };

  std::vector<double> work(design.begin(), design.end());
  std::vector<double> grad(n);
  double center = 0.0;
  bool have_center = false;
  for (std::size_t j = 0; j < n; ++j) {
    const double step = steps[j];
    if (!(step > 0.0)) throw std::invalid_argument("finite_difference_oracle: step must be positive");
    const bool can_go_up = upper.empty() || design[j] + step <= upper[j];
    const bool can_go_down = lower.empty() || design[j] - step >= lower[j];
    double fp = 0.0, fm = 0.0, denom = 2.0 * step;
    if (can_go_up) {
      work[j] = design[j] + step;
      fp = evaluate(work);
    }
    if (can_go_down) {
      work[j] = design[j] - step;
      fm = evaluate(work);
    }
    work[j] = design[j];
    if (!can_go_up || !can_go_down) {
      if (!have_center) {
        center = evaluate(design);
        have_center = true;
      }
      if (!can_go_up && !can_go_down) {
        throw std::invalid_argument("finite_difference_oracle: step exceeds the bound interval");
      }
      if (!can_go_up) fp = center;
      if (!can_go_down) fm = center;
      denom = step;
    }
    grad[j] = (fp - fm) / denom;
  }
  return grad;
}

std::vector<double> finite_difference_oracle(const ScalarObjective& objective,
                                             std::span<const double> design, double step) {
  const std::vector<double> steps(design.size(), step);
  return finite_difference_oracle(objective, design, steps);
}

}  // namespace mmc
