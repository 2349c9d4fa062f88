#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace mmc {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

/// Largest admissible |sin(theta)|. Keeps cos(theta) away from zero, which the
/// orientation derivative divides by.
inline constexpr double kMaxSinAngle = 0.995;

/// Smallest admissible full length or thickness of a component.
inline constexpr double kMinComponentSize = 0.01;

inline constexpr int kDefaultExponent = 6;

/// A rectangular building block. `length` and `thickness` are full extents,
/// `sin_angle` is sin(theta) of the inclination measured counterclockwise
/// from the x axis.
struct Component {
  double x0 = 0.0;
  double y0 = 0.0;
  double length = 1.0;
  double thickness = 0.1;
  double sin_angle = 0.0;

  /// Always the nonnegative root.
  double cos_angle() const;

  /// Throws std::invalid_argument when a size is below kMinComponentSize or
  /// |sin_angle| exceeds kMaxSinAngle.
  void validate() const;
};

/// Number of design variables per component: x0, y0, length, thickness, sin_angle.
inline constexpr std::size_t kVarsPerComponent = 5;

using ComponentGradient = std::array<double, kVarsPerComponent>;

/// Heaviside regularization and superellipse exponent shared by every
/// evaluation of the level-set description.
struct Regularization {
  int exponent = kDefaultExponent;
  double epsilon = 0.04;
  double alpha = 1e-3;

  void validate() const;
};

struct FieldSample {
  std::vector<double> phi_per_component;
  double phi_structure = 0.0;
  std::size_t argmax_component = 0;
};

/// Superellipse topology description function, positive inside the component.
///   phi = 1 - (u / (L/2))^n - (v / (t/2))^n
/// with (u, v) the point expressed in the component's rotated frame.
double component_tdf(const Component& comp, Point x, int exponent = kDefaultExponent);

/// Pointwise max over the component functions; ties go to the lowest index.
/// Throws std::invalid_argument for an empty list.
FieldSample structure_tdf(std::span<const Component> comps, Point x,
                          int exponent = kDefaultExponent);

/// Piecewise-cubic C1 Heaviside with floor `alpha` and half-bandwidth `epsilon`.
double smoothed_heaviside(double phi, const Regularization& reg);

/// Exact derivative of smoothed_heaviside.
double smoothed_delta(double phi, const Regularization& reg);

/// Partial derivatives of component_tdf with respect to
/// (x0, y0, length, thickness, sin_angle) at x.
/// Throws std::domain_error when |sin_angle| > kMaxSinAngle.
ComponentGradient component_tdf_gradient(const Component& comp, Point x,
                                         int exponent = kDefaultExponent);

/// Value and gradient in one pass; used by the sensitivity loops.
double component_tdf_with_gradient(const Component& comp, Point x, int exponent,
                                   ComponentGradient& grad);

/// Flattening between components and the design vector, 5 entries per component.
std::vector<double> flatten(std::span<const Component> comps);
std::vector<Component> unflatten(std::span<const double> design);

}  // namespace mmc
