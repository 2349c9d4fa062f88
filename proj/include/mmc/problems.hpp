#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmc/fem.hpp"
#include "mmc/geometry.hpp"
#include "mmc/mma.hpp"

namespace mmc {

enum class Edge { Left, Right, Bottom, Top };

/// Which displacement components a support restrains.
enum class Restraint { X, Y, XY };

/// Either every node on a domain edge or the node nearest to a point.
struct Support {
  std::optional<Edge> edge;
  Point point;
  Restraint restraint = Restraint::XY;

  bool operator==(const Support&) const = default;
};

struct LoadSpec {
  Point at;
  double fx = 0.0;
  double fy = 0.0;

  bool operator==(const LoadSpec&) const = default;
};

enum class MirrorAxis { None, Vertical, Horizontal };

struct ProblemSpec {
  std::string name;
  double width = 2.0;
  double height = 1.0;
  int nx = 100;
  int ny = 50;
  std::vector<Support> supports;
  std::vector<LoadSpec> loads;
  double volume_fraction_max = 0.5;
  /// Mirror plane of the full structure when only half of it is modelled.
  MirrorAxis symmetry = MirrorAxis::None;

  bool operator==(const ProblemSpec&) const = default;

  void validate() const;
  double area() const { return width * height; }
  double volume_budget() const { return volume_fraction_max * area(); }
};

enum class ShortBeamLoad { A, B };

/// 2x1 cantilever clamped on the left, unit downward load at mid-right (A)
/// or bottom-right (B), 100x50 mesh, volume fraction 0.5.
ProblemSpec short_beam_problem(ShortBeamLoad load);

/// Right half of the MBB beam: 3x1 domain, 120x40 mesh, symmetry rollers on
/// the left edge, vertical support at the bottom-right corner, unit downward
/// load at the top-left corner, volume fraction 0.4.
ProblemSpec mbb_problem();

Mesh mesh_for(const ProblemSpec& spec);

/// Point loads snap to the nearest mesh node.
BoundaryConditions boundary_conditions_for(const ProblemSpec& spec, const Mesh& mesh);

/// Optimization box for (x0, y0, L, t, p) of every component:
///   x0 in [0, W], y0 in [0, H], L in [0.02 max(W,H), diag], t in [0.01, H/2],
///   p in [-0.995, 0.995].
/// `move_fraction` of each range is the per-iteration move limit.
MmaBounds design_bounds(const ProblemSpec& spec, std::size_t component_count, double move_fraction);

/// Crossed pairs of components centered in a cells_x by cells_y grid, one
/// pair per cell with sin angles +/-angle_p. Each bar is 0.9 * length_scale
/// times the longest bar of that angle fitting in the cell (the cell diagonal
/// for 45 degrees in a square cell); length_scale > 1/0.9 makes neighbouring
/// pairs touch. The common thickness is found by
/// bisection so that the Heaviside volume of the layout matches the volume
/// budget times `volume_target` (which must lie in [0.8, 1.2]).
/// Throws std::invalid_argument when `expected_count` is given and differs.
std::vector<Component> grid_initial_design(int cells_x, int cells_y, const ProblemSpec& spec,
                                           double angle_p, const Regularization& reg,
                                           std::optional<std::size_t> expected_count = std::nullopt,
                                           double volume_target = 1.0, double length_scale = 1.0);

}  // namespace mmc
