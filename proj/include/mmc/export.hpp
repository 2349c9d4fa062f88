#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmc/fem.hpp"
#include "mmc/geometry.hpp"

namespace mmc {

struct IterationRecord {
  int iteration = 0;
  double compliance = 0.0;
  double volume = 0.0;
  double volume_fraction = 0.0;
  /// V / V_max - 1; feasible when <= 0.
  double constraint_value = 0.0;
  /// Largest change of any normalized design variable since the previous iteration.
  double max_design_change = 0.0;
};

/// Shortest decimal that parses back to the same double.
std::string format_shortest(double value);

inline constexpr const char* kHistoryHeader =
    "iteration,compliance,volume,volume_fraction,constraint_value,max_design_change";
inline constexpr const char* kComponentHeader = "component,x0,y0,L_half,t_half,p";

std::string history_csv(std::span<const IterationRecord> records);
/// Half-length and half-thickness, two decimals, 1-based numbering.
std::string component_table_csv(std::span<const Component> comps);

/// A polyline of the zero level set of phi^s. Contours are closed: the last
/// vertex connects back to the first.
using Contour = std::vector<Point>;

/// Marching squares on the mesh nodes. Outside the domain counts as void, so
/// every contour closes. Saddle cells are resolved by the cell-center value.
std::vector<Contour> extract_zero_contours(std::span<const Component> comps, const Mesh& mesh,
                                           const Regularization& reg);

std::string contour_svg(std::span<const Component> comps, const Mesh& mesh, const Regularization& reg);

/// Corners of the rectangle covered by a component, counterclockwise.
std::array<Point, 4> component_corners(const Component& c);

struct Domain {
  double width = 0.0;
  double height = 0.0;
};

/// Filled rotated rectangles for every component with thickness >= threshold.
std::string cad_svg(std::span<const Component> comps, double threshold, std::optional<Domain> domain = {});

/// File writers; throw std::runtime_error when the file cannot be written.
void export_history_csv(std::span<const IterationRecord> records, const std::filesystem::path& path);
void export_component_table(std::span<const Component> comps, const std::filesystem::path& path);
void export_contour_svg(std::span<const Component> comps, const Mesh& mesh, const Regularization& reg,
                        const std::filesystem::path& path);
void export_cad_svg(std::span<const Component> comps, double threshold, const std::filesystem::path& path,
                    std::optional<Domain> domain = {});

}  // namespace mmc
