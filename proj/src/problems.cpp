#include "mmc/problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mmc {

void ProblemSpec::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("problem domain must have positive size");
  if (nx < 1 || ny < 1) throw std::invalid_argument("problem mesh needs at least one element per direction");
  if (!(volume_fraction_max > 0.0 && volume_fraction_max < 1.0)) {
    throw std::invalid_argument("volume fraction limit must lie in (0, 1)");
  }
  if (supports.empty()) throw std::invalid_argument("problem has no supports");
  constexpr double tol = 1e-12;
  auto inside = [&](Point p) {
    return p.x >= -tol && p.x <= width + tol && p.y >= -tol && p.y <= height + tol;
  };
  for (const auto& load : loads) {
    if (!inside(load.at)) throw std::invalid_argument("load coordinate lies outside the domain");
  }
  for (const auto& s : supports) {
    if (!s.edge && !inside(s.point)) throw std::invalid_argument("support point lies outside the domain");
  }
  // Square elements.
  build_mesh(width, height, nx, ny);
}

ProblemSpec short_beam_problem(ShortBeamLoad load) {
  ProblemSpec spec;
  spec.name = load == ShortBeamLoad::A ? "short_beam_a" : "short_beam_b";
  spec.width = 2.0;
  spec.height = 1.0;
  spec.nx = 100;
  spec.ny = 50;
  spec.supports = {Support{Edge::Left, {}, Restraint::XY}};
  spec.loads = {LoadSpec{{2.0, load == ShortBeamLoad::A ? 0.5 : 0.0}, 0.0, -1.0}};
  spec.volume_fraction_max = 0.5;
  return spec;
}

ProblemSpec mbb_problem() {
  ProblemSpec spec;
  spec.name = "mbb";
  spec.width = 3.0;
  spec.height = 1.0;
  spec.nx = 120;
  spec.ny = 40;
  spec.supports = {Support{Edge::Left, {}, Restraint::X}, Support{std::nullopt, {3.0, 0.0}, Restraint::Y}};
  spec.loads = {LoadSpec{{0.0, 1.0}, 0.0, -1.0}};
  spec.volume_fraction_max = 0.4;
  spec.symmetry = MirrorAxis::Vertical;
  return spec;
}

Mesh mesh_for(const ProblemSpec& spec) { return build_mesh(spec.width, spec.height, spec.nx, spec.ny); }

BoundaryConditions boundary_conditions_for(const ProblemSpec& spec, const Mesh& mesh) {
  BoundaryConditions bc;
  auto restrain = [&](std::size_t node, Restraint r) {
    if (r != Restraint::Y) bc.fixed_dofs.push_back(2 * node);
    if (r != Restraint::X) bc.fixed_dofs.push_back(2 * node + 1);
  };
  for (const auto& s : spec.supports) {
    if (!s.edge) {
      restrain(mesh.nearest_node(s.point), s.restraint);
      continue;
    }
    switch (*s.edge) {
      case Edge::Left:
        for (int j = 0; j <= mesh.ny(); ++j) restrain(mesh.node_index(0, j), s.restraint);
        break;
      case Edge::Right:
        for (int j = 0; j <= mesh.ny(); ++j) restrain(mesh.node_index(mesh.nx(), j), s.restraint);
        break;
      case Edge::Bottom:
        for (int i = 0; i <= mesh.nx(); ++i) restrain(mesh.node_index(i, 0), s.restraint);
        break;
      case Edge::Top:
        for (int i = 0; i <= mesh.nx(); ++i) restrain(mesh.node_index(i, mesh.ny()), s.restraint);
        break;
    }
  }
  std::sort(bc.fixed_dofs.begin(), bc.fixed_dofs.end());
  bc.fixed_dofs.erase(std::unique(bc.fixed_dofs.begin(), bc.fixed_dofs.end()), bc.fixed_dofs.end());
  for (const auto& load : spec.loads) {
    bc.point_loads.push_back({mesh.nearest_node(load.at), load.fx, load.fy});
  }
  return bc;
}

MmaBounds design_bounds(const ProblemSpec& spec, std::size_t component_count, double move_fraction) {
  const double diag = std::hypot(spec.width, spec.height);
  const std::array<double, kVarsPerComponent> lo{0.0, 0.0, 0.02 * std::max(spec.width, spec.height),
                                                 kMinComponentSize, -kMaxSinAngle};
  const std::array<double, kVarsPerComponent> hi{spec.width, spec.height, diag, 0.5 * spec.height,
                                                 kMaxSinAngle};
  MmaBounds b;
  for (std::size_t c = 0; c < component_count; ++c) {
    for (std::size_t k = 0; k < kVarsPerComponent; ++k) {
      b.lower.push_back(lo[k]);
      b.upper.push_back(hi[k]);
      b.move_limit.push_back(move_fraction * (hi[k] - lo[k]));
    }
  }
  return b;
}

std::vector<Component> grid_initial_design(int cells_x, int cells_y, const ProblemSpec& spec,
                                           double angle_p, const Regularization& reg,
                                           std::optional<std::size_t> expected_count,
                                           double volume_target, double length_scale) {
  if (cells_x < 1 || cells_y < 1) throw std::invalid_argument("initial design needs at least one cell");
  if (!(std::abs(angle_p) <= kMaxSinAngle)) throw std::invalid_argument("initial angle_p exceeds the admissible range");
  if (!(volume_target >= 0.8 && volume_target <= 1.2)) {
    throw std::invalid_argument("initial volume target must lie in [0.8, 1.2] of the budget");
  }
  if (!(length_scale > 0.0)) throw std::invalid_argument("initial length scale must be positive");
  const std::size_t count = 2 * static_cast<std::size_t>(cells_x) * static_cast<std::size_t>(cells_y);
  if (expected_count && *expected_count != count) {
    std::ostringstream os;
    os << "initial design has " << count << " components, expected " << *expected_count;
    throw std::invalid_argument(os.str());
  }
  spec.validate();
  reg.validate();

  const double cw = spec.width / cells_x;
  const double ch = spec.height / cells_y;
  const double p = std::abs(angle_p);
  const double q = std::sqrt(1.0 - p * p);
  // Longest bar along the crossing direction that stays inside the cell.
  const double reach = std::min(q > 0.0 ? cw / q : cw, p > 0.0 ? ch / p : std::hypot(cw, ch) * 10.0);
  const double length = std::max(0.9 * length_scale * reach, kMinComponentSize);

  auto layout = [&](double t) {
    std::vector<Component> comps;
    comps.reserve(count);
    for (int j = 0; j < cells_y; ++j) {
      for (int i = 0; i < cells_x; ++i) {
        const double xc = (i + 0.5) * cw;
        const double yc = (j + 0.5) * ch;
        comps.push_back({xc, yc, length, t, p});
        comps.push_back({xc, yc, length, t, -p});
      }
    }
    return comps;
  };

  const Mesh mesh = mesh_for(spec);
  const double target = volume_target * spec.volume_budget();
  auto volume_of = [&](double t) { return volume(element_densities(layout(t), mesh, reg), mesh); };

  double lo = kMinComponentSize;
  double hi = std::min(0.5 * spec.height, length);
  double v_lo = volume_of(lo);
  double v_hi = volume_of(hi);
  double t = 0.0;
  if (target <= v_lo) {
    t = lo;
  } else if (target >= v_hi) {
    t = hi;
  } else {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (volume_of(mid) < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    t = 0.5 * (lo + hi);
  }
  std::vector<Component> comps = layout(t);
  const double ratio = volume_of(t) / spec.volume_budget();
  if (ratio < 0.8 || ratio > 1.2) {
    std::ostringstream os;
    os << "initial layout cannot reach the volume budget (ratio " << ratio << ")";
    throw std::invalid_argument(os.str());
  }
  return comps;
}

}  // namespace mmc
