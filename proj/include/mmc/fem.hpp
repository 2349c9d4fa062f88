#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mmc/geometry.hpp"

namespace mmc {

/// Uniform grid of square bilinear elements. Node (i, j) sits at (i*h, j*h)
/// and has index j*(nx+1) + i; element (i, j) has index j*nx + i.
class Mesh {
 public:
  Mesh(int nx, int ny, double h);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  double width() const { return nx_ * h_; }
  double height() const { return ny_ * h_; }
  double area() const { return width() * height(); }

  std::size_t node_count() const { return static_cast<std::size_t>(nx_ + 1) * (ny_ + 1); }
  std::size_t element_count() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t dof_count() const { return 2 * node_count(); }

  std::size_t node_index(int i, int j) const { return static_cast<std::size_t>(j) * (nx_ + 1) + i; }
  Point node_coord(std::size_t node) const;

  /// Counterclockwise from the lower-left corner.
  std::array<std::size_t, 4> element_nodes(std::size_t element) const;
  std::array<std::size_t, 8> element_dofs(std::size_t element) const;
  Point element_center(std::size_t element) const;

  /// 2x2 Gauss points in the order (-,-), (+,-), (+,+), (-,+).
  std::array<Point, 4> gauss_points(std::size_t element) const;

  /// Nearest node; ties resolve to the lower index.
  std::size_t nearest_node(Point p) const;

 private:
  int nx_;
  int ny_;
  double h_;
};

/// Throws std::invalid_argument unless width/nx == height/ny.
Mesh build_mesh(double width, double height, int nx, int ny);

using ElementMatrix = Eigen::Matrix<double, 8, 8>;
using ElementVector = Eigen::Matrix<double, 8, 1>;

/// Isotropic plane-stress material with unit thickness.
struct Material {
  double youngs_modulus = 1.0;
  double poisson_ratio = 0.3;

  void validate() const;
  Eigen::Matrix3d constitutive() const;
};

/// Strain-displacement matrix of a square element of side h at natural
/// coordinates (xi, eta) in [-1, 1]^2.
Eigen::Matrix<double, 3, 8> strain_displacement(double h, double xi, double eta);

/// 2x2 Gauss integration of B^T D B over one square element.
ElementMatrix element_stiffness(const Material& mat, double h);

struct PointLoad {
  std::size_t node = 0;
  double fx = 0.0;
  double fy = 0.0;
};

struct BoundaryConditions {
  std::vector<std::size_t> fixed_dofs;  // sorted, unique
  std::vector<PointLoad> point_loads;

  void validate(const Mesh& mesh) const;
  Eigen::VectorXd load_vector(const Mesh& mesh) const;
};

struct FemSolution {
  Eigen::VectorXd displacements;
  double compliance = 0.0;
  /// Unit-density strain energy density E:eps(u):eps(u) at each Gauss point,
  /// four entries per element.
  std::vector<double> gauss_energy_density;
  /// Unit-density element energy u_e^T K_e u_e.
  std::vector<double> element_energy;
};

/// rho_e = mean over the element's Gauss points of H(phi^s).
std::vector<double> element_densities(std::span<const Component> comps, const Mesh& mesh,
                                      const Regularization& reg);

/// Solves sum_e rho_e K_e u = f with the fixed DOFs eliminated.
/// Sparse Cholesky with iterative refinement; the normwise backward error
/// ||f - Ku|| / (||K|| ||u|| + ||f||) must end at or below 1e-10.
/// Throws NumericalError when the system is singular or that check fails.
FemSolution assemble_and_solve(const Mesh& mesh, std::span<const double> densities,
                               const BoundaryConditions& bc, const Material& mat);

/// sum_e rho_e h^2
double volume(std::span<const double> densities, const Mesh& mesh);

}  // namespace mmc
