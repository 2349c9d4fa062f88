#include "mmc/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "mmc/errors.hpp"

namespace mmc {

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)
constexpr std::array<std::array<double, 2>, 4> kGaussNatural{{
    {-kGauss, -kGauss}, {kGauss, -kGauss}, {kGauss, kGauss}, {-kGauss, kGauss}}};

constexpr double kResidualTolerance = 1e-10;
constexpr double kPivotTolerance = 1e-11;
constexpr int kRefinementPasses = 3;

}  // namespace

Mesh::Mesh(int nx, int ny, double h) : nx_(nx), ny_(ny), h_(h) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh needs at least one element per direction");
  if (!(h > 0.0)) throw std::invalid_argument("mesh element size must be positive");
}

Point Mesh::node_coord(std::size_t node) const {
  const auto stride = static_cast<std::size_t>(nx_ + 1);
  return {static_cast<double>(node % stride) * h_, static_cast<double>(node / stride) * h_};
}

std::array<std::size_t, 4> Mesh::element_nodes(std::size_t element) const {
  const int i = static_cast<int>(element % nx_);
  const int j = static_cast<int>(element / nx_);
  return {node_index(i, j), node_index(i + 1, j), node_index(i + 1, j + 1), node_index(i, j + 1)};
}

std::array<std::size_t, 8> Mesh::element_dofs(std::size_t element) const {
  const auto n = element_nodes(element);
  return {2 * n[0], 2 * n[0] + 1, 2 * n[1], 2 * n[1] + 1,
          2 * n[2], 2 * n[2] + 1, 2 * n[3], 2 * n[3] + 1};
}

Point Mesh::element_center(std::size_t element) const {
  const auto i = static_cast<double>(element % nx_);
  const auto j = static_cast<double>(element / nx_);
  return {(i + 0.5) * h_, (j + 0.5) * h_};
}

std::array<Point, 4> Mesh::gauss_points(std::size_t element) const {
  const Point c = element_center(element);
  std::array<Point, 4> pts{};
  for (std::size_t g = 0; g < 4; ++g) {
    pts[g] = {c.x + 0.5 * h_ * kGaussNatural[g][0], c.y + 0.5 * h_ * kGaussNatural[g][1]};
  }
  return pts;
}

std::size_t Mesh::nearest_node(Point p) const {
  // Candidates are the floor/ceil grid indices; scanning them in increasing
  // index order with a strict comparison keeps the lowest index on ties.
  const double fi = p.x / h_;
  const double fj = p.y / h_;
  const int i0 = std::clamp(static_cast<int>(std::floor(fi)), 0, nx_);
  const int j0 = std::clamp(static_cast<int>(std::floor(fj)), 0, ny_);
  std::size_t best = node_index(i0, j0);
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = j0; j <= std::min(j0 + 1, ny_); ++j) {
    for (int i = i0; i <= std::min(i0 + 1, nx_); ++i) {
      const std::size_t n = node_index(i, j);
      const Point c = node_coord(n);
      const double d = (c.x - p.x) * (c.x - p.x) + (c.y - p.y) * (c.y - p.y);
      if (d < best_d) {
        best_d = d;
        best = n;
      }
    }
  }
  return best;
}

Mesh build_mesh(double width, double height, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("build_mesh: nx and ny must be >= 1");
  if (!(width > 0.0) || !(height > 0.0)) throw std::invalid_argument("build_mesh: domain must have positive size");
  const double hx = width / nx;
  const double hy = height / ny;
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy)) {
    std::ostringstream os;
    os << "build_mesh: elements are not square (" << hx << " x " << hy << ")";
    throw std::invalid_argument(os.str());
  }
  return Mesh(nx, ny, hx);
}

void Material::validate() const {
  if (!(youngs_modulus > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
  if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5)) {
    throw std::invalid_argument("Poisson's ratio must lie in (-1, 0.5)");
  }
}

Eigen::Matrix3d Material::constitutive() const {
  const double nu = poisson_ratio;
  const double c = youngs_modulus / (1.0 - nu * nu);
  Eigen::Matrix3d d;
  d << c, c * nu, 0.0,
       c * nu, c, 0.0,
       0.0, 0.0, c * 0.5 * (1.0 - nu);
  return d;
}

Eigen::Matrix<double, 3, 8> strain_displacement(double h, double xi, double eta) {
  // Shape function derivatives in natural coordinates, nodes CCW from (-1,-1).
  const std::array<double, 4> dn_dxi{-(1 - eta) / 4, (1 - eta) / 4, (1 + eta) / 4, -(1 + eta) / 4};
  const std::array<double, 4> dn_deta{-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4, (1 - xi) / 4};
  const double jac = 2.0 / h;  // d(xi)/dx for a square element
  Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
  for (int a = 0; a < 4; ++a) {
    const double dx = dn_dxi[a] * jac;
    const double dy = dn_deta[a] * jac;
    b(0, 2 * a) = dx;
    b(1, 2 * a + 1) = dy;
    b(2, 2 * a) = dy;
    b(2, 2 * a + 1) = dx;
  }
  return b;
}

ElementMatrix element_stiffness(const Material& mat, double h) {
  mat.validate();
  const Eigen::Matrix3d d = mat.constitutive();
  const double detj = 0.25 * h * h;
  ElementMatrix ke = ElementMatrix::Zero();
  for (const auto& gp : kGaussNatural) {
    const auto b = strain_displacement(h, gp[0], gp[1]);
    ke.noalias() += b.transpose() * d * b * detj;
  }
  return 0.5 * (ke + ke.transpose());
}

void BoundaryConditions::validate(const Mesh& mesh) const {
  if (fixed_dofs.empty()) throw std::invalid_argument("boundary conditions fix no degrees of freedom");
  for (std::size_t dof : fixed_dofs) {
    if (dof >= mesh.dof_count()) throw std::invalid_argument("fixed dof outside the mesh");
  }
  if (!std::is_sorted(fixed_dofs.begin(), fixed_dofs.end()) ||
      std::adjacent_find(fixed_dofs.begin(), fixed_dofs.end()) != fixed_dofs.end()) {
    throw std::invalid_argument("fixed dofs must be sorted and unique");
  }
  for (const auto& load : point_loads) {
    if (load.node >= mesh.node_count()) throw std::invalid_argument("load node outside the mesh");
  }
}

Eigen::VectorXd BoundaryConditions::load_vector(const Mesh& mesh) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.dof_count()));
  for (const auto& load : point_loads) {
    f(static_cast<Eigen::Index>(2 * load.node)) += load.fx;
    f(static_cast<Eigen::Index>(2 * load.node + 1)) += load.fy;
  }
  return f;
}

std::vector<double> element_densities(std::span<const Component> comps, const Mesh& mesh,
                                      const Regularization& reg) {
  if (comps.empty()) throw std::invalid_argument("element_densities: design has no components");
  std::vector<double> rho(mesh.element_count());
  for (std::size_t e = 0; e < rho.size(); ++e) {
    double sum = 0.0;
    for (const Point& gp : mesh.gauss_points(e)) {
      double phi = component_tdf(comps[0], gp, reg.exponent);
      for (std::size_t i = 1; i < comps.size(); ++i) {
        phi = std::max(phi, component_tdf(comps[i], gp, reg.exponent));
      }
      sum += smoothed_heaviside(phi, reg);
    }
    rho[e] = 0.25 * sum;
  }
  return rho;
}

FemSolution assemble_and_solve(const Mesh& mesh, std::span<const double> densities,
                               const BoundaryConditions& bc, const Material& mat) {
  if (densities.size() != mesh.element_count()) {
    throw std::invalid_argument("assemble_and_solve: density array length does not match the mesh");
  }
  bc.validate(mesh);
  const ElementMatrix ke = element_stiffness(mat, mesh.h());
  const auto ndof = mesh.dof_count();

  // Map global dofs to the reduced (free) numbering; -1 marks a fixed dof.
  std::vector<long> free_index(ndof, 0);
  for (std::size_t dof : bc.fixed_dofs) free_index[dof] = -1;
  long nfree = 0;
  for (auto& idx : free_index) {
    if (idx == 0) idx = nfree++;
  }
  if (nfree == 0) throw NumericalError("assemble_and_solve: every degree of freedom is fixed");

  const Eigen::VectorXd f_full = bc.load_vector(mesh);
  Eigen::VectorXd f(nfree);
  for (std::size_t dof = 0; dof < ndof; ++dof) {
    if (free_index[dof] >= 0) f(free_index[dof]) = f_full(static_cast<Eigen::Index>(dof));
  }

  FemSolution sol;
  sol.displacements = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ndof));

  if (f.norm() > 0.0) {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.element_count() * 64);
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
      const auto dofs = mesh.element_dofs(e);
      for (int a = 0; a < 8; ++a) {
        const long ra = free_index[dofs[a]];
        if (ra < 0) continue;
        for (int b = 0; b < 8; ++b) {
          const long cb = free_index[dofs[b]];
          if (cb < 0) continue;
          triplets.emplace_back(ra, cb, densities[e] * ke(a, b));
        }
      }
    }
    Eigen::SparseMatrix<double> k(nfree, nfree);
    k.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> solver(k);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("assemble_and_solve: stiffness matrix is singular (insufficient constraints?)");
    }
    // A free rigid mode factors without complaint but leaves a pivot at
    // roundoff level relative to its diagonal entry.
    {
      const Eigen::SparseMatrix<double> l = solver.matrixL();
      const Eigen::VectorXd pivots = l.diagonal();
      const auto& perm = solver.permutationP().indices();
      for (long j = 0; j < nfree; ++j) {
        const double pivot = pivots(perm(j));
        if (!(pivot * pivot > kPivotTolerance * k.coeff(j, j))) {
          throw NumericalError("assemble_and_solve: stiffness matrix is singular (insufficient constraints?)");
        }
      }
    }
    // Normwise backward error ||f - Ku|| / (||K|| ||u|| + ||f||), infinity norms.
    double k_norm = 0.0;
    {
      Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(nfree);
      for (int col = 0; col < k.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) row_sums(it.row()) += std::abs(it.value());
      }
      k_norm = row_sums.maxCoeff();
    }
    const double f_inf = f.lpNorm<Eigen::Infinity>();
    auto backward_error = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& r) {
      return r.lpNorm<Eigen::Infinity>() / (k_norm * u.lpNorm<Eigen::Infinity>() + f_inf);
    };

    Eigen::VectorXd u = solver.solve(f);
    Eigen::VectorXd r = f - k * u;
    double residual = backward_error(u, r);
    // Iterative refinement recovers digits lost to ersatz-material conditioning.
    for (int pass = 0; pass < kRefinementPasses && residual > kResidualTolerance; ++pass) {
      u += solver.solve(r);
      r = f - k * u;
      residual = backward_error(u, r);
    }
    if (!std::isfinite(residual) || residual > kResidualTolerance) {
      std::ostringstream os;
      os << "assemble_and_solve: linear solve did not converge, relative residual " << residual;
      throw NumericalError(os.str());
    }
    for (std::size_t dof = 0; dof < ndof; ++dof) {
      if (free_index[dof] >= 0) sol.displacements(static_cast<Eigen::Index>(dof)) = u(free_index[dof]);
    }
    sol.compliance = f.dot(u);
  }

  const Eigen::Matrix3d d = mat.constitutive();
  sol.gauss_energy_density.resize(4 * mesh.element_count());
  sol.element_energy.resize(mesh.element_count());
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto dofs = mesh.element_dofs(e);
    ElementVector ue;
    for (int a = 0; a < 8; ++a) ue(a) = sol.displacements(static_cast<Eigen::Index>(dofs[a]));
    for (std::size_t g = 0; g < 4; ++g) {
      const Eigen::Vector3d strain = strain_displacement(mesh.h(), kGaussNatural[g][0], kGaussNatural[g][1]) * ue;
      sol.gauss_energy_density[4 * e + g] = strain.dot(d * strain);
    }
    sol.element_energy[e] = ue.dot(ke * ue);
  }
  return sol;
}

double volume(std::span<const double> densities, const Mesh& mesh) {
  if (densities.size() != mesh.element_count()) {
    throw std::invalid_argument("volume: density array length does not match the mesh");
  }
  double sum = 0.0;
  for (double rho : densities) sum += rho;
  return sum * mesh.h() * mesh.h();
}

}  // namespace mmc
