#pragma once
// Direct solvers for the separable operators on the MAC grid, built from
// 1D eigendecompositions (tensor-product diagonalisation).

#include <Eigen/Dense>
#include <memory>

#include "kvlab/grid.hpp"

namespace kvlab {

struct Basis1D {
  Eigen::MatrixXd vectors;  // orthonormal columns
  Eigen::VectorXd values;   // eigenvalues of the 1D negative Laplacian
};

class SeparableOperators {
 public:
  explicit SeparableOperators(const GridSpec& g);
  static std::shared_ptr<const SeparableOperators> for_grid(const GridSpec& g);

  const GridSpec& grid() const { return grid_; }

  // Solves (a I - b laplacian) w = f componentwise with Dirichlet walls.
  // Requires a + b * lambda > 0 for every mode.
  VelocityField solve_helmholtz(const VelocityField& f, double a, double b) const;

  // Solves divergence(gradient(phi)) = r; the mean of r is discarded and
  // phi is returned mean-zero.
  PressureField solve_neumann(const PressureField& r) const;

  // Smallest eigenvalue of the componentwise Dirichlet Laplacian from the
  // 1D factors.
  double smallest_dirichlet_eigenvalue() const;

  const Basis1D& node_dirichlet() const { return node_dir_; }
  const Basis1D& cell_dirichlet() const { return cell_dir_; }
  const Basis1D& cell_neumann() const { return cell_neu_; }

 private:
  GridSpec grid_;
  Basis1D node_dir_;  // size n-1, wall-normal direction
  Basis1D cell_dir_;  // size n, wall-tangential direction with ghost reflection
  Basis1D cell_neu_;  // size n, pressure
};

}  // namespace kvlab
