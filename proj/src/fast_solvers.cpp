#include "kvlab/fast_solvers.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace kvlab {

namespace {

enum class Kind { node_dirichlet, cell_dirichlet, cell_neumann };

Basis1D make_basis(int n, double h, Kind kind) {
  const int m = kind == Kind::node_dirichlet ? n - 1 : n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  const double s = 1.0 / (h * h);
  for (int k = 0; k < m; ++k) {
    a(k, k) = 2.0 * s;
    if (k > 0) a(k, k - 1) = -s;
    if (k + 1 < m) a(k, k + 1) = -s;
  }
  if (kind == Kind::cell_dirichlet) {
    a(0, 0) = 3.0 * s;
    a(m - 1, m - 1) = 3.0 * s;
  } else if (kind == Kind::cell_neumann) {
    a(0, 0) = s;
    a(m - 1, m - 1) = s;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("1D eigensolver failed");
  Basis1D b{es.eigenvectors(), es.eigenvalues()};
  if (kind == Kind::cell_neumann) b.values(0) = 0.0;  // constant mode
  return b;
}

// out = Qx^T F Qy
Eigen::MatrixXd to_modes(const Basis1D& bx, const Basis1D& by, const Eigen::MatrixXd& f) {
  return bx.vectors.transpose() * f * by.vectors;
}

Eigen::MatrixXd from_modes(const Basis1D& bx, const Basis1D& by, const Eigen::MatrixXd& c) {
  return bx.vectors * c * by.vectors.transpose();
}

}  // namespace

SeparableOperators::SeparableOperators(const GridSpec& g)
    : grid_(g),
      node_dir_(make_basis(g.n(), g.h(), Kind::node_dirichlet)),
      cell_dir_(make_basis(g.n(), g.h(), Kind::cell_dirichlet)),
      cell_neu_(make_basis(g.n(), g.h(), Kind::cell_neumann)) {}

std::shared_ptr<const SeparableOperators> SeparableOperators::for_grid(const GridSpec& g) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const SeparableOperators>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[g.n()];
  if (!slot) slot = std::make_shared<const SeparableOperators>(g);
  return slot;
}

VelocityField SeparableOperators::solve_helmholtz(const VelocityField& f, double a,
                                                  double b) const {
  require_same(grid_, f.grid());
  const int n = grid_.n();
  VelocityField w(grid_);

  // u: rows are interior i = 1..n-1 (node Dirichlet), columns j (cell Dirichlet).
  {
    Eigen::MatrixXd fu(n - 1, n);
    for (int i = 1; i < n; ++i)
      for (int j = 0; j < n; ++j) fu(i - 1, j) = f.u(i, j);
    Eigen::MatrixXd c = to_modes(node_dir_, cell_dir_, fu);
    for (int k = 0; k < n - 1; ++k)
      for (int l = 0; l < n; ++l)
        c(k, l) /= a + b * (node_dir_.values(k) + cell_dir_.values(l));
    Eigen::MatrixXd wu = from_modes(node_dir_, cell_dir_, c);
    for (int i = 1; i < n; ++i)
      for (int j = 0; j < n; ++j) w.u(i, j) = wu(i - 1, j);
  }
  // v: rows i (cell Dirichlet), columns interior j = 1..n-1 (node Dirichlet).
  {
    Eigen::MatrixXd fv(n, n - 1);
    for (int i = 0; i < n; ++i)
      for (int j = 1; j < n; ++j) fv(i, j - 1) = f.v(i, j);
    Eigen::MatrixXd c = to_modes(cell_dir_, node_dir_, fv);
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n - 1; ++l)
        c(k, l) /= a + b * (cell_dir_.values(k) + node_dir_.values(l));
    Eigen::MatrixXd wv = from_modes(cell_dir_, node_dir_, c);
    for (int i = 0; i < n; ++i)
      for (int j = 1; j < n; ++j) w.v(i, j) = wv(i, j - 1);
  }
  return w;
}

PressureField SeparableOperators::solve_neumann(const PressureField& r) const {
  require_same(grid_, r.grid());
  const int n = grid_.n();
  Eigen::MatrixXd rm(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rm(i, j) = r(i, j);
  Eigen::MatrixXd c = to_modes(cell_neu_, cell_neu_, rm);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      if (k == 0 && l == 0) {
        c(k, l) = 0.0;
        continue;
      }
      // divergence(gradient) is the negative of the Neumann operator.
      c(k, l) /= -(cell_neu_.values(k) + cell_neu_.values(l));
    }
  Eigen::MatrixXd pm = from_modes(cell_neu_, cell_neu_, c);
  PressureField p(grid_);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = pm(i, j);
  p.remove_mean();
  return p;
}

double SeparableOperators::smallest_dirichlet_eigenvalue() const {
  return node_dir_.values.minCoeff() + cell_dir_.values.minCoeff();
}

}  // namespace kvlab
