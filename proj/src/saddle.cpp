#include "kvlab/saddle.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

#include "kvlab/fast_solvers.hpp"
#include "kvlab/operators.hpp"

namespace kvlab {

std::string to_string(SaddleMethod m) {
  return m == SaddleMethod::schur_cg ? "schur_cg" : "direct_sparse";
}

SaddleMethod saddle_method_from_string(const std::string& s) {
  if (s == "schur_cg") return SaddleMethod::schur_cg;
  if (s == "direct_sparse") return SaddleMethod::direct_sparse;
  throw std::invalid_argument("unknown solver method '" + s + "'");
}

void SolverSettings::validate() const {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("solver tol must lie in (0, 1)");
  if (max_iter < 1) throw std::invalid_argument("solver max_iter must be positive");
}

VelocityField LinearAdvection::apply(const VelocityField& w) const {
  VelocityField out(w.grid());
  for (const auto& t : transport) out += convection_operator(t, w);
  for (const auto& r : reaction) out += convection_operator(w, r);
  out *= scale;
  return out;
}

std::vector<SparseEntry> LinearAdvection::entries(const GridSpec& g) const {
  std::vector<SparseEntry> all;
  const auto st = ConvectionStencil::for_grid(g);
  for (const auto& t : transport) {
    auto m = st->transport_matrix(t);
    all.insert(all.end(), m.begin(), m.end());
  }
  for (const auto& r : reaction) {
    auto m = st->reaction_matrix(r);
    all.insert(all.end(), m.begin(), m.end());
  }
  for (auto& e : all) e.value *= scale;
  return all;
}

void SaddleProblem::validate() const {
  if (!(mass_coef >= 0.0 && stiffness_coef >= 0.0))
    throw std::invalid_argument("saddle coefficients must be non-negative");
  if (!(mass_coef + stiffness_coef > 0.0))
    throw std::invalid_argument("saddle coefficients must not both vanish");
  for (const auto& t : advection.transport) require_same(t.grid(), rhs.grid());
  for (const auto& r : advection.reaction) require_same(r.grid(), rhs.grid());
}

namespace {

VelocityField apply_velocity_block(const SaddleProblem& prob, const VelocityField& w) {
  VelocityField out = prob.mass_coef * w;
  out.axpy(-prob.stiffness_coef, laplacian(w));
  if (!prob.advection.empty()) out += prob.advection.apply(w);
  return out;
}

double reference_scale(const SaddleProblem& prob) {
  const auto ops = SeparableOperators::for_grid(prob.grid());
  return norms(ops->solve_helmholtz(prob.rhs, prob.mass_coef, prob.stiffness_coef)).l2;
}

double relative(double num, double den) { return den > 0.0 ? num / den : num; }

// Symmetric part only: Schur-complement CG with a Cahouet-Chabard
// preconditioner b I + a (-div grad)^{-1}.
int schur_cg(const SaddleProblem& prob, const VelocityField& rhs, const SolverSettings& s,
             VelocityField& w, PressureField& p) {
  const GridSpec& g = prob.grid();
  const auto ops = SeparableOperators::for_grid(g);
  const double a = prob.mass_coef;
  const double b = prob.stiffness_coef;
  const double h = g.h();

  w = ops->solve_helmholtz(rhs, a, b);
  p = PressureField(g);
  const double ref = norms(w).l2;
  PressureField r = divergence(w);
  r *= -1.0;
  auto converged = [&](const PressureField& res) {
    return h * norms(res).l2 <= s.tol * ref;
  };
  if (ref == 0.0 || converged(r)) return 0;

  auto precondition = [&](const PressureField& res) {
    PressureField z = res;
    z *= b;
    if (a > 0.0) z.axpy(-a, ops->solve_neumann(res));
    z.remove_mean();
    return z;
  };

  PressureField z = precondition(r);
  PressureField d = z;
  double rz = inner(r, z);
  for (int it = 1; it <= s.max_iter; ++it) {
    VelocityField y = ops->solve_helmholtz(gradient(d), a, b);
    PressureField sd = divergence(y);
    sd *= -1.0;
    const double dsd = inner(d, sd);
    if (!(dsd > 0.0)) throw NonConvergence("Schur complement lost positivity", h * norms(r).l2 / ref);
    const double alpha = rz / dsd;
    p.axpy(alpha, d);
    w.axpy(-alpha, y);
    r.axpy(-alpha, sd);
    if (converged(r)) {
      p.remove_mean();
      return it;
    }
    z = precondition(r);
    const double rz_new = inner(r, z);
    d *= rz_new / rz;
    d += z;
    rz = rz_new;
  }
  throw NonConvergence("Schur CG hit the iteration cap", h * norms(r).l2 / ref);
}

}  // namespace

ResidualReport saddle_residual(const SaddleProblem& prob, const VelocityField& w,
                               const PressureField& p) {
  ResidualReport rep;
  VelocityField res = apply_velocity_block(prob, w);
  res += gradient(p);
  res -= prob.rhs;
  rep.momentum = relative(norms(res).l2, norms(prob.rhs).l2);
  rep.divergence = relative(prob.grid().h() * norms(divergence(w)).l2, reference_scale(prob));
  return rep;
}

SaddleSolution solve_saddle(const SaddleProblem& prob, const SolverSettings& settings) {
  prob.validate();
  settings.validate();
  SaddleSolution sol;
  sol.report.method = to_string(settings.method);

  if (settings.method == SaddleMethod::direct_sparse) {
    SaddleFactorization f(prob.grid(), prob.mass_coef, prob.stiffness_coef,
                          prob.advection.entries(prob.grid()));
    f.solve(prob.rhs, sol.velocity, sol.pressure);
    sol.report.iterations = 1;
  } else if (prob.advection.empty()) {
    sol.report.iterations = schur_cg(prob, prob.rhs, settings, sol.velocity, sol.pressure);
  } else {
    // Defect correction on the convection term around the symmetric solve.
    const double rhs_norm = norms(prob.rhs).l2;
    VelocityField w(prob.grid());
    PressureField p(prob.grid());
    double res = 0.0;
    int total = 0;
    for (int k = 0; k < settings.max_iter; ++k) {
      VelocityField shifted = prob.rhs;
      shifted -= prob.advection.apply(w);
      total += schur_cg(prob, shifted, settings, w, p);
      VelocityField r = apply_velocity_block(prob, w);
      r += gradient(p);
      r -= prob.rhs;
      res = relative(norms(r).l2, rhs_norm);
      if (!std::isfinite(res) || res > 1e6) break;
      if (res <= settings.tol) {
        sol.velocity = std::move(w);
        sol.pressure = std::move(p);
        sol.report.iterations = total;
        sol.report.momentum = res;
        sol.report.divergence = saddle_residual(prob, sol.velocity, sol.pressure).divergence;
        return sol;
      }
    }
    throw NonConvergence("defect correction on the convection term stalled", res);
  }

  sol.report = [&] {
    ResidualReport rep = saddle_residual(prob, sol.velocity, sol.pressure);
    rep.method = sol.report.method;
    rep.iterations = sol.report.iterations;
    return rep;
  }();
  const double worst = std::max(sol.report.momentum, sol.report.divergence);
  if (!(worst <= settings.tol)) throw NonConvergence("saddle residual above tolerance", worst);
  return sol;
}

// ---------------------------------------------------------------------------

struct SaddleFactorization::Impl {
  GridSpec grid;
  std::vector<int> vel_map;  // storage index -> unknown, -1 on walls
  int n_vel = 0;
  int n_cells = 0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

SaddleFactorization::SaddleFactorization(const GridSpec& g, double a, double b,
                                         const std::vector<SparseEntry>& extra)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.grid = g;
  const int n = g.n();
  const double h = g.h();
  const double s = 1.0 / (h * h);
  m.vel_map.assign(g.velocity_count(), -1);
  int k = 0;
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) m.vel_map[g.u_index(i, j)] = k++;
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < n; ++j) m.vel_map[g.v_index(i, j)] = k++;
  m.n_vel = k;
  m.n_cells = n * n;
  const int mult = m.n_vel + m.n_cells;
  const int total = mult + 1;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(m.n_vel) * 9 + extra.size() + std::size_t(m.n_cells) * 6);
  auto cell = [&](int i, int j) { return m.n_vel + int(g.cell_index(i, j)); };

  // Velocity block: a I - b laplacian, plus pressure gradient columns and
  // the matching -div rows (the bordered matrix stays symmetric).
  auto add_vel_row = [&](std::size_t idx, std::size_t nb[4], const bool ghost[4]) {
    const int r = m.vel_map[idx];
    double diag = a + 4.0 * b * s;
    for (int q = 0; q < 4; ++q) {
      if (ghost[q]) {
        diag += b * s;
        continue;
      }
      const int c = m.vel_map[nb[q]];
      if (c >= 0) t.emplace_back(r, c, -b * s);
    }
    t.emplace_back(r, r, diag);
  };
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::size_t nb[4] = {g.u_index(i + 1, j), g.u_index(i - 1, j),
                           j + 1 < n ? g.u_index(i, j + 1) : 0, j > 0 ? g.u_index(i, j - 1) : 0};
      const bool ghost[4] = {false, false, j + 1 >= n, j == 0};
      add_vel_row(g.u_index(i, j), nb, ghost);
      const int r = m.vel_map[g.u_index(i, j)];
      t.emplace_back(r, cell(i, j), 1.0 / h);
      t.emplace_back(r, cell(i - 1, j), -1.0 / h);
      t.emplace_back(cell(i, j), r, 1.0 / h);
      t.emplace_back(cell(i - 1, j), r, -1.0 / h);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      std::size_t nb[4] = {g.v_index(i, j + 1), g.v_index(i, j - 1),
                           i + 1 < n ? g.v_index(i + 1, j) : 0, i > 0 ? g.v_index(i - 1, j) : 0};
      const bool ghost[4] = {false, false, i + 1 >= n, i == 0};
      add_vel_row(g.v_index(i, j), nb, ghost);
      const int r = m.vel_map[g.v_index(i, j)];
      t.emplace_back(r, cell(i, j), 1.0 / h);
      t.emplace_back(r, cell(i, j - 1), -1.0 / h);
      t.emplace_back(cell(i, j), r, 1.0 / h);
      t.emplace_back(cell(i, j - 1), r, -1.0 / h);
    }
  for (const auto& e : extra) {
    const int r = m.vel_map[e.row];
    const int c = m.vel_map[e.col];
    if (r >= 0 && c >= 0) t.emplace_back(r, c, e.value);
  }
  for (int c = 0; c < m.n_cells; ++c) {
    t.emplace_back(m.n_vel + c, mult, 1.0);
    t.emplace_back(mult, m.n_vel + c, 1.0);
  }

  Eigen::SparseMatrix<double> mat(total, total);
  mat.setFromTriplets(t.begin(), t.end());
  mat.makeCompressed();
  m.lu.analyzePattern(mat);
  m.lu.factorize(mat);
  if (m.lu.info() != Eigen::Success)
    throw NonConvergence("sparse LU factorisation failed: " + m.lu.lastErrorMessage(), INFINITY);
}

SaddleFactorization::~SaddleFactorization() = default;
SaddleFactorization::SaddleFactorization(SaddleFactorization&&) noexcept = default;
SaddleFactorization& SaddleFactorization::operator=(SaddleFactorization&&) noexcept = default;

const GridSpec& SaddleFactorization::grid() const { return impl_->grid; }

void SaddleFactorization::solve(const VelocityField& rhs, VelocityField& w,
                                PressureField& p) const {
  const Impl& m = *impl_;
  require_same(m.grid, rhs.grid());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m.n_vel + m.n_cells + 1);
  for (std::size_t k = 0; k < rhs.size(); ++k)
    if (m.vel_map[k] >= 0) b(m.vel_map[k]) = rhs[k];
  Eigen::VectorXd x = m.lu.solve(b);
  w = VelocityField(m.grid);
  for (std::size_t k = 0; k < w.size(); ++k)
    if (m.vel_map[k] >= 0) w[k] = x(m.vel_map[k]);
  p = PressureField(m.grid);
  for (int c = 0; c < m.n_cells; ++c) p[c] = x(m.n_vel + c);
  p.remove_mean();
}

// ---------------------------------------------------------------------------

InfSupEstimate inf_sup_analysis(const GridSpec& g) {
  const auto ops = SeparableOperators::for_grid(g);
  const int nc = int(g.cell_count());
  Eigen::MatrixXd s(nc, nc);
  for (int c = 0; c < nc; ++c) {
    PressureField e(g);
    e[c] = 1.0;
    const PressureField col = divergence(ops->solve_helmholtz(gradient(e), 0.0, 1.0));
    for (int r = 0; r < nc; ++r) s(r, c) = -col[r];
  }
  s = 0.5 * (s + s.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("inf-sup eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = 1e-10 * ev.maxCoeff();
  InfSupEstimate out;
  for (int k = 0; k < nc; ++k) {
    if (ev(k) < cutoff) {
      ++out.kernel_dimension;
    } else if (out.constant == 0.0) {
      out.constant = std::sqrt(ev(k));
    }
  }
  return out;
}

double inf_sup_estimate(const GridSpec& g) { return inf_sup_analysis(g).constant; }

}  // namespace kvlab
