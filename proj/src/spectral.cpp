#include "kvlab/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "kvlab/convection.hpp"
#include "kvlab/fast_solvers.hpp"
#include "kvlab/operators.hpp"
#include "kvlab/random.hpp"
#include "kvlab/saddle.hpp"

namespace kvlab {

namespace {

using Map = std::function<VelocityField(const VelocityField&)>;

// Symmetric part of z -> convection_operator(z, u_inf), pointwise.
std::vector<SparseEntry> symmetric_reaction(const VelocityField& u_inf) {
  const auto st = ConvectionStencil::for_grid(u_inf.grid());
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> acc;
  for (const auto& e : st->reaction_matrix(u_inf)) {
    acc[{e.row, e.col}] += 0.5 * e.value;
    acc[{e.col, e.row}] += 0.5 * e.value;
  }
  std::vector<SparseEntry> out;
  out.reserve(acc.size());
  for (const auto& [rc, v] : acc)
    if (v != 0.0) out.push_back({rc.first, rc.second, v});
  return out;
}

VelocityField apply_entries(const std::vector<SparseEntry>& m, const VelocityField& x) {
  VelocityField out(x.grid());
  for (const auto& e : m) out[e.row] += e.value * x[e.col];
  return out;
}

double gershgorin(const std::vector<SparseEntry>& m, std::size_t size) {
  std::vector<double> rows(size, 0.0);
  for (const auto& e : m) rows[e.row] += std::abs(e.value);
  return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

// Minimal eigenpair of the symmetric pencil (A, B) restricted to
// divergence-free fields. `shifted(s)` returns x -> (A - sB)^{-1} B x.
// The warm-up operator must map divergence-free fields to divergence-free
// fields and amplify the low end of the spectrum; once the lowest Ritz
// value settles the iteration switches to shift-and-invert just below it.
struct Pencil {
  GridSpec grid;
  Map apply_a;
  Map apply_b;
  std::function<Map(double)> shifted;
  Map warm;
};

void b_orthonormalise(std::vector<VelocityField>& y, const Map& apply_b) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double c = inner(y[i], apply_b(y[j]));
        y[i].axpy(-c, y[j]);
      }
      const double nrm = std::sqrt(std::max(inner(y[i], apply_b(y[i])), 0.0));
      if (nrm > 0.0) y[i] *= 1.0 / nrm;
    }
  }
}

EigenPair minimal_eigenpair(const Pencil& pen, double tol) {
  constexpr int block = 8;
  constexpr int max_warm = 80;
  constexpr int max_iter = 300;
  FieldRng rng(0x5eed);
  std::vector<VelocityField> x;
  for (int k = 0; k < block; ++k) x.push_back(project(rng.velocity(pen.grid)).velocity);

  Map solve = pen.warm;
  bool warming = true;
  double prev_theta = INFINITY;
  EigenPair best;
  best.residual = INFINITY;
  Eigen::VectorXd theta;

  for (int it = 1; it <= max_iter; ++it) {
    std::vector<VelocityField> y;
    y.reserve(x.size());
    for (const auto& xi : x) y.push_back(solve(xi));
    b_orthonormalise(y, pen.apply_b);

    Eigen::MatrixXd t(block, block);
    std::vector<VelocityField> ay;
    for (const auto& yi : y) ay.push_back(pen.apply_a(yi));
    for (int i = 0; i < block; ++i)
      for (int j = 0; j <= i; ++j) t(i, j) = t(j, i) = 0.5 * (inner(y[i], ay[j]) + inner(y[j], ay[i]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    theta = es.eigenvalues();
    const Eigen::MatrixXd& c = es.eigenvectors();

    std::vector<VelocityField> xn(block, VelocityField(pen.grid));
    for (int k = 0; k < block; ++k)
      for (int i = 0; i < block; ++i) xn[k].axpy(c(i, k), y[i]);
    x = std::move(xn);

    const VelocityField& z = x[0];
    const VelocityField pa = project(pen.apply_a(z)).velocity;
    const VelocityField pb = project(pen.apply_b(z)).velocity;
    VelocityField r = pa;
    r.axpy(-theta(0), pb);
    const double denom = norms(pa).l2 + std::abs(theta(0)) * norms(pb).l2;
    const double rel = denom > 0.0 ? norms(r).l2 / denom : 0.0;
    if (rel < best.residual) {
      best.value = theta(0);
      best.field = z;
      best.residual = rel;
      best.iterations = it;
    }
    if (rel <= tol) break;

    const bool settled = std::abs(theta(0) - prev_theta) <= 1e-6 * std::abs(theta(0));
    prev_theta = theta(0);
    if (warming && (settled || it == max_warm)) {
      // Ritz values bound the minimum from above; move the shift just below.
      const double spread = theta(block - 1) - theta(0);
      const double shift = theta(0) - 0.01 * spread - 1e-14 * std::abs(theta(0));
      solve = pen.shifted(shift);
      warming = false;
    }
  }
  if (!(best.residual <= tol))
    throw EigenNonConvergence("minimal eigenpair iteration did not converge", best.residual);

  VelocityField& f = best.field;
  f *= 1.0 / norms(f).l2;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (std::abs(f[k]) > std::abs(f[arg]) + 1e-12) arg = k;
  if (f[arg] < 0.0) f *= -1.0;
  return best;
}

}  // namespace

double dirichlet_lambda1(const GridSpec& g, double tol) {
  const auto ops = SeparableOperators::for_grid(g);
  VelocityField x(g);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = 1.0;
  x.clear_boundary();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    x = ops->solve_helmholtz(x, 0.0, 1.0);
    x *= 1.0 / norms(x).l2;
    VelocityField ax = laplacian(x);
    ax *= -1.0;
    lambda = inner(ax, x);
    ax.axpy(-lambda, x);
    if (norms(ax).l2 <= tol * lambda) return lambda;
  }
  throw EigenNonConvergence("Dirichlet inverse iteration hit the cap", lambda);
}

EigenPair a1_eigenvalue(const VelocityField& u_inf, double nu, double tol) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  const GridSpec& g = u_inf.grid();
  const auto k = std::make_shared<std::vector<SparseEntry>>(symmetric_reaction(u_inf));
  const double lambda1 = SeparableOperators::for_grid(g)->smallest_dirichlet_eigenvalue();
  Pencil pen;
  pen.grid = g;
  pen.apply_a = [k, nu](const VelocityField& z) {
    VelocityField out = apply_entries(*k, z);
    out.axpy(-nu, laplacian(z));
    return out;
  };
  pen.apply_b = [](const VelocityField& z) { return z; };
  pen.shifted = [k, nu, g](double s) -> Map {
    auto f = std::make_shared<SaddleFactorization>(g, -s, nu, *k);
    return [f](const VelocityField& x) {
      VelocityField w;
      PressureField p;
      f->solve(x, w, p);
      return w;
    };
  };
  pen.warm = pen.shifted(0.9 * nu * lambda1 - gershgorin(*k, g.velocity_count()));
  return minimal_eigenpair(pen, tol);
}

EigenPair gamma1_constant(const VelocityField& u_inf, double nu, double tol) {
  if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
  const GridSpec& g = u_inf.grid();
  const auto k = std::make_shared<std::vector<SparseEntry>>(symmetric_reaction(u_inf));
  Pencil pen;
  pen.grid = g;
  pen.apply_a = [k, nu](const VelocityField& z) {
    VelocityField out = apply_entries(*k, z);
    out.axpy(-nu, laplacian(z));
    return out;
  };
  pen.apply_b = [](const VelocityField& z) {
    VelocityField out = laplacian(z);
    out *= -1.0;
    return out;
  };
  pen.shifted = [k, nu, g](double s) -> Map {
    auto f = std::make_shared<SaddleFactorization>(g, 0.0, nu - s, *k);
    return [f](const VelocityField& x) {
      VelocityField rhs = laplacian(x);
      rhs *= -1.0;
      VelocityField w;
      PressureField p;
      f->solve(rhs, w, p);
      return w;
    };
  };
  // The pencil eigenvalues are nu + mu with mu accumulating at 0, so
  // inverse iteration from below stalls; power iteration on the Stokes
  // inverse of K instead picks out the extreme mu of either sign.
  if (k->empty()) {
    pen.warm = [](const VelocityField& x) { return x; };
  } else {
    auto stokes = std::make_shared<SaddleFactorization>(g, 0.0, 1.0);
    pen.warm = [stokes, k](const VelocityField& x) {
      VelocityField w;
      PressureField p;
      stokes->solve(apply_entries(*k, x), w, p);
      return w;
    };
  }
  return minimal_eigenpair(pen, tol);
}

double alpha_bound(const SpectralConstants& c, double kappa) {
  if (!(c.gamma1 > 0.0)) throw Gamma1NotPositive(c.gamma1);
  return c.lambda1 / (4.0 * (1.0 + c.lambda1 * kappa)) * std::min(c.nu, c.gamma1);
}

double t_bar(double delta, double kappa, const SpectralConstants& c) {
  if (delta < 0.0) throw std::invalid_argument("delta must be non-negative");
  if (delta == 0.0) return unit_time_weight;
  return 4.0 * delta * (1.0 + kappa * c.lambda1) / c.lambda1 *
         std::max(1.0 / c.nu, 1.0 / c.gamma1);
}

double time_weight(double t, double t_bar_value, double beta) {
  if (t_bar_value == unit_time_weight || beta == 0.0) return 1.0;
  return std::pow(std::max(t_bar_value, t), beta);
}

double estimate_trilinear_N(const GridSpec& g, int samples, std::uint64_t seed) {
  constexpr int sweeps = 6;
  const auto ops = SeparableOperators::for_grid(g);
  const auto st = ConvectionStencil::for_grid(g);
  auto unit = [&](VelocityField f) {
    const double s = norms(f).h1_semi;
    if (s > 0.0) f *= 1.0 / s;
    return f;
  };
  // argmax over |grad x| = 1 of <c, x> is (-lap)^{-1} c, normalised.
  auto riesz = [&](const VelocityField& c) { return unit(ops->solve_helmholtz(c, 0.0, 1.0)); };

  FieldRng rng(seed);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    VelocityField u = unit(rng.velocity(g));
    VelocityField v = unit(rng.velocity(g));
    VelocityField w = unit(rng.velocity(g));
    for (int k = 0; k < sweeps; ++k) {
      w = riesz(convection_operator(u, v));
      VelocityField cv = convection_operator(u, w);
      cv *= -1.0;
      v = riesz(cv);
      u = riesz(st->advecting_gradient(v, w));
    }
    const double ratio = std::abs(trilinear_b(u, v, w)) /
                         (norms(u).h1_semi * norms(v).h1_semi * norms(w).h1_semi);
    if (std::isfinite(ratio)) best = std::max(best, ratio);
  }
  return best;
}

SpectralConstants compute_spectral_constants(const VelocityField& u_inf, double nu, double kappa,
                                             const SpectralOptions& opt) {
  SpectralConstants c;
  c.nu = nu;
  c.kappa = kappa;
  c.lambda1 = dirichlet_lambda1(u_inf.grid());
  c.lambda0 = a1_eigenvalue(u_inf, nu, opt.eig_tol).value;
  c.gamma1 = gamma1_constant(u_inf, nu, opt.eig_tol).value;
  c.a1_satisfied = c.lambda0 > 0.0;
  c.alpha_max = c.gamma1 > 0.0 ? alpha_bound(c, kappa) : 0.0;
  c.n_estimate = opt.n_samples > 0 ? estimate_trilinear_N(u_inf.grid(), opt.n_samples, opt.seed) : 0.0;
  return c;
}

}  // namespace kvlab
