#pragma once
// Shared generators and dense oracles for the test suites.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "kvlab/grid.hpp"
#include "kvlab/operators.hpp"

namespace kvlab::testing {

inline constexpr double pi = std::numbers::pi;

inline VelocityField random_velocity(const GridSpec& g, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  VelocityField f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = d(rng);
  f.clear_boundary();
  return f;
}

inline PressureField random_pressure(const GridSpec& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  PressureField p(g);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = d(rng);
  return p;
}

inline VelocityField random_solenoidal(const GridSpec& g, std::mt19937_64& rng) {
  return project(random_velocity(g, rng)).velocity;
}

// Random smooth stream function built from low sine modes.
inline std::vector<double> smooth_stream(const GridSpec& g, std::mt19937_64& rng, int modes = 3) {
  std::normal_distribution<double> d(0.0, 1.0);
  const int n = g.n();
  std::vector<double> c(std::size_t(modes * modes));
  for (auto& x : c) x = d(rng);
  std::vector<double> psi(std::size_t(n + 1) * (n + 1), 0.0);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      double s = 0.0;
      for (int k = 1; k <= modes; ++k)
        for (int l = 1; l <= modes; ++l)
          s += c[std::size_t((k - 1) * modes + l - 1)] * std::sin(k * pi * i * g.h()) *
               std::sin(l * pi * j * g.h()) / (k * k + l * l);
      psi[std::size_t(i) * (n + 1) + j] = s;
    }
  return psi;
}

// Storage indices of the non-wall velocity faces.
inline std::vector<std::size_t> interior_dofs(const GridSpec& g) {
  std::vector<std::size_t> idx;
  const int n = g.n();
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) idx.push_back(g.u_index(i, j));
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < n; ++j) idx.push_back(g.v_index(i, j));
  return idx;
}

inline Eigen::VectorXd gather(const VelocityField& f, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd x(Eigen::Index(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) x(Eigen::Index(k)) = f[idx[k]];
  return x;
}

inline VelocityField scatter(const GridSpec& g, const Eigen::VectorXd& x,
                             const std::vector<std::size_t>& idx) {
  VelocityField f(g);
  for (std::size_t k = 0; k < idx.size(); ++k) f[idx[k]] = x(Eigen::Index(k));
  return f;
}

// Dense matrix of a linear velocity operator on the interior dofs.
inline Eigen::MatrixXd assemble(const GridSpec& g,
                                const std::function<VelocityField(const VelocityField&)>& op) {
  const auto idx = interior_dofs(g);
  const Eigen::Index m = Eigen::Index(idx.size());
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    VelocityField e(g);
    e[idx[std::size_t(c)]] = 1.0;
    a.col(c) = gather(op(e), idx);
  }
  return a;
}

// Columns are the curls of interior node hat stream functions: a basis of
// the discretely divergence-free fields.
inline Eigen::MatrixXd stream_basis(const GridSpec& g) {
  const int n = g.n();
  const auto idx = interior_dofs(g);
  Eigen::MatrixXd c(Eigen::Index(idx.size()), Eigen::Index((n - 1) * (n - 1)));
  std::vector<double> psi(std::size_t(n + 1) * (n + 1), 0.0);
  Eigen::Index col = 0;
  for (int i = 1; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      const std::size_t k = std::size_t(i) * (n + 1) + j;
      psi[k] = 1.0;
      c.col(col++) = gather(curl_of_stream(g, psi), idx);
      psi[k] = 0.0;
    }
  return c;
}

// Face samples of the manufactured stream function x^2(1-x)^2 y^2(1-y)^2.
struct PolyStream {
  static double X(double x) { return x * x * (1 - x) * (1 - x); }
  static double X1(double x) { return 2 * x - 6 * x * x + 4 * x * x * x; }
  static double X2(double x) { return 2 - 12 * x + 12 * x * x; }
  static double X3(double x) { return -12 + 24 * x; }
};

}  // namespace kvlab::testing
