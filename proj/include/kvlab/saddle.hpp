#pragma once
// Linear saddle-point solves
//   (a I - b laplacian + E) w + grad p = rhs,  div w = 0,  w = 0 on walls,
// where E is an optional linearised convection term.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kvlab/convection.hpp"
#include "kvlab/grid.hpp"

namespace kvlab {

enum class SaddleMethod { schur_cg, direct_sparse };

std::string to_string(SaddleMethod m);
SaddleMethod saddle_method_from_string(const std::string& s);

struct SolverSettings {
  double tol = 1e-10;
  int max_iter = 500;
  SaddleMethod method = SaddleMethod::schur_cg;

  void validate() const;
};

// E w = scale * (sum_t convection_operator(t, w) + sum_r convection_operator(w, r)).
struct LinearAdvection {
  std::vector<VelocityField> transport;
  std::vector<VelocityField> reaction;
  double scale = 1.0;

  bool empty() const { return transport.empty() && reaction.empty(); }
  VelocityField apply(const VelocityField& w) const;
  std::vector<SparseEntry> entries(const GridSpec& g) const;
};

struct SaddleProblem {
  double mass_coef = 0.0;
  double stiffness_coef = 1.0;
  VelocityField rhs;
  LinearAdvection advection;

  const GridSpec& grid() const { return rhs.grid(); }
  void validate() const;
};

struct ResidualReport {
  std::string method;
  int iterations = 0;
  double momentum = 0.0;    // |residual| / |rhs|
  double divergence = 0.0;  // h |div w| / |(aI - b lap)^{-1} rhs|
};

struct SaddleSolution {
  VelocityField velocity;
  PressureField pressure;  // mean-zero
  ResidualReport report;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved residual " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

SaddleSolution solve_saddle(const SaddleProblem& prob, const SolverSettings& settings);

// Momentum and divergence residuals of a candidate solution, normalised as
// in ResidualReport.
ResidualReport saddle_residual(const SaddleProblem& prob, const VelocityField& w,
                               const PressureField& p);

// Sparse LU of the bordered saddle matrix. Coefficients are unrestricted
// (shifted operators may be indefinite); the pressure mean is fixed by a
// Lagrange multiplier row.
class SaddleFactorization {
 public:
  SaddleFactorization(const GridSpec& g, double a, double b,
                      const std::vector<SparseEntry>& extra = {});
  ~SaddleFactorization();
  SaddleFactorization(SaddleFactorization&&) noexcept;
  SaddleFactorization& operator=(SaddleFactorization&&) noexcept;

  const GridSpec& grid() const;
  void solve(const VelocityField& rhs, VelocityField& w, PressureField& p) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct InfSupEstimate {
  double constant = 0.0;      // smallest nonzero singular value
  int kernel_dimension = 0;   // number of (numerically) zero singular values
};

// Dense analysis of the scaled divergence; intended for grids up to 32x32.
InfSupEstimate inf_sup_analysis(const GridSpec& g);
double inf_sup_estimate(const GridSpec& g);

}  // namespace kvlab
