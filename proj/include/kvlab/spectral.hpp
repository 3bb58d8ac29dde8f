#pragma once
// Constants consumed by the decay theory: the Dirichlet eigenvalue, the
// stability eigenvalue of the symmetrised linearisation about u_inf, the
// coercivity constant gamma1, the admissible decay-rate bound and an
// empirical trilinear constant.

#include <cstdint>
#include <stdexcept>

#include "kvlab/grid.hpp"

namespace kvlab {

struct SpectralConstants {
  double nu = 0.0;
  double kappa = 0.0;
  double lambda1 = 0.0;
  double lambda0 = 0.0;
  double gamma1 = 0.0;
  double alpha_max = 0.0;
  double n_estimate = 0.0;
  bool a1_satisfied = false;
};

class Gamma1NotPositive : public std::domain_error {
 public:
  explicit Gamma1NotPositive(double g)
      : std::domain_error("coercivity constant gamma1 = " + std::to_string(g) + " is not positive") {}
};

class EigenNonConvergence : public std::runtime_error {
 public:
  EigenNonConvergence(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct EigenPair {
  double value = 0.0;
  VelocityField field;  // unit l2 norm, divergence-free
  double residual = 0.0;
  int iterations = 0;
};

// Smallest eigenvalue of the componentwise Dirichlet Laplacian by inverse
// power iteration (relative eigen-residual <= tol).
double dirichlet_lambda1(const GridSpec& g, double tol = 1e-10);

// Minimal eigenvalue of P(-nu lap + S(u_inf)) on divergence-free fields,
// where S is the symmetric part of the linearised convection
// z -> convection_operator(z, u_inf). A negative value is returned as is.
EigenPair a1_eigenvalue(const VelocityField& u_inf, double nu, double tol = 1e-8);

// inf over divergence-free z of [nu |grad z|^2 + b(z, u_inf, z)] / |grad z|^2,
// with the minimiser normalised to unit l2 norm.
EigenPair gamma1_constant(const VelocityField& u_inf, double nu, double tol = 1e-8);

// lambda1 / (4 (1 + lambda1 kappa)) * min(nu, gamma1). Throws Gamma1NotPositive.
double alpha_bound(const SpectralConstants& c, double kappa);

// Sentinel for delta == 0, where the time weight is identically one.
inline constexpr double unit_time_weight = -1.0;

// 4 delta (1 + kappa lambda1) / lambda1 * max(1/nu, 1/gamma1), or
// unit_time_weight when delta == 0.
double t_bar(double delta, double kappa, const SpectralConstants& c);

// max{t_bar, t}^beta, or 1 in the unit-weight case.
double time_weight(double t, double t_bar_value, double beta);

// Largest |b(u,v,w)| / (|grad u| |grad v| |grad w|) found from `samples`
// random starts, each refined by alternating exact maximisation in one
// argument at a time.
double estimate_trilinear_N(const GridSpec& g, int samples, std::uint64_t seed = 1);

struct SpectralOptions {
  double eig_tol = 1e-8;
  int n_samples = 64;
  std::uint64_t seed = 1;
};

SpectralConstants compute_spectral_constants(const VelocityField& u_inf, double nu, double kappa,
                                             const SpectralOptions& opt = {});

}  // namespace kvlab
