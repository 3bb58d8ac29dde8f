#pragma once
// Steady Navier-Stokes equilibrium (u_inf, p_inf) on the MAC grid:
// Picard iteration on frozen advection, then Newton polishing.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "kvlab/grid.hpp"
#include "kvlab/saddle.hpp"

namespace kvlab {

struct SteadyProblem {
  FlowParameters params;
  VelocityField f_inf;

  const GridSpec& grid() const { return f_inf.grid(); }
  void validate() const;
};

struct SteadyOptions {
  double picard_tol = 1e-6;  // on |du| / |u|
  int picard_max = 200;
  double newton_tol = 1e-12;  // on the relative projected residual
  int newton_max = 20;
};

enum class SteadyStatus { converged, picard_stagnation, newton_divergence };
std::string to_string(SteadyStatus s);

struct SteadyState {
  VelocityField u_inf;
  PressureField p_inf;  // mean-zero
  int picard_iters = 0;
  int newton_iters = 0;
  double residual = 0.0;  // steady_residual of the returned state
  SteadyStatus status = SteadyStatus::converged;
};

// |P(-nu lap u + conv(u, u) - f)| / |f| (absolute when f = 0); the pairing
// with every discrete divergence-free test function.
double steady_residual(const VelocityField& u, const VelocityField& f, double nu);

// Full momentum residual including the pressure, same normalisation.
double steady_momentum_residual(const VelocityField& u, const PressureField& p,
                                const VelocityField& f, double nu);

// Picard stagnation returns the best iterate with status picard_stagnation;
// a diverging Newton phase falls back to the Picard iterate with status
// newton_divergence. Linear solver failures propagate as NonConvergence.
SteadyState solve_steady(const SteadyProblem& prob, const SolverSettings& settings,
                         const SteadyOptions& opt = {});

struct AprioriReport {
  double lambda1 = 0.0;
  double f_minus1 = 0.0;       // |f_inf|_{-1}
  double u_l2 = 0.0;
  double u_grad = 0.0;
  double u_stokes = 0.0;       // |stokes_apply(u_inf)|
  double u_max = 0.0;
  double u_l4 = 0.0;
  double grad_u_l4 = 0.0;
  // (i) nu |grad u| <= |f|_{-1}
  double gradient_lhs = 0.0;
  bool gradient_bound = true;
  // (ii) |u| <= |f|_{-1} / (nu sqrt(lambda1))
  double l2_rhs = 0.0;
  bool l2_bound = true;
  // (iii)-(v): empirical constants, 0 when the denominator vanishes.
  double stokes_constant = 0.0;  // nu |Su|^2 / (|f|^2 + |u|^2 |grad u|^4)
  double max_constant = 0.0;     // |u|_inf / (|u|^1/2 |Su|^1/2)
  double l4_constant = 0.0;      // |u|_L4 / (|u|^1/2 |grad u|^1/2)
  double grad_l4_constant = 0.0; // |grad u|_L4 / (|grad u|^1/2 |Su|^1/2)
};

AprioriReport check_apriori_bounds(const SteadyState& state, const SteadyProblem& prob);

// L4 norm of the velocity gradient, with every derivative interpolated to
// cell centres.
double gradient_l4_norm(const VelocityField& f);

// Manufactured equilibrium: u* = curl of x^2(1-x)^2 y^2(1-y)^2,
// p* = cos(pi x) cos(pi y), and the face samples of
// f = -nu lap u* + u*.grad u* + grad p*.
struct ManufacturedSteady {
  VelocityField u_star;
  PressureField p_star;  // mean-zero cell samples
  VelocityField f;
};
ManufacturedSteady manufactured_steady(const GridSpec& g, double nu);

// Portable dump: one "# {json}" header line, then rows
// "<field>,<i>,<j>,<value>" for field in {u, v, p, fu, fv}. Values use %.17g.
void write_steady_csv(std::ostream& os, const SteadyState& s, const SteadyProblem& prob,
                      const std::string& extra_json = "{}");

class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SteadyArtifact {
  SteadyProblem problem;
  SteadyState state;
  std::string header;  // raw JSON header
};
// Throws ArtifactError on any structural problem.
SteadyArtifact read_steady_csv(std::istream& is);

}  // namespace kvlab
