#pragma once
// Time integration of the perturbation z = u - u_inf, q = p - p_inf:
//   (I - kappa lap) z_t - nu lap z + conv(z, z) + conv(u_inf, z)
//     + conv(z, u_inf) + grad q = F,   div z = 0,
// with linearly implicit advection, plus the per-step diagnostic record.

#include <functional>
#include <memory>
#include <iosfwd>
#include <string>
#include <vector>

#include "kvlab/decay.hpp"
#include "kvlab/forcing.hpp"
#include "kvlab/grid.hpp"
#include "kvlab/saddle.hpp"
#include "kvlab/spectral.hpp"

namespace kvlab {

enum class Scheme { semi_implicit_be, semi_implicit_cn };
std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct EvolutionConfig {
  FlowParameters params;
  VelocityField u_inf;
  ForcingProfile forcing;
  VelocityField z0;  // projected on ingestion
  double dt = 0.01;
  double horizon = 1.0;
  Scheme scheme = Scheme::semi_implicit_be;
  SolverSettings solver;
  // false drops conv(z, z): the linearised system about u_inf.
  bool nonlinear = true;

  const GridSpec& grid() const { return u_inf.grid(); }
  int steps() const;
  void validate() const;
};

struct StepResult {
  VelocityField z;
  PressureField q;  // at t^{n+1} (BE) or t^{n+1/2} (CN)
  int iterations = 0;
  double momentum = 0.0;
};

// One step of the configured scheme. The u_inf part of the operator is
// factored once; the frozen transport conv(z^n, .) is handled by defect
// correction, with a full refactorisation when that stalls.
class Stepper {
 public:
  explicit Stepper(const EvolutionConfig& cfg);
  ~Stepper();
  Stepper(Stepper&&) noexcept;

  // z_prev is only read by Crank-Nicolson (extrapolated transport); pass
  // z itself on the first step.
  StepResult advance(const VelocityField& z, const VelocityField& z_prev, double t) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct DecayRecord {
  double t = 0.0;
  double nz = 0.0, ngz = 0.0, ndz = 0.0;
  double nzt = 0.0, ngzt = 0.0, kndzt = 0.0;
  double nq = 0.0, ngq = 0.0;
  double E = 0.0;
  double wE = 0.0, wgz = 0.0, wdz = 0.0, wzt = 0.0, wq = 0.0;
  double gronwall_res = 0.0;
  double kndzt_bound = 0.0;  // right side of the kappa |S z_t| triangle bound
};

inline constexpr const char* kTimeseriesHeader =
    "t,nz,ngz,ndz,nzt,ngzt,kndzt,nq,ngq,E,wE,wgz,wdz,wzt,wq,gronwall_res";

struct KappaDeltaZt {
  double lhs = 0.0;  // kappa |S (z^{n+1} - z^n) / dt|
  double rhs = 0.0;  // |z_t| + nu |S zbar| + |conv(a, zbar)| + |conv(u_inf, zbar)|
                     //   + |conv(zbar, u_inf)| + |F|
};
// zbar and the transport a follow the scheme: zbar = z^{n+1}, a = z^n (BE);
// zbar = (z^n + z^{n+1}) / 2, a = (3 z^n - z^{n-1}) / 2 (CN).
KappaDeltaZt kappa_delta_zt(const VelocityField& z_prev, const VelocityField& z,
                            const VelocityField& z_next, double t, const EvolutionConfig& cfg);

struct RunResult {
  std::vector<DecayRecord> records;
  VelocityField z_final;
  PressureField q_final;
  bool aborted = false;
  std::string abort_reason;
  int steps = 0;
  int linear_iterations = 0;
  double worst_momentum = 0.0;
  double max_divergence = 0.0;
  // (|z_t(0)|^2 + kappa |grad z_t(0)|^2) /
  //   (|F(0)|^2 + |S z0|^2 + |grad z0|^2 |S z0|^2)
  double initial_zt_constant = 0.0;
  double max_kappa_excess = 0.0;  // max over steps of lhs - rhs (<= 0 expected)
};

using StepObserver = std::function<void(int step, double t, const VelocityField& z)>;

// Records every step from t = 0. A linear-solver failure stops the run with
// `aborted` set and the partial record kept.
RunResult run(const EvolutionConfig& cfg, const SpectralConstants& sc, const DecayParameters& dp,
              const StepObserver& observer = {});

void write_timeseries_csv(std::ostream& os, const std::vector<DecayRecord>& records);
// Throws std::runtime_error on a header or row mismatch.
std::vector<DecayRecord> read_timeseries_csv(std::istream& is);

}  // namespace kvlab
