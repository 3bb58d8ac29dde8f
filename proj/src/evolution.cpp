#include "kvlab/evolution.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "kvlab/operators.hpp"

namespace kvlab {

std::string to_string(Scheme s) {
  return s == Scheme::semi_implicit_be ? "semi_implicit_be" : "semi_implicit_cn";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "semi_implicit_be") return Scheme::semi_implicit_be;
  if (s == "semi_implicit_cn") return Scheme::semi_implicit_cn;
  throw std::invalid_argument("unknown time scheme '" + s + "'");
}

int EvolutionConfig::steps() const { return int(std::llround(horizon / dt)); }

void EvolutionConfig::validate() const {
  params.validate();
  forcing.validate();
  solver.validate();
  const GridSpec& g = grid();
  if (g.n() < 8) throw std::invalid_argument("evolution needs a grid of at least 8x8");
  require_same(z0.grid(), g);
  if (forcing.shape.size() != 0) require_same(forcing.shape.grid(), g);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(horizon >= 10.0 * dt * (1.0 - 1e-12)))
    throw std::invalid_argument("horizon must cover at least ten time steps");
  if (std::abs(steps() * dt - horizon) > 1e-9 * horizon)
    throw std::invalid_argument("horizon must be an integer multiple of dt");
  if (!z0.boundary_is_zero()) throw std::invalid_argument("z0 must vanish on the walls");
}

namespace {

struct Layout {
  double a = 0.0;      // mass coefficient of the step operator
  double b = 0.0;      // stiffness coefficient
  double scale = 1.0;  // convection weight (1 for BE, 1/2 for CN)
};

Layout step_layout(const EvolutionConfig& cfg) {
  const double dt = cfg.dt;
  const double k = cfg.params.kappa;
  const double nu = cfg.params.nu;
  if (cfg.scheme == Scheme::semi_implicit_be) return {1.0 / dt, k / dt + nu, 1.0};
  return {1.0 / dt, k / dt + 0.5 * nu, 0.5};
}

// Frozen transport of conv(z, z): z^n (BE) or the extrapolation z* (CN).
VelocityField transport_field(const EvolutionConfig& cfg, const VelocityField& z,
                              const VelocityField& z_prev) {
  if (cfg.scheme == Scheme::semi_implicit_be) return z;
  VelocityField a = 1.5 * z;
  a.axpy(-0.5, z_prev);
  return a;
}

// conv(a, w) + conv(u_inf, w) + conv(w, u_inf); the first term only when
// the nonlinearity is kept.
VelocityField advection(const EvolutionConfig& cfg, const VelocityField& a, const VelocityField& w) {
  VelocityField out = convection_operator(cfg.u_inf, w);
  out += convection_operator(w, cfg.u_inf);
  if (cfg.nonlinear) out += convection_operator(a, w);
  return out;
}

// F(t) on the grid; an unset shape means no forcing.
VelocityField forcing_at(const EvolutionConfig& cfg, double t) {
  if (cfg.forcing.shape.size() == 0) return VelocityField(cfg.grid());
  return evaluate(cfg.forcing, t);
}

double rel(double num, double den) { return den > 0.0 ? num / den : num; }

KappaDeltaZt triangle_bound(const EvolutionConfig& cfg, const VelocityField& zt,
                            const VelocityField& zbar, const VelocityField& a,
                            const VelocityField& f) {
  KappaDeltaZt out;
  out.lhs = cfg.params.kappa * norms(stokes_apply(zt)).l2;
  out.rhs = norms(zt).l2 + cfg.params.nu * norms(stokes_apply(zbar)).l2 +
            norms(convection_operator(cfg.u_inf, zbar)).l2 +
            norms(convection_operator(zbar, cfg.u_inf)).l2 + norms(f).l2;
  if (cfg.nonlinear) out.rhs += norms(convection_operator(a, zbar)).l2;
  return out;
}

}  // namespace

struct Stepper::Impl {
  EvolutionConfig cfg;
  Layout layout;
  std::optional<SaddleFactorization> base;  // direct_sparse only
};

Stepper::Stepper(const EvolutionConfig& cfg) : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  impl_->cfg = cfg;
  impl_->layout = step_layout(cfg);
  if (cfg.solver.method == SaddleMethod::direct_sparse) {
    LinearAdvection fixed{{cfg.u_inf}, {cfg.u_inf}, impl_->layout.scale};
    impl_->base.emplace(cfg.grid(), impl_->layout.a, impl_->layout.b, fixed.entries(cfg.grid()));
  }
}

Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;

StepResult Stepper::advance(const VelocityField& z, const VelocityField& z_prev, double t) const {
  const EvolutionConfig& cfg = impl_->cfg;
  const Layout& L = impl_->layout;
  const double dt = cfg.dt;
  const VelocityField a = transport_field(cfg, z, z_prev);

  VelocityField rhs = (1.0 / dt) * z;
  const VelocityField lap = laplacian(z);
  rhs.axpy(-cfg.params.kappa / dt, lap);
  if (cfg.scheme == Scheme::semi_implicit_be) {
    rhs += forcing_at(cfg, t + dt);
  } else {
    rhs.axpy(0.5 * cfg.params.nu, lap);
    rhs.axpy(-0.5, advection(cfg, a, z));
    rhs += forcing_at(cfg, t + 0.5 * dt);
  }

  SaddleProblem prob;
  prob.mass_coef = L.a;
  prob.stiffness_coef = L.b;
  prob.rhs = rhs;
  prob.advection.scale = L.scale;
  prob.advection.transport = {cfg.u_inf};
  if (cfg.nonlinear) prob.advection.transport.push_back(a);
  prob.advection.reaction = {cfg.u_inf};

  StepResult out;
  if (!impl_->base) {
    SaddleSolution s = solve_saddle(prob, cfg.solver);
    out.z = std::move(s.velocity);
    out.q = std::move(s.pressure);
    out.iterations = s.report.iterations;
    out.momentum = s.report.momentum;
    return out;
  }

  // Defect correction on conv(a, .) around the prefactored u_inf operator.
  const double rhs_norm = norms(rhs).l2;
  VelocityField w;
  PressureField q;
  impl_->base->solve(rhs, w, q);
  int it = 1;
  if (!cfg.nonlinear || rhs_norm == 0.0) {
    out.z = std::move(w);
    out.q = std::move(q);
    out.iterations = it;
    out.momentum = saddle_residual(prob, out.z, out.q).momentum;
    return out;
  }
  double res = INFINITY;
  for (; it <= 50; ++it) {
    VelocityField r = L.a * w;
    r.axpy(-L.b, laplacian(w));
    r += prob.advection.apply(w);
    r += gradient(q);
    r -= rhs;
    const double next = rel(norms(r).l2, rhs_norm);
    if (next <= cfg.solver.tol) {
      out.z = std::move(w);
      out.q = std::move(q);
      out.iterations = it;
      out.momentum = next;
      return out;
    }
    if (!std::isfinite(next) || next > 0.9 * res) break;  // stalled
    res = next;
    VelocityField shifted = rhs;
    shifted.axpy(-L.scale, convection_operator(a, w));
    impl_->base->solve(shifted, w, q);
  }

  SolverSettings direct = cfg.solver;
  direct.method = SaddleMethod::direct_sparse;
  SaddleSolution s = solve_saddle(prob, direct);
  out.z = std::move(s.velocity);
  out.q = std::move(s.pressure);
  out.iterations = it + 1;
  out.momentum = s.report.momentum;
  return out;
}

KappaDeltaZt kappa_delta_zt(const VelocityField& z_prev, const VelocityField& z,
                            const VelocityField& z_next, double t, const EvolutionConfig& cfg) {
  VelocityField zt = (1.0 / cfg.dt) * (z_next - z);
  if (cfg.scheme == Scheme::semi_implicit_be)
    return triangle_bound(cfg, zt, z_next, z, forcing_at(cfg, t + cfg.dt));
  const VelocityField zbar = 0.5 * (z + z_next);
  return triangle_bound(cfg, zt, zbar, transport_field(cfg, z, z_prev),
                        forcing_at(cfg, t + 0.5 * cfg.dt));
}

namespace {

DecayRecord make_record(double t, const VelocityField& z, const VelocityField& zt,
                        const PressureField& q, const EvolutionConfig& cfg,
                        const DecayParameters& dp) {
  DecayRecord r;
  r.t = t;
  const Norms nz = norms(z);
  const Norms nzt = norms(zt);
  const Norms nq = norms(q);
  const double kappa = cfg.params.kappa;
  r.nz = nz.l2;
  r.ngz = nz.h1_semi;
  r.ndz = norms(stokes_apply(z)).l2;
  r.nzt = nzt.l2;
  r.ngzt = nzt.h1_semi;
  r.kndzt = kappa * norms(stokes_apply(zt)).l2;
  r.nq = nq.l2;
  r.ngq = nq.h1_semi;
  r.E = r.nz * r.nz + kappa * r.ngz * r.ngz;
  const double w = dp.weight(t);
  r.wE = w * r.E;
  r.wgz = w * r.ngz * r.ngz;
  r.wdz = w * r.ndz * r.ndz;
  r.wzt = w * (r.nzt * r.nzt + kappa * r.ngzt * r.ngzt);
  r.wq = w * (r.nq * r.nq + r.ngq * r.ngq);
  return r;
}

bool finite(const VelocityField& f) {
  for (double x : f.values())
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

RunResult run(const EvolutionConfig& cfg_in, const SpectralConstants& sc,
              const DecayParameters& dp, const StepObserver& observer) {
  EvolutionConfig cfg = cfg_in;
  cfg.validate();
  cfg.z0 = project(cfg.z0).velocity;
  cfg.z0.clear_boundary();
  const GridSpec& g = cfg.grid();
  const double h = g.h();
  const double dt = cfg.dt;
  const int steps = cfg.steps();
  const double lam = sc.lambda1;
  const double gam = sc.gamma1;

  RunResult out;
  out.records.reserve(std::size_t(steps) + 1);

  auto divergence_of = [&](const VelocityField& z) {
    return rel(h * norms(divergence(z)).l2, norms(z).l2);
  };
  auto gronwall = [&](const DecayRecord& prev, const DecayRecord& cur) {
    const double e0 = std::exp(2.0 * dp.alpha * prev.t);
    const double e1 = std::exp(2.0 * dp.alpha * cur.t);
    const double f = norms(forcing_at(cfg, cur.t)).l2;
    return (e1 * cur.E - e0 * prev.E) / dt + gam * e1 * cur.ngz * cur.ngz -
           2.0 / (lam * gam) * e1 * f * f;
  };

  // t = 0: z_t(0) and q(0) from the equation itself.
  const VelocityField& z0 = cfg.z0;
  const VelocityField f0 = forcing_at(cfg, 0.0);
  SaddleProblem init;
  init.mass_coef = 1.0;
  init.stiffness_coef = cfg.params.kappa;
  init.rhs = f0;
  init.rhs.axpy(cfg.params.nu, laplacian(z0));
  init.rhs -= advection(cfg, z0, z0);
  VelocityField zt0(g);
  PressureField q0(g);
  try {
    if (norms(init.rhs).max > 0.0) {
      SaddleSolution s = solve_saddle(init, cfg.solver);
      zt0 = std::move(s.velocity);
      q0 = std::move(s.pressure);
      out.worst_momentum = s.report.momentum;
      out.linear_iterations += s.report.iterations;
    }
  } catch (const NonConvergence& e) {
    out.aborted = true;
    out.abort_reason = std::string("initial time derivative: ") + e.what();
    out.z_final = z0;
    out.q_final = q0;
    return out;
  }
  out.records.push_back(make_record(0.0, z0, zt0, q0, cfg, dp));
  {
    const KappaDeltaZt kb = triangle_bound(cfg, zt0, z0, z0, f0);
    out.records.back().kndzt_bound = kb.rhs;
    out.max_kappa_excess = kb.lhs - kb.rhs;
    const double sdz = norms(stokes_apply(z0)).l2;
    const double gz = norms(z0).h1_semi;
    const double den = std::pow(norms(f0).l2, 2) + sdz * sdz + gz * gz * sdz * sdz;
    out.initial_zt_constant = den > 0.0 ? out.records.back().wzt / dp.weight(0.0) / den : 0.0;
  }
  out.max_divergence = divergence_of(z0);
  if (observer) observer(0, 0.0, z0);

  Stepper stepper(cfg);
  VelocityField z_prev = z0;
  VelocityField z = z0;
  PressureField q = q0;
  for (int n = 0; n < steps; ++n) {
    const double t = n * dt;
    StepResult s;
    try {
      s = stepper.advance(z, z_prev, t);
    } catch (const NonConvergence& e) {
      out.aborted = true;
      out.abort_reason = "step " + std::to_string(n + 1) + ": " + e.what();
      break;
    }
    if (!finite(s.z)) {
      out.aborted = true;
      out.abort_reason = "step " + std::to_string(n + 1) + ": non-finite state";
      break;
    }
    out.linear_iterations += s.iterations;
    out.worst_momentum = std::max(out.worst_momentum, s.momentum);
    out.max_divergence = std::max(out.max_divergence, divergence_of(s.z));

    const KappaDeltaZt kb = kappa_delta_zt(z_prev, z, s.z, t, cfg);
    out.max_kappa_excess = std::max(out.max_kappa_excess, kb.lhs - kb.rhs);
    const double t1 = (n + 1) * dt;
    const VelocityField zt = (1.0 / dt) * (s.z - z);
    DecayRecord rec = make_record(t1, s.z, zt, s.q, cfg, dp);
    rec.kndzt_bound = kb.rhs;
    rec.gronwall_res = gronwall(out.records.back(), rec);
    out.records.push_back(rec);
    out.steps = n + 1;

    z_prev = std::move(z);
    z = std::move(s.z);
    q = std::move(s.q);
    if (observer) observer(n + 1, t1, z);
  }
  out.z_final = std::move(z);
  out.q_final = std::move(q);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kColumns = 16;

std::array<double DecayRecord::*, kColumns> columns() {
  return {&DecayRecord::t,   &DecayRecord::nz,   &DecayRecord::ngz,  &DecayRecord::ndz,
          &DecayRecord::nzt, &DecayRecord::ngzt, &DecayRecord::kndzt, &DecayRecord::nq,
          &DecayRecord::ngq, &DecayRecord::E,    &DecayRecord::wE,   &DecayRecord::wgz,
          &DecayRecord::wdz, &DecayRecord::wzt,  &DecayRecord::wq,   &DecayRecord::gronwall_res};
}

}  // namespace

void write_timeseries_csv(std::ostream& os, const std::vector<DecayRecord>& records) {
  os << kTimeseriesHeader << '\n';
  char buf[32];
  const auto cols = columns();
  for (const auto& r : records) {
    for (int c = 0; c < kColumns; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", r.*cols[c]);
      if (c) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

std::vector<DecayRecord> read_timeseries_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTimeseriesHeader)
    throw std::runtime_error("timeseries: unexpected header");
  std::vector<DecayRecord> out;
  const auto cols = columns();
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    DecayRecord r;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= kColumns) throw std::runtime_error("timeseries: too many columns on row " + std::to_string(row));
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size())
        throw std::runtime_error("timeseries: bad number on row " + std::to_string(row));
      r.*cols[c++] = v;
    }
    if (c != kColumns) throw std::runtime_error("timeseries: short row " + std::to_string(row));
    out.push_back(r);
  }
  return out;
}

}  // namespace kvlab
