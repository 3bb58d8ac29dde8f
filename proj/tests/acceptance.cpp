// Acceptance criteria. `acceptance K` runs criterion K, prints its sub-checks
// and exactly one "PASS criterion K ..." or "FAIL criterion K ..." line, and
// exits 0 on pass.

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kvlab/commands.hpp"
#include "kvlab/evolution.hpp"
#include "kvlab/spectral.hpp"
#include "kvlab/steady.hpp"
#include "kvlab/verification.hpp"
#include "support.hpp"

using namespace kvlab;
using namespace kvlab::testing;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Report {
  bool pass = true;
  std::ostringstream detail;

  // Records one sub-check; all must hold for the criterion to pass.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << "  [" << (ok ? "ok" : "FAILED") << "] " << what << "\n";
  }
  void note(const std::string& what) { detail << "  " << what << "\n"; }
};

std::string num(double x, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kvlab_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

CommandOptions command_options(const fs::path& dir, const std::string& name, const std::string& config) {
  std::ofstream(dir / (name + ".cfg"), std::ios::binary) << config;
  CommandOptions o;
  o.config_path = (dir / (name + ".cfg")).string();
  o.out_dir = (dir / name).string();
  return o;
}

// steady + spectral + evolve + verify; returns the verify exit code, or the
// first failing exit code before it.
int pipeline(const CommandOptions& o, Report& r, const std::string& label) {
  for (auto [name, cmd] : {std::pair{"steady", cmd_steady}, std::pair{"spectral", cmd_spectral},
                           std::pair{"evolve", cmd_evolve}}) {
    const int rc = cmd(o);
    if (rc != exit_pass) {
      r.note(label + ": " + name + " exited " + std::to_string(rc));
      return rc;
    }
  }
  return cmd_verify(o);
}

const json* find_claim(const json& verdicts, const std::string& id) {
  for (const auto& c : verdicts.at("claims"))
    if (c.at("claim") == id) return &c;
  return nullptr;
}

double jnum(const json& j) { return j.is_null() ? NAN : j.get<double>(); }

// ---------------------------------------------------------------------------

void criterion1(Report& r) {
  std::mt19937_64 rng(101);
  double skew = 0.0, self = 0.0, adj = 0.0;
  for (int n : {16, 32}) {
    const GridSpec g = GridSpec::square(n);
    for (int trial = 0; trial < 100; ++trial) {
      const VelocityField u = random_velocity(g, rng), v = random_velocity(g, rng),
                          w = random_velocity(g, rng);
      const double scale = norms(u).max * norms(v).h1_semi * norms(w).l2 + 1.0;
      skew = std::max(skew, std::abs(trilinear_b(u, v, w) + trilinear_b(u, w, v)) / scale);
      self = std::max(self, std::abs(trilinear_b(v, w, w)) / scale);
      const PressureField p = random_pressure(g, rng);
      const double pscale = norms(gradient(p)).l2 * norms(u).l2 + 1.0;
      adj = std::max(adj, std::abs(inner(gradient(p), u) + inner(p, divergence(u))) / pscale);
    }
  }
  r.check(skew <= 1e-12, "max |b(u,v,w) + b(u,w,v)| / scale = " + num(skew) + " <= 1e-12 (200 triples)");
  r.check(self <= 1e-12, "max |b(v,w,w)| / scale = " + num(self) + " <= 1e-12");
  r.check(adj <= 1e-12, "max |(grad p, u) + (p, div u)| / scale = " + num(adj) + " <= 1e-12");
}

void criterion2(Report& r) {
  const GridSpec g = GridSpec::square(16);
  const double lam = dirichlet_lambda1(g);
  const double s = std::sin(pi * g.h() / 2.0);
  const double closed = 8.0 * s * s / (g.h() * g.h());
  const Eigen::MatrixXd a = assemble(g, [](const VelocityField& f) { return -1.0 * laplacian(f); });
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  const double dense = es.eigenvalues()(0);
  r.check(std::abs(lam - closed) <= 1e-9 * closed,
          "16x16: lambda1 = " + num(lam, 15) + ", closed form " + num(closed, 15));
  r.check(std::abs(lam - dense) <= 1e-9 * dense, "16x16: dense eigensolver " + num(dense, 15));
  const double fine = dirichlet_lambda1(GridSpec::square(64));
  const double rel = std::abs(fine - 2.0 * pi * pi) / (2.0 * pi * pi);
  r.check(rel <= 0.005, "64x64: lambda1 = " + num(fine, 10) + ", relative gap to 2 pi^2 " + num(rel));
}

void criterion3(Report& r) {
  std::mt19937_64 rng(303);
  int ok1 = 0, ok2 = 0;
  double worst1 = 0.0, worst2 = 0.0;
  for (int n : {16, 32}) {
    const GridSpec g = GridSpec::square(n);
    const double lam = dirichlet_lambda1(g);
    for (int trial = 0; trial < 25; ++trial) {
      const VelocityField f = random_solenoidal(g, rng);
      const Norms nf = norms(f);
      const double sn = norms(stokes_apply(f)).l2;
      const double l2 = nf.l2 * nf.l2, g2 = nf.h1_semi * nf.h1_semi;
      ok1 += l2 <= g2 / lam;
      ok2 += g2 <= sn * sn / lam;
      worst1 = std::max(worst1, l2 * lam / g2);
      worst2 = std::max(worst2, g2 * lam / (sn * sn));
    }
  }
  r.check(ok1 == 50, std::to_string(ok1) + "/50 fields satisfy |f|^2 <= |grad f|^2 / lambda1 (max ratio " +
                         num(worst1, 6) + ")");
  r.check(ok2 == 50, std::to_string(ok2) + "/50 fields satisfy |grad f|^2 <= |S f|^2 / lambda1 (max ratio " +
                         num(worst2, 6) + ")");
}

void criterion4(Report& r) {
  const GridSpec g = GridSpec::square(32);
  SolverSettings direct;
  direct.method = SaddleMethod::direct_sparse;
  const std::vector<std::pair<std::string, double>> data = {{"eigenfield", 10.0}, {"stream_poly", 20.0},
                                                            {"random", 15.0}};
  for (const auto& [shape, amp] : data) {
    VelocityField f;
    if (shape == "random") {
      std::mt19937_64 rng(404);
      f = random_velocity(g, rng);
      f *= 1.0 / norms(f).l2;
    } else {
      f = spatial_shape(g, shape);
    }
    SteadyProblem prob{{1.0, 0.0}, amp * f};
    const SteadyState s = solve_steady(prob, direct);
    const AprioriReport rep = check_apriori_bounds(s, prob);
    const double margin = 1.0 - rep.gradient_lhs / rep.f_minus1;
    r.check(s.status == SteadyStatus::converged && rep.gradient_lhs < rep.f_minus1 && margin > 1e-6,
            shape + " x " + num(amp) + ": nu |grad u| = " + num(rep.gradient_lhs, 6) + " <= |f|_-1 = " +
                num(rep.f_minus1, 6) + " (margin " + num(margin, 3) + ")");
  }
  std::vector<double> errs;
  for (int n : {16, 32, 64}) {
    const GridSpec gn = GridSpec::square(n);
    const ManufacturedSteady m = manufactured_steady(gn, 1.0);
    const SteadyState s = solve_steady(SteadyProblem{{1.0, 0.0}, m.f}, direct);
    errs.push_back(norms(s.u_inf - m.u_star).l2);
  }
  for (int k = 1; k < 3; ++k) {
    const double ratio = errs[k - 1] / errs[k];
    r.check(ratio >= 3.5 && ratio <= 4.5, "manufactured error ratio " + std::to_string(8 << k) + "->" +
                                              std::to_string(16 << k) + ": " + num(ratio));
  }
}

void criterion5(Report& r) {
  const GridSpec g = GridSpec::square(16);
  const double nu = 0.5;
  const SteadyProblem prob{{nu, 0.0}, 12.0 * spatial_shape(g, "stream_poly")};
  SolverSettings direct;
  direct.method = SaddleMethod::direct_sparse;
  const SteadyState s = solve_steady(prob, direct);
  const VelocityField& u = s.u_inf;
  r.note("steady state |grad u| = " + num(norms(u).h1_semi));

  const EigenPair e = a1_eigenvalue(u, nu);
  const double rayleigh = nu * std::pow(norms(e.field).h1_semi, 2) + trilinear_b(e.field, u, e.field);
  r.check(std::abs(rayleigh - e.value) <= 1e-7 * std::abs(e.value),
          "Rayleigh identity: nu |grad e|^2 + b(e, u, e) = " + num(rayleigh, 12) + ", lambda0 = " +
              num(e.value, 12));

  const EigenPair gam = gamma1_constant(u, nu);
  const double lam1 = dirichlet_lambda1(g);
  r.check(e.value >= gam.value * lam1 * (1.0 - 1e-10),
          "lambda0 = " + num(e.value, 8) + " >= gamma1 lambda1 = " + num(gam.value * lam1, 8));

  // dense oracle on the discrete divergence-free basis
  const Eigen::MatrixXd stiff = assemble(g, [](const VelocityField& f) { return -1.0 * laplacian(f); });
  const Eigen::MatrixXd react = assemble(g, [&](const VelocityField& f) { return convection_operator(f, u); });
  const Eigen::MatrixXd C = stream_basis(g);
  const Eigen::MatrixXd A = C.transpose() * (nu * stiff + 0.5 * (react + react.transpose())) * C;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()), C.transpose() * C,
                                                              Eigen::EigenvaluesOnly);
  const double dense = es.eigenvalues()(0);
  r.check(std::abs(e.value - dense) <= 1e-7 * std::abs(dense), "dense oracle lambda0 = " + num(dense, 12) +
                                                                   ", relative gap " +
                                                                   num(std::abs(e.value - dense) / dense));
}

void criterion6(Report& r) {
  const fs::path dir = scratch("c6");
  {
    const CommandOptions o =
        command_options(dir, "unforced", "n = 32\nnu = 1\nkind = zero\ndt = 0.02\nhorizon = 8\nratio = 0.9\n");
    const int rc = pipeline(o, r, "unforced run");
    const json v = json::parse(slurp(fs::path(o.out_dir) / "verdicts.json"));
    const json* c = find_claim(v, "lemma1.energy_rate");
    const double alpha = v.at("constants").at("alpha").get<double>();
    const double rate = c ? jnum(c->at("fitted_rate")) : NAN;
    r.check(rc == exit_pass && c && rate >= 2.0 * alpha,
            "F = 0: fitted tail rate of E = " + num(rate) + " >= 2 alpha = " + num(2.0 * alpha));
  }
  {
    const CommandOptions o = command_options(
        dir, "critical", "n = 32\nnu = 1\nkind = power_exponential\nsigma = auto\np = auto\ndelta = 1\n");
    pipeline(o, r, "critical run");
    const json m = json::parse(slurp(fs::path(o.out_dir) / "manifest.json"));
    const auto& c = m.at("constants");
    const auto& d = m.at("decay");
    const double bound = m.at("moduli").at("M").get<double>() /
                         (c.at("lambda1").get<double>() * c.at("gamma1").get<double>() * d.at("delta0").get<double>());
    std::istringstream csv(slurp(fs::path(o.out_dir) / "timeseries.csv"));
    const auto records = read_timeseries_csv(csv);
    const double horizon = records.back().t;
    const double t_lo = std::max(0.5 * horizon, 5.0 * d.at("t_bar").get<double>());
    double sup = 0.0, sup_all = 0.0;
    for (const auto& rec : records) {
      if (rec.t >= t_lo - 1e-12) sup = std::max(sup, rec.wE);
      sup_all = std::max(sup_all, rec.wE);
    }
    r.note("sigma = alpha1 = " + num(d.at("alpha1").get<double>()) + ", p = beta/2 = " +
           num(d.at("delta").get<double>()) + ", M = " + num(m.at("moduli").at("M").get<double>()));
    r.check(sup <= 1.5 * bound, "critical forcing: sup of tau^beta e^{2 alpha1 t} E on [" + num(t_lo) + ", " +
                                    num(horizon) + "] = " + num(sup) + " <= 1.5 M/(lambda1 gamma1 delta0) = " +
                                    num(1.5 * bound));
    r.check(sup_all <= 1.5 * bound, "critical forcing: sup of the same series over the whole run = " +
                                        num(sup_all) + " <= " + num(1.5 * bound));
  }
}

void criterion7(Report& r) {
  const fs::path dir = scratch("c7");
  const CommandOptions o = command_options(dir, "critical", "n = 32\nnu = 1\ndelta = 1\n");
  pipeline(o, r, "critical run");
  const json v = json::parse(slurp(fs::path(o.out_dir) / "verdicts.json"));
  int checked = 0;
  for (const auto& c : v.at("claims")) {
    const std::string id = c.at("claim");
    const bool in_suite = id.rfind("lemma2", 0) == 0 || id.rfind("lemma3", 0) == 0 || id.rfind("lemma4", 0) == 0 ||
                          id.rfind("lemma5", 0) == 0 || id.rfind("lemma6", 0) == 0 || id.rfind("lemma7", 0) == 0 ||
                          id.rfind("theorem1", 0) == 0 || id.rfind("theorem2", 0) == 0;
    if (!in_suite) continue;
    ++checked;
    r.check(c.at("status") == "pass", id + " [" + c.at("series").get<std::string>() + "]: " +
                                          c.at("status").get<std::string>() + ", fitted rate " +
                                          num(jnum(c.at("fitted_rate"))) + " >= " +
                                          num(jnum(c.at("rate_threshold"))));
  }
  r.check(checked >= 12, std::to_string(checked) + " boundedness claims evaluated");

  // same run with alpha = 1.2 alpha_max; the forcing keeps its admissible rate
  fs::copy(fs::path(o.out_dir), dir / "negative", fs::copy_options::recursive);
  const CommandOptions neg =
      command_options(dir, "negative", "n = 32\nnu = 1\ndelta = 1\nratio = 1.2\nnegative_control = true\n");
  const int erc = cmd_evolve(neg);
  const int vrc = cmd_verify(neg);
  const json nv = json::parse(slurp(fs::path(neg.out_dir) / "verdicts.json"));
  int failed = 0;
  for (const auto& c : nv.at("claims")) failed += c.at("status") == "fail";
  r.check(erc == exit_pass && vrc == exit_claim_failure && failed >= 1,
          "negative control alpha = 1.2 alpha_max: " + std::to_string(failed) + " failing verdicts, verify exit " +
              std::to_string(vrc));
}

void criterion8(Report& r) {
  const GridSpec g = GridSpec::square(32);
  SolverSettings direct;
  direct.method = SaddleMethod::direct_sparse;
  const SteadyProblem prob{{1.0, 0.0}, spatial_shape(g, "eigenfield")};
  const SteadyState st = solve_steady(prob, direct);
  SpectralOptions so;
  so.n_samples = 16;
  const SpectralConstants shared = compute_spectral_constants(st.u_inf, 1.0, 0.1, so);

  SweepSpec spec;
  spec.base.params = {1.0, 0.1};
  spec.base.u_inf = st.u_inf;
  spec.base.z0 = 0.1 * spatial_shape(g, "eigenfield");
  spec.base.dt = 0.01;
  spec.base.horizon = 5.0;
  spec.base.solver = direct;
  spec.shared = shared;
  spec.alpha = 0.9 * alpha_bound(shared, 0.1);
  spec.delta0 = 0.75 * alpha_bound(shared, 0.1);
  spec.delta = 1.0;
  const std::vector<double> kappas = {0.1, 0.01, 0.001, 0.0};
  const SweepReport rep = kappa_uniformity_sweep(spec, kappas);
  for (const auto& m : rep.members)
    r.note("kappa = " + num(m.kappa) + ": alpha_max " + num(m.constants.alpha_max) + ", fitted E rate " +
           num(m.energy_rate) + ", tail sup of wE " + num(m.tail_sup) + ", own claims " +
           (all_pass(m.verdicts) ? "pass" : "fail") + (m.run.aborted ? " (aborted)" : ""));
  r.check(rep.rates_within, "fitted rates within a 10% band: spread (max-min)/max = " + num(rep.rate_spread));
  r.check(rep.sups_within, "tail sups within 2x of the median: max/median = " + num(rep.sup_ratio));

  // kappa = 0 member against an independent dense Navier-Stokes stepper:
  // (1/dt) z' - nu lap z' + conv(z, z') + conv(u, z') + conv(z', u) = (1/dt) z
  EvolutionConfig c = spec.base;
  c.params.kappa = 0.0;
  c.horizon = 10 * c.dt;
  std::vector<VelocityField> traj;
  const RunResult res = run(c, rep.members.back().constants, rep.members.back().dp,
                            [&](int step, double, const VelocityField& z) {
                              if (step <= 5) traj.push_back(z);
                            });
  bool same_member = !res.aborted;
  for (int k = 0; k <= 5 && same_member; ++k)
    same_member = res.records[std::size_t(k)].nz == rep.members.back().run.records[std::size_t(k)].nz;
  r.check(same_member, "replayed kappa = 0 trajectory matches the sweep member record for record");

  const auto idx = interior_dofs(g);
  const Eigen::MatrixXd C = stream_basis(g);
  const Eigen::MatrixXd L = assemble(g, [](const VelocityField& w) { return laplacian(w); });
  const Eigen::MatrixXd Eu = assemble(g, [&](const VelocityField& w) {
    return convection_operator(c.u_inf, w) + convection_operator(w, c.u_inf);
  });
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(L.rows(), L.cols());
  Eigen::VectorXd z = gather(traj.at(0), idx);
  double worst = 0.0;
  for (int n = 0; n < 5; ++n) {
    const VelocityField zn = scatter(g, z, idx);
    const Eigen::MatrixXd En = assemble(g, [&](const VelocityField& w) { return convection_operator(zn, w); });
    const Eigen::MatrixXd K = C.transpose() * (I / c.dt - c.params.nu * L + Eu + En) * C;
    z = C * K.partialPivLu().solve(C.transpose() * (z / c.dt));
    const VelocityField mine = scatter(g, z, idx);
    worst = std::max(worst, norms(mine - traj.at(std::size_t(n) + 1)).l2 / norms(mine).l2);
  }
  r.check(worst <= 1e-10, "kappa = 0 vs dense stepper over 5 steps: max relative l2 gap " + num(worst));
}

void criterion9(Report& r) {
  const GridSpec g = GridSpec::square(8);
  std::mt19937_64 rng(11);
  EvolutionConfig c;
  c.params = {1.0, 0.1};
  {
    std::mt19937_64 brng(5);
    c.u_inf = curl_of_stream(g, smooth_stream(g, brng, 2));
    c.u_inf *= 1.5 / norms(c.u_inf).l2;
  }
  c.z0 = curl_of_stream(g, smooth_stream(g, rng, 3));
  c.horizon = 1.0;
  c.solver.method = SaddleMethod::direct_sparse;
  c.solver.tol = 1e-12;
  c.nonlinear = false;

  // exact flow of the linearised semi-discrete system
  const auto idx = interior_dofs(g);
  const Eigen::MatrixXd C = stream_basis(g);
  const Eigen::MatrixXd L = assemble(g, [](const VelocityField& w) { return laplacian(w); });
  const Eigen::MatrixXd E = assemble(g, [&](const VelocityField& w) {
    return convection_operator(c.u_inf, w) + convection_operator(w, c.u_inf);
  });
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(L.rows(), L.cols());
  const Eigen::MatrixXd M = C.transpose() * (I - c.params.kappa * L) * C;
  const Eigen::MatrixXd A = C.transpose() * (c.params.nu * L - E) * C;
  const Eigen::VectorXd c0 = C.colPivHouseholderQr().solve(gather(project(c.z0).velocity, idx));
  const Eigen::MatrixXd flow = (c.horizon * Eigen::MatrixXd(M.ldlt().solve(A))).exp();
  const VelocityField exact = scatter(g, C * (flow * c0), idx);

  SpectralConstants sc;
  sc.nu = 1.0;
  sc.kappa = 0.1;
  sc.lambda1 = sc.lambda0 = 2.0 * pi * pi;
  sc.gamma1 = 1.0;
  sc.alpha_max = alpha_bound(sc, 0.1);
  const DecayParameters dp = make_decay_parameters(sc, 0.5, 0.1 * sc.alpha_max, 0.0);
  for (Scheme s : {Scheme::semi_implicit_be, Scheme::semi_implicit_cn}) {
    c.scheme = s;
    std::vector<double> err;
    for (double dt : {0.01, 0.005, 0.0025}) {
      c.dt = dt;
      const RunResult res = run(c, sc, dp);
      err.push_back(norms(res.z_final - exact).l2 / norms(exact).l2);
    }
    const double expected = s == Scheme::semi_implicit_be ? 1.0 : 2.0;
    for (int k = 1; k < 3; ++k) {
      const double order = std::log2(err[k - 1] / err[k]);
      r.check(std::abs(order - expected) <= 0.2, to_string(s) + ": observed order " + num(order) +
                                                      " (errors " + num(err[k - 1]) + " -> " + num(err[k]) +
                                                      "), expected " + num(expected) + " +- 0.2");
    }
  }
}

void criterion10(Report& r) {
  const std::string config = "n = 16\ndt = 0.1\nhorizon = 40\nn_samples = 8\nz0_shape = random\nseed = 7\n";
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = scratch("c10_" + std::to_string(pass));
    CommandOptions o = command_options(dir, "run", config);
    int rc = 0;
    for (auto cmd : {cmd_steady, cmd_spectral, cmd_evolve, cmd_verify}) rc = std::max(rc, cmd(o));
    CommandOptions s = command_options(dir, "sweep", config);
    s.kappas = "0.1,0";
    cmd_sweep(s);
    r.check(rc == exit_pass, "pass " + std::to_string(pass + 1) + ": steady, spectral, evolve, verify exit 0");
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
    if (pass == 0) {
      first = files;
      continue;
    }
    int differing = 0;
    for (const auto& [name, bytes] : files)
      if (!first.count(name) || first[name] != bytes) {
        ++differing;
        r.note("differs: " + name);
      }
    r.check(files.size() == first.size() && differing == 0,
            std::to_string(files.size()) + " artifacts compared, " + std::to_string(differing) + " differ");
  }
}

struct Criterion {
  const char* name;
  void (*run)(Report&);
  double limit_s;
};

const std::map<int, Criterion> kCriteria = {
    {1, {"operator identities", criterion1, 5.0}},
    {2, {"spectral accuracy", criterion2, 10.0}},
    {3, {"discrete Poincare inequalities", criterion3, 5.0}},
    {4, {"steady-state bound and manufactured convergence", criterion4, 60.0}},
    {5, {"(A1) consistency", criterion5, 30.0}},
    {6, {"Lemma 1 quantitative check", criterion6, 300.0}},
    {7, {"boundedness suite and negative control", criterion7, 600.0}},
    {8, {"kappa-uniformity", criterion8, 600.0}},
    {9, {"scheme convergence", criterion9, 120.0}},
    {10, {"determinism", criterion10, 600.0}},
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2 || !kCriteria.count(std::atoi(argv[1]))) {
    std::cerr << "usage: acceptance <criterion 1-10>\n";
    return 2;
  }
  const int k = std::atoi(argv[1]);
  const Criterion& c = kCriteria.at(k);
  Report r;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.run(r);
  } catch (const std::exception& e) {
    r.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.check(secs <= c.limit_s, "runtime " + num(secs, 3) + " s <= " + num(c.limit_s, 3) + " s");
  std::cout << r.detail.str();
  std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << k << " (" << c.name << ")" << std::endl;
  return r.pass ? 0 : 1;
}
