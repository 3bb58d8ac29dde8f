#include "kvlab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kvlab/evolution.hpp"
#include "kvlab/forcing.hpp"
#include "kvlab/operators.hpp"
#include "kvlab/random.hpp"
#include "kvlab/saddle.hpp"
#include "kvlab/spectral.hpp"
#include "kvlab/steady.hpp"
#include "kvlab/verification.hpp"

namespace kvlab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kConstantsFormat = "kvlab-constants-v1";
constexpr const char* kManifestFormat = "kvlab-run-v1";
constexpr const char* kSweepFormat = "kvlab-sweep-v1";
constexpr double kNominalRatio = 0.9;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Log {
 public:
  explicit Log(std::ostream* os) : os_(os) {}
  template <class T>
  Log& operator<<(const T& x) {
    if (os_) *os_ << x;
    return *this;
  }

 private:
  std::ostream* os_;
};

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string read_file(const fs::path& p, const std::string& what) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ArtifactError("missing " + what + " '" + p.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ArtifactError("cannot write '" + p.string() + "'");
  out << content;
  if (!out) throw ArtifactError("write failed for '" + p.string() + "'");
}

// FNV-1a, 64 bit: ties constants and manifests to the steady field they used.
std::string digest(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json parse_json_artifact(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ArtifactError(what + " is not valid JSON: " + e.what());
  }
}

// Non-finite doubles are written as null and read back as NaN.
double num(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return kNaN;
  if (!v.is_number()) throw ArtifactError(std::string("field '") + key + "' is not a number");
  return v.get<double>();
}

json config_json(const RunConfig& c) {
  json j = json::object();
  for (const auto& [k, v] : config_entries(c)) j[k] = v;
  return j;
}

SolverSettings solver_settings(const RunConfig& c) {
  SolverSettings s;
  s.tol = c.solver_tol;
  s.max_iter = c.solver_max_iter;
  s.method = saddle_method_from_string(c.solver_method);
  return s;
}

// Unit-norm spatial field; "random" is a projected seeded field.
VelocityField unit_shape(const GridSpec& g, const std::string& name, const std::string& file,
                         std::uint64_t seed) {
  if (name == "random") {
    FieldRng rng(seed);
    VelocityField f = project(rng.velocity(g)).velocity;
    return (1.0 / norms(f).l2) * f;
  }
  return spatial_shape(g, name, file);
}

// ---------------------------------------------------------------------------
// artifacts

json constants_json(const SpectralConstants& sc) {
  json j;
  j["nu"] = sc.nu;
  j["kappa"] = sc.kappa;
  j["lambda1"] = sc.lambda1;
  j["lambda0"] = sc.lambda0;
  j["gamma1"] = sc.gamma1;
  j["alpha_max"] = sc.alpha_max;
  j["n_estimate"] = sc.n_estimate;
  j["a1_satisfied"] = sc.a1_satisfied;
  return j;
}

SpectralConstants constants_from_json(const json& j) {
  SpectralConstants sc;
  sc.nu = num(j, "nu");
  sc.kappa = num(j, "kappa");
  sc.lambda1 = num(j, "lambda1");
  sc.lambda0 = num(j, "lambda0");
  sc.gamma1 = num(j, "gamma1");
  sc.alpha_max = num(j, "alpha_max");
  sc.n_estimate = num(j, "n_estimate");
  sc.a1_satisfied = j.at("a1_satisfied").get<bool>();
  return sc;
}

json decay_json(const DecayParameters& dp) {
  json j;
  j["alpha"] = dp.alpha;
  j["alpha_max"] = dp.alpha_max;
  j["delta0"] = dp.delta0;
  j["alpha1"] = dp.alpha1;
  j["delta"] = dp.delta;
  j["beta"] = dp.beta;
  j["t_bar"] = dp.t_bar;
  return j;
}

DecayParameters decay_from_json(const json& j) {
  DecayParameters dp;
  dp.alpha = num(j, "alpha");
  dp.alpha_max = num(j, "alpha_max");
  dp.delta0 = num(j, "delta0");
  dp.alpha1 = num(j, "alpha1");
  dp.delta = num(j, "delta");
  dp.beta = num(j, "beta");
  dp.t_bar = num(j, "t_bar");
  return dp;
}

json moduli_json(const DecayModuli& m) {
  json j;
  j["M"] = m.M;
  j["M1"] = m.M1;
  j["finite_M"] = m.finite_M;
  j["finite_M1"] = m.finite_M1;
  j["horizon"] = m.horizon;
  j["dt"] = m.dt;
  j["shape_minus1"] = m.shape_minus1;
  return j;
}

DecayModuli moduli_from_json(const json& j) {
  DecayModuli m;
  m.M = num(j, "M");
  m.M1 = num(j, "M1");
  m.finite_M = j.at("finite_M").get<bool>();
  m.finite_M1 = j.at("finite_M1").get<bool>();
  m.horizon = num(j, "horizon");
  m.dt = num(j, "dt");
  m.shape_minus1 = num(j, "shape_minus1");
  return m;
}

struct SteadyInput {
  SteadyArtifact artifact;
  std::string digest;
};

SteadyInput load_steady(const fs::path& dir, const RunConfig& c) {
  const std::string bytes = read_file(dir / "steady.csv", "steady artifact");
  std::istringstream is(bytes);
  SteadyInput s{read_steady_csv(is), digest(bytes)};
  const auto& prob = s.artifact.problem;
  if (prob.grid().n() != c.n || prob.params.nu != c.nu)
    throw ArtifactError("steady.csv was computed for n = " + std::to_string(prob.grid().n()) +
                        ", nu = " + fmt17(prob.params.nu) + "; rerun steady for this config");
  return s;
}

SpectralConstants load_constants(const fs::path& dir, const RunConfig& c, const std::string& steady_digest) {
  const json j = parse_json_artifact(read_file(dir / "constants.json", "constants artifact"), "constants.json");
  try {
    if (j.at("format").get<std::string>() != kConstantsFormat)
      throw ArtifactError("constants.json: unknown format");
    if (j.at("steady_digest").get<std::string>() != steady_digest)
      throw ArtifactError("constants.json belongs to a different steady.csv; rerun spectral");
    SpectralConstants sc = constants_from_json(j.at("constants"));
    if (sc.nu != c.nu) throw ArtifactError("constants.json was computed for a different nu");
    if (!std::isfinite(sc.lambda1) || !std::isfinite(sc.lambda0) || !std::isfinite(sc.gamma1))
      throw ArtifactError("constants.json holds non-finite constants");
    return sc;
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("constants.json: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// run set-up

struct Resolved {
  RunConfig config;  // auto values replaced by numbers
  SpectralConstants constants;
  DecayParameters dp;
};

SpectralConstants at_kappa(SpectralConstants sc, double kappa) {
  sc.kappa = kappa;
  sc.alpha_max = alpha_bound(sc, kappa);
  return sc;
}

DecayParameters decay_for(const RunConfig& c, const SpectralConstants& sc) {
  if (c.alpha) return decay_parameters_at(sc, *c.alpha, *c.delta0, c.delta, c.negative_control);
  return make_decay_parameters(sc, c.ratio, *c.delta0, c.delta, c.negative_control);
}

// alpha and delta0 are resolved against the smallest alpha_max over
// `kappas` (the largest kappa), so every member of a sweep shares one
// admissible pair; "auto" forcing parameters follow the same reference
// member: sigma = alpha1, p = delta.
Resolved resolve(const RunConfig& c, const SpectralConstants& shared, const std::vector<double>& kappas) {
  const double k_ref = *std::max_element(kappas.begin(), kappas.end());
  Resolved r;
  r.config = c;
  r.config.kappa = k_ref;
  r.constants = at_kappa(shared, k_ref);
  if (!r.config.delta0) r.config.delta0 = c.delta0_fraction * r.constants.alpha_max;
  r.dp = decay_for(r.config, r.constants);
  if (!r.config.sigma) {
    // a negative control keeps the forcing of the admissible run at
    // ratio 0.9 and only raises the claimed rate
    RunConfig nominal = r.config;
    nominal.ratio = std::min(c.ratio, kNominalRatio);
    nominal.alpha.reset();
    nominal.negative_control = false;
    r.config.sigma = c.negative_control ? decay_for(nominal, r.constants).alpha1 : r.dp.alpha1;
  }
  if (!r.config.p) r.config.p = r.dp.delta;
  r.config.alpha = r.dp.alpha;
  return r;
}

EvolutionConfig evolution_config(const RunConfig& c, const VelocityField& u_inf) {
  const GridSpec& g = u_inf.grid();
  EvolutionConfig ec;
  ec.params.nu = c.nu;
  ec.params.kappa = c.kappa;
  ec.u_inf = u_inf;
  ec.forcing.kind = forcing_kind_from_string(c.kind);
  ec.forcing.amplitude = c.amplitude;
  ec.forcing.sigma = c.sigma.value_or(0.0);
  ec.forcing.p = c.p.value_or(0.0);
  if (ec.forcing.kind != ForcingKind::zero)
    ec.forcing.shape = unit_shape(g, c.shape, c.shape_file, c.seed + 1);
  ec.z0 = c.z0_amplitude * unit_shape(g, c.z0_shape, c.z0_file, c.seed);
  ec.dt = c.dt;
  ec.horizon = c.horizon;
  ec.scheme = scheme_from_string(c.scheme);
  ec.solver = solver_settings(c);
  ec.nonlinear = c.nonlinear;
  return ec;
}

json run_summary(const RunResult& r) {
  json j;
  j["steps"] = r.steps;
  j["records"] = r.records.size();
  j["aborted"] = r.aborted;
  j["abort_reason"] = r.abort_reason;
  j["linear_iterations"] = r.linear_iterations;
  j["worst_momentum"] = r.worst_momentum;
  j["max_divergence"] = r.max_divergence;
  j["initial_zt_constant"] = r.initial_zt_constant;
  j["max_kappa_excess"] = r.max_kappa_excess;
  return j;
}

struct RunArtifacts {
  RunConfig config;
  SpectralConstants constants;
  DecayParameters dp;
  DecayModuli moduli;
  const RunResult* result = nullptr;
  VelocityField z0;  // projected
  std::string steady_digest;
};

void write_run_dir(const fs::path& dir, const RunArtifacts& a) {
  fs::create_directories(dir);
  std::ostringstream csv;
  write_timeseries_csv(csv, a.result->records);
  write_file(dir / "timeseries.csv", csv.str());

  const Norms nz = norms(a.z0);
  json m;
  m["format"] = kManifestFormat;
  m["run_id"] = a.config.run_id;
  m["config"] = config_json(a.config);
  m["config_text"] = to_text(a.config);
  m["steady_digest"] = a.steady_digest;
  m["constants"] = constants_json(a.constants);
  m["decay"] = decay_json(a.dp);
  m["moduli"] = moduli_json(a.moduli);
  m["initial_data"] = {{"l2", nz.l2}, {"grad", nz.h1_semi}, {"stokes", norms(stokes_apply(a.z0)).l2}};
  m["run"] = run_summary(*a.result);
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

// Loads a run directory into a verification input; any defect is an
// ArtifactError.
struct LoadedRun {
  std::string run_id;
  VerificationInput input;
};

LoadedRun load_run_dir(const fs::path& dir) {
  const json m = parse_json_artifact(read_file(dir / "manifest.json", "run manifest"), "manifest.json");
  LoadedRun lr;
  RunConfig c;
  int steps = 0;
  try {
    if (m.at("format").get<std::string>() != kManifestFormat) throw ArtifactError("manifest.json: unknown format");
    std::istringstream cfg(m.at("config_text").get<std::string>());
    try {
      c = parse_config(cfg);
    } catch (const ConfigError& e) {
      throw ArtifactError(std::string("manifest.json: embedded config: ") + e.what());
    }
    lr.run_id = m.at("run_id").get<std::string>();
    auto& in = lr.input;
    in.constants = constants_from_json(m.at("constants"));
    in.dp = decay_from_json(m.at("decay"));
    in.moduli = moduli_from_json(m.at("moduli"));
    const json& z0 = m.at("initial_data");
    in.z0_l2 = num(z0, "l2");
    in.z0_grad = num(z0, "grad");
    in.z0_stokes = num(z0, "stokes");
    const json& run = m.at("run");
    if (run.at("aborted").get<bool>())
      throw ArtifactError("run aborted (" + run.at("abort_reason").get<std::string>() +
                          "); the trajectory is partial");
    steps = run.at("steps").get<int>();
    in.kappa_bound_excess = num(run, "max_kappa_excess");
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("manifest.json: ") + e.what());
  }
  auto& in = lr.input;
  in.horizon = c.horizon;
  in.options.slack = c.slack;
  in.options.growth_tolerance = c.growth_tolerance;
  in.options.tail_fraction = c.tail_fraction;
  in.options.enforce_hypotheses = !c.negative_control;

  std::istringstream csv(read_file(dir / "timeseries.csv", "time series"));
  try {
    in.records = read_timeseries_csv(csv);
  } catch (const std::runtime_error& e) {
    throw ArtifactError(std::string("timeseries.csv: ") + e.what());
  }
  if (int(in.records.size()) != steps + 1)
    throw ArtifactError("timeseries.csv holds " + std::to_string(in.records.size()) + " rows, manifest expects " +
                        std::to_string(steps + 1));
  return lr;
}

std::string plot_name(const std::string& series) { return series + ".dat"; }

int verify_dir(const fs::path& dir, Log& log) {
  const LoadedRun lr = load_run_dir(dir);
  const auto verdicts = verify_all(lr.input);
  write_file(dir / "verdicts.json", report_json(lr.run_id, lr.input, verdicts));
  fs::create_directories(dir / "plots");
  for (const auto& name : series_names()) {
    std::ostringstream os;
    write_plot_data(os, weighted_series(lr.input, name));
    write_file(dir / "plots" / plot_name(name), os.str());
  }
  int failed = 0, na = 0;
  for (const auto& v : verdicts) {
    if (v.status == VerdictStatus::fail) {
      ++failed;
      log << "FAIL " << v.claim << " (sup " << v.sup << ", rate " << v.fitted_rate << ")\n";
    }
    if (v.status == VerdictStatus::not_applicable) ++na;
  }
  log << "verify: " << verdicts.size() << " claims, " << failed << " failed, " << na
      << " not applicable -> " << (dir / "verdicts.json").string() << "\n";
  return failed == 0 ? exit_pass : exit_claim_failure;
}

// ---------------------------------------------------------------------------

int steady_impl(const CommandOptions& opt, Log& log) {
  const RunConfig c = load_run_config(opt.config_path);
  const fs::path dir = opt.out_dir;
  fs::create_directories(dir);
  const GridSpec g = GridSpec::square(c.n);
  const SolverSettings settings = solver_settings(c);
  SteadyProblem prob;
  prob.params.nu = c.nu;
  prob.params.kappa = c.kappa;

  if (c.steady_shape == "manufactured") {
    // error table against the exact equilibrium on three nested grids
    std::vector<int> levels = c.n >= 32 ? std::vector<int>{c.n / 4, c.n / 2, c.n}
                                        : std::vector<int>{c.n, 2 * c.n, 4 * c.n};
    std::string table = "n,h,error_l2,error_grad,error_p,ratio_l2\n";
    double prev = 0.0;
    for (int n : levels) {
      const GridSpec gl = GridSpec::square(n);
      const ManufacturedSteady ms = manufactured_steady(gl, c.nu);
      SteadyProblem pl{prob.params, ms.f};
      const SteadyState st = solve_steady(pl, settings);
      if (st.status != SteadyStatus::converged)
        throw NonConvergence("manufactured steady solve at n = " + std::to_string(n) + ": " +
                             to_string(st.status), st.residual);
      const Norms e = norms(st.u_inf - ms.u_star);
      const double ep = norms(st.p_inf - ms.p_star).l2;
      table += std::to_string(n) + "," + fmt17(gl.h()) + "," + fmt17(e.l2) + "," + fmt17(e.h1_semi) + "," +
               fmt17(ep) + "," + (prev > 0.0 ? fmt17(prev / e.l2) : std::string("")) + "\n";
      log << "manufactured n = " << n << ": velocity error " << e.l2 << "\n";
      prev = e.l2;
    }
    write_file(dir / "convergence.csv", table);
    prob.f_inf = manufactured_steady(g, c.nu).f;
  } else {
    prob.f_inf = c.steady_amplitude * unit_shape(g, c.steady_shape, c.steady_shape_file, c.seed);
  }

  const SteadyState st = solve_steady(prob, settings);
  if (st.status != SteadyStatus::converged) {
    log << "steady: " << to_string(st.status) << " (residual " << st.residual << "); no artifact written\n";
    return exit_solver_failure;
  }
  const AprioriReport rep = check_apriori_bounds(st, prob);
  json ap;
  ap["lambda1"] = rep.lambda1;
  ap["f_minus1"] = rep.f_minus1;
  ap["u_l2"] = rep.u_l2;
  ap["u_grad"] = rep.u_grad;
  ap["u_stokes"] = rep.u_stokes;
  ap["u_max"] = rep.u_max;
  ap["u_l4"] = rep.u_l4;
  ap["grad_u_l4"] = rep.grad_u_l4;
  ap["gradient_lhs"] = rep.gradient_lhs;
  ap["gradient_bound"] = rep.gradient_bound;
  ap["l2_rhs"] = rep.l2_rhs;
  ap["l2_bound"] = rep.l2_bound;
  ap["stokes_constant"] = rep.stokes_constant;
  ap["max_constant"] = rep.max_constant;
  ap["l4_constant"] = rep.l4_constant;
  ap["grad_l4_constant"] = rep.grad_l4_constant;

  json extra;
  extra["config"] = config_json(c);
  extra["apriori"] = ap;
  std::ostringstream csv;
  write_steady_csv(csv, st, prob, extra.dump());
  write_file(dir / "steady.csv", csv.str());
  json apj;
  apj["residual"] = st.residual;
  apj["picard_iters"] = st.picard_iters;
  apj["newton_iters"] = st.newton_iters;
  apj["apriori"] = ap;
  write_file(dir / "apriori.json", apj.dump(2) + "\n");
  log << "steady: residual " << st.residual << ", |grad u| " << rep.u_grad << ", bound "
      << (rep.gradient_bound ? "holds" : "violated") << " -> " << (dir / "steady.csv").string() << "\n";
  return exit_pass;
}

int spectral_impl(const CommandOptions& opt, Log& log) {
  const RunConfig c = load_run_config(opt.config_path);
  const fs::path dir = opt.out_dir;
  const SteadyInput s = load_steady(dir, c);
  SpectralOptions so;
  so.eig_tol = c.eig_tol;
  so.n_samples = c.n_samples;
  so.seed = c.seed;
  const SpectralConstants sc = compute_spectral_constants(s.artifact.state.u_inf, c.nu, c.kappa, so);
  json j;
  j["format"] = kConstantsFormat;
  j["steady_digest"] = s.digest;
  j["n"] = c.n;
  j["options"] = {{"eig_tol", c.eig_tol}, {"n_samples", c.n_samples}, {"seed", c.seed}};
  j["constants"] = constants_json(sc);
  write_file(dir / "constants.json", j.dump(2) + "\n");
  log << "spectral: lambda1 " << sc.lambda1 << ", lambda0 " << sc.lambda0 << ", gamma1 " << sc.gamma1
      << ", alpha_max " << sc.alpha_max << "\n";
  if (!sc.a1_satisfied)
    log << "spectral: lambda0 <= 0, the steady state is not known to be stable; "
           "evolve and sweep refuse without --allow-unstable\n";
  return exit_pass;
}

struct Prepared {
  SteadyInput steady;
  SpectralConstants shared;
};

// Loads steady + constants and applies the stability gate.
Prepared prepare(const CommandOptions& opt, const RunConfig& c, Log& log, bool& refused) {
  Prepared p{load_steady(opt.out_dir, c), {}};
  p.shared = load_constants(opt.out_dir, c, p.steady.digest);
  refused = !p.shared.a1_satisfied && !opt.allow_unstable;
  if (refused) log << "lambda0 = " << p.shared.lambda0 << " <= 0; pass --allow-unstable to run anyway\n";
  return p;
}

int evolve_impl(const CommandOptions& opt, Log& log) {
  const RunConfig c = load_run_config(opt.config_path);
  bool refused = false;
  const Prepared p = prepare(opt, c, log, refused);
  if (refused) return exit_solver_failure;
  const Resolved r = resolve(c, p.shared, {c.kappa});
  const EvolutionConfig ec = evolution_config(r.config, p.steady.artifact.state.u_inf);
  RunArtifacts a;
  a.config = r.config;
  a.constants = r.constants;
  a.dp = r.dp;
  a.moduli = compute_moduli(ec.forcing, r.dp, ec.horizon, ec.dt);
  a.z0 = project(ec.z0).velocity;
  a.steady_digest = p.steady.digest;
  const RunResult res = run(ec, r.constants, r.dp);
  a.result = &res;
  write_run_dir(opt.out_dir, a);
  if (res.aborted) {
    log << "evolve: aborted at step " << res.steps << ": " << res.abort_reason << "\n";
    return exit_solver_failure;
  }
  log << "evolve: " << res.steps << " steps, alpha " << r.dp.alpha << ", E(H) " << res.records.back().E
      << " -> " << (fs::path(opt.out_dir) / "timeseries.csv").string() << "\n";
  return exit_pass;
}

std::string kappa_dir_name(double k) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "kappa_%.6g", k);
  return buf;
}

int sweep_impl(const CommandOptions& opt, Log& log) {
  const RunConfig c = load_run_config(opt.config_path);
  const std::vector<double> kappas = parse_kappa_list(opt.kappas);
  std::vector<std::string> names;
  for (double k : kappas) names.push_back(kappa_dir_name(k));
  if (std::set<std::string>(names.begin(), names.end()).size() != names.size())
    throw ConfigError("kappa list contains repeated values");
  if (c.negative_control) throw ConfigError("negative_control runs are single runs; use evolve");

  int rc = steady_impl(opt, log);
  if (rc != exit_pass) return rc;
  rc = spectral_impl(opt, log);
  if (rc != exit_pass) return rc;
  bool refused = false;
  const Prepared p = prepare(opt, c, log, refused);
  if (refused) return exit_solver_failure;

  const Resolved r = resolve(c, p.shared, kappas);
  SweepSpec spec;
  spec.base = evolution_config(r.config, p.steady.artifact.state.u_inf);
  spec.shared = p.shared;
  spec.alpha = r.dp.alpha;
  spec.delta0 = *r.config.delta0;
  spec.delta = r.config.delta;
  spec.options.slack = c.slack;
  spec.options.growth_tolerance = c.growth_tolerance;
  spec.options.tail_fraction = c.tail_fraction;
  const SweepReport rep = kappa_uniformity_sweep(spec, kappas);

  json members = json::array();
  bool verdicts_pass = true;
  for (std::size_t i = 0; i < rep.members.size(); ++i) {
    const SweepMember& m = rep.members[i];
    const fs::path mdir = fs::path(opt.out_dir) / names[i];
    RunArtifacts a;
    a.config = r.config;
    a.config.kappa = m.kappa;
    a.constants = m.constants;
    a.dp = m.dp;
    a.moduli = m.moduli;
    a.result = &m.run;
    a.z0 = project(spec.base.z0).velocity;
    a.steady_digest = p.steady.digest;
    write_run_dir(mdir, a);
    json mj;
    mj["kappa"] = m.kappa;
    mj["dir"] = names[i];
    mj["alpha_max"] = m.constants.alpha_max;
    mj["alpha"] = m.dp.alpha;
    mj["energy_rate"] = m.energy_rate;
    mj["tail_sup"] = m.tail_sup;
    mj["aborted"] = m.run.aborted;
    mj["abort_reason"] = m.run.abort_reason;
    if (m.run.aborted) {
      log << "sweep: member kappa = " << m.kappa << " aborted: " << m.run.abort_reason << "\n";
      mj["verify_exit"] = nullptr;
      verdicts_pass = false;
    } else {
      const int vrc = verify_dir(mdir, log);
      mj["verify_exit"] = vrc;
      verdicts_pass = verdicts_pass && vrc == exit_pass;
    }
    log << "sweep: kappa = " << m.kappa << ", energy rate " << m.energy_rate << ", tail sup " << m.tail_sup
        << "\n";
    members.push_back(mj);
  }
  json sj;
  sj["format"] = kSweepFormat;
  sj["run_id"] = c.run_id;
  sj["config_text"] = to_text(r.config);
  sj["kappas"] = kappas;
  sj["members"] = members;
  sj["rate_spread"] = rep.rate_spread;
  sj["sup_ratio"] = rep.sup_ratio;
  sj["rates_within"] = rep.rates_within;
  sj["sups_within"] = rep.sups_within;
  sj["envelope_pass"] = rep.pass;
  sj["member_verdicts_pass"] = verdicts_pass;
  sj["pass"] = rep.pass && verdicts_pass;
  write_file(fs::path(opt.out_dir) / "sweep.json", sj.dump(2) + "\n");
  log << "sweep: rate spread " << rep.rate_spread << " (<= 0.10: " << (rep.rates_within ? "yes" : "no")
      << "), sup ratio " << rep.sup_ratio << " (<= 2: " << (rep.sups_within ? "yes" : "no") << ")\n";
  return rep.pass && verdicts_pass ? exit_pass : exit_claim_failure;
}

template <class F>
int guarded(const CommandOptions& opt, const char* name, F&& body) {
  Log log(opt.log);
  try {
    return body(opt, log);
  } catch (const ConfigError& e) {
    log << name << ": config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const ArtifactError& e) {
    log << name << ": artifact error: " << e.what() << "\n";
    return exit_artifact_error;
  } catch (const IncompleteRun& e) {
    log << name << ": run too short for the claims: " << e.what() << "\n";
    return exit_config_error;
  } catch (const NonConvergence& e) {
    log << name << ": solver failure: " << e.what() << "\n";
    return exit_solver_failure;
  } catch (const EigenNonConvergence& e) {
    log << name << ": solver failure: " << e.what() << "\n";
    return exit_solver_failure;
  } catch (const Gamma1NotPositive& e) {
    log << name << ": " << e.what() << "\n";
    return exit_solver_failure;
  } catch (const std::invalid_argument& e) {
    log << name << ": invalid setting: " << e.what() << "\n";
    return exit_config_error;
  } catch (const fs::filesystem_error& e) {
    log << name << ": " << e.what() << "\n";
    return exit_artifact_error;
  } catch (const std::exception& e) {
    log << name << ": failure: " << e.what() << "\n";
    return exit_solver_failure;
  }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) throw ConfigError("no config file given (--config)");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto first = text.find_first_not_of(" \t\r\n");
  std::istringstream is(text);
  if (first != std::string::npos && text[first] == '{') {
    std::string embedded;
    try {
      embedded = json::parse(text).at("config_text").get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigError("'" + path + "' is neither a config file nor a run manifest: " + e.what());
    }
    std::istringstream es(embedded);
    return parse_config(es);
  }
  return parse_config(is);
}

int cmd_steady(const CommandOptions& opt) { return guarded(opt, "steady", steady_impl); }
int cmd_spectral(const CommandOptions& opt) { return guarded(opt, "spectral", spectral_impl); }
int cmd_evolve(const CommandOptions& opt) { return guarded(opt, "evolve", evolve_impl); }
int cmd_verify(const CommandOptions& opt) {
  return guarded(opt, "verify", [](const CommandOptions& o, Log& log) { return verify_dir(o.out_dir, log); });
}
int cmd_sweep(const CommandOptions& opt) { return guarded(opt, "sweep", sweep_impl); }

}  // namespace kvlab
