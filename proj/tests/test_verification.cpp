#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "kvlab/verification.hpp"
#include "support.hpp"

using namespace kvlab;
using namespace kvlab::testing;

namespace {

Series sample(double t0, double t1, int n, const std::function<double(double)>& f) {
  Series s;
  for (int k = 0; k <= n; ++k) {
    const double t = t0 + (t1 - t0) * k / n;
    s.emplace_back(t, f(t));
  }
  return s;
}

DecayParameters params() {
  DecayParameters dp;
  dp.alpha = 0.8;
  dp.alpha_max = 1.0;
  dp.delta0 = 0.5;
  dp.alpha1 = 0.3;
  dp.delta = 1.0;
  dp.beta = 2.0;
  dp.t_bar = 0.5;
  return dp;
}

SpectralConstants spectral(double kappa) {
  SpectralConstants c;
  c.nu = 1.0;
  c.kappa = kappa;
  c.lambda1 = 19.7;
  c.lambda0 = 15.0;
  c.gamma1 = 0.8;
  c.alpha_max = alpha_bound(c, kappa);
  return c;
}

// Records whose every weighted column equals level(t) times a fixed profile.
VerificationInput synthetic(const std::function<double(double)>& level, double M = 1.0,
                            double horizon = 20.0, double dt = 0.05) {
  VerificationInput in;
  in.constants = spectral(0.1);
  in.dp = params();
  in.horizon = horizon;
  in.moduli.M = M;
  in.moduli.M1 = 2.0 * M;
  const double k = in.constants.kappa;
  const int n = int(std::llround(horizon / dt));
  for (int i = 0; i <= n; ++i) {
    const double t = i * dt;
    const double w = in.dp.weight(t);
    const double a = std::sqrt(level(t) / w);
    DecayRecord r;
    r.t = t;
    r.nz = a;
    r.ngz = 3 * a;
    r.ndz = 10 * a;
    r.nzt = 2 * a;
    r.ngzt = 5 * a;
    r.kndzt = k * 20 * a;
    r.nq = a;
    r.ngq = 4 * a;
    r.E = r.nz * r.nz + k * r.ngz * r.ngz;
    r.wE = w * r.E;
    r.wgz = w * r.ngz * r.ngz;
    r.wdz = w * r.ndz * r.ndz;
    r.wzt = w * (r.nzt * r.nzt + k * r.ngzt * r.ngzt);
    r.wq = w * (r.nq * r.nq + r.ngq * r.ngq);
    in.records.push_back(r);
  }
  return in;
}

const ClaimVerdict& find(const std::vector<ClaimVerdict>& v, const std::string& id) {
  for (const auto& c : v)
    if (c.claim == id) return c;
  FAIL("missing claim " << id);
  return v.front();
}

}  // namespace

TEST_CASE("fit recovers exact exponents") {
  const Series s = sample(0.0, 5.0, 200, [](double t) { return std::exp(-3.0 * t); });
  CHECK(fit_decay_rate(s, 0.0, 5.0).rate == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(fit_decay_rate(s, 0.0, 5.0).r_squared == doctest::Approx(1.0).epsilon(1e-12));
  const Series c = sample(0.0, 5.0, 50, [](double) { return 7.0; });
  CHECK(std::abs(fit_decay_rate(c, 0.0, 5.0).rate) <= 1e-9);

  for (double r : {0.1, 0.37, 1.0, 4.2, 17.0, 50.0}) {
    const double len = 20.0 / r;
    const Series e = sample(1.0, 1.0 + len, 400, [&](double t) { return 2.5 * std::exp(-r * t); });
    CHECK(fit_decay_rate(e, 1.0, 1.0 + len).rate == doctest::Approx(r).epsilon(1e-6));
    // Same exponent behind a t^-beta factor once tau^beta is divided out.
    const Series p = sample(1.0, 1.0 + len, 400,
                            [&](double t) { return std::exp(-r * t) / time_weight(t, 0.5, 3.0); });
    CHECK(fit_decay_rate(p, 1.0, 1.0 + len, 3.0, 0.5).rate == doctest::Approx(r).epsilon(1e-6));
  }
}

TEST_CASE("fit on a power-corrected series matches a least-squares oracle") {
  // (1+t)^-2 e^{-3t} with beta = 4: the residual t^4 (1+t)^-2 factor shifts
  // the fitted exponent by its mean log-slope.
  const double t_bar = 1.0;
  const Series s = sample(5.0, 10.0, 200, [](double t) { return std::pow(1 + t, -2.0) * std::exp(-3 * t); });
  const RateFit f = fit_decay_rate(s, 5.0 * t_bar, 10.0 * t_bar, 4.0, t_bar);
  Eigen::MatrixXd A(s.size(), 2);
  Eigen::VectorXd y(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = s[i].first;
    y(i) = 4.0 * std::log(s[i].first) - 2.0 * std::log1p(s[i].first) - 3.0 * s[i].first;
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
  CHECK(f.rate == doctest::Approx(-coef(1)).epsilon(1e-10));
  CHECK(f.rate > 2.6);
  CHECK(f.rate < 3.0);
}

TEST_CASE("degenerate windows") {
  const Series few = sample(0.0, 1.0, 10, [](double t) { return std::exp(-t); });
  CHECK_THROWS_AS(fit_decay_rate(few, 0.0, 1.0), DegenerateWindow);
  const Series zero = sample(0.0, 1.0, 100, [](double) { return 0.0; });
  CHECK_THROWS_AS(fit_decay_rate(zero, 0.0, 1.0), DegenerateWindow);
  // Everything after the first few samples is below 1e2 eps of the peak.
  const Series cliff = sample(0.0, 1.0, 100, [](double t) { return std::exp(-400.0 * t); });
  CHECK_THROWS_AS(fit_decay_rate(cliff, 0.0, 1.0), DegenerateWindow);
  CHECK_THROWS_AS(fit_decay_rate(few, 5.0, 6.0), DegenerateWindow);
}

TEST_CASE("bounded weighted series pass and growing ones fail") {
  const VerificationInput flat = synthetic([](double) { return 1e-3; });
  for (const auto& v : verify_all(flat)) {
    INFO(v.claim);
    if (v.claim == "remark.power_decay" || v.claim.rfind("lemma1.", 0) == 0) continue;
    if (v.window.all_t || v.series.rfind("int_", 0) == 0 || v.series == "theorem2_sum") {
      CHECK(v.status == VerdictStatus::pass);
    } else {
      CHECK(v.status == VerdictStatus::pass);
      CHECK(std::abs(v.fitted_rate) <= 1e-9);
    }
  }
  CHECK(find(verify_all(flat), "remark.power_decay").fitted_rate ==
        doctest::Approx(2 * 0.3).epsilon(1e-9));

  // Growth at 5% of 2 alpha1 exceeds the 1% tolerance.
  const VerificationInput grow = synthetic([](double t) { return 1e-3 * std::exp(0.05 * 0.6 * t); });
  const auto v = verify_all(grow);
  CHECK_FALSE(all_pass(v));
  CHECK(find(v, "lemma2.stokes").status == VerdictStatus::fail);
  CHECK(find(v, "theorem1.combined").status == VerdictStatus::fail);
  CHECK(find(v, "lemma2.stokes").fitted_rate == doctest::Approx(-0.03).epsilon(1e-9));

  // Growth below the tolerance is still non-growth.
  const VerificationInput slow = synthetic([](double t) { return 1e-3 * std::exp(0.005 * 0.6 * t); });
  CHECK(find(verify_all(slow), "lemma2.stokes").status == VerdictStatus::pass);
}

TEST_CASE("lemma 1 explicit bound with slack") {
  const SpectralConstants c = spectral(0.1);
  const double M = 2.0;
  const double bound = M / (c.lambda1 * c.gamma1 * 0.5);
  // wE = level * (1 + 0.1 * 3^2) = 1.9 level
  auto at = [&](double factor) {
    return synthetic([&](double) { return factor * bound * 1.5 / 1.9; }, M);
  };
  const auto ok = check_lemma1(at(0.99));
  CHECK(find(ok, "lemma1.energy").status == VerdictStatus::pass);
  CHECK(*find(ok, "lemma1.energy").bound == doctest::Approx(bound));
  CHECK(find(check_lemma1(at(1.01)), "lemma1.energy").status == VerdictStatus::fail);
  CHECK_THROWS_AS(check_lemma1(synthetic([](double) { return 1.0; }, M, 9.0)), IncompleteRun);
}

TEST_CASE("hypothesis gating yields not-applicable") {
  VerificationInput in = synthetic([](double t) { return std::exp(t); });
  in.moduli.finite_M = false;
  in.moduli.finite_M1 = false;
  for (const auto& v : verify_all(in)) {
    INFO(v.claim);
    CHECK(v.status == VerdictStatus::not_applicable);
  }
  CHECK(all_pass(verify_all(in)));
  in.moduli.finite_M1 = true;
  const auto v = verify_all(in);
  CHECK(find(v, "lemma1.energy").status == VerdictStatus::not_applicable);
  CHECK(find(v, "lemma4.time_derivative").status == VerdictStatus::fail);
}

TEST_CASE("discounted integrals follow the trapezoid rule exactly for constants") {
  VerificationInput in = synthetic([](double) { return 1.0; });
  // Make tau^beta e^{2 alpha s} |grad z|^2 == 1: |grad z|^2 = 1 / (w e^{2 delta0 s}).
  for (auto& r : in.records) r.ngz = std::sqrt(1.0 / (in.dp.weight(r.t) * std::exp(2 * in.dp.delta0 * r.t)));
  const Series s = weighted_series(in, "int_grad");
  for (const auto& [t, v] : s) CHECK(v == doctest::Approx(t * std::exp(-2 * in.dp.delta0 * t)).epsilon(1e-12));
}

TEST_CASE("all-zero trajectory passes every claim") {
  VerificationInput in = synthetic([](double) { return 0.0; }, 0.0);
  in.kappa_bound_excess = 0.0;
  const auto v = verify_all(in);
  CHECK(all_pass(v));
  CHECK(v.size() >= 15);
  for (const auto& c : v) CHECK(c.status == VerdictStatus::pass);
  CHECK(std::is_sorted(v.begin(), v.end(),
                       [](const ClaimVerdict& a, const ClaimVerdict& b) { return a.claim < b.claim; }));
}

TEST_CASE("report is deterministic and survives the CSV round trip") {
  VerificationInput in = synthetic([](double t) { return 1e-2 * (1 + 0.1 * std::sin(t)); });
  const std::string a = report_json("demo", in, verify_all(in));
  CHECK(a == report_json("demo", in, verify_all(in)));
  std::stringstream ss;
  write_timeseries_csv(ss, in.records);
  VerificationInput back = in;
  back.records = read_timeseries_csv(ss);
  CHECK(report_json("demo", back, verify_all(back)) == a);
  CHECK(a.find("\"run_id\": \"demo\"") != std::string::npos);

  std::stringstream plot;
  write_plot_data(plot, weighted_series(in, "wE"));
  std::string header, first;
  std::getline(plot, header);
  std::getline(plot, first);
  CHECK(header == "# t value");
  CHECK(first.find(' ') != std::string::npos);
}

TEST_CASE("unforced run decays at least at twice alpha") {
  const GridSpec g = GridSpec::square(16);
  std::mt19937_64 rng(5);
  SpectralConstants c;
  c.nu = 1.0;
  c.kappa = 0.1;
  c.lambda1 = dirichlet_lambda1(g);
  c.gamma1 = 1.0;
  c.lambda0 = c.lambda1;
  c.alpha_max = alpha_bound(c, c.kappa);
  const DecayParameters dp = make_decay_parameters(c, 0.9, 0.75 * c.alpha_max, 0.0);

  EvolutionConfig cfg;
  cfg.params = {1.0, 0.1};
  cfg.u_inf = VelocityField(g);
  cfg.z0 = random_solenoidal(g, rng);
  cfg.dt = 0.02;
  cfg.horizon = 5.0 / dp.delta0 + 0.02 * 10;
  cfg.horizon = std::ceil(cfg.horizon / cfg.dt) * cfg.dt;
  cfg.solver.method = SaddleMethod::direct_sparse;
  const RunResult r = run(cfg, c, dp);
  REQUIRE_FALSE(r.aborted);

  VerificationInput in;
  in.records = r.records;
  in.constants = c;
  in.dp = dp;
  in.horizon = cfg.horizon;
  const auto v = check_lemma1(in);
  const ClaimVerdict& rate = find(v, "lemma1.energy_rate");
  CHECK(rate.status == VerdictStatus::pass);
  CHECK(rate.fitted_rate >= 2 * dp.alpha);
  const ClaimVerdict& grad = find(v, "lemma1.gradient");
  CHECK(grad.sup > 0.0);
  CHECK(grad.status == VerdictStatus::pass);
  CHECK(grad.note == "bound 0: checked as decay to zero");
}

TEST_CASE("a zero bound passes decaying series and fails persistent ones") {
  const auto decaying = check_lemma1(synthetic([](double t) { return 1e-3 * std::exp(-t); }, 0.0));
  CHECK(find(decaying, "lemma1.energy").status == VerdictStatus::pass);
  const auto flat = check_lemma1(synthetic([](double) { return 1e-3; }, 0.0));
  CHECK(find(flat, "lemma1.energy").status == VerdictStatus::fail);
  CHECK(find(flat, "lemma1.energy").note == "bound 0: checked as decay to zero");
}

TEST_CASE("sweep members and single-kappa degeneration") {
  const GridSpec g = GridSpec::square(8);
  std::mt19937_64 rng(9);
  SweepSpec spec;
  spec.base.params = {1.0, 0.0};
  spec.base.u_inf = VelocityField(g);
  spec.base.z0 = random_solenoidal(g, rng);
  spec.base.dt = 0.01;
  spec.base.horizon = 4.2;
  spec.base.solver.method = SaddleMethod::direct_sparse;
  spec.shared.nu = 1.0;
  spec.shared.lambda1 = dirichlet_lambda1(g);
  spec.shared.gamma1 = 1.0;
  spec.shared.lambda0 = spec.shared.lambda1;
  spec.alpha = 0.9 * alpha_bound(spec.shared, 0.1);
  spec.delta0 = 1.2;
  spec.options.tail_fraction = 0.5;

  const SweepReport rep = kappa_uniformity_sweep(spec, {0.1, 0.01, 0.0});
  REQUIRE(rep.members.size() == 3);
  CHECK(rep.members[0].constants.alpha_max < rep.members[1].constants.alpha_max);
  CHECK(rep.members[1].constants.alpha_max < rep.members[2].constants.alpha_max);
  for (const auto& m : rep.members) {
    CHECK_FALSE(m.run.aborted);
    CHECK(m.energy_rate > 0.0);
    CHECK(m.dp.alpha == spec.alpha);
  }

  const SweepReport one = kappa_uniformity_sweep(spec, {0.01});
  REQUIRE(one.members.size() == 1);
  CHECK(one.rate_spread == 0.0);
  CHECK(one.sup_ratio == 1.0);
  const SweepMember& m = one.members[0];
  VerificationInput in;
  in.records = m.run.records;
  in.constants = m.constants;
  in.dp = m.dp;
  in.moduli = m.moduli;
  in.horizon = spec.base.horizon;
  const VelocityField z0 = project(spec.base.z0).velocity;
  const Norms nz = norms(z0);
  in.z0_l2 = nz.l2;
  in.z0_grad = nz.h1_semi;
  in.z0_stokes = norms(stokes_apply(z0)).l2;
  in.kappa_bound_excess = m.run.max_kappa_excess;
  CHECK(report_json("x", in, verify_all(in)) == report_json("x", in, m.verdicts));
}
