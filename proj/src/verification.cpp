#include "kvlab/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <json.hpp>
#include <ostream>

#include "kvlab/operators.hpp"

namespace kvlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMinSamples = 20;

bool in_window(double t, double lo, double hi) {
  const double pad = 1e-12 * std::max(1.0, std::abs(hi));
  return t >= lo - pad && t <= hi + pad;
}

}  // namespace

RateFit fit_decay_rate(const Series& series, double t_lo, double t_hi, double beta, double t_bar) {
  std::vector<std::pair<double, double>> pts;
  double peak = 0.0;
  for (const auto& [t, v] : series)
    if (in_window(t, t_lo, t_hi) && std::isfinite(v)) peak = std::max(peak, v);
  const double floor = 1e2 * std::numeric_limits<double>::epsilon() * peak;
  for (const auto& [t, v] : series) {
    if (!in_window(t, t_lo, t_hi) || !std::isfinite(v) || !(v > floor) || !(v > 0.0)) continue;
    double y = std::log(v);
    if (beta > 0.0) y += std::log(time_weight(t, t_bar, beta));
    pts.emplace_back(t, y);
  }
  if (int(pts.size()) < kMinSamples)
    throw DegenerateWindow("fewer than 20 usable samples in [" + std::to_string(t_lo) + ", " +
                           std::to_string(t_hi) + "]");
  const double n = double(pts.size());
  double mt = 0.0, my = 0.0;
  for (const auto& [t, y] : pts) {
    mt += t;
    my += y;
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (const auto& [t, y] : pts) {
    stt += (t - mt) * (t - mt);
    sty += (t - mt) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(stt > 0.0)) throw DegenerateWindow("window samples share one time");
  const double slope = sty / stt;
  RateFit fit;
  fit.rate = -slope;
  fit.samples = int(pts.size());
  const double ss_res = std::max(0.0, syy - slope * sty);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::pass: return "pass";
    case VerdictStatus::fail: return "fail";
    case VerdictStatus::not_applicable: return "not_applicable";
  }
  return "unknown";
}

VerdictWindow tail_window(const VerificationInput& in) {
  const double H = in.horizon;
  if (!(H > 0.0)) throw IncompleteRun("horizon must be positive");
  if (in.records.empty() || in.records.back().t < H * (1.0 - 1e-9))
    throw IncompleteRun("trajectory stops before the horizon");
  VerdictWindow w;
  w.horizon = H;
  w.t_hi = H;
  w.t_lo = in.options.tail_fraction * H;
  if (in.dp.t_bar > 0.0) w.t_lo = std::max(w.t_lo, 5.0 * in.dp.t_bar);
  if (!(w.t_lo < H)) throw IncompleteRun("horizon does not exceed 5 t_bar");
  for (const auto& r : in.records)
    if (in_window(r.t, w.t_lo, w.t_hi)) ++w.samples;
  if (w.samples < kMinSamples) throw IncompleteRun("fewer than 20 records in the tail window");
  return w;
}

std::vector<std::string> series_names() {
  return {"E",        "wE",        "wgz",        "wdz",      "wzt",    "wq",
          "wzt2",     "wh1",       "wgrad_kappa", "wkdzt",   "int_grad", "int_stokes",
          "int_zt",   "int_zt2",   "int_q",      "combined", "combined_raw", "combined_all_t",
          "combined_kappa", "theorem2_sum"};
}

Series weighted_series(const VerificationInput& in, const std::string& name) {
  const auto& recs = in.records;
  const double k = in.constants.kappa;
  const DecayParameters& dp = in.dp;
  Series out;
  out.reserve(recs.size());

  auto pointwise = [&](auto f) {
    for (const auto& r : recs) out.emplace_back(r.t, f(r, dp.weight(r.t)));
    return out;
  };
  // e^{-2 delta0 t} int_0^t tau^beta(s) e^{2 alpha s} X(s) ds, trapezoid rule,
  // accumulated in discounted form so nothing overflows.
  auto discounted = [&](auto x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const double wx = dp.weight(recs[i].t) * x(recs[i]);
      if (i > 0) {
        const double step = recs[i].t - recs[i - 1].t;
        const double decay = std::exp(-2.0 * dp.delta0 * step);
        acc = decay * acc +
              0.5 * step * (decay * dp.weight(recs[i - 1].t) * x(recs[i - 1]) + wx);
      }
      out.emplace_back(recs[i].t, acc);
    }
    return out;
  };
  auto sq = [](double x) { return x * x; };
  auto h2 = [&](const DecayRecord& r) { return sq(r.nz) + sq(r.ngz) + sq(r.ndz); };
  auto q1 = [&](const DecayRecord& r) { return sq(r.nq) + sq(r.ngq); };

  if (name == "E") return pointwise([](const DecayRecord& r, double) { return r.E; });
  if (name == "wE") return pointwise([](const DecayRecord& r, double) { return r.wE; });
  if (name == "wgz") return pointwise([](const DecayRecord& r, double) { return r.wgz; });
  if (name == "wdz") return pointwise([](const DecayRecord& r, double) { return r.wdz; });
  if (name == "wzt") return pointwise([](const DecayRecord& r, double) { return r.wzt; });
  if (name == "wq") return pointwise([](const DecayRecord& r, double) { return r.wq; });
  if (name == "wzt2")
    return pointwise([&](const DecayRecord& r, double w) { return w * (sq(r.nzt) + 2 * k * sq(r.ngzt)); });
  if (name == "wh1")
    return pointwise([&](const DecayRecord& r, double w) { return w * (sq(r.nz) + sq(r.ngz)); });
  if (name == "wgrad_kappa")
    return pointwise([&](const DecayRecord& r, double) { return r.wgz + k * r.wdz; });
  if (name == "wkdzt") return pointwise([&](const DecayRecord& r, double w) { return w * sq(r.kndzt); });
  if (name == "int_grad") return discounted([&](const DecayRecord& r) { return sq(r.ngz); });
  if (name == "int_stokes") return discounted([&](const DecayRecord& r) { return sq(r.ndz); });
  if (name == "int_zt")
    return discounted([&](const DecayRecord& r) { return sq(r.nzt) + k * sq(r.ngzt); });
  if (name == "int_zt2")
    return discounted([&](const DecayRecord& r) { return sq(r.nzt) + 2 * k * sq(r.ngzt); });
  if (name == "int_q") return discounted(q1);
  if (name == "combined" || name == "combined_raw") {
    const bool raw = name == "combined_raw";
    return pointwise([&](const DecayRecord& r, double w) {
      return (raw ? 1.0 : w) * (h2(r) + sq(r.nzt) + k * sq(r.ngzt) + q1(r));
    });
  }
  if (name == "combined_all_t")
    return pointwise([&](const DecayRecord& r, double w) { return w * (h2(r) + sq(r.nzt) + q1(r)); });
  if (name == "combined_kappa")
    return pointwise([&](const DecayRecord& r, double w) { return w * (k * sq(r.ngzt) + sq(r.kndzt)); });
  if (name == "theorem2_sum") {
    const Series a = weighted_series(in, "wh1");
    const Series b = weighted_series(in, "int_zt");
    const Series c = weighted_series(in, "int_stokes");
    const Series d = weighted_series(in, "int_q");
    for (std::size_t i = 0; i < a.size(); ++i)
      out.emplace_back(a[i].first, a[i].second + b[i].second + c[i].second + d[i].second);
    return out;
  }
  throw std::invalid_argument("unknown series '" + name + "'");
}

namespace {

enum class Gate { none, M, M1 };

struct ClaimSpec {
  ClaimSpec(std::string id_, std::string series_, Gate gate_ = Gate::M, bool all_t_ = false,
            std::optional<double> bound_ = std::nullopt)
      : id(std::move(id_)), series(std::move(series_)), gate(gate_), all_t(all_t_), bound(bound_) {}
  std::string id;
  std::string series;
  Gate gate;
  bool all_t;
  std::optional<double> bound;
};

double sup_over(const Series& s, double lo, double hi) {
  double m = 0.0;
  for (const auto& [t, v] : s)
    if (in_window(t, lo, hi)) m = std::max(m, v);
  return m;
}

double pearson(const Series& a, const Series& b, double lo, double hi) {
  std::vector<std::pair<double, double>> xy;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (in_window(a[i].first, lo, hi)) xy.emplace_back(a[i].second, b[i].second);
  const double n = double(xy.size());
  if (n < 2) return kNaN;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : kNaN;
}

double initial_data_term(const VerificationInput& in, bool with_gradient_one) {
  const double k = in.constants.kappa;
  const double tau0 = time_weight(0.0, in.dp.t_bar, in.dp.beta);
  const double grad = with_gradient_one ? 1.0 + k : k;
  return tau0 * (in.z0_l2 * in.z0_l2 + grad * in.z0_grad * in.z0_grad +
                 k * in.z0_stokes * in.z0_stokes);
}

ClaimVerdict evaluate_claim(const VerificationInput& in, const ClaimSpec& spec) {
  const VerdictWindow tail = tail_window(in);
  const Series s = weighted_series(in, spec.series);
  const double two_a1 = 2.0 * in.dp.alpha1;

  ClaimVerdict v;
  v.claim = spec.id;
  v.series = spec.series;
  v.bound = spec.bound;
  v.expected_rate = 0.0;
  v.rate_threshold = -in.options.growth_tolerance * two_a1;
  v.window = tail;
  if (spec.all_t) {
    v.window.all_t = true;
    v.window.t_lo = 0.0;
    v.window.samples = int(in.records.size());
  }
  v.sup = sup_over(s, v.window.t_lo, v.window.t_hi);

  double peak = 0.0;
  for (const auto& p : s) peak = std::max(peak, p.second);
  if (peak == 0.0) {
    v.fitted_rate = kNaN;
    v.r_squared = kNaN;
    v.bounded = true;
    v.note = "identically zero";
  } else {
    try {
      const RateFit f = fit_decay_rate(s, tail.t_lo, tail.t_hi);
      v.fitted_rate = f.rate;
      v.r_squared = f.r_squared;
      v.bounded = f.rate >= v.rate_threshold;
    } catch (const DegenerateWindow&) {
      // Whatever survives in the tail sits at round-off level of the peak
      // or falls off by more than 14 decades: decay, not growth.
      v.fitted_rate = kNaN;
      v.r_squared = kNaN;
      v.bounded = true;
      v.note = "decayed below resolution in the tail window";
    }
  }

  const double modulus = spec.gate == Gate::M1 ? in.moduli.M1 : in.moduli.M;
  if (spec.gate != Gate::none && modulus > 0.0) v.extra["empirical_constant"] = v.sup / modulus;

  if (spec.bound) {
    const double initial = std::max(s.front().second, in.records.front().wE);
    const double allowed = *spec.bound * (1.0 + in.options.slack) + 1e-12 * initial;
    v.extra["allowed"] = allowed;
    v.status = v.sup <= allowed ? VerdictStatus::pass : VerdictStatus::fail;
    if (*spec.bound == 0.0 && v.status == VerdictStatus::fail) {
      // A zero limsup bound is certified on a finite horizon by decay to zero.
      const bool decaying = std::isnan(v.fitted_rate) ? v.bounded : v.fitted_rate > 0.0;
      v.status = decaying ? VerdictStatus::pass : VerdictStatus::fail;
      v.note = "bound 0: checked as decay to zero";
    }
  } else {
    v.status = v.bounded ? VerdictStatus::pass : VerdictStatus::fail;
  }

  const bool gated = (spec.gate == Gate::M && !in.moduli.finite_M) ||
                     (spec.gate == Gate::M1 && !in.moduli.finite_M1);
  if (gated && in.options.enforce_hypotheses) {
    v.status = VerdictStatus::not_applicable;
    v.note = std::string(spec.gate == Gate::M ? "M" : "M1") + " flagged infinite on the horizon";
  } else if (gated) {
    v.note = std::string(spec.gate == Gate::M ? "M" : "M1") + " flagged infinite; checked anyway";
  }
  return v;
}

void require_lemma1_horizon(const VerificationInput& in) {
  const double need = 5.0 * std::max(in.dp.t_bar > 0.0 ? in.dp.t_bar : 0.0, 1.0 / in.dp.delta0);
  if (in.horizon < need * (1.0 - 1e-12))
    throw IncompleteRun("horizon " + std::to_string(in.horizon) + " below 5 max(t_bar, 1/delta0) = " +
                        std::to_string(need));
}

}  // namespace

std::vector<ClaimVerdict> check_lemma1(const VerificationInput& in) {
  require_lemma1_horizon(in);
  const SpectralConstants& c = in.constants;
  const double M = in.moduli.M;
  const double d0 = in.dp.delta0;
  std::vector<ClaimVerdict> out;
  out.push_back(evaluate_claim(in, {"lemma1.energy", "wE", Gate::M, false,
                                    M / (c.lambda1 * c.gamma1 * d0)}));
  out.push_back(evaluate_claim(in, {"lemma1.gradient", "int_grad", Gate::M, false,
                                    M / (c.lambda1 * c.gamma1 * c.gamma1 * d0)}));

  // With F = 0 the unweighted energy decays at least like e^{-2 alpha t}.
  if (M == 0.0 && in.records.front().E > 0.0) {
    const VerdictWindow tail = tail_window(in);
    ClaimVerdict v;
    v.claim = "lemma1.energy_rate";
    v.series = "E";
    v.window = tail;
    v.expected_rate = 2.0 * in.dp.alpha;
    v.rate_threshold = v.expected_rate;
    const Series s = weighted_series(in, "E");
    v.sup = sup_over(s, tail.t_lo, tail.t_hi);
    try {
      const RateFit f = fit_decay_rate(s, tail.t_lo, tail.t_hi);
      v.fitted_rate = f.rate;
      v.r_squared = f.r_squared;
      v.bounded = true;
      v.status = f.rate >= v.expected_rate ? VerdictStatus::pass : VerdictStatus::fail;
    } catch (const DegenerateWindow& e) {
      v.fitted_rate = kNaN;
      v.r_squared = kNaN;
      v.status = VerdictStatus::fail;
      v.note = std::string("no rate: ") + e.what();
    }
    out.push_back(v);
  }
  return out;
}

std::vector<ClaimVerdict> check_lemma2_3(const VerificationInput& in) {
  const double init = initial_data_term(in, true);
  std::vector<ClaimVerdict> out;
  for (const ClaimSpec& s : {ClaimSpec{"lemma2.gradient", "wgrad_kappa"},
                             ClaimSpec{"lemma2.stokes", "wdz"},
                             ClaimSpec{"lemma2.stokes_integral", "int_stokes"},
                             ClaimSpec{"lemma3.time_derivative", "wzt2"},
                             ClaimSpec{"lemma3.time_derivative_integral", "int_zt2"}}) {
    ClaimVerdict v = evaluate_claim(in, s);
    v.extra["initial_data_term"] = init;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<ClaimVerdict> check_lemma4_6_7_theorems(const VerificationInput& in) {
  std::vector<ClaimVerdict> out;
  out.push_back(evaluate_claim(in, {"lemma4.time_derivative", "wzt", Gate::M1}));
  out.push_back(evaluate_claim(in, {"lemma5.h1_all_t", "wh1", Gate::M, true}));
  out.push_back(evaluate_claim(in, {"lemma6.time_derivative", "wzt", Gate::M1, true}));
  out.push_back(evaluate_claim(in, {"lemma6.stokes", "wdz", Gate::M1, true}));
  out.push_back(evaluate_claim(in, {"lemma6.kappa_stokes_zt", "wkdzt", Gate::M1, true}));
  if (in.kappa_bound_excess) {
    ClaimVerdict v = evaluate_claim(in, {"lemma6.triangle", "wkdzt", Gate::none, true});
    const double excess = *in.kappa_bound_excess;
    v.extra["max_excess"] = excess;
    v.status = excess <= 1e-9 * std::max(1.0, std::sqrt(v.sup)) ? VerdictStatus::pass
                                                                 : VerdictStatus::fail;
    v.note = "per-step kappa |S z_t| <= right side of the equation's triangle bound";
    out.push_back(v);
  }
  {
    ClaimVerdict v = evaluate_claim(in, {"lemma7.pressure", "wq", Gate::M1, true});
    const Series q = weighted_series(in, "wq");
    const Series a = weighted_series(in, "wzt");
    const Series b = weighted_series(in, "wdz");
    Series sum = a;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i].second += b[i].second;
    v.extra["correlation_wzt_plus_wdz"] = pearson(q, sum, v.window.t_lo, v.window.t_hi);
    out.push_back(v);
  }
  out.push_back(evaluate_claim(in, {"theorem1.combined", "combined", Gate::M}));
  out.push_back(evaluate_claim(in, {"theorem2.integrals", "theorem2_sum", Gate::M, true}));
  out.push_back(evaluate_claim(in, {"theorem3.all_t", "combined_all_t", Gate::M1, true}));
  out.push_back(evaluate_claim(in, {"theorem3.kappa_terms", "combined_kappa", Gate::M1, true}));

  // Power-exponential decay of the unweighted combined norm.
  {
    const VerdictWindow tail = tail_window(in);
    ClaimVerdict v;
    v.claim = "remark.power_decay";
    v.series = "combined_raw";
    v.window = tail;
    v.expected_rate = 2.0 * in.dp.alpha1;
    v.rate_threshold = (1.0 - in.options.growth_tolerance) * v.expected_rate;
    const Series s = weighted_series(in, "combined_raw");
    v.sup = sup_over(s, tail.t_lo, tail.t_hi);
    double peak = 0.0;
    for (const auto& p : s) peak = std::max(peak, p.second);
    v.fitted_rate = kNaN;
    v.r_squared = kNaN;
    if (peak == 0.0) {
      v.note = "identically zero";
    } else {
      try {
        const RateFit f = fit_decay_rate(s, tail.t_lo, tail.t_hi, in.dp.beta, in.dp.t_bar);
        v.fitted_rate = f.rate;
        v.r_squared = f.r_squared;
        v.bounded = f.rate >= v.rate_threshold;
      } catch (const DegenerateWindow&) {
        v.note = "decayed below resolution in the tail window";
      }
    }
    v.status = v.bounded ? VerdictStatus::pass : VerdictStatus::fail;
    if (!in.moduli.finite_M && in.options.enforce_hypotheses) {
      v.status = VerdictStatus::not_applicable;
      v.note = "M flagged infinite on the horizon";
    }
    out.push_back(v);
  }
  return out;
}

std::vector<ClaimVerdict> verify_all(const VerificationInput& in) {
  std::vector<ClaimVerdict> all = check_lemma1(in);
  for (auto&& group : {check_lemma2_3(in), check_lemma4_6_7_theorems(in)})
    all.insert(all.end(), group.begin(), group.end());
  std::sort(all.begin(), all.end(),
            [](const ClaimVerdict& a, const ClaimVerdict& b) { return a.claim < b.claim; });
  return all;
}

bool all_pass(const std::vector<ClaimVerdict>& verdicts) {
  return std::none_of(verdicts.begin(), verdicts.end(),
                      [](const ClaimVerdict& v) { return v.status == VerdictStatus::fail; });
}

namespace {

nlohmann::json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

nlohmann::json to_json(const ClaimVerdict& v) {
  nlohmann::json j;
  j["claim"] = v.claim;
  j["series"] = v.series;
  j["sup"] = number(v.sup);
  j["bound"] = v.bound ? number(*v.bound) : nlohmann::json(nullptr);
  j["bounded"] = v.bounded;
  j["fitted_rate"] = number(v.fitted_rate);
  j["r_squared"] = number(v.r_squared);
  j["expected_rate"] = number(v.expected_rate);
  j["rate_threshold"] = number(v.rate_threshold);
  j["status"] = to_string(v.status);
  j["window"] = {{"t_lo", v.window.t_lo},
                 {"t_hi", v.window.t_hi},
                 {"samples", v.window.samples},
                 {"all_t", v.window.all_t},
                 {"horizon", v.window.horizon}};
  nlohmann::json extra = nlohmann::json::object();
  for (const auto& [k, x] : v.extra) extra[k] = number(x);
  j["extra"] = extra;
  j["note"] = v.note;
  return j;
}

}  // namespace

std::string report_json(const std::string& run_id, const VerificationInput& in,
                        const std::vector<ClaimVerdict>& verdicts) {
  const SpectralConstants& c = in.constants;
  const DecayParameters& dp = in.dp;
  nlohmann::json j;
  j["run_id"] = run_id;
  j["constants"] = {{"nu", number(c.nu)},
                    {"kappa", number(c.kappa)},
                    {"lambda1", number(c.lambda1)},
                    {"lambda0", number(c.lambda0)},
                    {"gamma1", number(c.gamma1)},
                    {"alpha_max", number(c.alpha_max)},
                    {"n_estimate", number(c.n_estimate)},
                    {"alpha", number(dp.alpha)},
                    {"delta0", number(dp.delta0)},
                    {"alpha1", number(dp.alpha1)},
                    {"delta", number(dp.delta)},
                    {"beta", number(dp.beta)},
                    {"t_bar", number(dp.t_bar)},
                    {"M", number(in.moduli.M)},
                    {"M1", number(in.moduli.M1)},
                    {"finite_M", in.moduli.finite_M},
                    {"finite_M1", in.moduli.finite_M1},
                    {"horizon", number(in.horizon)},
                    {"slack", number(in.options.slack)},
                    {"growth_tolerance", number(in.options.growth_tolerance)},
                    {"enforce_hypotheses", in.options.enforce_hypotheses}};
  nlohmann::json claims = nlohmann::json::array();
  for (const auto& v : verdicts) claims.push_back(to_json(v));
  j["claims"] = claims;
  j["all_pass"] = all_pass(verdicts);
  return j.dump(2) + "\n";
}

void write_plot_data(std::ostream& os, const Series& s) {
  char buf[64];
  os << "# t value\n";
  for (const auto& [t, v] : s) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", t, v);
    os << buf;
  }
}

// ---------------------------------------------------------------------------

SweepReport kappa_uniformity_sweep(const SweepSpec& spec, const std::vector<double>& kappas) {
  if (kappas.empty()) throw std::invalid_argument("sweep needs at least one kappa");
  if (!(spec.shared.gamma1 > 0.0)) throw Gamma1NotPositive(spec.shared.gamma1);
  SweepReport rep;
  const VelocityField z0 = project(spec.base.z0).velocity;
  for (double kappa : kappas) {
    SweepMember m;
    m.kappa = kappa;
    m.constants = spec.shared;
    m.constants.kappa = kappa;
    m.constants.alpha_max = alpha_bound(m.constants, kappa);
    m.dp = decay_parameters_at(m.constants, spec.alpha, spec.delta0, spec.delta);
    EvolutionConfig cfg = spec.base;
    cfg.params.kappa = kappa;
    m.moduli = compute_moduli(cfg.forcing, m.dp, cfg.horizon, cfg.dt);
    m.run = run(cfg, m.constants, m.dp);
    if (!m.run.aborted) {
      VerificationInput in;
      in.records = m.run.records;
      in.constants = m.constants;
      in.dp = m.dp;
      in.moduli = m.moduli;
      in.horizon = cfg.horizon;
      const Norms nz = norms(z0);
      in.z0_l2 = nz.l2;
      in.z0_grad = nz.h1_semi;
      in.z0_stokes = norms(stokes_apply(z0)).l2;
      in.kappa_bound_excess = m.run.max_kappa_excess;
      in.options = spec.options;
      const VerdictWindow tail = tail_window(in);
      m.tail_sup = sup_over(weighted_series(in, "wE"), tail.t_lo, tail.t_hi);
      try {
        m.energy_rate = fit_decay_rate(weighted_series(in, "E"), tail.t_lo, tail.t_hi).rate;
      } catch (const DegenerateWindow&) {
        m.energy_rate = kNaN;
      }
      m.verdicts = verify_all(in);
    }
    rep.members.push_back(std::move(m));
  }

  bool complete = true;
  std::vector<double> rates, sups;
  for (const auto& m : rep.members) {
    complete = complete && !m.run.aborted && std::isfinite(m.energy_rate);
    rates.push_back(m.energy_rate);
    sups.push_back(m.tail_sup);
  }
  if (complete) {
    const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
    rep.rate_spread = *hi > 0.0 ? (*hi - *lo) / *hi : kNaN;
    std::vector<double> sorted = sups;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    rep.sup_ratio = median > 0.0 ? sorted.back() / median : (sorted.back() == 0.0 ? 1.0 : kNaN);
    rep.rates_within = rep.rate_spread <= 0.10;
    rep.sups_within = rep.sup_ratio <= 2.0;
  } else {
    rep.rate_spread = kNaN;
    rep.sup_ratio = kNaN;
  }
  rep.pass = complete && rep.rates_within && rep.sups_within;
  return rep;
}

}  // namespace kvlab
