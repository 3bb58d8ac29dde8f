#pragma once
// Verdicts on the decay claims: exponent fits, weighted-boundedness checks,
// explicit-constant checks, the kappa sweep and the JSON/plot report.

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kvlab/decay.hpp"
#include "kvlab/evolution.hpp"
#include "kvlab/forcing.hpp"
#include "kvlab/spectral.hpp"

namespace kvlab {

class DegenerateWindow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a trajectory is too short or stops before its horizon.
class IncompleteRun : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Series = std::vector<std::pair<double, double>>;

struct RateFit {
  double rate = 0.0;  // minus the least-squares slope of log(value)
  double r_squared = 1.0;
  int samples = 0;
};

// Fit over samples with t in [t_lo, t_hi]. With beta > 0 the values are
// multiplied by tau^beta(t) first, removing a t^-beta factor. Values below
// 1e2 eps of the window peak are dropped; fewer than 20 left is an error.
RateFit fit_decay_rate(const Series& series, double t_lo, double t_hi, double beta = 0.0,
                       double t_bar = unit_time_weight);

enum class VerdictStatus { pass, fail, not_applicable };
std::string to_string(VerdictStatus s);

struct VerdictWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
  int samples = 0;
  bool all_t = false;  // sup taken over the whole run
  double horizon = 0.0;
};

struct ClaimVerdict {
  std::string claim;
  std::string series;
  double sup = 0.0;
  std::optional<double> bound;  // explicit constant, when the claim has one
  bool bounded = true;
  double fitted_rate = 0.0;     // NaN when no fit was possible
  double r_squared = 0.0;
  double expected_rate = 0.0;
  double rate_threshold = 0.0;  // bounded iff fitted_rate >= rate_threshold
  VerdictStatus status = VerdictStatus::pass;
  VerdictWindow window;
  std::map<std::string, double> extra;  // empirical constants, correlations
  std::string note;
};

struct VerificationOptions {
  double slack = 0.5;             // headroom on explicit constants
  double growth_tolerance = 0.01; // fraction of 2 alpha1 tolerated as growth
  double tail_fraction = 0.5;     // tail window starts at this fraction of the horizon
  // false evaluates claims whose forcing modulus is flagged infinite
  // instead of marking them not applicable (negative controls)
  bool enforce_hypotheses = true;
};

struct VerificationInput {
  std::vector<DecayRecord> records;
  SpectralConstants constants;
  DecayParameters dp;
  DecayModuli moduli;
  double horizon = 0.0;
  // Initial-data norms |z0|, |grad z0|, |S z0| for the recorded constants.
  double z0_l2 = 0.0, z0_grad = 0.0, z0_stokes = 0.0;
  // Largest lhs - rhs of the per-step kappa |S z_t| triangle bound, if known.
  std::optional<double> kappa_bound_excess;
  VerificationOptions options;
};

// Tail window [max(tail_fraction * horizon, 5 t_bar), horizon]; throws
// IncompleteRun if the records stop early or hold fewer than 20 samples
// there.
VerdictWindow tail_window(const VerificationInput& in);

// Named weighted series built from the record columns:
// wE, wgz, wdz, wzt, wq, wzt2 (= w(|z_t|^2 + 2 kappa |grad z_t|^2)),
// wh1, wkdzt, int_grad, int_stokes, int_zt, int_q, combined, combined_kappa
// and the unweighted E and combined_raw.
Series weighted_series(const VerificationInput& in, const std::string& name);
std::vector<std::string> series_names();

std::vector<ClaimVerdict> check_lemma1(const VerificationInput& in);
std::vector<ClaimVerdict> check_lemma2_3(const VerificationInput& in);
std::vector<ClaimVerdict> check_lemma4_6_7_theorems(const VerificationInput& in);

// All claims sorted by id.
std::vector<ClaimVerdict> verify_all(const VerificationInput& in);

// True when no applicable claim failed.
bool all_pass(const std::vector<ClaimVerdict>& verdicts);

std::string report_json(const std::string& run_id, const VerificationInput& in,
                        const std::vector<ClaimVerdict>& verdicts);

// Two-column "t value" rows, gnuplot compatible.
void write_plot_data(std::ostream& os, const Series& s);

struct SweepMember {
  double kappa = 0.0;
  SpectralConstants constants;
  DecayParameters dp;
  RunResult run;
  DecayModuli moduli;
  double energy_rate = 0.0;  // fitted decay rate of E on the tail window
  double tail_sup = 0.0;     // tail sup of the weighted energy wE
  std::vector<ClaimVerdict> verdicts;
};

struct SweepReport {
  std::vector<SweepMember> members;
  double rate_spread = 0.0;   // (max - min) / max of the fitted rates
  double sup_ratio = 0.0;     // max tail sup / median tail sup
  bool rates_within = false;  // rate_spread <= 0.10
  bool sups_within = false;   // sup_ratio <= 2
  bool pass = false;
};

struct SweepSpec {
  EvolutionConfig base;      // kappa is overridden per member
  SpectralConstants shared;  // kappa-independent constants of u_inf
  // Shared decay parameters; alpha must lie below alpha_max of every
  // member (the largest kappa has the smallest alpha_max).
  double alpha = 0.0;
  double delta0 = 0.0;
  double delta = 0.0;
  VerificationOptions options;
};

// Runs one member per kappa. A member whose run aborts keeps its partial
// record, gets no verdicts and fails the sweep.
SweepReport kappa_uniformity_sweep(const SweepSpec& spec, const std::vector<double>& kappas);

}  // namespace kvlab
