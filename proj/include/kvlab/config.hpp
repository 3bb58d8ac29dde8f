#pragma once
// Flat "key = value" run configuration. Blank lines and lines starting with
// '#' are ignored; unknown or repeated keys are errors.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kvlab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  int n = 32;
  double nu = 1.0;
  double kappa = 0.1;

  // steady forcing f_inf = steady_amplitude * unit shape, or the
  // manufactured equilibrium when steady_shape = manufactured
  std::string steady_shape = "eigenfield";
  std::string steady_shape_file;
  double steady_amplitude = 1.0;

  // perturbation forcing F = g(t) G
  std::string kind = "power_exponential";
  double amplitude = 1.0;
  std::optional<double> sigma;  // unset ("auto"): alpha1, taken at ratio 0.9 for negative controls
  std::optional<double> p;      // unset ("auto"): beta / 2
  std::string shape = "eigenfield";
  std::string shape_file;

  // decay parameters
  double ratio = 0.9;
  std::optional<double> alpha;   // unset ("auto"): ratio * alpha_max
  std::optional<double> delta0;  // unset ("auto"): delta0_fraction * alpha_max
  double delta0_fraction = 0.75;
  double delta = 1.0;
  bool negative_control = false;  // permits ratio >= 1

  // time stepping
  double dt = 0.05;
  double horizon = 40.0;
  std::string scheme = "semi_implicit_be";
  bool nonlinear = true;
  std::string solver_method = "direct_sparse";
  double solver_tol = 1e-10;
  int solver_max_iter = 500;

  // initial perturbation z0 = z0_amplitude * unit shape
  std::string z0_shape = "eigenfield";
  std::string z0_file;
  double z0_amplitude = 0.1;

  // spectral estimates
  double eig_tol = 1e-8;
  int n_samples = 64;
  std::uint64_t seed = 1;

  // verification
  double slack = 0.5;
  double growth_tolerance = 0.01;
  double tail_fraction = 0.5;

  std::string run_id = "run";

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

// Canonical text: every key once, in a fixed order, doubles as %.17g.
// parse_config(to_text(c)) reproduces c.
std::string to_text(const RunConfig& c);

// (key, canonical value) pairs in the to_text order.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c);

// "0.1,0.01,0" -> {0.1, 0.01, 0}
std::vector<double> parse_kappa_list(const std::string& s);

}  // namespace kvlab
