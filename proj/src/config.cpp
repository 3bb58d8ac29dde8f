#include "kvlab/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace kvlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
    throw ConfigError("key '" + key + "': '" + v + "' is not a finite number");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define KV_DOUBLE(name)                                                                   \
  Field {                                                                                 \
    #name, [](RunConfig& c, const std::string& v) { c.name = to_double(#name, v); },      \
        [](const RunConfig& c) { return fmt(c.name); }                                    \
  }
#define KV_STRING(name)                                                                   \
  Field {                                                                                 \
    #name, [](RunConfig& c, const std::string& v) { c.name = v; },                        \
        [](const RunConfig& c) { return c.name; }                                         \
  }
#define KV_BOOL(name)                                                                     \
  Field {                                                                                 \
    #name, [](RunConfig& c, const std::string& v) { c.name = to_bool(#name, v); },        \
        [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); }         \
  }
#define KV_AUTO(name)                                                                     \
  Field {                                                                                 \
    #name,                                                                                \
        [](RunConfig& c, const std::string& v) {                                          \
          if (v == "auto") c.name.reset();                                                \
          else c.name = to_double(#name, v);                                              \
        },                                                                                \
        [](const RunConfig& c) { return c.name ? fmt(*c.name) : std::string("auto"); }   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      Field{"n", [](RunConfig& c, const std::string& v) { c.n = int(to_integer("n", v)); },
            [](const RunConfig& c) { return std::to_string(c.n); }},
      KV_DOUBLE(nu),
      KV_DOUBLE(kappa),
      KV_STRING(steady_shape),
      KV_STRING(steady_shape_file),
      KV_DOUBLE(steady_amplitude),
      KV_STRING(kind),
      KV_DOUBLE(amplitude),
      KV_AUTO(sigma),
      KV_AUTO(p),
      KV_STRING(shape),
      KV_STRING(shape_file),
      KV_DOUBLE(ratio),
      KV_AUTO(alpha),
      KV_AUTO(delta0),
      KV_DOUBLE(delta0_fraction),
      KV_DOUBLE(delta),
      KV_BOOL(negative_control),
      KV_DOUBLE(dt),
      KV_DOUBLE(horizon),
      KV_STRING(scheme),
      KV_BOOL(nonlinear),
      KV_STRING(solver_method),
      KV_DOUBLE(solver_tol),
      Field{"solver_max_iter",
            [](RunConfig& c, const std::string& v) {
              c.solver_max_iter = int(to_integer("solver_max_iter", v));
            },
            [](const RunConfig& c) { return std::to_string(c.solver_max_iter); }},
      KV_STRING(z0_shape),
      KV_STRING(z0_file),
      KV_DOUBLE(z0_amplitude),
      KV_DOUBLE(eig_tol),
      Field{"n_samples",
            [](RunConfig& c, const std::string& v) { c.n_samples = int(to_integer("n_samples", v)); },
            [](const RunConfig& c) { return std::to_string(c.n_samples); }},
      Field{"seed",
            [](RunConfig& c, const std::string& v) {
              const long long s = to_integer("seed", v);
              if (s < 0) throw ConfigError("key 'seed' must be non-negative");
              c.seed = std::uint64_t(s);
            },
            [](const RunConfig& c) { return std::to_string(c.seed); }},
      KV_DOUBLE(slack),
      KV_DOUBLE(growth_tolerance),
      KV_DOUBLE(tail_fraction),
      KV_STRING(run_id),
  };
  return f;
}

#undef KV_DOUBLE
#undef KV_STRING
#undef KV_BOOL
#undef KV_AUTO

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void RunConfig::validate() const {
  require(n >= 8 && n <= 512, "n must lie in [8, 512]");
  require(nu > 0.0, "nu must be positive");
  require(kappa >= 0.0, "kappa must be non-negative");
  require(steady_amplitude >= 0.0, "steady_amplitude must be non-negative");
  require(amplitude >= 0.0, "amplitude must be non-negative");
  require(!sigma || *sigma >= 0.0, "sigma must be non-negative");
  require(!p || *p >= 0.0, "p must be non-negative");
  require(ratio > 0.0, "ratio must be positive");
  require(negative_control || ratio < 1.0, "ratio >= 1 needs negative_control = true");
  require(!alpha || *alpha > 0.0, "alpha must be positive");
  require(!delta0 || *delta0 > 0.0, "delta0 must be positive");
  require(delta0_fraction > 0.0 && delta0_fraction < ratio,
          "delta0_fraction must lie in (0, ratio) so that alpha1 > 0");
  require(delta >= 0.0, "delta must be non-negative");
  require(dt > 0.0, "dt must be positive");
  require(horizon >= 10.0 * dt, "horizon must cover at least ten steps");
  require(std::abs(std::llround(horizon / dt) * dt - horizon) <= 1e-9 * horizon,
          "horizon must be an integer multiple of dt");
  require(scheme == "semi_implicit_be" || scheme == "semi_implicit_cn", "unknown scheme '" + scheme + "'");
  require(solver_method == "schur_cg" || solver_method == "direct_sparse",
          "unknown solver_method '" + solver_method + "'");
  require(solver_tol > 0.0 && solver_tol < 1.0, "solver_tol must lie in (0, 1)");
  require(solver_max_iter >= 1, "solver_max_iter must be positive");
  require(z0_amplitude >= 0.0, "z0_amplitude must be non-negative");
  require(eig_tol > 0.0 && eig_tol < 1e-2, "eig_tol must lie in (0, 1e-2)");
  require(n_samples >= 0, "n_samples must be non-negative");
  require(slack >= 0.0, "slack must be non-negative");
  require(growth_tolerance >= 0.0, "growth_tolerance must be non-negative");
  require(tail_fraction > 0.0 && tail_fraction < 1.0, "tail_fraction must lie in (0, 1)");
  require(!run_id.empty() && run_id.find_first_of("/\\ \t") == std::string::npos,
          "run_id must be a non-empty token without spaces or slashes");
}

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const Field* f = nullptr;
    for (const auto& cand : fields())
      if (key == cand.key) f = &cand;
    if (!f) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    f->set(c, value);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(c));
  return out;
}

std::string to_text(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + " = " + v + "\n";
  return out;
}

std::vector<double> parse_kappa_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double k = to_double("kappas", trim(item));
    if (k < 0.0) throw ConfigError("kappas must be non-negative");
    out.push_back(k);
  }
  if (out.empty()) throw ConfigError("empty kappa list");
  return out;
}

}  // namespace kvlab
