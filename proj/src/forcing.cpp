#include "kvlab/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "kvlab/operators.hpp"

namespace kvlab {

std::string to_string(ForcingKind k) {
  switch (k) {
    case ForcingKind::zero: return "zero";
    case ForcingKind::exponential: return "exponential";
    case ForcingKind::power: return "power";
    case ForcingKind::power_exponential: return "power_exponential";
  }
  return "unknown";
}

ForcingKind forcing_kind_from_string(const std::string& s) {
  if (s == "zero") return ForcingKind::zero;
  if (s == "exponential") return ForcingKind::exponential;
  if (s == "power") return ForcingKind::power;
  if (s == "power_exponential") return ForcingKind::power_exponential;
  throw std::invalid_argument("unknown forcing kind '" + s + "'");
}

double ForcingProfile::law(double t) const {
  switch (kind) {
    case ForcingKind::zero: return 0.0;
    case ForcingKind::exponential: return amplitude * std::exp(-sigma * t);
    case ForcingKind::power: return amplitude * std::pow(1.0 + t, -p);
    case ForcingKind::power_exponential: return amplitude * std::pow(1.0 + t, -p) * std::exp(-sigma * t);
  }
  return 0.0;
}

double ForcingProfile::law_dt(double t) const {
  switch (kind) {
    case ForcingKind::zero: return 0.0;
    case ForcingKind::exponential: return -sigma * law(t);
    case ForcingKind::power: return -p * amplitude * std::pow(1.0 + t, -p - 1.0);
    case ForcingKind::power_exponential: return -(p / (1.0 + t) + sigma) * law(t);
  }
  return 0.0;
}

void ForcingProfile::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("forcing sigma must be non-negative");
  if (!(p >= 0.0)) throw std::invalid_argument("forcing p must be non-negative");
  if (!std::isfinite(amplitude)) throw std::invalid_argument("forcing amplitude must be finite");
  if (kind != ForcingKind::zero && shape.size() == 0)
    throw std::invalid_argument("forcing shape is missing");
  if (shape.size() != 0 && !shape.boundary_is_zero())
    throw std::invalid_argument("forcing shape must vanish on walls");
}

VelocityField evaluate(const ForcingProfile& f, double t) {
  VelocityField out = f.shape;
  out *= f.law(t);
  return out;
}

VelocityField evaluate_dt(const ForcingProfile& f, double t) {
  VelocityField out = f.shape;
  out *= f.law_dt(t);
  return out;
}

namespace {

VelocityField read_shape_csv(const GridSpec& g, const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open shape file '" + file + "'");
  VelocityField f(g);
  const int n = g.n();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string comp, si, sj, sv;
    if (!std::getline(ls, comp, ',') || !std::getline(ls, si, ',') || !std::getline(ls, sj, ',') ||
        !std::getline(ls, sv))
      throw std::invalid_argument(file + ":" + std::to_string(lineno) + ": expected u|v,i,j,value");
    int i = 0, j = 0;
    double v = 0.0;
    try {
      i = std::stoi(si);
      j = std::stoi(sj);
      v = std::stod(sv);
    } catch (const std::exception&) {
      throw std::invalid_argument(file + ":" + std::to_string(lineno) + ": malformed number");
    }
    if (comp == "u" && i > 0 && i < n && j >= 0 && j < n) {
      f.u(i, j) = v;
    } else if (comp == "v" && i >= 0 && i < n && j > 0 && j < n) {
      f.v(i, j) = v;
    } else {
      throw std::invalid_argument(file + ":" + std::to_string(lineno) + ": not an interior face");
    }
  }
  return f;
}

}  // namespace

VelocityField spatial_shape(const GridSpec& g, const std::string& name, const std::string& file) {
  constexpr double pi = std::numbers::pi;
  const int n = g.n();
  const double h = g.h();
  VelocityField f(g);
  if (name == "zero") return f;
  if (name == "eigenfield") {
    for (int i = 1; i < n; ++i)
      for (int j = 0; j < n; ++j) f.u(i, j) = std::sin(pi * i * h) * std::sin(pi * (j + 0.5) * h);
    for (int i = 0; i < n; ++i)
      for (int j = 1; j < n; ++j) f.v(i, j) = std::sin(pi * (i + 0.5) * h) * std::sin(pi * j * h);
  } else if (name == "stream_poly") {
    auto X = [](double x) { return x * x * (1 - x) * (1 - x); };
    std::vector<double> psi(std::size_t(n + 1) * (n + 1));
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) psi[std::size_t(i) * (n + 1) + j] = X(i * h) * X(j * h);
    f = curl_of_stream(g, psi);
  } else if (name == "custom_csv") {
    f = read_shape_csv(g, file);
  } else {
    throw std::invalid_argument("unknown shape '" + name + "'");
  }
  const double nrm = norms(f).l2;
  if (!(nrm > 0.0)) throw std::invalid_argument("shape '" + name + "' is identically zero");
  f *= 1.0 / nrm;
  return f;
}

DecayModuli compute_moduli(const ForcingProfile& f, const DecayParameters& dp, double horizon,
                           double dt) {
  f.validate();
  if (!(dt > 0.0) || !(horizon >= dt)) throw std::invalid_argument("moduli need 0 < dt <= horizon");
  if (dp.t_bar != unit_time_weight && horizon < 5.0 * dp.t_bar)
    throw std::invalid_argument("moduli horizon must be at least 5 t_bar");
  DecayModuli m;
  m.horizon = horizon;
  m.dt = dt;
  if (f.kind == ForcingKind::zero || f.amplitude == 0.0 || f.shape.size() == 0) return m;

  const double g2 = std::pow(norms(f.shape).l2, 2);
  m.shape_minus1 = h_minus1_norm(f.shape);
  const double gm2 = m.shape_minus1 * m.shape_minus1;
  const auto steps = static_cast<long>(std::llround(horizon / dt));
  std::vector<double> wf, wf1;
  wf.reserve(std::size_t(steps) + 1);
  wf1.reserve(std::size_t(steps) + 1);
  for (long k = 0; k <= steps; ++k) {
    const double t = double(k) * dt;
    const double w = dp.weight(t);
    const double a = f.law(t), b = f.law_dt(t);
    wf.push_back(w * a * a * g2);
    wf1.push_back(w * (a * a * g2 + b * b * gm2));
  }
  auto finite = [](std::vector<double> v) {
    const double last = v.back();
    if (!std::isfinite(last)) return false;
    auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return !(last > 10.0 * *mid);
  };
  m.M = *std::max_element(wf.begin(), wf.end());
  m.M1 = *std::max_element(wf1.begin(), wf1.end());
  m.finite_M = std::isfinite(m.M) && finite(wf);
  m.finite_M1 = std::isfinite(m.M1) && finite(wf1);
  return m;
}

}  // namespace kvlab
