#include "kvlab/steady.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <json.hpp>
#include <numbers>
#include <ostream>
#include <sstream>

#include "kvlab/operators.hpp"
#include "kvlab/spectral.hpp"

namespace kvlab {

using nlohmann::json;

void SteadyProblem::validate() const {
  params.validate();
  if (f_inf.size() == 0) throw std::invalid_argument("steady forcing is empty");
  if (!f_inf.boundary_is_zero()) throw std::invalid_argument("steady forcing must vanish on walls");
}

std::string to_string(SteadyStatus s) {
  switch (s) {
    case SteadyStatus::converged: return "converged";
    case SteadyStatus::picard_stagnation: return "picard_stagnation";
    case SteadyStatus::newton_divergence: return "newton_divergence";
  }
  return "unknown";
}

namespace {

VelocityField momentum(const VelocityField& u, const VelocityField& f, double nu) {
  VelocityField r = convection_operator(u, u);
  r.axpy(-nu, laplacian(u));
  r -= f;
  return r;
}

double scaled(double num, const VelocityField& f) {
  const double d = norms(f).l2;
  return d > 0.0 ? num / d : num;
}

}  // namespace

double steady_residual(const VelocityField& u, const VelocityField& f, double nu) {
  return scaled(norms(project(momentum(u, f, nu)).velocity).l2, f);
}

double steady_momentum_residual(const VelocityField& u, const PressureField& p,
                                const VelocityField& f, double nu) {
  VelocityField r = momentum(u, f, nu);
  r += gradient(p);
  return scaled(norms(r).l2, f);
}

SteadyState solve_steady(const SteadyProblem& prob, const SolverSettings& settings,
                         const SteadyOptions& opt) {
  prob.validate();
  settings.validate();
  const GridSpec& g = prob.grid();
  const double nu = prob.params.nu;

  SteadyState st;
  st.u_inf = VelocityField(g);
  st.p_inf = PressureField(g);
  if (norms(prob.f_inf).max == 0.0) return st;

  SaddleProblem sp;
  sp.mass_coef = 0.0;
  sp.stiffness_coef = nu;
  sp.rhs = prob.f_inf;

  // Picard: -nu lap u_{k+1} + conv(u_k, u_{k+1}) + grad p = f.
  SteadyState best = st;
  best.residual = INFINITY;
  bool converged = false;
  for (int k = 1; k <= opt.picard_max && !converged; ++k) {
    sp.advection.transport.assign(1, st.u_inf);
    SaddleSolution sol = solve_saddle(sp, settings);
    VelocityField du = sol.velocity - st.u_inf;
    const double un = norms(sol.velocity).l2;
    converged = un == 0.0 || norms(du).l2 <= opt.picard_tol * un;
    st.u_inf = std::move(sol.velocity);
    st.p_inf = std::move(sol.pressure);
    st.picard_iters = k;
    st.residual = steady_residual(st.u_inf, prob.f_inf, nu);
    if (st.residual < best.residual) best = st;
  }
  if (!converged) {
    best.status = SteadyStatus::picard_stagnation;
    best.picard_iters = st.picard_iters;
    return best;
  }

  // Iterative saddle solves leave a divergence of order tol/h; remove it
  // exactly so the Newton phase starts on the divergence-free subspace.
  st.u_inf = project(st.u_inf).velocity;
  st.residual = steady_residual(st.u_inf, prob.f_inf, nu);

  // Newton: J(u) d + grad dp = -(momentum + grad p).
  const SteadyState picard = st;
  sp.advection.transport.assign(1, st.u_inf);
  sp.advection.reaction.assign(1, st.u_inf);
  for (int k = 1; k <= opt.newton_max; ++k) {
    if (st.residual <= opt.newton_tol) break;
    VelocityField r = momentum(st.u_inf, prob.f_inf, nu);
    r += gradient(st.p_inf);
    r *= -1.0;
    sp.rhs = r;
    sp.advection.transport.assign(1, st.u_inf);
    sp.advection.reaction.assign(1, st.u_inf);
    SaddleSolution d;
    try {
      d = solve_saddle(sp, settings);
    } catch (const NonConvergence&) {
      SteadyState out = picard;
      out.newton_iters = k;
      out.status = SteadyStatus::newton_divergence;
      return out;
    }
    SteadyState next = st;
    next.u_inf += project(d.velocity).velocity;
    next.p_inf += d.pressure;
    next.p_inf.remove_mean();
    next.newton_iters = k;
    next.residual = steady_residual(next.u_inf, prob.f_inf, nu);
    if (!std::isfinite(next.residual) || next.residual > 10.0 * picard.residual) {
      SteadyState out = picard;
      out.newton_iters = k;
      out.status = SteadyStatus::newton_divergence;
      return out;
    }
    // Stop at the roundoff floor, where a step no longer halves the residual.
    const bool stalled = next.residual > 0.5 * st.residual;
    if (next.residual < st.residual) st = std::move(next);
    if (stalled) break;
  }
  return st;
}

double gradient_l4_norm(const VelocityField& f) {
  const GridSpec& g = f.grid();
  const int n = g.n();
  const double ih = 1.0 / g.h();
  // Ghost-reflected tangential values vanish at the wall midpoint.
  auto u_at = [&](int i, int j) {
    if (j < 0) return -f.u(i, 0);
    if (j >= n) return -f.u(i, n - 1);
    return f.u(i, j);
  };
  auto v_at = [&](int i, int j) {
    if (i < 0) return -f.v(0, j);
    if (i >= n) return -f.v(n - 1, j);
    return f.v(i, j);
  };
  auto uy = [&](int i, int j) { return ih * (u_at(i, j) - u_at(i, j - 1)); };  // node (i, j)
  auto vx = [&](int i, int j) { return ih * (v_at(i, j) - v_at(i - 1, j)); };
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double ux = ih * (f.u(i + 1, j) - f.u(i, j));
      const double vy = ih * (f.v(i, j + 1) - f.v(i, j));
      const double uyc = 0.25 * (uy(i, j) + uy(i + 1, j) + uy(i, j + 1) + uy(i + 1, j + 1));
      const double vxc = 0.25 * (vx(i, j) + vx(i + 1, j) + vx(i, j + 1) + vx(i + 1, j + 1));
      const double m2 = ux * ux + vy * vy + uyc * uyc + vxc * vxc;
      s += m2 * m2;
    }
  return std::pow(s * g.h() * g.h(), 0.25);
}

AprioriReport check_apriori_bounds(const SteadyState& state, const SteadyProblem& prob) {
  const double nu = prob.params.nu;
  AprioriReport r;
  r.lambda1 = dirichlet_lambda1(prob.grid());
  r.f_minus1 = h_minus1_norm(prob.f_inf);
  const Norms un = norms(state.u_inf);
  r.u_l2 = un.l2;
  r.u_grad = un.h1_semi;
  r.u_max = un.max;
  r.u_stokes = norms(stokes_apply(state.u_inf)).l2;
  r.u_l4 = l4_norm(state.u_inf);
  r.grad_u_l4 = gradient_l4_norm(state.u_inf);

  r.gradient_lhs = nu * r.u_grad;
  r.gradient_bound = r.gradient_lhs <= r.f_minus1;
  r.l2_rhs = r.f_minus1 / (nu * std::sqrt(r.lambda1));
  r.l2_bound = r.u_l2 <= r.l2_rhs;

  auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
  const double f2 = std::pow(norms(prob.f_inf).l2, 2);
  r.stokes_constant =
      ratio(nu * r.u_stokes * r.u_stokes, f2 + r.u_l2 * r.u_l2 * std::pow(r.u_grad, 4));
  r.max_constant = ratio(r.u_max, std::sqrt(r.u_l2 * r.u_stokes));
  r.l4_constant = ratio(r.u_l4, std::sqrt(r.u_l2 * r.u_grad));
  r.grad_l4_constant = ratio(r.grad_u_l4, std::sqrt(r.u_grad * r.u_stokes));
  return r;
}

ManufacturedSteady manufactured_steady(const GridSpec& g, double nu) {
  constexpr double pi = std::numbers::pi;
  auto X = [](double x) { return x * x * (1 - x) * (1 - x); };
  auto X1 = [](double x) { return 2 * x - 6 * x * x + 4 * x * x * x; };
  auto X2 = [](double x) { return 2 - 12 * x + 12 * x * x; };
  auto X3 = [](double x) { return -12 + 24 * x; };
  const int n = g.n();
  const double h = g.h();
  ManufacturedSteady m{VelocityField(g), PressureField(g), VelocityField(g)};
  // u = X(x) X1(y), v = -X1(x) X(y)
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = i * h, y = (j + 0.5) * h;
      const double u = X(x) * X1(y), v = -X1(x) * X(y);
      const double ux = X1(x) * X1(y), uy = X(x) * X2(y);
      const double lap = X2(x) * X1(y) + X(x) * X3(y);
      m.u_star.u(i, j) = u;
      m.f.u(i, j) = -nu * lap + u * ux + v * uy - pi * std::sin(pi * x) * std::cos(pi * y);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < n; ++j) {
      const double x = (i + 0.5) * h, y = j * h;
      const double u = X(x) * X1(y), v = -X1(x) * X(y);
      const double vx = -X2(x) * X(y), vy = -X1(x) * X1(y);
      const double lap = -(X3(x) * X(y) + X1(x) * X2(y));
      m.u_star.v(i, j) = v;
      m.f.v(i, j) = -nu * lap + u * vx + v * vy - pi * std::cos(pi * x) * std::sin(pi * y);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.p_star(i, j) = std::cos(pi * (i + 0.5) * h) * std::cos(pi * (j + 0.5) * h);
  m.p_star.remove_mean();
  return m;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kFormat = "kvlab-steady-v1";

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_steady_csv(std::ostream& os, const SteadyState& s, const SteadyProblem& prob,
                      const std::string& extra_json) {
  const GridSpec& g = prob.grid();
  json head;
  head["format"] = kFormat;
  head["n"] = g.n();
  head["nu"] = prob.params.nu;
  head["kappa"] = prob.params.kappa;
  head["picard_iters"] = s.picard_iters;
  head["newton_iters"] = s.newton_iters;
  head["residual"] = s.residual;
  head["status"] = to_string(s.status);
  head["extra"] = json::parse(extra_json);
  os << "# " << head.dump() << "\n";
  const int n = g.n();
  auto faces = [&](const char* name, const VelocityField& f) {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j < n; ++j) os << name[0] << ",u," << i << ',' << j << ',' << fmt17(f.u(i, j)) << '\n';
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= n; ++j) os << name[0] << ",v," << i << ',' << j << ',' << fmt17(f.v(i, j)) << '\n';
  };
  os << "field,component,i,j,value\n";
  faces("u", s.u_inf);
  faces("f", prob.f_inf);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) os << "p,p," << i << ',' << j << ',' << fmt17(s.p_inf(i, j)) << '\n';
}

SteadyArtifact read_steady_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
    throw ArtifactError("steady artifact: missing JSON header line");
  SteadyArtifact a;
  a.header = line.substr(2);
  json head;
  try {
    head = json::parse(a.header);
    if (head.at("format").get<std::string>() != kFormat) throw ArtifactError("steady artifact: unknown format");
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("steady artifact: bad header: ") + e.what());
  }
  GridSpec g;
  try {
    g = GridSpec::square(head.at("n").get<int>());
    a.problem.params.nu = head.at("nu").get<double>();
    a.problem.params.kappa = head.at("kappa").get<double>();
    a.state.picard_iters = head.at("picard_iters").get<int>();
    a.state.newton_iters = head.at("newton_iters").get<int>();
    a.state.residual = head.at("residual").get<double>();
    const std::string st = head.at("status").get<std::string>();
    if (st == "converged") a.state.status = SteadyStatus::converged;
    else if (st == "picard_stagnation") a.state.status = SteadyStatus::picard_stagnation;
    else if (st == "newton_divergence") a.state.status = SteadyStatus::newton_divergence;
    else throw ArtifactError("steady artifact: unknown status " + st);
    a.problem.params.validate();
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("steady artifact: bad header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ArtifactError(std::string("steady artifact: ") + e.what());
  }
  a.state.u_inf = VelocityField(g);
  a.state.p_inf = PressureField(g);
  a.problem.f_inf = VelocityField(g);

  if (!std::getline(is, line) || line != "field,component,i,j,value")
    throw ArtifactError("steady artifact: missing column header");
  const int n = g.n();
  std::vector<char> seen(2 * g.velocity_count() + g.cell_count(), 0);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field, comp, si, sj, sv;
    if (!std::getline(ls, field, ',') || !std::getline(ls, comp, ',') || !std::getline(ls, si, ',') ||
        !std::getline(ls, sj, ',') || !std::getline(ls, sv))
      throw ArtifactError("steady artifact: malformed row: " + line);
    int i = 0, j = 0;
    double v = 0.0;
    try {
      std::size_t pos = 0;
      i = std::stoi(si);
      j = std::stoi(sj);
      v = std::stod(sv, &pos);
      if (pos != sv.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ArtifactError("steady artifact: malformed number in row: " + line);
    }
    if (!std::isfinite(v)) throw ArtifactError("steady artifact: non-finite value");
    std::size_t slot = 0;
    double* target = nullptr;
    if ((field == "u" || field == "f") && comp == "u" && i >= 0 && i <= n && j >= 0 && j < n) {
      VelocityField& f = field == "u" ? a.state.u_inf : a.problem.f_inf;
      slot = g.u_index(i, j) + (field == "f" ? g.velocity_count() : 0);
      target = &f.u(i, j);
    } else if ((field == "u" || field == "f") && comp == "v" && i >= 0 && i < n && j >= 0 && j <= n) {
      VelocityField& f = field == "u" ? a.state.u_inf : a.problem.f_inf;
      slot = g.v_index(i, j) + (field == "f" ? g.velocity_count() : 0);
      target = &f.v(i, j);
    } else if (field == "p" && comp == "p" && i >= 0 && i < n && j >= 0 && j < n) {
      slot = 2 * g.velocity_count() + g.cell_index(i, j);
      target = &a.state.p_inf(i, j);
    } else {
      throw ArtifactError("steady artifact: row out of range: " + line);
    }
    if (seen[slot]) throw ArtifactError("steady artifact: duplicate row: " + line);
    seen[slot] = 1;
    *target = v;
    ++rows;
  }
  if (rows != seen.size()) throw ArtifactError("steady artifact: truncated field data");
  if (!a.state.u_inf.boundary_is_zero() || !a.problem.f_inf.boundary_is_zero())
    throw ArtifactError("steady artifact: nonzero wall values");
  return a;
}

}  // namespace kvlab
