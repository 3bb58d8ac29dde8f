#include "kvlab/operators.hpp"

#include <algorithm>
#include <cmath>

#include "kvlab/convection.hpp"
#include "kvlab/fast_solvers.hpp"

namespace kvlab {

VelocityField laplacian(const VelocityField& f) {
  const GridSpec& g = f.grid();
  const int n = g.n();
  const double s = 1.0 / (g.h() * g.h());
  VelocityField out(g);
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double c = f.u(i, j);
      const double up = (j + 1 < n) ? f.u(i, j + 1) : -c;
      const double dn = (j > 0) ? f.u(i, j - 1) : -c;
      out.u(i, j) = s * (f.u(i + 1, j) + f.u(i - 1, j) + up + dn - 4.0 * c);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      const double c = f.v(i, j);
      const double rt = (i + 1 < n) ? f.v(i + 1, j) : -c;
      const double lt = (i > 0) ? f.v(i - 1, j) : -c;
      out.v(i, j) = s * (f.v(i, j + 1) + f.v(i, j - 1) + rt + lt - 4.0 * c);
    }
  }
  return out;
}

PressureField divergence(const VelocityField& f) {
  const GridSpec& g = f.grid();
  const int n = g.n();
  const double ih = 1.0 / g.h();
  PressureField d(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d(i, j) = ih * (f.u(i + 1, j) - f.u(i, j) + f.v(i, j + 1) - f.v(i, j));
  return d;
}

VelocityField gradient(const PressureField& p) {
  const GridSpec& g = p.grid();
  const int n = g.n();
  const double ih = 1.0 / g.h();
  VelocityField out(g);
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) out.u(i, j) = ih * (p(i, j) - p(i - 1, j));
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < n; ++j) out.v(i, j) = ih * (p(i, j) - p(i, j - 1));
  return out;
}

double trilinear_b(const VelocityField& v, const VelocityField& w, const VelocityField& phi) {
  require_same(v.grid(), w.grid());
  require_same(v.grid(), phi.grid());
  const auto st = ConvectionStencil::for_grid(v.grid());
  double s = 0.0;
  for (const auto& t : st->terms())
    s += t.coef * v[t.adv] * (w[t.col] * phi[t.row] - phi[t.col] * w[t.row]);
  const double h = v.grid().h();
  return 0.5 * s * h * h;
}

VelocityField convection_operator(const VelocityField& v, const VelocityField& w) {
  require_same(v.grid(), w.grid());
  const auto st = ConvectionStencil::for_grid(v.grid());
  VelocityField out(v.grid());
  for (const auto& t : st->terms()) {
    const double a = 0.5 * t.coef * v[t.adv];
    out[t.row] += a * w[t.col];
    out[t.col] -= a * w[t.row];
  }
  return out;
}

Projection project(const VelocityField& f) {
  const auto ops = SeparableOperators::for_grid(f.grid());
  PressureField phi = ops->solve_neumann(divergence(f));
  VelocityField w = f;
  w -= gradient(phi);
  w.clear_boundary();
  return {std::move(w), std::move(phi)};
}

VelocityField stokes_apply(const VelocityField& f) {
  VelocityField out = project(laplacian(f)).velocity;
  out *= -1.0;
  return out;
}

Norms norms(const VelocityField& f) {
  const GridSpec& g = f.grid();
  const int n = g.n();
  Norms r;
  double mx = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) mx = std::max(mx, std::abs(f[k]));
  r.max = mx;
  r.l2 = std::sqrt(inner(f, f));

  // Sum of squared differences, which equals -<laplacian(f), f>.
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = f.u(i + 1, j) - f.u(i, j);
      s += d * d;
    }
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      const double d = f.u(i, j + 1) - f.u(i, j);
      s += d * d;
    }
    s += 2.0 * (f.u(i, 0) * f.u(i, 0) + f.u(i, n - 1) * f.u(i, n - 1));
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = f.v(i, j + 1) - f.v(i, j);
      s += d * d;
    }
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const double d = f.v(i + 1, j) - f.v(i, j);
      s += d * d;
    }
    s += 2.0 * (f.v(0, j) * f.v(0, j) + f.v(n - 1, j) * f.v(n - 1, j));
  }
  r.h1_semi = std::sqrt(s);
  return r;
}

Norms norms(const PressureField& p) {
  Norms r;
  double mx = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) mx = std::max(mx, std::abs(p[k]));
  r.max = mx;
  r.l2 = std::sqrt(inner(p, p));
  const VelocityField gp = gradient(p);
  r.h1_semi = std::sqrt(inner(gp, gp));
  return r;
}

double h_minus1_norm(const VelocityField& f) {
  const auto ops = SeparableOperators::for_grid(f.grid());
  const VelocityField w = ops->solve_helmholtz(f, 0.0, 1.0);
  return std::sqrt(std::max(0.0, inner(f, w)));
}

double l4_norm(const VelocityField& f) {
  const GridSpec& g = f.grid();
  const int n = g.n();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double uc = 0.5 * (f.u(i, j) + f.u(i + 1, j));
      const double vc = 0.5 * (f.v(i, j) + f.v(i, j + 1));
      const double m2 = uc * uc + vc * vc;
      s += m2 * m2;
    }
  return std::pow(s * g.h() * g.h(), 0.25);
}

VelocityField curl_of_stream(const GridSpec& g, std::span<const double> psi) {
  const int n = g.n();
  const std::size_t stride = std::size_t(n) + 1;
  if (psi.size() != stride * stride)
    throw std::invalid_argument("stream function needs (n+1)^2 node values");
  auto at = [&](int i, int j) { return psi[std::size_t(i) * stride + j]; };
  const double ih = 1.0 / g.h();
  VelocityField f(g);
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j) f.u(i, j) = ih * (at(i, j + 1) - at(i, j));
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < n; ++j) f.v(i, j) = -ih * (at(i + 1, j) - at(i, j));
  return f;
}

}  // namespace kvlab
