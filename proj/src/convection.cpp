#include "kvlab/convection.hpp"

#include <map>
#include <mutex>

namespace kvlab {

namespace {

struct Builder {
  const GridSpec& g;
  std::vector<ConvectionTerm>& out;

  void add(std::size_t row, std::size_t col, std::size_t adv, double coef) {
    out.push_back({std::uint32_t(row), std::uint32_t(col), std::uint32_t(adv), coef});
  }
};

}  // namespace

ConvectionStencil::ConvectionStencil(const GridSpec& g) : grid_(g) {
  const int n = g.n();
  const double c = 0.5 / g.h();
  Builder b{g, terms_};
  terms_.reserve(std::size_t(20) * n * n);

  // x-momentum rows on interior vertical faces.
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t row = g.u_index(i, j);
      // u du/dx; wall faces carry zero and are skipped.
      if (i + 1 < n) b.add(row, g.u_index(i + 1, j), row, c);
      if (i - 1 > 0) b.add(row, g.u_index(i - 1, j), row, -c);
      // vbar du/dy with ghost reflection across the walls y = 0, 1.
      const std::size_t up = (j + 1 < n) ? g.u_index(i, j + 1) : row;
      const double up_sign = (j + 1 < n) ? 1.0 : -1.0;
      const std::size_t dn = (j > 0) ? g.u_index(i, j - 1) : row;
      const double dn_sign = (j > 0) ? 1.0 : -1.0;
      const int vi[2] = {i - 1, i};
      const int vj[2] = {j, j + 1};
      for (int a : vi) {
        for (int bj : vj) {
          if (bj == 0 || bj == n) continue;
          const std::size_t adv = g.v_index(a, bj);
          b.add(row, up, adv, 0.25 * c * up_sign);
          b.add(row, dn, adv, -0.25 * c * dn_sign);
        }
      }
    }
  }

  // y-momentum rows on interior horizontal faces.
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      const std::size_t row = g.v_index(i, j);
      if (j + 1 < n) b.add(row, g.v_index(i, j + 1), row, c);
      if (j - 1 > 0) b.add(row, g.v_index(i, j - 1), row, -c);
      const std::size_t rt = (i + 1 < n) ? g.v_index(i + 1, j) : row;
      const double rt_sign = (i + 1 < n) ? 1.0 : -1.0;
      const std::size_t lt = (i > 0) ? g.v_index(i - 1, j) : row;
      const double lt_sign = (i > 0) ? 1.0 : -1.0;
      const int ui[2] = {i, i + 1};
      const int uj[2] = {j - 1, j};
      for (int a : ui) {
        if (a == 0 || a == n) continue;
        for (int bj : uj) {
          const std::size_t adv = g.u_index(a, bj);
          b.add(row, rt, adv, 0.25 * c * rt_sign);
          b.add(row, lt, adv, -0.25 * c * lt_sign);
        }
      }
    }
  }
}

std::shared_ptr<const ConvectionStencil> ConvectionStencil::for_grid(const GridSpec& g) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const ConvectionStencil>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[g.n()];
  if (!slot) slot = std::make_shared<const ConvectionStencil>(g);
  return slot;
}

VelocityField ConvectionStencil::apply(const VelocityField& a, const VelocityField& w) const {
  require_same(grid_, a.grid());
  require_same(grid_, w.grid());
  VelocityField out(grid_);
  for (const auto& t : terms_) out[t.row] += t.coef * a[t.adv] * w[t.col];
  return out;
}

VelocityField ConvectionStencil::apply_transpose(const VelocityField& a,
                                                 const VelocityField& w) const {
  require_same(grid_, a.grid());
  require_same(grid_, w.grid());
  VelocityField out(grid_);
  for (const auto& t : terms_) out[t.col] += t.coef * a[t.adv] * w[t.row];
  return out;
}

std::vector<SparseEntry> ConvectionStencil::transport_matrix(const VelocityField& a) const {
  require_same(grid_, a.grid());
  std::vector<SparseEntry> m;
  m.reserve(2 * terms_.size());
  for (const auto& t : terms_) {
    const double s = 0.5 * t.coef * a[t.adv];
    if (s == 0.0) continue;
    m.push_back({t.row, t.col, s});
    m.push_back({t.col, t.row, -s});
  }
  return m;
}

std::vector<SparseEntry> ConvectionStencil::reaction_matrix(const VelocityField& b) const {
  require_same(grid_, b.grid());
  std::vector<SparseEntry> m;
  m.reserve(2 * terms_.size());
  for (const auto& t : terms_) {
    const double s1 = 0.5 * t.coef * b[t.col];
    const double s2 = 0.5 * t.coef * b[t.row];
    if (s1 != 0.0) m.push_back({t.row, t.adv, s1});
    if (s2 != 0.0) m.push_back({t.col, t.adv, -s2});
  }
  return m;
}

VelocityField ConvectionStencil::advecting_gradient(const VelocityField& w,
                                                    const VelocityField& phi) const {
  require_same(grid_, w.grid());
  require_same(grid_, phi.grid());
  VelocityField out(grid_);
  for (const auto& t : terms_)
    out[t.adv] += 0.5 * t.coef * (w[t.col] * phi[t.row] - phi[t.col] * w[t.row]);
  return out;
}

}  // namespace kvlab
