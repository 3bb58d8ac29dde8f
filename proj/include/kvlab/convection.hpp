#pragma once
// Sparse trilinear stencil behind the discrete convection form.
//
// The unsymmetrised form c(a; w, phi) = (a.grad w, phi) is stored as a
// list of terms, each contributing coef * a[adv] * w[col] * phi[row]
// (pointwise, before the h^2 quadrature weight). All indices address
// VelocityField storage and never point at wall faces.

#include <cstdint>
#include <memory>
#include <vector>

#include "kvlab/grid.hpp"

namespace kvlab {

struct ConvectionTerm {
  std::uint32_t row;
  std::uint32_t col;
  std::uint32_t adv;
  double coef;
};

struct SparseEntry {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

class ConvectionStencil {
 public:
  explicit ConvectionStencil(const GridSpec& g);

  // Shared instance per grid size.
  static std::shared_ptr<const ConvectionStencil> for_grid(const GridSpec& g);

  const GridSpec& grid() const { return grid_; }
  const std::vector<ConvectionTerm>& terms() const { return terms_; }

  // A(a) w, pointwise.
  VelocityField apply(const VelocityField& a, const VelocityField& w) const;
  // A(a)^T w, pointwise.
  VelocityField apply_transpose(const VelocityField& a, const VelocityField& w) const;

  // Pointwise matrix of w -> skew(A(a)) w = convection_operator(a, w).
  std::vector<SparseEntry> transport_matrix(const VelocityField& a) const;
  // Pointwise matrix of w -> convection_operator(w, b).
  std::vector<SparseEntry> reaction_matrix(const VelocityField& b) const;
  // Gradient of a -> trilinear_b(a, w, phi), pointwise.
  VelocityField advecting_gradient(const VelocityField& w, const VelocityField& phi) const;

 private:
  GridSpec grid_;
  std::vector<ConvectionTerm> terms_;
};

}  // namespace kvlab
