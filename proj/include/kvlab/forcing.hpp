#pragma once
// Separable forcing perturbations F(x, t) = g(t) G(x) with prescribed time
// decay, and the weighted moduli M, M1 evaluated on a time grid.

#include <string>

#include "kvlab/decay.hpp"
#include "kvlab/grid.hpp"

namespace kvlab {

enum class ForcingKind { zero, exponential, power, power_exponential };
std::string to_string(ForcingKind k);
ForcingKind forcing_kind_from_string(const std::string& s);

struct ForcingProfile {
  VelocityField shape;  // G, unit l2 norm (or zero)
  double amplitude = 0.0;
  ForcingKind kind = ForcingKind::zero;
  double sigma = 0.0;
  double p = 0.0;

  // g(t) and g'(t)
  double law(double t) const;
  double law_dt(double t) const;
  void validate() const;
};

VelocityField evaluate(const ForcingProfile& f, double t);
VelocityField evaluate_dt(const ForcingProfile& f, double t);

// Spatial shapes, normalised to unit l2 norm:
//   eigenfield  - (s, s) with s = sin(pi x) sin(pi y) sampled at faces
//   stream_poly - discrete curl of the nodal x^2(1-x)^2 y^2(1-y)^2
//   custom_csv  - rows "u|v,i,j,value" read from `file`
//   zero        - the zero field
VelocityField spatial_shape(const GridSpec& g, const std::string& name, const std::string& file = "");

struct DecayModuli {
  double M = 0.0;
  double M1 = 0.0;
  bool finite_M = true;
  bool finite_M1 = true;
  double horizon = 0.0;
  double dt = 0.0;
  double shape_minus1 = 0.0;  // |G|_{-1}
};

// Sup over t_k = k dt in [0, horizon] of w(t)|F|^2 and
// w(t)(|F|^2 + |F_t|_{-1}^2), w = tau^beta e^{2 alpha1 t}. A modulus is
// flagged infinite when its weighted value at the horizon exceeds ten
// times the median over the grid.
DecayModuli compute_moduli(const ForcingProfile& f, const DecayParameters& dp, double horizon,
                           double dt);

}  // namespace kvlab
