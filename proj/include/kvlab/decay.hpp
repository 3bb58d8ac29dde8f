#pragma once
// Decay-rate parameters shared by the forcing moduli, the evolution
// diagnostics and the verdicts.

#include "kvlab/spectral.hpp"

namespace kvlab {

struct DecayParameters {
  double alpha = 0.0;
  double alpha_max = 0.0;
  double delta0 = 0.0;
  double alpha1 = 0.0;  // alpha - delta0
  double delta = 0.0;
  double beta = 0.0;    // 2 delta
  double t_bar = unit_time_weight;

  // tau^beta(t) e^{2 alpha1 t}
  double weight(double t) const;
  // Throws std::invalid_argument when an invariant fails; alpha >= alpha_max
  // is accepted only with allow_above_bound (negative controls).
  void validate(bool allow_above_bound = false) const;
};

// alpha = ratio * alpha_max(kappa), alpha1 = alpha - delta0, beta = 2 delta.
DecayParameters make_decay_parameters(const SpectralConstants& c, double ratio, double delta0,
                                      double delta, bool allow_above_bound = false);

// Same with alpha given directly; t_bar still follows c.kappa.
DecayParameters decay_parameters_at(const SpectralConstants& c, double alpha, double delta0,
                                    double delta, bool allow_above_bound = false);

}  // namespace kvlab
