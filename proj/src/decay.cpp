#include "kvlab/decay.hpp"

#include <cmath>
#include <stdexcept>

namespace kvlab {

double DecayParameters::weight(double t) const {
  return time_weight(t, t_bar, beta) * std::exp(2.0 * alpha1 * t);
}

void DecayParameters::validate(bool allow_above_bound) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!allow_above_bound && !(alpha < alpha_max))
    throw std::invalid_argument("alpha must lie below alpha_max");
  if (!(delta0 > 0.0)) throw std::invalid_argument("delta0 must be positive");
  if (!(alpha1 > 0.0)) throw std::invalid_argument("alpha1 = alpha - delta0 must be positive");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
  if (beta != 2.0 * delta) throw std::invalid_argument("beta must equal 2 delta");
}

DecayParameters make_decay_parameters(const SpectralConstants& c, double ratio, double delta0,
                                      double delta, bool allow_above_bound) {
  if (!(ratio > 0.0)) throw std::invalid_argument("alpha ratio must be positive");
  if (!allow_above_bound && !(ratio < 1.0))
    throw std::invalid_argument("alpha ratio must be below 1");
  return decay_parameters_at(c, ratio * alpha_bound(c, c.kappa), delta0, delta, allow_above_bound);
}

DecayParameters decay_parameters_at(const SpectralConstants& c, double alpha, double delta0,
                                    double delta, bool allow_above_bound) {
  DecayParameters dp;
  dp.alpha_max = alpha_bound(c, c.kappa);
  dp.alpha = alpha;
  dp.delta0 = delta0;
  dp.alpha1 = dp.alpha - delta0;
  dp.delta = delta;
  dp.beta = 2.0 * delta;
  dp.t_bar = t_bar(delta, c.kappa, c);
  dp.validate(allow_above_bound);
  return dp;
}

}  // namespace kvlab
