#pragma once

#include <cmath>
#include <stdexcept>

namespace virality {

// Poisson negative log-likelihood under the log link lambda = exp(F),
// dropping the ln(r!) term that does not depend on F:
//   L(r, F) = lambda - r ln lambda = exp(F) - r F.
// Real-valued targets r >= 0 are accepted; the deviance stays well defined
// for the log-transformed ground truth.
inline double poisson_loss(double r_gt, double raw_score) {
  if (!std::isfinite(r_gt) || !std::isfinite(raw_score)) {
    throw std::invalid_argument("poisson_loss: non-finite input");
  }
  if (r_gt < 0.0) throw std::invalid_argument("poisson_loss: negative target");
  return std::exp(raw_score) - r_gt * raw_score;
}

struct GradHess {
  double grad = 0.0;
  double hess = 0.0;
};

// First and second derivative of poisson_loss in the raw score:
//   grad = exp(F) - r,  hess = exp(F) > 0.
inline GradHess grad_hess(double r_gt, double raw_score) {
  if (!std::isfinite(r_gt) || !std::isfinite(raw_score)) {
    throw std::invalid_argument("grad_hess: non-finite input");
  }
  const double lambda = std::exp(raw_score);
  return {lambda - r_gt, lambda};
}

}  // namespace virality
