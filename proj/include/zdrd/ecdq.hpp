#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "zdrd/rng.hpp"

namespace zdrd {

/// Quantizer steps matched to the channel-noise variances: V_ii = step_i^2/12.
struct QuantizerConfig {
  Eigen::VectorXd steps;   ///< Delta_i
  Eigen::VectorXd v_diag;  ///< V_ii
};

/// step_i = sqrt(12 V_ii). Throws NonPositiveVariance.
QuantizerConfig step_sizes(const Eigen::VectorXd& sigma_v_diag);

struct QuantResult {
  std::int64_t index;     ///< round((x + r)/step), half away from zero
  double reconstruction;  ///< index*step - r (decoder-side value)
};

/// Subtractively dithered uniform scalar quantizer. The reconstruction
/// error is Unif(-step/2, step/2) independent of x when r is uniform
/// dither independent of x.
QuantResult quantize_subtractive(double x, double step, double r);

/// Shared-seed dither: component i at time t is a pure function of
/// (seed, t, i), uniform on [-step_i/2, step_i/2) with the boundary
/// point assigned to -step_i/2. Encoder and decoder construct identical
/// streams from the seed alone.
class DitherStream {
 public:
  DitherStream(std::uint64_t seed, Eigen::VectorXd steps)
      : seed_(seed), steps_(std::move(steps)) {}

  double at(std::int64_t t, int i) const {
    const double u = counter_uniform(seed_, static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(i));
    return (u - 0.5) * steps_(i);
  }

  std::uint64_t seed() const { return seed_; }
  const Eigen::VectorXd& steps() const { return steps_; }

 private:
  std::uint64_t seed_;
  Eigen::VectorXd steps_;
};

}  // namespace zdrd
