#include "zdrd/ecdq.hpp"

#include <cmath>

#include "zdrd/errors.hpp"

namespace zdrd {

QuantizerConfig step_sizes(const Eigen::VectorXd& sigma_v_diag) {
  QuantizerConfig cfg;
  cfg.v_diag = sigma_v_diag;
  cfg.steps.resize(sigma_v_diag.size());
  for (Eigen::Index i = 0; i < sigma_v_diag.size(); ++i) {
    if (sigma_v_diag(i) <= 0.0)
      throw NonPositiveVariance("channel-noise variances must be positive");
    cfg.steps(i) = std::sqrt(12.0 * sigma_v_diag(i));
  }
  return cfg;
}

QuantResult quantize_subtractive(double x, double step, double r) {
  // round half away from zero, like std::round
  const auto index = static_cast<std::int64_t>(std::round((x + r) / step));
  return {index, static_cast<double>(index) * step - r};
}

}  // namespace zdrd
