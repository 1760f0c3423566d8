#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "zdrd/model.hpp"
#include "zdrd/nrdf.hpp"

namespace zdrd {

/// Channel matrices of the feedback test-channel realization. All of
/// h, theta, phi, sigma_v are diagonal and stored as vectors:
///   h_i     = 1 - delta_i/lambda_i
///   theta_i = sqrt(h_i delta_i / V_ii)
///   phi_i   = h_i / theta_i
/// Zero-rate components (delta_i = lambda_i) carry theta_i = phi_i = 0
/// and transmit nothing; the decoder keeps the prediction there.
struct RealizationParams {
  Eigen::MatrixXd E;        ///< orthogonal, from the solution
  Eigen::VectorXd h;        ///< 0 <= h_i < 1
  Eigen::VectorXd theta;
  Eigen::VectorXd phi;
  Eigen::VectorXd sigma_v;  ///< V_ii > 0, channel-noise variances
  Eigen::MatrixXd precoder; ///< diag(phi) * E

  int p() const { return static_cast<int>(h.size()); }
  bool active(int i) const { return h(i) > 0.0; }
};

/// Builds the steady-state channel from a solution. sigma_v defaults to
/// V_ii = 1/12 for every component (so the matched quantizer step is 1);
/// a caller-supplied diagonal overrides it, with theta recomputed so the
/// Kalman-gain identity is preserved. delta within 1e-12 of lambda is
/// snapped to lambda before forming h.
RealizationParams derive_channel(const NrdfSolution& sol,
                                 std::optional<Eigen::VectorXd> sigma_v = {});

/// Per-step record of the ideal (AWGN-channel) realization loop.
struct RealizationTrace {
  // column t of each matrix is the step-t vector
  Eigen::MatrixXd x, xhat, k, alpha, beta, ktilde, y;
  double mse_sum = 0.0;          ///< sum over steps of |x_t - y_t|^2
  int n = 0;

  double empirical_mse(int burn_in = 0) const;
  /// Sample covariance of E k_t over steps >= burn_in.
  Eigen::MatrixXd scaled_error_covariance(const Eigen::MatrixXd& E,
                                          int burn_in = 0) const;
  /// Lag-1 sample autocorrelation matrix of beta (entrywise rho).
  Eigen::MatrixXd beta_lag1_autocorr(int burn_in = 0) const;
};

/// Runs the realization with Gaussian channel noise v_t ~ N(0, sigma_v):
///   k_t = x_t - A y_{t-1},  alpha_t = phi E k_t,  beta_t = alpha_t + v_t,
///   y_t = E^T theta beta_t + A y_{t-1}.
/// Deterministic given the seed.
RealizationTrace simulate_awgn(const ValidatedModel& m,
                               const RealizationParams& params,
                               const NrdfSolution& sol, int n,
                               std::uint64_t seed);

struct KalmanRun {
  std::vector<Eigen::MatrixXd> pi_prior_seq;  ///< Pi_{t|t-1}, t = 0..horizon
  std::vector<Eigen::MatrixXd> pi_post_seq;   ///< Pi_{t|t}
  Eigen::MatrixXd final_gain;                 ///< G at the last step
  int steps_to_converge = -1;  ///< first t with |Pi_{t|t-1} - Pi|_F <= 1e-6
  double final_residual = 0.0;
};

/// Iterates the covariance prediction/update recursion with the
/// steady-state channel matrices held fixed, from Pi_{0|-1} = sigma_x0.
/// At the designed fixed point the gain is the identity and the
/// posterior equals E^T diag(delta) E.
KalmanRun kalman_recursion(const ValidatedModel& m,
                           const RealizationParams& params,
                           const NrdfSolution& sol, int horizon);

}  // namespace zdrd
