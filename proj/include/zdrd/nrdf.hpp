#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "zdrd/model.hpp"

namespace zdrd {

struct SolverOptions {
  double tol = 1e-10;    ///< Frobenius stopping tolerance on the iterate
  int max_iter = 10000;
  double damping = 0.5;  ///< eta in (0, 1]
  /// Warm start; when absent the iteration starts from (D/p) I.
  std::optional<Eigen::MatrixXd> init_pi_post;
};

/// Steady-state solution of the rate-distortion allocation at target
/// distortion D. pi_prior and pi_post share the eigenbasis E (rows are
/// eigenvectors of pi_prior), which is what the feedback realization
/// requires: pi_prior = E^T diag(lambda) E, pi_post = E^T diag(delta) E.
struct NrdfSolution {
  double D = 0.0;
  Eigen::MatrixXd pi_post;   ///< posterior error covariance, trace <= D
  Eigen::MatrixXd pi_prior;  ///< A pi_post A^T + B B^T
  Eigen::MatrixXd E;         ///< orthogonal, E pi_prior E^T = diag(lambda)
  Eigen::VectorXd lambda;    ///< prior eigenvalues, sorted descending
  Eigen::VectorXd delta;     ///< posterior allocation, 0 < delta_i <= lambda_i
  double rate = 0.0;         ///< 1/2 sum log2(lambda_i/delta_i), bits/sample
  double water_level = 0.0;  ///< xi: active components satisfy delta_i <= xi
  int iterations = 0;
  double residual = 0.0;

  int p() const { return static_cast<int>(lambda.size()); }
};

/// Classic reverse waterfilling: delta_i = min(xi, lambda_i) with xi
/// chosen by bisection so that sum delta_i = D (or delta = lambda when
/// the budget exceeds sum lambda). Returns (delta, xi).
std::pair<Eigen::VectorXd, double> reverse_waterfill(const Eigen::VectorXd& lambda,
                                                     double D);

/// Coupled allocation used inside the steady-state solve: with
/// M = E A E^T and s_j = [M^T diag(1/lambda) M]_jj, sets
/// delta_j = min(1/(nu + s_j), lambda_j) and picks nu >= 0 so the total
/// equals D. Reduces to reverse_waterfill when A = 0.
std::pair<Eigen::VectorXd, double> coupled_waterfill(const Eigen::VectorXd& lambda,
                                                     const Eigen::VectorXd& s,
                                                     double D);

/// Solves for the steady-state solution at distortion D by fixed-point
/// iteration: pi_prior update, eigendecomposition, coupled allocation in
/// the eigenbasis, damped posterior update. Throws NoConvergence if the
/// residual stays above tol after max_iter.
NrdfSolution solve_nrdf(const ValidatedModel& m, double D,
                        const SolverOptions& opts = {});

/// One solution per grid point, warm-starting from the previous
/// posterior. The grid must be strictly increasing; rates must come out
/// nonincreasing (violation beyond 1e-6 throws MonotonicityViolation).
/// jobs > 1 dispatches contiguous chunks to a thread pool; results are
/// ordered by D either way.
std::vector<NrdfSolution> rate_distortion_sweep(const ValidatedModel& m,
                                                const std::vector<double>& d_grid,
                                                const SolverOptions& opts = {},
                                                int jobs = 1);

struct BoundsReport {
  double lower = 0.0;         ///< the solution's rate, bits
  double upper_scalar = 0.0;  ///< lower + p/2 log2(pi e/6) + 1
  std::optional<double> upper_lattice;  ///< lower + p/2 log2(2 pi e G_p) + 1
  double space_filling_gap_scalar = 0.0;  ///< p/2 log2(pi e/6) + 1
  std::optional<double> g_p;
};

/// p/2 * log2(pi e / 6) + 1 — the scalar-quantizer gap of the upper bound.
double scalar_quantizer_gap(int p);

/// Bounds from a rate value and dimension; g_p below 1/(2 pi e) is
/// rejected (no lattice beats the sphere bound).
BoundsReport bounds_for_rate(double rate, int p, std::optional<double> g_p = {});

BoundsReport bounds(const NrdfSolution& sol, std::optional<double> g_p = {});

}  // namespace zdrd
