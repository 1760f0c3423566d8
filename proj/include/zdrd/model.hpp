#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace zdrd {

/// Gauss-Markov source  x_{t+1} = A x_t + B w_t,  w_t ~ N(0, I_q),
/// x_0 ~ N(0, sigma_x0).
struct StateSpaceModel {
  Eigen::MatrixXd A;         ///< p x p state transition
  Eigen::MatrixXd B;         ///< p x q noise gain
  Eigen::MatrixXd sigma_x0;  ///< p x p initial-state covariance (PSD)

  int p() const { return static_cast<int>(A.rows()); }
  int q() const { return static_cast<int>(B.cols()); }
};

/// Builds a model, checking dimensions and the symmetry/PSD-ness of
/// sigma_x0. When sigma_x0 is omitted it defaults to the stationary
/// covariance (Lyapunov solution) for stable A, and to the identity
/// otherwise.
StateSpaceModel make_model(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           std::optional<Eigen::MatrixXd> sigma_x0 = {});

struct SpectrumReport {
  Eigen::VectorXcd eigenvalues;    ///< eigenvalues of A
  double unstable_log_sum = 0.0;   ///< sum over |lambda|>1 of log2|lambda|, bits
  bool is_stable = false;          ///< all |lambda| < 1
  bool is_stabilizable = false;    ///< PBH test on every |lambda| >= 1
  bool has_unit_circle_modes = false;  ///< any |lambda| within 1e-10 of 1
};

SpectrumReport spectrum(const StateSpaceModel& m);

/// A model that passed validation, carrying its spectrum report.
struct ValidatedModel {
  StateSpaceModel model;
  SpectrumReport spectrum;

  int p() const { return model.p(); }
  int q() const { return model.q(); }
};

/// Checks dimensions and stabilizability. Throws NotStabilizable when
/// some unstable mode is unreachable through B; such models have no
/// asymptotically stationary realization and downstream modules refuse
/// them.
ValidatedModel validate_model(const StateSpaceModel& m);

/// AR(s) coefficients:  x_{t+1} = sum_j A_j x_{t-j+1} + B w_t.
struct ArCoefficients {
  int order = 1;                      ///< s >= 1
  std::vector<Eigen::MatrixXd> a;     ///< A_1 .. A_s, each p x p
  Eigen::MatrixXd b;                  ///< p x q
};

/// Rewrites an AR(s) source as the sp-dimensional AR(1) model with
/// block-companion transition (first block row A_1..A_s, identity
/// sub-diagonal) and the noise gain carrying B in the (1,1) block.
/// For s = 1 this is the identity rewrite.
StateSpaceModel augment_ar(const ArCoefficients& c);

/// Solves sigma = A sigma A^T + Q for stable A (vectorized dense solve).
/// Throws NonPositiveInput if A has a unit-or-larger eigenvalue.
Eigen::MatrixXd lyapunov_fixed_point(const Eigen::MatrixXd& A,
                                     const Eigen::MatrixXd& Q);

/// Simulates n steps; returns x_0 .. x_n (n+1 states). Deterministic
/// given the seed.
std::vector<Eigen::VectorXd> simulate_source(const StateSpaceModel& m, int n,
                                             std::uint64_t seed);

/// Same recursion driven by caller-supplied noise columns W = [w_0 .. w_{n-1}]
/// from a fixed x_0. Used by tests that compare against direct recursions.
std::vector<Eigen::VectorXd> simulate_with_noise(const StateSpaceModel& m,
                                                 const Eigen::VectorXd& x0,
                                                 const Eigen::MatrixXd& W);

/// PSD square root via symmetric eigendecomposition, negative eigenvalues
/// clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S);

}  // namespace zdrd
