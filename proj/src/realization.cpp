#include "zdrd/realization.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "zdrd/errors.hpp"
#include "zdrd/rng.hpp"

namespace zdrd {

RealizationParams derive_channel(const NrdfSolution& sol,
                                 std::optional<Eigen::VectorXd> sigma_v) {
  const int p = sol.p();
  RealizationParams out;
  out.E = sol.E;
  out.h.resize(p);
  out.theta = Eigen::VectorXd::Zero(p);
  out.phi = Eigen::VectorXd::Zero(p);
  if (sigma_v) {
    if (sigma_v->size() != p)
      throw DimensionMismatch("sigma_v must have one entry per component");
    if (sigma_v->minCoeff() <= 0.0)
      throw NonPositiveVariance("sigma_v entries must be positive");
    out.sigma_v = *sigma_v;
  } else {
    out.sigma_v = Eigen::VectorXd::Constant(p, 1.0 / 12.0);
  }

  for (int i = 0; i < p; ++i) {
    double delta = sol.delta(i);
    const double lambda = sol.lambda(i);
    if (delta > lambda * (1.0 + 1e-12))
      throw DegenerateComponent("delta exceeds lambda in the solution");
    if (delta >= lambda - 1e-12 * std::max(1.0, lambda)) delta = lambda;
    out.h(i) = 1.0 - delta / lambda;
    if (out.h(i) > 0.0) {
      out.theta(i) = std::sqrt(out.h(i) * delta / out.sigma_v(i));
      out.phi(i) = out.h(i) / out.theta(i);
    }
  }
  out.precoder = out.phi.asDiagonal() * out.E;
  return out;
}

double RealizationTrace::empirical_mse(int burn_in) const {
  // k - ktilde rather than x - y: identical by the distortion
  // equivalence identity, and immune to unstable-state overflow
  double acc = 0.0;
  int count = 0;
  for (int t = burn_in; t < n; ++t) {
    acc += (k.col(t) - ktilde.col(t)).squaredNorm();
    ++count;
  }
  return count > 0 ? acc / count : 0.0;
}

Eigen::MatrixXd RealizationTrace::scaled_error_covariance(
    const Eigen::MatrixXd& E, int burn_in) const {
  const Eigen::Index p = x.rows();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  int count = 0;
  for (int t = burn_in; t < n; ++t) {
    const Eigen::VectorXd g = E * k.col(t);
    cov += g * g.transpose();
    ++count;
  }
  return count > 0 ? (cov / count).eval() : cov;
}

Eigen::MatrixXd RealizationTrace::beta_lag1_autocorr(int burn_in) const {
  const Eigen::Index p = beta.rows();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  int count = 0;
  for (int t = burn_in; t < n; ++t) {
    mean += beta.col(t);
    ++count;
  }
  mean /= count;
  Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(p, p);
  for (int t = burn_in; t < n; ++t) {
    const Eigen::VectorXd b = beta.col(t) - mean;
    c0 += b * b.transpose();
    if (t + 1 < n) c1 += (beta.col(t + 1) - mean) * b.transpose();
  }
  Eigen::MatrixXd rho(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      rho(i, j) = c1(i, j) / std::sqrt(c0(i, i) * c0(j, j));
  return rho;
}

RealizationTrace simulate_awgn(const ValidatedModel& m,
                               const RealizationParams& params,
                               const NrdfSolution& sol, int n,
                               std::uint64_t seed) {
  if (n < 1) throw NonPositiveInput("need at least one step");
  (void)sol;
  const int p = m.p();
  RealizationTrace tr;
  tr.n = n;
  tr.x.resize(p, n);
  tr.xhat.resize(p, n);
  tr.k.resize(p, n);
  tr.alpha.resize(p, n);
  tr.beta.resize(p, n);
  tr.ktilde.resize(p, n);
  tr.y.resize(p, n);

  // source noise and channel noise from decorrelated substreams
  GaussianSampler source_noise(seed);
  GaussianSampler channel_noise(mix64(seed ^ 0x6368616e6e656cULL));
  const Eigen::VectorXd sigma_v_sqrt = params.sigma_v.cwiseSqrt();
  const Eigen::MatrixXd ET = params.E.transpose();

  // The canonical loop runs on the prediction error k_t, which stays
  // stationary for any admissible design; the raw state of an unstable
  // source leaves double range after a few thousand steps, so x, xhat
  // and y are carried as auxiliary columns only.
  Eigen::VectorXd k = psd_sqrt(m.model.sigma_x0) * source_noise.vector(p);
  Eigen::VectorXd x = k;
  Eigen::VectorXd y_prev = Eigen::VectorXd::Zero(p);

  for (int t = 0; t < n; ++t) {
    const Eigen::VectorXd alpha = params.precoder * k;
    Eigen::VectorXd v(p);
    for (int i = 0; i < p; ++i) v(i) = sigma_v_sqrt(i) * channel_noise();
    const Eigen::VectorXd beta = alpha + v;
    const Eigen::VectorXd ktilde = ET * (params.theta.asDiagonal() * beta);
    const Eigen::VectorXd e = k - ktilde;
    const Eigen::VectorXd xhat = m.model.A * y_prev;
    const Eigen::VectorXd y = ktilde + xhat;

    tr.x.col(t) = x;
    tr.xhat.col(t) = xhat;
    tr.k.col(t) = k;
    tr.alpha.col(t) = alpha;
    tr.beta.col(t) = beta;
    tr.ktilde.col(t) = ktilde;
    tr.y.col(t) = y;
    tr.mse_sum += e.squaredNorm();

    const Eigen::VectorXd w = source_noise.vector(m.q());
    k = m.model.A * e + m.model.B * w;
    x = m.model.A * x + m.model.B * w;
    y_prev = y;
  }
  return tr;
}

KalmanRun kalman_recursion(const ValidatedModel& m,
                           const RealizationParams& params,
                           const NrdfSolution& sol, int horizon) {
  if (horizon < 1) throw NonPositiveInput("horizon must be >= 1");
  const int p = m.p();
  const Eigen::MatrixXd C =
      params.E.transpose() * params.h.asDiagonal() * params.E;
  const Eigen::MatrixXd R = params.E.transpose() *
                            (params.theta.array().square() *
                             params.sigma_v.array())
                                .matrix()
                                .asDiagonal() *
                            params.E;
  const Eigen::MatrixXd Q = m.model.B * m.model.B.transpose();

  KalmanRun run;
  run.pi_prior_seq.reserve(horizon + 1);
  run.pi_post_seq.reserve(horizon + 1);

  Eigen::MatrixXd pi_prior = m.model.sigma_x0;
  for (int t = 0; t <= horizon; ++t) {
    const Eigen::MatrixXd S = C * pi_prior * C.transpose() + R;
    // pseudo-inverse so zero-rate components (S singular there) stay inert
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(S);
    const Eigen::MatrixXd G = pi_prior * C.transpose() * cod.pseudoInverse();
    const Eigen::MatrixXd pi_post = pi_prior - G * S * G.transpose();

    run.pi_prior_seq.push_back(pi_prior);
    run.pi_post_seq.push_back(0.5 * (pi_post + pi_post.transpose()));
    run.final_gain = G;

    const double res = (pi_prior - sol.pi_prior).norm();
    if (run.steps_to_converge < 0 && res <= 1e-6) run.steps_to_converge = t;
    if (t == horizon) {
      run.final_residual = res;
      break;
    }
    pi_prior = m.model.A * run.pi_post_seq.back() * m.model.A.transpose() + Q;
  }
  return run;
}

}  // namespace zdrd
