#include "zdrd/nrdf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "zdrd/errors.hpp"

namespace zdrd {

namespace {

/// Eigendecomposition of a symmetric matrix with the conventions the
/// realization relies on: S = E^T diag(vals) E, eigenvalues sorted
/// descending, each row of E signed so its first nonzero entry is
/// positive.
void eig_sorted(const Eigen::MatrixXd& S, Eigen::MatrixXd& E,
                Eigen::VectorXd& vals) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::Index p = S.rows();
  vals.resize(p);
  E.resize(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    vals(i) = es.eigenvalues()(p - 1 - i);
    E.row(i) = es.eigenvectors().col(p - 1 - i).transpose();
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index k = 0; k < p; ++k) {
      if (std::abs(E(i, k)) > 1e-12) {
        if (E(i, k) < 0.0) E.row(i) = -E.row(i);
        break;
      }
    }
  }
}

double rate_bits(const Eigen::VectorXd& lambda, const Eigen::VectorXd& delta) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    r += 0.5 * std::log2(lambda(i) / delta(i));
  return std::max(r, 0.0);
}

NrdfSolution finalize_solution(const ValidatedModel& m, double D,
                               const Eigen::MatrixXd& pi_post_iter,
                               const Eigen::MatrixXd& Q, int iterations,
                               double residual) {
  NrdfSolution sol;
  sol.D = D;
  sol.pi_prior = m.model.A * pi_post_iter * m.model.A.transpose() + Q;
  eig_sorted(sol.pi_prior, sol.E, sol.lambda);
  const Eigen::MatrixXd M = sol.E * m.model.A * sol.E.transpose();
  Eigen::VectorXd s(sol.lambda.size());
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      acc += M(i, j) * M(i, j) / sol.lambda(i);
    s(j) = acc;
  }
  auto [delta, nu] = coupled_waterfill(sol.lambda, s, D);
  sol.delta = delta;
  sol.pi_post = sol.E.transpose() * sol.delta.asDiagonal() * sol.E;
  sol.rate = rate_bits(sol.lambda, sol.delta);
  sol.water_level = sol.delta.maxCoeff();
  sol.iterations = iterations;
  sol.residual = residual;
  return sol;
}

}  // namespace

std::pair<Eigen::VectorXd, double> reverse_waterfill(const Eigen::VectorXd& lambda,
                                                     double D) {
  if (D <= 0.0) throw NonPositiveInput("distortion budget must be positive");
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (lambda(i) <= 0.0)
      throw NonPositiveInput("waterfill requires positive lambda");

  if (lambda.sum() <= D)
    return {lambda, lambda.maxCoeff()};

  double lo = 0.0, hi = lambda.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double xi = 0.5 * (lo + hi);
    if (lambda.cwiseMin(xi).sum() > D)
      hi = xi;
    else
      lo = xi;
  }
  const double xi = 0.5 * (lo + hi);
  return {lambda.cwiseMin(xi).eval(), xi};
}

std::pair<Eigen::VectorXd, double> coupled_waterfill(const Eigen::VectorXd& lambda,
                                                     const Eigen::VectorXd& s,
                                                     double D) {
  if (D <= 0.0) throw NonPositiveInput("distortion budget must be positive");
  const Eigen::Index p = lambda.size();

  const auto alloc = [&](double nu) {
    Eigen::VectorXd d(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      const double denom = nu + s(i);
      d(i) = (denom * lambda(i) <= 1.0) ? lambda(i) : 1.0 / denom;
    }
    return d;
  };

  if (alloc(0.0).sum() <= D) return {alloc(0.0), 0.0};

  double lo = 0.0, hi = 1.0;
  while (alloc(hi).sum() > D) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double nu = 0.5 * (lo + hi);
    if (alloc(nu).sum() > D)
      lo = nu;
    else
      hi = nu;
  }
  const double nu = 0.5 * (lo + hi);
  return {alloc(nu), nu};
}

NrdfSolution solve_nrdf(const ValidatedModel& m, double D,
                        const SolverOptions& opts) {
  if (D <= 0.0) throw NonPositiveInput("distortion budget must be positive");
  if (!m.spectrum.is_stabilizable)
    throw NotStabilizable("solve_nrdf requires a stabilizable model");

  const Eigen::Index p = m.p();
  const Eigen::MatrixXd Q = m.model.B * m.model.B.transpose();

  // Rate-zero branch: for stable A with the stationary covariance inside
  // the budget, delta = lambda is feasible and exactly optimal.
  if (m.spectrum.is_stable) {
    const Eigen::MatrixXd S = lyapunov_fixed_point(m.model.A, Q);
    if (S.trace() <= D) {
      NrdfSolution sol;
      sol.D = D;
      sol.pi_post = S;
      sol.pi_prior = S;
      eig_sorted(S, sol.E, sol.lambda);
      sol.delta = sol.lambda;
      sol.rate = 0.0;
      sol.water_level = sol.lambda.maxCoeff();
      sol.iterations = 0;
      sol.residual = 0.0;
      return sol;
    }
  }

  Eigen::MatrixXd pi_post =
      opts.init_pi_post ? *opts.init_pi_post
                        : Eigen::MatrixXd::Identity(p, p) * (D / static_cast<double>(p));

  Eigen::MatrixXd E;
  Eigen::VectorXd lambda, s(p);
  double residual = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    const Eigen::MatrixXd pi_prior =
        m.model.A * pi_post * m.model.A.transpose() + Q;
    eig_sorted(pi_prior, E, lambda);
    const Eigen::MatrixXd M = E * m.model.A * E.transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < p; ++i)
        acc += M(i, j) * M(i, j) / lambda(i);
      s(j) = acc;
    }
    auto [delta, nu] = coupled_waterfill(lambda, s, D);
    const Eigen::MatrixXd pi_new = E.transpose() * delta.asDiagonal() * E;
    residual = (pi_new - pi_post).norm();
    pi_post = (1.0 - opts.damping) * pi_post + opts.damping * pi_new;
    if (residual <= opts.tol) {
      ++iter;
      break;
    }
  }
  if (residual > opts.tol) {
    std::ostringstream msg;
    msg << "allocation iteration did not converge: residual " << residual
        << " after " << opts.max_iter << " iterations";
    throw NoConvergence(msg.str(), residual, opts.max_iter);
  }

  return finalize_solution(m, D, pi_post, Q, iter, residual);
}

std::vector<NrdfSolution> rate_distortion_sweep(const ValidatedModel& m,
                                                const std::vector<double>& d_grid,
                                                const SolverOptions& opts,
                                                int jobs) {
  if (d_grid.empty()) throw NonPositiveInput("distortion grid is empty");
  for (std::size_t k = 1; k < d_grid.size(); ++k)
    if (d_grid[k] <= d_grid[k - 1])
      throw NonPositiveInput("distortion grid must be strictly increasing");

  std::vector<NrdfSolution> out(d_grid.size());
  const int n = static_cast<int>(d_grid.size());
  jobs = std::clamp(jobs, 1, n);

  const auto run_chunk = [&](int begin, int end, std::exception_ptr& err) {
    try {
      SolverOptions o = opts;
      for (int k = begin; k < end; ++k) {
        try {
          out[k] = solve_nrdf(m, d_grid[k], o);
        } catch (const NoConvergence& e) {
          std::ostringstream msg;
          msg << "at D = " << d_grid[k] << ": " << e.what();
          throw NoConvergence(msg.str(), e.residual, e.iterations);
        }
        o.init_pi_post = out[k].pi_post;  // warm start within the chunk
      }
    } catch (...) {
      err = std::current_exception();
    }
  };

  if (jobs == 1) {
    std::exception_ptr err;
    run_chunk(0, n, err);
    if (err) std::rethrow_exception(err);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(jobs);
    const int chunk = (n + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
      const int begin = w * chunk;
      const int end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_chunk, begin, end, std::ref(errs[w]));
    }
    for (auto& th : pool) th.join();
    for (auto& err : errs)
      if (err) std::rethrow_exception(err);
  }

  for (int k = 1; k < n; ++k) {
    if (out[k].rate > out[k - 1].rate + 1e-6) {
      std::ostringstream msg;
      msg << "rate increased along the distortion grid at D = " << d_grid[k]
          << " (" << out[k - 1].rate << " -> " << out[k].rate << ")";
      throw MonotonicityViolation(msg.str(), d_grid[k]);
    }
  }
  return out;
}

double scalar_quantizer_gap(int p) {
  return 0.5 * static_cast<double>(p) * std::log2(M_PI * M_E / 6.0) + 1.0;
}

BoundsReport bounds_for_rate(double rate, int p, std::optional<double> g_p) {
  BoundsReport r;
  r.lower = rate;
  r.space_filling_gap_scalar = scalar_quantizer_gap(p);
  r.upper_scalar = rate + r.space_filling_gap_scalar;
  if (g_p) {
    const double sphere_bound = 1.0 / (2.0 * M_PI * M_E);
    if (*g_p <= sphere_bound - 1e-12)
      throw InvalidGp("G_p below the sphere bound 1/(2 pi e)");
    r.g_p = g_p;
    r.upper_lattice =
        rate + 0.5 * static_cast<double>(p) * std::log2(2.0 * M_PI * M_E * *g_p) +
        1.0;
  }
  return r;
}

BoundsReport bounds(const NrdfSolution& sol, std::optional<double> g_p) {
  return bounds_for_rate(sol.rate, sol.p(), g_p);
}

}  // namespace zdrd
