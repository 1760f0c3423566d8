#include "zdrd/model.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "zdrd/errors.hpp"
#include "zdrd/rng.hpp"

namespace zdrd {

namespace {

constexpr double kUnitCircleTol = 1e-10;

void check_symmetric_psd(const Eigen::MatrixXd& s, const char* name) {
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    std::ostringstream msg;
    msg << name << " is not symmetric";
    throw DimensionMismatch(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    std::ostringstream msg;
    msg << name << " is not positive semidefinite (min eigenvalue "
        << es.eigenvalues().minCoeff() << ")";
    throw DimensionMismatch(msg.str());
  }
}

bool matrix_is_stable(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    if (std::abs(es.eigenvalues()(i)) >= 1.0 - kUnitCircleTol) return false;
  return true;
}

}  // namespace

Eigen::MatrixXd lyapunov_fixed_point(const Eigen::MatrixXd& A,
                                     const Eigen::MatrixXd& Q) {
  const Eigen::Index p = A.rows();
  if (!matrix_is_stable(A))
    throw NonPositiveInput("lyapunov_fixed_point requires a stable A");
  // vec(S) = (I - A (x) A)^{-1} vec(Q)
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(p * p, p * p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      K.block(i * p, j * p, p, p) -= A(i, j) * A;
  Eigen::VectorXd q(p * p);
  for (Eigen::Index j = 0; j < p; ++j) q.segment(j * p, p) = Q.col(j);
  Eigen::VectorXd s = K.partialPivLu().solve(q);
  Eigen::MatrixXd S(p, p);
  for (Eigen::Index j = 0; j < p; ++j) S.col(j) = s.segment(j * p, p);
  return 0.5 * (S + S.transpose());
}

StateSpaceModel make_model(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           std::optional<Eigen::MatrixXd> sigma_x0) {
  if (A.rows() != A.cols()) throw DimensionMismatch("A must be square");
  if (B.rows() != A.rows())
    throw DimensionMismatch("B must have the same row count as A");
  StateSpaceModel m;
  m.A = A;
  m.B = B;
  if (sigma_x0) {
    if (sigma_x0->rows() != A.rows() || sigma_x0->cols() != A.rows())
      throw DimensionMismatch("sigma_x0 must be p x p");
    check_symmetric_psd(*sigma_x0, "sigma_x0");
    m.sigma_x0 = *sigma_x0;
  } else if (matrix_is_stable(A)) {
    m.sigma_x0 = lyapunov_fixed_point(A, B * B.transpose());
  } else {
    m.sigma_x0 = Eigen::MatrixXd::Identity(A.rows(), A.rows());
  }
  return m;
}

SpectrumReport spectrum(const StateSpaceModel& m) {
  SpectrumReport r;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m.A, false);
  r.eigenvalues = es.eigenvalues();

  r.is_stable = true;
  r.unstable_log_sum = 0.0;
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
    const double mag = std::abs(r.eigenvalues(i));
    if (mag > 1.0 + kUnitCircleTol) r.unstable_log_sum += std::log2(mag);
    if (mag >= 1.0 - kUnitCircleTol) r.is_stable = false;
    if (std::abs(mag - 1.0) <= kUnitCircleTol) r.has_unit_circle_modes = true;
  }

  // PBH eigenvector test: every |lambda| >= 1 must be reachable.
  r.is_stabilizable = true;
  const Eigen::Index p = m.p();
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
    if (std::abs(r.eigenvalues(i)) < 1.0 - kUnitCircleTol) continue;
    Eigen::MatrixXcd pencil(p, p + m.q());
    pencil.leftCols(p) =
        m.A.cast<std::complex<double>>() -
        r.eigenvalues(i) * Eigen::MatrixXcd::Identity(p, p);
    pencil.rightCols(m.q()) = m.B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    const auto& sv = svd.singularValues();
    const double thresh = static_cast<double>(p) *
                          std::numeric_limits<double>::epsilon() *
                          (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv(k) > thresh) ++rank;
    if (rank < p) {
      r.is_stabilizable = false;
      break;
    }
  }
  return r;
}

ValidatedModel validate_model(const StateSpaceModel& m) {
  if (m.A.rows() != m.A.cols()) throw DimensionMismatch("A must be square");
  if (m.B.rows() != m.A.rows())
    throw DimensionMismatch("B must have the same row count as A");
  if (m.sigma_x0.rows() != m.A.rows() || m.sigma_x0.cols() != m.A.rows())
    throw DimensionMismatch("sigma_x0 must be p x p");
  check_symmetric_psd(m.sigma_x0, "sigma_x0");

  ValidatedModel v{m, spectrum(m)};
  if (!v.spectrum.is_stabilizable)
    throw NotStabilizable(
        "(A, B) is not stabilizable: an unstable mode is unreachable");
  return v;
}

StateSpaceModel augment_ar(const ArCoefficients& c) {
  if (c.order < 1) throw DimensionMismatch("AR order must be >= 1");
  if (static_cast<int>(c.a.size()) != c.order)
    throw DimensionMismatch("A_list length must equal the AR order");
  const Eigen::Index p = c.a.front().rows();
  for (const auto& aj : c.a)
    if (aj.rows() != p || aj.cols() != p)
      throw DimensionMismatch("all A_j must share dimension p x p");
  if (c.b.rows() != p) throw DimensionMismatch("B must have p rows");
  const Eigen::Index q = c.b.cols();
  const Eigen::Index s = c.order;

  if (s == 1) return make_model(c.a.front(), c.b);

  Eigen::MatrixXd At = Eigen::MatrixXd::Zero(s * p, s * p);
  for (Eigen::Index j = 0; j < s; ++j) At.block(0, j * p, p, p) = c.a[j];
  At.block(p, 0, (s - 1) * p, (s - 1) * p) =
      Eigen::MatrixXd::Identity((s - 1) * p, (s - 1) * p);

  Eigen::MatrixXd Bt = Eigen::MatrixXd::Zero(s * p, s * q);
  Bt.block(0, 0, p, q) = c.b;

  return make_model(At, Bt);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<Eigen::VectorXd> simulate_with_noise(const StateSpaceModel& m,
                                                 const Eigen::VectorXd& x0,
                                                 const Eigen::MatrixXd& W) {
  std::vector<Eigen::VectorXd> traj;
  traj.reserve(W.cols() + 1);
  traj.push_back(x0);
  for (Eigen::Index t = 0; t < W.cols(); ++t)
    traj.push_back(m.A * traj.back() + m.B * W.col(t));
  return traj;
}

std::vector<Eigen::VectorXd> simulate_source(const StateSpaceModel& m, int n,
                                             std::uint64_t seed) {
  GaussianSampler g(seed);
  Eigen::VectorXd x0 = psd_sqrt(m.sigma_x0) * g.vector(m.p());
  Eigen::MatrixXd W(m.q(), n);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < m.q(); ++j) W(j, t) = g();
  return simulate_with_noise(m, x0, W);
}

}  // namespace zdrd
