#include "zdrd/nrdf_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "zdrd/errors.hpp"

namespace zdrd {

namespace {

double oracle_1d(double a, double q, double D, int res) {
  double best = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= res; ++j) {
    const double d = D * static_cast<double>(j) / res;
    const double m = a * a * d + q;
    if (m - d < -1e-9) continue;
    best = std::min(best, std::max(1.0, m / d));
  }
  return 0.5 * std::log2(best);
}

double oracle_2d(const Eigen::Matrix2d& A, const Eigen::Matrix2d& Q, double D,
                 int res) {
  const double a11 = A(0, 0), a12 = A(0, 1), a21 = A(1, 0), a22 = A(1, 1);
  const double q11 = Q(0, 0), q12 = Q(0, 1), q22 = Q(1, 1);

  std::vector<double> cs(res), ss(res);
  for (int k = 0; k < res; ++k) {
    const double th = (M_PI / 2.0) * static_cast<double>(k) / res;
    cs[k] = std::cos(th);
    ss[k] = std::sin(th);
  }

  double best = std::numeric_limits<double>::infinity();
  for (int j1 = 1; j1 <= res; ++j1) {
    const double d1 = D * static_cast<double>(j1) / res;
    for (int j2 = 1; j2 <= res; ++j2) {
      const double d2 = D * static_cast<double>(j2) / res;
      if (d1 + d2 > D * (1.0 + 1e-15)) break;
      const double det_p = d1 * d2;
      for (int k = 0; k < res; ++k) {
        const double c = cs[k], s = ss[k];
        // pi_post = R(th) diag(d1,d2) R(th)^T
        const double p11 = c * c * d1 + s * s * d2;
        const double p22 = s * s * d1 + c * c * d2;
        const double p12 = c * s * (d1 - d2);
        // M = A pi_post A^T + Q
        const double t1 = a11 * p11 + a12 * p12;
        const double t2 = a11 * p12 + a12 * p22;
        const double u1 = a21 * p11 + a22 * p12;
        const double u2 = a21 * p12 + a22 * p22;
        const double m11 = t1 * a11 + t2 * a12 + q11;
        const double m12 = t1 * a21 + t2 * a22 + q12;
        const double m22 = u1 * a21 + u2 * a22 + q22;
        // feasibility: min eigenvalue of (M - pi_post) >= -1e-9
        const double r11 = m11 - p11, r12 = m12 - p12, r22 = m22 - p22;
        const double half_diff = 0.5 * (r11 - r22);
        const double disc = std::sqrt(half_diff * half_diff + r12 * r12);
        if (0.5 * (r11 + r22) - disc < -1e-9) continue;
        const double ratio = (m11 * m22 - m12 * m12) / det_p;
        best = std::min(best, std::max(1.0, ratio));
      }
    }
  }
  return 0.5 * std::log2(best);
}

}  // namespace

double grid_oracle_nrdf(const ValidatedModel& m, double D, int resolution) {
  if (D <= 0.0) throw NonPositiveInput("distortion budget must be positive");
  if (resolution < 2) throw NonPositiveInput("resolution must be >= 2");
  const Eigen::MatrixXd Q = m.model.B * m.model.B.transpose();
  if (m.p() == 1) return oracle_1d(m.model.A(0, 0), Q(0, 0), D, resolution);
  if (m.p() == 2) return oracle_2d(m.model.A, Q, D, resolution);
  throw DimensionTooLarge("grid oracle supports p <= 2 only");
}

}  // namespace zdrd
