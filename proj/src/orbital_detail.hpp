#pragma once

#include "twistorb/orbital.hpp"

#include <atomic>
#include <memory>

namespace twistorb::detail {

/// Tr[P exp(-i r rho(dir))] = sum_j c_j exp(r lambda_j) for a unit k-direction.
struct DirectionalTrace {
  std::vector<cplx> c;
  std::vector<double> lambda;
  double growth = 0.0;
  cplx eval(double r, double shift) const {
    cplx s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) s += c[j] * std::exp(r * lambda[j] - shift);
    return s;
  }
};

inline DirectionalTrace directional_trace(const Irrep& e, const Mat& p, const Vec& dir_g) {
  DirectionalTrace dt;
  const Mat h = cplx(0.0, -1.0) * e.rho_algebra(dir_g);
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (h + h.adjoint())));
  const Mat v = es.eigenvectors();
  const Mat pv = v.adjoint() * p * v;
  for (int j = 0; j < e.dim; ++j) {
    dt.c.push_back(pv(j, j));
    dt.lambda.push_back(es.eigenvalues()(j));
    dt.growth = std::max(dt.growth, std::abs(es.eigenvalues()(j)));
  }
  return dt;
}

/// Exponential growth rate of J (and of the spinor factors) along a unit direction of k_sigma(gamma).
inline double j_growth(const JEvaluator& je, const Vec& dir) {
  const RMat ad = adjoint(je.alg, je.embed(dir));
  const int m = je.alg.dim_p, n = je.alg.dim();
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(cplx(0.0, 1.0) * ad.bottomRightCorner(n - m, n - m).cast<cplx>()));
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) s += std::abs(es.eigenvalues()(i));
  Eigen::SelfAdjointEigenSolver<Mat> ep(Mat(cplx(0.0, 1.0) * ad.topLeftCorner(m, m).cast<cplx>()));
  for (int i = 0; i < ep.eigenvalues().size(); ++i) s += std::abs(ep.eigenvalues()(i));
  return 0.25 * s;
}

/// rho(k^{-1}) rho(sigma^j) of the normal form.
inline Mat twisted_action(const JEvaluator& je, const Irrep& e) {
  return e.rho_group(je.sd.k.inverse()) * e.rho_power_sigma(je.sd.sigma_power);
}

/// log of e^{-|a|^2/2t} (2 pi t)^{-p/2}.
inline double log_gaussian_prefactor(const JEvaluator& je, double t) {
  return -je.sd.a.squaredNorm() / (2.0 * t) - 0.5 * je.p() * std::log(2.0 * kPi * t);
}

}  // namespace twistorb::detail

namespace twistorb::detail {

/// Int_{k_sigma} J(Y) extra(Y) Tr^E[P e^{-i rho(Y)}] e^{-|Y|^2/2t} dY/(2 pi t)^{q/2}, times exp(log_prefactor).
struct OrbitalIntegrand {
  const Irrep* irrep = nullptr;
  Mat P;
  std::function<cplx(const CVec&)> extra;  ///< empty means 1
  double extra_growth = 0.0;
};
OrbitalResult integrate_orbital(const JEvaluator& je, double t, const KQuadSpec& quad, const OrbitalIntegrand& in,
                                double log_prefactor);

}  // namespace twistorb::detail

namespace twistorb::detail {

/// Spin lift of Ad(k^{-1}) sigma|_p in an oriented orthonormal frame of p (columns in p-coordinates).
Mat spin_lift_in_frame(const JEvaluator& je, const CliffordModel& cl, const RMat& frame);
/// Throws unless dim p is even and sigma preserves the orientation of p.
void require_spinor_case(const JEvaluator& je);

}  // namespace twistorb::detail
