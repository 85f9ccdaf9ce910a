#include "twistorb/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace twistorb::linalg {

namespace {

bool is_normal(const Mat& a) {
  const double n = a.norm();
  if (n == 0.0) return true;
  return (a * a.adjoint() - a.adjoint() * a).norm() <= 1e-13 * n * n;
}

}  // namespace

Mat expm(const Mat& a) {
  if (a.size() == 0) return a;
  if (is_normal(a)) {
    Eigen::ComplexSchur<Mat> schur(a);
    const Mat& u = schur.matrixU();
    CVec d = schur.matrixT().diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::exp(d(i));
    return u * d.asDiagonal() * u.adjoint();
  }
  return a.exp();
}

RMat expm(const RMat& a) {
  if (a.size() == 0) return a;
  return a.exp();
}

Mat logm(const Mat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("logm: matrix is not square");
  if (a.size() == 0) return a;
  Eigen::ComplexEigenSolver<Mat> es(a, false);
  const double scale = std::max(1.0, a.norm());
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx l = es.eigenvalues()(i);
    if (std::abs(l.imag()) <= 1e-14 * scale && l.real() <= 0.0)
      throw std::runtime_error("logm: spectrum meets the closed negative real axis");
  }
  if (is_normal(a)) {
    Eigen::ComplexSchur<Mat> schur(a);
    const Mat& u = schur.matrixU();
    CVec d = schur.matrixT().diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::log(d(i));
    return u * d.asDiagonal() * u.adjoint();
  }
  return a.log();
}

Mat hermitian_fn(const Mat& h, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  Vec d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(d(i));
  return es.eigenvectors() * d.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

RMat symmetric_fn(const RMat& s, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (s + s.transpose()));
  Vec d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = f(d(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

NullSpace null_space(const RMat& a, double rel_tol) {
  NullSpace out;
  const Eigen::Index n = a.cols();
  if (n == 0) {
    out.basis = RMat(0, 0);
    return out;
  }
  if (a.rows() == 0) {
    out.basis = RMat::Identity(n, n);
    out.gap = std::numeric_limits<double>::infinity();
    return out;
  }
  Eigen::JacobiSVD<RMat> svd(a, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  out.smax = s.size() ? s(0) : 0.0;
  // The floor treats systems whose entries are all roundoff as exactly zero.
  const double thr = rel_tol * std::max(out.smax, 1.0);
  int rank = 0;
  double nearest = std::numeric_limits<double>::infinity();
  double smallest_kept = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thr) {
      ++rank;
      smallest_kept = std::min(smallest_kept, s(i));
    }
    if (s(i) > 0.0) nearest = std::min(nearest, std::abs(std::log10(s(i) / thr)));
  }
  out.gap = smallest_kept / thr;
  out.nearest = nearest;
  out.basis = svd.matrixV().rightCols(n - rank);
  return out;
}

RMat orthonormal_span(const RMat& cols, double tol) {
  if (cols.cols() == 0) return RMat(cols.rows(), 0);
  Eigen::JacobiSVD<RMat> svd(cols, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  int rank = 0;
  const double smax = s.size() ? s(0) : 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (smax > 0 && s(i) > tol * std::max(1.0, smax)) ++rank;
  return svd.matrixU().leftCols(rank);
}

RMat orth_complement(const RMat& ambient, const RMat& sub, double tol) {
  if (ambient.cols() == 0) return ambient;
  RMat proj = ambient - sub * (sub.transpose() * ambient);
  return orthonormal_span(proj, tol);
}

Mat restrict_to(const Mat& m, const RMat& basis) {
  const Mat b = basis.cast<cplx>();
  return b.adjoint() * m * b;
}

Quadrature gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: order must be positive");
  RMat jac = RMat::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<RMat> es(jac);
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double p0 = std::pow(kPi, -0.25);
  // Orthonormal recurrence with rescaling; outer nodes of large rules overflow otherwise.
  // Returns p_n and p_{n-1} up to a common factor, and sum p_k^2 in units of that factor squared.
  auto recur = [&](double x, double& p, double& pm, double& s, double& log_scale) {
    pm = 0.0;
    p = p0;
    s = 0.0;
    log_scale = 0.0;
    for (int k = 0; k < n; ++k) {
      s += p * p;
      const double pn = x * std::sqrt(2.0 / (k + 1)) * p - std::sqrt(double(k) / (k + 1)) * pm;
      pm = p;
      p = pn;
      if (std::abs(p) > 1e100) {
        p *= 1e-100;
        pm *= 1e-100;
        s *= 1e-200;
        log_scale += 100.0 * std::log(10.0);
      }
    }
  };
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    double p = 0.0, pm = 0.0, s = 0.0, ls = 0.0;
    for (int it = 0; it < 6; ++it) {
      recur(x, p, pm, s, ls);
      const double dp = std::sqrt(2.0 * n) * pm;
      const double dx = p / dp;
      if (!std::isfinite(dx)) break;
      x -= dx;
      if (std::abs(dx) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    recur(x, p, pm, s, ls);
    q.nodes[i] = x;
    q.weights[i] = std::exp(-2.0 * ls) / s;
  }
  return q;
}

Quadrature gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be positive");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    q.nodes[n - 1 - i] = x;
    q.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

int thread_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("TWISTORB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) hw = std::min(hw, cap);
  }
  return hw;
}

cplx sinhc(cplx x) {
  if (std::abs(x) < 1e-4) {
    const cplx x2 = x * x;
    return 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sinh(x) / x;
}

cplx sinc_sqrt(cplx w) {
  if (std::abs(w) < 1e-6) return 1.0 - w / 6.0 + w * w / 120.0;
  const cplx s = std::sqrt(w);
  return std::sin(s) / s;
}

}  // namespace twistorb::linalg
