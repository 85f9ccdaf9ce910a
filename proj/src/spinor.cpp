#include "orbital_detail.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace twistorb {

namespace {

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Traceless anti-Hermitian logarithm of a special unitary matrix, eigen-angles in (-pi, pi] shifted to sum zero.
Mat log_special_unitary(const Mat& u) {
  Eigen::ComplexEigenSolver<Mat> es(u);
  const int n = int(u.rows());
  std::vector<double> ang(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    ang[i] = std::arg(es.eigenvalues()(i));
    if (ang[i] <= -kPi + 1e-12) ang[i] = kPi;
    sum += ang[i];
  }
  int k = int(std::lround(sum / (2.0 * kPi)));
  while (k != 0) {
    int idx = 0;
    for (int i = 1; i < n; ++i)
      if ((k > 0 && ang[i] > ang[idx]) || (k < 0 && ang[i] < ang[idx])) idx = i;
    ang[idx] -= (k > 0 ? 2.0 : -2.0) * kPi;
    k += k > 0 ? -1 : 1;
  }
  // Unitary matrices are normal; orthonormalize eigenvectors within degenerate blocks.
  Eigen::HouseholderQR<Mat> qr(es.eigenvectors());
  Mat v = es.eigenvectors();
  if ((v.adjoint() * v - Mat::Identity(n, n)).norm() > 1e-8) v = qr.householderQ();
  Mat d = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = cplx(0.0, ang[i]);
  return v * d * v.adjoint();
}

/// Logarithm in k of an element of K given in the defining representation.
Vec log_in_k(const ReductiveAlgebra& alg, const Mat& k) {
  Mat z;
  if (alg.real_group) {
    z = log_rotation(k.real()).cast<cplx>();
  } else {
    z = log_special_unitary(k);
  }
  Vec c = alg.coords(z);
  c.head(alg.dim_p).setZero();
  return c;
}

RMat p_block(const ReductiveAlgebra& alg, const RMat& m) { return m.topLeftCorner(alg.dim_p, alg.dim_p); }

void require_spinors(const JEvaluator& je) {
  const int m = je.alg.dim_p;
  if (m % 2) throw std::invalid_argument("spinors on p need dim p even (dim p = " + std::to_string(m) + ")");
  if (p_block(je.alg, je.sigma_alg).determinant() < 0.0)
    throw std::invalid_argument("sigma reverses the orientation of p");
}

}  // namespace

namespace detail {

/// Lift in a frame F (orthogonal columns in p-coordinates): matrices A on p act as F^T A F.
Mat spin_lift_in_frame(const JEvaluator& je, const CliffordModel& cl, const RMat& frame) {
  const ReductiveAlgebra& alg = je.alg;
  const Vec zk = log_in_k(alg, je.sd.k.inverse());
  const RMat adk = frame.transpose() * p_block(alg, adjoint(alg, zk)) * frame;
  const RMat zs = frame.transpose() * log_rotation(p_block(alg, je.sigma_alg)) * frame;
  const Mat lk = linalg::expm(cl.spin_algebra(adk.cast<cplx>()));
  const Mat ls = linalg::expm(cl.spin_algebra(zs.cast<cplx>()));
  return lk * ls;
}

void require_spinor_case(const JEvaluator& je) { require_spinors(je); }

}  // namespace detail

CliffordModel clifford_model(int m) {
  if (m < 0 || m % 2 || m > 6) throw std::invalid_argument("clifford_model: m must be even and at most 6");
  CliffordModel cl;
  cl.m = m;
  const int k = m / 2;
  Mat X(2, 2), Y(2, 2), Z(2, 2), I2 = Mat::Identity(2, 2);
  X << 0, 1, 1, 0;
  Y << 0, cplx(0, -1), cplx(0, 1), 0;
  Z << 1, 0, 0, -1;
  const int dim = 1 << k;
  for (int j = 0; j < k; ++j) {
    for (const Mat* pauli : {&X, &Y}) {
      Mat g = Mat::Identity(1, 1);
      for (int l = 0; l < k; ++l) g = kron(g, l < j ? Z : (l == j ? *pauli : I2));
      cl.c.push_back(cplx(0.0, 1.0) * g);
    }
  }
  Mat tau = Mat::Identity(dim, dim);
  for (const Mat& c : cl.c) tau = tau * c;
  cplx ph = 1.0;
  for (int j = 0; j < k; ++j) ph *= cplx(0.0, 1.0);
  cl.tau = ph * tau;
  return cl;
}

Mat CliffordModel::spin_algebra(const Mat& a) const {
  const int dim = c.empty() ? 1 : int(c[0].rows());
  Mat out = Mat::Zero(dim, dim);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (a(j, i) != cplx(0.0)) out += 0.25 * a(j, i) * c[i] * c[j];
  return out;
}

Mat CliffordModel::clifford(const CVec& v) const {
  const int dim = c.empty() ? 1 : int(c[0].rows());
  Mat out = Mat::Zero(dim, dim);
  for (int i = 0; i < m; ++i) out += v(i) * c[i];
  return out;
}

RMat log_rotation(const RMat& o) {
  const int n = int(o.rows());
  if (n == 0) return o;
  if ((o.transpose() * o - RMat::Identity(n, n)).norm() > 1e-8)
    throw std::invalid_argument("log_rotation: matrix is not orthogonal");
  if (o.determinant() < 0.0) throw std::invalid_argument("log_rotation: determinant is -1");
  Eigen::RealSchur<RMat> rs(o);
  const RMat& t = rs.matrixT();
  const RMat& u = rs.matrixU();
  RMat z = RMat::Zero(n, n);
  std::vector<int> minus;
  for (int i = 0; i < n;) {
    if (i + 1 < n && std::abs(t(i + 1, i)) > 1e-12) {
      const double th = std::atan2(0.5 * (t(i + 1, i) - t(i, i + 1)), 0.5 * (t(i, i) + t(i + 1, i + 1)));
      z(i + 1, i) = th;
      z(i, i + 1) = -th;
      i += 2;
    } else {
      if (t(i, i) < 0.0) minus.push_back(i);
      i += 1;
    }
  }
  if (minus.size() % 2) throw std::runtime_error("log_rotation: unpaired -1 eigenvalue");
  for (std::size_t j = 0; j + 1 < minus.size(); j += 2) {
    z(minus[j + 1], minus[j]) = kPi;
    z(minus[j], minus[j + 1]) = -kPi;
  }
  RMat out = u * z * u.transpose();
  return 0.5 * (out - out.transpose());
}

Mat spin_lift(const JEvaluator& je, const CliffordModel& cl) {
  require_spinors(je);
  return detail::spin_lift_in_frame(je, cl, RMat::Identity(je.alg.dim_p, je.alg.dim_p));
}

cplx spinor_supertrace(const JEvaluator& je, const CliffordModel& cl, const Mat& lift, const CVec& y) {
  const int m = je.alg.dim_p;
  const Mat ad = adjoint_complex(je.alg, je.embed(y)).topLeftCorner(m, m);
  const Mat x = lift * linalg::expm(Mat(cplx(0.0, -1.0) * cl.spin_algebra(ad)));
  return (cl.tau * x).trace();
}

SupertraceResult dirac_orbital_supertrace(const JEvaluator& je, const Irrep& E, double t, const KQuadSpec& quad) {
  require_spinors(je);
  if (!(t > 0.0)) throw std::invalid_argument("dirac_orbital_supertrace: t must be positive");
  const CliffordModel cl = clifford_model(je.alg.dim_p);
  const Mat lift = spin_lift(je, cl);
  const CasimirConstants cc = casimir_constants(je.alg);
  detail::OrbitalIntegrand in;
  in.irrep = &E;
  // exp(-t A) with A = -(1/48) Tr[C^{k,k}] - C^{k,E}/2; the scalar part goes to the prefactor.
  const Mat ck = casimir_k(je.alg, E.rho_basis);
  in.P = detail::twisted_action(je, E) * linalg::expm(Mat(0.5 * t * ck));
  in.extra = [&je, &cl, &lift](const CVec& y) { return spinor_supertrace(je, cl, lift, y); };
  if (je.q() > 0) in.extra_growth = detail::j_growth(je, Vec::Unit(je.q(), 0));
  const double logpre = detail::log_gaussian_prefactor(je, t) + t / 48.0 * cc.tr_k_Ckk;
  const OrbitalResult r = detail::integrate_orbital(je, t, quad, in, logpre);
  SupertraceResult out;
  out.value = r.value.real();
  out.imag = r.value.imag();
  out.quad_error = r.quad_error;
  out.branch_failures = r.branch_failures;
  // (-1)^{m/2} Tr_s^2 = det(1 - M e^{-i ad Y})|_p on sample points
  const int m = je.alg.dim_p;
  const double sgn = (m / 2) % 2 ? -1.0 : 1.0;
  const RMat mp = je.M.topLeftCorner(m, m);
  for (int s = 0; s <= 3 && je.q() > 0; ++s) {
    CVec y = CVec::Zero(je.q());
    for (int i = 0; i < je.q(); ++i) y(i) = 0.37 * (s + 1) * std::cos(1.3 * i + s);
    const cplx ts = spinor_supertrace(je, cl, lift, y);
    const Mat ad = adjoint_complex(je.alg, je.embed(y)).topLeftCorner(m, m);
    const cplx det = (Mat::Identity(m, m) - mp.cast<cplx>() * linalg::expm(Mat(cplx(0.0, -1.0) * ad))).determinant();
    out.square_identity_residual =
        std::max(out.square_identity_residual, std::abs(sgn * ts * ts - det) / std::max(1.0, std::abs(det)));
  }
  return out;
}

cplx exterior_supertrace(const JEvaluator& je, const CVec& y, bool weighted) {
  const int m = je.alg.dim_p;
  const Mat a = cplx(0.0, 1.0) * adjoint_complex(je.alg, je.embed(y)).topLeftCorner(m, m);
  const Mat minv = je.M.topLeftCorner(m, m).transpose().cast<cplx>();
  // i ad Y commutes with M, so g = e^{i ad Y} M^T is block diagonal over the eigenspaces of i ad Y.
  // Working blockwise keeps 1 - mu accurate when e^{i ad Y} has large and small eigenvalues.
  Mat v;
  CVec lam;
  if (y.imag().norm() == 0.0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
    v = es.eigenvectors();
    lam = es.eigenvalues().cast<cplx>();
  } else {
    Eigen::ComplexEigenSolver<Mat> es(a);
    v = es.eigenvectors();
    lam = es.eigenvalues();
  }
  const Mat b = v.fullPivLu().solve(minv * v);
  std::vector<int> cluster(m, -1);
  int nc = 0;
  for (int i = 0; i < m; ++i) {
    if (cluster[i] >= 0) continue;
    cluster[i] = nc;
    for (int j = i + 1; j < m; ++j)
      if (cluster[j] < 0 && std::abs(lam(i) - lam(j)) < 1e-8 * (1.0 + std::abs(lam(i)))) cluster[j] = nc;
    ++nc;
  }
  std::vector<cplx> mu;
  for (int c = 0; c < nc; ++c) {
    std::vector<int> idx;
    for (int i = 0; i < m; ++i)
      if (cluster[i] == c) idx.push_back(i);
    Mat bc(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) bc(i, j) = b(idx[i], idx[j]);
    Eigen::ComplexEigenSolver<Mat> es(bc, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mu.push_back(std::exp(lam(idx[0])) * es.eigenvalues()(i));
  }
  cplx d1 = 1.0;
  for (const cplx& x : mu) d1 *= 1.0 - x;
  if (!weighted) return d1;
  // D(s) = det(1 - s g); Tr_s[(N - m/2) g] = D'(1) - (m/2) D(1).
  cplx dp = 0.0;
  for (int i = 0; i < m; ++i) {
    cplx prod = -mu[i];
    for (int j = 0; j < m; ++j)
      if (j != i) prod *= 1.0 - mu[j];
    dp += prod;
  }
  return dp - 0.5 * m * d1;
}

SupertraceResult derham_orbital_supertrace(const JEvaluator& je, const Irrep& E, double t, bool weighted,
                                           const KQuadSpec& quad) {
  if (!E.g_rep) throw std::invalid_argument("derham_orbital_supertrace: E must be a representation of G");
  if (!(t > 0.0)) throw std::invalid_argument("derham_orbital_supertrace: t must be positive");
  const CasimirConstants cc = casimir_constants(je.alg);
  detail::OrbitalIntegrand in;
  in.irrep = &E;
  in.P = detail::twisted_action(je, E);
  in.extra = [&je, weighted](const CVec& y) { return exterior_supertrace(je, y, weighted); };
  if (je.q() > 0) in.extra_growth = 2.0 * detail::j_growth(je, Vec::Unit(je.q(), 0));
  const double logpre = detail::log_gaussian_prefactor(je, t) + t / 48.0 * cc.tr_k_Ckk + t / 16.0 * cc.tr_p_Ckp +
                        0.5 * t * E.casimir_g;
  const OrbitalResult r = detail::integrate_orbital(je, t, quad, in, logpre);
  SupertraceResult out;
  out.value = r.value.real();
  out.imag = r.value.imag();
  out.quad_error = r.quad_error;
  out.branch_failures = r.branch_failures;
  return out;
}

}  // namespace twistorb
