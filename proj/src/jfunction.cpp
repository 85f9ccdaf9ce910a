#include "twistorb/orbital.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace twistorb {

namespace {

RMat hcat(const RMat& a, const RMat& b) {
  RMat out(a.rows() > 0 ? a.rows() : b.rows(), a.cols() + b.cols());
  if (a.cols()) out.leftCols(a.cols()) = a;
  if (b.cols()) out.rightCols(b.cols()) = b;
  return out;
}

double real_det_one_minus(const RMat& m, const RMat& basis) {
  if (basis.cols() == 0) return 1.0;
  const RMat r = basis.transpose() * m * basis;
  return (RMat::Identity(r.rows(), r.cols()) - r).determinant();
}

cplx a_hat_factor(cplx x) {
  // sqrt((x/2)/sinh(x/2)); the pole check guards x in 2 pi i Z \ {0}.
  const cplx h = 0.5 * x;
  if (std::abs(h) > 1e-3 && std::abs(std::sinh(h)) < 1e-12)
    throw std::runtime_error("a_hat: eigenvalue at a pole of (x/2)/sinh(x/2)");
  return std::sqrt(1.0 / linalg::sinhc(h));
}

const RMat& block_basis(const JEvaluator& je, Block b, RMat& storage) {
  switch (b) {
    case Block::KPerp:
      return je.cz.basis_k_perp0;
    case Block::PPerp:
      return je.cz.basis_p_perp0;
    case Block::ZPerp:
    default:
      storage = hcat(je.cz.basis_p_perp0, je.cz.basis_k_perp0);
      return storage;
  }
}

}  // namespace

cplx a_hat(const Mat& b) {
  if (b.rows() == 0) return 1.0;
  Eigen::ComplexEigenSolver<Mat> es(b, false);
  cplx prod = 1.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) prod *= a_hat_factor(es.eigenvalues()(i));
  return prod;
}

double a_hat(const RMat& b) {
  const cplx v = a_hat(Mat(b.cast<cplx>()));
  return v.real();
}

JEvaluator make_j_evaluator(const ReductiveAlgebra& alg, const SemisimpleData& sd, const CentralizerData& cz,
                            int branch_steps, double branch_eps) {
  if (branch_steps < 2) throw std::invalid_argument("make_j_evaluator: branch_steps must be >= 2");
  JEvaluator je;
  je.alg = alg;
  je.sd = sd;
  je.cz = cz;
  je.sigma_alg = sd.sigma.algebra_matrix;
  je.branch_steps = branch_steps;
  je.branch_eps = branch_eps;
  je.M = cz.M;
  if (cz.basis_z_perp0.cols() > 0) {
    const RMat g = linalg::expm(RMat(cz.ad_a)) * cz.M;
    const double d = real_det_one_minus(g, cz.basis_z_perp0);
    if (std::abs(d) < 1e-300) throw std::runtime_error("make_j_evaluator: singular det(1 - Ad(gamma sigma)) on z_perp0");
    je.z_perp0_factor = 1.0 / std::sqrt(std::abs(d));
  }
  je.det_k_perp = real_det_one_minus(cz.M, cz.basis_k_perp0);
  je.det_p_perp = real_det_one_minus(cz.M, cz.basis_p_perp0);
  if (cz.q == 3) {
    RMat br(alg.dim(), 3);
    for (int i = 0; i < 3; ++i) {
      const int a = (i + 1) % 3, b = (i + 2) % 3;
      br.col(i) = alg.bracket(cz.basis_k_sigma.col(a), cz.basis_k_sigma.col(b));
    }
    je.su2_type = linalg::orthonormal_span(br, 1e-8).cols() == 3;
  }
  return je;
}

JEvaluator make_j_evaluator(const ReductiveAlgebra& alg, const Automorphism& sigma, const TwistedElement& e) {
  const SemisimpleData sd = semisimple_decompose(alg, sigma, e);
  const CentralizerData cz = twisted_centralizer(alg, sd);
  return make_j_evaluator(alg, sd, cz);
}

BranchResult analytic_sqrt_bracket(const JEvaluator& je, const CVec& y, Block block) {
  RMat storage;
  const RMat& basis = block_basis(je, block, storage);
  BranchResult out;
  const int d = int(basis.cols());
  if (d == 0) {
    out.value = 1.0;
    out.min_abs = 1.0;
    return out;
  }
  if (y.size() != je.q()) throw std::invalid_argument("analytic_sqrt_bracket: Y has the wrong dimension");
  const Mat mres = linalg::restrict_to(Mat(je.M.cast<cplx>()), basis);
  const double det0 = (RMat::Identity(d, d) - basis.transpose() * je.M * basis).determinant();

  auto attempt = [&](const CVec& yy, BranchResult& res) -> bool {
    const Mat ad = linalg::restrict_to(adjoint_complex(je.alg, je.embed(yy)), basis);
    const bool real_y = yy.imag().norm() == 0.0;
    Mat vmat, tmv;
    Vec theta;
    if (real_y) {
      // i ad(Y) is Hermitian for real Y in k.
      Eigen::SelfAdjointEigenSolver<Mat> es(Mat(cplx(0.0, 1.0) * ad));
      vmat = es.eigenvectors();
      theta = es.eigenvalues();
      tmv = vmat.adjoint() * mres * vmat;
    }
    const Mat id = Mat::Identity(d, d);
    auto target = [&](double s) -> cplx {
      if (real_y) {
        // det(1 - V e^{-s theta} V^* M) = det(1 - e^{-s theta} V^* M V)
        Mat t = tmv;
        for (int i = 0; i < d; ++i) t.row(i) *= std::exp(-s * theta(i));
        return (id - t).determinant() * det0;
      }
      const Mat e = linalg::expm(Mat(cplx(0.0, -s) * ad));
      return (id - e * mres).determinant() * det0;
    };
    const double scale = std::max(1.0, std::abs(det0) * std::abs(det0));
    cplx w = det0;
    double min_abs = std::abs(det0);
    const int n = je.branch_steps;
    // Recursive tracking over [s0, s1] from the root w at s0.
    std::function<bool(double, double, cplx, cplx&, int)> step = [&](double s0, double s1, cplx w0, cplx& w1,
                                                                       int depth) -> bool {
      const cplx v = target(s1);
      min_abs = std::min(min_abs, std::abs(v));
      if (std::abs(v) < je.branch_eps * scale) return false;
      cplx r = std::sqrt(v);
      if (std::abs(r - w0) > std::abs(r + w0)) r = -r;
      const double jump = std::abs(std::arg(r / w0));
      if (jump > kPi / 2.0) {
        if (depth > 40) return false;
        const double sm = 0.5 * (s0 + s1);
        cplx wm;
        if (!step(s0, sm, w0, wm, depth + 1)) return false;
        return step(sm, s1, wm, w1, depth + 1);
      }
      w1 = r;
      return true;
    };
    for (int i = 1; i <= n; ++i) {
      cplx nw;
      if (!step(double(i - 1) / n, double(i) / n, w, nw, 0)) {
        res.min_abs = min_abs;
        return false;
      }
      w = nw;
    }
    res.value = w;
    res.min_abs = min_abs;
    return true;
  };

  if (attempt(y, out)) return out;
  // Deterministic jitter, then one retry.
  CVec yj = y;
  const double mag = 1e-6 * std::max(1.0, y.norm());
  for (int i = 0; i < yj.size(); ++i) yj(i) += mag * std::cos(1.0 + 2.0 * i);
  out.failures = 1;
  if (attempt(yj, out)) return out;
  out.ok = false;
  return out;
}

JValue j_function(const JEvaluator& je, const CVec& y) {
  if (y.size() != je.q()) throw std::invalid_argument("j_function: Y has the wrong dimension");
  JValue out;
  const CVec yg = je.embed(y);
  const Mat ad = adjoint_complex(je.alg, yg);
  const cplx ip(0.0, 1.0);
  const Mat adp = linalg::restrict_to(ad, je.cz.basis_p_sigma);
  const Mat adk = linalg::restrict_to(ad, je.cz.basis_k_sigma);
  const cplx ahat = a_hat(Mat(ip * adp)) / a_hat(Mat(ip * adk));
  const BranchResult rk = analytic_sqrt_bracket(je, y, Block::KPerp);
  const BranchResult rp = analytic_sqrt_bracket(je, y, Block::PPerp);
  out.branch_failures = rk.failures + rp.failures;
  if (!rk.ok || !rp.ok) {
    std::ostringstream os;
    os << "j_function: branch tracking failed at Y = " << y.transpose();
    throw std::runtime_error(os.str());
  }
  out.value = je.z_perp0_factor * ahat * rk.value / (rp.value * je.det_k_perp);
  return out;
}

}  // namespace twistorb
