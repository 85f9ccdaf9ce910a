#include "twistorb/exterior.hpp"
#include "orbital_detail.hpp"

#include <cmath>
#include <stdexcept>

namespace twistorb {

namespace {

/// Frame [p_sigma | p_perp] of p in p-coordinates, made oriented by flipping a p_perp column when possible.
RMat adapted_frame(const JEvaluator& je, int& orientation_sign) {
  const int m = je.alg.dim_p;
  const int ps = int(je.cz.basis_p_sigma.cols());
  const int pr = int(je.cz.basis_p_perp.cols());
  if (ps + pr != m) throw std::runtime_error("adapted_frame: p_sigma and p_perp do not span p");
  RMat f(m, m);
  if (ps) f.leftCols(ps) = je.cz.basis_p_sigma.topRows(m);
  if (pr) f.rightCols(pr) = je.cz.basis_p_perp.topRows(m);
  orientation_sign = 1;
  if (f.determinant() < 0.0) {
    if (pr) {
      f.col(m - 1) *= -1.0;
    } else {
      f.col(ps - 1) *= -1.0;
      orientation_sign = -1;
    }
  }
  return f;
}

}  // namespace

IndexDensity elliptic_index_density(const JEvaluator& je, const Irrep& E) {
  if (!je.sd.elliptic()) throw std::invalid_argument("elliptic_index_density: gamma sigma is not elliptic");
  IndexDensity out;
  const int ps = je.p();
  if (ps % 2) {
    out.method = "odd-dimensional fixed set";
    return out;
  }
  detail::require_spinor_case(je);
  if (ps > 2) throw std::invalid_argument("elliptic_index_density: dim p_sigma(gamma) > 2 is not supported");
  const int m = je.alg.dim_p;
  const int r = m - ps;
  const RMat frame = adapted_frame(je, out.orientation_sign);
  const CliffordModel cl = clifford_model(m);
  const Mat lift = detail::spin_lift_in_frame(je, cl, frame);
  // tau on S(p_perp): i^{r/2} c_{ps} ... c_{m-1}; the Jordan-Wigner strings cancel in even products.
  const int sdim = int(lift.rows());
  Mat tau_perp = Mat::Identity(sdim, sdim);
  for (int i = ps; i < m; ++i) tau_perp = tau_perp * cl.c[i];
  cplx ph = 1.0;
  for (int j = 0; j < r / 2; ++j) ph *= cplx(0.0, 1.0);
  tau_perp *= ph;
  const double sgn = (r / 2) % 2 ? -1.0 : 1.0;
  const Mat P = detail::twisted_action(je, E);
  auto F = [&](const CVec& y) -> cplx {
    const CVec yg = je.embed(y);
    const Mat ad = adjoint_complex(je.alg, yg);
    const Mat adp = linalg::restrict_to(ad, je.cz.basis_p_sigma);
    const cplx ahat = a_hat(Mat(cplx(0.0, 1.0) * adp));
    const Mat adf = frame.transpose().cast<cplx>() * ad.topLeftCorner(m, m) * frame.cast<cplx>();
    Mat perp = Mat::Zero(m, m);
    if (r) perp.bottomRightCorner(r, r) = adf.bottomRightCorner(r, r);
    const Mat x = lift * linalg::expm(Mat(cplx(0.0, -1.0) * cl.spin_algebra(perp)));
    const cplx tperp = (tau_perp * x).trace() / double(1 << (ps / 2));
    const cplx chi = (P * linalg::expm(Mat(cplx(0.0, -1.0) * E.rho_algebra(yg)))).trace();
    return ahat * sgn / tperp * chi;
  };
  if (ps == 0) {
    const cplx v = F(CVec::Zero(je.q()));
    out.value = v.real();
    out.imag = v.imag();
    out.method = "isolated fixed point";
    return out;
  }
  // Y = -Omega/2 pi = e^1 e^2 [f_1, f_2] / 2 pi on the oriented p_sigma frame; top coefficient = dF(0)[eta].
  const Vec f1 = je.cz.basis_p_sigma.col(0);
  Vec f2 = je.cz.basis_p_sigma.col(1);
  if (out.orientation_sign < 0) f2 = -f2;
  const Vec br = je.alg.bracket(f1, f2);
  const Vec eta = je.cz.basis_k_sigma.transpose() * br / (2.0 * kPi);
  // Cauchy integral on a small circle for the directional derivative.
  const int n = 16;
  const double rad = 1e-2 / std::max(1.0, eta.norm());
  cplx d = 0.0;
  for (int k = 0; k < n; ++k) {
    const cplx z = std::polar(rad, 2.0 * kPi * k / n);
    d += F(CVec(z * eta.cast<cplx>())) / z;
  }
  d /= double(n);
  out.value = d.real();
  out.imag = d.imag();
  out.method = "exterior degree 2";
  return out;
}

double euler_max(const JEvaluator& je) {
  const int ps = je.p();
  if (ps % 2) return 0.0;
  if (ps == 0) return 1.0;
  const RMat& f = je.cz.basis_p_sigma;
  // R_{ij} = <f_i, ad(Omega) f_j>, Omega = -sum_{a<b} e^a e^b [f_a, f_b]
  std::vector<std::vector<ExteriorElement>> R(ps, std::vector<ExteriorElement>(ps, ExteriorElement(ps)));
  for (int a = 0; a < ps; ++a)
    for (int b = a + 1; b < ps; ++b) {
      const Vec om = je.alg.bracket(f.col(a), f.col(b));
      const ExteriorElement eab = ExteriorElement::generator(ps, a) * ExteriorElement::generator(ps, b);
      for (int i = 0; i < ps; ++i)
        for (int j = 0; j < ps; ++j) {
          const double c = f.col(i).dot(je.alg.bracket(om, f.col(j)));
          R[i][j] += eab * cplx(-c / (2.0 * kPi));
        }
    }
  return pfaffian(R).top().real();
}

}  // namespace twistorb
