#include "twistorb/liecore.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace twistorb {

namespace {

Mat unit(int n, int i, int j) {
  Mat m = Mat::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

void normalize_basis(std::vector<Mat>& b, double s) {
  for (auto& m : b) m /= std::sqrt(s) * m.norm();
}

}  // namespace

Vec ReductiveAlgebra::coords(const Mat& x) const {
  Vec c(dim());
  for (int i = 0; i < dim(); ++i) c(i) = B_scale * (x * basis[i].adjoint()).trace().real();
  return c;
}

Mat ReductiveAlgebra::to_matrix(const Vec& x) const {
  Mat m = Mat::Zero(matrix_size, matrix_size);
  for (int i = 0; i < dim(); ++i) m += x(i) * basis[i];
  return m;
}

Mat ReductiveAlgebra::to_matrix(const CVec& x) const {
  Mat m = Mat::Zero(matrix_size, matrix_size);
  for (int i = 0; i < dim(); ++i) m += x(i) * basis[i];
  return m;
}

Vec ReductiveAlgebra::bracket(const Vec& x, const Vec& y) const {
  return adjoint(*this, x) * y;
}

double ReductiveAlgebra::algebra_residual(const Mat& x) const {
  return (x - to_matrix(coords(x))).norm() / std::max(1.0, x.norm());
}

double ReductiveAlgebra::group_residual(const Mat& g) const {
  if (g.rows() != matrix_size || g.cols() != matrix_size) return 1e300;
  double r = std::abs(g.determinant() - 1.0);
  if (real_group) r = std::max(r, g.imag().cwiseAbs().maxCoeff());
  return r;
}

double ReductiveAlgebra::compact_residual(const Mat& k) const {
  if (k.rows() != matrix_size || k.cols() != matrix_size) return 1e300;
  return std::max(group_residual(k), (k * k.adjoint() - Mat::Identity(matrix_size, matrix_size)).norm());
}

ReductiveAlgebra build_catalog(const std::string& name, double B_scale) {
  if (!(B_scale > 0.0)) throw std::invalid_argument("build_catalog: B_scale must be positive");
  ReductiveAlgebra alg;
  alg.name = name;
  alg.B_scale = B_scale;
  std::vector<Mat> p, k;
  const cplx I(0.0, 1.0);
  if (name == "sl2r") {
    alg.matrix_size = 2;
    p = {unit(2, 0, 0) - unit(2, 1, 1), unit(2, 0, 1) + unit(2, 1, 0)};
    k = {unit(2, 0, 1) - unit(2, 1, 0)};
  } else if (name == "sl2c_real") {
    alg.matrix_size = 2;
    alg.real_group = false;
    const Mat s1 = unit(2, 0, 1) + unit(2, 1, 0);
    const Mat s2 = -I * unit(2, 0, 1) + I * unit(2, 1, 0);
    const Mat s3 = unit(2, 0, 0) - unit(2, 1, 1);
    p = {s1, s2, s3};
    k = {I * s1, I * s2, I * s3};
  } else if (name == "sl3r") {
    alg.matrix_size = 3;
    p = {unit(3, 0, 0) - unit(3, 1, 1), unit(3, 0, 0) + unit(3, 1, 1) - 2.0 * unit(3, 2, 2),
         unit(3, 0, 1) + unit(3, 1, 0), unit(3, 0, 2) + unit(3, 2, 0), unit(3, 1, 2) + unit(3, 2, 1)};
    k = {unit(3, 0, 1) - unit(3, 1, 0), unit(3, 0, 2) - unit(3, 2, 0), unit(3, 1, 2) - unit(3, 2, 1)};
  } else {
    throw std::invalid_argument("build_catalog: unknown group '" + name + "'");
  }
  normalize_basis(p, B_scale);
  normalize_basis(k, B_scale);
  alg.dim_p = static_cast<int>(p.size());
  alg.dim_k = static_cast<int>(k.size());
  alg.basis = p;
  alg.basis.insert(alg.basis.end(), k.begin(), k.end());
  const int n = alg.dim();
  alg.ad_table.assign(n, RMat::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Mat br = alg.basis[i] * alg.basis[j] - alg.basis[j] * alg.basis[i];
      alg.ad_table[i].col(j) = alg.coords(br);
    }
  alg.B_matrix.resize(n, n);
  alg.theta.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) alg.B_matrix(i, j) = B_scale * (alg.basis[i] * alg.basis[j]).trace().real();
    alg.theta.col(i) = alg.coords(-alg.basis[i].adjoint());
  }
  return alg;
}

RMat adjoint(const ReductiveAlgebra& alg, const Vec& y) {
  const int n = alg.dim();
  RMat a = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    if (y(i) != 0.0) a += y(i) * alg.ad_table[i];
  return a;
}

Mat adjoint_complex(const ReductiveAlgebra& alg, const CVec& y) {
  const int n = alg.dim();
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    if (y(i) != 0.0) a += y(i) * alg.ad_table[i].cast<cplx>();
  return a;
}

RMat Ad(const ReductiveAlgebra& alg, const Mat& g) {
  const int n = alg.dim();
  const Mat gi = g.inverse();
  RMat out(n, n);
  for (int j = 0; j < n; ++j) out.col(j) = alg.coords(g * alg.basis[j] * gi);
  return out;
}

CasimirConstants casimir_constants(const ReductiveAlgebra& alg) {
  CasimirConstants c;
  const int m = alg.dim_p;
  for (int i = m; i < alg.dim(); ++i) {
    const RMat a2 = alg.ad_table[i] * alg.ad_table[i];
    c.tr_p_Ckp += a2.topLeftCorner(m, m).trace();
    c.tr_k_Ckk += a2.bottomRightCorner(alg.dim_k, alg.dim_k).trace();
  }
  c.Bstar_kappa = 0.5 * c.tr_p_Ckp + c.tr_k_Ckk / 6.0;
  return c;
}

Mat casimir_k(const ReductiveAlgebra& alg, const std::vector<Mat>& rho) {
  const Eigen::Index d = rho.at(0).rows();
  Mat c = Mat::Zero(d, d);
  for (int i = alg.dim_p; i < alg.dim(); ++i) c += rho[i] * rho[i];
  return c;
}

Mat casimir_g(const ReductiveAlgebra& alg, const std::vector<Mat>& rho) {
  const Eigen::Index d = rho.at(0).rows();
  Mat c = Mat::Zero(d, d);
  for (int i = 0; i < alg.dim(); ++i) c += (i < alg.dim_p ? -1.0 : 1.0) * rho[i] * rho[i];
  return c;
}

CartanFactors global_cartan(const ReductiveAlgebra& alg, const Mat& g) {
  const Mat pos = g * g.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (pos + pos.adjoint()));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::runtime_error("global_cartan: polar factor has non-positive spectrum");
  const Mat amat = linalg::hermitian_fn(pos, [](double x) { return 0.5 * std::log(x); });
  CartanFactors out;
  out.a = alg.coords(amat);
  out.a.tail(alg.dim_k).setZero();
  const Mat ainv = linalg::hermitian_fn(pos, [](double x) { return 1.0 / std::sqrt(x); });
  out.k = ainv * g;
  return out;
}

double ResidualReport::max_residual() const {
  return std::max({theta_involution, theta_B, theta_automorphism, B_invariance, jacobi, antisymmetry, splitting,
                   orthonormality});
}

ResidualReport verify_algebra(const ReductiveAlgebra& alg) {
  ResidualReport r;
  const int n = alg.dim(), m = alg.dim_p;
  const RMat id = RMat::Identity(n, n);
  r.theta_involution = (alg.theta * alg.theta - id).cwiseAbs().maxCoeff();
  r.theta_B = (alg.theta.transpose() * alg.B_matrix * alg.theta - alg.B_matrix).cwiseAbs().maxCoeff();
  r.orthonormality = (-alg.B_matrix * alg.theta - id).cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    RMat ad_theta = RMat::Zero(n, n);
    for (int a = 0; a < n; ++a) ad_theta += alg.theta(a, i) * alg.ad_table[a];
    r.theta_automorphism =
        std::max(r.theta_automorphism, (alg.theta * alg.ad_table[i] - ad_theta * alg.theta).cwiseAbs().maxCoeff());
    const RMat& ad = alg.ad_table[i];
    r.B_invariance = std::max(r.B_invariance, (ad.transpose() * alg.B_matrix + alg.B_matrix * ad).cwiseAbs().maxCoeff());
    for (int j = 0; j < n; ++j) {
      r.antisymmetry = std::max(r.antisymmetry, (ad.col(j) + alg.ad_table[j].col(i)).cwiseAbs().maxCoeff());
      RMat adbr = RMat::Zero(n, n);
      for (int k = 0; k < n; ++k) adbr += ad(k, j) * alg.ad_table[k];
      const RMat comm = ad * alg.ad_table[j] - alg.ad_table[j] * ad;
      r.jacobi = std::max(r.jacobi, (adbr - comm).cwiseAbs().maxCoeff());
      const bool ip = i < m, jp = j < m;
      // [k,p] and [p,k] land in p; [k,k] and [p,p] land in k
      const bool target_p = ip != jp;
      for (int k = 0; k < n; ++k) {
        const bool kp = k < m;
        if (kp != target_p) r.splitting = std::max(r.splitting, std::abs(ad(k, j)));
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<RMat> ep(alg.B_matrix.topLeftCorner(m, m));
  Eigen::SelfAdjointEigenSolver<RMat> ek(-alg.B_matrix.bottomRightCorner(alg.dim_k, alg.dim_k));
  r.B_signature_margin = std::min(ep.eigenvalues().minCoeff(), ek.eigenvalues().minCoeff());
  return r;
}

Mat Automorphism::apply(const Mat& g) const {
  Mat x = g;
  for (const auto& s : steps) {
    switch (s.kind) {
      case SigmaStep::Kind::Conj: x = s.m * x * s.m_inv; break;
      case SigmaStep::Kind::Theta: x = x.adjoint().inverse(); break;
      case SigmaStep::Kind::ComplexConj: x = x.conjugate(); break;
    }
  }
  return x;
}

Mat Automorphism::apply_inverse(const Mat& g) const {
  Mat x = g;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    switch (it->kind) {
      case SigmaStep::Kind::Conj: x = it->m_inv * x * it->m; break;
      case SigmaStep::Kind::Theta: x = x.adjoint().inverse(); break;
      case SigmaStep::Kind::ComplexConj: x = x.conjugate(); break;
    }
  }
  return x;
}

Mat Automorphism::apply_power(const Mat& g, int j) const {
  Mat x = g;
  for (int i = 0; i < std::abs(j); ++i) x = j > 0 ? apply(x) : apply_inverse(x);
  return x;
}

Mat Automorphism::apply_algebra(const Mat& x0) const {
  Mat x = x0;
  for (const auto& s : steps) {
    switch (s.kind) {
      case SigmaStep::Kind::Conj: x = s.m * x * s.m_inv; break;
      case SigmaStep::Kind::Theta: x = (-x.adjoint()).eval(); break;
      case SigmaStep::Kind::ComplexConj: x = x.conjugate(); break;
    }
  }
  return x;
}

RMat Automorphism::power_matrix(int j) const {
  const Eigen::Index n = algebra_matrix.rows();
  RMat out = RMat::Identity(n, n);
  const RMat base = j >= 0 ? algebra_matrix : RMat(algebra_matrix.inverse());
  for (int i = 0; i < std::abs(j); ++i) out = base * out;
  return out;
}

Automorphism Automorphism::power(int j) const {
  Automorphism out;
  out.spec = j == 1 ? spec : "(" + spec + ")^" + std::to_string(j);
  for (int i = 0; i < std::abs(j); ++i) {
    if (j > 0) {
      out.steps.insert(out.steps.end(), steps.begin(), steps.end());
    } else {
      for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        SigmaStep s = *it;
        std::swap(s.m, s.m_inv);
        out.steps.push_back(s);
      }
    }
  }
  out.algebra_matrix = power_matrix(j);
  const Eigen::Index n = out.algebra_matrix.rows();
  RMat acc = RMat::Identity(n, n);
  out.order = 0;
  for (int k = 1; k <= 64; ++k) {
    acc = out.algebra_matrix * acc;
    if ((acc - RMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10) {
      out.order = k;
      break;
    }
  }
  return out;
}

std::string Automorphism::order_string() const {
  return order == 0 ? std::string("infinite") : std::to_string(order);
}

Mat parse_matrix(const std::string& text) {
  std::vector<cplx> vals;
  std::string tok;
  auto flush = [&]() {
    if (tok.empty()) return;
    std::string t = tok;
    tok.clear();
    cplx v(0.0, 0.0);
    if (t.back() == 'i' || t.back() == 'j') {
      const std::string body = t.substr(0, t.size() - 1);
      // find the split between real and imaginary parts (last sign not after exponent marker)
      std::size_t split = std::string::npos;
      for (std::size_t i = body.size(); i-- > 1;)
        if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
          split = i;
          break;
        }
      std::string re = split == std::string::npos ? "" : body.substr(0, split);
      std::string im = split == std::string::npos ? body : body.substr(split);
      if (im.empty() || im == "+") im = "1";
      if (im == "-") im = "-1";
      std::size_t used = 0;
      const double imv = std::stod(im, &used);
      if (used != im.size()) throw std::invalid_argument("parse_matrix: bad entry '" + t + "'");
      double rev = 0.0;
      if (!re.empty()) {
        rev = std::stod(re, &used);
        if (used != re.size()) throw std::invalid_argument("parse_matrix: bad entry '" + t + "'");
      }
      v = cplx(rev, imv);
    } else {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(t, &used);
      } catch (const std::exception&) {
        throw std::invalid_argument("parse_matrix: bad entry '" + t + "'");
      }
      if (used != t.size()) throw std::invalid_argument("parse_matrix: bad entry '" + t + "'");
      v = cplx(x, 0.0);
    }
    vals.push_back(v);
  };
  for (char c : text) {
    if (c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c)) || c == '[' || c == ']')
      flush();
    else
      tok.push_back(c);
  }
  flush();
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(vals.size()))));
  if (n == 0 || n * n != static_cast<int>(vals.size()))
    throw std::invalid_argument("parse_matrix: entry count " + std::to_string(vals.size()) + " is not a square");
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = vals[i * n + j];
  return m;
}

Automorphism make_sigma(const ReductiveAlgebra& alg, const std::string& spec) {
  Automorphism s;
  s.spec = spec.empty() ? "identity" : spec;
  std::stringstream ss(s.spec);
  std::string tok;
  while (std::getline(ss, tok, '*')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok == "identity" || tok.empty()) continue;
    SigmaStep st;
    if (tok == "theta") {
      st.kind = SigmaStep::Kind::Theta;
    } else if (tok == "complex_conj") {
      st.kind = SigmaStep::Kind::ComplexConj;
    } else if (tok.rfind("conj_by:", 0) == 0) {
      st.kind = SigmaStep::Kind::Conj;
      st.m = parse_matrix(tok.substr(8));
      if (st.m.rows() != alg.matrix_size)
        throw std::invalid_argument("make_sigma: conj_by matrix has the wrong size");
      if (alg.real_group && st.m.imag().cwiseAbs().maxCoeff() > 0.0)
        throw std::invalid_argument("make_sigma: conj_by matrix must be real for a real group");
      if (std::abs(st.m.determinant()) < 1e-12) throw std::invalid_argument("make_sigma: conj_by matrix is singular");
      st.m_inv = st.m.inverse();
    } else {
      throw std::invalid_argument("make_sigma: unknown automorphism '" + tok + "'");
    }
    s.steps.push_back(st);
  }
  const int n = alg.dim();
  s.algebra_matrix.resize(n, n);
  for (int j = 0; j < n; ++j) s.algebra_matrix.col(j) = alg.coords(s.apply_algebra(alg.basis[j]));
  s = s.power(1);
  s.spec = spec.empty() ? "identity" : spec;
  const SigmaResiduals r = verify_sigma(alg, s);
  if (r.commutes_theta > 1e-12) throw std::invalid_argument("make_sigma: sigma does not commute with theta");
  if (r.preserves_B > 1e-12) throw std::invalid_argument("make_sigma: sigma does not preserve B");
  if (r.bracket > 1e-10 || r.homomorphism > 1e-10)
    throw std::invalid_argument("make_sigma: sigma is not a group automorphism of " + alg.name);
  return s;
}

SigmaResiduals verify_sigma(const ReductiveAlgebra& alg, const Automorphism& s, unsigned seed) {
  SigmaResiduals r;
  const RMat& S = s.algebra_matrix;
  const int m = alg.dim_p, n = alg.dim();
  r.commutes_theta = (S * alg.theta - alg.theta * S).cwiseAbs().maxCoeff();
  r.preserves_B = (S.transpose() * alg.B_matrix * S - alg.B_matrix).cwiseAbs().maxCoeff();
  r.block_structure = std::max(S.topRightCorner(m, n - m).cwiseAbs().maxCoeff(),
                               S.bottomLeftCorner(n - m, m).cwiseAbs().maxCoeff());
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.7);
  for (int trial = 0; trial < 4; ++trial) {
    Vec y(n), z(n);
    for (int i = 0; i < n; ++i) {
      y(i) = nd(rng);
      z(i) = nd(rng);
    }
    const Mat lhs = s.apply(exp_algebra(alg, y));
    const Mat rhs = exp_algebra(alg, S * y);
    r.homomorphism = std::max(r.homomorphism, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
    r.bracket = std::max(r.bracket, (S * alg.bracket(y, z) - alg.bracket(S * y, S * z)).cwiseAbs().maxCoeff());
  }
  return r;
}

Mat exp_algebra(const ReductiveAlgebra& alg, const Vec& x) { return linalg::expm(alg.to_matrix(x)); }

}  // namespace twistorb
