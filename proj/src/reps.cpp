#include "twistorb/reps.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace twistorb {

namespace {

/// Homogeneous monomials of degree k in N = 2 or 3 variables.
struct Homog {
  int N;
  int size(int k) const { return N == 2 ? k + 1 : (k + 1) * (k + 2) / 2; }
  int index(const int* a) const {
    if (N == 2) return a[1];
    const int bc = a[1] + a[2];
    return bc * (bc + 1) / 2 + a[2];
  }
  std::vector<std::vector<int>> enumerate(int k) const {
    std::vector<std::vector<int>> out(size(k));
    if (N == 2) {
      for (int j = 0; j <= k; ++j) out[j] = {k - j, j};
    } else {
      for (int bc = 0; bc <= k; ++bc)
        for (int c = 0; c <= bc; ++c) {
          std::vector<int> a = {k - bc, bc - c, c};
          out[index(a.data())] = a;
        }
    }
    return out;
  }
};

double log_fact(const std::vector<int>& a) {
  double s = 0.0;
  for (int x : a) s += std::lgamma(x + 1.0);
  return s;
}

Homog homog_for(const Mat& g) {
  if (g.rows() != 2 && g.rows() != 3) throw std::invalid_argument("sym_power: only 2x2 and 3x3 matrices are supported");
  return Homog{static_cast<int>(g.rows())};
}

/// Complex null space of a stack of linear equations in vec(T).
Mat intertwiner(const ReductiveAlgebra& alg, const Automorphism& sigma, bool k_only) {
  const int N = alg.matrix_size;
  const int first = k_only ? alg.dim_p : 0;
  const int count = alg.dim() - first;
  Mat sys(count * N * N, N * N);
  const Mat I = Mat::Identity(N, N);
  for (int i = 0; i < count; ++i) {
    const Mat& X = alg.basis[first + i];
    const Mat SX = sigma.apply_algebra(X);
    Mat block(N * N, N * N);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        // vec(SX * T) uses kron(I, SX); vec(T * X) uses kron(X^T, I)
        block.block(a * N, b * N, N, N) = (a == b ? SX : Mat::Zero(N, N)) - X(b, a) * I;
      }
    sys.middleRows(i * N * N, N * N) = block;
  }
  Eigen::JacobiSVD<Mat> svd(sys, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  if (s(s.size() - 1) > 1e-10 * s(0)) return Mat(0, 0);
  const CVec v = svd.matrixV().col(N * N - 1);
  Mat T(N, N);
  for (int b = 0; b < N; ++b)
    for (int a = 0; a < N; ++a) T(a, b) = v(b * N + a);
  const cplx det = T.determinant();
  if (std::abs(det) < 1e-12) return Mat(0, 0);
  T /= std::pow(std::abs(det), 1.0 / N);
  return T;
}

void fill_weights_and_casimir(const ReductiveAlgebra& alg, Irrep& E) {
  E.casimir_k = casimir_k(alg, E.rho_basis);
  if (!E.g_rep) return;
  const Mat C = casimir_g(alg, E.rho_basis);
  E.casimir_g = C.trace().real() / E.dim;
  E.casimir_g_residual = (C - E.casimir_g * Mat::Identity(E.dim, E.dim)).norm();
  const CompactForm u = compact_form(alg);
  const RMat w = weights(u, E);
  const RMat r = roots(u);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < w.rows(); ++i)
    if (w.row(i).dot(u.generic) > w.row(best).dot(u.generic)) best = i;
  E.highest_weight = w.row(best).transpose();
  Vec rho_u = Vec::Zero(u.torus.cols());
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    if (r.row(i).dot(u.generic) > 0) rho_u += 0.5 * r.row(i).transpose();
  E.rho_plus_lambda_sq = (rho_u + E.highest_weight).squaredNorm();
}

}  // namespace

Mat sym_power_group(const Mat& g, int d) {
  if (d < 0) throw std::invalid_argument("sym_power_group: negative degree");
  const Homog H = homog_for(g);
  const int N = H.N;
  const auto basis = H.enumerate(d);
  const int D = static_cast<int>(basis.size());
  Mat out = Mat::Zero(D, D);
  for (int col = 0; col < D; ++col) {
    const auto& alpha = basis[col];
    std::vector<cplx> poly(1, 1.0);
    int deg = 0;
    for (int i = 0; i < N; ++i)
      for (int rep = 0; rep < alpha[i]; ++rep) {
        const auto mons = H.enumerate(deg);
        std::vector<cplx> next(H.size(deg + 1), 0.0);
        for (std::size_t m = 0; m < mons.size(); ++m) {
          if (poly[m] == 0.0) continue;
          std::vector<int> b = mons[m];
          for (int j = 0; j < N; ++j) {
            const cplx c = g(j, i);
            if (c == 0.0) continue;
            b[j] += 1;
            next[H.index(b.data())] += poly[m] * c;
            b[j] -= 1;
          }
        }
        poly.swap(next);
        ++deg;
      }
    const double la = log_fact(alpha);
    for (int row = 0; row < D; ++row)
      if (poly[row] != 0.0) out(row, col) = poly[row] * std::exp(0.5 * (log_fact(basis[row]) - la));
  }
  return out;
}

Mat sym_power_algebra(const Mat& x, int d) {
  if (d < 0) throw std::invalid_argument("sym_power_algebra: negative degree");
  const Homog H = homog_for(x);
  const int N = H.N;
  const auto basis = H.enumerate(d);
  const int D = static_cast<int>(basis.size());
  Mat out = Mat::Zero(D, D);
  for (int col = 0; col < D; ++col) {
    std::vector<int> a = basis[col];
    for (int i = 0; i < N; ++i) {
      if (a[i] == 0) continue;
      for (int j = 0; j < N; ++j) {
        const cplx c = x(j, i);
        if (c == 0.0) continue;
        if (i == j) {
          out(col, col) += double(a[i]) * c;
        } else {
          std::vector<int> b = a;
          b[i] -= 1;
          b[j] += 1;
          out(H.index(b.data()), col) += c * std::sqrt(double(a[i]) * (a[j] + 1));
        }
      }
    }
  }
  return out;
}

CompactForm compact_form(const ReductiveAlgebra& alg, unsigned seed) {
  CompactForm u;
  u.dim = alg.dim();
  u.dim_p = alg.dim_p;
  const int n = u.dim, m = u.dim_p;
  u.ad_table.assign(n, RMat::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double sgn = (i < m && j < m) ? -1.0 : 1.0;
      u.ad_table[i].col(j) = sgn * alg.ad_table[i].col(j);
    }
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  RMat t(n, 0);
  for (int it = 0; it <= n; ++it) {
    RMat sys(n * std::max<Eigen::Index>(1, t.cols()), n);
    if (t.cols() == 0) {
      sys.setZero();
    } else {
      for (Eigen::Index c = 0; c < t.cols(); ++c) sys.middleRows(n * c, n) = compact_adjoint(u, t.col(c));
    }
    const RMat comm = linalg::null_space(sys, 1e-9).basis;
    const RMat extra = linalg::orth_complement(comm, t);
    if (extra.cols() == 0) break;
    Vec c(extra.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = nd(rng);
    Vec y = extra * c;
    y.normalize();
    RMat grown(n, t.cols() + 1);
    grown << t, y;
    t = linalg::orthonormal_span(grown);
  }
  u.torus = t;
  u.generic.resize(t.cols());
  for (Eigen::Index i = 0; i < t.cols(); ++i) u.generic(i) = 1.0 + 0.37 * (i + 1) + 0.01 * nd(rng);
  return u;
}

RMat compact_adjoint(const CompactForm& u, const Vec& x) {
  RMat a = RMat::Zero(u.dim, u.dim);
  for (int i = 0; i < u.dim; ++i)
    if (x(i) != 0.0) a += x(i) * u.ad_table[i];
  return a;
}

Mat Irrep::rho_algebra(const Vec& y) const {
  Mat out = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < rho_basis.size(); ++i)
    if (y(i) != 0.0) out += y(i) * rho_basis[i];
  return out;
}

Mat Irrep::rho_algebra(const CVec& y) const {
  Mat out = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < rho_basis.size(); ++i)
    if (y(i) != 0.0) out += y(i) * rho_basis[i];
  return out;
}

Mat Irrep::rho_u(const Vec& x) const {
  const cplx I(0.0, 1.0);
  Mat out = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < rho_basis.size(); ++i) {
    if (x(i) == 0.0) continue;
    out += (static_cast<int>(i) < dim_p ? I : cplx(1.0)) * x(i) * rho_basis[i];
  }
  return out;
}

Mat Irrep::rho_power_sigma(int j) const {
  Mat out = Mat::Identity(dim, dim);
  const Mat base = j >= 0 ? rho_sigma : Mat(rho_sigma.inverse());
  for (int i = 0; i < std::abs(j); ++i) out = base * out;
  return out;
}

namespace {

Irrep base_sym(const ReductiveAlgebra& alg, int d) {
  Irrep E;
  E.label = "sym:" + std::to_string(d);
  E.degree = d;
  E.dim_p = alg.dim_p;
  for (const auto& b : alg.basis) E.rho_basis.push_back(sym_power_algebra(b, d));
  E.dim = static_cast<int>(E.rho_basis[0].rows());
  E.group_action = [d](const Mat& g) { return sym_power_group(g, d); };
  return E;
}

}  // namespace

cplx sigma_extension_constant(Irrep& E, const Automorphism& sigma) {
  const Mat& A = E.sigma_intertwiner;
  cplx c = 1.0;
  if (sigma.order > 0) {
    Mat P = Mat::Identity(E.dim, E.dim);
    for (int i = 0; i < sigma.order; ++i) P = A * P;
    const cplx lam = P.trace() / double(E.dim);
    if ((P - lam * Mat::Identity(E.dim, E.dim)).norm() > 1e-8 * std::max(1.0, std::abs(lam)) * std::sqrt(double(E.dim)))
      throw std::runtime_error("sigma_extension_constant: rho(sigma)^order is not scalar (restriction not irreducible)");
    // Roots of c^order * lam = 1; pick the smallest |arg|, ties broken towards positive arg.
    const double mod = std::pow(std::abs(lam), -1.0 / sigma.order);
    const double base = -std::arg(lam) / sigma.order;
    double best_arg = 1e9;
    for (int k = -sigma.order; k <= sigma.order; ++k) {
      double ang = base + 2.0 * kPi * k / sigma.order;
      ang = std::remainder(ang, 2.0 * kPi);
      const bool better = std::abs(ang) < std::abs(best_arg) - 1e-12 ||
                          (std::abs(std::abs(ang) - std::abs(best_arg)) <= 1e-12 && ang > best_arg);
      if (better) best_arg = ang;
    }
    c = std::polar(mod, best_arg);
  }
  E.c_tau = c;
  E.rho_sigma = c * A;
  return c;
}

Irrep build_sym_irrep(const ReductiveAlgebra& alg, int d, const Automorphism& sigma) {
  if (d < 0) throw std::invalid_argument("build_sym_irrep: degree must be non-negative");
  Irrep E = base_sym(alg, d);
  if (sigma.is_identity()) {
    E.sigma_intertwiner = Mat::Identity(E.dim, E.dim);
    E.rho_sigma = E.sigma_intertwiner;
  } else {
    Mat T = intertwiner(alg, sigma, false);
    if (T.size() == 0) {
      T = intertwiner(alg, sigma, true);
      E.sigma_scope = "K";
    }
    if (T.size() == 0 && d > 0)
      throw std::invalid_argument("build_sym_irrep: highest weight is not fixed by sigma '" + sigma.spec + "'");
    if (T.size() == 0) T = Mat::Identity(alg.matrix_size, alg.matrix_size);
    E.sigma_intertwiner = sym_power_group(T, d);
    sigma_extension_constant(E, sigma);
  }
  fill_weights_and_casimir(alg, E);
  return E;
}

Irrep build_k_character(const ReductiveAlgebra& alg, int n) {
  if (alg.name != "sl2r") throw std::invalid_argument("build_k_character: only sl2r has K = SO(2)");
  Irrep E;
  E.label = "char:" + std::to_string(n);
  E.degree = n;
  E.dim = 1;
  E.dim_p = alg.dim_p;
  E.g_rep = false;
  E.sigma_scope = "K";
  E.rho_basis.assign(alg.dim(), Mat::Zero(1, 1));
  // e_3 = J / sqrt(2 B_scale) and exp(phi J) acts by exp(i n phi)
  E.rho_basis[2](0, 0) = cplx(0.0, n / std::sqrt(2.0 * alg.B_scale));
  E.sigma_intertwiner = Mat::Identity(1, 1);
  E.rho_sigma = E.sigma_intertwiner;
  E.group_action = [n](const Mat& k) {
    const double phi = std::atan2(k(0, 1).real(), k(0, 0).real());
    Mat out(1, 1);
    out(0, 0) = std::polar(1.0, n * phi);
    return out;
  };
  E.casimir_k = E.rho_basis[2] * E.rho_basis[2];
  return E;
}

Irrep build_induced_irrep(const ReductiveAlgebra& alg, int d, const Automorphism& sigma) {
  const int n = alg.dim();
  if ((sigma.algebra_matrix * sigma.algebra_matrix - RMat::Identity(n, n)).norm() > 1e-12 || sigma.is_identity())
    throw std::invalid_argument("build_induced_irrep: sigma must have order 2");
  const Irrep base = base_sym(alg, d);
  const int D = base.dim;
  Irrep E;
  E.label = "induced:" + std::to_string(d);
  E.degree = d;
  E.dim = 2 * D;
  E.dim_p = alg.dim_p;
  E.k_irreducible = false;
  for (int i = 0; i < n; ++i) {
    Mat r = Mat::Zero(2 * D, 2 * D);
    r.topLeftCorner(D, D) = base.rho_basis[i];
    for (int j = 0; j < n; ++j)
      if (sigma.algebra_matrix(j, i) != 0.0) r.bottomRightCorner(D, D) += sigma.algebra_matrix(j, i) * base.rho_basis[j];
    E.rho_basis.push_back(r);
  }
  Mat swap = Mat::Zero(2 * D, 2 * D);
  swap.topRightCorner(D, D) = Mat::Identity(D, D);
  swap.bottomLeftCorner(D, D) = Mat::Identity(D, D);
  E.sigma_intertwiner = swap;
  E.rho_sigma = swap;
  E.group_action = [d, D, sigma](const Mat& g) {
    Mat out = Mat::Zero(2 * D, 2 * D);
    out.topLeftCorner(D, D) = sym_power_group(g, d);
    out.bottomRightCorner(D, D) = sym_power_group(sigma.apply(g), d);
    return out;
  };
  fill_weights_and_casimir(alg, E);
  return E;
}

cplx twisted_character(const Irrep& E, const Mat& k, int sigma_power, const CVec& Y) {
  const Mat ek = E.rho_group(k.inverse());
  Mat expo = -cplx(0.0, 1.0) * E.rho_algebra(Y);
  return (ek * E.rho_power_sigma(sigma_power) * linalg::expm(expo)).trace();
}

RepResiduals verify_irrep(const ReductiveAlgebra& alg, const Automorphism& sigma, const Irrep& E) {
  RepResiduals r;
  const int n = alg.dim(), m = alg.dim_p;
  const int first = E.g_rep ? 0 : m;
  for (int i = first; i < n; ++i) {
    const Mat& ri = E.rho_basis[i];
    const Mat u = i < m ? Mat(cplx(0.0, 1.0) * ri) : ri;
    r.skewness = std::max(r.skewness, (u + u.adjoint()).norm());
    for (int j = first; j < n; ++j) {
      Vec c = alg.ad_table[i].col(j);
      Mat lhs = E.rho_algebra(c);
      r.homomorphism = std::max(r.homomorphism, (lhs - (ri * E.rho_basis[j] - E.rho_basis[j] * ri)).norm());
    }
  }
  const int sfirst = E.sigma_scope == "G" && E.g_rep ? 0 : m;
  const Mat rs_inv = E.rho_sigma.inverse();
  for (int i = sfirst; i < n; ++i) {
    const Vec sx = sigma.algebra_matrix.col(i);
    r.sigma_contract =
        std::max(r.sigma_contract, (E.rho_sigma * E.rho_basis[i] * rs_inv - E.rho_algebra(sx)).norm());
  }
  if (E.g_rep) {
    const CasimirConstants cc = casimir_constants(alg);
    r.casimir_scalar = E.casimir_g_residual;
    r.casimir_relation =
        std::abs(-E.casimir_g - 0.25 * cc.Bstar_kappa - 4.0 * kPi * kPi * E.rho_plus_lambda_sq);
  }
  return r;
}

RMat weights(const CompactForm& u, const Irrep& E) {
  const Vec h = u.torus * u.generic;
  const Mat H = -cplx(0.0, 1.0) * E.rho_u(h);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.adjoint()));
  RMat w(E.dim, u.torus.cols());
  for (Eigen::Index b = 0; b < u.torus.cols(); ++b) {
    const Mat Tb = -cplx(0.0, 1.0) * E.rho_u(u.torus.col(b));
    for (int i = 0; i < E.dim; ++i) {
      const CVec v = es.eigenvectors().col(i);
      w(i, b) = (v.adjoint() * Tb * v)(0, 0).real() / (2.0 * kPi);
    }
  }
  return w;
}

RMat roots(const CompactForm& u) {
  const Vec h = u.torus * u.generic;
  const Mat H = -cplx(0.0, 1.0) * compact_adjoint(u, h).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.adjoint()));
  std::vector<Vec> rs;
  for (int i = 0; i < u.dim; ++i) {
    if (std::abs(es.eigenvalues()(i)) < 1e-9) continue;
    const CVec v = es.eigenvectors().col(i);
    Vec a(u.torus.cols());
    for (Eigen::Index b = 0; b < u.torus.cols(); ++b) {
      const Mat Tb = -cplx(0.0, 1.0) * compact_adjoint(u, u.torus.col(b)).cast<cplx>();
      a(b) = (v.adjoint() * Tb * v)(0, 0).real() / (2.0 * kPi);
    }
    rs.push_back(a);
  }
  RMat out(rs.size(), u.torus.cols());
  for (std::size_t i = 0; i < rs.size(); ++i) out.row(i) = rs[i].transpose();
  return out;
}

}  // namespace twistorb
