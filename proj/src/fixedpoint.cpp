#include "twistorb/reps.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace twistorb {

namespace {

struct IdealData {
  RMat basis;          ///< 3 orthonormal columns in u
  double lambda = 0.0; ///< |lambda_a|
  double kappa = 0.0;  ///< ad(x) has eigenvalues 0, +-i kappa for unit x in the ideal
  double angle = 0.0;  ///< rotation angle of Ad(u0) sigma on the ideal
  Vec axis;            ///< unit rotation axis (first basis vector when the angle vanishes)
  bool fixed_sphere = false;
};

double max_hermitian_eig(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  return es.eigenvalues().maxCoeff();
}

cplx sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace

std::vector<RMat> simple_ideals(const CompactForm& u, unsigned seed) {
  const int n = u.dim;
  RMat sys(n * n * n, n * n);
  const RMat I = RMat::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    const RMat& A = u.ad_table[i];
    RMat K(n * n, n * n);
    // vec(A X - X A) with column-major vec.
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) K.block(a * n, b * n, n, n) = (a == b ? A : RMat::Zero(n, n)) - A(b, a) * I;
    sys.middleRows(i * n * n, n * n) = K;
  }
  const RMat comm = linalg::null_space(sys, 1e-9).basis;
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  RMat X = RMat::Zero(n, n);
  for (Eigen::Index c = 0; c < comm.cols(); ++c) X += nd(rng) * Eigen::Map<const RMat>(comm.col(c).data(), n, n);
  X = 0.5 * (X + X.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(X);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  std::vector<RMat> out;
  int start = 0;
  for (int i = 1; i <= n; ++i) {
    if (i < n && std::abs(es.eigenvalues()(i) - es.eigenvalues()(i - 1)) < 1e-7 * scale) continue;
    out.push_back(es.eigenvectors().middleCols(start, i - start));
    start = i;
  }
  return out;
}

FixedPointData fixed_point_data(const ReductiveAlgebra& alg, const Automorphism& sigma, const Vec& u0_log,
                                const Irrep& base) {
  const CompactForm u = compact_form(alg);
  if (u0_log.size() != u.dim) throw std::invalid_argument("fixed_point_data: u0 must be a u-coordinate vector");
  const RMat T = linalg::expm(RMat(compact_adjoint(u, u0_log))) * sigma.algebra_matrix;
  const std::vector<RMat> ideals = simple_ideals(u);
  const cplx I(0.0, 1.0);

  std::vector<IdealData> active;
  FixedPointData out;
  double lam_sq = 0.0;
  for (const RMat& Q : ideals) {
    const Vec x = Q.col(0);
    const double lam = max_hermitian_eig(-I * base.rho_u(x)) / (2.0 * kPi);
    if (lam < 1e-10) continue;
    if (Q.cols() != 3)
      throw std::invalid_argument("fixed_point_data: orbit is not a product of two-spheres (ideal of dimension " +
                                  std::to_string(Q.cols()) + ")");
    const RMat TQ = T * Q;
    if ((TQ - Q * (Q.transpose() * TQ)).norm() > 1e-9)
      throw std::invalid_argument("fixed_point_data: Ad(u0) sigma does not preserve the simple ideals carrying lambda");
    IdealData id;
    id.basis = Q;
    id.lambda = lam;
    const RMat adx = Q.transpose() * compact_adjoint(u, x) * Q;
    id.kappa = std::sqrt(0.5 * (adx.transpose() * adx).trace());
    const RMat Ta = Q.transpose() * TQ;
    id.angle = std::atan2((Ta - Ta.transpose()).norm() / (2.0 * std::sqrt(2.0)), 0.5 * (Ta.trace() - 1.0));
    if (id.angle < 1e-9) {
      id.fixed_sphere = true;
      id.axis = Q.col(0);
    } else {
      Eigen::JacobiSVD<RMat> svd(Ta - RMat::Identity(3, 3), Eigen::ComputeFullV);
      id.axis = Q * svd.matrixV().col(2);
    }
    lam_sq += lam * lam;
    active.push_back(id);
  }
  out.lambda_norm = std::sqrt(lam_sq);
  out.centralizer = linalg::null_space(T - RMat::Identity(u.dim, u.dim), 1e-9).basis;

  std::vector<int> poles;
  int spheres = 0;
  for (std::size_t a = 0; a < active.size(); ++a) {
    if (active[a].fixed_sphere)
      ++spheres;
    else
      poles.push_back(int(a));
  }
  out.n_lambda = int(active.size());
  out.n_max = spheres;

  const Mat u0_rho = linalg::expm(Mat(base.rho_u(u0_log)));
  const Mat usig = u0_rho * base.rho_sigma;
  const int ncomp = 1 << poles.size();
  for (int mask = 0; mask < ncomp; ++mask) {
    std::vector<int> sign(active.size(), 1);
    for (std::size_t b = 0; b < poles.size(); ++b)
      if (mask & (1 << b)) sign[poles[b]] = -1;
    Vec x = Vec::Zero(u.dim);
    for (std::size_t a = 0; a < active.size(); ++a) x += sign[a] * active[a].axis;
    Eigen::SelfAdjointEigenSolver<Mat> es(-I * base.rho_u(x));
    const CVec v = es.eigenvectors().col(base.dim - 1);

    FixedPointComponent comp;
    comp.complex_dim = spheres;
    comp.r = (v.adjoint() * usig * v)(0, 0);
    comp.point = Vec::Zero(u.dim);
    comp.pole_point = Vec::Zero(u.dim);
    for (std::size_t a = 0; a < active.size(); ++a) {
      comp.point += active[a].lambda * sign[a] * active[a].axis;
      if (active[a].fixed_sphere) {
        comp.sphere_bases.push_back(active[a].basis);
        comp.sphere_radii.push_back(active[a].lambda);
        comp.sphere_degrees.push_back(4.0 * kPi * active[a].lambda / active[a].kappa);
      } else {
        comp.pole_point += active[a].lambda * sign[a] * active[a].axis;
      }
    }

    cplx phi = 1.0;
    for (int a : poles) {
      const IdealData& id = active[a];
      const Vec xa = sign[a] * id.axis;
      const Mat adx = (id.basis.transpose() * compact_adjoint(u, xa) * id.basis).cast<cplx>();
      Eigen::ComplexEigenSolver<Mat> ces(adx);
      int best = 0;
      for (int i = 1; i < 3; ++i)
        if (ces.eigenvalues()(i).imag() < ces.eigenvalues()(best).imag()) best = i;
      const CVec w = ces.eigenvectors().col(best);
      const Mat Ta = (id.basis.transpose() * T * id.basis).cast<cplx>();
      const cplx zeta = (w.adjoint() * Ta * w)(0, 0) / w.squaredNorm();
      phi /= (1.0 - zeta);
    }
    comp.phi = phi;

    std::vector<IdealData> act = active;
    comp.R = [act, v, base](const Vec& y) -> cplx {
      cplx val = 1.0;
      Vec ypole = Vec::Zero(y.size());
      for (std::size_t a = 0; a < act.size(); ++a) {
        const Vec ya = act[a].basis * (act[a].basis.transpose() * y);
        if (act[a].fixed_sphere) {
          const double deg = 4.0 * kPi * act[a].lambda / act[a].kappa;
          val *= deg * sinc(2.0 * kPi * act[a].lambda * ya.norm());
        } else {
          ypole += act[a].axis * act[a].axis.dot(ya);
        }
      }
      return val * std::exp(cplx((v.adjoint() * base.rho_u(ypole) * v)(0, 0)));
    };
    out.components.push_back(comp);
  }
  for (int j = 0; j < int(out.components.size()); ++j)
    if (out.components[j].complex_dim == out.n_max) out.J_max.push_back(j);

  // Finite-difference check of Delta R = -4 pi^2 |lambda|^2 R on the centralizer.
  const RMat& Z = out.centralizer;
  std::mt19937 rng(17);
  std::normal_distribution<double> nd(0.0, 0.3);
  const double h = 1e-3;
  for (const auto& comp : out.components) {
    Vec c(Z.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = nd(rng);
    const Vec y0 = Z * c;
    const cplx f0 = comp.R(y0);
    cplx lap = 0.0;
    for (Eigen::Index i = 0; i < Z.cols(); ++i)
      lap += (comp.R(y0 + h * Z.col(i)) - 2.0 * f0 + comp.R(y0 - h * Z.col(i))) / (h * h);
    const double scale = std::max(std::abs(comp.R(Vec::Zero(u.dim))), 1e-300);
    out.laplacian_residual =
        std::max(out.laplacian_residual, std::abs(lap + 4.0 * kPi * kPi * lam_sq * f0) / scale);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& v) {
  if (x.size() != v.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::abs(v[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CharAsymptotics char_asymptotics_check(const ReductiveAlgebra& alg, const Automorphism& sigma, const Vec& u0_log,
                                       const Vec& y, const std::vector<int>& d_list) {
  if (d_list.empty()) throw std::invalid_argument("char_asymptotics_check: empty degree list");
  const Irrep base = build_sym_irrep(alg, 1, sigma);
  const FixedPointData fp = fixed_point_data(alg, sigma, u0_log, base);
  const RMat& Z = fp.centralizer;
  if ((y - Z * (Z.transpose() * y)).norm() > 1e-8 * std::max(1.0, y.norm()))
    throw std::invalid_argument("char_asymptotics_check: y is not fixed by Ad(u0) sigma");
  CharAsymptotics out;
  out.n = fp.n_max;
  std::vector<double> ds, dims;
  for (int d : d_list) {
    if (d < 1) throw std::invalid_argument("char_asymptotics_check: degrees must be positive");
    const Irrep E = build_sym_irrep(alg, d, sigma);
    const Mat g = linalg::expm(Mat(E.rho_u(u0_log))) * E.rho_sigma * linalg::expm(Mat(E.rho_u(Vec(y / d))));
    const cplx exact = g.trace();
    cplx lead = 0.0;
    for (int j : fp.J_max) {
      const auto& c = fp.components[j];
      lead += std::pow(c.r, d) * c.phi * c.R(y);
    }
    const double dn = std::pow(double(d), fp.n_max);
    lead *= dn;
    out.d.push_back(d);
    out.exact.push_back(exact);
    out.leading.push_back(lead);
    out.error.push_back(std::abs(exact - lead) / dn);
    out.dims.push_back(E.dim);
    ds.push_back(d);
    dims.push_back(E.dim);
  }
  if (ds.size() >= 2) {
    std::vector<double> err(out.error.begin(), out.error.end());
    for (auto& e : err) e = std::max(e, 1e-300);
    out.error_slope = loglog_slope(ds, err);
    out.dim_slope = loglog_slope(ds, dims);
  }
  return out;
}

}  // namespace twistorb
