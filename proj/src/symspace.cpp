#include "twistorb/symspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace twistorb {

namespace {

Vec a_part(const ReductiveAlgebra& alg, const Mat& h) { return global_cartan(alg, h).a; }

/// Embeds a null-space basis computed on a coordinate block back into g-coordinates.
RMat embed(const RMat& b, int offset, int n) {
  RMat out = RMat::Zero(n, b.cols());
  out.middleRows(offset, b.rows()) = b;
  return out;
}

struct BlockNull {
  RMat basis;
  double gap;
  double nearest;
};

BlockNull block_null(const RMat& sys, int offset, int n) {
  const linalg::NullSpace ns = linalg::null_space(sys, 1e-8);
  return {embed(ns.basis, offset, n), ns.gap, ns.nearest};
}

RMat commutant(const ReductiveAlgebra& alg, const RMat& space, const RMat& elems) {
  if (space.cols() == 0) return space;
  const int n = alg.dim();
  RMat sys(n * elems.cols(), space.cols());
  for (Eigen::Index i = 0; i < elems.cols(); ++i) sys.middleRows(n * i, n) = adjoint(alg, Vec(elems.col(i))) * space;
  if (elems.cols() == 0) return space;
  const linalg::NullSpace ns = linalg::null_space(sys, 1e-8);
  return linalg::orthonormal_span(space * ns.basis);
}

}  // namespace

double distance(const ReductiveAlgebra& alg, const SpacePoint& x, const SpacePoint& y) {
  return a_part(alg, x.coset_rep.inverse() * y.coset_rep).norm();
}

double displacement(const ReductiveAlgebra& alg, const Automorphism& sigma, const TwistedElement& e,
                    const SpacePoint& x) {
  const Mat& g = x.coset_rep;
  const Mat image = e.gamma * sigma.apply_power(g, e.sigma_power);
  return a_part(alg, g.inverse() * image).norm();
}

Mat SemisimpleData::gamma_prime(const ReductiveAlgebra& alg) const {
  return exp_algebra(alg, a) * k.inverse();
}

SemisimpleData semisimple_decompose(const ReductiveAlgebra& alg, const Automorphism& sigma, const TwistedElement& e,
                                    const MinimizerOptions& opt) {
  const int N = alg.matrix_size;
  return semisimple_decompose(alg, sigma, e, SpacePoint{Mat::Identity(N, N)}, opt);
}

SemisimpleData semisimple_decompose(const ReductiveAlgebra& alg, const Automorphism& sigma0, const TwistedElement& e,
                                    const SpacePoint& x0, const MinimizerOptions& opt) {
  if (alg.group_residual(e.gamma) > 1e-9)
    throw std::invalid_argument("semisimple_decompose: gamma is not an element of " + alg.name);
  SemisimpleData sd;
  sd.gamma = e.gamma;
  sd.sigma_power = e.sigma_power;
  sd.sigma = sigma0.power(e.sigma_power);
  const Automorphism& sigma = sd.sigma;
  const RMat& S = sigma.algebra_matrix;
  const Mat gamma_inv = e.gamma.inverse();

  auto normal_form = [&](const Mat& g, Vec& a, Mat& k) {
    const CartanFactors cf = global_cartan(alg, g.inverse() * e.gamma * sigma.apply(g));
    a = cf.a;
    k = cf.k.inverse();
    return (Ad(alg, k) * a - S * a).norm();
  };

  Mat g = x0.coset_rep;
  Vec a;
  Mat k;
  double res = normal_form(g, a, k);
  if (res < 1e-12 * std::max(1.0, a.norm())) {
    sd.shortcut = true;
  } else {
    auto energy = [&](const Mat& h) { return 0.5 * std::pow(a_part(alg, h.inverse() * e.gamma * sigma.apply(h)).norm(), 2); };
    auto direction = [&](const Mat& h) {
      const Mat hi = h.inverse();
      const Vec v1 = a_part(alg, hi * e.gamma * sigma.apply(h));
      const Vec v2 = a_part(alg, hi * sigma.apply_inverse(gamma_inv * h));
      return Vec(v1 + v2);
    };
    double f = energy(g);
    double step = 1.0;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
      const Vec dir = direction(g);
      const double gn = dir.norm();
      sd.grad_norm = gn;
      if (gn < opt.tol) break;
      double s = std::min(1.0, 2.0 * step);
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Mat trial = g * exp_algebra(alg, s * dir);
        const double ft = energy(trial);
        // Near the minimum the energy cannot resolve O(gn^2) decreases; accept steps that shrink the gradient.
        const bool armijo = ft <= f - 1e-4 * s * gn * gn;
        const bool flat = ft <= f + 1e-13 * std::max(1.0, f) && direction(trial).norm() < gn;
        if (armijo || flat) {
          g = trial;
          f = ft;
          accepted = true;
          break;
        }
        s *= 0.5;
      }
      step = s;
      if (!accepted) {
        // The energy no longer decreases measurably; accept the point if the gradient is small.
        if (gn < 1e3 * opt.tol) break;
        throw std::runtime_error("semisimple_decompose: line search failed (element may not be semisimple)");
      }
      // Keep the coset representative well conditioned.
      const CartanFactors cf = global_cartan(alg, g);
      g = exp_algebra(alg, cf.a);
    }
    if (it >= opt.max_iter)
      throw std::runtime_error("semisimple_decompose: no convergence within max iterations");
    sd.iterations = it;
    res = normal_form(g, a, k);
  }
  sd.g = g;
  sd.a = a;
  sd.k = k;
  sd.m_gamma_sigma = a.norm();
  sd.normal_form_residual = res;
  const Mat recon = g * exp_algebra(alg, a) * k.inverse() * sigma.apply(g.inverse());
  sd.reconstruction_residual = (recon - e.gamma).norm() / std::max(1.0, e.gamma.norm());
  if (res > 1e-9) throw std::runtime_error("semisimple_decompose: normal form Ad(k)a = sigma a violated");
  return sd;
}

CentralizerData twisted_centralizer(const ReductiveAlgebra& alg, const SemisimpleData& sd, unsigned seed) {
  CentralizerData cz;
  const int m = alg.dim_p, nk = alg.dim_k, n = alg.dim();
  cz.ad_a = adjoint(alg, sd.a);
  cz.M = Ad(alg, sd.k.inverse()) * sd.sigma.algebra_matrix;
  const RMat I = RMat::Identity(n, n);
  const RMat Mm = cz.M - I;

  auto solve_block = [&](int offset, int size, bool with_sigma) {
    RMat sys(with_sigma ? 2 * n : n, size);
    sys.topRows(n) = cz.ad_a.middleCols(offset, size);
    if (with_sigma) sys.bottomRows(n) = Mm.middleCols(offset, size);
    return block_null(sys, offset, n);
  };
  const BlockNull ps = solve_block(0, m, true);
  const BlockNull ks = solve_block(m, nk, true);
  const BlockNull p0 = solve_block(0, m, false);
  const BlockNull k0 = solve_block(m, nk, false);
  cz.basis_p_sigma = ps.basis;
  cz.basis_k_sigma = ks.basis;
  cz.basis_p0 = p0.basis;
  cz.basis_k0 = k0.basis;
  cz.spectral_gap = std::min({ps.gap, ks.gap, p0.gap, k0.gap});
  cz.degenerate_warning = std::min({ps.nearest, ks.nearest, p0.nearest, k0.nearest}) < 2.0;
  cz.p = static_cast<int>(cz.basis_p_sigma.cols());
  cz.q = static_cast<int>(cz.basis_k_sigma.cols());

  RMat pfull = RMat::Zero(n, m);
  pfull.topRows(m) = RMat::Identity(m, m);
  cz.basis_p_perp = linalg::orth_complement(pfull, cz.basis_p_sigma);
  RMat z0(n, cz.basis_p0.cols() + cz.basis_k0.cols());
  z0 << cz.basis_p0, cz.basis_k0;
  cz.basis_z_perp0 = linalg::orth_complement(I, z0);
  cz.basis_p_perp0 = linalg::orth_complement(cz.basis_p0, cz.basis_p_sigma);
  cz.basis_k_perp0 = linalg::orth_complement(cz.basis_k0, cz.basis_k_sigma);

  // Maximal torus of k_sigma by greedy commutant extension, best of three seeds.
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  RMat best(n, 0);
  for (int trial = 0; trial < 3 && cz.q > 0; ++trial) {
    RMat s(n, 0);
    for (int iter = 0; iter <= cz.q; ++iter) {
      RMat cand = commutant(alg, cz.basis_k_sigma, s);
      RMat extra = linalg::orth_complement(cand, s);
      if (extra.cols() == 0) break;
      Vec c(extra.cols());
      for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = nd(rng);
      Vec y = extra * c;
      y.normalize();
      RMat grown(n, s.cols() + 1);
      grown << s, y;
      s = linalg::orthonormal_span(grown);
    }
    if (s.cols() > best.cols()) best = s;
  }
  cz.torus_s = best;
  cz.b_sigma = commutant(alg, cz.basis_p_sigma, cz.torus_s);
  cz.delta_rank = static_cast<int>(cz.b_sigma.cols());
  return cz;
}

RMat hessian_displacement(const ReductiveAlgebra& alg, const SemisimpleData& sd, const CentralizerData& cz) {
  (void)sd;
  const int n = alg.dim();
  if (cz.basis_p_perp.cols() == 0) return RMat(0, 0);
  const RMat f1 = linalg::symmetric_fn(cz.ad_a, [](double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : x / std::sinh(x); });
  const RMat f2 = linalg::symmetric_fn(cz.ad_a, [](double x) { return 2.0 * std::cosh(x); });
  const RMat h = f1 * (f2 - (cz.M + cz.M.inverse()));
  (void)n;
  RMat out = cz.basis_p_perp.transpose() * h * cz.basis_p_perp;
  return 0.5 * (out + out.transpose());
}

double normal_density(const ReductiveAlgebra& alg, const SemisimpleData& sd, const CentralizerData& cz,
                      const Vec& f, double h) {
  (void)sd;
  const int m = alg.dim_p;
  const int dp = static_cast<int>(cz.basis_p_sigma.cols()), df = static_cast<int>(cz.basis_p_perp.cols());
  if (dp + df == 0) return 1.0;
  const Vec fv = cz.basis_p_perp * f;
  const Mat ef = exp_algebra(alg, fv);
  const Mat ef_inv = exp_algebra(alg, -fv);
  RMat J(m, dp + df);
  for (int i = 0; i < dp; ++i) {
    const Vec y = cz.basis_p_sigma.col(i);
    const Vec plus = a_part(alg, ef_inv * exp_algebra(alg, h * y) * ef);
    const Vec minus = a_part(alg, ef_inv * exp_algebra(alg, -h * y) * ef);
    J.col(i) = ((plus - minus) / (2.0 * h)).head(m);
  }
  for (int j = 0; j < df; ++j) {
    const Vec d = cz.basis_p_perp.col(j);
    const Vec plus = a_part(alg, ef_inv * exp_algebra(alg, fv + h * d));
    const Vec minus = a_part(alg, ef_inv * exp_algebra(alg, fv - h * d));
    J.col(dp + j) = ((plus - minus) / (2.0 * h)).head(m);
  }
  return std::abs(J.determinant());
}

OrbitalEstimate brute_force_orbital(const ReductiveAlgebra& alg, const SemisimpleData& sd,
                                    const CentralizerData& cz, const GroupKernel& kernel, const BruteQuadSpec& quad) {
  OrbitalEstimate out;
  const int d = static_cast<int>(cz.basis_p_perp.cols());
  const Mat gp = sd.gamma_prime(alg);
  const Automorphism& sigma = sd.sigma;
  if (d > 2) throw std::invalid_argument("brute_force_orbital: dim p_perp > 2 is not supported by the tensor rule");
  auto integrand = [&](const Vec& f) -> cplx {
    const Vec fv = cz.basis_p_perp * f;
    const Mat arg = exp_algebra(alg, -fv) * gp * sigma.apply(exp_algebra(alg, fv));
    const cplx q = kernel(arg);
    if (q == 0.0) return 0.0;
    return q * normal_density(alg, sd, cz, f);
  };
  if (d == 0) {
    out.value = kernel(gp);
    out.nodes = 1;
    return out;
  }
  // Directions used to locate the truncation radius.
  std::vector<Vec> dirs;
  for (int i = 0; i < d; ++i) {
    Vec u = Vec::Zero(d);
    u(i) = 1.0;
    dirs.push_back(u);
    dirs.push_back(-u);
  }
  if (d == 2) {
    for (double sx : {1.0, -1.0})
      for (double sy : {1.0, -1.0}) {
        Vec u(2);
        u << sx, sy;
        dirs.push_back(u / std::sqrt(2.0));
      }
  }
  double peak = std::abs(integrand(Vec::Zero(d)));
  auto ray_max = [&](double r) {
    double mx = 0.0;
    for (const auto& u : dirs) mx = std::max(mx, std::abs(integrand(r * u)));
    return mx;
  };
  for (double r = 0.25; r <= 4.0; r += 0.25) peak = std::max(peak, ray_max(r));
  double R = quad.radius;
  if (R <= 0.0) {
    R = 0.5;
    while (R < quad.max_radius && ray_max(R) > quad.decay_tol * peak) R += 0.25;
    if (R >= quad.max_radius)
      throw std::runtime_error("brute_force_orbital: kernel does not decay within the maximal radius");
  }
  out.radius = R;
  out.tail_ratio = peak > 0 ? ray_max(R) / peak : 0.0;

  auto run = [&](int order) {
    const linalg::Quadrature gl = linalg::gauss_legendre(order);
    const std::size_t total = d == 1 ? order : static_cast<std::size_t>(order) * order;
    std::vector<cplx> vals(total);
    linalg::parallel_for(total, [&](std::size_t idx) {
      Vec f(d);
      double w = 1.0;
      if (d == 1) {
        f(0) = R * gl.nodes[idx];
        w = R * gl.weights[idx];
      } else {
        const std::size_t i = idx / order, j = idx % order;
        f(0) = R * gl.nodes[i];
        f(1) = R * gl.nodes[j];
        w = R * R * gl.weights[i] * gl.weights[j];
      }
      vals[idx] = w * integrand(f);
    });
    return linalg::pairwise_sum(vals);
  };
  out.value = run(quad.order);
  const int coarse = std::max(8, (3 * quad.order) / 4);
  out.quad_error = std::abs(out.value - run(coarse));
  out.nodes = d == 1 ? quad.order : quad.order * quad.order;
  return out;
}

}  // namespace twistorb
