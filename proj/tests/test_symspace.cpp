#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles/h2_heat.hpp"
#include "twistorb/symspace.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <random>

using namespace twistorb;

namespace {

Vec random_vec(int n, std::mt19937& rng, double s = 1.0) {
  std::normal_distribution<double> nd(0.0, s);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

Mat rotation(double phi) {
  Mat r(2, 2);
  r << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
  return r;
}

Mat diag2(double l) {
  Mat h = Mat::Zero(2, 2);
  h(0, 0) = std::exp(l);
  h(1, 1) = std::exp(-l);
  return h;
}

double span_residual(const RMat& big, const RMat& small) {
  if (small.cols() == 0) return 0.0;
  return (small - big * (big.transpose() * small)).norm();
}

}  // namespace

TEST_CASE("distance properties") {
  std::mt19937 rng(1);
  for (const char* name : {"sl2r", "sl2c_real", "sl3r"}) {
    const ReductiveAlgebra alg = build_catalog(name);
    const int N = alg.matrix_size;
    const SpacePoint o{Mat::Identity(N, N)};
    CHECK(distance(alg, o, o) < 1e-14);
    Vec a = random_vec(alg.dim(), rng);
    a.tail(alg.dim_k).setZero();
    CHECK(distance(alg, o, SpacePoint{exp_algebra(alg, a)}) == doctest::Approx(a.norm()).epsilon(1e-12));
    Vec kv = random_vec(alg.dim(), rng);
    kv.head(alg.dim_p).setZero();
    // Same coset, different representative.
    CHECK(distance(alg, SpacePoint{exp_algebra(alg, a)}, SpacePoint{exp_algebra(alg, a) * exp_algebra(alg, kv)}) <
          1e-10);
    for (int trial = 0; trial < 20; ++trial) {
      const SpacePoint x{exp_algebra(alg, random_vec(alg.dim(), rng, 0.6))};
      const SpacePoint y{exp_algebra(alg, random_vec(alg.dim(), rng, 0.6))};
      const SpacePoint z{exp_algebra(alg, random_vec(alg.dim(), rng, 0.6))};
      const double dxy = distance(alg, x, y), dyz = distance(alg, y, z), dxz = distance(alg, x, z);
      CHECK(std::abs(dxy - distance(alg, y, x)) < 1e-10);
      CHECK(dxz <= dxy + dyz + 1e-10);
    }
  }
}

TEST_CASE("displacement basics and convexity") {
  const ReductiveAlgebra alg = build_catalog("sl2r");
  const Automorphism id = make_sigma(alg, "identity");
  const SpacePoint o{Mat::Identity(2, 2)};
  CHECK(displacement(alg, id, TwistedElement{Mat::Identity(2, 2), 0}, o) < 1e-14);
  // diag(e^l, e^-l) = exp(l diag(1,-1)); diag(1,-1) has Frobenius norm sqrt2.
  const double l = 0.7;
  const TwistedElement hyp{diag2(l), 0};
  CHECK(displacement(alg, id, hyp, o) == doctest::Approx(l * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(displacement(alg, id, hyp, SpacePoint{diag2(0.3)}) == doctest::Approx(l * std::sqrt(2.0)).epsilon(1e-12));
  // Second differences of d^2 along geodesics are nonnegative.
  std::mt19937 rng(2);
  for (const char* name : {"sl2r", "sl2c_real", "sl3r"}) {
    const ReductiveAlgebra g = build_catalog(name);
    const Automorphism th = make_sigma(g, "theta");
    const TwistedElement e{exp_algebra(g, random_vec(g.dim(), rng, 0.7)), 1};
    for (int trial = 0; trial < 10; ++trial) {
      const Mat base = exp_algebra(g, random_vec(g.dim(), rng, 0.5));
      Vec dir = random_vec(g.dim(), rng);
      dir.tail(g.dim_k).setZero();
      const double h = 1e-2;
      auto d2 = [&](double s) {
        const double v = displacement(g, th, e, SpacePoint{base * exp_algebra(g, s * dir)});
        return v * v;
      };
      CHECK(d2(h) + d2(-h) - 2.0 * d2(0.0) > -1e-9);
    }
  }
}

TEST_CASE("semisimple decomposition") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  SUBCASE("hyperbolic") {
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{diag2(0.9), 0});
    CHECK(sd.m_gamma_sigma == doctest::Approx(0.9 * std::sqrt(2.0)).epsilon(1e-10));
    CHECK(sd.shortcut);
    CHECK(sd.reconstruction_residual < 1e-9);
  }
  SUBCASE("hyperbolic off the basepoint") {
    std::mt19937 rng(4);
    const Mat h = exp_algebra(sl2, random_vec(3, rng, 0.8));
    const Mat gamma = h * diag2(0.9) * h.inverse();
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{gamma, 0});
    CHECK(!sd.shortcut);
    CHECK(sd.m_gamma_sigma == doctest::Approx(0.9 * std::sqrt(2.0)).epsilon(1e-9));
    CHECK(sd.reconstruction_residual < 1e-9);
    CHECK(sd.normal_form_residual < 1e-9);
  }
  SUBCASE("elliptic rotation") {
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{rotation(0.6), 0});
    CHECK(sd.elliptic());
    CHECK(sd.a.norm() < 1e-12);
  }
  SUBCASE("loxodromic twisted by complex conjugation") {
    const ReductiveAlgebra sl2c = build_catalog("sl2c_real");
    const Automorphism cc = make_sigma(sl2c, "complex_conj");
    std::mt19937 rng(8);
    const Mat gamma = exp_algebra(sl2c, random_vec(6, rng, 0.8));
    const SemisimpleData sd = semisimple_decompose(sl2c, cc, TwistedElement{gamma, 1});
    CHECK(sd.reconstruction_residual < 1e-9);
    CHECK(sd.normal_form_residual < 1e-9);
    CHECK((Ad(sl2c, sd.k) * sd.a - cc.algebra_matrix * sd.a).norm() < 1e-9);
    // X(gamma sigma): the geodesic through pg is translated by |a|.
    const Mat image = gamma * cc.apply(sd.g);
    CHECK(distance(sl2c, SpacePoint{sd.g * exp_algebra(sl2c, sd.a)}, SpacePoint{image}) < 1e-9);
    CHECK(displacement(sl2c, cc, TwistedElement{gamma, 1}, SpacePoint{sd.g}) ==
          doctest::Approx(sd.m_gamma_sigma).epsilon(1e-9));
  }
  SUBCASE("conjugation covariance") {
    std::mt19937 rng(9);
    for (const char* name : {"sl2r", "sl2c_real", "sl3r"}) {
      const ReductiveAlgebra g = build_catalog(name);
      const Automorphism th = make_sigma(g, "theta");
      const Mat gamma = exp_algebra(g, random_vec(g.dim(), rng, 0.6));
      const SemisimpleData s1 = semisimple_decompose(g, th, TwistedElement{gamma, 1});
      const CentralizerData c1 = twisted_centralizer(g, s1);
      for (int trial = 0; trial < 3; ++trial) {
        const Mat h = exp_algebra(g, random_vec(g.dim(), rng, 0.5));
        const Mat conj = h * gamma * th.apply(h.inverse());
        const SemisimpleData s2 = semisimple_decompose(g, th, TwistedElement{conj, 1});
        const CentralizerData c2 = twisted_centralizer(g, s2);
        CAPTURE(name);
        CHECK(s2.m_gamma_sigma == doctest::Approx(s1.m_gamma_sigma).epsilon(1e-8));
        CHECK(c2.p == c1.p);
        CHECK(c2.q == c1.q);
        CHECK(c2.delta_rank == c1.delta_rank);
      }
    }
  }
  SUBCASE("invalid gamma") {
    Mat bad = Mat::Identity(2, 2);
    bad(0, 0) = 3.0;
    CHECK_THROWS_AS(semisimple_decompose(sl2, id, TwistedElement{bad, 0}), std::invalid_argument);
  }
}

TEST_CASE("twisted centralizers") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  SUBCASE("identity") {
    for (const char* name : {"sl2r", "sl2c_real", "sl3r"}) {
      const ReductiveAlgebra g = build_catalog(name);
      const Automorphism gid = make_sigma(g, "identity");
      const int N = g.matrix_size;
      const CentralizerData cz = twisted_centralizer(g, semisimple_decompose(g, gid, TwistedElement{Mat::Identity(N, N), 0}));
      CHECK(cz.p == g.dim_p);
      CHECK(cz.q == g.dim_k);
      CHECK(cz.basis_p_perp.cols() == 0);
    }
  }
  SUBCASE("elliptic rotation") {
    const CentralizerData cz = twisted_centralizer(sl2, semisimple_decompose(sl2, id, TwistedElement{rotation(0.6), 0}));
    CHECK(cz.p == 0);
    CHECK(cz.q == 1);
    CHECK(cz.delta_rank == 0);
    CHECK(cz.torus_s.cols() == 1);
  }
  SUBCASE("hyperbolic") {
    const CentralizerData cz = twisted_centralizer(sl2, semisimple_decompose(sl2, id, TwistedElement{diag2(0.5), 0}));
    CHECK(cz.p == 1);
    CHECK(cz.q == 0);
    CHECK(cz.delta_rank == 1);
  }
  SUBCASE("complex conjugation on sl2c at the identity") {
    const ReductiveAlgebra sl2c = build_catalog("sl2c_real");
    const Automorphism cc = make_sigma(sl2c, "complex_conj");
    const CentralizerData cz = twisted_centralizer(sl2c, semisimple_decompose(sl2c, cc, TwistedElement{Mat::Identity(2, 2), 1}));
    CHECK(cz.p == 2);
    CHECK(cz.q == 1);
    // so(2) has no fixed vectors in the p of sl(2,R), matching rank sl(2,C) - rank so(2,C) = 0.
    CHECK(cz.delta_rank == 0);
  }
  SUBCASE("structural invariants") {
    std::mt19937 rng(12);
    for (const char* name : {"sl2r", "sl2c_real", "sl3r"})
      for (const char* sig : {"identity", "theta"}) {
        const ReductiveAlgebra g = build_catalog(name);
        const Automorphism s = make_sigma(g, sig);
        const Mat gamma = exp_algebra(g, random_vec(g.dim(), rng, 0.7));
        const SemisimpleData sd = semisimple_decompose(g, s, TwistedElement{gamma, 1});
        const CentralizerData cz = twisted_centralizer(g, sd);
        CAPTURE(name);
        CAPTURE(sig);
        const RMat Adk = Ad(g, sd.k);
        const RMat& S = sd.sigma.algebra_matrix;
        RMat z(g.dim(), cz.p + cz.q);
        z << cz.basis_p_sigma, cz.basis_k_sigma;
        for (Eigen::Index i = 0; i < z.cols(); ++i) {
          const Vec f = z.col(i);
          CHECK(g.bracket(f, sd.a).norm() < 1e-10);
          CHECK((Adk * f - S * f).norm() < 1e-10);
        }
        if (z.cols() > 0) CHECK((z.transpose() * z - RMat::Identity(z.cols(), z.cols())).norm() < 1e-10);
        if (cz.basis_p_perp.cols() > 0) {
          CHECK((cz.basis_p_sigma.transpose() * cz.basis_p_perp).norm() < 1e-10);
          CHECK(cz.basis_p_perp.bottomRows(g.dim_k).norm() < 1e-12);
        }
        CHECK(cz.basis_p_sigma.cols() + cz.basis_p_perp.cols() == g.dim_p);
        // ad(k_sigma) preserves p_sigma, k_sigma and the perp spaces inside z(a).
        for (Eigen::Index i = 0; i < cz.basis_k_sigma.cols(); ++i) {
          const RMat ad = adjoint(g, Vec(cz.basis_k_sigma.col(i)));
          for (const RMat* sp : {&cz.basis_p_sigma, &cz.basis_k_sigma, &cz.basis_p_perp0, &cz.basis_k_perp0})
            CHECK(span_residual(*sp, ad * *sp) < 1e-10);
        }
        // Torus is abelian and maximal; b_sigma commutes with it.
        for (Eigen::Index i = 0; i < cz.torus_s.cols(); ++i) {
          for (Eigen::Index j = 0; j < cz.torus_s.cols(); ++j)
            CHECK(g.bracket(cz.torus_s.col(i), cz.torus_s.col(j)).norm() < 1e-10);
          for (Eigen::Index j = 0; j < cz.b_sigma.cols(); ++j)
            CHECK(g.bracket(cz.torus_s.col(i), cz.b_sigma.col(j)).norm() < 1e-10);
        }
        for (Eigen::Index j = 0; j < cz.basis_k_sigma.cols(); ++j) {
          const Vec y = cz.basis_k_sigma.col(j);
          const Vec r = y - cz.torus_s * (cz.torus_s.transpose() * y);
          if (r.norm() < 1e-8) continue;
          double c = 0.0;
          for (Eigen::Index i = 0; i < cz.torus_s.cols(); ++i) c += g.bracket(cz.torus_s.col(i), r).norm();
          CHECK(c > 1e-8);
        }
      }
  }
}

TEST_CASE("hessian of the displacement") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  SUBCASE("identity is empty") {
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{Mat::Identity(2, 2), 0});
    CHECK(hessian_displacement(sl2, sd, twisted_centralizer(sl2, sd)).size() == 0);
  }
  SUBCASE("elliptic closed form") {
    for (double phi : {0.3, 0.9, 1.4}) {
      const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{rotation(phi), 0});
      const RMat H = hessian_displacement(sl2, sd, twisted_centralizer(sl2, sd));
      REQUIRE(H.rows() == 2);
      // Ad(k) rotates p by the angle 2 phi.
      CHECK((H - (2.0 - 2.0 * std::cos(2.0 * phi)) * RMat::Identity(2, 2)).norm() < 1e-12);
    }
  }
  SUBCASE("finite differences") {
    std::mt19937 rng(21);
    const ReductiveAlgebra sl2c = build_catalog("sl2c_real");
    const ReductiveAlgebra sl3 = build_catalog("sl3r");
    std::vector<std::pair<const ReductiveAlgebra*, std::string>> cases = {
        {&sl2, "identity"}, {&sl2, "theta"}, {&sl2c, "complex_conj"}, {&sl3, "theta"}, {&sl3, "identity"}};
    for (const auto& [g, sig] : cases) {
      const Automorphism s = make_sigma(*g, sig);
      const Mat gamma = exp_algebra(*g, random_vec(g->dim(), rng, 0.6));
      const SemisimpleData sd = semisimple_decompose(*g, s, TwistedElement{gamma, 1});
      const CentralizerData cz = twisted_centralizer(*g, sd);
      const RMat H = hessian_displacement(*g, sd, cz);
      const int d = static_cast<int>(cz.basis_p_perp.cols());
      if (d == 0) continue;
      const Mat gp = sd.gamma_prime(*g);
      auto energy = [&](const Vec& f) {
        const Vec fv = cz.basis_p_perp * f;
        const Vec a = global_cartan(*g, exp_algebra(*g, -fv) * gp * sd.sigma.apply(exp_algebra(*g, fv))).a;
        return 0.5 * a.squaredNorm();
      };
      const double h = 1e-3;
      RMat fd(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          Vec ei = Vec::Zero(d), ej = Vec::Zero(d);
          ei(i) = h;
          ej(j) = h;
          fd(i, j) = (energy(ei + ej) - energy(ei - ej) - energy(ej - ei) + energy(-ei - ej)) / (4.0 * h * h);
        }
      CAPTURE(sig);
      CHECK((fd - H).norm() < 1e-5 * std::max(1.0, H.norm()));
      Eigen::SelfAdjointEigenSolver<RMat> es(H);
      CHECK(es.eigenvalues().minCoeff() > 1e-10);
    }
  }
}

TEST_CASE("normal density") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  const double kappa = std::sqrt(2.0);  // curvature of the sl2r space is -kappa^2 for B_scale 1
  SUBCASE("identity") {
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{Mat::Identity(2, 2), 0});
    CHECK(normal_density(sl2, sd, twisted_centralizer(sl2, sd), Vec(0)) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("elliptic: polar coordinates") {
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{rotation(0.7), 0});
    const CentralizerData cz = twisted_centralizer(sl2, sd);
    CHECK(normal_density(sl2, sd, cz, Vec::Zero(2)) == doctest::Approx(1.0).epsilon(1e-6));
    for (double rho : {0.5, 1.0, 2.0}) {
      Vec f(2);
      f << rho * 0.6, rho * 0.8;
      CHECK(normal_density(sl2, sd, cz, f) == doctest::Approx(std::sinh(kappa * rho) / (kappa * rho)).epsilon(1e-7));
    }
  }
  SUBCASE("hyperbolic: Fermi coordinates") {
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{diag2(0.4), 0});
    const CentralizerData cz = twisted_centralizer(sl2, sd);
    for (double u : {0.0, 0.5, 1.5, -1.0}) {
      Vec f(1);
      f << u;
      const double r = normal_density(sl2, sd, cz, f);
      CHECK(r == doctest::Approx(std::cosh(kappa * u)).epsilon(1e-7));
      CHECK(r <= std::exp(kappa * std::abs(u)) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("brute force orbital integrals") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  SUBCASE("zero kernel") {
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{diag2(0.4), 0});
    const OrbitalEstimate est =
        brute_force_orbital(sl2, sd, twisted_centralizer(sl2, sd), [](const Mat&) { return cplx(0.0); }, {80, 5.0});
    CHECK(std::abs(est.value) == 0.0);
  }
  SUBCASE("identity equals the on-diagonal heat kernel") {
    const double t = 0.8;
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{Mat::Identity(2, 2), 0});
    auto q = [&](const Mat& g) { return cplx(oracle::sl2r_heat_kernel(t, global_cartan(sl2, g).a.norm())); };
    const OrbitalEstimate est = brute_force_orbital(sl2, sd, twisted_centralizer(sl2, sd), q);
    CHECK(est.value.real() == doctest::Approx(oracle::sl2r_heat_kernel(t, 0.0)).epsilon(1e-12));
  }
  SUBCASE("hyperbolic orbital integral of the heat kernel") {
    // Closed form on the curvature -1 plane: e^{-tau/4} e^{-l^2/(4 tau)} / (sqrt(4 pi tau) 2 sinh(l/2)).
    for (double s : {1.0, 2.0}) {
      const ReductiveAlgebra g = build_catalog("sl2r", s);
      const Automorphism gid = make_sigma(g, "identity");
      const double t = 0.7, lam = 0.5;
      const SemisimpleData sd = semisimple_decompose(g, gid, TwistedElement{diag2(lam), 0});
      const CentralizerData cz = twisted_centralizer(g, sd);
      auto q = [&](const Mat& h) { return cplx(oracle::sl2r_heat_kernel(t, global_cartan(g, h).a.norm(), s)); };
      const OrbitalEstimate est = brute_force_orbital(g, sd, cz, q);
      const double kappa = std::sqrt(2.0 / s);
      const double tau = t * kappa * kappa / 2.0;
      const double ell = kappa * sd.m_gamma_sigma;
      const double selberg =
          std::exp(-tau / 4.0 - ell * ell / (4.0 * tau)) / (std::sqrt(4.0 * kPi * tau) * 2.0 * std::sinh(ell / 2.0));
      const double expected = kappa * std::exp(t / (4.0 * s)) * selberg;
      CAPTURE(s);
      CHECK(est.value.real() == doctest::Approx(expected).epsilon(1e-8));
      CHECK(est.quad_error < 1e-8 * std::abs(expected));
      CHECK(est.tail_ratio < 1e-13);
    }
  }
  SUBCASE("elliptic orbital integral of the heat kernel") {
    // Rotation by 2 phi about the basepoint: sinh(d/2) = sinh(rho) sin(phi) on the curvature -1 plane.
    const double t = 0.6, phi = 0.8;
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{rotation(phi), 0});
    const CentralizerData cz = twisted_centralizer(sl2, sd);
    auto q = [&](const Mat& h) { return cplx(oracle::sl2r_heat_kernel(t, global_cartan(sl2, h).a.norm())); };
    const OrbitalEstimate est = brute_force_orbital(sl2, sd, cz, q, {60});
    const double tau = t;  // kappa^2 = 2 for B_scale 1
    auto radial = [&](double rho) {
      const double d = 2.0 * std::asinh(std::sinh(rho) * std::sin(phi));
      return 2.0 * kPi * std::sinh(rho) * oracle::h2_kernel_unit(tau, d);
    };
    const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(radial, 0.0, 20.0, 20, 1e-14);
    const double expected = std::exp(t / 4.0) * I;
    CHECK(est.value.real() == doctest::Approx(expected).epsilon(1e-7));
  }
  SUBCASE("non-decaying kernel aborts") {
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{diag2(0.4), 0});
    CHECK_THROWS_AS(brute_force_orbital(sl2, sd, twisted_centralizer(sl2, sd), [](const Mat&) { return cplx(1.0); }),
                    std::runtime_error);
  }
}
