#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles/h2_heat.hpp"
#include "twistorb/orbital.hpp"

#include <algorithm>
#include <random>

using namespace twistorb;

namespace {

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

Mat su2_torus(double th) {
  Mat u = Mat::Zero(2, 2);
  u(0, 0) = std::polar(1.0, th);
  u(1, 1) = std::polar(1.0, -th);
  return u;
}

Vec random_vec(int n, std::mt19937& rng, double s = 1.0) {
  std::normal_distribution<double> nd(0.0, s);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

CVec cvec1(double y) {
  CVec v(1);
  v(0) = y;
  return v;
}

/// det(1 - e^{-i ad Y} M)|_V det(1 - M)|_V computed directly.
cplx bracket_square(const JEvaluator& je, const CVec& y, const RMat& v) {
  if (v.cols() == 0) return 1.0;
  const int n = je.alg.dim();
  const Mat ad = adjoint_complex(je.alg, je.embed(y));
  const Mat m = je.M.cast<cplx>();
  const Mat target = Mat::Identity(n, n) - linalg::expm(Mat(cplx(0.0, -1.0) * ad)) * m;
  const Mat base = Mat::Identity(n, n) - m;
  return linalg::restrict_to(target, v).determinant() * linalg::restrict_to(base, v).determinant();
}

double heat_value(const JEvaluator& je, const Irrep& E, double t, int order = 64) {
  HeatQuery hq;
  hq.t = t;
  hq.irrep = &E;
  hq.quad.order = order;
  return heat_orbital(je, hq).value.real();
}

}  // namespace

TEST_CASE("a_hat") {
  CHECK(std::abs(a_hat(Mat(Mat::Zero(3, 3))) - 1.0) < 1e-15);
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  for (double y : {0.3, 1.0, 2.5}) {
    Vec yk = Vec::Zero(3);
    yk(2) = y;
    // i ad(y e3) on p has eigenvalues +-sqrt2 y.
    const Mat m = cplx(0.0, 1.0) * adjoint_complex(sl2, yk.cast<cplx>()).topLeftCorner(2, 2);
    const double th = std::sqrt(2.0) * y;
    CHECK(a_hat(m).real() == doctest::Approx((th / 2.0) / std::sinh(th / 2.0)).epsilon(1e-13));
    CHECK(std::abs(a_hat(m) - a_hat(Mat(-m))) < 1e-14);
  }
  Mat pole = Mat::Zero(2, 2);
  pole(0, 0) = cplx(0.0, 2.0 * kPi);
  pole(1, 1) = cplx(0.0, -2.0 * kPi);
  CHECK_THROWS_AS(a_hat(pole), std::runtime_error);
}

TEST_CASE("tracked square root of the determinant bracket") {
  std::mt19937 rng(3);
  SUBCASE("identity class: empty perp spaces") {
    const ReductiveAlgebra sl2 = build_catalog("sl2r");
    const JEvaluator je = make_j_evaluator(sl2, make_sigma(sl2, "identity"), TwistedElement{Mat::Identity(2, 2), 0});
    for (Block b : {Block::ZPerp, Block::KPerp, Block::PPerp}) {
      CHECK(std::abs(analytic_sqrt_bracket(je, cvec1(1.7), b).value - 1.0) < 1e-14);
    }
  }
  SUBCASE("value at Y = 0 and squaring") {
    const ReductiveAlgebra c = build_catalog("sl2c_real");
    const Automorphism id = make_sigma(c, "identity");
    const Automorphism cc = make_sigma(c, "complex_conj");
    const std::vector<JEvaluator> cases = {
        make_j_evaluator(c, id, TwistedElement{su2_torus(0.6), 0}),
        make_j_evaluator(c, cc, TwistedElement{su2_torus(0.4), 1}),
        make_j_evaluator(c, id, TwistedElement{Mat(su2_torus(0.5) * diag2(0.3)), 0}),
    };
    for (const JEvaluator& je : cases) {
      const std::vector<std::pair<Block, RMat>> blocks = {{Block::KPerp, je.cz.basis_k_perp0},
                                                          {Block::PPerp, je.cz.basis_p_perp0}};
      for (const auto& [b, v] : blocks) {
        const CVec zero = CVec::Zero(je.q());
        const BranchResult r0 = analytic_sqrt_bracket(je, zero, b);
        cplx det0 = 1.0;
        if (v.cols()) det0 = linalg::restrict_to(Mat(Mat::Identity(c.dim(), c.dim()) - je.M.cast<cplx>()), v).determinant();
        CHECK(std::abs(r0.value - det0) < 1e-12 * std::max(1.0, std::abs(det0)));
        for (int s = 0; s < 5; ++s) {
          const CVec y = random_vec(je.q(), rng).cast<cplx>();
          const BranchResult r = analytic_sqrt_bracket(je, y, b);
          CHECK(r.ok);
          const cplx sq = bracket_square(je, y, v);
          CHECK(std::abs(r.value * r.value - sq) < 1e-9 * std::max(1.0, std::abs(sq)));
        }
      }
    }
  }
}

TEST_CASE("J closed forms and invariance") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  SUBCASE("identity class") {
    const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{Mat::Identity(2, 2), 0});
    for (double y : {0.0, 0.4, -1.1, 3.0}) {
      const double u = y / std::sqrt(2.0);
      const double expected = y == 0.0 ? 1.0 : u / std::sinh(u);
      CHECK(std::abs(j_function(je, cvec1(y)).value - expected) < 1e-12);
    }
  }
  SUBCASE("elliptic class of SL(2,R)") {
    // p_sigma = 0, k abelian: J = 1 / (4 sin(phi) sin(phi - i y / sqrt2)).
    for (double phi : {kPi / 3.0, 0.9, kPi / 2.0}) {
      const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{rotation(phi), 0});
      for (double y : {0.0, 0.7, -1.3, 2.0}) {
        const cplx expected = 1.0 / (4.0 * std::sin(phi) * std::sin(cplx(phi, -y / std::sqrt(2.0))));
        const JValue j = j_function(je, cvec1(y));
        CHECK(std::abs(j.value - expected) < 1e-12);
        CHECK(j.branch_failures == 0);
      }
    }
  }
  SUBCASE("Ad-invariance on SL(2,C)") {
    std::mt19937 rng(5);
    const ReductiveAlgebra c = build_catalog("sl2c_real");
    const JEvaluator je = make_j_evaluator(c, make_sigma(c, "identity"), TwistedElement{Mat::Identity(2, 2), 0});
    REQUIRE(je.q() == 3);
    for (int s = 0; s < 5; ++s) {
      Vec hk = random_vec(c.dim(), rng);
      hk.head(c.dim_p).setZero();
      const RMat adh = Ad(c, exp_algebra(c, hk));
      const Vec y = random_vec(3, rng);
      const Vec yh = je.cz.basis_k_sigma.transpose() * (adh * je.embed(y));
      CHECK(std::abs(j_function(je, y) - j_function(je, yh)) < 1e-9);
    }
  }
  SUBCASE("B-scale invariance with Y fixed in g") {
    for (double s : {0.5, 2.0, 3.0}) {
      const ReductiveAlgebra g1 = build_catalog("sl2r");
      const ReductiveAlgebra gs = build_catalog("sl2r", s);
      const JEvaluator j1 = make_j_evaluator(g1, make_sigma(g1, "identity"), TwistedElement{rotation(0.9), 0});
      const JEvaluator js = make_j_evaluator(gs, make_sigma(gs, "identity"), TwistedElement{rotation(0.9), 0});
      // The orthonormal basis of the rescaled form is e_i / sqrt(s).
      for (double y : {0.3, 0.8, 1.9}) {
        CHECK(std::abs(j_function(j1, cvec1(y)).value - j_function(js, cvec1(y * std::sqrt(s))).value) < 1e-12);
      }
    }
  }
  SUBCASE("exponential growth bound") {
    const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{rotation(0.9), 0});
    double worst = 0.0;
    for (double r = 2.0; r <= 40.0; r += 2.0) worst = std::max(worst, std::log(std::abs(j_function(je, cvec1(r)).value)) / r);
    CHECK(worst < 1.0);
  }
}

TEST_CASE("heat orbital integrals against the hyperbolic-plane kernel") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  const Irrep triv = build_sym_irrep(sl2, 0, id);
  std::vector<TwistedElement> classes = {{Mat::Identity(2, 2), 0}};
  for (double ell : {0.5, 1.0, 2.0}) classes.push_back({diag2(ell / 2.0), 0});
  for (double phi : {kPi / 3.0, kPi / 2.0}) classes.push_back({rotation(phi), 0});
  for (const TwistedElement& e : classes) {
    const JEvaluator je = make_j_evaluator(sl2, id, e);
    for (double t : {0.25, 1.0, 4.0}) {
      HeatQuery hq;
      hq.t = t;
      hq.irrep = &triv;
      const OrbitalResult r = heat_orbital(je, hq);
      auto q = [&](const Mat& g) { return cplx(oracle::sl2r_heat_kernel(t, oracle::sl2_displacement(g))); };
      const OrbitalEstimate est = brute_force_orbital(sl2, je.sd, je.cz, q);
      CAPTURE(t);
      CAPTURE(e.gamma);
      CHECK(r.value.real() == doctest::Approx(est.value.real()).epsilon(1e-6));
      CHECK(std::abs(r.value.imag()) < 1e-12);
      CHECK(r.quad_error < 1e-9 * std::abs(r.value));
      CHECK(r.tail_ratio < 1e-12);
      CHECK(r.branch_failures == 0);
    }
  }
}

TEST_CASE("heat orbital structure") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  const Irrep triv = build_sym_irrep(sl2, 0, id);
  SUBCASE("Gaussian prefactor of a hyperbolic class") {
    // log(value sqrt(2 pi t)) = -|a|^2/2t + c0 + c1 t; solve for the 1/t coefficient.
    const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{diag2(0.6), 0});
    const double a2 = je.sd.a.squaredNorm();
    const std::vector<double> ts = {0.5, 1.0, 2.0};
    RMat m(3, 3);
    Vec rhs(3);
    for (int i = 0; i < 3; ++i) {
      m(i, 0) = 1.0 / ts[i];
      m(i, 1) = 1.0;
      m(i, 2) = ts[i];
      rhs(i) = std::log(heat_value(je, triv, ts[i]) * std::sqrt(2.0 * kPi * ts[i]));
    }
    const Vec c = m.fullPivLu().solve(rhs);
    CHECK(c(0) == doctest::Approx(-a2 / 2.0).epsilon(1e-10));
  }
  SUBCASE("super-polynomial decay as t -> 0") {
    // The values decrease and, once the Gaussian factor is removed, stay of order one.
    const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{diag2(1.0), 0});
    const double a2 = je.sd.a.squaredNorm();
    std::vector<double> v, rest;
    for (double t : {1.0, 0.5, 0.25, 0.125}) {
      v.push_back(heat_value(je, triv, t));
      rest.push_back(v.back() * std::exp(a2 / (2.0 * t)) * std::sqrt(2.0 * kPi * t));
    }
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] < v[i - 1]);
    CHECK(v.back() < 1e-2 * v.front());
    const auto [lo, hi] = std::minmax_element(rest.begin(), rest.end());
    CHECK(*hi < 2.0 * *lo);
  }
  SUBCASE("A = c Id multiplies by exp(-t c); invalid A is rejected") {
    const Irrep e2 = build_sym_irrep(sl2, 2, id);
    const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{rotation(0.8), 0});
    HeatQuery hq;
    hq.t = 0.7;
    hq.irrep = &e2;
    const cplx v0 = heat_orbital(je, hq).value;
    hq.A = 1.5 * Mat::Identity(3, 3);
    CHECK(std::abs(heat_orbital(je, hq).value - std::exp(-0.7 * 1.5) * v0) < 1e-12 * std::abs(v0));
    hq.A = Mat::Zero(3, 3);
    hq.A(0, 1) = 1.0;
    CHECK_THROWS_AS(heat_orbital(je, hq), std::invalid_argument);
    hq.A = Mat::Zero(3, 3);
    hq.A(0, 0) = 1.0;  // self-adjoint but not K-invariant
    CHECK_THROWS_AS(heat_orbital(je, hq), std::invalid_argument);
  }
  SUBCASE("convergence in the quadrature order") {
    const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{Mat::Identity(2, 2), 0});
    KQuadSpec q8;
    q8.order = 8;
    q8.max_order = 8;
    HeatQuery hq;
    hq.t = 1.0;
    hq.irrep = &triv;
    hq.quad = q8;
    const OrbitalResult lo = heat_orbital(je, hq);
    hq.quad = KQuadSpec{};
    const OrbitalResult hi = heat_orbital(je, hq);
    CHECK(std::abs(lo.value - hi.value) <= 2.0 * lo.quad_error + 1e-12);
  }
}

TEST_CASE("twisted heat orbital integrals on SL(2,C)") {
  std::mt19937 rng(17);
  const ReductiveAlgebra c = build_catalog("sl2c_real");
  const Automorphism cc = make_sigma(c, "complex_conj");
  const Irrep triv = build_sym_irrep(c, 0, cc);
  SUBCASE("twisted conjugation invariance") {
    for (int s = 0; s < 2; ++s) {
      const Mat gamma = exp_algebra(c, random_vec(c.dim(), rng, 0.7));
      const Mat h = exp_algebra(c, random_vec(c.dim(), rng, 0.5));
      const Mat gamma_h = h * gamma * cc.apply(h.inverse());
      const double v = heat_value(make_j_evaluator(c, cc, TwistedElement{gamma, 1}), triv, 1.0);
      const double vh = heat_value(make_j_evaluator(c, cc, TwistedElement{gamma_h, 1}), triv, 1.0);
      CHECK(vh == doctest::Approx(v).epsilon(1e-8));
    }
  }
  SUBCASE("Weyl radial reduction agrees with the tensor rule") {
    const Automorphism id = make_sigma(c, "identity");
    const Irrep t1 = build_sym_irrep(c, 1, id);
    const JEvaluator je = make_j_evaluator(c, id, TwistedElement{Mat::Identity(2, 2), 0});
    REQUIRE(je.su2_type);
    HeatQuery hq;
    hq.t = 0.6;
    hq.irrep = &t1;
    const OrbitalResult radial = heat_orbital(je, hq);
    hq.quad.weyl_reduction = false;
    hq.quad.order = 24;
    const OrbitalResult tensor = heat_orbital(je, hq);
    CHECK(radial.method.find("weyl-radial") == 0);
    CHECK(tensor.method == "tensor-hermite");
    CHECK(radial.value.real() == doctest::Approx(tensor.value.real()).epsilon(1e-8));
  }
}

TEST_CASE("Dirac orbital supertraces") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  for (int n : {0, 1, 2, 3}) {
    CAPTURE(n);
    const Irrep ch = build_k_character(sl2, n);
    SUBCASE("identity class: flat in t, equal to n / 2 pi") {
      const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{Mat::Identity(2, 2), 0});
      for (double t : {0.5, 1.0, 2.0, 4.0}) {
        const SupertraceResult r = dirac_orbital_supertrace(je, ch, t);
        CHECK(std::abs(r.value - n / (2.0 * kPi)) < 1e-12);
        CHECK(r.square_identity_residual < 1e-12);
      }
      const IndexDensity d = elliptic_index_density(je, ch);
      CHECK(std::abs(d.value - n / (2.0 * kPi)) < 1e-10);
    }
    SUBCASE("rotation: Atiyah-Bott quotient at the isolated fixed point") {
      // Tr_s of the spin lift over det(1 - M) on p, times the character: -sin(n phi) / (2 sin phi).
      for (double phi : {0.7, 1.2}) {
        const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{rotation(phi), 0});
        const double expected = -std::sin(n * phi) / (2.0 * std::sin(phi));
        for (double t : {0.5, 2.0}) CHECK(std::abs(dirac_orbital_supertrace(je, ch, t).value - expected) < 1e-12);
        const IndexDensity d = elliptic_index_density(je, ch);
        CHECK(d.method == "isolated fixed point");
        CHECK(std::abs(d.value - expected) < 1e-12);
      }
    }
    SUBCASE("nonelliptic classes vanish") {
      const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{diag2(0.5), 0});
      CHECK(std::abs(dirac_orbital_supertrace(je, ch, 1.0).value) < 1e-10);
    }
  }
  SUBCASE("unsupported cases are rejected") {
    const ReductiveAlgebra s3 = build_catalog("sl3r");
    const Automorphism s3id = make_sigma(s3, "identity");
    const JEvaluator j3 = make_j_evaluator(s3, s3id, TwistedElement{Mat::Identity(3, 3), 0});
    CHECK_THROWS_AS(dirac_orbital_supertrace(j3, build_sym_irrep(s3, 0, s3id), 1.0), std::invalid_argument);
    const Automorphism refl = make_sigma(sl2, "conj_by:1,0,0,-1");
    const JEvaluator jr = make_j_evaluator(sl2, refl, TwistedElement{Mat::Identity(2, 2), 1});
    CHECK_THROWS_AS(dirac_orbital_supertrace(jr, build_k_character(sl2, 1), 1.0), std::invalid_argument);
  }
}

TEST_CASE("de Rham orbital supertraces") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  for (int d : {0, 1, 2}) {
    CAPTURE(d);
    const Irrep E = build_sym_irrep(sl2, d, id);
    const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{Mat::Identity(2, 2), 0});
    const JEvaluator jr = make_j_evaluator(sl2, id, TwistedElement{rotation(0.7), 0});
    const JEvaluator jh = make_j_evaluator(sl2, id, TwistedElement{diag2(0.5), 0});
    // Elliptic unweighted: [e(TX(gamma sigma))]^max Tr^E[rho(gamma)].
    const double id_expected = euler_max(je) * E.dim;
    const double rot_expected = euler_max(jr) * E.rho_group(rotation(0.7)).trace().real();
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
      CHECK(std::abs(derham_orbital_supertrace(je, E, t, false).value - id_expected) < 1e-10);
      CHECK(std::abs(derham_orbital_supertrace(jr, E, t, false).value - rot_expected) < 1e-10);
    }
    // dim b = 1 hyperbolic, unweighted; elliptic with dim b = 0, weighted; sl2r has m even and sigma = id.
    CHECK(std::abs(derham_orbital_supertrace(jh, E, 1.0, false).value) < 1e-10);
    CHECK(std::abs(derham_orbital_supertrace(je, E, 1.0, true).value) < 1e-10);
    CHECK(std::abs(derham_orbital_supertrace(jr, E, 1.0, true).value) < 1e-10);
    CHECK(std::abs(derham_orbital_supertrace(jh, E, 1.0, true).value) < 1e-10);
  }
  SUBCASE("weighted exterior supertrace against the Lambda(p*) matrix model") {
    // Brute force: Tr_s[(N - m/2) Lambda(g)] summed over the degree-k minors of g.
    const ReductiveAlgebra c = build_catalog("sl2c_real");
    const JEvaluator je = make_j_evaluator(c, make_sigma(c, "identity"), TwistedElement{su2_torus(0.6), 0});
    const int m = c.dim_p;
    CVec y = CVec::Zero(je.q());
    y(0) = 0.8;
    const Mat ad = adjoint_complex(c, je.embed(y)).topLeftCorner(m, m);
    const Mat g = linalg::expm(Mat(cplx(0.0, 1.0) * ad)) * je.M.topLeftCorner(m, m).transpose().cast<cplx>();
    cplx plain = 0.0, weighted = 0.0;
    for (unsigned s = 0; s < (1u << m); ++s) {
      std::vector<int> idx;
      for (int i = 0; i < m; ++i)
        if (s & (1u << i)) idx.push_back(i);
      Mat minor(idx.size(), idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) minor(i, j) = g(idx[i], idx[j]);
      const cplx tr = idx.empty() ? cplx(1.0) : minor.determinant();
      const double sign = idx.size() % 2 ? -1.0 : 1.0;
      plain += sign * tr;
      weighted += sign * (double(idx.size()) - 0.5 * m) * tr;
    }
    CHECK(std::abs(exterior_supertrace(je, y, false) - plain) < 1e-12);
    CHECK(std::abs(exterior_supertrace(je, y, true) - weighted) < 1e-12);
  }
}

TEST_CASE("Euler forms of fixed-point sets") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  CHECK(euler_max(make_j_evaluator(sl2, id, TwistedElement{Mat::Identity(2, 2), 0})) ==
        doctest::Approx(-1.0 / kPi).epsilon(1e-13));
  CHECK(euler_max(make_j_evaluator(sl2, id, TwistedElement{rotation(0.7), 0})) == 1.0);
  CHECK(euler_max(make_j_evaluator(sl2, id, TwistedElement{diag2(0.5), 0})) == 0.0);
  const ReductiveAlgebra c = build_catalog("sl2c_real");
  CHECK(euler_max(make_j_evaluator(c, make_sigma(c, "identity"), TwistedElement{Mat::Identity(2, 2), 0})) == 0.0);
  SUBCASE("Gauss-Bonnet density of the real form fixed by complex conjugation") {
    const JEvaluator je = make_j_evaluator(c, make_sigma(c, "complex_conj"), TwistedElement{Mat::Identity(2, 2), 1});
    REQUIRE(je.p() == 2);
    // Sectional curvature K = -|[f1, f2]|^2 on the totally geodesic plane; density K / 2 pi.
    const Vec br = c.bracket(je.cz.basis_p_sigma.col(0), je.cz.basis_p_sigma.col(1));
    CHECK(euler_max(je) == doctest::Approx(-br.squaredNorm() / (2.0 * kPi)).epsilon(1e-12));
  }
  SUBCASE("odd-dimensional fixed sets have zero index density") {
    const Irrep ch = build_sym_irrep(c, 1, make_sigma(c, "identity"));
    const JEvaluator je = make_j_evaluator(c, make_sigma(c, "identity"), TwistedElement{su2_torus(0.6), 0});
    REQUIRE(je.p() == 1);
    CHECK(elliptic_index_density(je, ch).value == 0.0);
  }
}

TEST_CASE("wave support probes") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const Automorphism id = make_sigma(sl2, "identity");
  const Irrep triv = build_sym_irrep(sl2, 0, id);
  SUBCASE("Euclidean kernels of a Gaussian window") {
    // mu(sqrt(-Delta/2)) = exp(w^2 Delta / 4) has kernel (pi w^2)^{-r/2} exp(-rho^2 / w^2).
    WaveWindow g;
    g.kind = WaveWindow::Kind::Gaussian;
    g.width = 0.9;
    for (int r : {1, 2, 3})
      for (double rho : {0.0, 0.4, 1.1}) {
        const double expected = std::pow(kPi * g.width * g.width, -0.5 * r) * std::exp(-rho * rho / (g.width * g.width));
        CHECK(euclidean_wave_kernel(g, r, rho) == doctest::Approx(expected).epsilon(1e-8));
      }
    CHECK_THROWS_AS(euclidean_wave_kernel(g, 4, 0.1), std::invalid_argument);
  }
  SUBCASE("Gaussian window at 0 reproduces the heat value at t = w^2 / 2") {
    WaveWindow g;
    g.kind = WaveWindow::Kind::Gaussian;
    g.width = 1.0;
    for (const TwistedElement& e : {TwistedElement{Mat::Identity(2, 2), 0}, TwistedElement{diag2(0.7), 0},
                                    TwistedElement{rotation(0.9), 0}}) {
      const JEvaluator je = make_j_evaluator(sl2, id, e);
      const WaveProbeResult w = wave_support_probe(je, triv, g);
      CHECK(w.value.real() == doctest::Approx(heat_value(je, triv, 0.5)).epsilon(1e-8));
    }
  }
  SUBCASE("windows inside the gap give zero") {
    for (double a : {1.0, 2.0}) {
      const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{diag2(a / std::sqrt(2.0)), 0});
      REQUIRE(je.sd.a.norm() == doctest::Approx(a).epsilon(1e-10));
      WaveWindow w;
      w.width = std::sqrt(2.0) * a - 0.2;
      const WaveProbeResult r = wave_support_probe(je, triv, w);
      CHECK(std::abs(r.value) < 1e-8);
      CHECK(r.support_gap > 0.0);
      CHECK_FALSE(r.overlaps_singular_support);
      WaveWindow across;
      across.center = std::sqrt(2.0) * a;
      across.width = 0.3;
      const WaveProbeResult x = wave_support_probe(je, triv, across);
      CHECK(x.overlaps_singular_support);
      CHECK(std::abs(x.value) > 1e-6);
    }
  }
  SUBCASE("identity class has no gap") {
    const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{Mat::Identity(2, 2), 0});
    WaveWindow w;
    w.width = 0.5;
    CHECK(std::abs(wave_support_probe(je, triv, w).value) > 1e-3);
  }
}
