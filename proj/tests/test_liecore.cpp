#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "twistorb/liecore.hpp"
#include "twistorb/reps.hpp"

#include <random>

using namespace twistorb;

namespace {

Vec random_vec(int n, std::mt19937& rng, double s = 1.0) {
  std::normal_distribution<double> nd(0.0, s);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

}  // namespace

TEST_CASE("catalog dimensions") {
  CHECK(build_catalog("sl2r").dim_p == 2);
  CHECK(build_catalog("sl2r").dim_k == 1);
  CHECK(build_catalog("sl2c_real").dim_p == 3);
  CHECK(build_catalog("sl2c_real").dim_k == 3);
  CHECK(build_catalog("sl3r").dim_p == 5);
  CHECK(build_catalog("sl3r").dim_k == 3);
  CHECK_THROWS_AS(build_catalog("so5"), std::invalid_argument);
  CHECK_THROWS_AS(build_catalog("sl2r", 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_catalog("sl2r", -1.0), std::invalid_argument);
}

TEST_CASE("catalog invariants hold") {
  for (const char* name : {"sl2r", "sl2c_real", "sl3r"})
    for (double s : {1.0, 2.0, 0.5}) {
      const ReductiveAlgebra alg = build_catalog(name, s);
      const ResidualReport r = verify_algebra(alg);
      CAPTURE(name);
      CHECK(r.max_residual() < 1e-12);
      CHECK(r.B_signature_margin > 0.0);
      CHECK(r.ok());
    }
}

TEST_CASE("negative controls for verify_algebra") {
  ReductiveAlgebra alg = build_catalog("sl3r");
  ReductiveAlgebra bad = alg;
  bad.ad_table[0](3, 4) += 1e-3;
  CHECK(verify_algebra(bad).jacobi > 1e-6);
  CHECK_FALSE(verify_algebra(bad).ok());
  ReductiveAlgebra flipped = alg;
  flipped.theta(2, 2) *= -1.0;
  const ResidualReport r = verify_algebra(flipped);
  CHECK(std::max(r.theta_automorphism, r.orthonormality) > 1e-6);
  CHECK_FALSE(r.ok());
}

TEST_CASE("casimir constants") {
  const ReductiveAlgebra alg = build_catalog("sl2r");
  const CasimirConstants c = casimir_constants(alg);
  // ad(e3) restricted to p is a rotation generator with ad(e3)^2 = -2 on the two-dimensional p.
  CHECK(c.tr_p_Ckp == doctest::Approx(-4.0).epsilon(1e-13));
  CHECK(std::abs(c.tr_k_Ckk) < 1e-14);
  CHECK(c.Bstar_kappa == doctest::Approx(-2.0).epsilon(1e-13));
  const CasimirConstants c2 = casimir_constants(build_catalog("sl2r", 2.0));
  CHECK(c2.Bstar_kappa == doctest::Approx(0.5 * c.Bstar_kappa).epsilon(1e-13));
  for (const char* name : {"sl2c_real", "sl3r"}) {
    const CasimirConstants a = casimir_constants(build_catalog(name, 1.0));
    const CasimirConstants b = casimir_constants(build_catalog(name, 2.0));
    CHECK(b.Bstar_kappa == doctest::Approx(0.5 * a.Bstar_kappa).epsilon(1e-12));
  }
  // su(2) = k of sl2c_real: Tr_k C^{k,k} from the brackets [k_a, k_b] = -sqrt2 eps k_c.
  const CasimirConstants cc = casimir_constants(build_catalog("sl2c_real"));
  CHECK(cc.tr_k_Ckk == doctest::Approx(-12.0).epsilon(1e-12));
  CHECK(cc.tr_p_Ckp == doctest::Approx(-12.0).epsilon(1e-12));
}

TEST_CASE("adjoint action") {
  const ReductiveAlgebra alg = build_catalog("sl2r");
  CHECK(adjoint(alg, Vec(Vec::Zero(3))).norm() == 0.0);
  Vec y = Vec::Zero(3);
  y(2) = 0.7;
  const RMat a = adjoint(alg, y);
  const RMat ap = a.topLeftCorner(2, 2);
  CHECK((ap + ap.transpose()).norm() < 1e-14);
  Eigen::EigenSolver<RMat> es(ap);
  CHECK(std::abs(es.eigenvalues()(0).real()) < 1e-14);
  CHECK(std::abs(std::abs(es.eigenvalues()(0).imag()) - 0.7 * std::sqrt(2.0)) < 1e-13);
  std::mt19937 rng(3);
  for (const char* name : {"sl2r", "sl2c_real", "sl3r"}) {
    const ReductiveAlgebra g = build_catalog(name);
    for (int trial = 0; trial < 5; ++trial) {
      const Vec x = random_vec(g.dim(), rng), z = random_vec(g.dim(), rng);
      const RMat lhs = adjoint(g, g.bracket(x, z));
      const RMat rhs = adjoint(g, x) * adjoint(g, z) - adjoint(g, z) * adjoint(g, x);
      CHECK((lhs - rhs).norm() < 1e-12);
      // Ad(exp x) = exp(ad x)
      const RMat Adx = Ad(g, exp_algebra(g, 0.3 * x));
      CHECK((Adx - linalg::expm(RMat(0.3 * adjoint(g, x)))).norm() < 1e-10);
    }
  }
}

TEST_CASE("global cartan round trip") {
  std::mt19937 rng(5);
  for (const char* name : {"sl2r", "sl2c_real", "sl3r"}) {
    const ReductiveAlgebra alg = build_catalog(name);
    const int N = alg.matrix_size;
    const CartanFactors id = global_cartan(alg, Mat::Identity(N, N));
    CHECK(id.a.norm() < 1e-14);
    CHECK((id.k - Mat::Identity(N, N)).norm() < 1e-14);
    for (int trial = 0; trial < 10; ++trial) {
      Vec a = random_vec(alg.dim(), rng);
      a.tail(alg.dim_k).setZero();
      Vec kv = random_vec(alg.dim(), rng, 2.0);
      kv.head(alg.dim_p).setZero();
      const Mat k = exp_algebra(alg, kv);
      const Mat g = exp_algebra(alg, a) * k;
      const CartanFactors cf = global_cartan(alg, g);
      CHECK((cf.a - a).norm() < 1e-10);
      CHECK((cf.k - k).norm() < 1e-10);
      CHECK((exp_algebra(alg, cf.a) * cf.k - g).norm() < 1e-10);
      CHECK(alg.compact_residual(cf.k) < 1e-10);
    }
  }
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  Mat a0 = Mat::Zero(2, 2);
  a0(0, 0) = 1.0;
  a0(1, 1) = -1.0;
  const CartanFactors cf = global_cartan(sl2, linalg::expm(a0));
  CHECK((sl2.to_matrix(cf.a) - a0).norm() < 1e-13);
  Mat singular = Mat::Zero(2, 2);
  CHECK_THROWS_AS(global_cartan(sl2, singular), std::runtime_error);
}

TEST_CASE("automorphism catalog") {
  const ReductiveAlgebra sl2 = build_catalog("sl2r");
  const ReductiveAlgebra sl2c = build_catalog("sl2c_real");
  const ReductiveAlgebra sl3 = build_catalog("sl3r");
  std::vector<std::pair<const ReductiveAlgebra*, std::string>> cases = {
      {&sl2, "identity"},         {&sl2, "theta"},
      {&sl2, "conj_by:1,0,0,-1"}, {&sl2c, "complex_conj"},
      {&sl2c, "theta"},           {&sl2c, "theta*complex_conj"},
      {&sl3, "theta"},            {&sl3, "conj_by:0,1,0,1,0,0,0,0,1"},
      {&sl2c, "conj_by:1i,0,0,-1i"}};
  for (const auto& [alg, spec] : cases) {
    CAPTURE(spec);
    const Automorphism s = make_sigma(*alg, spec);
    const SigmaResiduals r = verify_sigma(*alg, s);
    CHECK(r.commutes_theta < 1e-12);
    CHECK(r.preserves_B < 1e-12);
    CHECK(r.block_structure < 1e-12);
    CHECK(r.homomorphism < 1e-10);
    CHECK(r.bracket < 1e-12);
  }
  CHECK(make_sigma(sl2, "identity").order == 1);
  CHECK(make_sigma(sl2, "theta").order == 2);
  CHECK(make_sigma(sl2c, "complex_conj").order == 2);
  CHECK(make_sigma(sl3, "conj_by:0,1,0,1,0,0,0,0,1").order == 2);
  const Automorphism rot = make_sigma(sl2, "conj_by:0.8,0.6,-0.6,0.8");
  CHECK(rot.order == 0);
  CHECK(rot.order_string() == "infinite");
  CHECK_THROWS_AS(make_sigma(sl2, "conj_by:1,1,0,1"), std::invalid_argument);
  CHECK_THROWS_AS(make_sigma(sl2, "frobenius"), std::invalid_argument);
  CHECK_THROWS_AS(make_sigma(sl2, "conj_by:1,0,0"), std::invalid_argument);
  // power and inverse
  const Automorphism th = make_sigma(sl3, "theta");
  Mat g = exp_algebra(sl3, Vec::LinSpaced(8, -0.4, 0.5));
  CHECK((th.apply_power(g, 2) - g).norm() < 1e-12);
  CHECK((th.apply_inverse(th.apply(g)) - g).norm() < 1e-12);
  CHECK((th.power(-1).algebra_matrix - th.algebra_matrix).norm() < 1e-12);
}

TEST_CASE("casimir commutes with the representation") {
  for (const char* name : {"sl2r", "sl2c_real", "sl3r"}) {
    const ReductiveAlgebra alg = build_catalog(name);
    const Automorphism id = make_sigma(alg, "identity");
    const Irrep E = build_sym_irrep(alg, 3, id);
    const Mat C = casimir_g(alg, E.rho_basis);
    for (const auto& r : E.rho_basis) CHECK((C * r - r * C).norm() < 1e-10);
  }
}

TEST_CASE("matrix parser") {
  const Mat m = parse_matrix("1, 2; 3, -4.5");
  CHECK(m.rows() == 2);
  CHECK(m(1, 1).real() == -4.5);
  const Mat c = parse_matrix("1+2i,0,0,-1i");
  CHECK(c(0, 0) == cplx(1, 2));
  CHECK(c(1, 1) == cplx(0, -1));
  CHECK_THROWS_AS(parse_matrix("1,2,3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_matrix("1,x,3,4"), std::invalid_argument);
}
