#pragma once

#include "twistorb/liecore.hpp"

#include <functional>
#include <string>
#include <vector>

namespace twistorb {

/// Compact form u = k + i p of g. Basis index i < dim_p stands for i e_i, the others for e_i.
struct CompactForm {
  int dim = 0;
  int dim_p = 0;
  std::vector<RMat> ad_table;
  RMat torus;   ///< orthonormal basis of a maximal torus of u (u-coordinates)
  Vec generic;  ///< generic torus element used as positivity direction (torus coordinates)
};
CompactForm compact_form(const ReductiveAlgebra& alg, unsigned seed = 5);
RMat compact_adjoint(const CompactForm& u, const Vec& x);

/// Finite-dimensional representation with sigma-structure.
struct Irrep {
  std::string label;
  int degree = 0;
  int dim = 0;
  int dim_p = 0;                   ///< dim p of the underlying algebra
  std::vector<Mat> rho_basis;      ///< rho(e_i), i over the basis of g (k only when g_rep is false)
  Mat rho_sigma;                   ///< rho(sigma), includes c_tau
  Mat sigma_intertwiner;           ///< rho(sigma) before the c_tau normalization
  cplx c_tau = 1.0;
  std::string sigma_scope = "G";   ///< "G": intertwines the G-action, "K": only the K-action
  bool g_rep = true;               ///< rho is defined on all of g
  bool k_irreducible = true;
  double casimir_g = 0.0;          ///< scalar of C^{g,E} (g_rep only)
  double casimir_g_residual = 0.0; ///< distance of C^{g,E} from a scalar
  Mat casimir_k;
  Vec highest_weight;              ///< on CompactForm::torus
  double rho_plus_lambda_sq = 0.0; ///< |rho_u + lambda|^2
  std::function<Mat(const Mat&)> group_action;  ///< defining-representation matrix to rho(g)

  Mat rho_algebra(const Vec& y) const;
  Mat rho_algebra(const CVec& y) const;
  /// rho on u-coordinates: i e_i acts by i rho(e_i).
  Mat rho_u(const Vec& x) const;
  Mat rho_group(const Mat& g) const { return group_action(g); }
  Mat rho_power_sigma(int j) const;
};

/// Sym^d of the defining representation with sigma-extension.
Irrep build_sym_irrep(const ReductiveAlgebra& alg, int d, const Automorphism& sigma);
/// One-dimensional character of K = SO(2) in sl2r, exp(phi J) -> exp(i n phi), J = [[0,1],[-1,0]].
Irrep build_k_character(const ReductiveAlgebra& alg, int n);
/// E = Sym^d + Sym^d o sigma with rho(sigma) swapping the summands (sigma of order 2).
Irrep build_induced_irrep(const ReductiveAlgebra& alg, int d, const Automorphism& sigma);

/// Re-derives c_tau for rho(sigma) so that rho(sigma)^{order} = 1 (smallest-argument root).
cplx sigma_extension_constant(Irrep& irrep, const Automorphism& sigma);

/// Tr[rho(k^{-1}) rho(sigma)^j exp(-i rho(Y))], Y a complex g-coordinate vector supported on k.
cplx twisted_character(const Irrep& irrep, const Mat& k, int sigma_power, const CVec& Y);

struct RepResiduals {
  double homomorphism = 0.0;   ///< rho([x,y]) - [rho x, rho y]
  double skewness = 0.0;       ///< rho(u) anti-Hermitian
  double sigma_contract = 0.0; ///< rho(sigma) rho(x) rho(sigma)^{-1} - rho(sigma x)
  double casimir_relation = 0.0;
  double casimir_scalar = 0.0;
};
RepResiduals verify_irrep(const ReductiveAlgebra& alg, const Automorphism& sigma, const Irrep& irrep);

/// Weights of rho on the torus of u, as rows (torus coordinates), with rho(h) = 2 pi i <mu, h>.
RMat weights(const CompactForm& u, const Irrep& irrep);
/// Roots of u on its torus, as rows.
RMat roots(const CompactForm& u);

/// Sym^d of an N x N matrix in the orthonormal monomial basis.
Mat sym_power_group(const Mat& g, int d);
/// Derived action of Sym^d.
Mat sym_power_algebra(const Mat& x, int d);

/// Connected component of the fixed-point set of u0 sigma on the coadjoint orbit of lambda.
struct FixedPointComponent {
  int complex_dim = 0;
  cplx r = 1.0;    ///< action of u0 sigma on the line bundle fibre at the component
  cplx phi = 1.0;  ///< holomorphic Lefschetz normal factor
  std::function<cplx(const Vec&)> R;  ///< y in u-coordinates (fixed by Ad(u0) sigma) to R^j(y)
  Vec point;       ///< a point of the component, as an element of u
  Vec pole_point;  ///< contribution of the ideals where the component is a single point
  std::vector<RMat> sphere_bases;     ///< ideals whose whole orbit sphere is fixed
  std::vector<double> sphere_radii;   ///< |lambda_a| on those ideals
  std::vector<double> sphere_degrees; ///< symplectic volume of each fixed sphere
};

struct FixedPointData {
  std::vector<FixedPointComponent> components;
  int n_max = 0;
  std::vector<int> J_max;   ///< components of complex dimension n_max
  int n_lambda = 0;         ///< complex dimension of the whole orbit
  RMat centralizer;         ///< orthonormal basis of {y in u : Ad(u0) sigma y = y}
  double laplacian_residual = 0.0;  ///< max over components of |Delta R + 4 pi^2 |lambda|^2 R| / |R(0)|
  double lambda_norm = 0.0;
};

/// Fixed-point data of u0 sigma, u0 = exp(u0_log) with u0_log in u-coordinates, for the orbit of the
/// highest weight of `base`. The orbit must be a product of two-spheres (one per simple ideal of u).
FixedPointData fixed_point_data(const ReductiveAlgebra& alg, const Automorphism& sigma, const Vec& u0_log,
                                const Irrep& base);

/// Simple ideals of u as orthonormal bases (u-coordinates); abelian summands are returned as one block.
std::vector<RMat> simple_ideals(const CompactForm& u, unsigned seed = 3);

struct CharAsymptotics {
  std::vector<int> d;
  std::vector<cplx> exact;    ///< chi_d(u0 sigma e^{y/d})
  std::vector<cplx> leading;  ///< d^n sum_{J_max} r^d phi R(y)
  std::vector<double> error;  ///< |exact d^{-n} - leading d^{-n}|
  std::vector<int> dims;
  double error_slope = 0.0;   ///< least-squares slope of log error against log d
  double dim_slope = 0.0;     ///< same for dim E_d
  int n = 0;
};

/// Compares exact characters of Sym^d with the fixed-point leading term along d_list.
CharAsymptotics char_asymptotics_check(const ReductiveAlgebra& alg, const Automorphism& sigma, const Vec& u0_log,
                                       const Vec& y, const std::vector<int>& d_list);

/// Least-squares slope of log|v| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& v);

}  // namespace twistorb
