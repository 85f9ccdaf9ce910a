#pragma once

#include "twistorb/linalg.hpp"

#include <string>
#include <vector>

namespace twistorb {

/// Catalog reductive Lie algebra in an orthonormal basis adapted to g = p + k.
///
/// Basis vectors 0..dim_p-1 span p, dim_p..dim-1 span k. Bilinear form B(X,Y) = B_scale Re Tr(XY)
/// on the defining representation; the metric <x,y> = -B(x, theta y) is the dot product of coordinates.
struct ReductiveAlgebra {
  std::string name;
  int dim_p = 0;
  int dim_k = 0;
  int matrix_size = 0;
  bool real_group = true;     ///< group matrices are real (sl2r, sl3r)
  double B_scale = 1.0;
  std::vector<Mat> basis;     ///< defining-representation matrices of e_i
  std::vector<RMat> ad_table; ///< ad_table[i](k, j) = c_{ij}^k, the matrix of ad(e_i)
  RMat B_matrix;
  RMat theta;

  int dim() const { return dim_p + dim_k; }
  /// Coordinates of a matrix in the Lie algebra (projection for matrices slightly off the algebra).
  Vec coords(const Mat& x) const;
  Mat to_matrix(const Vec& x) const;
  Mat to_matrix(const CVec& x) const;
  Vec bracket(const Vec& x, const Vec& y) const;
  /// Distance of a matrix from the Lie algebra, relative to its norm.
  double algebra_residual(const Mat& x) const;
  /// Residual of the defining relations of the group (det = 1, real entries when required).
  double group_residual(const Mat& g) const;
  /// Residual of membership in K (theta-fixed elements of G).
  double compact_residual(const Mat& k) const;
};

/// Builds sl2r, sl2c_real or sl3r with B = B_scale Re Tr.
ReductiveAlgebra build_catalog(const std::string& name, double B_scale = 1.0);

/// ad(Y) on g.
RMat adjoint(const ReductiveAlgebra& alg, const Vec& y);
/// Complexified ad(Y) for a complex coefficient vector.
Mat adjoint_complex(const ReductiveAlgebra& alg, const CVec& y);
/// Ad(g) on g for a group element in the defining representation.
RMat Ad(const ReductiveAlgebra& alg, const Mat& g);

struct CasimirConstants {
  double tr_p_Ckp = 0.0;
  double tr_k_Ckk = 0.0;
  double Bstar_kappa = 0.0;
};
CasimirConstants casimir_constants(const ReductiveAlgebra& alg);

/// C^{k,V} = sum over k-basis of rho(e_i)^2 for a representation given by rho(e_i), i in k.
Mat casimir_k(const ReductiveAlgebra& alg, const std::vector<Mat>& rho_basis);
/// C^{g,V} = -sum_p rho(e_i)^2 + sum_k rho(e_i)^2.
Mat casimir_g(const ReductiveAlgebra& alg, const std::vector<Mat>& rho_basis);

struct CartanFactors {
  Vec a;  ///< p-vector (coordinates, only the first dim_p entries are nonzero)
  Mat k;  ///< element of K
};
/// g = exp(a) k with a in p, k in K.
CartanFactors global_cartan(const ReductiveAlgebra& alg, const Mat& g);

/// Residuals of the structural invariants of an algebra.
struct ResidualReport {
  double theta_involution = 0.0;
  double theta_B = 0.0;
  double theta_automorphism = 0.0;
  double B_invariance = 0.0;
  double B_signature_margin = 0.0;  ///< min over p of B eigenvalues and over k of -B eigenvalues
  double jacobi = 0.0;
  double antisymmetry = 0.0;
  double splitting = 0.0;
  double orthonormality = 0.0;
  double max_residual() const;
  bool ok(double tol = 1e-12) const { return max_residual() < tol && B_signature_margin > 0.0; }
};
ResidualReport verify_algebra(const ReductiveAlgebra& alg);

/// Action of sigma on the group, on the Lie algebra and its algebra matrix.
struct SigmaStep {
  enum class Kind { Conj, Theta, ComplexConj };
  Kind kind = Kind::Theta;
  Mat m;
  Mat m_inv;
};

struct Automorphism {
  std::string spec;
  std::vector<SigmaStep> steps;  ///< applied in order: steps[0] first
  RMat algebra_matrix;
  int order = 0;                 ///< 0 means no finite order up to the search bound

  bool is_identity() const { return steps.empty(); }
  Mat apply(const Mat& g) const;
  Mat apply_inverse(const Mat& g) const;
  Mat apply_power(const Mat& g, int j) const;
  /// Action on Lie algebra matrices.
  Mat apply_algebra(const Mat& x) const;
  RMat power_matrix(int j) const;
  /// sigma^j as an automorphism in its own right.
  Automorphism power(int j) const;
  std::string order_string() const;
};

/// Parses "identity", "theta", "complex_conj", "conj_by:<row-major entries>" and compositions joined by '*'.
Automorphism make_sigma(const ReductiveAlgebra& alg, const std::string& spec);

struct SigmaResiduals {
  double commutes_theta = 0.0;
  double preserves_B = 0.0;
  double block_structure = 0.0;
  double homomorphism = 0.0;  ///< sigma(exp Y) vs exp(sigma Y)
  double bracket = 0.0;       ///< sigma[x,y] vs [sigma x, sigma y]
};
SigmaResiduals verify_sigma(const ReductiveAlgebra& alg, const Automorphism& s, unsigned seed = 7);

struct GroupElement {
  Mat matrix;
  std::string group;
};

struct TwistedElement {
  Mat gamma;
  int sigma_power = 0;
};

/// exp of a Lie algebra coordinate vector in the defining representation.
Mat exp_algebra(const ReductiveAlgebra& alg, const Vec& x);

/// Row-major matrix parser: "a,b;c,d" or "a,b,c,d" (square size inferred). Entries may be complex as "x+yi".
Mat parse_matrix(const std::string& text);

}  // namespace twistorb
