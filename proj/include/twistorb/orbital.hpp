#pragma once

#include "twistorb/reps.hpp"
#include "twistorb/symspace.hpp"

#include <functional>
#include <string>
#include <vector>

namespace twistorb {

/// Value m * exp(log_scale); keeps integrals of exponentially large integrands representable.
struct ScaledValue {
  cplx mantissa = 0.0;
  double log_scale = 0.0;
  cplx value() const { return mantissa * std::exp(log_scale); }
};

/// Integrand restricted to the ray r -> r*dir in k_sigma(gamma).
///
/// f(r, shift) returns F(r dir) exp(-shift); growth bounds log|F(r dir)| / |r| for large |r|.
struct RayFunction {
  std::function<cplx(double, double)> f;
  double growth = 0.0;
};
using RayFactory = std::function<RayFunction(const Vec& dir)>;

struct KQuadSpec {
  int order = 64;              ///< Gauss-Hermite order per axis
  bool weyl_reduction = true;  ///< radial reduction when k_sigma(gamma) is of su(2) type
  double gh_peak_limit = 3.0;  ///< switch to a Gauss-Legendre window beyond this Gaussian-variable peak
  int window_panel_order = 20;
  double rel_tol = 1e-11;      ///< one-dimensional paths double the order until the error estimate meets this
  int max_order = 1024;
};

struct KIntegral {
  ScaledValue value;
  double quad_error = 0.0;  ///< |rule(order) - rule(3 order / 4)|, in the same scale
  double tail_ratio = 0.0;  ///< weighted integrand at the outermost node over its maximum
  int nodes = 0;
  std::string method;
};

/// Int_{R^q} F(Y) exp(-|Y|^2/2t) dY / (2 pi t)^{q/2}. su2_type enables the Weyl radial reduction.
KIntegral gaussian_k_integral(int q, double t, const RayFactory& ray, const KQuadSpec& spec, bool su2_type);

/// Immutable data for J_{gamma sigma} and the determinant square roots on k_sigma(gamma).
struct JEvaluator {
  ReductiveAlgebra alg;
  SemisimpleData sd;
  CentralizerData cz;
  RMat sigma_alg;
  int branch_steps = 64;
  double branch_eps = 1e-10;

  RMat M;                      ///< Ad(k^{-1}) sigma on g
  double z_perp0_factor = 1.0; ///< |det(1 - Ad(gamma sigma))|_{z_perp0}|^{-1/2}
  double det_k_perp = 1.0;     ///< det(1 - M) on k_perp_{sigma,0}
  double det_p_perp = 1.0;     ///< det(1 - M) on p_perp_{sigma,0}
  bool su2_type = false;       ///< k_sigma(gamma) is three-dimensional and simple

  int p() const { return cz.p; }
  int q() const { return cz.q; }
  /// g-coordinates of a k_sigma(gamma)-coordinate vector.
  Vec embed(const Vec& y) const { return cz.basis_k_sigma * y; }
  CVec embed(const CVec& y) const { return cz.basis_k_sigma.cast<cplx>() * y; }
};

JEvaluator make_j_evaluator(const ReductiveAlgebra& alg, const SemisimpleData& sd, const CentralizerData& cz,
                            int branch_steps = 64, double branch_eps = 1e-10);
JEvaluator make_j_evaluator(const ReductiveAlgebra& alg, const Automorphism& sigma, const TwistedElement& e);

/// det^{1/2}[(B/2)/sinh(B/2)] as the product over eigenvalues of sqrt((x/2)/sinh(x/2)).
/// Throws std::runtime_error when an eigenvalue sits within 1e-12 of a pole of the inverse.
cplx a_hat(const Mat& b);
double a_hat(const RMat& b_real_spectrum);

/// Which determinant block the tracked square root refers to.
enum class Block { ZPerp, KPerp, PPerp };

struct BranchResult {
  cplx value = 0.0;
  int failures = 0;    ///< retries needed (0 or 1)
  bool ok = true;
  double min_abs = 0.0;
};

/// Square root of det(1 - e^{-i ad Y} M)|_V det(1 - M)|_V, continued from det(1 - M)|_V at Y = 0
/// along the segment s -> sY. Y is given in k_sigma(gamma)-coordinates and may be complex.
BranchResult analytic_sqrt_bracket(const JEvaluator& je, const CVec& y, Block block = Block::ZPerp);

struct JValue {
  cplx value = 0.0;
  int branch_failures = 0;
};
JValue j_function(const JEvaluator& je, const CVec& y);
inline cplx j_function(const JEvaluator& je, const Vec& y) { return j_function(je, CVec(y.cast<cplx>())).value; }

struct HeatQuery {
  double t = 1.0;
  Mat A;                 ///< empty means A = 0
  const Irrep* irrep = nullptr;
  KQuadSpec quad;
};

struct OrbitalResult {
  cplx value = 0.0;
  double quad_error = 0.0;
  int branch_failures = 0;
  int nodes = 0;
  double tail_ratio = 0.0;
  std::string method;
  double log_scale = 0.0;  ///< value = mantissa exp(log_scale) before rounding to double
};

/// Tr^{[gamma sigma]}[exp(-t L^X_A)] by the explicit formula over k_sigma(gamma).
OrbitalResult heat_orbital(const JEvaluator& je, const HeatQuery& hq);

/// Clifford model on p with c_i^2 = -1 and chirality tau = i^{m/2} c_1 ... c_m.
struct CliffordModel {
  int m = 0;
  std::vector<Mat> c;
  Mat tau;
  /// rho^S(A) = 1/4 sum <A e_i, e_j> c_i c_j for A antisymmetric (complex allowed).
  Mat spin_algebra(const Mat& a) const;
  Mat clifford(const CVec& v) const;
};
CliffordModel clifford_model(int m);

/// Real logarithm of a rotation matrix (det 1), angles in (-pi, pi].
RMat log_rotation(const RMat& o);

/// Lift of Ad(k^{-1}) sigma|_p to the spinors: k^{-1} through its logarithm in k, sigma through
/// the principal logarithm of sigma|_p.
Mat spin_lift(const JEvaluator& je, const CliffordModel& cl);

/// Tr_s^{S^p}[L exp(-i rho^S(Y))] for Y in k_sigma(gamma)-coordinates.
cplx spinor_supertrace(const JEvaluator& je, const CliffordModel& cl, const Mat& lift, const CVec& y);

struct SupertraceResult {
  double value = 0.0;
  double imag = 0.0;
  double quad_error = 0.0;
  int branch_failures = 0;
  double square_identity_residual = 0.0;  ///< (-1)^{m/2} Tr_s^2 vs det(1 - M e^{-i ad Y})|_p
};

/// Tr_s^{[gamma sigma]}[exp(-t D^{X,2}/2)] for the Dirac operator twisted by E.
SupertraceResult dirac_orbital_supertrace(const JEvaluator& je, const Irrep& irrep, double t,
                                          const KQuadSpec& quad = {});

/// de Rham orbital supertrace for the flat bundle of a G-representation; weighted inserts N - m/2.
SupertraceResult derham_orbital_supertrace(const JEvaluator& je, const Irrep& irrep, double t, bool weighted,
                                           const KQuadSpec& quad = {});

/// Tr_s^{Lambda(p*)}[(N - m/2)^w g] for g = e^{i ad Y} Ad(sigma^{-1} k) on p, w in {0, 1}.
cplx exterior_supertrace(const JEvaluator& je, const CVec& y, bool weighted);

struct IndexDensity {
  double value = 0.0;
  double imag = 0.0;
  int orientation_sign = 1;  ///< orientation of X(gamma sigma) used for [.]^max, from basis_p_sigma
  std::string method;
};

/// [A-hat^{gamma sigma}(TX|X(gamma sigma)) ch^{gamma sigma}(F)]^max for the twisted Dirac operator.
IndexDensity elliptic_index_density(const JEvaluator& je, const Irrep& irrep);

/// [Pf(R^{TX(gamma sigma)}/2 pi)]^max in the basis_p_sigma orientation.
double euler_max(const JEvaluator& je);

struct WaveWindow {
  enum class Kind { Bump, Gaussian };
  double center = 0.0;
  double width = 0.1;
  Kind kind = Kind::Bump;
  /// Even window: 0.5 (phi((s - s0)/w) + phi((s + s0)/w)) / w with unit-mass profile phi.
  double mu_hat(double s) const;
  double mu_hat_derivative(double s) const;
  /// sup of |s| over the support (Gaussian: 12 widths).
  double reach() const;
};

struct WaveProbeResult {
  cplx value = 0.0;
  double quad_error = 0.0;
  bool overlaps_singular_support = false;
  double support_gap = 0.0;  ///< sqrt2 |a| - reach(window); positive means the window sits inside the gap
  int euclidean_dim = 0;
};

/// Int mu_hat(s) Tr^{[gamma sigma]}[J cos(s sqrt(L^X))] ds through the Euclidean model on z_sigma(gamma).
WaveProbeResult wave_support_probe(const JEvaluator& je, const Irrep& irrep, const WaveWindow& window);

/// Radial kernel of mu(sqrt(-Delta/2)) on R^r, where mu(x) = int mu_hat(s) cos(s x) ds. r in {1, 2, 3}.
double euclidean_wave_kernel(const WaveWindow& window, int r, double rho);

}  // namespace twistorb
