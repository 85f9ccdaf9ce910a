#pragma once

#include "twistorb/liecore.hpp"

#include <functional>
#include <string>
#include <vector>

namespace twistorb {

/// Point p*g of X = G/K.
struct SpacePoint {
  Mat coset_rep;
};

/// Riemannian distance d(x, y) = |a| with x^{-1} y = exp(a) k.
double distance(const ReductiveAlgebra& alg, const SpacePoint& x, const SpacePoint& y);
/// Displacement d(x, gamma sigma^j x). The action of gamma sigma^j on X is p g -> p gamma sigma^j(g).
double displacement(const ReductiveAlgebra& alg, const Automorphism& sigma, const TwistedElement& e,
                    const SpacePoint& x);

struct MinimizerOptions {
  double tol = 1e-12;
  int max_iter = 20000;
};

/// Normal form gamma sigma^j = g exp(a) k^{-1} sigma^j(g^{-1}) with Ad(k) a = sigma^j a.
struct SemisimpleData {
  Mat gamma;
  Mat g;
  Vec a;                ///< p-vector in coordinates of g
  Mat k;
  int sigma_power = 0;
  Automorphism sigma;   ///< the effective automorphism sigma^j
  double m_gamma_sigma = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool shortcut = false;
  double normal_form_residual = 0.0;    ///< |Ad(k) a - sigma a|
  double reconstruction_residual = 0.0; ///< |gamma - g e^a k^{-1} sigma(g^{-1})| / |gamma|

  bool elliptic(double tol = 1e-9) const { return m_gamma_sigma < tol; }
  /// e^a k^{-1}, the conjugated element at the basepoint.
  Mat gamma_prime(const ReductiveAlgebra& alg) const;
};

SemisimpleData semisimple_decompose(const ReductiveAlgebra& alg, const Automorphism& sigma, const TwistedElement& e,
                                    const SpacePoint& x0, const MinimizerOptions& opt = {});
SemisimpleData semisimple_decompose(const ReductiveAlgebra& alg, const Automorphism& sigma, const TwistedElement& e,
                                    const MinimizerOptions& opt = {});

/// Bases are columns in g-coordinates, orthonormal for the metric.
struct CentralizerData {
  RMat basis_p_sigma;
  RMat basis_k_sigma;
  RMat basis_p_perp;    ///< orthogonal complement of p_sigma in p
  RMat basis_z_perp0;   ///< orthogonal complement of z(a) in g
  RMat basis_p_perp0;   ///< orthogonal complement of p_sigma in p(a)
  RMat basis_k_perp0;   ///< orthogonal complement of k_sigma in k(a)
  RMat basis_p0;        ///< p(a) = z(a) cap p
  RMat basis_k0;        ///< k(a) = z(a) cap k
  RMat torus_s;
  RMat b_sigma;
  int p = 0;
  int q = 0;
  int delta_rank = 0;
  double spectral_gap = 0.0;
  bool degenerate_warning = false;
  RMat M;               ///< Ad(k^{-1}) sigma on g, the linear part of Ad(k^{-1} sigma)
  RMat ad_a;
};

CentralizerData twisted_centralizer(const ReductiveAlgebra& alg, const SemisimpleData& sd, unsigned seed = 11);

/// Hessian of d^2/2 along p_perp at the minimizer, in the basis_p_perp frame.
RMat hessian_displacement(const ReductiveAlgebra& alg, const SemisimpleData& sd, const CentralizerData& cz);

/// Jacobian r(f) of (y, f) -> p g e^y e^f at (0, f); f given in basis_p_perp coordinates.
double normal_density(const ReductiveAlgebra& alg, const SemisimpleData& sd, const CentralizerData& cz,
                      const Vec& f, double h = 1e-5);

/// Invariant kernel q(g) on G evaluated on group elements; it is passed the matrix e^{-f} gamma' sigma(e^f).
using GroupKernel = std::function<cplx(const Mat&)>;

struct BruteQuadSpec {
  int order = 80;
  double radius = -1.0;     ///< negative: automatic
  double decay_tol = 1e-14;
  double max_radius = 40.0;
};

struct OrbitalEstimate {
  cplx value = 0.0;
  double quad_error = 0.0;
  double radius = 0.0;
  double tail_ratio = 0.0;
  int nodes = 0;
};

OrbitalEstimate brute_force_orbital(const ReductiveAlgebra& alg, const SemisimpleData& sd,
                                    const CentralizerData& cz, const GroupKernel& kernel,
                                    const BruteQuadSpec& quad = {});

}  // namespace twistorb
