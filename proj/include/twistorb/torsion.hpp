#pragma once

#include "twistorb/assembly.hpp"
#include "twistorb/exterior.hpp"
#include "twistorb/reps.hpp"

#include <functional>
#include <string>
#include <vector>

namespace twistorb {

/// Quadrature model of a fixed-point component of a coadjoint orbit (a product of round spheres
/// in simple ideals of u, shifted by the pole contributions of the other ideals).
struct OrbitModel {
  std::string label;
  int dim_u = 0;
  std::vector<Vec> nodes;       ///< moment-map values in u-coordinates
  std::vector<double> weights;  ///< Liouville weights, summing to the symplectic volume
  double volume = 0.0;
  Vec offset;
  std::vector<RMat> sphere_bases;
  std::vector<double> sphere_radii;
  std::function<cplx(const Vec&)> closed_form;  ///< localization formula for R(y), real y
};

/// Orbit model of component j; n_theta Gauss-Legendre nodes in cos(theta), n_phi uniform in phi per sphere.
OrbitModel orbit_model(const FixedPointData& fp, int j, int n_theta = 24, int n_phi = 48);
/// Full orbit of the highest weight of `base` (u0 = 1, sigma = id).
OrbitModel full_orbit_model(const ReductiveAlgebra& alg, const Irrep& base, int n_theta = 24, int n_phi = 48);

struct NondegeneracyReport {
  bool ok = false;
  double margin = 0.0;            ///< min of |<mu, i beta>|^2 over the orbit
  double grid_margin = 0.0;       ///< minimum over the quadrature nodes
  double extremal_margin = -1.0;  ///< exact minimum when available (single sphere or point), else -1
};

/// basis_p: columns in g-coordinates spanning the p-part of the centralizer (pairs with i p in u).
NondegeneracyReport nondegeneracy_check(const OrbitModel& orbit, const RMat& basis_p);

/// R(y) = Int exp(2 pi i <mu, y>) over the component, y complex in u-coordinates.
cplx dh_integral(const OrbitModel& orbit, const CVec& y);
/// exp(-t |beta|^2) R(y) = Int exp(-4 pi^2 t |<mu, i beta>|^2 + 2 pi i <mu, y>).
cplx dh_damped(const OrbitModel& orbit, const RMat& basis_p, double t, const CVec& y);

/// Symbol of the squared superconnection on Lambda(p*) x Lambda(p-hat*), generators e^0..e^{m-1}, then
/// e-hat^0..e-hat^{m-1}.
struct SigmaA2 {
  int m = 0;
  double t = 0.0;
  ExteriorElement pairing;  ///< -1/2 <omega^2, beta^2>'
  std::vector<ExteriorElement> omega2;  ///< coefficient of e_c (c over the g-basis) in omega^{p,2}
  std::vector<ExteriorElement> beta2;   ///< same for beta^2
  RMat basis_p;

  /// -sigma(A_t^2) acting on exp(2 pi i <mu, .>) at the moment value x, including -4 pi^2 t |<mu, i beta>|^2.
  ExteriorElement exponent(const Vec& x) const;
};
SigmaA2 sigma_A2(const ReductiveAlgebra& alg, const RMat& basis_p, double t);

struct EtDt {
  double e_max = 0.0;
  double d_max = 0.0;
  double e_imag = 0.0;
  double d_imag = 0.0;
};

/// Per-node polynomial coefficients in t of the Berezin top coefficients; evaluation is then cheap.
struct EtDtTable {
  int m = 0;
  double berezin = 1.0;               ///< (-1)^{m(m+1)/2} pi^{-m/2}
  std::vector<double> weight;
  std::vector<double> kappa;          ///< 4 pi^2 |<mu, i beta>|^2 at each node
  std::vector<std::vector<cplx>> e_poly, d_poly;
  EtDt eval(double t) const;
};
EtDtTable et_dt_table(const ReductiveAlgebra& alg, const OrbitModel& orbit, const RMat& basis_p);

/// [e_t]^max and [d_t]^max; refuses degenerate orbits.
EtDt et_dt(const ReductiveAlgebra& alg, const OrbitModel& orbit, const RMat& basis_p, double t);

struct WOptions {
  double t_min = 1e-3;
  double t_max = 50.0;
  int points = 4001;  ///< odd; Simpson in log t
};

struct WResult {
  std::vector<double> t_grid;
  std::vector<double> e_t, d_t;
  double W_max = 0.0;
  double error = 0.0;          ///< |W(points) - W(points / 2)| plus the endpoint terms
  double head = 0.0;           ///< contribution of (0, t_min) from the a sqrt(t) + b t^{3/2} ansatz
  double tail = 0.0;           ///< contribution of (t_max, inf) from the exponential fit
  double decay_rate = 0.0;     ///< fitted c in |d_t| ~ C e^{-c t}
  double decay_amplitude = 0.0;
  double relation_residual = 0.0;  ///< max relative |(1 + 2t d/dt) e_t - d_t| on [0.1, 10]
  double max_imag = 0.0;
};

WResult w_invariant(const ReductiveAlgebra& alg, const OrbitModel& orbit, const RMat& basis_p,
                    const WOptions& opt = {});

/// Five-point-stencil residual of (1 + 2t d/dt) e_t = d_t, relative to max(|d_t|, |e_t|).
double et_dt_relation_residual(const EtDtTable& table, double t, double h = 1e-3);

struct EllipticAsymptotics {
  std::vector<int> d;
  std::vector<double> lhs;    ///< d^{-n-1} Tr_s[(N - m/2) exp(-t D^2 / 2 d^2)]
  std::vector<double> rhs;    ///< 2 sum r^d phi [e_{t/2}]^max
  std::vector<double> error;
  double error_slope = 0.0;
  double max_d_times_error = 0.0;
  int n = 0;
  bool vanishing = false;     ///< dim b_sigma(gamma) != 1: both sides are zero
};

/// Weighted de Rham orbital supertraces of Sym^{l d} against the e_t forms of the fixed components.
/// `sigma` is the automorphism the representations are built on; the class uses its power sd.sigma_power.
EllipticAsymptotics elliptic_weighted_asymptotics(const JEvaluator& je, const Automorphism& sigma, int lambda_degree, double t,
                                                  const std::vector<int>& d_list, const KQuadSpec& quad = {});

struct ClassTorsionData {
  std::string id;
  double volume = 0.0;
  int n = 0;
  std::vector<cplx> r, phi;
  std::vector<double> W_max;
};

struct TorsionAsymptotics {
  int m_sigma = -1;                   ///< -1 when E^1_sigma is empty
  std::vector<std::string> E1, E1_max;
  std::vector<ClassTorsionData> classes;
  std::function<cplx(int)> leading;   ///< d -> sum over E^{1,max} of Vol sum_j r^d phi [W^j]^max
  std::vector<int> d;
  std::vector<cplx> leading_values;
  std::vector<double> nonelliptic;    ///< d^{-m(sigma)-1} times the hyperbolic contributions
  double nonelliptic_rate = 0.0;      ///< fitted c in |nonelliptic| ~ A e^{-c d}
  double nonelliptic_log_amplitude = 0.0;
  bool empty_case = false;
};

struct TorsionOptions {
  bool nonelliptic = true;  ///< integrate the hyperbolic classes numerically
  int tau_points = 121;
  KQuadSpec quad;
  WOptions w;
};

/// Leading term of d^{-m(sigma)-1} T_sigma(F_d) for E_d = Sym^{l d}, assembled from the ledger.
TorsionAsymptotics torsion_leading(const CheckedLedger& ledger, int lambda_degree, const std::vector<int>& d_list,
                                   const TorsionOptions& opt = {});

/// -1/2 Vol Int_0^inf Tr_s^{[gamma sigma]}[(N - m/2) exp(-tau D^2/2)] dtau/tau for one class.
double class_torsion_integral(const JEvaluator& je, const Irrep& irrep, double volume, int tau_points = 121,
                              const KQuadSpec& quad = {});

/// u-coordinates of log(k^{-1}) for k in K.
Vec compact_log_inverse(const ReductiveAlgebra& alg, const Mat& k);

/// r^d computed by repeated multiplication, renormalized to the unit circle every 64 steps.
cplx phase_power(cplx r, int d);

}  // namespace twistorb
