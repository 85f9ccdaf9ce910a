#include "twistorb/torsion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace twistorb {

namespace {

constexpr double kFourPiSq = 4.0 * kPi * kPi;

double p_pairing_sq(const Vec& x, const RMat& basis_p) { return (basis_p.transpose() * x).squaredNorm(); }

/// Coefficients c_0..c_deg of the polynomial with values v[s] at s = 0..deg.
std::vector<cplx> fit_polynomial(const std::vector<cplx>& v) {
  const int n = int(v.size());
  Mat V(n, n);
  CVec b(n);
  for (int s = 0; s < n; ++s) {
    double p = 1.0;
    for (int k = 0; k < n; ++k) {
      V(s, k) = p;
      p *= s;
    }
    b(s) = v[s];
  }
  const CVec c = V.fullPivLu().solve(b);
  return std::vector<cplx>(c.data(), c.data() + n);
}

cplx poly_eval(const std::vector<cplx>& c, double t) {
  cplx s = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * t + *it;
  return s;
}

double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson: need an odd number of points >= 3");
  double s = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
  return s * h / 3.0;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace

OrbitModel orbit_model(const FixedPointData& fp, int j, int n_theta, int n_phi) {
  if (j < 0 || j >= int(fp.components.size())) throw std::invalid_argument("orbit_model: component index out of range");
  if (n_theta < 2 || n_phi < 3) throw std::invalid_argument("orbit_model: grid too coarse");
  const FixedPointComponent& c = fp.components[j];
  OrbitModel om;
  om.label = "component " + std::to_string(j);
  om.dim_u = int(c.pole_point.size());
  om.offset = c.pole_point;
  om.sphere_bases = c.sphere_bases;
  om.sphere_radii = c.sphere_radii;
  om.closed_form = c.R;
  om.nodes.push_back(c.pole_point);
  om.weights.push_back(1.0);
  const linalg::Quadrature gl = linalg::gauss_legendre(n_theta);
  for (std::size_t a = 0; a < c.sphere_bases.size(); ++a) {
    const RMat& Q = c.sphere_bases[a];
    const double r = c.sphere_radii[a];
    std::vector<Vec> nodes;
    std::vector<double> weights;
    for (std::size_t n = 0; n < om.nodes.size(); ++n)
      for (int it = 0; it < n_theta; ++it) {
        const double ct = gl.nodes[it], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int ip = 0; ip < n_phi; ++ip) {
          const double ph = 2.0 * kPi * ip / n_phi;
          nodes.push_back(om.nodes[n] + r * (st * std::cos(ph) * Q.col(0) + st * std::sin(ph) * Q.col(1) + ct * Q.col(2)));
          weights.push_back(om.weights[n] * c.sphere_degrees[a] * 0.5 * gl.weights[it] / n_phi);
        }
      }
    om.nodes = std::move(nodes);
    om.weights = std::move(weights);
  }
  om.volume = 0.0;
  for (double w : om.weights) om.volume += w;
  return om;
}

OrbitModel full_orbit_model(const ReductiveAlgebra& alg, const Irrep& base, int n_theta, int n_phi) {
  const Automorphism id = make_sigma(alg, "identity");
  Irrep b = base;
  b.rho_sigma = Mat::Identity(b.dim, b.dim);
  const FixedPointData fp = fixed_point_data(alg, id, Vec::Zero(alg.dim()), b);
  OrbitModel om = orbit_model(fp, 0, n_theta, n_phi);
  om.label = "orbit of " + base.label;
  return om;
}

NondegeneracyReport nondegeneracy_check(const OrbitModel& orbit, const RMat& basis_p) {
  NondegeneracyReport rep;
  rep.grid_margin = 1e300;
  for (const Vec& x : orbit.nodes) rep.grid_margin = std::min(rep.grid_margin, p_pairing_sq(x, basis_p));
  const RMat P = basis_p * basis_p.transpose();
  if (orbit.sphere_bases.empty()) {
    rep.extremal_margin = p_pairing_sq(orbit.offset, basis_p);
  } else if (orbit.sphere_bases.size() == 1 && orbit.offset.norm() < 1e-14) {
    const RMat& Q = orbit.sphere_bases[0];
    Eigen::SelfAdjointEigenSolver<RMat> es(Q.transpose() * P * Q);
    rep.extremal_margin = orbit.sphere_radii[0] * orbit.sphere_radii[0] * std::max(0.0, es.eigenvalues()(0));
  }
  rep.margin = rep.extremal_margin >= 0.0 ? std::min(rep.extremal_margin, rep.grid_margin) : rep.grid_margin;
  double scale = orbit.offset.squaredNorm();
  for (double r : orbit.sphere_radii) scale += r * r;
  rep.ok = rep.margin > 1e-12 * std::max(scale, 1e-300);
  return rep;
}

cplx dh_integral(const OrbitModel& orbit, const CVec& y) {
  const cplx I(0.0, 1.0);
  std::vector<cplx> terms(orbit.nodes.size());
  for (std::size_t n = 0; n < orbit.nodes.size(); ++n)
    terms[n] = orbit.weights[n] * std::exp(2.0 * kPi * I * (orbit.nodes[n].cast<cplx>().transpose() * y)(0, 0));
  return linalg::pairwise_sum(terms);
}

cplx dh_damped(const OrbitModel& orbit, const RMat& basis_p, double t, const CVec& y) {
  const cplx I(0.0, 1.0);
  std::vector<cplx> terms(orbit.nodes.size());
  for (std::size_t n = 0; n < orbit.nodes.size(); ++n) {
    const Vec& x = orbit.nodes[n];
    terms[n] = orbit.weights[n] *
               std::exp(-kFourPiSq * t * p_pairing_sq(x, basis_p) + 2.0 * kPi * I * (x.cast<cplx>().transpose() * y)(0, 0));
  }
  return linalg::pairwise_sum(terms);
}

SigmaA2 sigma_A2(const ReductiveAlgebra& alg, const RMat& basis_p, double t) {
  SigmaA2 s;
  s.m = int(basis_p.cols());
  s.t = t;
  s.basis_p = basis_p;
  const int m = s.m, ng = 2 * m, n = alg.dim();
  if (m > 5) throw std::invalid_argument("sigma_A2: dim p_sigma(gamma) > 5 is not supported");
  s.pairing = ExteriorElement(ng);
  s.omega2.assign(n, ExteriorElement(ng));
  s.beta2.assign(n, ExteriorElement(ng));
  std::vector<std::pair<int, int>> pairs;
  std::vector<Vec> br;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      pairs.emplace_back(i, j);
      br.push_back(alg.bracket(basis_p.col(i), basis_p.col(j)));
    }
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    const auto [i, j] = pairs[a];
    const std::uint32_t em = (1u << i) | (1u << j);
    const std::uint32_t hm = (1u << (m + i)) | (1u << (m + j));
    for (int c = 0; c < n; ++c) {
      if (br[a](c) == 0.0) continue;
      s.omega2[c][em] += br[a](c);
      s.beta2[c][hm] += br[a](c);
    }
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      const auto [k, l] = pairs[b];
      const std::uint32_t hb = (1u << (m + k)) | (1u << (m + l));
      s.pairing[em | hb] += -0.5 * br[a].dot(br[b]);
    }
  }
  return s;
}

ExteriorElement SigmaA2::exponent(const Vec& x) const {
  const cplx I(0.0, 1.0);
  const int ng = 2 * m;
  ExteriorElement out = pairing * cplx(-1.0);
  for (std::size_t c = 0; c < omega2.size(); ++c) {
    if (x(c) == 0.0) continue;
    out += omega2[c] * (2.0 * kPi * I * x(c));
    out += beta2[c] * (-2.0 * kPi * I * t * x(c));
  }
  out += ExteriorElement::scalar(ng, -kFourPiSq * t * p_pairing_sq(x, basis_p));
  return out;
}

EtDtTable et_dt_table(const ReductiveAlgebra& alg, const OrbitModel& orbit, const RMat& basis_p) {
  const NondegeneracyReport nd = nondegeneracy_check(orbit, basis_p);
  if (!nd.ok) throw std::invalid_argument("et_dt: the orbit is degenerate (its moment image meets k*)");
  EtDtTable tab;
  const int m = int(basis_p.cols());
  tab.m = m;
  const int ng = 2 * m;
  tab.berezin = (((m * (m + 1)) / 2) % 2 ? -1.0 : 1.0) * std::pow(kPi, -0.5 * m);
  // t = 0 part and t-coefficient of the nilpotent exponent.
  const SigmaA2 s0 = sigma_A2(alg, basis_p, 0.0);
  const SigmaA2 s1 = sigma_A2(alg, basis_p, 1.0);
  ExteriorElement L(ng);
  for (int i = 0; i < m; ++i) L[(1u << i) | (1u << (m + i))] += 1.0;
  const std::uint32_t top = (1u << ng) - 1u;
  tab.weight = orbit.weights;
  tab.kappa.resize(orbit.nodes.size());
  tab.e_poly.resize(orbit.nodes.size());
  tab.d_poly.resize(orbit.nodes.size());
  linalg::parallel_for(orbit.nodes.size(), [&](std::size_t n) {
    const Vec& x = orbit.nodes[n];
    const Vec mi = basis_p.transpose() * x;
    tab.kappa[n] = kFourPiSq * mi.squaredNorm();
    ExteriorElement A = s0.exponent(x);
    A[0] = 0.0;
    ExteriorElement C = s1.exponent(x) - s0.exponent(x);
    C[0] = 0.0;
    ExteriorElement me(ng), mh(ng);
    for (int i = 0; i < m; ++i) {
      me[1u << i] += mi(i);
      mh[1u << (m + i)] += mi(i);
    }
    const ExteriorElement D = me * mh;
    std::vector<cplx> ev, dv;
    for (int k = 0; k <= m; ++k) {
      const ExteriorElement ex = (A + C * cplx(double(k))).exp();
      ev.push_back((L * ex)[top]);
      dv.push_back((D * ex)[top]);
    }
    tab.e_poly[n] = fit_polynomial(ev);
    tab.d_poly[n] = fit_polynomial(dv);
  });
  return tab;
}

EtDt EtDtTable::eval(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("et_dt: t must be positive");
  std::vector<cplx> es(weight.size()), ds(weight.size());
  for (std::size_t n = 0; n < weight.size(); ++n) {
    const double g = weight[n] * std::exp(-kappa[n] * t);
    es[n] = g * poly_eval(e_poly[n], t);
    ds[n] = g * poly_eval(d_poly[n], t);
  }
  const cplx e = berezin / (4.0 * std::sqrt(t)) * linalg::pairwise_sum(es);
  const cplx d = berezin * (-0.5 * kFourPiSq * std::sqrt(t)) * linalg::pairwise_sum(ds);
  EtDt out;
  out.e_max = e.real();
  out.e_imag = e.imag();
  out.d_max = d.real();
  out.d_imag = d.imag();
  return out;
}

EtDt et_dt(const ReductiveAlgebra& alg, const OrbitModel& orbit, const RMat& basis_p, double t) {
  return et_dt_table(alg, orbit, basis_p).eval(t);
}

double et_dt_relation_residual(const EtDtTable& table, double t, double h) {
  const double dt = h * t;
  auto e = [&](double s) { return table.eval(s).e_max; };
  const double de = (-e(t + 2 * dt) + 8 * e(t + dt) - 8 * e(t - dt) + e(t - 2 * dt)) / (12.0 * dt);
  const EtDt v = table.eval(t);
  const double lhs = v.e_max + 2.0 * t * de;
  return std::abs(lhs - v.d_max) / std::max({std::abs(v.d_max), std::abs(v.e_max), 1e-300});
}

WResult w_invariant(const ReductiveAlgebra& alg, const OrbitModel& orbit, const RMat& basis_p, const WOptions& opt) {
  if (opt.points < 5 || opt.points % 4 != 1) throw std::invalid_argument("w_invariant: points must be 1 mod 4");
  if (!(opt.t_min > 0.0 && opt.t_max > opt.t_min)) throw std::invalid_argument("w_invariant: bad t range");
  const EtDtTable tab = et_dt_table(alg, orbit, basis_p);
  WResult w;
  const double u0 = std::log(opt.t_min), u1 = std::log(opt.t_max);
  const double h = (u1 - u0) / (opt.points - 1);
  std::vector<double> fine, coarse;
  for (int i = 0; i < opt.points; ++i) {
    const double t = std::exp(u0 + i * h);
    const EtDt v = tab.eval(t);
    w.t_grid.push_back(t);
    w.e_t.push_back(v.e_max);
    w.d_t.push_back(v.d_max);
    w.max_imag = std::max({w.max_imag, std::abs(v.e_imag), std::abs(v.d_imag)});
    fine.push_back(v.d_max);
    if (i % 2 == 0) coarse.push_back(v.d_max);
  }
  const double body = simpson(fine, h), body_coarse = simpson(coarse, 2.0 * h);
  if (!std::isfinite(body)) throw std::runtime_error("w_invariant: d_t is not finite on the grid");
  // d_t = a sqrt(t) + b t^{3/2} + O(t^{5/2}) at 0, fitted on the first two nodes.
  {
    const double t0 = w.t_grid[0], t1 = w.t_grid[1];
    const double b = (w.d_t[1] / std::sqrt(t1) - w.d_t[0] / std::sqrt(t0)) / (t1 - t0);
    const double a = w.d_t[0] / std::sqrt(t0) - b * t0;
    w.head = 2.0 * a * std::sqrt(t0) + (2.0 / 3.0) * b * t0 * std::sqrt(t0);
  }
  // Exponential fit on the last fifth of the grid.
  std::vector<double> tx, ly;
  bool same_sign = true;
  for (int i = opt.points - 1; i >= 0 && w.t_grid[i] >= 0.8 * opt.t_max; --i) {
    if (w.d_t[i] == 0.0 || (w.d_t[i] > 0) != (w.d_t.back() > 0)) same_sign = false;
    tx.push_back(w.t_grid[i]);
    ly.push_back(std::log(std::abs(w.d_t[i]) + 1e-300));
  }
  w.tail = 0.0;
  if (same_sign && tx.size() >= 3) {
    const LinearFit f = linear_fit(tx, ly);
    if (f.slope < 0.0) w.tail = w.d_t.back() / (-f.slope * opt.t_max);
  }
  // Decay fit on [t_max / 5, t_max].
  tx.clear();
  ly.clear();
  for (int i = 0; i < opt.points; ++i)
    if (w.t_grid[i] >= opt.t_max / 5.0 && w.d_t[i] != 0.0) {
      tx.push_back(w.t_grid[i]);
      ly.push_back(std::log(std::abs(w.d_t[i])));
    }
  if (tx.size() >= 3) {
    const LinearFit f = linear_fit(tx, ly);
    w.decay_rate = -f.slope;
    w.decay_amplitude = std::exp(f.intercept);
  }
  w.W_max = -(w.head + body + w.tail);
  w.error = std::abs(body - body_coarse) + opt.t_min * opt.t_min * std::abs(w.head) + std::abs(w.tail);
  for (int i = 0; i <= 20; ++i) {
    const double t = 0.1 * std::pow(100.0, i / 20.0);
    w.relation_residual = std::max(w.relation_residual, et_dt_relation_residual(tab, t));
  }
  return w;
}

Vec compact_log_inverse(const ReductiveAlgebra& alg, const Mat& k) {
  if (alg.compact_residual(k) > 1e-9) throw std::invalid_argument("compact_log_inverse: element is not in K");
  Vec z = alg.coords(linalg::logm(Mat(k.inverse())));
  z.head(alg.dim_p).setZero();
  return z;
}

cplx phase_power(cplx r, int d) {
  cplx out = 1.0;
  const bool unit = std::abs(std::abs(r) - 1.0) < 1e-9;
  const cplx base = d >= 0 ? r : 1.0 / r;
  for (int i = 1; i <= std::abs(d); ++i) {
    out *= base;
    if (unit && i % 64 == 0) out /= std::abs(out);
  }
  return out;
}

namespace {

struct ClassFixedData {
  FixedPointData fp;
  Irrep base;
};

ClassFixedData class_fixed_data(const JEvaluator& je, const Automorphism& orig, int lambda_degree) {
  const Automorphism& sig = je.sd.sigma;
  // Representation built on the ledger sigma; the fixed-point data sees rho(sigma)^j.
  ClassFixedData c;
  c.base = build_sym_irrep(je.alg, lambda_degree, orig);
  Irrep bj = c.base;
  bj.rho_sigma = c.base.rho_power_sigma(je.sd.sigma_power);
  c.fp = fixed_point_data(je.alg, sig, compact_log_inverse(je.alg, je.sd.k), bj);
  return c;
}

}  // namespace

EllipticAsymptotics elliptic_weighted_asymptotics(const JEvaluator& je, const Automorphism& orig,
                                                  int lambda_degree, double t, const std::vector<int>& d_list,
                                                  const KQuadSpec& quad) {
  if (!je.sd.elliptic()) throw std::invalid_argument("elliptic_weighted_asymptotics: class is not elliptic");
  if (d_list.empty()) throw std::invalid_argument("elliptic_weighted_asymptotics: empty degree list");
  EllipticAsymptotics out;
  out.vanishing = je.cz.delta_rank != 1;
  std::vector<cplx> r, phi;
  std::vector<double> e_half;
  if (!out.vanishing) {
    const ClassFixedData cf = class_fixed_data(je, orig, lambda_degree);
    out.n = cf.fp.n_max;
    for (int j : cf.fp.J_max) {
      const OrbitModel om = orbit_model(cf.fp, j);
      r.push_back(cf.fp.components[j].r);
      phi.push_back(cf.fp.components[j].phi);
      e_half.push_back(et_dt(je.alg, om, je.cz.basis_p_sigma, 0.5 * t).e_max);
    }
  }
  std::vector<double> ds, errs;
  for (int d : d_list) {
    if (d < 1) throw std::invalid_argument("elliptic_weighted_asymptotics: degrees must be positive");
    const Irrep E = build_sym_irrep(je.alg, lambda_degree * d, orig);
    const SupertraceResult st = derham_orbital_supertrace(je, E, t / (double(d) * d), true, quad);
    const double lhs = st.value * std::pow(double(d), -out.n - 1);
    cplx rhs = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) rhs += 2.0 * phase_power(r[j], d) * phi[j] * e_half[j];
    out.d.push_back(d);
    out.lhs.push_back(lhs);
    out.rhs.push_back(rhs.real());
    out.error.push_back(std::abs(lhs - rhs.real()));
    out.max_d_times_error = std::max(out.max_d_times_error, d * out.error.back());
    ds.push_back(d);
    errs.push_back(std::max(out.error.back(), 1e-300));
  }
  if (ds.size() >= 2) out.error_slope = loglog_slope(ds, errs);
  return out;
}

double class_torsion_integral(const JEvaluator& je, const Irrep& E, double volume, int tau_points,
                              const KQuadSpec& quad) {
  if (tau_points < 5 || tau_points % 2 == 0) throw std::invalid_argument("class_torsion_integral: tau_points must be odd");
  auto f = [&](double tau) { return derham_orbital_supertrace(je, E, tau, true, quad).value; };
  // Coarse scan to locate the support of tau -> f(tau). At large tau the explicit formula loses all
  // precision before the integrand has vanished; the scan stops at the first non-finite value.
  const double lo = std::log(1e-6), hi = std::log(1e3);
  const int nscan = 37;
  const double hs = (hi - lo) / (nscan - 1);
  std::vector<double> scan;
  double peak = 0.0;
  for (int i = 0; i < nscan; ++i) {
    const double v = f(std::exp(lo + hs * i));
    if (!std::isfinite(v)) break;
    scan.push_back(v);
    peak = std::max(peak, std::abs(v));
  }
  if (scan.empty()) throw std::runtime_error("class_torsion_integral: integrand is not finite at tau = 1e-6");
  if (peak == 0.0) return 0.0;
  const int ns = int(scan.size());
  int first = ns - 1, last = 0;
  for (int i = 0; i < ns; ++i)
    if (std::abs(scan[i]) > 1e-17 * peak) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  const bool truncated = ns < nscan && last == ns - 1;
  const double a = lo + hs * std::max(0, first - 1);
  const double b = lo + hs * std::min(ns - 1, last + 1);
  const double h = (b - a) / (tau_points - 1);
  std::vector<double> vals(tau_points);
  for (int i = 0; i < tau_points; ++i) vals[i] = f(std::exp(a + i * h));
  double total = simpson(vals, h);
  if (truncated) {
    // Exponential tail int_T^inf f(tau) dtau/tau ~ f(T) / (T rate) from the last three scan points.
    if (ns < 3) throw std::runtime_error("class_torsion_integral: integrand not resolved before overflow");
    const double f1 = scan[ns - 3], f2 = scan[ns - 2], f3 = scan[ns - 1];
    if (!(f1 * f2 > 0.0 && f2 * f3 > 0.0 && std::abs(f3) < std::abs(f2) && std::abs(f2) < std::abs(f1)))
      throw std::runtime_error("class_torsion_integral: integrand does not decay before overflow");
    const double t2 = std::exp(lo + hs * (ns - 2)), t3 = std::exp(lo + hs * (ns - 1));
    const double rate = std::log(f2 / f3) / (t3 - t2);
    total += f3 / (t3 * rate);
  }
  return -0.5 * volume * total;
}

TorsionAsymptotics torsion_leading(const CheckedLedger& ledger, int lambda_degree, const std::vector<int>& d_list,
                                   const TorsionOptions& opt) {
  TorsionAsymptotics out;
  std::vector<const LedgerClass*> hyperbolic;
  std::vector<JEvaluator> hyperbolic_je;
  for (const LedgerClass& c : ledger.classes) {
    const JEvaluator je = make_j_evaluator(ledger.alg, c.sd, c.cz);
    if (!c.sd.elliptic()) {
      hyperbolic.push_back(&c);
      hyperbolic_je.push_back(je);
      continue;
    }
    if (c.cz.delta_rank != 1) continue;
    const ClassFixedData cf = class_fixed_data(je, ledger.sigma, lambda_degree);
    ClassTorsionData td;
    td.id = c.entry.id;
    td.volume = c.entry.volume;
    td.n = cf.fp.n_max;
    for (int j : cf.fp.J_max) {
      const OrbitModel om = orbit_model(cf.fp, j);
      td.r.push_back(cf.fp.components[j].r);
      td.phi.push_back(cf.fp.components[j].phi);
      td.W_max.push_back(w_invariant(ledger.alg, om, c.cz.basis_p_sigma, opt.w).W_max);
    }
    out.E1.push_back(td.id);
    out.m_sigma = std::max(out.m_sigma, td.n);
    out.classes.push_back(td);
  }
  out.empty_case = out.E1.empty();
  std::vector<ClassTorsionData> top;
  for (const auto& td : out.classes)
    if (td.n == out.m_sigma) {
      out.E1_max.push_back(td.id);
      top.push_back(td);
    }
  out.leading = [top](int d) {
    cplx s = 0.0;
    for (const auto& td : top) {
      cplx inner = 0.0;
      for (std::size_t j = 0; j < td.r.size(); ++j) inner += phase_power(td.r[j], d) * td.phi[j] * td.W_max[j];
      s += td.volume * inner;
    }
    return s;
  };
  const int mexp = std::max(out.m_sigma, 0);
  const Automorphism& sigma = ledger.sigma;
  std::vector<double> ds, logs;
  for (int d : d_list) {
    out.d.push_back(d);
    out.leading_values.push_back(out.leading(d));
    if (!opt.nonelliptic || hyperbolic.empty()) continue;
    const Irrep E = build_sym_irrep(ledger.alg, lambda_degree * d, sigma);
    double s = 0.0;
    for (std::size_t h = 0; h < hyperbolic.size(); ++h)
      s += class_torsion_integral(hyperbolic_je[h], E, hyperbolic[h]->entry.volume, opt.tau_points, opt.quad);
    s *= std::pow(double(d), -mexp - 1);
    out.nonelliptic.push_back(s);
    if (s != 0.0) {
      ds.push_back(d);
      logs.push_back(std::log(std::abs(s)));
    }
  }
  if (ds.size() >= 2) {
    const LinearFit f = linear_fit(ds, logs);
    out.nonelliptic_rate = -f.slope;
    out.nonelliptic_log_amplitude = f.intercept;
  }
  return out;
}

}  // namespace twistorb
