#include "orbital_detail.hpp"

#include <cmath>
#include <stdexcept>

namespace twistorb {

namespace detail {

OrbitalResult integrate_orbital(const JEvaluator& je, double t, const KQuadSpec& quad, const OrbitalIntegrand& in,
                                double log_prefactor) {
  if (!in.irrep) throw std::invalid_argument("orbital integral: missing representation");
  const Irrep& E = *in.irrep;
  auto fails = std::make_shared<std::atomic<int>>(0);
  const int q = je.q();
  RayFactory ray = [&](const Vec& dir) {
    RayFunction rf;
    if (q == 0) {
      const cplx tr = in.P.trace();
      rf.f = [&je, &in, tr](double, double shift) {
        const CVec y0(0);
        cplx v = j_function(je, y0).value * tr * std::exp(-shift);
        if (in.extra) v *= in.extra(y0);
        return v;
      };
      return rf;
    }
    auto dt = std::make_shared<DirectionalTrace>(directional_trace(E, in.P, je.embed(dir)));
    rf.growth = dt->growth + j_growth(je, dir) + in.extra_growth;
    rf.f = [&je, &in, dt, dir, fails](double r, double shift) {
      const CVec y = (r * dir).cast<cplx>();
      const JValue jv = j_function(je, y);
      if (jv.branch_failures) *fails += jv.branch_failures;
      cplx v = jv.value * dt->eval(r, shift);
      if (in.extra) v *= in.extra(y);
      return v;
    };
    return rf;
  };
  const KIntegral ki = gaussian_k_integral(q, t, ray, quad, je.su2_type);
  OrbitalResult out;
  out.log_scale = ki.value.log_scale + log_prefactor;
  const double sc = std::exp(out.log_scale);
  out.value = ki.value.mantissa * sc;
  out.quad_error = ki.quad_error * sc;
  out.nodes = ki.nodes;
  out.tail_ratio = ki.tail_ratio;
  out.method = ki.method;
  out.branch_failures = *fails;
  if (out.branch_failures > 0.001 * std::max(1, out.nodes) && out.branch_failures > 0)
    throw std::runtime_error("orbital integral: branch failure density above 0.1% of nodes");
  return out;
}

}  // namespace detail

OrbitalResult heat_orbital(const JEvaluator& je, const HeatQuery& hq) {
  if (!(hq.t > 0.0)) throw std::invalid_argument("heat_orbital: t must be positive");
  if (!hq.irrep) throw std::invalid_argument("heat_orbital: missing representation");
  const Irrep& E = *hq.irrep;
  detail::OrbitalIntegrand in;
  in.irrep = &E;
  in.P = detail::twisted_action(je, E);
  if (hq.A.size() > 0) {
    if (hq.A.rows() != E.dim || hq.A.cols() != E.dim) throw std::invalid_argument("heat_orbital: A has the wrong size");
    if ((hq.A - hq.A.adjoint()).norm() > 1e-10 * std::max(1.0, hq.A.norm()))
      throw std::invalid_argument("heat_orbital: A must be self-adjoint");
    const double an = std::max(1.0, hq.A.norm());
    for (int i = je.alg.dim_p; i < je.alg.dim(); ++i) {
      const Mat& r = E.rho_basis[i];
      if ((hq.A * r - r * hq.A).norm() > 1e-10 * an * std::max(1.0, r.norm()))
        throw std::invalid_argument("heat_orbital: A does not commute with rho(K)");
    }
    const Mat& s = E.rho_sigma;
    if ((hq.A * s - s * hq.A).norm() > 1e-10 * an)
      throw std::invalid_argument("heat_orbital: A does not commute with rho(sigma)");
    const double t = hq.t;
    in.P = in.P * linalg::hermitian_fn(hq.A, [t](double x) { return std::exp(-t * x); });
  }
  return detail::integrate_orbital(je, hq.t, hq.quad, in, detail::log_gaussian_prefactor(je, hq.t));
}

}  // namespace twistorb
