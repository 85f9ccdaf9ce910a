#include "twistorb/orbital.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twistorb {

namespace {

struct LineRule {
  std::vector<double> r;
  std::vector<double> w;  ///< includes exp(+r^2/2t) undoing, see line_rule
  bool gaussian_in_weight = true;
};

/// Nodes/weights for Int_R F(r) wpoly(r) e^{-r^2/2t} dr / sqrt(2 pi t).
/// Gauss-Hermite rules carry the Gaussian in the weights; window rules do not.
LineRule line_rule(double t, double growth, const KQuadSpec& spec, int order, bool& windowed) {
  LineRule lr;
  const double peak = growth * std::sqrt(t / 2.0);
  windowed = peak > spec.gh_peak_limit;
  if (!windowed) {
    const linalg::Quadrature gh = linalg::gauss_hermite(order);
    const double sc = std::sqrt(2.0 * t);
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
      lr.r.push_back(sc * gh.nodes[i]);
      lr.w.push_back(gh.weights[i] / std::sqrt(kPi));
    }
    return lr;
  }
  lr.gaussian_in_weight = false;
  const double st = std::sqrt(t);
  const double half = growth * t + 12.0 * st;
  const int panels = std::max(8, int(std::ceil(2.0 * half / st)));
  const double h = 2.0 * half / panels;
  const int po = std::max(4, order * spec.window_panel_order / std::max(1, spec.order));
  const linalg::Quadrature gl = linalg::gauss_legendre(po);
  for (int p = 0; p < panels; ++p) {
    const double lo = -half + p * h;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      lr.r.push_back(lo + 0.5 * h * (gl.nodes[i] + 1.0));
      lr.w.push_back(0.5 * h * gl.weights[i] / std::sqrt(2.0 * kPi * t));
    }
  }
  return lr;
}

struct LineSum {
  cplx value = 0.0;
  double magnitude = 0.0;  ///< sum of |terms|
  double tail = 0.0;
  int nodes = 0;
};

LineSum line_sum(const RayFunction& rf, double t, const KQuadSpec& spec, int order, bool radial, double shift,
                 bool& windowed) {
  const LineRule lr = line_rule(t, rf.growth, spec, order, windowed);
  const std::size_t n = lr.r.size();
  std::vector<cplx> terms(n);
  linalg::parallel_for(n, [&](std::size_t i) {
    const double r = lr.r[i];
    if (lr.w[i] == 0.0) {
      terms[i] = 0.0;
      return;
    }
    const double extra = lr.gaussian_in_weight ? shift : shift + r * r / (2.0 * t);
    cplx v = rf.f(r, extra) * lr.w[i];
    if (radial) v *= r * r / t;
    terms[i] = v;
  });
  LineSum ls;
  ls.value = linalg::pairwise_sum(terms);
  double mx = 0.0;
  for (const auto& v : terms) {
    mx = std::max(mx, std::abs(v));
    ls.magnitude += std::abs(v);
  }
  const double edge = std::max(std::abs(terms.front()), std::abs(terms.back()));
  ls.tail = mx > 0.0 ? edge / mx : 0.0;
  ls.nodes = int(n);
  return ls;
}

}  // namespace

KIntegral gaussian_k_integral(int q, double t, const RayFactory& ray, const KQuadSpec& spec, bool su2_type) {
  if (!(t > 0.0)) throw std::invalid_argument("gaussian_k_integral: t must be positive");
  if (spec.order < 4) throw std::invalid_argument("gaussian_k_integral: quadrature order must be >= 4");
  KIntegral out;
  if (q == 0) {
    const RayFunction rf = ray(Vec(0));
    out.value.mantissa = rf.f(0.0, 0.0);
    out.nodes = 1;
    out.method = "point";
    return out;
  }
  if (q == 1 || (q == 3 && su2_type && spec.weyl_reduction)) {
    Vec dir = Vec::Zero(q);
    dir(0) = 1.0;
    const RayFunction rf = ray(dir);
    const bool radial = q == 3;
    // The Gauss-Hermite path keeps exponents small; shift only in the window regime.
    const double peak = rf.growth * std::sqrt(t / 2.0);
    const double s = peak > spec.gh_peak_limit ? 0.5 * rf.growth * rf.growth * t : 0.0;
    int order = spec.order;
    bool win_hi = false, win_lo = false;
    LineSum lo = line_sum(rf, t, spec, std::max(4, (3 * order) / 4), radial, s, win_lo);
    LineSum hi = line_sum(rf, t, spec, order, radial, s, win_hi);
    // Exact zeros of the integral only need the error to be small against the integrand mass.
    auto converged = [&] {
      const double err = std::abs(hi.value - lo.value);
      return err <= spec.rel_tol * std::abs(hi.value) || err <= 1e-15 * hi.magnitude;
    };
    while (!converged() && 2 * order <= spec.max_order) {
      order *= 2;
      lo = line_sum(rf, t, spec, std::max(4, (3 * order) / 4), radial, s, win_lo);
      hi = line_sum(rf, t, spec, order, radial, s, win_hi);
    }
    out.value = {hi.value, s};
    out.quad_error = std::abs(hi.value - lo.value);
    out.tail_ratio = hi.tail;
    out.nodes = hi.nodes;
    out.method = std::string(radial ? "weyl-radial" : "line") + (win_hi ? "-window" : "-hermite");
    return out;
  }
  const int low = std::max(4, (3 * spec.order) / 4);
  if (q > 3) throw std::invalid_argument("gaussian_k_integral: dim k_sigma(gamma) > 3 is not supported");
  // Tensor Gauss-Hermite.
  auto tensor = [&](int order, double& tail, int& nodes) {
    const linalg::Quadrature gh = linalg::gauss_hermite(order);
    const int n1 = int(gh.nodes.size());
    std::size_t total = 1;
    for (int i = 0; i < q; ++i) total *= std::size_t(n1);
    std::vector<cplx> terms(total);
    const double sc = std::sqrt(2.0 * t);
    linalg::parallel_for(total, [&](std::size_t idx) {
      std::size_t rem = idx;
      Vec y(q);
      double w = 1.0;
      for (int a = 0; a < q; ++a) {
        const int i = int(rem % std::size_t(n1));
        rem /= std::size_t(n1);
        y(a) = sc * gh.nodes[i];
        w *= gh.weights[i] / std::sqrt(kPi);
      }
      if (w == 0.0) {
        terms[idx] = 0.0;
        return;
      }
      const double r = y.norm();
      Vec dir = Vec::Zero(q);
      if (r > 0.0)
        dir = y / r;
      else
        dir(0) = 1.0;
      const RayFunction rf = ray(dir);
      terms[idx] = rf.f(r, 0.0) * w;
    });
    double mx = 0.0;
    for (const auto& v : terms) mx = std::max(mx, std::abs(v));
    tail = mx > 0.0 ? std::abs(terms.front()) / mx : 0.0;
    nodes = int(total);
    return linalg::pairwise_sum(terms);
  };
  double tail_hi = 0.0, tail_lo = 0.0;
  int nodes_hi = 0, nodes_lo = 0;
  const cplx hi = tensor(spec.order, tail_hi, nodes_hi);
  const cplx lo = tensor(low, tail_lo, nodes_lo);
  out.value = {hi, 0.0};
  out.quad_error = std::abs(hi - lo);
  out.tail_ratio = tail_hi;
  out.nodes = nodes_hi;
  out.method = "tensor-hermite";
  return out;
}

}  // namespace twistorb
