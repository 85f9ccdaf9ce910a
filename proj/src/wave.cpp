#include "orbital_detail.hpp"

#include <cmath>
#include <stdexcept>

namespace twistorb {

namespace {

constexpr double kBumpMass = 0.44399381616807943;  // int_{-1}^{1} exp(-1/(1-u^2)) du

double profile(WaveWindow::Kind kind, double u) {
  if (kind == WaveWindow::Kind::Gaussian) return std::exp(-0.5 * u * u) / std::sqrt(2.0 * kPi);
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u)) / kBumpMass;
}

double profile_derivative(WaveWindow::Kind kind, double u) {
  if (kind == WaveWindow::Kind::Gaussian) return -u * profile(kind, u);
  if (std::abs(u) >= 1.0) return 0.0;
  const double d = 1.0 - u * u;
  return profile(kind, u) * (-2.0 * u / (d * d));
}

/// Composite Gauss-Legendre on [lo, hi].
template <typename F>
double composite_gl(F&& f, double lo, double hi, int panels, int order) {
  if (hi <= lo) return 0.0;
  const linalg::Quadrature gl = linalg::gauss_legendre(order);
  const double h = (hi - lo) / panels;
  std::vector<double> terms;
  terms.reserve(std::size_t(panels) * gl.nodes.size());
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) terms.push_back(0.5 * h * gl.weights[i] * f(a + 0.5 * h * (gl.nodes[i] + 1.0)));
  }
  return linalg::pairwise_sum(terms);
}

}  // namespace

double WaveWindow::mu_hat(double s) const {
  if (!(width > 0.0)) throw std::invalid_argument("WaveWindow: width must be positive");
  return 0.5 * (profile(kind, (s - center) / width) + profile(kind, (s + center) / width)) / width;
}

double WaveWindow::mu_hat_derivative(double s) const {
  return 0.5 * (profile_derivative(kind, (s - center) / width) + profile_derivative(kind, (s + center) / width)) /
         (width * width);
}

double WaveWindow::reach() const { return std::abs(center) + (kind == Kind::Gaussian ? 12.0 : 1.0) * width; }

double euclidean_wave_kernel(const WaveWindow& w, int r, double rho) {
  rho = std::abs(rho);
  const double s2 = std::sqrt(2.0);
  // mu(sqrt(-Delta/2)) on R: K_1(x) = sqrt2 mu_hat(sqrt2 x), K_1'(x) = 2 mu_hat'(sqrt2 x).
  auto k1p = [&](double x) { return 2.0 * w.mu_hat_derivative(s2 * x); };
  const double xmax = w.reach() / s2;
  switch (r) {
    case 1:
      return s2 * w.mu_hat(s2 * rho);
    case 2: {
      if (rho >= xmax) return 0.0;
      const double vmax = std::sqrt(xmax * xmax - rho * rho);
      auto f = [&](double v) {
        const double u = std::sqrt(rho * rho + v * v);
        return k1p(u) / u;
      };
      return -composite_gl(f, 0.0, vmax, 64, 16) / kPi;
    }
    case 3: {
      if (rho >= xmax) return 0.0;
      const double x = std::max(rho, 1e-7);
      return -k1p(x) / (2.0 * kPi * x);
    }
    default:
      throw std::invalid_argument("euclidean_wave_kernel: dim z_sigma(gamma) must be 1, 2 or 3");
  }
}

WaveProbeResult wave_support_probe(const JEvaluator& je, const Irrep& E, const WaveWindow& window) {
  WaveProbeResult out;
  const int p = je.p(), q = je.q();
  const int r = p + q;
  out.euclidean_dim = r;
  const double a = je.sd.a.norm();
  const double s2 = std::sqrt(2.0);
  out.support_gap = s2 * a - window.reach();
  const double lo = std::abs(window.center) - (window.kind == WaveWindow::Kind::Gaussian ? 12.0 : 1.0) * window.width;
  out.overlaps_singular_support = a > 0.0 && lo < s2 * a && window.reach() > s2 * a;
  if (r == 0) {
    // R^0: mu(0) = int mu_hat = 1.
    out.value = j_function(je, CVec(0)).value * detail::twisted_action(je, E).trace();
    return out;
  }
  const double xmax = window.reach() / s2;
  if (a >= xmax) {
    out.value = 0.0;
    return out;
  }
  const Mat P = detail::twisted_action(je, E);
  auto integrand = [&](const Vec& y) -> cplx {
    const double rho = std::sqrt(a * a + y.squaredNorm());
    const double k = euclidean_wave_kernel(window, r, rho);
    if (k == 0.0) return 0.0;
    const CVec yc = y.cast<cplx>();
    const cplx chi = (P * linalg::expm(Mat(cplx(0.0, -1.0) * E.rho_algebra(je.embed(y))))).trace();
    return j_function(je, yc).value * chi * k;
  };
  if (q == 0) {
    out.value = integrand(Vec(0));
    return out;
  }
  const double ymax = std::sqrt(xmax * xmax - a * a);
  auto run = [&](int order) -> cplx {
    const int panels = 24;
    const linalg::Quadrature gl = linalg::gauss_legendre(order);
    if (q == 1 || (q == 3 && je.su2_type)) {
      const double lo_y = q == 1 ? -ymax : 0.0;
      const double h = (ymax - lo_y) / panels;
      std::vector<cplx> terms(std::size_t(panels) * gl.nodes.size());
      linalg::parallel_for(terms.size(), [&](std::size_t idx) {
        const std::size_t pi = idx / gl.nodes.size(), i = idx % gl.nodes.size();
        const double y = lo_y + pi * h + 0.5 * h * (gl.nodes[i] + 1.0);
        Vec v = Vec::Zero(q);
        v(0) = y;
        cplx f = integrand(v) * (0.5 * h * gl.weights[i]);
        if (q == 3) f *= 4.0 * kPi * y * y;
        terms[idx] = f;
      });
      return linalg::pairwise_sum(terms);
    }
    // Tensor Gauss-Legendre on the cube [-ymax, ymax]^q.
    const int n1 = int(gl.nodes.size()) * 4;
    const linalg::Quadrature g1 = linalg::gauss_legendre(n1);
    std::size_t total = 1;
    for (int i = 0; i < q; ++i) total *= std::size_t(n1);
    std::vector<cplx> terms(total);
    linalg::parallel_for(total, [&](std::size_t idx) {
      std::size_t rem = idx;
      Vec v(q);
      double w = 1.0;
      for (int d = 0; d < q; ++d) {
        const int i = int(rem % std::size_t(n1));
        rem /= std::size_t(n1);
        v(d) = ymax * g1.nodes[i];
        w *= ymax * g1.weights[i];
      }
      terms[idx] = integrand(v) * w;
    });
    return linalg::pairwise_sum(terms);
  };
  const cplx hi = run(16);
  const cplx lo_v = run(12);
  out.value = hi;
  out.quad_error = std::abs(hi - lo_v);
  return out;
}

}  // namespace twistorb
