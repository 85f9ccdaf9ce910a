#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace twistorb {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

namespace linalg {

/// Matrix exponential (Pade scaling and squaring); normal matrices go through an eigendecomposition.
Mat expm(const Mat& a);
RMat expm(const RMat& a);

/// Principal matrix logarithm. Throws std::runtime_error if the spectrum touches the closed negative axis.
Mat logm(const Mat& a);

/// f applied to a Hermitian matrix through its eigendecomposition.
Mat hermitian_fn(const Mat& h, const std::function<double(double)>& f);
RMat symmetric_fn(const RMat& s, const std::function<double(double)>& f);

/// Null space of a real matrix with singular values below rel_tol * max(smax, 1) counted as zero.
struct NullSpace {
  RMat basis;               ///< orthonormal columns
  double smax = 0.0;
  double gap = 0.0;         ///< ratio (smallest kept singular value) / threshold, inf when nothing kept
  double nearest = 0.0;     ///< distance in log10 of the closest singular value to the threshold
};
NullSpace null_space(const RMat& a, double rel_tol = 1e-8);

/// Orthonormal basis of the column span.
RMat orthonormal_span(const RMat& cols, double tol = 1e-10);

/// Orthonormal basis of span(ambient) minus span(sub); columns of both are orthonormal.
RMat orth_complement(const RMat& ambient, const RMat& sub, double tol = 1e-8);

/// Restriction of a linear map to a subspace: B^T M B (B orthonormal columns).
Mat restrict_to(const Mat& m, const RMat& basis);

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
/// Gauss-Hermite rule for the weight exp(-x^2).
Quadrature gauss_hermite(int n);
/// Gauss-Legendre rule on [-1, 1].
Quadrature gauss_legendre(int n);

/// Pairwise summation with a fixed recursion split.
template <typename T>
T pairwise_sum(const T* v, std::size_t n) {
  if (n == 0) return T(0);
  if (n <= 8) {
    T s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}
template <typename T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v.data(), v.size());
}

/// Kahan-Babuska compensated sum.
template <typename T>
T compensated_sum(const std::vector<T>& v) {
  T s(0), c(0);
  for (const T& x : v) {
    T t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  return s + c;
}

/// Worker count: hardware concurrency capped by TWISTORB_THREADS.
int thread_count();

/// Evaluates f(i) for i in [0, n) on a fixed block partition. Each index is written by one thread.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  const int nt = thread_count();
  if (nt <= 1 || n < 16) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + nt - 1) / nt;
  for (int w = 0; w < nt; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// sinh(x)/x evaluated stably for complex x.
cplx sinhc(cplx x);
/// sin(sqrt(w))/sqrt(w), entire in w.
cplx sinc_sqrt(cplx w);

}  // namespace linalg
}  // namespace twistorb
