#include "twistorb/exterior.hpp"

#include <bit>
#include <stdexcept>

namespace twistorb {

ExteriorElement::ExteriorElement(int n) : n_(n) {
  if (n < 0 || n > 20) throw std::invalid_argument("ExteriorElement: generator count out of range");
  c_.assign(std::size_t(1) << n, cplx(0.0));
}

ExteriorElement ExteriorElement::scalar(int n, cplx c) {
  ExteriorElement e(n);
  e.c_[0] = c;
  return e;
}

ExteriorElement ExteriorElement::generator(int n, int i) {
  if (i < 0 || i >= n) throw std::invalid_argument("ExteriorElement: generator index out of range");
  ExteriorElement e(n);
  e.c_[std::size_t(1) << i] = 1.0;
  return e;
}

int wedge_sign(std::uint32_t a, std::uint32_t b) {
  if (a & b) return 0;
  // Moving each generator of b left past the generators of a with larger index.
  int swaps = 0;
  for (std::uint32_t bb = b; bb; bb &= bb - 1) {
    const int i = std::countr_zero(bb);
    swaps += std::popcount(a >> (i + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

ExteriorElement ExteriorElement::operator+(const ExteriorElement& o) const {
  ExteriorElement r = *this;
  r += o;
  return r;
}

ExteriorElement& ExteriorElement::operator+=(const ExteriorElement& o) {
  if (o.n_ != n_) throw std::invalid_argument("ExteriorElement: generator count mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

ExteriorElement ExteriorElement::operator-(const ExteriorElement& o) const { return *this + o * cplx(-1.0); }

ExteriorElement ExteriorElement::operator*(cplx s) const {
  ExteriorElement r = *this;
  for (auto& x : r.c_) x *= s;
  return r;
}

ExteriorElement ExteriorElement::operator*(const ExteriorElement& o) const {
  if (o.n_ != n_) throw std::invalid_argument("ExteriorElement: generator count mismatch");
  ExteriorElement r(n_);
  const std::uint32_t size = std::uint32_t(c_.size());
  for (std::uint32_t a = 0; a < size; ++a) {
    if (c_[a] == cplx(0.0)) continue;
    const std::uint32_t free = (size - 1) & ~a;
    // Enumerate submasks of the complement of a.
    for (std::uint32_t b = free;; b = (b - 1) & free) {
      if (o.c_[b] != cplx(0.0)) r.c_[a | b] += double(wedge_sign(a, b)) * c_[a] * o.c_[b];
      if (b == 0) break;
    }
  }
  return r;
}

ExteriorElement ExteriorElement::degree_part(int d) const {
  ExteriorElement r(n_);
  for (std::size_t i = 0; i < c_.size(); ++i)
    if (std::popcount(std::uint32_t(i)) == d) r.c_[i] = c_[i];
  return r;
}

bool ExteriorElement::is_even() const {
  for (std::size_t i = 0; i < c_.size(); ++i)
    if ((std::popcount(std::uint32_t(i)) & 1) && c_[i] != cplx(0.0)) return false;
  return true;
}

double ExteriorElement::norm() const {
  double s = 0.0;
  for (const auto& x : c_) s += std::norm(x);
  return std::sqrt(s);
}

ExteriorElement ExteriorElement::exp() const {
  const cplx c0 = c_[0];
  ExteriorElement nil = *this;
  nil.c_[0] = 0.0;
  ExteriorElement term = scalar(n_, 1.0), sum = scalar(n_, 1.0);
  for (int k = 1; k <= n_; ++k) {
    term = term * nil * cplx(1.0 / k);
    if (term.norm() == 0.0) break;
    sum += term;
  }
  return sum * std::exp(c0);
}

ExteriorElement pfaffian(const std::vector<std::vector<ExteriorElement>>& a) {
  const int n = int(a.size());
  if (n == 0) throw std::invalid_argument("pfaffian: empty matrix needs a generator count");
  const int g = a[0][0].generators();
  if (n % 2) return ExteriorElement(g);
  if (n == 2) return a[0][1];
  ExteriorElement r(g);
  for (int j = 1; j < n; ++j) {
    std::vector<int> keep;
    for (int i = 1; i < n; ++i)
      if (i != j) keep.push_back(i);
    std::vector<std::vector<ExteriorElement>> sub(keep.size(), std::vector<ExteriorElement>(keep.size()));
    for (std::size_t x = 0; x < keep.size(); ++x)
      for (std::size_t y = 0; y < keep.size(); ++y) sub[x][y] = a[keep[x]][keep[y]];
    const double sign = (j % 2) ? 1.0 : -1.0;
    r += a[0][j] * pfaffian(sub) * cplx(sign);
  }
  return r;
}

cplx pfaffian(const Mat& a) {
  const int n = int(a.rows());
  if (n == 0) return 1.0;
  if (n % 2) return 0.0;
  std::vector<std::vector<ExteriorElement>> e(n, std::vector<ExteriorElement>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e[i][j] = ExteriorElement::scalar(0, a(i, j));
  return pfaffian(e).scalar_part();
}

}  // namespace twistorb
