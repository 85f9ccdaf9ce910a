#pragma once

#include "twistorb/linalg.hpp"

#include <cstdint>
#include <vector>

namespace twistorb {

/// Element of the complex Grassmann algebra on n generators, stored densely over the 2^n monomials.
///
/// Monomial bit b set means generator b is present; products are ordered by increasing generator index.
class ExteriorElement {
 public:
  ExteriorElement() = default;
  explicit ExteriorElement(int n);
  static ExteriorElement scalar(int n, cplx c);
  static ExteriorElement generator(int n, int i);

  int generators() const { return n_; }
  cplx& operator[](std::uint32_t mask) { return c_[mask]; }
  cplx operator[](std::uint32_t mask) const { return c_[mask]; }
  const std::vector<cplx>& coefficients() const { return c_; }

  ExteriorElement operator+(const ExteriorElement& o) const;
  ExteriorElement operator-(const ExteriorElement& o) const;
  ExteriorElement operator*(const ExteriorElement& o) const;
  ExteriorElement operator*(cplx s) const;
  ExteriorElement& operator+=(const ExteriorElement& o);

  cplx scalar_part() const { return c_[0]; }
  /// Coefficient of the top monomial e^0 e^1 ... e^{n-1}.
  cplx top() const { return c_.back(); }
  /// Part of degree exactly d.
  ExteriorElement degree_part(int d) const;
  bool is_even() const;
  double norm() const;

  /// exp of an element; the nilpotent part is expanded by its (finite) power series.
  ExteriorElement exp() const;

 private:
  int n_ = 0;
  std::vector<cplx> c_;
};

/// Sign of e^A e^B relative to the sorted monomial e^{A|B}; 0 when A and B overlap.
int wedge_sign(std::uint32_t a, std::uint32_t b);

/// Pfaffian of an antisymmetric matrix whose entries are even (commuting) elements, n even.
ExteriorElement pfaffian(const std::vector<std::vector<ExteriorElement>>& a);
/// Pfaffian of a complex antisymmetric matrix.
cplx pfaffian(const Mat& a);

}  // namespace twistorb
