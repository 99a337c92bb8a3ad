#pragma once

#include <complex>
#include <vector>

namespace clsid {

/// Polynomial with real coefficients in descending powers of s.
using Polynomial = std::vector<double>;

/// Evaluates @p p at the complex point @p s (Horner).
std::complex<double> polyval(const Polynomial& p, std::complex<double> s);

/// Product of two polynomials.
Polynomial polymul(const Polynomial& a, const Polynomial& b);

/// Monic real polynomial whose roots are @p roots. Complex roots must come
/// in conjugate pairs; imaginary residue of the expansion is discarded.
Polynomial poly_from_roots(const std::vector<std::complex<double>>& roots);

/// Roots of @p p via eigenvalues of its companion matrix, polished with a
/// Newton step when that lowers the residual.
std::vector<std::complex<double>> roots(const Polynomial& p);

/// Continuous-time, strictly proper SISO transfer function num(s)/den(s).
///
/// Leading zeros are stripped and the denominator is normalized to be monic
/// on construction. No pole/zero cancellation is ever performed.
class TransferFunction {
 public:
  TransferFunction(Polynomial num, Polynomial den);

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  /// Number of poles (degree of the denominator).
  int order() const { return static_cast<int>(den_.size()) - 1; }
  /// Degree of the numerator; -1 encodes the zero transfer function.
  int num_degree() const;

  std::complex<double> evaluate(std::complex<double> s) const;
  /// H(0). Infinite when the denominator has a root at the origin.
  double dc_gain() const;

  friend bool operator==(const TransferFunction&, const TransferFunction&) = default;

 private:
  Polynomial num_;
  Polynomial den_;
};

}  // namespace clsid
