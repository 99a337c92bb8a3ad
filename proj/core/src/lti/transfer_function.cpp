#include "clsid/lti/transfer_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "clsid/error.hpp"

namespace clsid {

namespace {

Polynomial strip_leading_zeros(Polynomial p) {
  auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
  if (first == p.end()) return {0.0};
  p.erase(p.begin(), first);
  return p;
}

std::complex<double> polyder_val(const Polynomial& p, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  const int n = static_cast<int>(p.size()) - 1;
  for (int i = 0; i < n; ++i) {
    acc = acc * s + static_cast<double>(n - i) * p[i];
  }
  return acc;
}

}  // namespace

std::complex<double> polyval(const Polynomial& p, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (double c : p) acc = acc * s + c;
  return acc;
}

Polynomial polymul(const Polynomial& a, const Polynomial& b) {
  if (a.empty() || b.empty()) return {};
  Polynomial out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Polynomial poly_from_roots(const std::vector<std::complex<double>>& rts) {
  std::vector<std::complex<double>> acc{1.0};
  for (const auto& r : rts) {
    std::vector<std::complex<double>> next(acc.size() + 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i];
      next[i + 1] -= acc[i] * r;
    }
    acc = std::move(next);
  }
  Polynomial out(acc.size());
  std::transform(acc.begin(), acc.end(), out.begin(),
                 [](std::complex<double> c) { return c.real(); });
  return out;
}

std::vector<std::complex<double>> roots(const Polynomial& p_in) {
  Polynomial p = strip_leading_zeros(p_in);
  const int n = static_cast<int>(p.size()) - 1;
  if (n <= 0) return {};

  // Trailing zero coefficients are exact roots at the origin.
  int zero_roots = 0;
  while (n - zero_roots > 0 && p[n - zero_roots] == 0.0) ++zero_roots;
  const int m = n - zero_roots;

  std::vector<std::complex<double>> out;
  out.reserve(n);
  if (m > 0) {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) companion(0, j) = -p[j + 1] / p[0];
    for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    const Eigen::VectorXcd eig = solver.eigenvalues();
    for (int i = 0; i < m; ++i) {
      std::complex<double> r = eig(i);
      const double before = std::abs(polyval(p, r));
      const std::complex<double> d = polyder_val(p, r);
      if (std::abs(d) > 0.0) {
        const std::complex<double> polished = r - polyval(p, r) / d;
        if (std::abs(polyval(p, polished)) < before) r = polished;
      }
      out.push_back(r);
    }
  }
  for (int i = 0; i < zero_roots; ++i) out.emplace_back(0.0, 0.0);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

TransferFunction::TransferFunction(Polynomial num, Polynomial den) {
  if (den.empty() || std::all_of(den.begin(), den.end(), [](double c) { return c == 0.0; })) {
    throw StructuralError("transfer function denominator is the zero polynomial");
  }
  for (double c : num) {
    if (!std::isfinite(c)) throw StructuralError("non-finite numerator coefficient");
  }
  for (double c : den) {
    if (!std::isfinite(c)) throw StructuralError("non-finite denominator coefficient");
  }
  if (num.empty()) num = {0.0};
  den_ = strip_leading_zeros(std::move(den));
  num_ = strip_leading_zeros(std::move(num));
  const double lead = den_.front();
  for (double& c : den_) c /= lead;
  for (double& c : num_) c /= lead;
  if (den_.size() < 2) {
    throw StructuralError("transfer function must have at least one pole");
  }
  if (num_degree() >= order()) {
    throw StructuralError("transfer function is not strictly proper (deg num >= deg den)");
  }
}

int TransferFunction::num_degree() const {
  if (num_.size() == 1 && num_[0] == 0.0) return -1;
  return static_cast<int>(num_.size()) - 1;
}

std::complex<double> TransferFunction::evaluate(std::complex<double> s) const {
  return polyval(num_, s) / polyval(den_, s);
}

double TransferFunction::dc_gain() const {
  const double d0 = den_.back();
  const double n0 = num_.back();
  if (d0 == 0.0) return n0 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return n0 / d0;
}

}  // namespace clsid
