#pragma once

// All-roots finder for small real polynomials: balanced companion matrix
// eigenvalues (Eigen) followed by Newton polishing.  Degrees here never
// exceed ~10, so robustness beats cleverness.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

#include "susyinv/errors.hpp"

namespace susyinv {

// Coefficients ascending: c[0] + c[1] x + ... + c[n] x^n.
inline std::complex<double> polyval(const std::vector<double>& c,
                                    std::complex<double> x) {
  std::complex<double> s = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
  return s;
}

inline std::complex<double> polyval_deriv(const std::vector<double>& c,
                                          std::complex<double> x) {
  std::complex<double> s = 0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i)
    s = s * x + static_cast<double>(i) * c[i];
  return s;
}

namespace detail {

// Parlett-Reinsch style balancing; improves eigenvalue accuracy for
// companion matrices with widely scaled coefficients.
inline void balance_companion(Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  Eigen::MatrixXd off = m;
  off.diagonal().setZero();
  bool changed = true;
  const double gamma = 0.9;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      double rn = off.row(i).lpNorm<1>();
      double cn = off.col(i).lpNorm<1>();
      if (rn == 0 || cn == 0) continue;
      int expo = 0;
      std::frexp(rn / cn, &expo);
      expo /= 2;
      if (expo != 0) {
        double sc = std::ldexp(cn, expo), sr = std::ldexp(rn, -expo);
        if (sc + sr < gamma * (cn + rn)) {
          changed = true;
          off.row(i) *= std::ldexp(1.0, -expo);
          off.col(i) *= std::ldexp(1.0, expo);
        }
      }
    }
  }
  off.diagonal() = m.diagonal();
  m = off;
}

}  // namespace detail

// All n complex roots of a degree-n polynomial with one round of Newton
// polishing per root.  Throws NumericError on eigen failure.
inline std::vector<std::complex<double>> find_polynomial_roots(
    std::vector<double> c) {
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  const int deg = static_cast<int>(c.size()) - 1;
  if (deg < 1) return {};
  if (deg == 1) return {std::complex<double>(-c[0] / c[1], 0.0)};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  companion.diagonal(-1).setOnes();
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -c[i] / c[deg];
  detail::balance_companion(companion);

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success)
    throw NumericError("companion-matrix eigenvalue extraction failed");

  std::vector<std::complex<double>> roots(deg);
  for (int i = 0; i < deg; ++i) {
    std::complex<double> z = solver.eigenvalues()(i);
    std::complex<double> d = polyval_deriv(c, z);
    if (std::abs(d) > 0) z -= polyval(c, z) / d;
    roots[i] = z;
  }
  return roots;
}

}  // namespace susyinv
