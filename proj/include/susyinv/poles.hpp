#pragma once

// Pole algebra: the polynomial whose roots locate the S-matrix poles
// k = i kappa_j, robust all-roots extraction, the l-dependent sum rules,
// and the arctangent phase-shift sum.

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <sstream>
#include <vector>

#include "susyinv/erf.hpp"
#include "susyinv/roots.hpp"
#include "susyinv/types.hpp"

namespace susyinv {

struct PolePolynomial {
  std::vector<double> coeffs;  // ascending in kappa
  int degree = 0;              // max(2M, 2N+2l+1)
  bool degenerate = false;     // leading coefficient vanished
  int reduced_degree = 0;      // actual degree when degenerate
};

// f(kappa) = P(-kappa^2) - (-1)^(l+1) kappa^(2l+1) Q(-kappa^2).
inline PolePolynomial pole_polynomial(const ErfModel& model) {
  model.validate();
  const int l = model.l.l;
  const int M = model.order_m(), N = model.order_n();
  const int n = std::max(2 * M, 2 * N + 2 * l + 1);

  PolePolynomial out;
  out.degree = n;
  out.coeffs.assign(n + 1, 0.0);
  for (int m = 0; m <= M; ++m)
    out.coeffs[2 * m] += (m % 2 ? -1.0 : 1.0) * model.p[m];
  const double s = (l % 2 == 0 ? 1.0 : -1.0);  // -(-1)^(l+1) = (-1)^l
  for (int m = 0; m <= N; ++m)
    out.coeffs[2 * m + 2 * l + 1] += s * (m % 2 ? -1.0 : 1.0) * model.q[m];

  double scale = 0;
  for (double c : out.coeffs) scale = std::max(scale, std::abs(c));
  if (std::abs(out.coeffs[n]) <= 1e-14 * scale) {
    out.degenerate = true;
    int d = n;
    while (d > 0 && std::abs(out.coeffs[d]) <= 1e-14 * scale) --d;
    out.reduced_degree = d;
  } else {
    out.reduced_degree = n;
  }
  return out;
}

struct PoleExtractionReport {
  std::vector<std::complex<double>> all_roots;
  std::vector<double> real_poles;                   // imaginary-axis S-poles
  std::vector<std::complex<double>> complex_poles;  // flagged, not usable
  std::vector<double> residuals;      // |f(root)| / |leading coefficient|
  std::vector<double> sum_rule_res;   // over real poles, alpha = 1,3,..,2l-1
  bool symmetry_ok = true;            // conjugate pairing of complex roots
  bool has_complex = false;
  PoleSet pole_set(PartialWave l) const {
    return PoleSet(l, real_poles, PoleProvenance::ExtractedFromErf);
  }
};

inline std::vector<double> sum_rule_residuals(const PoleSet& poles);

// All n roots of the pole polynomial, classified and verified.
inline PoleExtractionReport extract_poles(const ErfModel& model) {
  auto poly = pole_polynomial(model);
  if (poly.degenerate) {
    std::ostringstream os;
    os << "degenerate pole polynomial: leading coefficient vanishes, degree "
       << poly.degree << " reduces to " << poly.reduced_degree;
    throw NumericError(os.str());
  }
  auto roots = find_polynomial_roots(poly.coeffs);

  PoleExtractionReport rep;
  const double lead = std::abs(poly.coeffs.back());
  for (auto z : roots) {
    // snap to real when the imaginary part is rounding noise
    if (std::abs(z.imag()) < 1e-8 * (1.0 + std::abs(z.real())))
      z = {z.real(), 0.0};
    rep.all_roots.push_back(z);
    double res = std::abs(polyval(poly.coeffs, z)) / lead;
    rep.residuals.push_back(res);
    if (res > 1e-8)
      throw NumericError("pole root residual " + std::to_string(res) +
                         " exceeds tolerance for polynomial of degree " +
                         std::to_string(poly.degree));
    if (z.imag() == 0.0)
      rep.real_poles.push_back(z.real());
    else
      rep.complex_poles.push_back(z);
  }
  rep.has_complex = !rep.complex_poles.empty();

  // complex roots of a real polynomial pair up as (kappa, conj kappa),
  // i.e. k-plane poles mirror-symmetric about the imaginary axis
  std::vector<bool> used(rep.complex_poles.size(), false);
  for (std::size_t i = 0; i < rep.complex_poles.size(); ++i) {
    if (used[i]) continue;
    bool found = false;
    for (std::size_t j = i + 1; j < rep.complex_poles.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(rep.complex_poles[j] - std::conj(rep.complex_poles[i])) <
          1e-8 * (1.0 + std::abs(rep.complex_poles[i]))) {
        used[i] = used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) rep.symmetry_ok = false;
  }

  std::sort(rep.real_poles.begin(), rep.real_poles.end());
  if (model.l.l > 0 && !rep.has_complex) {
    PoleSet ps(model.l, rep.real_poles, PoleProvenance::ExtractedFromErf);
    rep.sum_rule_res = sum_rule_residuals(ps);
  }
  return rep;
}

// sum_j kappa_j^(-alpha) for alpha = 1, 3, ..., 2l-1; empty for l = 0.
inline std::vector<double> sum_rule_residuals(const PoleSet& poles) {
  poles.validate();
  std::vector<double> out;
  for (int alpha = 1; alpha <= 2 * poles.l.l - 1; alpha += 2) {
    long double s = 0.0L;
    for (double k : poles.kappas) s += std::pow(1.0L / k, alpha);
    out.push_back(static_cast<double>(s));
  }
  return out;
}

// delta(k) = -sum_j arctan(k / kappa_j); exact at k = 0.
inline std::vector<double> delta_from_poles(const PoleSet& poles,
                                            std::span<const double> k_grid) {
  poles.validate();
  std::vector<double> out;
  out.reserve(k_grid.size());
  for (double k : k_grid) {
    if (k < 0) throw DomainError("delta_from_poles requires k >= 0");
    double d = 0;
    for (double kj : poles.kappas) d -= std::atan(k / kj);
    out.push_back(d);
  }
  return out;
}

inline double delta_from_poles(const PoleSet& poles, double k) {
  return delta_from_poles(poles, std::span<const double>(&k, 1))[0];
}

struct PoleSetValidation {
  bool valid = true;
  std::vector<std::string> problems;
  int n_positive = 0;
  int n_negative = 0;
  double high_energy_limit = 0;  // -(pi/2) (n+ - n-)
  std::vector<double> sum_rule_res;
};

struct PoleTolerances {
  // published 4-digit values satisfy the sum rules only to their printed
  // precision; internally generated sets must be much tighter
  double sum_rule = 1e-2;
};

inline PoleSetValidation validate_pole_set(const PoleSet& poles,
                                           PoleTolerances tol = {}) {
  PoleSetValidation v;
  for (double k : poles.kappas) {
    if (k == 0.0 || !std::isfinite(k)) {
      v.valid = false;
      v.problems.push_back("zero or non-finite pole parameter");
      return v;
    }
  }
  v.n_positive = poles.n_positive();
  v.n_negative = poles.n_negative();
  v.high_energy_limit = -M_PI_2 * (v.n_positive - v.n_negative);
  if (poles.l.l > 0) {
    v.sum_rule_res = sum_rule_residuals(poles);
    for (std::size_t i = 0; i < v.sum_rule_res.size(); ++i) {
      if (std::abs(v.sum_rule_res[i]) > tol.sum_rule) {
        v.valid = false;
        std::ostringstream os;
        os << "sum rule alpha = " << (2 * i + 1) << " violated: residual "
           << v.sum_rule_res[i];
        v.problems.push_back(os.str());
      }
    }
  }
  return v;
}

}  // namespace susyinv
