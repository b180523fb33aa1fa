#pragma once

// Effective-range-function operations: K(k^2) = k^(2l+1) cot(delta),
// conversions among K, delta and S, and the exact rational reconstruction
// of K from an S-matrix pole set.
//
// Sign conventions used everywhere in this library:
//   S(k) = e^{2 i delta(k)},  delta(k) = -sum_j arctan(k / kappa_j),
//   S(k) = A(k)/B(k)  with  A = prod(kappa_j - ik), B = prod(kappa_j + ik),
// which is consistent with K = -kappa for a single pole and with
// delta(0) = 0 for any pole count.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "susyinv/types.hpp"

namespace susyinv {

// k^(2l+1) * cot(delta).  Poles of K (delta = 0 mod pi) are rejected.
inline double K_from_delta(double k, double delta, PartialWave l) {
  if (!(k > 0)) throw DomainError("K_from_delta requires k > 0");
  double s = std::sin(delta);
  if (std::abs(s) < 1e-12)
    throw DomainError("K has a pole where delta = 0 (mod pi)");
  return std::pow(k, 2 * l.l + 1) * std::cos(delta) / s;
}

// S(k) = (K + i k^(2l+1)) / (K - i k^(2l+1)); unitary for real K.
inline std::complex<double> s_matrix_from_model(const ErfModel& model, double k) {
  if (!(k > 0)) throw DomainError("s_matrix_from_model requires k > 0");
  const double x = k * k;
  const double kp = std::pow(k, 2 * model.l.l + 1);
  const double K = model.eval(x);
  if (!std::isfinite(K) && std::abs(model.eval_q(x)) > 0)
    throw NumericError("ERF model evaluated to a non-finite value at k = " +
                       std::to_string(k));
  // Work with P, Q directly so K-poles (Q = 0) stay finite.
  const double P = model.eval_p(x), Q = model.eval_q(x);
  const std::complex<double> num(P, kp * Q), den(P, -kp * Q);
  if (std::abs(den) == 0.0)
    throw NumericError("S-matrix pole on the real k-axis (unphysical input)");
  return num / den;
}

// Continuous phase-shift branch on a strictly increasing positive grid,
// anchored to delta -> 0 as k -> 0 and unwrapped mod pi along the grid.
inline std::vector<double> delta_from_model(const ErfModel& model,
                                            std::span<const double> k_grid) {
  model.validate();
  std::vector<double> out;
  out.reserve(k_grid.size());
  double prev_k = 0;
  for (double k : k_grid) {
    if (!(k > prev_k))
      throw DomainError("k grid must be strictly increasing and positive");
    prev_k = k;
    const double x = k * k;
    const double P = model.eval_p(x), Q = model.eval_q(x);
    if (!std::isfinite(P) || !std::isfinite(Q))
      throw NumericError("ERF model evaluated to a non-finite value at k = " +
                         std::to_string(k));
    const double kp = std::pow(k, 2 * model.l.l + 1);
    double d = std::atan2(kp * Q, P);  // cot(delta) = P / (k^(2l+1) Q)
    if (out.empty()) {
      // first point: reduce to the branch contiguous with delta(0) = 0
      while (d > M_PI / 2) d -= M_PI;
      while (d <= -M_PI / 2) d += M_PI;
    } else {
      double ref = out.back();
      d += M_PI * std::round((ref - d) / M_PI);
      if (std::abs(d - ref) >= M_PI / 2)
        throw NumericError(
            "phase unwrap ambiguity: k grid too coarse near k = " +
            std::to_string(k));
    }
    out.push_back(d);
  }
  return out;
}

// Leading Taylor parameters: K = -1/a + (r/2) k^2 - P r^3 k^4 + ...
inline EreParameters ere_parameters(const ErfModel& model) {
  model.validate();
  if (model.kind != ErfKind::Taylor || model.order_n() != 0)
    throw DomainError("ERE parameters are defined for Taylor models");
  if (model.order_m() < 2)
    throw DomainError("ERE parameters need a Taylor model of order M >= 2");
  if (model.p[0] == 0.0)
    throw DomainError("infinite scattering length: p0 = 0");
  EreParameters out;
  out.a = -1.0 / model.p[0];
  out.r = 2.0 * model.p[1];
  const double r3 = out.r * out.r * out.r;
  if (model.p[2] == 0.0 && r3 == 0.0) {
    out.P = 0.0;  // degenerate 0/0 shape term
    out.shape_degenerate = true;
  } else {
    out.P = -model.p[2] / r3;
  }
  return out;
}

inline ErfModel taylor_from_ere(PartialWave l, double a, double r, double P) {
  if (a == 0.0) throw DomainError("scattering length must be nonzero");
  return ErfModel(l, {-1.0 / a, r / 2.0, -P * r * r * r});
}

namespace detail {

// Elementary symmetric polynomials e_0..e_n accumulated in extended
// precision; the alternating-sign assembly below is cancellation-prone for
// mixed-sign pole sets.
inline std::vector<long double> elementary_symmetric(std::span<const double> xs) {
  std::vector<long double> e(xs.size() + 1, 0.0L);
  e[0] = 1.0L;
  std::size_t used = 0;
  for (double x : xs) {
    ++used;
    for (std::size_t m = used; m >= 1; --m)
      e[m] += static_cast<long double>(x) * e[m - 1];
  }
  return e;
}

}  // namespace detail

// Exact rational K(k^2) of the pole set:
//   A+B = 2 sum_{t even} e_{n-t} (-1)^{t/2} k^t,
//   A-B = -2i k sum_{m} e_{n-2m-1} (-1)^m k^{2m},
//   K   = i k^{2l+1} (A+B)/(A-B).
// For l > 0 the sum rules make the lowest l coefficients of the denominator
// vanish, cancelling the residual k^{2l} factor; coefficients below
// `tol_sumrule` (relative to the largest denominator coefficient) are
// projected out, anything larger is an error.
inline ErfModel erf_from_poles(const PoleSet& poles, double tol_sumrule = 1e-2) {
  poles.validate();
  const int n = poles.size();
  const int l = poles.l.l;
  if (n == 0) throw DomainError("cannot build an ERF model from an empty pole set");
  if (2 * n <= 2 * l)
    throw DomainError("pole count too small for this partial wave");

  const auto e = detail::elementary_symmetric(poles.kappas);
  std::vector<long double> gam;  // numerator coefficients in x = k^2
  for (int t = 0; t <= n; t += 2)
    gam.push_back(((t / 2) % 2 ? -1.0L : 1.0L) * e[n - t]);
  std::vector<long double> sig;  // denominator coefficients in x = k^2
  for (int t = 1; t <= n; t += 2)
    sig.push_back((((t - 1) / 2) % 2 ? -1.0L : 1.0L) * e[n - t]);

  long double sig_scale = 0;
  for (auto s : sig) sig_scale = std::max(sig_scale, std::abs(s));
  for (int m = 0; m < l; ++m) {
    if (m >= static_cast<int>(sig.size()) ||
        std::abs(sig[m]) > tol_sumrule * sig_scale)
      throw NumericError(
          "ill-defined effective-range function: sum-rule violation leaves a "
          "k^(2l) factor uncancelled");
  }
  std::vector<long double> sig_red(sig.begin() + l, sig.end());
  if (sig_red.empty() || sig_red[0] == 0.0L)
    throw NumericError("degenerate ERF denominator");

  const long double q0 = sig_red[0];
  ErfModel out;
  out.l = poles.l;
  for (auto g : gam) out.p.push_back(static_cast<double>(-g / q0));
  out.q.clear();
  for (auto s : sig_red) out.q.push_back(static_cast<double>(s / q0));
  out.kind = out.q.size() <= 1 ? ErfKind::Taylor : ErfKind::Pade;
  out.validate();
  return out;
}

}  // namespace susyinv
