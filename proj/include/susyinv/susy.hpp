#pragma once

// Crum-Krein construction of the inversion potential,
//
//   V_n(r) = l(l+1)/r^2 - 2 (d^2/dr^2) ln W[u_0, ..., u_{n-1}],
//
// from factorization solutions of the purely centrifugal equation at the
// energies -kappa_j^2.  kappa_j > 0 poles use the left-regular solution
// (regular at the origin, growing at infinity, sinh-type), kappa_j < 0 the
// right-regular one (singular at the origin, decaying, exp-type).
//
// Numerics: all derivative rows are reduced to (u, u') through the ODE
// u'' = (l(l+1)/r^2 + kappa^2) u; W, W' and W'' come from row-replacement
// determinant identities evaluated on exponentially column-scaled matrices
// (column j carries e^{kappa_j r}, so ln W only shifts by a linear function
// of r).  Determinants run in long double with an error estimate; when the
// estimated cancellation exceeds the requested precision the evaluation is
// redone in 100-digit floating point.  That is what keeps the deep
// core region (l > 0) and the exponentially small tails exact.

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <sstream>
#include <span>
#include <vector>

#include "susyinv/poles.hpp"
#include "susyinv/types.hpp"

namespace susyinv {

enum class Regularity { Left, Right };

struct FactorizationSolution {
  double kappa = 0;    // [fm^-1]
  double epsilon = 0;  // factorization energy -kappa^2 [fm^-2]
  Regularity regularity = Regularity::Left;
  PartialWave l{0};
};

inline std::vector<FactorizationSolution> classify_poles(const PoleSet& poles) {
  poles.validate();
  std::vector<FactorizationSolution> out;
  out.reserve(poles.kappas.size());
  for (double k : poles.kappas)
    out.push_back({k, -k * k,
                   k > 0 ? Regularity::Left : Regularity::Right, poles.l});
  return out;
}

namespace detail {

using mp100 = boost::multiprecision::cpp_bin_float_100;

template <class Real>
constexpr double real_epsilon() {
  if constexpr (std::is_same_v<Real, long double>)
    return 1.1e-19;
  else
    return 1e-99;
}

enum class ColKind { OdeLeft, OdeRight, Exp, Sinh, Cosh };

// One Wronskian column: a solution of the initial radial equation at energy
// -kappa^2, represented so that the whole column can be scaled by
// e^{-rate * r}.
struct WronskianColumn {
  ColKind kind = ColKind::OdeLeft;
  double kappa = 0;   // signed
  double shift = 0;   // argument shift for Sinh/Cosh columns
  int l = 0;          // OdeLeft/OdeRight only
  double rate() const { return kappa; }
};

// Scaled solution value and first derivative at r (scale e^{-kappa r}).
// Left: u = x i_l-type, g~_{l+1} = g~_{l-1} - (2l+1)/x g~_l from
//       g~_{-1} = (1+e^{-2x})/2, g~_0 = (1-e^{-2x})/2, x = kappa r.
// Right: u = x k_l-type, h~_{l+1} = h~_{l-1} + (2l+1)/x h~_l from
//       h~_{-1} = h~_0 = 1, x = |kappa| r (purely rational after scaling).
template <class Real>
void scaled_u01(const WronskianColumn& c, const Real& r, Real& u0, Real& u1) {
  using std::exp;
  const Real kap = c.kappa;
  if (c.kind == ColKind::OdeLeft) {
    const Real x = kap * r;
    Real e2;
    if constexpr (std::is_same_v<Real, long double>)
      e2 = expl(-2.0L * x);
    else
      e2 = exp(Real(-2) * x);
    Real gm = (1 + e2) / 2, g = (1 - e2) / 2;
    if constexpr (std::is_same_v<Real, long double>)
      if (x < 0.1L) g = -expm1l(-2.0L * x) / 2.0L;
    for (int ll = 0; ll < c.l; ++ll) {
      Real gp = gm - Real(2 * ll + 1) / x * g;
      gm = g;
      g = gp;
    }
    u0 = g;
    u1 = kap * (gm - Real(c.l) / x * g);
  } else {  // OdeRight
    const Real x = -kap * r;
    Real hm = 1, h = 1;
    for (int ll = 0; ll < c.l; ++ll) {
      Real hp = hm + Real(2 * ll + 1) / x * h;
      hm = h;
      h = hp;
    }
    u0 = h;
    u1 = (-kap) * (-hm - Real(c.l) / x * h);
  }
}

// Scaled derivatives u^(0..mmax) via Leibniz on u'' = (l(l+1)/r^2 + k^2) u.
template <class Real>
void scaled_ode_derivs(const WronskianColumn& c, const Real& r, int mmax,
                       std::vector<Real>& out) {
  out.resize(mmax + 1);
  Real u0, u1;
  scaled_u01(c, r, u0, u1);
  out[0] = u0;
  if (mmax >= 1) out[1] = u1;
  const Real kap2 = Real(c.kappa) * Real(c.kappa);
  const Real ll1 = Real(c.l * (c.l + 1));
  for (int m = 0; m + 2 <= mmax; ++m) {
    Real s = kap2 * out[m];
    if (c.l > 0) {
      Real binom = 1;       // C(m, i)
      Real rpow = r * r;    // r^(i+2)
      Real fsign = 1;       // (-1)^i
      Real fact = 1;        // (i+1)!
      for (int i = 0; i <= m; ++i) {
        if (i > 0) {
          binom = binom * Real(m - i + 1) / Real(i);
          rpow *= r;
          fsign = -fsign;
          fact *= Real(i + 1);
        }
        s += binom * (ll1 * fsign * fact / rpow) * out[m - i];
      }
    }
    out[m + 2] = s;
  }
}

// Closed-form scaled derivatives for exp/sinh/cosh columns (l = 0 only).
template <class Real>
void scaled_trig_derivs(const WronskianColumn& c, const Real& r, int mmax,
                        std::vector<Real>& out) {
  using std::exp;
  out.resize(mmax + 1);
  const Real kap = c.kappa;
  if (c.kind == ColKind::Exp) {
    Real p = 1;
    for (int i = 0; i <= mmax; ++i) {
      out[i] = p;
      p *= kap;
    }
    return;
  }
  const Real es = exp(Real(c.shift));
  const Real em = exp(Real(-2) * kap * r) / es;  // e^{-2 kappa r - shift}
  const Real s_sc = (es - em) / 2;               // sinh(kr+s) e^{-kr}
  const Real c_sc = (es + em) / 2;               // cosh(kr+s) e^{-kr}
  Real even = (c.kind == ColKind::Sinh) ? s_sc : c_sc;
  Real odd = (c.kind == ColKind::Sinh) ? c_sc : s_sc;
  Real p = 1;
  for (int i = 0; i <= mmax; ++i) {
    out[i] = p * (i % 2 == 0 ? even : odd);
    p *= kap;
  }
}

template <class Real>
void scaled_column(const WronskianColumn& c, const Real& r, int mmax,
                   std::vector<Real>& out) {
  if (c.kind == ColKind::OdeLeft || c.kind == ColKind::OdeRight)
    scaled_ode_derivs(c, r, mmax, out);
  else
    scaled_trig_derivs(c, r, mmax, out);
}

// Pivoted elimination determinant plus the product of row maxima, which
// bounds the term size and hence the cancellation suffered.
template <class Real>
void det_with_scale(std::vector<std::vector<Real>>& m, Real& det, Real& rowprod) {
  using std::abs;
  const int n = static_cast<int>(m.size());
  det = 1;
  rowprod = 1;
  for (int i = 0; i < n; ++i) {
    Real mx = 0;
    for (int j = 0; j < n; ++j) mx = std::max(mx, Real(abs(m[i][j])));
    rowprod *= mx;
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int rr = c + 1; rr < n; ++rr)
      if (abs(m[rr][c]) > abs(m[piv][c])) piv = rr;
    if (m[piv][c] == Real(0)) {
      det = 0;
      return;
    }
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (int rr = c + 1; rr < n; ++rr) {
      Real f = m[rr][c] / m[c][c];
      for (int j = c; j < n; ++j) m[rr][j] -= f * m[c][j];
    }
  }
}

struct Bundle {
  double ln_w = 0;       // ln |W|
  double dln_w = 0;      // (ln W)'
  double d2ln_w = 0;     // (ln W)''
  double w_sign = 1;     // sign of W for the fixed column order
  double rel_err = 0;    // estimated relative error of d2ln_w
  double abs_err = 0;
};

template <class Real>
Bundle bundle_eval(std::span<const WronskianColumn> cols, double r_in) {
  using std::abs;
  using std::log;
  const int n = static_cast<int>(cols.size());
  const Real r = r_in;
  const double eps = real_epsilon<Real>();

  std::vector<std::vector<Real>> colv(n);
  double rate_sum = 0;
  for (int j = 0; j < n; ++j) {
    scaled_column(cols[j], r, n + 1, colv[j]);
    rate_sum += cols[j].rate();
  }

  Bundle b;
  if (n == 1) {
    // single transformation: (ln W)'' = l(l+1)/r^2 - t (t + 2 kappa) with
    // t = u'/u - kappa, computed cancellation-free for l = 0
    const auto& c = cols[0];
    const Real u0 = colv[0][0], u1 = colv[0][1];
    Real t;
    if (c.l == 0 && c.kind == ColKind::OdeLeft) {
      using std::exp;
      Real e2;
      if constexpr (std::is_same_v<Real, long double>)
        e2 = expl(-2.0L * Real(c.kappa) * r);
      else
        e2 = exp(Real(-2) * Real(c.kappa) * r);
      t = Real(c.kappa) * 2 * e2 / (1 - e2);
    } else {
      t = (u1 - Real(c.kappa) * u0) / u0;
    }
    const Real ll1 = Real(c.l * (c.l + 1));
    Real d2 = ll1 / (r * r) - t * (t + 2 * Real(c.kappa));
    b.ln_w = static_cast<double>(Real(c.kappa) * r + log(abs(u0)));
    b.dln_w = static_cast<double>(u1 / u0);
    b.d2ln_w = static_cast<double>(d2);
    b.w_sign = u0 >= Real(0) ? 1.0 : -1.0;
    b.rel_err = 8 * eps;
    b.abs_err = std::abs(b.d2ln_w) * b.rel_err;
    return b;
  }

  auto make_det = [&](const std::vector<int>& rows, Real& d, Real& rp) {
    std::vector<std::vector<Real>> m(n, std::vector<Real>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[i][j] = colv[j][rows[i]];
    det_with_scale(m, d, rp);
  };

  std::vector<int> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = i;
  Real d0, rp0;
  make_det(rows, d0, rp0);
  if (d0 == Real(0))
    throw NumericError("node of Wronskian at r = " + std::to_string(r_in) +
                       " fm: inadmissible pole configuration");
  rows[n - 1] = n;
  Real d1, rp1;
  make_det(rows, d1, rp1);
  rows[n - 2] = n - 1;  // rows 0..n-3, n-1, n
  Real d2a, rp2a;
  make_det(rows, d2a, rp2a);
  rows[n - 2] = n - 2;
  rows[n - 1] = n + 1;  // rows 0..n-2, n+1
  Real d2b, rp2b;
  make_det(rows, d2b, rp2b);

  const Real t1 = d1 / d0;
  const Real t2 = (d2a + d2b) / d0;
  const Real dd2 = t2 - t1 * t1;

  b.ln_w = static_cast<double>(rate_sum * r + log(abs(d0)));
  b.dln_w = static_cast<double>(t1);
  b.d2ln_w = static_cast<double>(dd2);
  b.w_sign = d0 >= Real(0) ? 1.0 : -1.0;

  // error estimate: elimination noise per determinant ~ eps * rowprod,
  // propagated through t2 - t1^2
  const double n0 = static_cast<double>(rp0 / abs(d0));
  const double noise =
      eps * (static_cast<double>((rp2a + rp2b) / abs(d0)) +
             std::abs(static_cast<double>(t2)) * n0 +
             2 * std::abs(static_cast<double>(t1)) *
                 (static_cast<double>(rp1 / abs(d0)) +
                  std::abs(static_cast<double>(t1)) * n0));
  b.abs_err = noise;
  b.rel_err = std::abs(b.d2ln_w) > 0 ? noise / std::abs(b.d2ln_w) : 1.0;
  return b;
}

enum class Precision { Fast, Strict };

inline Bundle bundle_adaptive(std::span<const WronskianColumn> cols, double r,
                              Precision prec) {
  Bundle b = bundle_eval<long double>(cols, r);
  const bool ok = (prec == Precision::Fast)
                      ? (b.abs_err < 1e-9 || b.rel_err < 1e-11)
                      : (b.rel_err < 1e-11);
  if (!ok) b = bundle_eval<mp100>(cols, r);
  return b;
}

inline std::vector<WronskianColumn> columns_from_solutions(
    std::span<const FactorizationSolution> sols) {
  std::vector<WronskianColumn> cols;
  cols.reserve(sols.size());
  for (const auto& s : sols) {
    if (s.kappa == 0 || !std::isfinite(s.kappa))
      throw DomainError("factorization solutions require nonzero real kappa");
    WronskianColumn c;
    c.kind = s.regularity == Regularity::Left ? ColKind::OdeLeft
                                              : ColKind::OdeRight;
    c.kappa = s.kappa;
    c.l = s.l.l;
    cols.push_back(c);
  }
  return cols;
}

}  // namespace detail

// u, u', ..., u^(max_order) of a factorization solution (unscaled values;
// overflows for very large kappa*r, which the engines avoid by scaling).
inline std::vector<double> u_eval(const FactorizationSolution& sol, double r,
                                  int max_order) {
  if (!(r > 0)) throw DomainError("u_eval requires r > 0");
  if ((sol.regularity == Regularity::Left) != (sol.kappa > 0))
    throw DomainError("regularity inconsistent with the sign of kappa");
  auto cols = detail::columns_from_solutions({&sol, 1});
  std::vector<long double> v;
  detail::scaled_column(cols[0], static_cast<long double>(r),
                        std::max(max_order, 1), v);
  const long double scale = expl(static_cast<long double>(sol.kappa) * r);
  std::vector<double> out(max_order + 1);
  for (int i = 0; i <= max_order; ++i)
    out[i] = static_cast<double>(v[i] * scale);
  return out;
}

struct WronskianBundle {
  double ln_w = 0;
  double dln_w = 0;
  double d2ln_w = 0;
};

enum class BundleMode { Analytic, FiniteDifference };

// (ln W, (ln W)', (ln W)'') of the Wronskian of the given solutions.
// FiniteDifference re-derives (ln W)'' from 5-point differences of ln W as
// an independent cross-check of the determinant identities.
inline WronskianBundle wronskian_bundle(
    std::span<const FactorizationSolution> sols, double r,
    BundleMode mode = BundleMode::Analytic) {
  if (sols.empty()) throw DomainError("wronskian_bundle needs >= 1 solution");
  if (!(r > 0)) throw DomainError("wronskian_bundle requires r > 0");
  auto cols = detail::columns_from_solutions(sols);
  auto b = detail::bundle_adaptive(cols, r, detail::Precision::Strict);
  WronskianBundle out{b.ln_w, b.dln_w, b.d2ln_w};
  if (mode == BundleMode::FiniteDifference) {
    const double h = std::min(r, 1.0) / 100.0;
    double f[5];
    for (int i = -2; i <= 2; ++i) {
      auto bi = (i == 0) ? b
                         : detail::bundle_adaptive(cols, r + i * h,
                                                   detail::Precision::Strict);
      f[i + 2] = bi.ln_w;
    }
    out.d2ln_w =
        (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h);
  }
  return out;
}

// Evaluatable r -> V(r) with the singularity metadata of the construction.
class PotentialModel {
 public:
  PartialWave l{0};
  PoleSet poles;
  int n_left = 0;
  int n_right = 0;
  int nu = 0;                 // singularity strength: V ~ nu(nu+1)/r^2
  double r_min_eval = 1e-4;   // below: nu(nu+1)/r^2 + extrapolated remainder

  PotentialModel() = default;
  PotentialModel(PartialWave pw, PoleSet ps,
                 std::vector<detail::WronskianColumn> cols)
      : l(pw), poles(std::move(ps)), cols_(std::move(cols)) {
    n_left = poles.n_positive();
    n_right = poles.n_negative();
    nu = l.l + n_left - n_right;
  }

  // full effective potential, centrifugal term included [fm^-2]
  double eval(double r, bool fast = false) const {
    if (!(r > 0)) throw DomainError("potential evaluation requires r > 0");
    if (r < r_min_eval)
      return nu * (nu + 1) / (r * r) + remainder_at_origin_;
    auto b = detail::bundle_adaptive(
        cols_, r, fast ? detail::Precision::Fast : detail::Precision::Strict);
    return l.l * (l.l + 1) / (r * r) - 2 * b.d2ln_w;
  }

  // interaction part V - l(l+1)/r^2 (what figures and tail fits use)
  double central(double r, bool fast = false) const {
    if (!(r > 0)) throw DomainError("potential evaluation requires r > 0");
    if (r < r_min_eval)
      return (nu * (nu + 1) - l.l * (l.l + 1)) / (r * r) + remainder_at_origin_;
    auto b = detail::bundle_adaptive(
        cols_, r, fast ? detail::Precision::Fast : detail::Precision::Strict);
    return -2 * b.d2ln_w;
  }

  double wronskian_sign(double r) const {
    return detail::bundle_adaptive(cols_, r, detail::Precision::Fast).w_sign;
  }

  const std::vector<detail::WronskianColumn>& columns() const { return cols_; }

  void finalize_origin_extrapolation() {
    // remainder(r) = V - nu(nu+1)/r^2 has an analytic r^2-series at 0;
    // Richardson from 2e-4 and 4e-4 pins the finite part
    auto rem = [&](double r) {
      auto b = detail::bundle_adaptive(cols_, r, detail::Precision::Strict);
      return l.l * (l.l + 1) / (r * r) - 2 * b.d2ln_w -
             nu * (nu + 1) / (r * r);
    };
    const double f1 = rem(2e-4), f2 = rem(4e-4);
    remainder_at_origin_ = (4 * f1 - f2) / 3;
  }

 private:
  std::vector<detail::WronskianColumn> cols_;
  double remainder_at_origin_ = 0;
};

struct BuildOptions {
  double scan_r_max = 40.0;  // nodelessness scan range
  int scan_points = 420;
  bool check_origin_law = true;
};

// Generic Crum-Krein construction from a real pole set.
inline PotentialModel build_potential(const PoleSet& poles,
                                      const BuildOptions& opt = {}) {
  auto sols = classify_poles(poles);
  PotentialModel pot(poles.l, poles,
                     detail::columns_from_solutions(sols));
  if (pot.nu < 0)
    throw NumericError(
        "unsupported singularity: nu = " + std::to_string(pot.nu) +
        " < 0 (more right- than left-regular transformations beyond l)");

  if (!poles.kappas.empty()) {
    // W must be nodeless on (0, inf); sample on a log+linear grid
    const int n_log = opt.scan_points / 2, n_lin = opt.scan_points - n_log;
    double sign0 = 0;
    auto check = [&](double r) {
      double s = pot.wronskian_sign(r);
      if (sign0 == 0) sign0 = s;
      if (s != sign0)
        throw NumericError("invalid pole configuration: Wronskian node near r = " +
                           std::to_string(r) + " fm");
    };
    for (int i = 0; i < n_log; ++i)
      check(1e-3 * std::pow(1.0 / 1e-3, double(i) / (n_log - 1)));
    for (int i = 1; i <= n_lin; ++i)
      check(1.0 + (opt.scan_r_max - 1.0) * double(i) / n_lin);

    pot.finalize_origin_extrapolation();
    if (opt.check_origin_law) {
      const double law = pot.nu * (pot.nu + 1);
      const double r2v3 = 1e-3 * 1e-3 * pot.eval(1e-3);
      const double r2v4 = 1e-4 * 1e-4 * pot.eval(1e-4);
      if (std::abs(r2v4 - law) > 1e-5 * (1 + std::abs(law)) ||
          std::abs(r2v3 - law) > 1e-3 * (1 + std::abs(law)))
        throw NumericError("near-origin law r^2 V -> nu(nu+1) violated");
    }
  }
  return pot;
}

enum class SWaveForm { Wronskian6, Cosh4 };

// The two compact S-wave determinant forms: the exp/sinh Wronskian over all
// n solutions, and the reduced shifted cosh/sinh Wronskian over the
// positive-kappa solutions only, with arctanh shifts absorbing the
// exponential (negative-kappa) columns.
inline PotentialModel s_wave_compact_potential(const PoleSet& poles,
                                               SWaveForm form) {
  poles.validate();
  if (poles.l.l != 0)
    throw DomainError("compact forms are the l = 0 construction");
  std::vector<detail::WronskianColumn> cols;
  if (form == SWaveForm::Wronskian6) {
    for (double k : poles.kappas) {
      detail::WronskianColumn c;
      c.kind = k > 0 ? detail::ColKind::Sinh : detail::ColKind::Exp;
      c.kappa = k;
      cols.push_back(c);
    }
  } else {
    std::vector<double> neg, pos;
    for (double k : poles.kappas) (k < 0 ? neg : pos).push_back(k);
    if (pos.empty())
      throw DomainError("cosh-4 form needs at least one positive pole");
    for (double kj : pos) {
      detail::WronskianColumn c;
      c.kind = detail::ColKind::Sinh;
      c.kappa = kj;
      double shift = 0;
      for (double ki : neg) {
        const double ai = -ki;
        if (ai == kj)
          throw DomainError("inadmissible shift: |kappa_i/kappa_j| = 1");
        if (ai < kj) {
          shift += std::atanh(ai / kj);
          c.kind = c.kind == detail::ColKind::Sinh ? detail::ColKind::Cosh
                                                   : detail::ColKind::Sinh;
        } else {
          shift += std::atanh(kj / ai);
        }
      }
      c.shift = shift;
      cols.push_back(c);
    }
  }
  PotentialModel pot(poles.l, poles, std::move(cols));
  pot.finalize_origin_extrapolation();
  return pot;
}

struct TailFit {
  double mu = 0;  // decay rate [fm^-1]
  double c = 0;   // ln-prefactor
};

// Least-squares fit of ln |V_central| to c - mu r over [r_lo, r_hi].
inline TailFit tail_decay_fit(const PotentialModel& pot, double r_lo,
                              double r_hi, int n_samples = 64) {
  if (!(0 < r_lo && r_lo < r_hi))
    throw DomainError("tail window must satisfy 0 < r_lo < r_hi");
  std::vector<double> rs(n_samples), ln_v(n_samples);
  double sign = 0, prev_abs = 0;
  for (int i = 0; i < n_samples; ++i) {
    const double r = r_lo + (r_hi - r_lo) * i / (n_samples - 1);
    const double v = pot.central(r);
    if (v == 0 || (sign != 0 && (v > 0) != (sign > 0)))
      throw NumericError("potential changes sign inside the tail window");
    if (i > 0 && std::abs(v) >= prev_abs)
      throw NumericError("|V| not monotonically decreasing in the tail window");
    sign = v;
    prev_abs = std::abs(v);
    rs[i] = r;
    ln_v[i] = std::log(std::abs(v));
  }
  // normal equations for ln|V| = c - mu r
  double sr = 0, sr2 = 0, sy = 0, sry = 0;
  for (int i = 0; i < n_samples; ++i) {
    sr += rs[i];
    sr2 += rs[i] * rs[i];
    sy += ln_v[i];
    sry += rs[i] * ln_v[i];
  }
  const double det = n_samples * sr2 - sr * sr;
  TailFit out;
  out.mu = -(n_samples * sry - sr * sy) / det;
  out.c = (sy * sr2 - sr * sry) / det;
  return out;
}

}  // namespace susyinv
