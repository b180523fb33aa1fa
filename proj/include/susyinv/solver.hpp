#pragma once

// Forward radial Schrodinger solver: Numerov integration of
// u'' = (V(r) - k^2) u outward from the power-law core behavior
// u ~ r^(nu+1), matched to Riccati-Bessel free solutions at two radii in
// the tail.  Independent of the Wronskian algebra, which is the point:
// it closes the inversion loop.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "susyinv/susy.hpp"

namespace susyinv {

struct RiccatiBessel {
  double j = 0, n = 0, jp = 0, np = 0;
};

// Riccati-Bessel pair: j_l(x) = x * (spherical j_l), n_0 = -cos x, with
// j n' - j' n = +1.  Downward (Miller) recurrence keeps j_l accurate at
// x < l where the upward direction is unstable.
inline RiccatiBessel riccati_bessel(PartialWave l, double x) {
  if (!(x > 0)) throw DomainError("riccati_bessel requires x > 0");
  const int ll = l.l;
  RiccatiBessel out;

  std::vector<double> j(ll + 2);
  if (x > ll + 0.5 || ll == 0) {
    double jm = std::cos(x), j0 = std::sin(x);
    j[0] = jm;  // j_{-1}
    j[1] = j0;  // j_0
    for (int i = 0; i < ll; ++i) {
      double jn = (2 * i + 1) / x * j[i + 1] - j[i];
      j[i + 2] = jn;
    }
  } else {
    const int start = ll + 1 + static_cast<int>(12 + 2 * std::sqrt(double(ll)));
    double fp = 0.0, f = 1e-280;
    std::vector<double> tmp(start + 1, 0.0);
    tmp[start] = f;
    for (int i = start; i >= 1; --i) {
      double fm = (2 * i + 1) / x * f - fp;
      fp = f;
      f = fm;
      if (i - 1 <= ll + 1) tmp[i - 1] = f;
      if (std::abs(f) > 1e250) {
        for (auto& t : tmp) t *= 1e-250;
        f *= 1e-250;
        fp *= 1e-250;
      }
    }
    const double scale = std::sin(x) / tmp[0];
    j[0] = std::cos(x);
    for (int i = 0; i <= ll; ++i) j[i + 1] = tmp[i] * scale;
  }

  std::vector<double> n(ll + 2);
  n[0] = std::sin(x);   // n_{-1}
  n[1] = -std::cos(x);  // n_0
  for (int i = 0; i < ll; ++i)
    n[i + 2] = (2 * i + 1) / x * n[i + 1] - n[i];

  out.j = j[ll + 1];
  out.n = n[ll + 1];
  out.jp = j[ll] - ll / x * j[ll + 1];
  out.np = n[ll] - ll / x * n[ll + 1];
  return out;
}

struct SolverConfig {
  double r_start = 1e-3;       // [fm]
  double step = 1e-3;          // [fm]
  double r_max = 40.0;         // extended until the tail criterion holds
  double r_max_cap = 400.0;
  double match_r1 = 0;         // 0 = automatic
  double match_r2 = 0;
  double match_sep = 1.5;      // default r2 - r1 [fm]
  double tail_eps_extend = 1e-10;  // |V_central(r_max)| target
  double tail_eps_match = 1e-8;    // |V_central(r_1)| requirement
  double low_k_guard = 0.02;       // [fm^-1]
  int origin_refine_cells = 50;    // coarse cells integrated at step/8
  int integrator_order = 4;        // Numerov

  void validate() const {
    if (!(0 < r_start && step > 0 && r_start < r_max))
      throw DomainError("solver config requires 0 < r_start < r_max, step > 0");
    if (match_r1 != 0 && !(r_start < match_r1 && match_r1 < match_r2 &&
                           match_r2 <= r_max))
      throw DomainError("matching radii must satisfy r_start < r1 < r2 <= r_max");
  }
};

struct RadialSolution {
  double k = 0;
  double r_start = 0, step = 0;
  std::vector<double> u;  // on r_start + i*step
  double delta = 0;       // [rad], principal branch of the matching
};

namespace detail {

// Potential sampled once and shared across all k sweeps.
struct PotentialGrid {
  double r_start = 0, h = 0;
  int n = 0;
  int fine_cells = 0, fine_factor = 8;
  std::vector<double> coarse;  // V at r_start + i h, i = 0..n-1
  std::vector<double> fine;    // V at r_start + m h/ff, m = 0..fine_cells*ff
  double r_max() const { return r_start + (n - 1) * h; }
};

inline PotentialGrid sample_potential(const PotentialModel& pot,
                                      const SolverConfig& cfg) {
  PotentialGrid g;
  g.r_start = cfg.r_start;
  g.h = cfg.step;

  double r_max = cfg.r_max;
  while (std::abs(pot.central(r_max, true)) > cfg.tail_eps_extend &&
         r_max < cfg.r_max_cap)
    r_max = std::min(cfg.r_max_cap, r_max * 1.3);

  g.n = static_cast<int>(std::ceil((r_max - g.r_start) / g.h)) + 1;
  g.coarse.resize(g.n);
  for (int i = 0; i < g.n; ++i)
    g.coarse[i] = pot.eval(g.r_start + i * g.h, true);
  g.fine_cells = std::min(cfg.origin_refine_cells, g.n - 2);
  if (g.fine_cells > 0) {
    const double hf = g.h / g.fine_factor;
    g.fine.resize(g.fine_cells * g.fine_factor + 1);
    for (std::size_t m = 0; m < g.fine.size(); ++m)
      g.fine[m] = pot.eval(g.r_start + m * hf, true);
  }
  return g;
}

// One Numerov sweep; returns u on the coarse grid (normalization arbitrary,
// renormalized on the fly when it grows past 1e250).
inline std::vector<double> numerov_sweep(const PotentialGrid& g, double k,
                                         int nu) {
  std::vector<double> u(g.n, 0.0);
  auto advance = [&](double f_prev, double f_cur, double f_next, double h,
                     double u_prev, double u_cur) {
    const double c = h * h / 12.0;
    return (2 * u_cur * (1 + 5 * c * f_cur) - u_prev * (1 - c * f_prev)) /
           (1 - c * f_next);
  };

  const double k2 = k * k;
  if (g.fine_cells > 0) {
    const int ff = g.fine_factor;
    const double hf = g.h / ff;
    const int m_end = g.fine_cells * ff;
    std::vector<double> uf(m_end + 1);
    uf[0] = std::pow(g.r_start, nu + 1);
    uf[1] = std::pow(g.r_start + hf, nu + 1);
    for (int m = 1; m < m_end; ++m)
      uf[m + 1] = advance(g.fine[m - 1] - k2, g.fine[m] - k2,
                          g.fine[m + 1] - k2, hf, uf[m - 1], uf[m]);
    for (int i = 0; i <= g.fine_cells; ++i) u[i] = uf[i * ff];
  } else {
    u[0] = std::pow(g.r_start, nu + 1);
    u[1] = std::pow(g.r_start + g.h, nu + 1);
  }

  const int i0 = std::max(g.fine_cells, 1);
  for (int i = i0; i < g.n - 1; ++i) {
    u[i + 1] = advance(g.coarse[i - 1] - k2, g.coarse[i] - k2,
                       g.coarse[i + 1] - k2, g.h, u[i - 1], u[i]);
    if (std::abs(u[i + 1]) > 1e250)
      for (int m = 0; m <= i + 1; ++m) u[m] *= 1e-250;
  }
  return u;
}

// Two-point ratio matching u = A j + B n; tan(delta) = -B/A.
inline double match_delta(const PotentialGrid& g, const std::vector<double>& u,
                          double k, PartialWave l, int i1, int i2) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    const double r1 = g.r_start + i1 * g.h, r2 = g.r_start + i2 * g.h;
    const double u1 = u[i1], u2 = u[i2];
    if (u1 == 0 && u2 == 0) {
      i1 -= static_cast<int>(0.3 / g.h);
      continue;
    }
    const auto b1 = riccati_bessel(l, k * r1);
    const auto b2 = riccati_bessel(l, k * r2);
    // A (u2 j1 - u1 j2) = B (u1 n2 - u2 n1); tan(delta) = -B/A
    const double num = u2 * b1.j - u1 * b2.j;
    const double den = u2 * b1.n - u1 * b2.n;
    if (std::abs(num) + std::abs(den) == 0) {
      i1 -= static_cast<int>(0.3 / g.h);
      continue;
    }
    return std::atan2(num, den);
  }
  throw NumericError("phase matching degenerate: wave function node at both radii");
}

}  // namespace detail

inline RadialSolution integrate_radial(const PotentialModel& pot, double k,
                                       const SolverConfig& cfg = {}) {
  cfg.validate();
  if (!(k > 0)) throw DomainError("integrate_radial requires k > 0");
  if (pot.nu < 0)
    throw NumericError("unsupported singularity: nu < 0 has no power-law core");
  auto grid = detail::sample_potential(pot, cfg);
  RadialSolution sol;
  sol.k = k;
  sol.r_start = grid.r_start;
  sol.step = grid.h;
  sol.u = detail::numerov_sweep(grid, k, pot.nu);
  int i2 = grid.n - 2, i1 = i2 - static_cast<int>(cfg.match_sep / grid.h);
  if (cfg.match_r1 != 0) {
    i1 = static_cast<int>(std::round((cfg.match_r1 - grid.r_start) / grid.h));
    i2 = static_cast<int>(std::round((cfg.match_r2 - grid.r_start) / grid.h));
  }
  sol.delta = detail::match_delta(grid, sol.u, k, pot.l, i1, i2);
  return sol;
}

// Continuous-branch phase shifts over a k grid.  The branch is anchored by
// reducing the first point into (-pi/2, pi/2] and unwrapped mod pi along
// the grid; below the low-k guard, delta comes from the effective-range
// limit (K extrapolated linearly in k^2 from two healthy wave numbers).
inline std::vector<double> phase_shift_from_potential(
    const PotentialModel& pot, std::span<const double> k_grid,
    const SolverConfig& cfg = {}) {
  cfg.validate();
  if (pot.nu < 0)
    throw NumericError("unsupported singularity: nu < 0 has no power-law core");
  auto grid = detail::sample_potential(pot, cfg);

  int i2_def = grid.n - 2;
  int i1_def = i2_def - static_cast<int>(cfg.match_sep / grid.h);
  if (cfg.match_r1 != 0) {
    i1_def = static_cast<int>(std::round((cfg.match_r1 - grid.r_start) / grid.h));
    i2_def = static_cast<int>(std::round((cfg.match_r2 - grid.r_start) / grid.h));
  }
  const double r1 = grid.r_start + i1_def * grid.h;
  if (std::abs(pot.central(r1, true)) > cfg.tail_eps_match)
    throw NumericError("matching radius r1 = " + std::to_string(r1) +
                       " fm is inside the potential range");

  auto principal = [&](double k) {
    auto u = detail::numerov_sweep(grid, k, pot.nu);
    return detail::match_delta(grid, u, k, pot.l, i1_def, i2_def);
  };

  // effective-range guard for k below low_k_guard
  double K0 = 0, K1 = 0;
  bool guard_ready = false, guard_zero = false;
  auto prepare_guard = [&]() {
    if (guard_ready) return;
    const double ka = cfg.low_k_guard, kb = 1.5 * cfg.low_k_guard;
    const double da = principal(ka), db = principal(kb);
    if (std::abs(std::sin(da)) < 1e-12 || std::abs(std::sin(db)) < 1e-12) {
      guard_zero = true;
    } else {
      const double Ka = K_from_delta(ka, da, pot.l);
      const double Kb = K_from_delta(kb, db, pot.l);
      K1 = (Kb - Ka) / (kb * kb - ka * ka);
      K0 = Ka - K1 * ka * ka;
    }
    guard_ready = true;
  };

  std::vector<double> out;
  out.reserve(k_grid.size());
  double prev_k = 0;
  for (double k : k_grid) {
    if (!(k > prev_k))
      throw DomainError("k grid must be strictly increasing and positive");
    prev_k = k;
    double d;
    if (k < cfg.low_k_guard) {
      prepare_guard();
      d = guard_zero ? 0.0
                     : std::atan2(std::pow(k, 2 * pot.l.l + 1),
                                  K0 + K1 * k * k);
      while (d > M_PI / 2) d -= M_PI;
      while (d <= -M_PI / 2) d += M_PI;
    } else {
      d = principal(k);
    }
    if (out.empty()) {
      while (d > M_PI / 2) d -= M_PI;
      while (d <= -M_PI / 2) d += M_PI;
    } else {
      const double ref = out.back();
      d += M_PI * std::round((ref - d) / M_PI);
    }
    out.push_back(d);
  }
  return out;
}

struct VerificationReport {
  std::vector<double> k;
  std::vector<double> delta_solver;    // [rad]
  std::vector<double> delta_poles;     // [rad]
  double max_abs_dev = 0;              // [rad]
  double rms_dev = 0;                  // [rad]
};

// Build the potential, forward-solve, compare with the arctangent sum.
inline VerificationReport verify_inversion(const PoleSet& poles,
                                           std::span<const double> k_grid,
                                           const SolverConfig& cfg = {}) {
  auto pot = build_potential(poles);
  VerificationReport rep;
  rep.k.assign(k_grid.begin(), k_grid.end());
  rep.delta_solver = phase_shift_from_potential(pot, k_grid, cfg);
  rep.delta_poles = delta_from_poles(poles, k_grid);
  double ss = 0;
  for (std::size_t i = 0; i < rep.k.size(); ++i) {
    const double dev = rep.delta_solver[i] - rep.delta_poles[i];
    rep.max_abs_dev = std::max(rep.max_abs_dev, std::abs(dev));
    ss += dev * dev;
  }
  rep.rms_dev = rep.k.empty() ? 0 : std::sqrt(ss / rep.k.size());
  return rep;
}

}  // namespace susyinv
