#pragma once

// Shared domain types: the pole set is the exchange currency of the whole
// pipeline, the effective-range-function model and phase-shift dataset are
// what it is fitted from.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "susyinv/errors.hpp"
#include "susyinv/kinematics.hpp"

namespace susyinv {

enum class PoleProvenance { ExtractedFromErf, DirectFit, Manual };

inline const char* to_string(PoleProvenance p) {
  switch (p) {
    case PoleProvenance::ExtractedFromErf: return "extracted-from-erf";
    case PoleProvenance::DirectFit: return "direct-fit";
    case PoleProvenance::Manual: return "manual";
  }
  return "?";
}

// Real S-matrix pole parameters kappa_j [fm^-1] for one partial wave; the
// poles sit at k = i*kappa_j.  Canonically stored sorted ascending.
struct PoleSet {
  PartialWave l{0};
  std::vector<double> kappas;
  PoleProvenance provenance = PoleProvenance::Manual;

  PoleSet() = default;
  PoleSet(PartialWave pw, std::vector<double> ks,
          PoleProvenance prov = PoleProvenance::Manual)
      : l(pw), kappas(std::move(ks)), provenance(prov) {
    std::sort(kappas.begin(), kappas.end());
  }

  int size() const { return static_cast<int>(kappas.size()); }
  int n_positive() const {
    return static_cast<int>(std::count_if(kappas.begin(), kappas.end(),
                                          [](double k) { return k > 0; }));
  }
  int n_negative() const { return size() - n_positive(); }

  void validate() const {
    l.validate();
    for (double k : kappas)
      if (k == 0.0 || !std::isfinite(k))
        throw DomainError("pole parameters must be finite and nonzero");
  }
};

enum class ErfKind { Taylor, Pade };

// K(k^2) = P(k^2)/Q(k^2) with q0 = 1; Taylor is the N = 0 case.
// Coefficients in the reduced fm units implied by l.
struct ErfModel {
  PartialWave l{0};
  ErfKind kind = ErfKind::Taylor;
  std::vector<double> p;  // p0..pM
  std::vector<double> q;  // q0..qN, q0 == 1

  ErfModel() : q{1.0} {}
  ErfModel(PartialWave pw, std::vector<double> pc, std::vector<double> qc = {1.0})
      : l(pw),
        kind(qc.size() <= 1 ? ErfKind::Taylor : ErfKind::Pade),
        p(std::move(pc)),
        q(std::move(qc)) {}

  int order_m() const { return static_cast<int>(p.size()) - 1; }
  int order_n() const { return static_cast<int>(q.size()) - 1; }

  void validate() const {
    l.validate();
    if (p.empty() || q.empty()) throw DomainError("empty ERF coefficient set");
    if (q[0] != 1.0) throw DomainError("ERF denominator must be normalized to q0 = 1");
    if (kind == ErfKind::Taylor && order_n() != 0)
      throw DomainError("Taylor ERF model must have N = 0");
    for (double c : p)
      if (!std::isfinite(c)) throw DomainError("non-finite ERF coefficient");
    for (double c : q)
      if (!std::isfinite(c)) throw DomainError("non-finite ERF coefficient");
  }

  // Horner in x = k^2.
  double eval_p(double x) const {
    double s = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * x + *it;
    return s;
  }
  double eval_q(double x) const {
    double s = 0;
    for (auto it = q.rbegin(); it != q.rend(); ++it) s = s * x + *it;
    return s;
  }
  double eval(double x) const { return eval_p(x) / eval_q(x); }
};

// Leading effective-range-expansion parameters, Eq.-style
// K = -1/a + (r/2) k^2 - P r^3 k^4 + ...
struct EreParameters {
  double a = 0;  // scattering length [fm^(2l+1)]
  double r = 0;  // effective range [fm^(-2l+1)]
  double P = 0;  // shape parameter [dimensionless]
  bool shape_degenerate = false;  // P was 0/0 and reported as 0
};

struct PhaseShiftPoint {
  double e_lab = 0;      // [MeV]
  double delta = 0;      // [rad], continuous branch with delta -> 0 at E -> 0
  double sigma = 0;      // [rad], 0 when the dataset carries no errors
  bool has_sigma = false;
};

struct PhaseShiftDataset {
  PartialWave l{0};
  std::vector<PhaseShiftPoint> points;

  void validate() const {
    l.validate();
    double prev_e = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& pt = points[i];
      if (!(pt.e_lab > prev_e))
        throw DomainError("dataset energies must be strictly increasing and positive");
      prev_e = pt.e_lab;
      if (!std::isfinite(pt.delta)) throw DomainError("non-finite phase shift in dataset");
      if (pt.has_sigma && !(pt.sigma > 0))
        throw DomainError("phase-shift errors must be positive when present");
    }
    // continuity of the stored (unwrapped) branch
    for (std::size_t i = 1; i < points.size(); ++i)
      if (std::abs(points[i].delta - points[i - 1].delta) >= M_PI / 2)
        throw DomainError("dataset phase shifts do not form a continuous branch");
    if (!points.empty() && std::abs(points.front().delta) >= M_PI / 2)
      throw DomainError("dataset branch does not extrapolate to delta(0) = 0");
  }
};

}  // namespace susyinv
