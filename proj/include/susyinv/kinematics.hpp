#pragma once

// Reduced units throughout the library: hbar = 2*mu = 1, lengths in fm,
// wave numbers in fm^-1, potentials in fm^-2.  MeV appears only at the
// I/O boundary through hbar2_over_2mu.

#include <cmath>

#include "susyinv/errors.hpp"

namespace susyinv {

struct PhysicalConstants {
  double m_n = 939.565;           // neutron mass [MeV]
  double m_p = 938.272;           // proton mass [MeV]
  double hbarc = 197.33;          // hbar*c [MeV fm]
  double hbar2_over_2mu = 41.47;  // hbar^2/(2 mu) [MeV fm^2]

  void validate() const {
    if (m_n <= 0 || m_p <= 0 || hbarc <= 0 || hbar2_over_2mu <= 0)
      throw DomainError("physical constants must be strictly positive");
  }
};

struct PartialWave {
  int l = 0;
  explicit constexpr PartialWave(int l_ = 0) : l(l_) {}
  void validate() const {
    if (l < 0) throw DomainError("orbital angular momentum l must be >= 0");
  }
};

// E_lab = hbar2_over_2mu * (m_p + m_n)/m_p * k^2  (neutron on proton target)
inline double k_from_elab(double e_lab, const PhysicalConstants& c = {}) {
  if (e_lab < 0) throw DomainError("E_lab must be >= 0");
  return std::sqrt(e_lab * c.m_p / ((c.m_p + c.m_n) * c.hbar2_over_2mu));
}

inline double elab_from_k(double k, const PhysicalConstants& c = {}) {
  if (k < 0) throw DomainError("wave number k must be >= 0");
  return c.hbar2_over_2mu * (c.m_p + c.m_n) / c.m_p * k * k;
}

}  // namespace susyinv
