#include <catch2/catch_amalgamated.hpp>

#include "susyinv/kinematics.hpp"

using namespace susyinv;

TEST_CASE("lab energy to wave number") {
  PhysicalConstants c;
  CHECK(k_from_elab(0.0, c) == 0.0);
  CHECK_THAT(k_from_elab(82.997, c), Catch::Matchers::WithinAbs(1.0000, 1e-4));
  CHECK_THAT(k_from_elab(350.0, c), Catch::Matchers::WithinAbs(2.053475, 1e-4));
  CHECK_THROWS_AS(k_from_elab(-1.0, c), DomainError);
}

TEST_CASE("wave number to lab energy") {
  PhysicalConstants c;
  CHECK(elab_from_k(0.0, c) == 0.0);
  CHECK_THAT(elab_from_k(1.0, c), Catch::Matchers::WithinAbs(82.997, 5e-3));
  CHECK_THROWS_AS(elab_from_k(-0.5, c), DomainError);
}

TEST_CASE("conversions are mutually inverse") {
  PhysicalConstants c;
  for (double e : {1e-6, 0.5, 12.0, 123.4, 350.0, 5000.0}) {
    const double e2 = elab_from_k(k_from_elab(e, c), c);
    CHECK_THAT(e2, Catch::Matchers::WithinRel(e, 1e-12));
  }
  for (double k : {1e-4, 0.3, 1.0, 2.5, 10.0}) {
    const double k2 = k_from_elab(elab_from_k(k, c), c);
    CHECK_THAT(k2, Catch::Matchers::WithinRel(k, 1e-12));
  }
}

TEST_CASE("k grows monotonically with energy") {
  PhysicalConstants c;
  double prev = -1;
  for (double e = 0; e <= 400; e += 7.3) {
    const double k = k_from_elab(e, c);
    CHECK(k > prev);
    prev = k;
  }
}

TEST_CASE("constants are overridable and validated") {
  PhysicalConstants c;
  c.hbar2_over_2mu = 20.7;  // e.g. nucleon-nucleus style value
  CHECK(k_from_elab(82.997, c) > 1.0);
  c.m_p = -1;
  CHECK_THROWS_AS(c.validate(), DomainError);
}
