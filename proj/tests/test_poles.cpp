#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "susyinv/poles.hpp"

using namespace susyinv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const std::vector<double> kSWavePoles = {-0.0401, -0.7540, 0.6152,
                                         2.0424,  4.1650,  4.6};
const std::vector<double> kDWavePoles = {-0.4294, -0.8827, -8.7653, 0.7750,
                                         0.4376};
// published S-wave 3-term Taylor coefficients
const ErfModel kSTaylor{PartialWave(0), {0.04219, 1.30386, 0.06883}};
// D-wave Taylor consistent with the published pole list (K(0) = -prod rules)
const ErfModel kDTaylor{PartialWave(2), {1.126608, 7.66531, 8.86367}};
}  // namespace

TEST_CASE("pole polynomial structure") {
  SECTION("single constant K = -kappa0") {
    ErfModel m(PartialWave(0), {-0.5});
    auto poly = pole_polynomial(m);
    REQUIRE(poly.degree == 1);
    CHECK_THAT(poly.coeffs[0], WithinRel(-0.5, 1e-15));
    CHECK_THAT(poly.coeffs[1], WithinRel(1.0, 1e-15));
  }
  SECTION("S-wave Taylor has degree max(4, 1) = 4") {
    CHECK(pole_polynomial(kSTaylor).degree == 4);
  }
  SECTION("D-wave Taylor has degree max(4, 5) = 5") {
    ErfModel m(PartialWave(2), {-1.12660, 7.66531, 8.8645});
    CHECK(pole_polynomial(m).degree == 5);
  }
  SECTION("degenerate leading coefficient is reported") {
    // l = 0, M = 1, N = 1: degree max(2, 3) = 3 carried by q1; q1 -> 0 is
    // encoded by a Pade model whose numerator order wins exactly
    ErfModel m(PartialWave(0), {1.0, 2.0}, {1.0, 0.0});
    auto poly = pole_polynomial(m);
    CHECK(poly.degenerate);
    CHECK(poly.reduced_degree == 2);
    CHECK_THROWS_AS(extract_poles(m), NumericError);
  }
}

TEST_CASE("pole extraction reproduces the published S-wave Taylor poles") {
  auto rep = extract_poles(kSTaylor);
  REQUIRE(rep.all_roots.size() == 4);
  REQUIRE(rep.real_poles.size() == 4);
  CHECK(!rep.has_complex);
  const std::vector<double> want = {-4.6917, -0.0401, 0.8365, 3.8953};
  for (int i = 0; i < 4; ++i)
    CHECK_THAT(rep.real_poles[i], WithinAbs(want[i], 1e-3));
  for (double r : rep.residuals) CHECK(r <= 1e-8);
}

TEST_CASE("pole extraction reproduces the published D-wave poles") {
  auto rep = extract_poles(kDTaylor);
  REQUIRE(rep.all_roots.size() == 5);
  REQUIRE(rep.real_poles.size() == 5);
  const std::vector<double> want = {-8.7653, -0.8827, -0.4294, 0.4376, 0.7750};
  for (int i = 0; i < 5; ++i)
    CHECK_THAT(rep.real_poles[i], WithinAbs(want[i], 5e-3));
}

TEST_CASE("trivial single-pole extraction") {
  auto rep = extract_poles(ErfModel(PartialWave(0), {-0.5}));
  REQUIRE(rep.real_poles.size() == 1);
  CHECK_THAT(rep.real_poles[0], WithinRel(0.5, 1e-12));
}

TEST_CASE("complex pole pairs are flagged and mirror-symmetric") {
  // shape coefficient strong enough to push a pair off the imaginary axis
  ErfModel m(PartialWave(0), {0.1, -1.0, 2.0});
  auto rep = extract_poles(m);
  CHECK(rep.all_roots.size() == 4);
  if (rep.has_complex) {
    CHECK(rep.symmetry_ok);
    CHECK(rep.complex_poles.size() % 2 == 0);
  }
  CHECK(rep.real_poles.size() + rep.complex_poles.size() == 4);
}

TEST_CASE("sum rule residuals") {
  SECTION("l = 0 has no conditions") {
    CHECK(sum_rule_residuals(PoleSet(PartialWave(0), kSWavePoles)).empty());
  }
  SECTION("l = 1 symmetric pair is exact") {
    auto res = sum_rule_residuals(PoleSet(PartialWave(1), {1.0, -1.0}));
    REQUIRE(res.size() == 1);
    CHECK_THAT(res[0], WithinAbs(0.0, 1e-15));
  }
  SECTION("published D-wave set satisfies the rules at printed precision") {
    auto res = sum_rule_residuals(PoleSet(PartialWave(2), kDWavePoles));
    REQUIRE(res.size() == 2);
    CHECK(std::abs(res[0]) <= 5e-3);
    CHECK(std::abs(res[1]) <= 1e-2);
  }
}

TEST_CASE("arctangent phase sum") {
  PoleSet one(PartialWave(0), {0.5});
  CHECK_THAT(delta_from_poles(one, 0.5), WithinAbs(-M_PI / 4, 1e-15));
  CHECK(delta_from_poles(one, 0.0) == 0.0);

  PoleSet s(PartialWave(0), kSWavePoles);
  PoleSet d(PartialWave(2), kDWavePoles);
  // limits -(pi/2)(n+ - n-): S: -(pi/2)(4-2) = -pi, D: -(pi/2)(2-3) = +pi/2
  const double k_far = 1e5;
  CHECK_THAT(delta_from_poles(s, k_far), WithinAbs(-M_PI, 1e-3));
  CHECK_THAT(delta_from_poles(d, k_far), WithinAbs(M_PI_2, 1e-3));
  // approach rate is sum(kappa)/k
  double sum_s = 0;
  for (double kj : kSWavePoles) sum_s += kj;
  CHECK_THAT(delta_from_poles(s, 100.0), WithinAbs(-M_PI + sum_s / 100.0, 1e-3));
}

TEST_CASE("pole set validation") {
  SECTION("published D-wave set") {
    auto v = validate_pole_set(PoleSet(PartialWave(2), kDWavePoles));
    CHECK(v.valid);
    CHECK(v.n_positive == 2);
    CHECK(v.n_negative == 3);
    CHECK_THAT(v.high_energy_limit, WithinRel(M_PI_2, 1e-14));
  }
  SECTION("single pole violates the l = 2 sum rule") {
    auto v = validate_pole_set(PoleSet(PartialWave(2), {1.0}));
    CHECK_FALSE(v.valid);
  }
  SECTION("zero pole is invalid") {
    auto v = validate_pole_set(PoleSet(PartialWave(0), {0.0, 1.0}));
    CHECK_FALSE(v.valid);
  }
}

TEST_CASE("extraction root count follows max(2M, 2N+2l+1)") {
  for (int l = 0; l <= 3; ++l) {
    ErfModel m(PartialWave(l), {0.3, 1.1, -0.2}, {1.0, 0.4});
    const int n = std::max(2 * m.order_m(), 2 * m.order_n() + 2 * l + 1);
    auto rep = extract_poles(m);
    CHECK(static_cast<int>(rep.all_roots.size()) == n);
    CHECK(rep.real_poles.size() + rep.complex_poles.size() == rep.all_roots.size());
    for (double r : rep.residuals) CHECK(r <= 1e-8);
  }
}
