#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "susyinv/erf.hpp"
#include "susyinv/poles.hpp"

using namespace susyinv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
// solve the l sum rules for the last l reciprocals; used to produce exactly
// admissible pole sets for property tests (l <= 2)
PoleSet make_exact_pole_set(PartialWave l, std::vector<double> free_poles,
                            bool* ok = nullptr) {
  if (ok) *ok = true;
  if (l.l == 0) return PoleSet(l, free_poles);
  double s1 = 0, s3 = 0;
  for (double k : free_poles) {
    s1 += 1 / k;
    s3 += 1 / (k * k * k);
  }
  if (l.l == 1) {
    free_poles.push_back(-1.0 / s1);
    return PoleSet(l, free_poles);
  }
  // l = 2: rho_a + rho_b = -s1, rho_a^3 + rho_b^3 = -s3
  const double S = -s1;
  const double prod = (S * S * S + s3) / (3 * S);
  const double disc = S * S - 4 * prod;
  if (!(disc > 0) || S == 0) {
    if (ok) *ok = false;
    return PoleSet(l, free_poles);
  }
  const double ra = (S + std::sqrt(disc)) / 2, rb = (S - std::sqrt(disc)) / 2;
  if (ra == 0 || rb == 0) {
    if (ok) *ok = false;
    return PoleSet(l, free_poles);
  }
  free_poles.push_back(1 / ra);
  free_poles.push_back(1 / rb);
  return PoleSet(l, free_poles);
}
}  // namespace

TEST_CASE("K from delta") {
  CHECK_THAT(K_from_delta(1.0, M_PI / 4, PartialWave(0)), WithinRel(1.0, 1e-14));
  CHECK_THAT(K_from_delta(2.0, M_PI / 4, PartialWave(2)), WithinRel(32.0, 1e-14));
  // single-pole closed form K = -kappa
  const double k = 0.3, kap = 0.5;
  CHECK_THAT(K_from_delta(k, -std::atan(k / kap), PartialWave(0)),
             WithinRel(-0.5, 1e-13));
  CHECK_THROWS_AS(K_from_delta(0.0, 0.3, PartialWave(0)), DomainError);
  CHECK_THROWS_AS(K_from_delta(1.0, 0.0, PartialWave(0)), DomainError);
  CHECK_THROWS_AS(K_from_delta(1.0, M_PI, PartialWave(0)), DomainError);
}

TEST_CASE("S matrix from model") {
  // K = 0 -> S = -1
  ErfModel zero(PartialWave(0), {0.0});
  auto s = s_matrix_from_model(zero, 0.7);
  CHECK_THAT(s.real(), WithinAbs(-1.0, 1e-14));
  CHECK_THAT(s.imag(), WithinAbs(0.0, 1e-14));

  // single pole kappa = 0.5 at k = 0.5: S = -i, delta = -pi/4
  ErfModel one(PartialWave(0), {-0.5});
  auto s2 = s_matrix_from_model(one, 0.5);
  CHECK_THAT(s2.real(), WithinAbs(0.0, 1e-14));
  CHECK_THAT(s2.imag(), WithinAbs(-1.0, 1e-14));
}

TEST_CASE("S matrix unitarity for random models and k") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0), kk(0.01, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    ErfModel m(PartialWave(trial % 3), {coef(rng), coef(rng), coef(rng)},
               {1.0, coef(rng)});
    const double k = kk(rng);
    if (std::abs(m.eval_q(k * k)) < 1e-3) continue;
    CHECK_THAT(std::abs(s_matrix_from_model(m, k)), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("delta from model: constant K is a single arctangent") {
  ErfModel m(PartialWave(0), {-0.5});
  std::vector<double> grid;
  for (double k = 0.1; k <= 2.0; k += 0.1) grid.push_back(k);
  auto d = delta_from_model(m, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK_THAT(d[i], WithinAbs(-std::atan(grid[i] / 0.5), 1e-12));
}

TEST_CASE("delta from model matches the pole sum for the published S-wave Pade") {
  PoleSet poles(PartialWave(0), {-0.0401, -0.7540, 0.6152, 2.0424, 4.1650, 4.6});
  auto model = erf_from_poles(poles);
  std::vector<double> grid;
  for (double k = 0.05; k <= 2.06; k += 0.05) grid.push_back(k);
  auto dm = delta_from_model(model, grid);
  auto dp = delta_from_poles(poles, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK_THAT(dm[i], WithinAbs(dp[i], 1e-9));
  // high-energy branch heads to -pi for this set
  std::vector<double> far;
  for (double k = 0.05; k <= 60.0; k += 0.05) far.push_back(k);
  auto dfar = delta_from_model(model, far);
  CHECK_THAT(dfar.back(), WithinAbs(-M_PI, 0.2));
}

TEST_CASE("ERE parameters from Taylor coefficients") {
  ErfModel s_wave(PartialWave(0), {0.04219, 1.30386, 0.06883});
  auto ere = ere_parameters(s_wave);
  CHECK_THAT(ere.a, WithinAbs(-23.70, 0.01));
  CHECK_THAT(ere.r, WithinAbs(2.608, 0.001));

  // D-wave round trip of the printed parameters
  auto m = taylor_from_ere(PartialWave(2), 0.88762, 15.33061, -0.00246);
  CHECK_THAT(m.p[0], WithinAbs(-1.12660, 2e-5));
  CHECK_THAT(m.p[1], WithinAbs(7.66531, 1e-5));
  CHECK_THAT(m.p[2], WithinAbs(8.8645, 1e-3));
  auto back = ere_parameters(m);
  CHECK_THAT(back.a, WithinRel(0.88762, 1e-12));
  CHECK_THAT(back.r, WithinRel(15.33061, 1e-12));
  CHECK_THAT(back.P, WithinRel(-0.00246, 1e-12));

  // degenerate shape term reported as zero with flag
  ErfModel deg(PartialWave(0), {-1.0, 0.0, 0.0});
  auto pd = ere_parameters(deg);
  CHECK(pd.a == 1.0);
  CHECK(pd.r == 0.0);
  CHECK(pd.P == 0.0);
  CHECK(pd.shape_degenerate);

  CHECK_THROWS_AS(ere_parameters(ErfModel(PartialWave(0), {0.0, 1.0, 1.0})),
                  DomainError);
  CHECK_THROWS_AS(ere_parameters(ErfModel(PartialWave(0), {1.0, 1.0})),
                  DomainError);
}

TEST_CASE("ERF reconstruction from poles") {
  SECTION("single pole gives constant K = -kappa") {
    auto m = erf_from_poles(PoleSet(PartialWave(0), {0.5}));
    REQUIRE(m.p.size() == 1);
    CHECK_THAT(m.p[0], WithinRel(-0.5, 1e-14));
    CHECK(m.kind == ErfKind::Taylor);
    // Eq.-(2) mapping of the [0/0] model via two poles at {0.5} twice is
    // not defined; a = 2, r = 4 comes from extending to orders >= 2
    auto ext = erf_from_poles(PoleSet(PartialWave(0), {0.5}));
    CHECK_THAT(-1.0 / ext.p[0], WithinRel(2.0, 1e-14));
  }

  SECTION("published six-pole set reproduces the printed [3/2] Pade") {
    PoleSet poles(PartialWave(0), {-0.0401, -0.7540, 0.6152, 2.0424, 4.1650, 4.6});
    auto m = erf_from_poles(poles);
    REQUIRE(m.kind == ErfKind::Pade);
    REQUIRE(m.order_m() == 3);
    REQUIRE(m.order_n() == 2);
    const double pref[] = {0.0422, 1.3793, 2.0105, -0.058};
    const double qref[] = {1.0, 1.5986, -0.6164};
    for (int i = 0; i <= 3; ++i) CHECK_THAT(m.p[i], WithinRel(pref[i], 0.05));
    for (int i = 1; i <= 2; ++i) CHECK_THAT(m.q[i], WithinRel(qref[i], 0.05));
  }

  SECTION("exactly opposite pole pair degenerates (S identically 1)") {
    CHECK_THROWS_AS(erf_from_poles(PoleSet(PartialWave(0), {0.7, -0.7})),
                    NumericError);
  }

  SECTION("zero pole rejected") {
    CHECK_THROWS_AS(erf_from_poles(PoleSet(PartialWave(0), {0.0, 1.0})),
                    DomainError);
  }

  SECTION("sum-rule violation rejected for l > 0") {
    CHECK_THROWS_AS(erf_from_poles(PoleSet(PartialWave(1), {1.0, 2.0, 3.0})),
                    NumericError);
  }
}

TEST_CASE("erf/pole round trips on admissible random sets") {
  std::mt19937 rng(123);
  std::uniform_real_distribution<double> mag(0.2, 4.0);
  std::uniform_int_distribution<int> count(1, 8), sign(0, 1);

  int done = 0;
  while (done < 60) {
    const int l = done % 3;
    const int n_free = std::max(count(rng), l == 2 ? 3 : (l == 1 ? 2 : 1));
    std::vector<double> free_poles;
    for (int i = 0; i < n_free; ++i)
      free_poles.push_back((sign(rng) ? 1 : -1) * mag(rng));
    bool ok = true;
    auto ps = make_exact_pole_set(PartialWave(l), free_poles, &ok);
    if (!ok || ps.size() > 8) continue;
    // reject near-degenerate pole pairs, which defeat double-precision
    // coefficient round trips
    std::vector<double> sorted = ps.kappas;
    bool close = false;
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (std::abs(sorted[i] - sorted[i - 1]) < 5e-2) close = true;
    for (double kk : sorted)
      if (std::abs(kk) < 5e-2 || std::abs(kk) > 30) close = true;
    if (close) continue;
    if (std::abs(std::accumulate(sorted.begin(), sorted.end(), 0.0)) < 1e-3)
      continue;
    double s1inv = 0;
    for (double kk : sorted) s1inv += 1.0 / kk;
    if (l == 0 && std::abs(s1inv) < 1e-2) continue;  // near-degenerate q0

    ErfModel m;
    try {
      m = erf_from_poles(ps, 1e-8);
    } catch (const NumericError&) {
      continue;  // degenerate elementary-symmetric structure
    }
    auto rep = extract_poles(m);
    REQUIRE(static_cast<int>(rep.all_roots.size()) ==
            std::max(2 * m.order_m(), 2 * m.order_n() + 2 * l + 1));
    REQUIRE(static_cast<int>(rep.real_poles.size()) == ps.size());
    for (int i = 0; i < ps.size(); ++i)
      CHECK_THAT(rep.real_poles[i], WithinAbs(ps.kappas[i], 1e-8));

    // delta agreement between the model and the pole sum
    std::vector<double> grid;
    for (double k = 0.01; k <= 3.0; k += 0.02) grid.push_back(k);
    auto dm = delta_from_model(m, grid);
    auto dp = delta_from_poles(ps, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      CHECK_THAT(dm[i], WithinAbs(dp[i], 1e-9));
    ++done;
  }
}
