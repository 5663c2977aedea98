#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "wgfm/modal.hpp"

using namespace wgfm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const Waveguide kDirichletPi(pi, BoundaryKind::Dirichlet);
const Waveguide kNeumann12(pi / 12.0, BoundaryKind::Neumann);
const Waveguide kMixedTop12(pi / 12.0, BoundaryKind::MixedDirichletTop);
const Waveguide kMixedBottom12(pi / 12.0, BoundaryKind::MixedDirichletBottom);
}  // namespace

TEST_CASE("lambda_n closed forms") {
  CHECK_THAT(lambda_n(kDirichletPi, 1), WithinAbs(1.0, 1e-15));
  CHECK(lambda_n(kNeumann12, 1) == 0.0);
  CHECK_THAT(lambda_n(kMixedTop12, 1), WithinAbs(6.0, 1e-12));
  CHECK_THAT(lambda_n(kDirichletPi, 3), WithinAbs(3.0, 1e-15));
  CHECK_THAT(lambda_n(kNeumann12, 2), WithinAbs(12.0, 1e-12));
  CHECK_THROWS_AS(lambda_n(kDirichletPi, 0), std::invalid_argument);
  CHECK_THROWS_AS(Waveguide(-1.0, BoundaryKind::Dirichlet), std::invalid_argument);
}

TEST_CASE("psi_n values and sign convention") {
  CHECK_THAT(psi_n(kNeumann12, 1, 0.1), WithinRel(std::sqrt(12.0 / pi), 1e-15));
  CHECK_THAT(psi_n(kNeumann12, 1, 0.25), WithinRel(std::sqrt(12.0 / pi), 1e-15));
  CHECK_THAT(psi_n(kDirichletPi, 1, pi / 2.0), WithinRel(std::sqrt(2.0 / pi), 1e-15));
  CHECK_THAT(psi_n(kDirichletPi, 1, 0.0), WithinAbs(0.0, 1e-16));
  // nonnegative at the midpoint for n = 1, every boundary kind
  for (const auto& wg : {kDirichletPi, kNeumann12, kMixedTop12, kMixedBottom12})
    CHECK(psi_n(wg, 1, wg.height / 2.0) > 0.0);
  // mixed kinds: Dirichlet trace on the named wall
  CHECK_THAT(psi_n(kMixedTop12, 1, pi / 12.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(psi_n(kMixedBottom12, 1, 0.0), WithinAbs(0.0, 1e-15));
  CHECK_THROWS_AS(psi_n(kDirichletPi, 1, -0.01), std::domain_error);
  CHECK_THROWS_AS(psi_n(kDirichletPi, 1, pi + 0.01), std::domain_error);
}

TEST_CASE("psi_n orthonormality via quadrature") {
  for (const auto& wg : {kDirichletPi, kNeumann12, kMixedTop12, kMixedBottom12}) {
    for (int m = 1; m <= 5; ++m) {
      for (int n = m; n <= 5; ++n) {
        const cplx ip = oracle::simpson(
            [&](double t) { return cplx(psi_n(wg, m, t) * psi_n(wg, n, t), 0.0); }, 0.0,
            wg.height, 20000);
        CHECK_THAT(ip.real(), WithinAbs(m == n ? 1.0 : 0.0, 1e-10));
      }
    }
  }
}

TEST_CASE("mu_n branch and regimes") {
  const auto prop = mu_n(kDirichletPi, 1, 2.0);
  CHECK(prop.regime == ModeRegime::Propagating);
  CHECK_THAT(prop.value.real(), WithinRel(std::sqrt(3.0), 1e-15));
  CHECK(prop.value.imag() == 0.0);

  const auto cut = mu_n(kDirichletPi, 2, lambda_n(kDirichletPi, 2));
  CHECK(cut.regime == ModeRegime::Cutoff);
  CHECK(cut.value == cplx(0.0, 0.0));

  const auto eva = mu_n(kDirichletPi, 2, 1.0);
  CHECK(eva.regime == ModeRegime::Evanescent);
  CHECK_THAT(eva.value.imag(), WithinRel(std::sqrt(3.0), 1e-15));
  CHECK(eva.value.real() == 0.0);
  // branch check against the direct complex square root
  const cplx direct = std::sqrt(cplx(1.0 - 4.0, 0.0));
  CHECK_THAT(std::abs(eva.value - cplx(direct.real(), std::abs(direct.imag()))),
             WithinAbs(0.0, 1e-15));

  // Im(mu_n) >= 0 for random k, n <= 10
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uk(1e-3, 40.0);
  for (int t = 0; t < 2000; ++t) {
    const double k = uk(rng);
    for (int n = 1; n <= 10; ++n) CHECK(mu_n(kDirichletPi, n, k).value.imag() >= 0.0);
  }
}

TEST_CASE("mu_1 strictly increasing on the passband") {
  const auto [l1, l2] = passband(kMixedTop12);
  double prev = -1.0;
  for (int i = 1; i < 400; ++i) {
    const double k = l1 + (l2 - l1) * i / 400.0;
    const double v = mu_n(kMixedTop12, 1, k).value.real();
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("passband per boundary kind") {
  const auto nb = passband(kNeumann12);
  CHECK(nb.first == 0.0);
  CHECK_THAT(nb.second, WithinRel(12.0, 1e-15));
  const auto db = passband(kDirichletPi);
  CHECK_THAT(db.first, WithinRel(1.0, 1e-15));
  CHECK_THAT(db.second, WithinRel(2.0, 1e-15));
  const auto mb = passband(kMixedTop12);
  CHECK_THAT(mb.first, WithinRel(6.0, 1e-15));
  CHECK_THAT(mb.second, WithinRel(18.0, 1e-15));
}

TEST_CASE("green_p closed forms") {
  // Neumann: (i/(2k)) (1/h) e^{ik|x1-y1|}
  const double h = pi / 12.0, k = 5.0;
  const cplx g = green_p(kNeumann12, {0.0, 0.1}, {2.0, 0.2}, k);
  const cplx want = cplx(0.0, 1.0) / (2.0 * k) * (1.0 / h) * std::exp(cplx(0.0, 2.0 * k));
  CHECK_THAT(std::abs(g - want), WithinAbs(0.0, 1e-15));

  // coincident points: i/(2 mu_1) psi_1^2
  const cplx g0 = green_p(kDirichletPi, {0.3, 1.0}, {0.3, 1.0}, 1.5);
  const double mu = std::sqrt(1.5 * 1.5 - 1.0);
  CHECK_THAT(std::abs(g0 - cplx(0.0, 1.0) / (2.0 * mu) * psi_n(kDirichletPi, 1, 1.0) *
                               psi_n(kDirichletPi, 1, 1.0)),
             WithinAbs(0.0, 1e-15));

  // Dirichlet example composed from the pieces, cross-checked against an
  // independent evaluation of the n = 1 series term
  const cplx gd = green_p(kDirichletPi, {0.0, pi / 2.0}, {1.0, pi / 2.0}, 2.0);
  const cplx direct = cplx(0.0, 1.0) / (2.0 * std::sqrt(3.0)) * (2.0 / pi) *
                      std::exp(cplx(0.0, std::sqrt(3.0)));
  CHECK_THAT(std::abs(gd - direct), WithinAbs(0.0, 1e-15));

  CHECK_THROWS_AS(green_p(kDirichletPi, {0, 1}, {1, 1}, 0.5), std::domain_error);
  CHECK_THROWS_AS(green_p(kDirichletPi, {0, 1}, {1, 1}, 1.0), std::domain_error);
  CHECK_THROWS_AS(green_p(kDirichletPi, {0, 1}, {1, 1}, 2.5), std::domain_error);
}

TEST_CASE("green_p symmetry in x and y") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-4.0, 4.0), up(0.0, pi / 12.0),
      uk(0.5, 11.5);
  for (int t = 0; t < 500; ++t) {
    const Point x{ux(rng), up(rng)}, y{ux(rng), up(rng)};
    const double k = uk(rng);
    CHECK(green_p(kNeumann12, x, y, k) == green_p(kNeumann12, y, x, k));
  }
}

TEST_CASE("green_tail_bound") {
  // frozen oracle value: direct evaluation of the stated bound at
  // (Neumann, h = pi/12, k = 11.75, sep = 0.5, n_terms = 3)
  const double got = green_tail_bound(kNeumann12, 0.5, 11.75, 3);
  {
    const double h = pi / 12.0;
    double expect = 0.0;
    for (int n = 2; n <= 5; ++n) {
      const double mn = std::abs(mu_n(kNeumann12, n, 11.75).value);
      double t = (2.0 / h) / (2.0 * mn) * std::exp(-mn * 0.5);
      if (n == 5) t /= 1.0 - std::exp(-(pi / h) * 0.5);
      expect += t;
    }
    CHECK_THAT(got, WithinRel(expect, 1e-13));
    CHECK_THAT(got, WithinRel(0.46356653356612054, 1e-10));  // frozen
  }
  // the bound dominates the true tail (direct series sum, 60 modes)
  double direct = 0.0;
  for (int n = 2; n <= 60; ++n) {
    const double mn = std::abs(mu_n(kNeumann12, n, 11.75).value);
    direct += (2.0 / (pi / 12.0)) / (2.0 * mn) * std::exp(-mn * 0.5);
  }
  CHECK(got >= direct);

  // decay to zero with separation
  CHECK(green_tail_bound(kNeumann12, 6.5, 11.75, 3) < 1e-6);
  CHECK(green_tail_bound(kNeumann12, 40.0, 11.75, 3) < 1e-40);
  CHECK(green_tail_bound(kNeumann12, 2.0, 11.75, 3) <
        green_tail_bound(kNeumann12, 1.0, 11.75, 3));

  // n_terms = 0: the n = 2 term alone times the geometric factor
  const double h = pi / 12.0, sep = 2.0;
  const double m2 = std::abs(mu_n(kNeumann12, 2, 11.75).value);
  const double want0 = (2.0 / h) / (2.0 * m2) * std::exp(-m2 * sep) /
                       (1.0 - std::exp(-(pi / h) * sep));
  CHECK_THAT(green_tail_bound(kNeumann12, sep, 11.75, 0), WithinRel(want0, 1e-13));

  CHECK_THROWS_AS(green_tail_bound(kNeumann12, 0.0, 11.75, 3), std::invalid_argument);
  CHECK_THROWS_AS(green_tail_bound(kNeumann12, 1.0, 12.5, 3), std::domain_error);
}
