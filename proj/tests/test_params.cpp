/// \file test_params.cpp
/// Derived-constant arithmetic, validation, and token parsing.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hardynls/params.hpp"
#include "test_util.hpp"

using namespace hardynls;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testutil::thrown_code;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("critical coupling and mass-critical exponent") {
  CHECK(hardy_critical_coupling(3) == 0.25);
  CHECK(hardy_critical_coupling(4) == 1.0);
  CHECK(hardy_critical_coupling(5) == 2.25);
  CHECK_THAT(mass_critical_exponent(3), WithinRel(10.0 / 3.0, 1e-15));
  CHECK(mass_critical_exponent(4) == 3.0);
  CHECK_THAT(mass_critical_exponent(6), WithinRel(8.0 / 3.0, 1e-15));
  CHECK(thrown_code([] { mass_critical_exponent(2); }) == Errc::InvalidDimension);
}

TEST_CASE("derived constants: d=3, p=4, critical coupling") {
  const auto dc = derive_constants({3, 4.0, 0.25});
  CHECK(dc.c_star == 0.25);
  CHECK(dc.theta == 0.75);
  CHECK(dc.kappa == 0.5);
  CHECK(dc.sigma == 1.0);
  CHECK(dc.drift == 1.0);
  CHECK_THAT(dc.mass_critical_p, WithinRel(10.0 / 3.0, 1e-15));
  REQUIRE(dc.q.has_value());
  CHECK_THAT(*dc.q, WithinRel(2.0, 1e-14));  // (12+16-24)/(12-6-4)
  CHECK_FALSE(dc.mass_critical);
  CHECK(dc.critical_coupling);
}

TEST_CASE("derived constants: d=3, p=10/3, critical coupling (mass-critical)") {
  const auto dc = derive_constants({3, 10.0 / 3.0, 0.25});
  CHECK_THAT(dc.theta, WithinRel(0.6, 1e-14));
  CHECK_THAT(dc.sigma, WithinRel(2.0 / 3.0, 1e-14));
  CHECK(dc.drift == 1.0);
  CHECK(dc.mass_critical);
  CHECK_THAT(dc.theta * (10.0 / 3.0), WithinRel(2.0, 1e-14));
  CHECK_FALSE(dc.q.has_value());  // q undefined at the mass-critical exponent
}

TEST_CASE("derived constants: classical limit c=0") {
  const auto dc = derive_constants({3, 4.0, 0.0});
  CHECK(dc.kappa == 0.0);
  CHECK(dc.sigma == 0.0);
  CHECK(dc.drift == 2.0);  // d-1
  CHECK_FALSE(dc.critical_coupling);
}

TEST_CASE("derived constants: d=3, p=10/3, half-critical coupling") {
  const auto dc = derive_constants({3, 10.0 / 3.0, 0.125});
  const double kappa = 0.5 - std::sqrt(2.0) / 4.0;
  CHECK_THAT(dc.kappa, WithinRel(kappa, 1e-14));
  CHECK_THAT(dc.sigma, WithinRel(kappa * 4.0 / 3.0, 1e-14));
  CHECK_THAT(dc.drift, WithinRel(1.0 + std::sqrt(2.0) / 2.0, 1e-14));
  CHECK(dc.mass_critical);  // mass-criticality depends on p only
  CHECK_FALSE(dc.critical_coupling);
}

TEST_CASE("derived constants: d=4, p=3, critical coupling") {
  const auto dc = derive_constants({4, 3.0, 1.0});
  CHECK(dc.kappa == 1.0);
  CHECK(dc.sigma == 1.0);
  CHECK(dc.drift == 1.0);
  CHECK_THAT(dc.theta, WithinRel(2.0 / 3.0, 1e-14));
  CHECK(dc.mass_critical);
}

TEST_CASE("theta stays in (0,1) and kappa is monotone in c") {
  for (int d : {3, 4, 5, 6}) {
    const double p_lo = 2.0 + 1e-3;
    const double p_hi = 2.0 * d / double(d - 2) - 1e-3;
    for (double p : {p_lo, 0.5 * (p_lo + p_hi), p_hi}) {
      const double cs = hardy_critical_coupling(d);
      double prev_kappa = -1.0;
      for (double frac : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto dc = derive_constants({d, p, frac * cs});
        CHECK(dc.theta > 0.0);
        CHECK(dc.theta < 1.0);
        CHECK(dc.kappa > prev_kappa - 1e-15);
        prev_kappa = dc.kappa;
      }
      CHECK_THAT(derive_constants({d, p, cs}).kappa,
                 WithinRel(0.5 * (d - 2), 1e-14));
      CHECK(derive_constants({d, p, 0.0}).kappa == 0.0);
    }
  }
}

TEST_CASE("validation rejects out-of-domain parameters") {
  CHECK(thrown_code([] { derive_constants({2, 3.0, 0.0}); }) ==
        Errc::InvalidDimension);
  CHECK(thrown_code([] { derive_constants({3, 2.0, 0.0}); }) ==
        Errc::InvalidPower);
  CHECK(thrown_code([] { derive_constants({3, 6.0, 0.0}); }) ==
        Errc::InvalidPower);  // energy-critical 2* excluded
  CHECK(thrown_code([] { derive_constants({3, 4.0, 0.3}); }) ==
        Errc::InvalidCoupling);
  CHECK(thrown_code([] { derive_constants({3, 4.0, -0.1}); }) ==
        Errc::InvalidCoupling);
  CHECK_FALSE(thrown_code([] { derive_constants({3, 4.0, 0.25}); }).has_value());
}

TEST_CASE("effective inverse-square coefficient of the half-line reduction") {
  // Critical coupling always gives -1/4, independent of dimension.
  for (int d : {3, 4, 5, 6}) {
    const ModelParams mp{d, mass_critical_exponent(d), hardy_critical_coupling(d)};
    CHECK_THAT(effective_inverse_square_coefficient(mp), WithinAbs(-0.25, 1e-15));
    // rho(rho-1) = C2 ties the branch exponent to the coefficient.
    const double rho = singular_branch_exponent(mp);
    CHECK_THAT(rho * (rho - 1.0),
               WithinAbs(effective_inverse_square_coefficient(mp), 1e-14));
  }
  CHECK(effective_inverse_square_coefficient({3, 4.0, 0.0}) == 0.0);
  CHECK_THAT(effective_inverse_square_coefficient({4, 3.0, 1.0}),
             WithinAbs(-0.25, 1e-15));
  CHECK_THAT(singular_branch_exponent({3, 10.0 / 3.0, 0.25}),
             WithinRel(0.5, 1e-14));
}

TEST_CASE("sphere surface measure") {
  CHECK_THAT(omega_d(3), WithinRel(4.0 * kPi, 1e-14));
  CHECK_THAT(omega_d(4), WithinRel(2.0 * kPi * kPi, 1e-14));
  CHECK_THAT(omega_d(6), WithinRel(kPi * kPi * kPi, 1e-14));
}

TEST_CASE("exponent and coupling token parsing") {
  CHECK(parse_exponent("10/3") == 10.0 / 3.0);
  CHECK(parse_exponent("3.5") == 3.5);
  CHECK(parse_exponent("4") == 4.0);
  CHECK(parse_coupling("critical", 3) == 0.25);
  CHECK(parse_coupling("critical", 4) == 1.0);
  CHECK(parse_coupling("0.125", 3) == 0.125);
  CHECK(parse_coupling("1/8", 3) == 0.125);
  CHECK(thrown_code([] { parse_exponent("abc"); }) == Errc::InvalidArgument);
  CHECK(thrown_code([] { parse_exponent("3/"); }) == Errc::InvalidArgument);
  CHECK(thrown_code([] { parse_exponent("3/0"); }) == Errc::InvalidArgument);
  CHECK(thrown_code([] { parse_exponent("3.5x"); }) == Errc::InvalidArgument);
}
