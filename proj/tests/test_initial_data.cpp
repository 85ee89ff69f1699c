#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pj/initial_data.hpp"

using namespace pj::data;

namespace {

InitialData sin4pi() {
  // u0 = -cos(4 pi a)/(4 pi), so u0' = sin(4 pi a)
  return InitialData::fourier({{2, -1.0 / (4.0 * M_PI), 0.0}});
}

InitialData pc_ex() {
  // slopes (-1, +1, -1) on (0,1/4), (1/4,3/4), (3/4,1)
  return InitialData::piecewise_constant({0.0, 0.25, 0.75, 1.0},
                                         {-1.0, 1.0, -1.0});
}

InitialData pl_ex() {
  // u0 = 2a^2 - a on [0,1/2], -2a^2 + 3a - 1 on (1/2,1]
  return InitialData::piecewise_linear({0.0, 0.5, 1.0},
                                       {{-1.0, 4.0}, {1.0, -4.0}});
}

}  // namespace

TEST_CASE("fourier evaluation") {
  auto d = sin4pi();
  CHECK(d.slope(0.125) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.slope(0.375) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(d.u0(0.0) == doctest::Approx(-1.0 / (4.0 * M_PI)).epsilon(1e-14));
  // periodic extension
  CHECK(d.slope(1.3) == doctest::Approx(d.slope(0.3)).epsilon(1e-12));
  CHECK(d.curvature(0.0) == doctest::Approx(4.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("piecewise-constant slope validation and evaluation") {
  auto d = pc_ex();
  CHECK(d.slope(0.1) == -1.0);
  CHECK(d.slope(0.5) == 1.0);
  CHECK(d.u0(0.1) == doctest::Approx(-0.1).epsilon(1e-14));
  CHECK(d.u0(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(d.slope(1.1) == d.slope(0.1));
  CHECK_THROWS_AS(d.curvature(0.3), std::domain_error);

  CHECK_THROWS_AS(
      InitialData::piecewise_constant({0.0, 0.5, 1.0}, {1.0, 1.0}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      InitialData::piecewise_constant({0.0, 0.7, 0.3, 1.0}, {1.0, -1.0, 0.0}),
      std::invalid_argument);
}

TEST_CASE("piecewise-linear slope validation and evaluation") {
  auto d = pl_ex();
  CHECK(d.slope(0.0) == doctest::Approx(-1.0));
  CHECK(d.slope(0.5) == doctest::Approx(1.0));
  CHECK(d.slope(0.25) == doctest::Approx(0.0));
  CHECK(d.u0(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(d.u0(0.25) == doctest::Approx(2 * 0.0625 - 0.25).epsilon(1e-12));
  CHECK(d.curvature(0.2) == 4.0);
  CHECK(d.curvature(0.7) == -4.0);

  // discontinuous slope rejected
  CHECK_THROWS_AS(InitialData::piecewise_linear(
                      {0.0, 0.5, 1.0}, {{-1.0, 4.0}, {0.5, -4.0}}),
                  std::invalid_argument);
}

TEST_CASE("slope extrema: smooth data") {
  auto ex = slope_extrema(sin4pi());
  CHECK(ex.M0 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ex.m0 == doctest::Approx(-1.0).epsilon(1e-10));
  REQUIRE(ex.maxima.size() == 2);
  REQUIRE(ex.minima.size() == 2);
  CHECK(ex.maxima[0].location == doctest::Approx(0.125).epsilon(1e-9));
  CHECK(ex.maxima[1].location == doctest::Approx(0.625).epsilon(1e-9));
  CHECK(ex.minima[0].location == doctest::Approx(0.375).epsilon(1e-9));
  CHECK(ex.minima[1].location == doctest::Approx(0.875).epsilon(1e-9));
  // C1 = u0'''(max)/2 = -(4 pi)^2/2 * sin''' ... = -8 pi^2 * ...
  CHECK(ex.maxima[0].curvature_coeff < 0.0);
  CHECK(ex.minima[0].curvature_coeff > 0.0);
  CHECK_FALSE(ex.any_degenerate());
}

TEST_CASE("slope extrema: two-mode data used in the one-sided example") {
  // u0 = cos(2 pi a) + 2 cos(4 pi a): m0 ~ -30 at ~0.13
  auto d = InitialData::fourier({{1, 1.0, 0.0}, {2, 2.0, 0.0}});
  auto ex = slope_extrema(d);
  CHECK(ex.m0 == doctest::Approx(-30.0).epsilon(0.02));
  CHECK(ex.minima.front().location == doctest::Approx(0.13).epsilon(0.05));
}

TEST_CASE("slope extrema: interval-valued locations for PC data") {
  auto ex = slope_extrema(pc_ex());
  CHECK(ex.M0 == 1.0);
  CHECK(ex.m0 == -1.0);
  REQUIRE(ex.maxima.size() == 1);
  CHECK(ex.maxima[0].is_interval);
  CHECK(ex.maxima[0].interval_left == doctest::Approx(0.25));
  CHECK(ex.maxima[0].interval_right == doctest::Approx(0.75));
  CHECK(ex.maxima[0].measure == doctest::Approx(0.5));
  REQUIRE(ex.minima.size() == 2);
  double min_measure = 0.0;
  for (const auto& s : ex.minima) min_measure += s.measure;
  CHECK(min_measure == doctest::Approx(0.5));
}

TEST_CASE("slope extrema: kinks for PL data") {
  auto ex = slope_extrema(pl_ex());
  CHECK(ex.M0 == doctest::Approx(1.0));
  CHECK(ex.m0 == doctest::Approx(-1.0));
  REQUIRE(ex.maxima.size() == 1);
  CHECK(ex.maxima[0].is_kink);
  CHECK(ex.maxima[0].location == doctest::Approx(0.5));
  REQUIRE(ex.minima.size() == 1);
  CHECK(ex.minima[0].location == doctest::Approx(0.0));
}

TEST_CASE("extrema bound the slope on a dense grid") {
  for (auto d : {sin4pi(), pc_ex(), pl_ex()}) {
    auto ex = slope_extrema(d);
    for (int i = 0; i < 10000; ++i) {
      const double a = double(i) / 10000.0;
      const double s = d.slope(a);
      CHECK(s <= ex.M0 + 1e-12);
      CHECK(s >= ex.m0 - 1e-12);
    }
  }
}

TEST_CASE("constant slope is rejected") {
  CHECK_THROWS_AS(
      slope_extrema(InitialData::piecewise_constant({0.0, 1.0}, {0.0})),
      std::invalid_argument);
}
