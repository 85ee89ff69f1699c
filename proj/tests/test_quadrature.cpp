#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pj/quadrature.hpp"

using namespace pj::quad;

TEST_CASE("adaptive quadrature on smooth integrands") {
  auto r = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(r.converged);

  auto poly = integrate_adaptive([](double x) { return 3.0 * x * x; }, -1.0, 2.0);
  CHECK(poly.value == doctest::Approx(9.0).epsilon(1e-13));
}

TEST_CASE("tanh-sinh handles algebraic endpoint singularities") {
  // int_0^1 x^(-1/2) dx = 2
  auto r = integrate_tanh_sinh([](double x) { return 1.0 / std::sqrt(x); },
                               0.0, 1.0);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(r.converged);

  // int_0^1 x^(-2/3) dx = 3, steeper
  auto s = integrate_tanh_sinh([](double x) { return std::pow(x, -2.0 / 3.0); },
                               0.0, 1.0);
  CHECK(s.value == doctest::Approx(3.0).epsilon(1e-10));

  // log singularity: int_0^1 ln(x) dx = -1
  auto l = integrate_tanh_sinh([](double x) { return std::log(x); }, 0.0, 1.0);
  CHECK(l.value == doctest::Approx(-1.0).epsilon(1e-11));
}

TEST_CASE("singular-aware splitting resolves sharp interior peaks") {
  // int_-1^1 (eps + x^2)^(-1) dx = 2 atan(1/sqrt(eps))/sqrt(eps)
  for (double eps : {1e-4, 1e-8, 1e-10}) {
    auto f = [eps](double x) { return 1.0 / (eps + x * x); };
    const double exact = 2.0 * std::atan(1.0 / std::sqrt(eps)) / std::sqrt(eps);
    auto r = integrate_singular(f, -1.0, 1.0, {},
                                {{0.0, std::sqrt(eps), false}}, 1e-12);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-9));
  }
  // hard power-law at an interior point: int_-1^1 |x|^(-1/3) dx = 3
  auto h = integrate_singular([](double x) { return std::pow(std::abs(x), -1.0 / 3.0); },
                              -1.0, 1.0, {}, {{0.0, 1e-15, true}}, 1e-12);
  CHECK(h.value == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("trapezoid refinement is spectrally accurate for periodic data") {
  auto f = [](double x) { return 1.0 / (2.0 + std::sin(2.0 * M_PI * x)); };
  auto r = trapezoid_refine(f, 0.0, 1.0, 1e-13, 1 << 20, true);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
}
