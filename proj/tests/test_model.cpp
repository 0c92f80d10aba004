#include "efimov/model.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace efimov;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double barrier_by_hand(double D, double B, double chi, double r) {
  const double c = 1.0 / std::cosh(chi * r);
  return D * c * c + B * std::exp(-2.0 * std::pow(chi * r - 2.0, 2));
}

} // namespace

TEST_CASE("barrier shape matches the closed form inside the support") {
  const auto p = make_sech_barrier(-138.27, 128.49, 4.6667);
  for (double r : {0.0, 0.1, 0.3, 0.4286, 0.7, 0.99})
    CHECK_THAT(evaluate(p, r), WithinRel(barrier_by_hand(-138.27, 128.49, 4.6667, r), 1e-14));
  CHECK(evaluate(p, 1.0001) == 0.0);
  CHECK(evaluate(p, -0.1) == 0.0);
}

TEST_CASE("cutoff moves the support and keeps the tail") {
  const auto p = make_sech_barrier(-138.27, 128.49, 4.6667, 1.0, 4.0);
  CHECK(support(p) == 4.0);
  CHECK_THAT(evaluate(p, 2.0), WithinRel(barrier_by_hand(-138.27, 128.49, 4.6667, 2.0), 1e-14));
  CHECK(evaluate(p, 4.01) == 0.0);
}

TEST_CASE("length scaling of the barrier") {
  // V(r; r0) = V(r/r0; 1)
  const auto a = make_sech_barrier(-10.0, 3.0, 2.0, 1.0);
  const auto b = make_sech_barrier(-10.0, 3.0, 2.0, 2.5);
  for (double x : {0.05, 0.3, 0.8})
    CHECK_THAT(evaluate(b, 2.5 * x), WithinRel(evaluate(a, x), 1e-14));
}

TEST_CASE("analytic derivative agrees with a difference quotient") {
  const auto p = make_sech_barrier(-138.27, 128.49, 4.6667);
  const double h = 1e-6;
  for (double r : {0.1, 0.35, 0.6, 0.9}) {
    const double fd = (evaluate(p, r + h) - evaluate(p, r - h)) / (2 * h);
    CHECK_THAT(evaluate_derivative(p, r), WithinRel(fd, 1e-7));
  }
}

TEST_CASE("square well is flat and open at r0") {
  const auto p = make_square_well(-3.0, 2.0);
  CHECK(evaluate(p, 0.0) == -3.0);
  CHECK(evaluate(p, 1.999) == -3.0);
  CHECK(evaluate(p, 2.0) == 0.0);
  CHECK(evaluate_derivative(p, 1.0) == 0.0);
  CHECK_FALSE(is_smooth(p));
  CHECK(depth(p) == -3.0);
  const auto b = breakpoints(p);
  REQUIRE(b.size() == 2);
  CHECK(b[1] == 2.0);
}

TEST_CASE("tabulated potential validates its grid") {
  CHECK_THROWS_AS(make_tabulated({0, 1, 2}, {0, 1, 2}), Error);
  CHECK_THROWS_AS(make_tabulated({0.1, 1, 2, 3}, {0, 1, 2, 3}), Error);
  CHECK_THROWS_AS(make_tabulated({0, 1, 1, 3}, {0, 1, 2, 3}), Error);
  CHECK_THROWS_AS(make_tabulated({0, 1, 2, 3}, {0, 1, 2}), Error);
}

TEST_CASE("tabulated potential interpolates and reports its range") {
  std::vector<double> r, V;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    r.push_back(static_cast<double>(i) / n);
    V.push_back(barrier_by_hand(-10.0, 4.0, 2.0, r.back()));
  }
  const auto p = make_tabulated(r, V);
  CHECK(p.r0 == 1.0);
  CHECK(evaluate(p, 0.5) == V[200]);
  for (double x : {0.0123, 0.377, 0.8111})
    CHECK_THAT(evaluate(p, x), WithinAbs(barrier_by_hand(-10.0, 4.0, 2.0, x), 1e-5));
  // beyond the last point the potential is zero, never extrapolated
  CHECK(evaluate(p, 1.2) == 0.0);
  CHECK(breakpoints(p).size() == r.size());
}

TEST_CASE("linear data is reproduced exactly") {
  const auto p = make_tabulated({0, 0.25, 0.5, 0.75, 1.0}, {-4, -3, -2, -1, 0});
  CHECK_THAT(evaluate(p, 0.6), WithinAbs(-1.6, 1e-14));
  CHECK_THAT(evaluate_derivative(p, 0.6), WithinAbs(4.0, 1e-12));
}

TEST_CASE("matching radius and the rho threshold") {
  const auto p = make_square_well(-1.0, 1.5);
  CHECK(rho_c(p, 1.0) == 3.0);
  CHECK_THAT(rho_c(p, 4.0), WithinRel(6.0, 1e-15));
  try {
    make_modified(p, 2.9, 1.0);
    FAIL("expected RhoTooSmall");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::RhoTooSmall);
  }
  CHECK_NOTHROW(make_modified(p, 3.0, 1.0));
}

TEST_CASE("modified potential") {
  const auto p = make_sech_barrier(-138.27, 128.49, 4.6667);
  SECTION("reduces to V at large rho") {
    const auto mp = make_modified(p, 1e6, 1.0);
    for (double r : {0.1, 0.5, 0.9})
      CHECK_THAT(evaluate_modified(mp, r), WithinRel(evaluate(p, r), 1e-10));
  }
  SECTION("argument is (rho/sqrt mu) sin(sqrt mu r/rho)") {
    const double rho = 5.0, mu = 2.0;
    const auto mp = make_modified(p, rho, mu);
    const double r = 0.8;
    const double x = rho / std::sqrt(mu) * std::sin(std::sqrt(mu) * r / rho);
    CHECK_THAT(evaluate_modified(mp, r), WithinRel(evaluate(p, x), 1e-14));
  }
  SECTION("support maps to r_c") {
    const double rho = 2.0;
    const auto mp = make_modified(p, rho, 1.0);
    // sin(r_c / rho) = support / rho = 1/2
    CHECK_THAT(mp.r_c, WithinRel(rho * std::numbers::pi / 6.0, 1e-12));
    CHECK_THAT(modified_argument(mp, mp.r_c), WithinRel(1.0, 1e-12));
    CHECK(evaluate_modified(mp, mp.r_c * 1.0001) == 0.0);
  }
  SECTION("r_c over the rho-to-support ratio") {
    // r_c = (rho/sqrt mu) asin(sqrt mu R/rho): ratio r_c/R -> 1 as rho grows
    double prev = 10.0;
    for (double rho : {2.0, 4.0, 8.0, 16.0, 64.0}) {
      const auto mp = make_modified(p, rho, 1.0);
      const double ratio = mp.r_c / support(p);
      CHECK(ratio > 1.0);
      CHECK(ratio < prev);
      prev = ratio;
    }
    CHECK_THAT(prev, WithinAbs(1.0, 1e-4));
  }
}

TEST_CASE("depth finds the well minimum") {
  const auto p = make_sech_barrier(-138.27, 128.49, 4.6667);
  double vmin = 0.0;
  for (int i = 0; i <= 100000; ++i)
    vmin = std::min(vmin, barrier_by_hand(-138.27, 128.49, 4.6667, i * 1e-5));
  // the Gaussian bump lifts the bottom slightly above D
  CHECK(vmin > -138.27);
  CHECK_THAT(depth(p), WithinRel(vmin, 1e-6));
}
