#include "efimov/effpot.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

using namespace efimov;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {


// Zero-range angular function, templated so a complex step gives d/ds.
template <class T> T chi(T s, double x) {
  const double lo = std::abs(kPi / 3 - x), hi = kPi / 2 - std::abs(kPi / 6 - x);
  return std::sinh(s * (x - kPi / 2)) / s +
         4.0 / (std::sqrt(3.0) * s * s) * (std::cosh(s * (hi - kPi / 2)) - std::cosh(s * (lo - kPi / 2)));
}

double integrate(const std::function<double(double)> &f) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double sum = 0.0;
  const double cuts[] = {0.0, kPi / 6, kPi / 3, kPi / 2};
  for (int i = 0; i < 3; ++i)
    sum += GK::integrate(f, cuts[i], cuts[i + 1], 15, 1e-14);
  return sum;
}

// ||d/ds (chi/||chi||)||^2 from a complex-step derivative.
double m0_oracle() {
  const double s0 = efimov_constant().s0, h = 1e-20;
  auto d = [&](double x) { return chi(std::complex<double>(s0, h), x).imag() / h; };
  auto c = [&](double x) { return chi(s0, x); };
  const double cc = integrate([&](double x) { return c(x) * c(x); });
  const double cd = integrate([&](double x) { return c(x) * d(x); });
  const double dd = integrate([&](double x) { return d(x) * d(x); });
  return (dd * cc - cd * cd) / (cc * cc);
}

TwoBodyParams well_params(double Re, double Rv) { return make_params(0.0, Re, Rv); }

} // namespace

TEST_CASE("effective potential from lambda and Q") {
  CHECK_THAT(v_eff(efimov_constant().lambda0, 0.0, 1.0), WithinAbs(-1.2625, 1e-4));
  CHECK(v_eff(-3.75, 0.0, 7.0) == 0.0);
  const double v = v_eff(-4.6, -0.3, 3.0, 2.0);
  CHECK_THAT(v_eff(-4.6, -0.3 / 4, 6.0, 2.0), WithinRel(v / 4, 1e-14));
  CHECK_THAT(v_eff(-4.6, -0.3, 3.0, 1.0) * 2.0, WithinRel(v, 1e-14));
}

TEST_CASE("M0 matches an independent complex-step quadrature") {
  const auto e = m0_estimate();
  CHECK_THAT(e.M0, WithinRel(m0_oracle(), 1e-6));
  CHECK(e.M0 > 0.0);
  CHECK(std::abs(e.overlap_derivative) < 1e-9);
  CHECK(e.richardson_error < 1e-6);
}

TEST_CASE("M0 is stable under quadrature refinement") {
  const double a = m0_estimate(4, 40).M0, b = m0_estimate(8, 80).M0;
  CHECK_THAT(b, WithinRel(a, 1e-6));
  CHECK_THAT(m0_constant(), WithinRel(a, 1e-8));
  CHECK(universal_constants().M0 == m0_constant());
}

TEST_CASE("zero-range Q") {
  const auto p = well_params(1.0, 0.1);
  const double q = q_zero_range(m0_constant(), p, 10.0);
  CHECK(q < 0.0); // nu0^2 < 0
  CHECK_THAT(q_zero_range(m0_constant(), p, 20.0), WithinRel(q / 16, 1e-13));
  CHECK_THAT(q_zero_range(m0_constant(), p, 10.0, 3.0), WithinRel(3 * q, 1e-13));
  CHECK(q_zero_range(m0_constant(), well_params(2.0, efimov_constant().nu0_squared), 10.0) == 0.0);
}

TEST_CASE("box Q coefficient") {
  const double pi2 = kPi * kPi;
  const auto p = well_params(1.0, pi2 / 24);
  const double c = c0_constant() * efimov_constant().nu0_squared;
  CHECK_THAT(q_box(p, 10.0) * 1000.0, WithinRel(c * (0.5 - pi2 / 12), 1e-12));
  CHECK(q_box(well_params(4.0, 1.0), 5.0) == 0.0);
  CHECK_THAT(q_box(p, 10.0, 4.0), WithinRel(2 * q_box(p, 10.0), 1e-13));
}

TEST_CASE("asymptotic forms") {
  const double n2 = efimov_constant().nu0_squared;
  SECTION("box 1/rho^3 coefficient") {
    const auto p = well_params(1.0, kPi * kPi / 24);
    const double r = 1e3;
    const double tail = (v_eff_asymptotic(p, r, 1.0, AsymptoticForm::Box) - (n2 - 0.25) / (r * r)) * r * r * r;
    CHECK_THAT(tail, WithinAbs(-1.0276, 1e-3));
  }
  SECTION("box is region B less the box Q") {
    const auto p = well_params(1.3, 0.37);
    for (double r : {5.0, 50.0}) {
      const double b = v_eff_asymptotic(p, r, 1.0, AsymptoticForm::RegionB);
      CHECK_THAT(v_eff_asymptotic(p, r, 1.0, AsymptoticForm::Box), WithinRel(b - q_box(p, r), 1e-12));
    }
  }
  SECTION("region A plateau") {
    const auto p = make_params(0.0, -1e5, 0.5 * -1e5 * n2); // R0 = 0
    CHECK_THAT(v_eff_asymptotic(p, 10.0, 1.0, AsymptoticForm::RegionA) * 100.0,
               WithinAbs(n2 - 0.25 + 1.25, 1e-12));
    CHECK_THAT(n2 + 1.0, WithinAbs(-0.0125, 1e-3));
    AsymptoticOptions o;
    o.region_a_c = -1.0;
    CHECK_THAT(v_eff_asymptotic(p, 10.0, 1.0, AsymptoticForm::RegionA, o) * 100.0,
               WithinAbs(n2 + 0.75, 1e-12));
  }
  SECTION("region B without correction when Re nu0^2 = 2 Rv") {
    const auto p = well_params(2.0, n2);
    CHECK_THAT(v_eff_asymptotic(p, 7.0, 1.0, AsymptoticForm::RegionB) * 49.0,
               WithinRel(n2 - 0.25, 1e-13));
  }
  SECTION("curve parts add up") {
    AsymptoticOptions o;
    o.Q = 1e-4;
    const auto c = asymptotic_curve(well_params(1.0, 0.2), {3.0, 30.0}, 1.0, AsymptoticForm::RegionB, o);
    CHECK(c.source == CurveSource::RegionB);
    for (std::size_t i = 0; i < c.rho.size(); ++i) {
      CHECK(c.v_eff[i] == c.centrifugal[i] + c.q_part[i]);
      CHECK(c.q_part[i] == -1e-4);
    }
    CHECK(std::string(to_string(c.source)) == "region_b");
  }
}

TEST_CASE("atom-dimer channel") {
  const auto p = make_square_well(-2 * (kPi / 2) * (kPi / 2));
  const auto t = low_energy_params(p);
  REQUIRE(t.kd);
  const auto I = atom_dimer_integrals(p);
  for (double r : {20.0, 40.0}) {
    const auto a = atom_dimer_veff(t, I, r);
    CHECK_THAT(a.residual, WithinAbs(-(I.Iv + I.Iq) / (r * r), 1e-14));
  }
  // the leading 1/rho^2 pieces cancel
  CHECK(std::abs(I.Iv + I.Iq) < 1e-9 * std::abs(I.Iv));
  TwoBodyParams none = t;
  none.kd.reset();
  CHECK_THROWS_AS(atom_dimer_veff(none, I, 10.0), Error);
}

TEST_CASE("numerical effective potential approaches -B_D as rho^-4") {
  const auto p = make_square_well(-2 * (kPi / 2) * (kPi / 2));
  const auto t = low_energy_params(p);
  DirectOptions o;
  o.graded_free = true;
  const auto c = numerical_curve(p, {40.0, 80.0}, 1.0, o);
  const double r40 = c.v_eff[0] + *t.Bd, r80 = c.v_eff[1] + *t.Bd;
  CHECK(r40 > 0.0);
  CHECK_THAT(r40 / r80, WithinAbs(16.0, 2.0));
}
