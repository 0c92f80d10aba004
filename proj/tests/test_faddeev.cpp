#include "efimov/channel.hpp"
#include "efimov/faddeev.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace efimov;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Potential barrier() { return make_sech_barrier(-138.271086531, 128.49, 4.6667, 1.0, 1.0); }

double integrate(const std::function<double(double)> &f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13);
}

} // namespace

TEST_CASE("free hyperangular spectrum") {
  const auto sols = eigen_solve(make_zero_potential(), 5.0, 1.0, 3);
  REQUIRE(sols.size() == 3);
  CHECK_THAT(sols[0].lambda, WithinAbs(0.0, 1e-9));
  CHECK_THAT(sols[1].lambda, WithinAbs(32.0, 1e-8));
  CHECK_THAT(sols[2].lambda, WithinAbs(60.0, 1e-8));
  // constant Phi normalized with weight sin^2(2 alpha)
  const double phi = 2.0 / std::sqrt(std::numbers::pi);
  for (double x : {0.0, 0.3, 0.785, 1.2, std::numbers::pi / 2})
    CHECK_THAT(std::abs(sols[0].phi_at(x)), WithinAbs(phi, 1e-6));
}

TEST_CASE("Phi is normalized in the sin^2(2 alpha) measure") {
  const auto s = eigen_solve(barrier(), 8.0)[0];
  const double n = integrate([&](double x) {
    const double v = s.phi_at(x) * std::sin(2 * x);
    return v * v;
  }, 0.0, std::numbers::pi / 2);
  CHECK_THAT(n, WithinAbs(1.0, 1e-6));
}

TEST_CASE("rotation term equals the quadrature of psi") {
  const auto s = eigen_solve(barrier(), 6.0)[0];
  const double pi = std::numbers::pi;
  for (double x : {0.1, 0.5, 0.9, 1.3}) {
    const double lo = std::abs(pi / 3 - x), hi = pi / 2 - std::abs(pi / 6 - x);
    const double ref = 2 / std::sqrt(3.0) * integrate([&](double t) { return s.psi_at(t); }, lo, hi);
    CHECK_THAT(s.rotated_at(x), WithinAbs(ref, 1e-10 * (1 + std::abs(ref))));
  }
  // the rotated window is empty at both ends
  CHECK(std::abs(s.rotated_at(0.0)) < 1e-14);
  CHECK(std::abs(s.rotated_at(pi / 2)) < 1e-14);
}

TEST_CASE("spectral eigenvalues agree with the rigorous root") {
  const auto p = barrier();
  for (double rho : {3.0, 10.0, 30.0, 100.0, 300.0}) {
    const auto sols = eigen_solve(p, rho, 1.0, 2);
    for (std::size_t k = 0; k < sols.size(); ++k) {
      const int b = branch_of(sols[k].lambda);
      double rig;
      try {
        rig = solve_rigorous(p, rho, 1.0, b).lambda;
      } catch (const Error &) {
        continue;
      }
      INFO("rho " << rho << " k " << k);
      CHECK_THAT(sols[k].lambda, WithinRel(rig, 1e-6));
    }
  }
}

TEST_CASE("finite differences converge at second order") {
  const auto p = barrier();
  const double ref = eigen_solve(p, 3.0)[0].lambda;
  DirectOptions o;
  o.scheme = Scheme::FiniteDifference;
  std::vector<double> err;
  for (int n : {1000, 2000, 4000}) {
    o.grid_n = n;
    err.push_back(std::abs(eigen_solve(p, 3.0, 1.0, 1, o)[0].lambda - ref));
  }
  CHECK_THAT(err[0] / err[1], WithinAbs(4.0, 0.5));
  CHECK_THAT(err[1] / err[2], WithinAbs(4.0, 0.5));
}

TEST_CASE("finite differences reject tiny grids") {
  DirectOptions o;
  o.scheme = Scheme::FiniteDifference;
  o.grid_n = 100;
  CHECK_THROWS_AS(eigen_solve(barrier(), 3.0, 1.0, 1, o), Error);
  CHECK_THROWS_AS(eigen_solve(barrier(), -1.0), Error);
}

TEST_CASE("mass scaling of the direct eigenvalue") {
  const double a = eigen_solve(barrier(), 12.0, 1.0)[0].lambda;
  const double b = eigen_solve(barrier(), 24.0, 4.0)[0].lambda;
  CHECK_THAT(b, WithinRel(a, 1e-8));
}

TEST_CASE("non-adiabatic term vanishes without a potential") {
  const auto e = q_term(make_zero_potential(), 10.0);
  CHECK(std::abs(e.Q) < 1e-8);
}

TEST_CASE("non-adiabatic term is negative and step-stable for the barrier") {
  const auto e = q_term(barrier(), 20.0);
  // Q = <Phi|Phi''> = -||Phi'||^2 <= 0
  CHECK(e.Q < 0.0);
  CHECK(e.richardson_error < 0.05 * std::abs(e.Q));
  const auto f = q_term(barrier(), 20.0, 1.0, 0.5 * e.h);
  CHECK_THAT(f.Q, WithinRel(e.Q, 1e-3));
}
