#pragma once

#include "efimov/errors.hpp"
#include "efimov/numerics/roots.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace efimov {

inline constexpr double kSqrt3 = std::numbers::sqrt3;
inline constexpr double kPi = std::numbers::pi;
// 4 pi / (3 sqrt 3) = (8/sqrt3) * (pi/6)
inline constexpr double kRotationWeight = 4.0 * kPi / (3.0 * kSqrt3);

namespace detail {

// cos(nu x) as an even function of nu, given nu^2.
inline double even_cos(double nu2, double x) {
  if (nu2 >= 0.0)
    return std::cos(std::sqrt(nu2) * x);
  return std::cosh(std::sqrt(-nu2) * x);
}

// sin(nu x) / (nu x), even in nu; equals 1 at nu = 0.
inline double even_sinc(double nu2, double x) {
  const double z2 = nu2 * x * x;
  if (std::abs(z2) < 1e-8)
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  if (nu2 > 0.0) {
    const double z = std::sqrt(nu2) * std::abs(x);
    return std::sin(z) / z;
  }
  const double z = std::sqrt(-nu2) * std::abs(x);
  return std::sinh(z) / z;
}

} // namespace detail

// Numerator and denominator of F(nu) after dividing both by nu:
// F = num / den, num = -cos(nu pi/2) + (8/sqrt3) sin(nu pi/6)/nu,
// den = sin(nu pi/2)/nu.
struct EfimovFraction {
  double num;
  double den;
};

inline EfimovFraction efimov_fraction(double nu2) {
  const double h = kPi / 2.0;
  return {-detail::even_cos(nu2, h) +
              kRotationWeight * detail::even_sinc(nu2, kPi / 6.0),
          h * detail::even_sinc(nu2, h)};
}

// F(nu) with nu given through nu^2 (negative for imaginary nu).
inline double efimov_lhs_nu2(double nu2, double pole_threshold = 1e-12) {
  const auto f = efimov_fraction(nu2);
  const double nu = std::sqrt(std::abs(nu2));
  if (nu2 > 0.0 && std::abs(std::sin(nu * kPi / 2.0)) < pole_threshold) {
    std::ostringstream os;
    os.precision(17);
    os << "nu = " << nu;
    fail(ErrorCode::PoleAt, os.str());
  }
  return f.num / f.den;
}

// nu must be purely real or purely imaginary.
inline double efimov_lhs(std::complex<double> nu) {
  if (nu.real() != 0.0 && nu.imag() != 0.0)
    fail(ErrorCode::InvalidArgument, "nu must be real or purely imaginary");
  const double nu2 = nu.real() * nu.real() - nu.imag() * nu.imag();
  return efimov_lhs_nu2(nu2);
}

struct EfimovConstant {
  double s0;                 // nu0 = i s0
  std::complex<double> nu0;
  double nu0_squared;        // -s0^2
  double lambda0;            // nu0^2 - 4
};

inline const EfimovConstant &efimov_constant() {
  static const EfimovConstant c = [] {
    const double s0 = numerics::find_root(
        [](double s) { return efimov_lhs_nu2(-s * s); }, 0.5, 1.5, 1e-15);
    return EfimovConstant{s0, {0.0, s0}, -s0 * s0, -s0 * s0 - 4.0};
  }();
  return c;
}

inline double c0_constant() {
  const double s = efimov_constant().s0;
  const double h = kPi / 2.0;
  const double numer = std::sinh(s * h) / s;
  const double denom = kRotationWeight * std::cosh(s * kPi / 6.0) -
                       std::cosh(s * h) - s * h * std::sinh(s * h);
  return numer / denom;
}

} // namespace efimov
