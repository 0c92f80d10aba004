#pragma once

#include "efimov/channel.hpp"
#include "efimov/faddeev.hpp"
#include "efimov/numerics/quadrature.hpp"
#include "efimov/radial.hpp"
#include "efimov/universal.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace efimov {

// mu [(lambda + 4 - 1/4)/rho^2 - Q]
inline double v_eff(double lambda, double Q, double rho, double mu = 1.0) {
  return mu * ((lambda + 4.0 - 0.25) / (rho * rho) - Q);
}

enum class CurveSource { NumericalLambdaPlusQ, RegionA, RegionB, Box, AtomDimer };

inline const char *to_string(CurveSource s) {
  switch (s) {
  case CurveSource::NumericalLambdaPlusQ: return "numerical";
  case CurveSource::RegionA: return "region_a";
  case CurveSource::RegionB: return "region_b";
  case CurveSource::Box: return "box";
  case CurveSource::AtomDimer: return "atom_dimer";
  }
  return "?";
}

struct EffectivePotentialCurve {
  std::vector<double> rho;
  std::vector<double> v_eff;
  std::vector<double> centrifugal; // mu (nu^2 - 1/4)/rho^2
  std::vector<double> q_part;      // -mu Q
  CurveSource source = CurveSource::NumericalLambdaPlusQ;

  void push(double r, double centr, double q) {
    rho.push_back(r);
    centrifugal.push_back(centr);
    q_part.push_back(q);
    v_eff.push_back(centr + q);
  }
};

// Zero-range angular function at nu = i s, real form:
// sinh(s d)/s + 2 R[sinh(s d')/s], d = alpha - pi/2.
namespace detail {

inline double zero_range_chi(double s, double alpha) {
  const double h = kPi / 2.0;
  const double lo = std::abs(kPi / 3.0 - alpha);
  const double hi = kPi / 2.0 - std::abs(kPi / 6.0 - alpha);
  return std::sinh(s * (alpha - h)) / s +
         4.0 / (kSqrt3 * s * s) *
             (std::cosh(s * (hi - h)) - std::cosh(s * (lo - h)));
}

// Rule on [0, pi/2] split at the kinks pi/6 and pi/3.
inline numerics::CompositeRule zero_range_rule(int panels, int points) {
  std::vector<double> breaks;
  for (int seg = 0; seg < 3; ++seg)
    for (int i = 0; i < panels; ++i)
      breaks.push_back(kPi / 6.0 * (seg + double(i) / panels));
  breaks.push_back(kPi / 2.0);
  return numerics::composite_rule(breaks, numerics::GaussLegendre(points));
}

} // namespace detail

struct M0Estimate {
  double M0 = 0.0;
  double overlap_derivative = 0.0; // <Phi | dPhi/ds>, zero when normalized
  double richardson_error = 0.0;
  int panels = 0;
  int points = 0;
};

// <Phi | d^2 Phi / d nu^2> at nu0 for the unit-normalized zero-range
// function. With nu = i s the second nu-derivative is minus the second
// s-derivative, so the value is ||d Phi/ds||^2.
inline M0Estimate m0_estimate(int panels = 4, int points = 40, double h = 1e-2) {
  const double s0 = efimov_constant().s0;
  const auto q = detail::zero_range_rule(panels, points);
  auto sample = [&](double s) {
    std::vector<double> v(q.x.size());
    double n2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = detail::zero_range_chi(s, q.x[i]);
      n2 += q.w[i] * v[i] * v[i];
    }
    for (auto &x : v)
      x /= std::sqrt(n2);
    return v;
  };
  const auto c = sample(s0);
  auto dot = [&](const std::vector<double> &a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      s += q.w[i] * a[i] * c[i];
    return s;
  };
  auto second = [&](double step) {
    return -(dot(sample(s0 + step)) + dot(sample(s0 - step)) - 2.0) / (step * step);
  };
  M0Estimate e;
  e.panels = panels;
  e.points = points;
  const double coarse = second(h), fine = second(0.5 * h);
  e.M0 = (4.0 * fine - coarse) / 3.0;
  e.richardson_error = std::abs(e.M0 - fine);
  auto first = [&](double step) {
    return (dot(sample(s0 + step)) - dot(sample(s0 - step))) / (2.0 * step);
  };
  e.overlap_derivative = (4.0 * first(0.5 * h) - first(h)) / 3.0;
  return e;
}

inline double m0_constant() {
  static const double m0 = m0_estimate().M0;
  return m0;
}

struct UniversalConstants {
  double s0;
  double nu0_squared;
  double lambda0;
  double c0;
  double M0;
};

inline UniversalConstants universal_constants() {
  const auto &e = efimov_constant();
  return {e.s0, e.nu0_squared, e.lambda0, c0_constant(), m0_constant()};
}

inline double q_zero_range(double M0, const TwoBodyParams &p, double rho,
                           double mu = 1.0) {
  const double c0 = c0_constant(), n2 = efimov_constant().nu0_squared;
  return M0 * c0 * c0 * n2 * p.R0 * p.R0 * mu / std::pow(rho, 4);
}

inline double q_box(const TwoBodyParams &p, double rho, double mu = 1.0) {
  const double c0 = c0_constant(), n2 = efimov_constant().nu0_squared;
  return c0 * n2 * (0.5 * p.Re - 2.0 * p.Rv) * std::sqrt(mu) / std::pow(rho, 3);
}

enum class AsymptoticForm { RegionA, RegionB, Box };

struct AsymptoticOptions {
  double region_a_c = -1.25; // Q rho^2 in region A
  double Q = 0.0;            // explicit Q for region B
};

// Split into the centrifugal-like rho^-2 part and the rest.
struct AsymptoticValue {
  double v_eff;
  double centrifugal;
  double q_part;
};

inline AsymptoticValue v_eff_asymptotic_parts(const TwoBodyParams &p, double rho,
                                              double mu, AsymptoticForm form,
                                              const AsymptoticOptions &o = {}) {
  const double n2 = efimov_constant().nu0_squared, c0 = c0_constant();
  const double r2 = rho * rho, r3 = r2 * rho, sm = std::sqrt(mu);
  double centr = 0.0, q = 0.0;
  switch (form) {
  case AsymptoticForm::RegionA:
    centr = mu * (n2 - 0.25 - 2.0 * p.R0 / p.Re) / r2;
    q = -mu * o.region_a_c / r2;
    break;
  case AsymptoticForm::RegionB:
    centr = mu * ((n2 - 0.25) / r2 + c0 * n2 * sm / r3 * (p.Re * n2 - 2.0 * p.Rv));
    q = -mu * o.Q;
    break;
  case AsymptoticForm::Box:
    centr = mu * ((n2 - 0.25) / r2 + c0 * n2 * (n2 - 0.5) * sm * p.Re / r3);
    break;
  }
  return {centr + q, centr, q};
}

inline double v_eff_asymptotic(const TwoBodyParams &p, double rho, double mu,
                               AsymptoticForm form, const AsymptoticOptions &o = {}) {
  return v_eff_asymptotic_parts(p, rho, mu, form, o).v_eff;
}

inline EffectivePotentialCurve asymptotic_curve(const TwoBodyParams &p,
                                                const std::vector<double> &rho,
                                                double mu, AsymptoticForm form,
                                                const AsymptoticOptions &o = {}) {
  EffectivePotentialCurve c;
  c.source = form == AsymptoticForm::RegionA   ? CurveSource::RegionA
             : form == AsymptoticForm::RegionB ? CurveSource::RegionB
                                               : CurveSource::Box;
  for (double r : rho) {
    const auto v = v_eff_asymptotic_parts(p, r, mu, form, o);
    c.push(r, v.centrifugal, v.q_part);
  }
  return c;
}

struct AtomDimerVeff {
  double v_eff;
  double residual; // v_eff + B_D
  double lambda;   // lambda from the perturbative dimer channel
  double Q;
};

// Dimer channel: (lambda + 4)/rho^2 = -kd^2/mu - Iv/rho^2 and
// Q = -1/(4 rho^2) + Iq/rho^2.
inline AtomDimerVeff atom_dimer_veff(const TwoBodyParams &p,
                                     const AtomDimerIntegrals &I, double rho,
                                     double mu = 1.0) {
  if (!p.kd || !p.Bd)
    fail(ErrorCode::NoBoundState, "atom-dimer potential needs a bound dimer");
  const double r2 = rho * rho, kd = *p.kd;
  AtomDimerVeff out;
  out.lambda = -kd * kd * r2 / mu - I.Iv - 4.0;
  out.Q = (-0.25 + I.Iq) / r2;
  out.v_eff = v_eff(out.lambda, out.Q, rho, mu);
  out.residual = out.v_eff + *p.Bd;
  return out;
}

// lambda and Q from the direct angular solver at each rho.
inline EffectivePotentialCurve numerical_curve(const Potential &p,
                                               const std::vector<double> &rho,
                                               double mu = 1.0,
                                               const DirectOptions &o = {},
                                               int branch = 0) {
  EffectivePotentialCurve c;
  c.source = CurveSource::NumericalLambdaPlusQ;
  for (double r : rho) {
    const auto e = q_term(p, r, mu, 0.0, o, branch);
    c.push(r, mu * (e.lambda + 4.0 - 0.25) / (r * r), -mu * e.Q);
  }
  return c;
}

} // namespace efimov
