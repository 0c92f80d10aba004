#pragma once

#include "efimov/errors.hpp"

#include <boost/math/interpolators/makima.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace efimov {

// Units: hbar = m = 1, lengths in r0, energies in hbar^2/(m r0^2).

// D sech^2(chi r/r0) + B exp(-2 (chi r/r0 - 2)^2), zero beyond cutoff*r0.
struct SechBarrier {
  double D = 0.0;
  double B = 0.0;
  double chi = 1.0;
  double cutoff = 1.0;
};

struct SquareWell {
  double V0 = 0.0;
};

// Cubic (modified Akima) interpolation through (r_i, V_i), r_0 = 0,
// r_n = r0.
class Tabulated {
public:
  Tabulated(std::vector<double> r, std::vector<double> V) : r_(r), V_(V) {
    if (r.size() < 4 || r.size() != V.size())
      fail(ErrorCode::InvalidArgument,
           "tabulated potential needs >= 4 (r, V) pairs of equal length");
    if (r.front() != 0.0)
      fail(ErrorCode::InvalidArgument, "tabulated grid must start at r = 0");
    for (std::size_t i = 1; i < r.size(); ++i)
      if (!(r[i] > r[i - 1]))
        fail(ErrorCode::InvalidArgument,
             "tabulated grid must be strictly increasing");
    interp_ = std::make_shared<Interp>(std::move(r), std::move(V));
  }

  const std::vector<double> &r() const { return r_; }
  const std::vector<double> &V() const { return V_; }
  double end() const { return r_.back(); }
  double operator()(double x) const { return (*interp_)(x); }
  double prime(double x) const { return interp_->prime(x); }

private:
  using Interp = boost::math::interpolators::makima<std::vector<double>>;
  std::vector<double> r_;
  std::vector<double> V_;
  std::shared_ptr<const Interp> interp_;
};

using PotentialShape = std::variant<SechBarrier, SquareWell, Tabulated>;

struct Potential {
  PotentialShape shape;
  double r0 = 1.0;
};

inline Potential make_sech_barrier(double D, double B, double chi,
                                   double r0 = 1.0, double cutoff = 1.0) {
  if (!(r0 > 0.0) || !(cutoff > 0.0))
    fail(ErrorCode::InvalidArgument, "r0 and cutoff must be positive");
  return {SechBarrier{D, B, chi, cutoff}, r0};
}

inline Potential make_square_well(double V0, double r0 = 1.0) {
  if (!(r0 > 0.0))
    fail(ErrorCode::InvalidArgument, "r0 must be positive");
  return {SquareWell{V0}, r0};
}

inline Potential make_tabulated(std::vector<double> r, std::vector<double> V) {
  Tabulated t(std::move(r), std::move(V));
  const double r0 = t.end();
  return {std::move(t), r0};
}

inline Potential make_zero_potential(double r0 = 1.0) {
  return make_square_well(0.0, r0);
}

// Radius beyond which V vanishes identically.
inline double support(const Potential &p) {
  if (auto *s = std::get_if<SechBarrier>(&p.shape))
    return s->cutoff * p.r0;
  return p.r0;
}

inline bool is_smooth(const Potential &p) {
  return !std::holds_alternative<SquareWell>(p.shape);
}

inline double evaluate(const Potential &p, double r) {
  if (r > support(p) || r < 0.0)
    return 0.0;
  return std::visit(
      [&](const auto &s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SechBarrier>) {
          const double x = s.chi * r / p.r0;
          const double c = 1.0 / std::cosh(x);
          const double g = x - 2.0;
          return s.D * c * c + s.B * std::exp(-2.0 * g * g);
        } else if constexpr (std::is_same_v<T, SquareWell>) {
          return r < p.r0 ? s.V0 : 0.0;
        } else {
          return s(r);
        }
      },
      p.shape);
}

// dV/dr inside the support (one-sided at the edge); the square well has a
// distributional derivative and reports 0 here.
inline double evaluate_derivative(const Potential &p, double r) {
  if (r > support(p) || r < 0.0)
    return 0.0;
  return std::visit(
      [&](const auto &s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SechBarrier>) {
          const double x = s.chi * r / p.r0;
          const double c = 1.0 / std::cosh(x);
          const double g = x - 2.0;
          const double dx = s.chi / p.r0;
          return dx * (-2.0 * s.D * c * c * std::tanh(x) -
                       4.0 * s.B * g * std::exp(-2.0 * g * g));
        } else if constexpr (std::is_same_v<T, SquareWell>) {
          return 0.0;
        } else {
          return s.prime(r);
        }
      },
      p.shape);
}

// Points where V or its low derivatives may jump; always includes 0 and
// the support radius.
inline std::vector<double> breakpoints(const Potential &p) {
  if (auto *t = std::get_if<Tabulated>(&p.shape))
    return t->r();
  return {0.0, support(p)};
}

// Most negative value of V on a fine sample; used to bound bound-state
// searches.
inline double depth(const Potential &p) {
  const double R = support(p);
  double vmin = 0.0;
  const int n = 2000;
  for (int i = 0; i <= n; ++i)
    vmin = std::min(vmin, evaluate(p, R * i / n * (1.0 - 1e-12)));
  return vmin;
}

inline double rho_c(const Potential &p, double mu = 1.0) {
  return 2.0 * support(p) * std::sqrt(mu);
}

// V_rho(r) = V((rho/sqrt mu) sin(sqrt mu r / rho)), zero beyond r_c.
struct ModifiedPotential {
  Potential base;
  double rho;
  double mu;
  double r_c;
};

inline double modified_radius(double R, double rho, double mu) {
  const double sm = std::sqrt(mu);
  return rho / sm * std::asin(std::min(1.0, sm * R / rho));
}

inline ModifiedPotential make_modified(const Potential &p, double rho,
                                       double mu = 1.0) {
  if (!(mu > 0.0))
    fail(ErrorCode::InvalidArgument, "mu must be positive");
  const double rc = rho_c(p, mu);
  if (!(rho >= rc * (1.0 - 1e-14))) {
    std::ostringstream os;
    os << "rho = " << rho << " below rho_c = " << rc;
    fail(ErrorCode::RhoTooSmall, os.str());
  }
  return {p, rho, mu, modified_radius(support(p), rho, mu)};
}

inline double modified_argument(const ModifiedPotential &mp, double r) {
  const double sm = std::sqrt(mp.mu);
  return mp.rho / sm * std::sin(sm * r / mp.rho);
}

inline double evaluate_modified(const ModifiedPotential &mp, double r) {
  if (r > mp.r_c || r < 0.0)
    return 0.0;
  return evaluate(mp.base, modified_argument(mp, r));
}

// Base breakpoints mapped through the inverse of the argument transform.
inline std::vector<double> breakpoints(const ModifiedPotential &mp) {
  std::vector<double> b = breakpoints(mp.base);
  for (double &x : b)
    x = modified_radius(x, mp.rho, mp.mu);
  b.back() = mp.r_c;
  return b;
}

} // namespace efimov
