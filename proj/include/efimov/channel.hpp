#pragma once

#include "efimov/errors.hpp"
#include "efimov/model.hpp"
#include "efimov/numerics/roots.hpp"
#include "efimov/radial.hpp"
#include "efimov/universal.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace efimov {

enum class Model { Rigorous, ZrA, ZrARe, ZrAReRv };

inline const char *to_string(Model m) {
  switch (m) {
  case Model::Rigorous: return "rigorous";
  case Model::ZrA: return "zr_a";
  case Model::ZrARe: return "zr_a_re";
  case Model::ZrAReRv: return "zr_a_re_rv";
  }
  return "?";
}

struct EigenvalueBranch {
  double lambda = 0.0;
  std::complex<double> nu;
  int branch_index = 0;
  Model model = Model::ZrA;
  double residual = 0.0; // normalized residual at lambda
};

inline std::complex<double> nu_from_lambda(double lambda) {
  const double nu2 = lambda + 4.0;
  return nu2 >= 0.0 ? std::complex<double>(std::sqrt(nu2), 0.0)
                    : std::complex<double>(0.0, std::sqrt(-nu2));
}

struct ChannelOptions {
  RadialOptions radial;
  double root_tol = 1e-13;
  int interval_samples = 120; // sign-change scan for branches k >= 1
  double first_step = 0.01;   // downward scan on branch 0
  double step_growth = 1.15;
  double lambda_floor = -1e9;
};

// Branch k holds nu^2 in (4k^2, 4(k+1)^2]; the top end is the pole of F
// where the free solution sits.
// At nu = 4 the free solution vanishes identically (the spurious solution
// with psi + 2R[psi] = 0), so branch 1 stops just short of it.
inline std::pair<double, double> branch_interval(int k) {
  double hi = 4.0 * (k + 1) * (k + 1) - 4.0;
  if (k == 1)
    hi -= 1e-9;
  const double lo = k == 0 ? -std::numeric_limits<double>::infinity()
                           : 4.0 * k * k - 4.0;
  return {lo, hi};
}

// Interval index holding lambda.
inline int branch_of(double lambda) {
  int k = 0;
  while (lambda > branch_interval(k).second)
    ++k;
  return k;
}

// Residual of (sqrt mu / rho) F(nu) = rhs with both sides multiplied by
// sin(nu pi/2)/nu, scaled into [-1, 1].
inline double expansion_residual(const TwoBodyParams &p, double rho, double mu,
                                 Model model, double lambda) {
  const double nu2 = lambda + 4.0;
  const double x = mu / (rho * rho);
  double rhs = -p.inv_a;
  if (model == Model::ZrARe || model == Model::ZrAReRv)
    rhs += 0.5 * p.Re * nu2 * x;
  if (model == Model::ZrAReRv)
    rhs -= p.Rv * x;
  const auto f = efimov_fraction(nu2);
  const double lhs = std::sqrt(mu) / rho * f.num;
  const double right = rhs * f.den;
  const double scale = std::abs(lhs) + std::abs(right);
  return scale == 0.0 ? 0.0 : (lhs - right) / scale;
}

namespace detail {

// Free region-II solution in the hyperangle and its derivative, as even
// functions of nu:
// g = [sin(nu(alpha - pi/2)) - (8/(sqrt3 nu)) sin(nu pi/6) sin(nu alpha)]/nu.
inline std::pair<double, double> free_solution(double nu2, double alpha) {
  const double w = kRotationWeight * even_sinc(nu2, kPi / 6.0);
  const double d = alpha - kPi / 2.0;
  const double g = d * even_sinc(nu2, d) - w * alpha * even_sinc(nu2, alpha);
  const double gp = even_cos(nu2, d) - w * even_cos(nu2, alpha);
  return {g, gp};
}

} // namespace detail

// Rigorous residual: Wronskian at alpha0 between the free solution and the
// radial solution of V_rho carried out to r_c.
class RigorousResidual {
public:
  RigorousResidual(const Potential &p, double rho, double mu,
                   const RadialOptions &opt = {})
      : mp_(make_modified(p, rho, mu)), prob_(radial_problem(mp_)), opt_(opt) {
    alpha0_ = std::sqrt(mu) * mp_.r_c / rho;
  }

  double operator()(double lambda) const {
    const double nu2 = lambda + 4.0;
    const double rho = mp_.rho, sm = std::sqrt(mp_.mu);
    const double k2 = nu2 * mp_.mu / (rho * rho);
    RadialMarch m(prob_, k2, mp_.r_c, opt_);
    const double psi = m.u_end();
    const double dpsi = rho / sm * m.du_end();
    const auto [g, gp] = detail::free_solution(nu2, alpha0_);
    const double a = g * dpsi, b = gp * psi;
    const double scale = std::abs(a) + std::abs(b);
    if (scale == 0.0)
      fail(ErrorCode::NodeAtMatch, "degenerate matching at alpha0");
    return (a - b) / scale;
  }

  double alpha0() const { return alpha0_; }
  const ModifiedPotential &modified() const { return mp_; }

private:
  ModifiedPotential mp_;
  RadialProblem prob_;
  RadialOptions opt_;
  double alpha0_;
};

namespace detail {

// Highest root of a continuous residual on the branch interval.
inline double highest_root(const std::function<double(double)> &G, int branch,
                           const ChannelOptions &opt) {
  const auto [lo, hi] = branch_interval(branch);
  double x_prev = hi, g_prev = G(hi);
  // a root on the pole itself is the undistorted free solution
  if (std::abs(g_prev) < 1e-10)
    return hi;
  auto refine = [&](double a, double b) {
    return numerics::find_root(G, a, b, opt.root_tol);
  };
  if (branch == 0) {
    double step = opt.first_step;
    while (x_prev > opt.lambda_floor) {
      const double x = x_prev - step;
      const double gx = G(x);
      if (gx == 0.0)
        return x;
      if ((gx > 0) != (g_prev > 0))
        return refine(x, x_prev);
      x_prev = x;
      g_prev = gx;
      step *= opt.step_growth;
    }
  } else {
    const int n = opt.interval_samples;
    for (int i = 1; i < n; ++i) {
      const double x = hi - (hi - lo) * i / n;
      const double gx = G(x);
      if (gx == 0.0)
        return x;
      if ((gx > 0) != (g_prev > 0))
        return refine(x, x_prev);
      x_prev = x;
      g_prev = gx;
    }
  }
  std::ostringstream os;
  os << "branch " << branch << " has no root";
  fail(ErrorCode::NoRootInBracket, os.str());
}

// Root near a predicted value; the bracket widens by 4x until the residual
// changes sign, clipped to the branch interval.
inline std::optional<double>
root_near(const std::function<double(double)> &G, int branch, double guess,
          double width, const ChannelOptions &opt) {
  const auto [lo, hi] = branch_interval(branch);
  double w = width;
  for (int it = 0; it < 12; ++it, w *= 4.0) {
    const double a = std::max(guess - w, std::isfinite(lo) ? lo : guess - w);
    const double b = std::min(guess + w, hi);
    if (!(a < b))
      break;
    const double ga = G(a), gb = G(b);
    if (ga == 0.0)
      return a;
    if (gb == 0.0)
      return b;
    if ((ga > 0) != (gb > 0))
      return numerics::find_root(G, a, b, opt.root_tol);
  }
  return std::nullopt;
}

inline EigenvalueBranch make_branch(double lambda, int branch, Model model,
                                    double residual) {
  return {lambda, nu_from_lambda(lambda), branch, model, residual};
}

} // namespace detail

inline EigenvalueBranch solve_expansion(const TwoBodyParams &params, double rho,
                                       double mu, Model model, int branch = 0,
                                       const ChannelOptions &opt = {}) {
  if (!(rho > 0.0))
    fail(ErrorCode::InvalidArgument, "rho must be positive");
  if (model == Model::Rigorous)
    fail(ErrorCode::InvalidArgument, "solve_expansion needs an expansion model");
  std::function<double(double)> G = [&](double l) {
    return expansion_residual(params, rho, mu, model, l);
  };
  const double lam = detail::highest_root(G, branch, opt);
  return detail::make_branch(lam, branch, model, G(lam));
}

inline EigenvalueBranch solve_rigorous(const Potential &p, double rho,
                                      double mu = 1.0, int branch = 0,
                                      const ChannelOptions &opt = {}) {
  RigorousResidual R(p, rho, mu, opt.radial);
  std::function<double(double)> G = [&](double l) { return R(l); };
  const double lam = detail::highest_root(G, branch, opt);
  return detail::make_branch(lam, branch, Model::Rigorous, G(lam));
}

struct RigorousSource {
  Potential potential;
};
struct ExpansionSource {
  TwoBodyParams params;
  Model model;
};
using ChannelSource = std::variant<RigorousSource, ExpansionSource>;

struct ChannelCurve {
  std::vector<double> rho;
  std::vector<double> lambda; // NaN where a point failed
  std::vector<std::string> errors; // empty string where a point succeeded
  Model model = Model::ZrA;
  TwoBodyParams params;
  double mu = 1.0;

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto &e : errors)
      n += !e.empty();
    return n;
  }
};

// Continuation along rho. With tolerate_failures the failing points are
// recorded instead of thrown.
inline ChannelCurve scan(const ChannelSource &source,
                         const std::vector<double> &rho_grid, double mu = 1.0,
                         int branch = 0, const ChannelOptions &opt = {},
                         bool tolerate_failures = false) {
  for (std::size_t i = 1; i < rho_grid.size(); ++i)
    if (!(rho_grid[i] > rho_grid[i - 1]))
      fail(ErrorCode::InvalidArgument, "rho grid must be strictly increasing");

  ChannelCurve c;
  c.mu = mu;
  if (auto *r = std::get_if<RigorousSource>(&source)) {
    c.model = Model::Rigorous;
    try {
      c.params = low_energy_params(r->potential, opt.radial);
    } catch (const Error &) {
    }
  } else {
    const auto &e = std::get<ExpansionSource>(source);
    c.model = e.model;
    c.params = e.params;
  }

  std::vector<double> good_rho, good_lam;
  for (double rho : rho_grid) {
    try {
      std::function<double(double)> G;
      std::optional<RigorousResidual> R;
      if (auto *r = std::get_if<RigorousSource>(&source)) {
        R.emplace(r->potential, rho, mu, opt.radial);
        G = [&R](double l) { return (*R)(l); };
      } else {
        const auto &e = std::get<ExpansionSource>(source);
        G = [&e, rho, mu](double l) {
          return expansion_residual(e.params, rho, mu, e.model, l);
        };
      }
      std::optional<double> lam;
      const std::size_t n = good_lam.size();
      if (n >= 1) {
        double guess = good_lam[n - 1], width = 1e-3 * (1.0 + std::abs(guess));
        if (n >= 2) {
          const double slope = (good_lam[n - 1] - good_lam[n - 2]) /
                               (good_rho[n - 1] - good_rho[n - 2]);
          const double dl = slope * (rho - good_rho[n - 1]);
          guess += dl;
          width = std::max(width, 0.5 * std::abs(dl));
        }
        lam = detail::root_near(G, branch, guess, width, opt);
      }
      if (!lam)
        lam = detail::highest_root(G, branch, opt);
      c.rho.push_back(rho);
      c.lambda.push_back(*lam);
      c.errors.emplace_back();
      good_rho.push_back(rho);
      good_lam.push_back(*lam);
    } catch (const Error &e) {
      if (!tolerate_failures) {
        std::ostringstream os;
        os << "at rho = " << rho << ": " << e.what();
        throw Error(e.code(), os.str());
      }
      c.rho.push_back(rho);
      c.lambda.push_back(std::numeric_limits<double>::quiet_NaN());
      c.errors.emplace_back(e.what());
    }
  }
  return c;
}

enum class Regime { A, B };

// Leading asymptotic forms; nu0 = i s0.
inline std::complex<double> asymptotic_nu(const TwoBodyParams &p, double rho,
                                          double mu, Regime regime) {
  const auto &ec = efimov_constant();
  const std::complex<double> nu0 = ec.nu0;
  if (p.R0 == 0.0)
    return nu0;
  if (regime == Regime::A)
    return nu0 - p.R0 / (nu0 * p.Re);
  return nu0 + nu0 * c0_constant() * p.R0 * std::sqrt(mu) / rho;
}

} // namespace efimov
