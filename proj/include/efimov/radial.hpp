#pragma once

#include "efimov/errors.hpp"
#include "efimov/model.hpp"
#include "efimov/numerics/chebyshev.hpp"
#include "efimov/numerics/roots.hpp"
#include "efimov/universal.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <vector>

namespace efimov {

struct RadialOptions {
  int order = 16;          // polynomial degree per element
  double max_step = 0.0625; // element width limit, in units of r0
};

// Potential as seen by the radial engine: values plus the points where the
// element mesh must break.
struct RadialProblem {
  std::function<double(double)> V;
  std::vector<double> breaks; // ascending, front() = 0, back() = support
  double length_scale = 1.0;  // r0, sets the element width
};

inline RadialProblem radial_problem(const Potential &p) {
  return {[p](double r) { return evaluate(p, r); }, breakpoints(p), p.r0};
}

inline RadialProblem radial_problem(const ModifiedPotential &mp) {
  return {[mp](double r) { return evaluate_modified(mp, r); }, breakpoints(mp),
          mp.base.r0};
}

namespace numerics {

inline const ChebyshevBasis &chebyshev(int order) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<ChebyshevBasis>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto &slot = cache[order];
  if (!slot)
    slot = std::make_unique<ChebyshevBasis>(order);
  return *slot;
}

} // namespace numerics

// Piecewise-polynomial solution of u'' = (V - k^2) u, u(0) = 0, u'(0) = 1,
// obtained by collocation on each element with the previous element's end
// values as initial data.
class RadialMarch {
public:
  struct Element {
    double a, b;
    std::vector<double> r, u, du, V;
  };

  RadialMarch(const RadialProblem &prob, double k2, double r_end,
              const RadialOptions &opt = {})
      : k2_(k2), basis_(&numerics::chebyshev(opt.order)) {
    const auto &B = *basis_;
    const int n = B.order();
    const auto &t = B.nodes();
    const double hmax = opt.max_step * prob.length_scale;

    std::vector<double> br;
    for (double x : prob.breaks)
      if (x > 0.0 && x < r_end)
        br.push_back(x);
    br.insert(br.begin(), 0.0);
    br.push_back(r_end);

    double uL = 0.0, duL = 1.0;
    Eigen::MatrixXd A(n + 1, n + 1);
    Eigen::VectorXd rhs(n + 1);
    for (std::size_t s = 0; s + 1 < br.size(); ++s) {
      const double len = br[s + 1] - br[s];
      if (len <= 0.0)
        continue;
      const int pieces = std::max(1, static_cast<int>(std::ceil(len / hmax - 1e-9)));
      for (int q = 0; q < pieces; ++q) {
        Element e;
        e.a = br[s] + len * q / pieces;
        e.b = (q + 1 == pieces) ? br[s + 1] : br[s] + len * (q + 1) / pieces;
        const double h = e.b - e.a;
        e.r.resize(n + 1);
        e.V.resize(n + 1);
        for (int j = 0; j <= n; ++j) {
          e.r[j] = e.a + 0.5 * h * (t[j] + 1.0);
          // endpoints sampled just inside so a jump at a break belongs to
          // the element it bounds
          double rv = e.r[j];
          if (j == 0)
            rv = e.a + 1e-12 * h;
          else if (j == n)
            rv = e.b - 1e-12 * h;
          e.V[j] = prob.V(rv);
        }
        A.setZero();
        rhs.setZero();
        A(0, 0) = 1.0;
        rhs(0) = uL;
        for (int j = 1; j < n; ++j) {
          A.row(j) = B.d2().row(j);
          A(j, j) -= 0.25 * h * h * (e.V[j] - k2);
        }
        A.row(n) = B.d1().row(0);
        rhs(n) = 0.5 * h * duL;
        Eigen::VectorXd u = A.partialPivLu().solve(rhs);
        Eigen::VectorXd du = (2.0 / h) * (B.d1() * u);
        e.u.assign(u.data(), u.data() + n + 1);
        e.du.assign(du.data(), du.data() + n + 1);
        uL = e.u[n];
        duL = e.du[n];
        elements_.push_back(std::move(e));
      }
    }
    u_end_ = uL;
    du_end_ = duL;
    r_end_ = r_end;
  }

  double u_end() const { return u_end_; }
  double du_end() const { return du_end_; }
  double r_end() const { return r_end_; }
  double k2() const { return k2_; }
  const std::vector<Element> &elements() const { return elements_; }

  void scale(double c) {
    for (auto &e : elements_)
      for (std::size_t j = 0; j < e.u.size(); ++j) {
        e.u[j] *= c;
        e.du[j] *= c;
      }
    u_end_ *= c;
    du_end_ *= c;
  }

  // Integral over [0, r_end] of f(r, u, u', V).
  template <class F> double integrate(F &&f) const {
    const auto &w = basis_->quadrature_weights();
    double s = 0.0;
    for (const auto &e : elements_) {
      double se = 0.0;
      for (std::size_t j = 0; j < e.u.size(); ++j)
        se += w[j] * f(e.r[j], e.u[j], e.du[j], e.V[j]);
      s += 0.5 * (e.b - e.a) * se;
    }
    return s;
  }

  // Number of sign changes of u on (0, r_end].
  int node_count() const {
    double umax = 0.0;
    for (const auto &e : elements_)
      for (double x : e.u)
        umax = std::max(umax, std::abs(x));
    int n = 0;
    double prev = 0.0;
    for (const auto &e : elements_)
      for (std::size_t j = 0; j < e.u.size(); ++j) {
        const double x = e.u[j];
        // the origin and round-off-level values carry no sign
        if (e.r[j] == 0.0 || std::abs(x) <= 1e-12 * umax)
          continue;
        if (prev != 0.0 && (x > 0) != (prev > 0))
          ++n;
        prev = x;
      }
    return n;
  }

private:
  double k2_;
  const numerics::ChebyshevBasis *basis_;
  std::vector<Element> elements_;
  double u_end_ = 0.0, du_end_ = 1.0, r_end_ = 0.0;
};

struct TwoBodyParams {
  double inv_a = 0.0;
  double Re = 0.0;
  double Rv = 0.0;
  double R0 = 0.0;
  std::optional<double> Bd;
  std::optional<double> kd;

  double a() const {
    return inv_a == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / inv_a;
  }
};

inline double r0_from(double Re, double Rv) {
  return 0.5 * Re * efimov_constant().nu0_squared - Rv;
}

// Params from (a, Re, Rv) without a potential, for the expansion models.
inline TwoBodyParams make_params(double inv_a, double Re, double Rv) {
  TwoBodyParams t;
  t.inv_a = inv_a;
  t.Re = Re;
  t.Rv = Rv;
  t.R0 = r0_from(Re, Rv);
  return t;
}

enum class Normalization { AsymptoticOneMinusROverA, UnitNorm };

struct RadialSolution {
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  double energy = 0.0;
  Normalization normalization = Normalization::AsymptoticOneMinusROverA;
};

inline RadialSolution sample(const RadialMarch &m, Normalization norm) {
  RadialSolution s;
  s.energy = m.k2();
  s.normalization = norm;
  for (const auto &e : m.elements())
    for (std::size_t j = 0; j < e.u.size(); ++j) {
      if (!s.r.empty() && j == 0)
        continue;
      s.r.push_back(e.r[j]);
      s.u.push_back(e.u[j]);
      s.du.push_back(e.du[j]);
    }
  if (s.r.empty() || s.r.front() != 0.0) {
    s.r.insert(s.r.begin(), 0.0);
    s.u.insert(s.u.begin(), 0.0);
    s.du.insert(s.du.begin(), s.du.empty() ? 1.0 : s.du.front());
  }
  return s;
}

// Zero-energy solution normalized to 1 - r/a beyond the support.
struct ZeroEnergySolution {
  RadialMarch march;
  double inv_a;
};

inline ZeroEnergySolution zero_energy_solution(const Potential &p,
                                               const RadialOptions &opt = {}) {
  const double R = support(p);
  RadialMarch m(radial_problem(p), 0.0, R, opt);
  const double u = m.u_end(), du = m.du_end();
  const double c = u - R * du;
  if (std::abs(c) <= 1e-6 * p.r0 * std::abs(du)) {
    std::ostringstream os;
    os << "|a| < 1e-6 r0 (u(R) = " << u << ", u'(R) = " << du << ")";
    fail(ErrorCode::ScatteringLengthNearZero, os.str());
  }
  m.scale(1.0 / c);
  return {std::move(m), -du / c};
}

inline double effective_range_integral(const ZeroEnergySolution &z) {
  const double ia = z.inv_a;
  return 2.0 * z.march.integrate([ia](double r, double u, double, double) {
    const double v = 1.0 - r * ia;
    return v * v - u * u;
  });
}

// -(1/6) int V (3 r^2 u^2 + 2 r^3 u u') dr; valid for discontinuous V.
inline double rv_by_parts(const RadialMarch &m) {
  return -m.integrate([](double r, double u, double du, double V) {
           return V * (3.0 * r * r * u * u + 2.0 * r * r * r * u * du);
         }) /
         6.0;
}

// (1/6) int V' r^3 u^2 dr, plus the edge term when V is cut off while
// still nonzero. Smooth families only.
inline double rv_direct(const Potential &p, const RadialOptions &opt = {}) {
  if (!is_smooth(p))
    fail(ErrorCode::InvalidArgument, "direct R_V form needs a smooth potential");
  const auto z = zero_energy_solution(p, opt);
  const double R = support(p);
  double s = z.march.integrate([&p](double r, double u, double, double) {
    return evaluate_derivative(p, r) * r * r * r * u * u;
  });
  const double VR = evaluate(p, R * (1.0 - 1e-14));
  s -= VR * R * R * R * z.march.u_end() * z.march.u_end();
  return s / 6.0;
}

struct DimerState {
  RadialSolution solution; // unit norm on [0, inf), sampled on [0, R]
  RadialMarch march;       // same, as element data
  double kd;
  double Bd;
  double support;
};

namespace detail {

inline double bound_mismatch(const RadialMarch &m, double kappa) {
  const double u = m.u_end(), du = m.du_end();
  return (du + kappa * u) / std::hypot(du, kappa * u);
}

// Bound states are matched where the remaining |V| tail drops below
// 1e-10 kappa^2: marching a decaying solution further through a long
// negligible tail only amplifies the growing one.
class BoundMatchRadius {
public:
  explicit BoundMatchRadius(const Potential &p) : R_(support(p)), tail_(n_ + 1, 0.0) {
    if (!is_smooth(p))
      return;
    for (int i = n_; i >= 0; --i) {
      const double v = std::abs(evaluate(p, R_ * i / n_ * (1.0 - 1e-12)));
      tail_[i] = i == n_ ? v : std::max(v, tail_[i + 1]);
    }
  }
  double operator()(double kappa) const {
    const double tol = 1e-10 * kappa * kappa;
    for (int i = n_; i > 0; --i)
      if (tail_[i] > tol)
        return std::min(R_, R_ * (i + 1) / n_);
    return R_;
  }

private:
  static constexpr int n_ = 4000;
  double R_;
  std::vector<double> tail_;
};

} // namespace detail

// Number of s-wave bound states, from the zero-energy node count.
inline int bound_state_count(const Potential &p, const RadialOptions &opt = {}) {
  const double R = support(p);
  RadialMarch m(radial_problem(p), 0.0, R, opt);
  int n = m.node_count();
  const double c = m.u_end() - R * m.du_end();
  if (c != 0.0) {
    const double inv_a = -m.du_end() / c;
    // a threshold state (|a| beyond 1e9 r0) is not counted as bound
    if (inv_a * p.r0 > 1e-9 && 1.0 / inv_a > R)
      ++n;
  }
  return n;
}

// Shallowest s-wave bound state.
inline DimerState dimer_state(const Potential &p, const RadialOptions &opt = {}) {
  if (bound_state_count(p, opt) == 0)
    fail(ErrorCode::NoBoundState, "potential supports no s-wave bound state");
  const detail::BoundMatchRadius match(p);
  const auto prob = radial_problem(p);
  auto mismatch = [&](double kappa) {
    RadialMarch m(prob, -kappa * kappa, match(kappa), opt);
    return detail::bound_mismatch(m, kappa);
  };
  const double kmax = std::sqrt(-depth(p)) * 1.01 + 1e-6;
  const double kmin = 1e-10 / p.r0;
  const int per_decade = 24;
  const int n = static_cast<int>(std::ceil(std::log10(kmax / kmin) * per_decade));
  double k_prev = kmin, m_prev = mismatch(kmin);
  double kd = -1.0;
  for (int i = 1; i <= n; ++i) {
    const double k = kmin * std::pow(kmax / kmin, static_cast<double>(i) / n);
    const double mk = mismatch(k);
    if ((mk > 0) != (m_prev > 0)) {
      kd = numerics::find_root(mismatch, k_prev, k, 1e-15 * k);
      break;
    }
    k_prev = k;
    m_prev = mk;
  }
  if (kd < 0.0)
    fail(ErrorCode::NoConvergence, "bound-state search found no matching energy");

  const double R = match(kd);
  RadialMarch m(prob, -kd * kd, R, opt);
  const double uR = m.u_end();
  const double norm2 =
      m.integrate([](double, double u, double, double) { return u * u; }) +
      uR * uR / (2.0 * kd);
  m.scale(1.0 / std::sqrt(norm2));
  auto sol = sample(m, Normalization::UnitNorm);
  return {std::move(sol), std::move(m), kd, kd * kd, R};
}

struct AtomDimerIntegrals {
  double Iv;
  double Iq;
};

inline AtomDimerIntegrals atom_dimer_integrals(const DimerState &d) {
  const double k = d.kd, R = d.support;
  const double Iv = rv_by_parts(d.march);
  double Iq = d.march.integrate([k](double r, double u, double du, double V) {
    return r * u * du + r * r * u * u * (V + k * k);
  });
  const double uR = d.march.u_end();
  Iq += uR * uR * k * R * R / 2.0;
  return {Iv, Iq};
}

inline AtomDimerIntegrals atom_dimer_integrals(const Potential &p,
                                               const RadialOptions &opt = {}) {
  return atom_dimer_integrals(dimer_state(p, opt));
}

inline TwoBodyParams low_energy_params(const Potential &p,
                                       const RadialOptions &opt = {}) {
  const auto z = zero_energy_solution(p, opt);
  TwoBodyParams t;
  t.inv_a = z.inv_a;
  t.Re = effective_range_integral(z);
  t.Rv = rv_by_parts(z.march);
  t.R0 = r0_from(t.Re, t.Rv);
  if (bound_state_count(p, opt) > 0) {
    const auto d = dimer_state(p, opt);
    t.Bd = d.Bd;
    t.kd = d.kd;
  }
  return t;
}

// k cot delta at k^2 (negative values continue to k = i kappa), with the
// regular solution matched at r_match. Written with C = cos(kr) and
// S = sin(kr)/k so that it is one smooth expression in k^2.
inline double k_cot_delta(const RadialProblem &prob, double k2, double r_match,
                          const RadialOptions &opt = {}) {
  RadialMarch m(prob, k2, r_match, opt);
  const double u = m.u_end(), du = m.du_end();
  if (u == 0.0 && du == 0.0)
    fail(ErrorCode::NodeAtMatch, "u and u' vanish at the matching radius");
  const double r = r_match;
  double C, S;
  if (k2 > 0.0) {
    const double k = std::sqrt(k2);
    C = std::cos(k * r);
    S = std::sin(k * r) / k;
  } else if (k2 < 0.0) {
    const double kap = std::sqrt(-k2);
    C = 1.0;
    S = std::tanh(kap * r) / kap;
  } else {
    C = 1.0;
    S = r;
  }
  return (k2 * u * S + du * C) / (u * C - du * S);
}

inline double k_cot_delta(const Potential &p, double k2,
                          const RadialOptions &opt = {}) {
  return k_cot_delta(radial_problem(p), k2, support(p), opt);
}

struct ModifiedParams {
  double inv_a_rho;
  double Re_rho;
  double a_rho() const {
    return inv_a_rho == 0.0 ? std::numeric_limits<double>::infinity()
                            : 1.0 / inv_a_rho;
  }
};

// Least-squares fit k cot delta_rho = c0 + c1 k^2 + c2 k^4 on the window
// k in [1e-3, 1e-2]/r0.
inline ModifiedParams modified_params(const Potential &p, double rho,
                                      double mu = 1.0,
                                      const RadialOptions &opt = {}) {
  const auto mp = make_modified(p, rho, mu);
  const auto prob = radial_problem(mp);
  const int n = 9;
  const double klo = 1e-3 / p.r0, khi = 1e-2 / p.r0;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  const double scale = khi * khi;
  for (int i = 0; i < n; ++i) {
    const double k = klo + (khi - klo) * i / (n - 1);
    const double x = k * k / scale;
    X(i, 0) = 1.0;
    X(i, 1) = x;
    X(i, 2) = x * x;
    y(i) = k_cot_delta(prob, k * k, mp.r_c, opt);
  }
  const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
  return {-c(0), 2.0 * c(1) / scale};
}

// Feshbach effective range -2 / (dB m dmu a_bg) in any unit system with
// hbar = 1.
inline double feshbach_effective_range(double deltaB, double deltaMu,
                                       double a_bg, double mass) {
  if (deltaB == 0.0 || deltaMu == 0.0 || a_bg == 0.0 || mass == 0.0)
    fail(ErrorCode::ZeroInput, "deltaB, deltaMu, a_bg and mass must be nonzero");
  return -2.0 / (deltaB * mass * deltaMu * a_bg);
}

// Atomic-unit conversions for the Feshbach inputs.
namespace atomic_units {
inline constexpr double gauss = 1.0 / 2.35051757077e9; // 1 G in a.u. of field
inline constexpr double bohr_magneton = 0.5;
inline constexpr double dalton = 1822.888486209; // electron masses

inline double feshbach_effective_range_bohr(double dB_mG, double dmu_muB,
                                            double abg_bohr, double mass_u) {
  return feshbach_effective_range(dB_mG * 1e-3 * gauss, dmu_muB * bohr_magneton,
                                  abg_bohr, mass_u * dalton);
}
} // namespace atomic_units

} // namespace efimov
