#pragma once

#include "efimov/errors.hpp"
#include "efimov/model.hpp"
#include "efimov/numerics/piecewise.hpp"
#include "efimov/numerics/quadrature.hpp"
#include "efimov/universal.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <vector>

namespace efimov {

enum class Scheme { Spectral, FiniteDifference };

struct DirectOptions {
  Scheme scheme = Scheme::Spectral;
  // spectral elements
  int order = 20;
  int potential_elements = 6; // on [0, alpha0]
  int free_elements = 4;      // on [alpha0, pi/2]
  bool graded_free = false;   // geometric free elements, for decaying channels
  int quad_points = 24;
  // finite differences
  int grid_n = 4000;
  std::vector<double> seeds; // nu^2 guesses for inverse iteration
  int max_iterations = 400;
  // output sampling
  int sample_points = 401;
};

// Hyperangular function on [0, pi/2] at fixed rho.
class AngularSolution {
public:
  double rho = 0.0;
  double mu = 1.0;
  double lambda = 0.0;
  std::vector<double> alpha; // uniform samples
  std::vector<double> psi;
  std::vector<double> phi;
  double norm = 1.0; // int (psi + 2R[psi])^2 d alpha after normalization
  bool degenerate = false;

  AngularSolution(std::shared_ptr<const numerics::PiecewiseSpace> space,
                  Eigen::VectorXd coeffs)
      : space_(std::move(space)), c_(std::move(coeffs)),
        gl_(std::max(2, (space_->order() + 2) / 2)) {
    build_prefix();
  }

  const numerics::PiecewiseSpace &space() const { return *space_; }
  const Eigen::VectorXd &coefficients() const { return c_; }

  double psi_at(double x) const { return space_->evaluate(c_, x); }

  // int_0^x psi, exact for the piecewise polynomial
  double antiderivative(double x) const {
    const int e = space_->locate(x);
    const double a = space_->breaks()[e];
    return prefix_[e] +
           gl_.integrate([this](double t) { return psi_at(t); }, a, std::min(x, space_->breaks()[e + 1]));
  }

  // R[psi](x) = (2/sqrt3) int_{|pi/3 - x|}^{pi/2 - |pi/6 - x|} psi
  double rotated_at(double x) const {
    const double lo = std::abs(kPi / 3.0 - x);
    const double hi = kPi / 2.0 - std::abs(kPi / 6.0 - x);
    if (!(hi > lo))
      return 0.0;
    return 2.0 / kSqrt3 * (antiderivative(hi) - antiderivative(lo));
  }

  // psi + 2 R[psi] = sin(2 alpha) Phi
  double chi_at(double x) const { return psi_at(x) + 2.0 * rotated_at(x); }

  double phi_at(double x) const {
    const double d = 1e-3;
    auto ratio = [this](double t) { return chi_at(t) / std::sin(2.0 * t); };
    // removable zeros of sin 2 alpha: quadratic through d, 2d, 3d from the
    // end, t the distance to that end
    auto extrap = [&](double t, auto at) {
      const double u = t / d;
      return 0.5 * (u - 2) * (u - 3) * at(d) - (u - 1) * (u - 3) * at(2 * d) +
             0.5 * (u - 1) * (u - 2) * at(3 * d);
    };
    if (x < d)
      return extrap(x, [&](double t) { return ratio(t); });
    if (x > kPi / 2.0 - d)
      return extrap(kPi / 2.0 - x, [&](double t) { return ratio(kPi / 2.0 - t); });
    return ratio(x);
  }

  void scale(double s) {
    c_ *= s;
    for (auto &v : prefix_)
      v *= s;
    for (auto &v : psi)
      v *= s;
    for (auto &v : phi)
      v *= s;
  }

private:
  void build_prefix() {
    const auto &br = space_->breaks();
    prefix_.assign(br.size(), 0.0);
    for (std::size_t e = 0; e + 1 < br.size(); ++e)
      prefix_[e + 1] = prefix_[e] + gl_.integrate([this](double t) { return psi_at(t); },
                                                  br[e], br[e + 1]);
  }

  std::shared_ptr<const numerics::PiecewiseSpace> space_;
  Eigen::VectorXd c_;
  numerics::GaussLegendre gl_;
  std::vector<double> prefix_;
};

namespace detail {

inline double rescaled_potential(const Potential &p, double rho, double mu,
                                 double alpha) {
  return evaluate(p, rho * std::sin(alpha) / std::sqrt(mu)) * rho * rho / mu;
}

inline double alpha0_of(const Potential &p, double rho, double mu) {
  return std::asin(std::min(1.0, std::sqrt(mu) * support(p) / rho));
}

inline std::vector<double> angular_breaks(double a0, const DirectOptions &o) {
  const double h = kPi / 2.0;
  std::vector<double> br;
  for (int i = 0; i <= o.potential_elements; ++i)
    br.push_back(a0 * i / o.potential_elements);
  if (a0 < h) {
    if (o.graded_free) {
      // widths doubling away from alpha0: alpha0 + (pi/2 - alpha0) 2^-k
      const int n = std::max(2, o.free_elements);
      for (int k = n - 1; k >= 0; --k)
        br.push_back(a0 + (h - a0) * std::ldexp(1.0, -k));
    } else {
      for (int i = 1; i <= o.free_elements; ++i)
        br.push_back(a0 + (h - a0) * i / o.free_elements);
    }
  }
  // kinks of the rotation window inside the potential region
  for (double s : {kPi / 6.0, kPi / 3.0})
    if (s < a0)
      br.push_back(s);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end(),
                       [](double x, double y) { return std::abs(x - y) < 1e-12; }),
           br.end());
  br.front() = 0.0;
  br.back() = h;
  return br;
}

// Quadrature points for products of angular functions: the union of all
// breaks and the rotation kinks, each piece split four ways.
inline numerics::CompositeRule
overlap_rule(const std::vector<const numerics::PiecewiseSpace *> &spaces,
             int quad_points) {
  std::vector<double> br{0.0, kPi / 6.0, kPi / 3.0, kPi / 2.0};
  for (auto *s : spaces)
    br.insert(br.end(), s->breaks().begin(), s->breaks().end());
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end(),
                       [](double x, double y) { return std::abs(x - y) < 1e-13; }),
           br.end());
  // meshes of many low-order pieces (finite differences) need no splitting
  const bool dense = br.size() > 256;
  const int split = dense ? 1 : 4;
  std::vector<double> fine;
  for (std::size_t k = 0; k + 1 < br.size(); ++k)
    for (int q = 0; q < split; ++q)
      fine.push_back(br[k] + (br[k + 1] - br[k]) * q / split);
  fine.push_back(br.back());
  return numerics::composite_rule(fine,
                                  numerics::GaussLegendre(dense ? 4 : quad_points));
}

// Row-scaled operator: collocation rows of -psi'' + U psi + 2 U R[psi]
// and derivative-continuity rows at interior breaks. B marks the
// collocation rows (the mass matrix of the generalized problem).
struct AngularOperator {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
};

inline AngularOperator assemble_spectral(const numerics::PiecewiseSpace &S,
                                         const Potential &p, double rho,
                                         double mu, const DirectOptions &o) {
  const int n = S.size(), pord = S.order();
  const auto &cb = S.basis();
  numerics::GaussLegendre gl(o.quad_points);
  AngularOperator op{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  for (int e = 0; e < S.elements(); ++e) {
    const int off = S.offset(e);
    const double h = S.width(e);
    const double s2 = 4.0 / (h * h);
    for (int j = 1; j < pord; ++j) {
      const int g = off + j;
      const double al = S.nodes()[g];
      const double U = rescaled_potential(p, rho, mu, al);
      auto row = op.A.row(g);
      for (int k = 0; k <= pord; ++k)
        row[off + k] -= s2 * cb.d2()(j, k);
      row[g] += U;
      if (U != 0.0) {
        const double lo = std::abs(kPi / 3.0 - al);
        const double hi = kPi / 2.0 - std::abs(kPi / 6.0 - al);
        S.add_integral_row(lo, hi, gl, 2.0 * U * 2.0 / kSqrt3, row);
      }
      row *= h * h;
      op.B[g] = h * h;
    }
  }
  for (int e = 1; e < S.elements(); ++e) {
    const int g = S.offset(e);
    const double hl = S.width(e - 1), hr = S.width(e);
    auto row = op.A.row(g);
    for (int k = 0; k <= pord; ++k) {
      row[S.offset(e - 1) + k] += 2.0 / hl * cb.d1()(pord, k);
      row[S.offset(e) + k] -= 2.0 / hr * cb.d1()(0, k);
    }
    row *= hr;
  }
  return op;
}

inline double chi_norm2(const AngularSolution &s, const numerics::CompositeRule &q,
                        std::vector<double> *chi_out = nullptr,
                        double *psi_norm2 = nullptr) {
  double n2 = 0.0, p2 = 0.0;
  if (chi_out)
    chi_out->resize(q.x.size());
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    const double c = s.chi_at(q.x[i]);
    const double ps = s.psi_at(q.x[i]);
    n2 += q.w[i] * c * c;
    p2 += q.w[i] * ps * ps;
    if (chi_out)
      (*chi_out)[i] = c;
  }
  if (psi_norm2)
    *psi_norm2 = p2;
  return n2;
}

// Unit norm of psi + 2R[psi], Phi(pi/4) > 0, and uniform samples.
inline bool finish_solution(AngularSolution &s, const DirectOptions &o) {
  const auto q = overlap_rule({&s.space()}, o.quad_points);
  double p2 = 0.0;
  const double n2 = chi_norm2(s, q, nullptr, &p2);
  if (!(n2 > 1e-16 * p2))
    return false; // spurious: psi + 2R[psi] vanishes
  double sc = 1.0 / std::sqrt(n2);
  if (s.chi_at(kPi / 4.0) < 0.0)
    sc = -sc;
  s.scale(sc);
  const int m = std::max(2, o.sample_points);
  s.alpha.resize(m);
  s.psi.resize(m);
  s.phi.resize(m);
  for (int i = 0; i < m; ++i) {
    const double a = kPi / 2.0 * i / (m - 1);
    s.alpha[i] = a;
    s.psi[i] = s.psi_at(a);
    s.phi[i] = s.phi_at(a);
  }
  s.norm = chi_norm2(s, q);
  return true;
}

inline std::vector<AngularSolution>
solve_spectral(const Potential &p, double rho, double mu, int n_lowest,
               const DirectOptions &o) {
  const double a0 = alpha0_of(p, rho, mu);
  auto space = std::make_shared<numerics::PiecewiseSpace>(angular_breaks(a0, o),
                                                          o.order);
  const auto op = assemble_spectral(*space, p, rho, mu, o);
  const int n = space->size();
  const int m = n - 2; // Dirichlet ends dropped
  const Eigen::MatrixXd A = op.A.block(1, 1, m, m);
  const Eigen::VectorXd B = op.B.segment(1, m);

  // shift-invert: (A - sigma B)^{-1} B x = theta x, nu^2 = sigma + 1/theta
  const double sigma = -0.318309886;
  Eigen::MatrixXd As = A;
  for (int i = 0; i < m; ++i)
    As(i, i) -= sigma * B[i];
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(As);
  const Eigen::MatrixXd M = lu.solve(Eigen::MatrixXd(B.asDiagonal()));
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, true);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::NoConvergence, "dense eigensolver failed");

  struct Cand {
    double nu2;
    int idx;
  };
  std::vector<Cand> cand;
  const auto th = es.eigenvalues();
  double thmax = 0.0;
  for (int i = 0; i < m; ++i)
    thmax = std::max(thmax, std::abs(th[i]));
  for (int i = 0; i < m; ++i) {
    if (std::abs(th[i]) < 1e-13 * thmax)
      continue; // infinite eigenvalues from the constraint rows
    const std::complex<double> ev = sigma + 1.0 / th[i];
    if (std::abs(ev.imag()) > 1e-8 * (1.0 + std::abs(ev.real())))
      continue;
    cand.push_back({ev.real(), i});
  }
  std::sort(cand.begin(), cand.end(),
            [](const Cand &a, const Cand &b) { return a.nu2 < b.nu2; });

  std::vector<AngularSolution> out;
  for (const auto &c : cand) {
    if (static_cast<int>(out.size()) >= n_lowest)
      break;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v.segment(1, m) = es.eigenvectors().col(c.idx).real();
    AngularSolution s(space, v);
    s.rho = rho;
    s.mu = mu;
    s.lambda = c.nu2 - 4.0;
    if (finish_solution(s, o))
      out.push_back(std::move(s));
  }
  return out;
}

inline AngularSolution solve_finite_difference(const Potential &p, double rho,
                                               double mu, double seed,
                                               const DirectOptions &o) {
  const int N = o.grid_n;
  const double h = kPi / 2.0 / N;
  std::vector<double> br(N + 1);
  for (int i = 0; i <= N; ++i)
    br[i] = h * i;
  br.back() = kPi / 2.0;
  auto space = std::make_shared<numerics::PiecewiseSpace>(br, 1);
  // two Gauss points are exact on linear pieces: the trapezoid rule with
  // partial end cells
  numerics::GaussLegendre gl(2);
  const int m = N - 1;

  // A - seed = T + P W: T tridiagonal, W the dense rotation rows living on
  // the nodes where U != 0 (selected by P). Solved with the Woodbury form.
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> rows;
  std::vector<Eigen::RowVectorXd> wrows;
  Eigen::RowVectorXd row(N + 1);
  for (int i = 1; i < N; ++i) {
    const int r = i - 1;
    const double al = h * i;
    const double U = rescaled_potential(p, rho, mu, al);
    trip.emplace_back(r, r, 2.0 / (h * h) + U - seed);
    if (i > 1)
      trip.emplace_back(r, r - 1, -1.0 / (h * h));
    if (i < N - 1)
      trip.emplace_back(r, r + 1, -1.0 / (h * h));
    if (U != 0.0) {
      row.setZero();
      const double lo = std::abs(kPi / 3.0 - al);
      const double hi = kPi / 2.0 - std::abs(kPi / 6.0 - al);
      space->add_integral_row(lo, hi, gl, 2.0 * U * 2.0 / kSqrt3, row);
      rows.push_back(r);
      wrows.push_back(row.segment(1, m));
    }
  }
  Eigen::SparseMatrix<double> T(m, m);
  T.setFromTriplets(trip.begin(), trip.end());
  T.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(T);
  if (lu.info() != Eigen::Success)
    fail(ErrorCode::NoConvergence, "tridiagonal factorization failed");

  const int k = static_cast<int>(rows.size());
  Eigen::MatrixXd W(k, m), Pm = Eigen::MatrixXd::Zero(m, k);
  for (int j = 0; j < k; ++j) {
    W.row(j) = wrows[j];
    Pm(rows[j], j) = 1.0;
  }
  const Eigen::MatrixXd Z = k > 0 ? Eigen::MatrixXd(lu.solve(Pm)) : Eigen::MatrixXd(m, 0);
  Eigen::PartialPivLU<Eigen::MatrixXd> cap;
  if (k > 0)
    cap.compute(Eigen::MatrixXd::Identity(k, k) + W * Z);
  auto apply_inverse = [&](const Eigen::VectorXd &x) {
    Eigen::VectorXd y = lu.solve(x);
    if (k > 0)
      y -= Z * cap.solve(W * y);
    return y;
  };

  Eigen::VectorXd x(m);
  for (int i = 0; i < m; ++i)
    x[i] = std::sin(2.0 * h * (i + 1)) + 0.1;
  x.normalize();
  double d_prev = 0.0, d = 0.0;
  bool ok = false;
  for (int it = 0; it < o.max_iterations; ++it) {
    Eigen::VectorXd y = apply_inverse(x);
    d = x.dot(y) / y.dot(y); // nu^2 - seed
    x = y.normalized();
    if (it > 2 && std::abs(d - d_prev) < 1e-13 * (1.0 + std::abs(d + seed))) {
      ok = true;
      break;
    }
    d_prev = d;
  }
  if (!ok)
    fail(ErrorCode::NoConvergence, "inverse iteration did not converge");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(N + 1);
  v.segment(1, m) = x;
  AngularSolution s(space, v);
  s.rho = rho;
  s.mu = mu;
  s.lambda = seed + d - 4.0;
  if (!finish_solution(s, o))
    fail(ErrorCode::NoConvergence, "inverse iteration landed on a spurious solution");
  return s;
}

} // namespace detail

// Lowest hyperangular eigenpairs at fixed rho. The finite-difference scheme
// returns the eigenpair nearest each seed (default: the universal nu0^2).
inline std::vector<AngularSolution> eigen_solve(const Potential &p, double rho,
                                                double mu = 1.0,
                                                int n_lowest = 1,
                                                const DirectOptions &o = {}) {
  if (!(rho > 0.0))
    fail(ErrorCode::InvalidArgument, "rho must be positive");
  std::vector<AngularSolution> out;
  if (o.scheme == Scheme::Spectral) {
    out = detail::solve_spectral(p, rho, mu, n_lowest, o);
  } else {
    if (o.grid_n < 500)
      fail(ErrorCode::InvalidArgument, "grid_n must be at least 500");
    std::vector<double> seeds = o.seeds;
    if (seeds.empty())
      seeds.push_back(efimov_constant().nu0_squared);
    for (double sd : seeds) {
      if (static_cast<int>(out.size()) >= n_lowest)
        break;
      auto s = detail::solve_finite_difference(p, rho, mu, sd, o);
      bool dup = false;
      for (const auto &t : out)
        dup = dup || std::abs(t.lambda - s.lambda) < 1e-10 * (1.0 + std::abs(s.lambda));
      if (!dup)
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(),
              [](const auto &a, const auto &b) { return a.lambda < b.lambda; });
  }
  if (out.empty())
    fail(ErrorCode::NoConvergence, "no eigenpair found");
  for (std::size_t i = 0; i + 1 < out.size(); ++i)
    if (std::abs(out[i + 1].lambda - out[i].lambda) < 1e-8) {
      out[i].degenerate = true;
      out[i + 1].degenerate = true;
    }
  return out;
}

struct QEstimate {
  double rho = 0.0;
  double Q = 0.0;
  double h = 0.0;
  double richardson_error = 0.0;
  double lambda = 0.0;  // eigenvalue of the tracked branch at rho
  double Q_coarse = 0.0; // step h
  double Q_fine = 0.0;   // step h/2
};

namespace detail {

// <chi_0 | chi_+ - 2 chi_0 + chi_-> / h^2, the neighbours picked among the
// lowest solutions at rho -+ h by overlap with chi_0.
inline double q_second_difference(const AngularSolution &c0, const Potential &p,
                                  double h, int n_track, const DirectOptions &o) {
  const double rho = c0.rho, mu = c0.mu;
  auto minus = eigen_solve(p, rho - h, mu, n_track, o);
  auto plus = eigen_solve(p, rho + h, mu, n_track, o);
  const auto q = overlap_rule({&c0.space(), &minus[0].space(), &plus[0].space()},
                              o.quad_points);
  std::vector<double> x0;
  chi_norm2(c0, q, &x0);
  auto pick = [&](const std::vector<AngularSolution> &sols) {
    std::vector<double> best;
    double best_ov = -1.0;
    for (const auto &s : sols) {
      std::vector<double> x;
      const double n2 = chi_norm2(s, q, &x);
      double ov = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        ov += q.w[i] * x[i] * x0[i];
      const double inv = 1.0 / std::sqrt(n2);
      if (std::abs(ov) * inv > best_ov) {
        best_ov = std::abs(ov) * inv;
        const double sg = ov < 0.0 ? -inv : inv;
        for (auto &v : x)
          v *= sg;
        best = std::move(x);
      }
    }
    return best;
  };
  const auto xm = pick(minus), xp = pick(plus);
  double n0 = 0.0, s = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    n0 += q.w[i] * x0[i] * x0[i];
    s += q.w[i] * x0[i] * (xp[i] - 2.0 * x0[i] + xm[i]);
  }
  return s / n0 / (h * h);
}

} // namespace detail

// Non-adiabatic term <Phi | d^2/d rho^2 | Phi> with Phi normalized in the
// sin^2(2 alpha) measure; Richardson over steps h and h/2.
inline QEstimate q_term(const Potential &p, double rho, double mu = 1.0,
                        double h = 0.0, const DirectOptions &o = {},
                        int branch = 0) {
  if (h <= 0.0)
    h = 1e-3 * rho;
  if (!(rho - h > 0.0))
    fail(ErrorCode::InvalidArgument, "rho - h must be positive");
  const int n_track = branch + 3;
  auto centre = eigen_solve(p, rho, mu, n_track, o);
  if (branch >= static_cast<int>(centre.size()))
    fail(ErrorCode::NoConvergence, "requested branch not found at rho");
  const auto &c0 = centre[branch];
  QEstimate e;
  e.rho = rho;
  e.h = h;
  e.lambda = c0.lambda;
  e.Q_coarse = detail::q_second_difference(c0, p, h, n_track, o);
  e.Q_fine = detail::q_second_difference(c0, p, 0.5 * h, n_track, o);
  e.Q = (4.0 * e.Q_fine - e.Q_coarse) / 3.0;
  e.richardson_error = std::abs(e.Q - e.Q_fine);
  const double floor = 1e-8 / (rho * rho);
  if (e.richardson_error > 0.05 * std::abs(e.Q) + floor) {
    std::ostringstream os;
    os << "Richardson error " << e.richardson_error << " exceeds 5% of Q = " << e.Q
       << " at rho = " << rho;
    fail(ErrorCode::StepTooLarge, os.str());
  }
  return e;
}

} // namespace efimov
