#pragma once

#include "efimov/channel.hpp"
#include "efimov/effpot.hpp"
#include "efimov/faddeev.hpp"
#include "efimov/io/config.hpp"
#include "efimov/io/csv.hpp"
#include "efimov/radial.hpp"
#include "efimov/universal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace efimov::cli {

enum ExitCode { kOk = 0, kUsage = 2, kPartial = 3, kFailure = 4 };

struct CommandResult {
  io::CsvTable table;
  int exit_code = kOk;
  std::vector<std::string> warnings;
  std::vector<std::string> summary; // human-readable lines for stderr
};

// 0 when at least 90% of the cells succeed, 4 when none do, else 3.
inline int exit_for(std::size_t ok, std::size_t total) {
  if (total == 0 || ok == total)
    return kOk;
  if (ok == 0)
    return kFailure;
  return 10 * ok >= 9 * total ? kOk : kPartial;
}

inline ChannelOptions channel_options(const io::RunConfig &c) {
  ChannelOptions o;
  o.radial = c.radial_options();
  o.root_tol = c.tolerances.root_abs;
  return o;
}

inline DirectOptions direct_options(const io::RunConfig &c) {
  DirectOptions o;
  o.scheme = c.tolerances.scheme == "fd" ? Scheme::FiniteDifference : Scheme::Spectral;
  o.order = c.tolerances.order;
  o.grid_n = c.tolerances.grid_n;
  return o;
}

inline std::string fmt(double v) { return io::format_number(v); }

inline TwoBodyParams two_body(const io::RunConfig &c) {
  if (c.potential.params)
    return *c.potential.params;
  return low_energy_params(c.potential.potential, c.radial_options());
}

inline void require_potential(const io::RunConfig &c, const std::string &what) {
  if (c.potential.params)
    throw io::ConfigError(c.path, 0, what + " needs a potential, not kind = expansion");
}

// Runs f(i) for i in [0, n) on up to hardware_concurrency threads.
template <class F> void parallel_for(std::size_t n, F &&f) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;)
        f(i);
    });
  for (auto &t : pool)
    t.join();
}

// c0 again, from a central difference of the numerator of F in nu^2:
// c0 = den / (2 nu0^2 d num / d nu^2).
inline double c0_by_difference() {
  const double n2 = efimov_constant().nu0_squared, h = 1e-5;
  const double dnum =
      (efimov_fraction(n2 + h).num - efimov_fraction(n2 - h).num) / (2.0 * h);
  return efimov_fraction(n2).den / (2.0 * n2 * dnum);
}

inline CommandResult cmd_constants() {
  CommandResult r;
  r.table.header = {"quantity", "value", "check"};
  const auto &ec = efimov_constant();
  const auto m0 = m0_estimate();
  const double F = efimov_lhs_nu2(ec.nu0_squared);
  const double c0 = c0_constant();
  r.table.add({std::string("s0"), ec.s0, std::abs(F)});
  r.table.add({std::string("lambda0"), ec.lambda0, std::abs(F)});
  r.table.add({std::string("c0"), c0, std::abs(c0 - c0_by_difference())});
  r.table.add({std::string("M0"), m0.M0, m0.richardson_error});
  r.summary.push_back("check: |F(i s0)| for s0/lambda0, closed form vs difference "
                      "quotient for c0, Richardson error for M0");
  return r;
}

// a, Re, Rv, R0, B_D, k_D with the change under radial grid halving as the
// error estimate.
inline CommandResult cmd_params(const io::RunConfig &c) {
  CommandResult r;
  r.table.header = {"quantity", "value", "error_estimate"};
  if (c.potential.params) {
    const auto &t = *c.potential.params;
    for (auto [name, v] : {std::pair{"a", t.a()}, {"inv_a", t.inv_a}, {"Re", t.Re},
                           {"Rv", t.Rv}, {"R0", t.R0}})
      r.table.add({std::string(name), v, 0.0});
    return r;
  }
  const auto &p = c.potential.potential;
  auto o = c.radial_options();
  const auto t = low_energy_params(p, o);
  o.max_step *= 0.5;
  const auto f = low_energy_params(p, o);
  auto row = [&](const char *name, double v, double w) {
    r.table.add({std::string(name), v, std::abs(v - w)});
  };
  row("a", t.a(), f.a());
  row("inv_a", t.inv_a, f.inv_a);
  row("Re", t.Re, f.Re);
  row("Rv", t.Rv, f.Rv);
  row("R0", t.R0, f.R0);
  if (t.Bd && f.Bd) {
    row("B_D", *t.Bd, *f.Bd);
    row("k_D", *t.kd, *f.kd);
  } else {
    r.table.add({std::string("B_D"), std::monostate{}, std::monostate{}});
    r.table.add({std::string("k_D"), std::monostate{}, std::monostate{}});
  }
  if (c.potential.tune_a)
    r.summary.push_back("depth tuned for a = " + fmt(*c.potential.tune_a));
  return r;
}

inline Model model_from(const std::string &name) {
  if (name == "rigorous")
    return Model::Rigorous;
  if (name == "zr_a")
    return Model::ZrA;
  if (name == "zr_a_re")
    return Model::ZrARe;
  return Model::ZrAReRv;
}

inline CommandResult cmd_scan(const io::RunConfig &c) {
  CommandResult r;
  const auto grid = c.rho_grid();
  const double mu = c.scan.mu;
  const auto &pot = c.potential.potential;
  const auto copt = channel_options(c);
  r.table.header = {"rho"};
  std::vector<std::vector<double>> cols;
  std::size_t ok = 0, total = 0;

  std::optional<TwoBodyParams> params;
  auto need_params = [&] {
    if (!params)
      params = two_body(c);
    return *params;
  };
  for (const auto &m : c.scan.models)
    if (m == "rigorous" || m == "direct")
      require_potential(c, "model " + m);

  for (const auto &m : c.scan.models) {
    r.table.header.push_back(m);
    std::vector<double> col(grid.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> errs(grid.size());
    if (m == "direct") {
      r.warnings.push_back("direct model solves the full angular problem per point; "
                           "expect a few tenths of a second per rho");
      const auto dopt = direct_options(c);
      std::mutex mx;
      parallel_for(grid.size(), [&](std::size_t i) {
        try {
          auto sols = eigen_solve(pot, grid[i], mu, c.scan.branch + 1, dopt);
          if (static_cast<int>(sols.size()) <= c.scan.branch)
            fail(ErrorCode::NoConvergence, "branch not found");
          std::lock_guard<std::mutex> lk(mx);
          col[i] = sols[c.scan.branch].lambda;
        } catch (const Error &e) {
          std::lock_guard<std::mutex> lk(mx);
          errs[i] = e.what();
        }
      });
    } else {
      ChannelCurve curve;
      try {
        if (m == "rigorous") {
          // points below rho_c cannot be matched; start the continuation
          // at the first admissible one
          std::vector<double> g;
          const double rc = rho_c(pot, mu);
          for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid[i] >= rc)
              g.push_back(grid[i]);
            else
              errs[i] = "rho below rho_c = " + fmt(rc);
          curve = scan(RigorousSource{pot}, g, mu, c.scan.branch, copt, true);
        } else {
          curve = scan(ExpansionSource{need_params(), model_from(m)}, grid, mu,
                       c.scan.branch, copt, true);
        }
        for (std::size_t j = 0; j < curve.rho.size(); ++j) {
          const auto i = static_cast<std::size_t>(
              std::find(grid.begin(), grid.end(), curve.rho[j]) - grid.begin());
          col[i] = curve.lambda[j];
          errs[i] = curve.errors[j];
        }
      } catch (const Error &e) {
        for (auto &s : errs)
          if (s.empty())
            s = e.what();
      }
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      ++total;
      if (errs[i].empty() && std::isfinite(col[i]))
        ++ok;
      else
        r.warnings.push_back(m + " at rho = " + fmt(grid[i]) + ": " +
                             (errs[i].empty() ? "no value" : errs[i]));
    }
    cols.push_back(std::move(col));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<io::Cell> row{grid[i]};
    for (const auto &col : cols)
      row.push_back(std::isfinite(col[i]) ? io::Cell(col[i]) : io::Cell());
    r.table.add(std::move(row));
  }
  r.exit_code = exit_for(ok, total);
  r.summary.push_back(std::to_string(ok) + " of " + std::to_string(total) +
                      " points succeeded");
  return r;
}

inline CommandResult cmd_veff(const io::RunConfig &c) {
  CommandResult r;
  r.table.header = {"rho", "v_eff", "centrifugal", "q_part", "source"};
  const auto grid = c.rho_grid();
  const double mu = c.scan.mu;
  const auto &pot = c.potential.potential;
  std::size_t ok = 0, total = 0;
  std::optional<TwoBodyParams> params;
  std::optional<std::string> params_error;
  for (const auto &f : c.scan.veff_forms)
    if (f == "numerical" || f == "atom_dimer")
      require_potential(c, "veff form " + f);
  try {
    params = two_body(c);
  } catch (const Error &e) {
    params_error = e.what();
  }
  auto empty_row = [&](double rho, const std::string &src, const std::string &why) {
    r.table.add({rho, std::monostate{}, std::monostate{}, std::monostate{}, src});
    r.warnings.push_back(src + " at rho = " + fmt(rho) + ": " + why);
  };
  for (const auto &form : c.scan.veff_forms) {
    if (form == "numerical") {
      const auto dopt = direct_options(c);
      std::vector<std::optional<QEstimate>> est(grid.size());
      std::vector<std::string> errs(grid.size());
      parallel_for(grid.size(), [&](std::size_t i) {
        try {
          est[i] = q_term(pot, grid[i], mu, c.tolerances.fd_step * grid[i], dopt,
                          c.scan.branch);
        } catch (const Error &e) {
          errs[i] = e.what();
        }
      });
      for (std::size_t i = 0; i < grid.size(); ++i) {
        ++total;
        if (!est[i]) {
          empty_row(grid[i], form, errs[i]);
          continue;
        }
        ++ok;
        const double rho = grid[i];
        const double centr = mu * (est[i]->lambda + 4.0 - 0.25) / (rho * rho);
        const double q = -mu * est[i]->Q;
        r.table.add({rho, centr + q, centr, q, form});
      }
      continue;
    }
    for (double rho : grid) {
      ++total;
      if (!params) {
        empty_row(rho, form, *params_error);
        continue;
      }
      try {
        if (form == "atom_dimer") {
          const auto I = atom_dimer_integrals(pot, c.radial_options());
          const auto v = atom_dimer_veff(*params, I, rho, mu);
          const double centr = mu * (v.lambda + 4.0 - 0.25) / (rho * rho);
          r.table.add({rho, v.v_eff, centr, -mu * v.Q, form});
        } else {
          const auto f = form == "region_a"   ? AsymptoticForm::RegionA
                         : form == "region_b" ? AsymptoticForm::RegionB
                                              : AsymptoticForm::Box;
          AsymptoticOptions ao;
          ao.region_a_c = c.scan.region_a_c;
          const auto v = v_eff_asymptotic_parts(*params, rho, mu, f, ao);
          r.table.add({rho, v.v_eff, v.centrifugal, v.q_part, form});
        }
        ++ok;
      } catch (const Error &e) {
        empty_row(rho, form, e.what());
      }
    }
  }
  r.exit_code = exit_for(ok, total);
  return r;
}

inline CommandResult cmd_direct(const io::RunConfig &c, double rho, int n_lowest = 3) {
  CommandResult r;
  r.table.header = {"branch", "lambda", "rigorous", "relative_difference"};
  require_potential(c, "direct");
  const auto &pot = c.potential.potential;
  const double mu = c.scan.mu;
  const auto sols = eigen_solve(pot, rho, mu, n_lowest, direct_options(c));
  const bool matchable = rho >= rho_c(pot, mu);
  for (std::size_t k = 0; k < sols.size(); ++k) {
    io::Cell rig, diff;
    if (matchable && c.tolerances.scheme == "spectral") {
      try {
        // rigorous roots are indexed by nu^2 interval, not by order
        const auto b = solve_rigorous(pot, rho, mu, branch_of(sols[k].lambda),
                                      channel_options(c));
        rig = b.lambda;
        diff = std::abs(sols[k].lambda - b.lambda) / std::abs(b.lambda);
      } catch (const Error &e) {
        r.warnings.push_back("rigorous branch " + std::to_string(k) + ": " + e.what());
      }
    }
    r.table.add({static_cast<double>(k), sols[k].lambda, rig, diff});
    if (sols[k].degenerate)
      r.warnings.push_back("branch " + std::to_string(k) + " is degenerate");
  }
  if (c.tolerances.scheme == "fd")
    r.summary.push_back("finite-difference scheme returns the eigenpair nearest the "
                        "universal value only");
  return r;
}

inline CommandResult cmd_qscan(const io::RunConfig &c) {
  CommandResult r;
  r.table.header = {"rho", "lambda", "Q", "Q_rho2", "Q_rho3", "richardson_error"};
  require_potential(c, "qscan");
  const auto grid = c.rho_grid();
  const auto dopt = direct_options(c);
  std::vector<std::optional<QEstimate>> est(grid.size());
  std::vector<std::string> errs(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    try {
      est[i] = q_term(c.potential.potential, grid[i], c.scan.mu,
                      c.tolerances.fd_step * grid[i], dopt, c.scan.branch);
    } catch (const Error &e) {
      errs[i] = e.what();
    }
  });
  std::size_t ok = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double rho = grid[i];
    if (!est[i]) {
      r.table.add({rho, std::monostate{}, std::monostate{}, std::monostate{},
                   std::monostate{}, std::monostate{}});
      r.warnings.push_back("Q at rho = " + fmt(rho) + ": " + errs[i]);
      continue;
    }
    ++ok;
    const auto &e = *est[i];
    r.table.add({rho, e.lambda, e.Q, e.Q * rho * rho, e.Q * rho * rho * rho,
                 e.richardson_error});
  }
  r.exit_code = exit_for(ok, grid.size());
  return r;
}

// Inputs in mG, Bohr magnetons, Bohr radii and atomic mass units.
inline CommandResult cmd_feshbach(double dB_mG, double dmu_muB, double abg_a0,
                                  double mass_u) {
  CommandResult r;
  r.table.header = {"quantity", "value", "unit"};
  const double re =
      atomic_units::feshbach_effective_range_bohr(dB_mG, dmu_muB, abg_a0, mass_u);
  r.table.add({std::string("Re"), re, std::string("a0")});
  return r;
}

} // namespace efimov::cli
