#pragma once

#include "efimov/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <utility>

namespace efimov::numerics {

// Bracketed root with TOMS 748; f(lo) and f(hi) must differ in sign.
template <class F>
double find_root(F &&f, double lo, double hi, double abs_tol = 1e-14,
                 std::uintmax_t max_iter = 200) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0)
    return lo;
  if (fhi == 0.0)
    return hi;
  if ((flo > 0) == (fhi > 0)) {
    std::ostringstream os;
    os << "no sign change on [" << lo << ", " << hi << "]";
    fail(ErrorCode::NoRootInBracket, os.str());
  }
  auto tol = [abs_tol](double a, double b) {
    return std::abs(b - a) <= abs_tol + 1e-15 * std::max(std::abs(a), std::abs(b));
  };
  std::uintmax_t it = max_iter;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, it);
  if (it >= max_iter)
    fail(ErrorCode::NoConvergence, "root finder exceeded iteration limit");
  return 0.5 * (a + b);
}

} // namespace efimov::numerics
