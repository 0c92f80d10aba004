#pragma once

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace efimov::numerics {

// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;

  explicit GaussLegendre(int n) {
    const auto zeros = boost::math::legendre_p_zeros<double>(n);
    std::vector<std::pair<double, double>> xw;
    for (double z : zeros) {
      const double dp = boost::math::legendre_p_prime<double>(n, z);
      const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
      xw.emplace_back(z, wt);
      if (z != 0.0)
        xw.emplace_back(-z, wt);
    }
    std::sort(xw.begin(), xw.end());
    for (auto [xi, wi] : xw) {
      x.push_back(xi);
      w.push_back(wi);
    }
  }

  int size() const { return static_cast<int>(x.size()); }

  template <class F> double integrate(F &&f, double a, double b) const {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      s += w[i] * f(c + h * x[i]);
    return s * h;
  }
};

// Composite Gauss-Legendre nodes/weights over the sorted breakpoints.
struct CompositeRule {
  std::vector<double> x;
  std::vector<double> w;
};

inline CompositeRule composite_rule(std::vector<double> breaks,
                                    const GaussLegendre &gl) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) {
                             return std::abs(a - b) <= 1e-14 * (1.0 + std::abs(a));
                           }),
               breaks.end());
  CompositeRule r;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < gl.size(); ++i) {
      r.x.push_back(c + h * gl.x[i]);
      r.w.push_back(h * gl.w[i]);
    }
  }
  return r;
}

} // namespace efimov::numerics
