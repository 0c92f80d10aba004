#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <numbers>
#include <vector>

namespace efimov::numerics {

// Chebyshev-Gauss-Lobatto nodes on [-1, 1] (ascending) with the collocation
// matrices and weights needed by the element solvers. Order 1 degenerates to
// the two endpoints, i.e. linear elements.
class ChebyshevBasis {
public:
  explicit ChebyshevBasis(int order) : order_(order) {
    assert(order >= 1);
    const int n = order;
    x_.resize(n + 1);
    for (int j = 0; j <= n; ++j)
      x_[j] = -std::cos(std::numbers::pi * j / n);
    if (n % 2 == 0)
      x_[n / 2] = 0.0;

    bary_.resize(n + 1);
    for (int j = 0; j <= n; ++j)
      bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);

    // differentiation matrix from barycentric weights; diagonal via
    // negative row sums
    d1_.resize(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) {
      double diag = 0.0;
      for (int j = 0; j <= n; ++j) {
        if (i == j)
          continue;
        d1_(i, j) = (bary_[j] / bary_[i]) / (x_[i] - x_[j]);
        diag -= d1_(i, j);
      }
      d1_(i, i) = diag;
    }
    d2_ = d1_ * d1_;

    cc_ = clenshaw_curtis(n);
  }

  int order() const { return order_; }
  int size() const { return order_ + 1; }
  const std::vector<double> &nodes() const { return x_; }
  const Eigen::MatrixXd &d1() const { return d1_; }
  const Eigen::MatrixXd &d2() const { return d2_; }
  // Clenshaw-Curtis weights for the nodes (integrate on [-1, 1]).
  const std::vector<double> &quadrature_weights() const { return cc_; }

  // Lagrange weights l_j(t) so that p(t) = sum_j l_j(t) p_j.
  void interpolation_row(double t, double *out) const {
    const int n = order_;
    for (int j = 0; j <= n; ++j) {
      if (t == x_[j]) {
        for (int k = 0; k <= n; ++k)
          out[k] = (k == j) ? 1.0 : 0.0;
        return;
      }
    }
    double sum = 0.0;
    for (int j = 0; j <= n; ++j) {
      out[j] = bary_[j] / (t - x_[j]);
      sum += out[j];
    }
    for (int j = 0; j <= n; ++j)
      out[j] /= sum;
  }

  // Derivative weights d l_j / dt at t.
  void derivative_row(double t, double *out) const {
    const int n = order_;
    for (int j = 0; j <= n; ++j) {
      if (t == x_[j]) {
        for (int k = 0; k <= n; ++k)
          out[k] = d1_(j, k);
        return;
      }
    }
    // p'(t) = sum_j l_j(t) * (p'_j) is exact for the interpolant's
    // derivative since p' has degree n-1
    std::vector<double> l(n + 1);
    interpolation_row(t, l.data());
    for (int k = 0; k <= n; ++k) {
      double s = 0.0;
      for (int j = 0; j <= n; ++j)
        s += l[j] * d1_(j, k);
      out[k] = s;
    }
  }

private:
  static std::vector<double> clenshaw_curtis(int n) {
    std::vector<double> w(n + 1, 0.0);
    if (n == 1) {
      w[0] = w[1] = 1.0;
      return w;
    }
    const double pi = std::numbers::pi;
    for (int k = 0; k <= n; ++k) {
      const double theta = pi * k / n;
      double s = 0.0;
      for (int j = 1; j <= n / 2; ++j) {
        const double b = (2 * j == n) ? 1.0 : 2.0;
        s += b * std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
      }
      const double c = (k == 0 || k == n) ? 1.0 : 2.0;
      w[k] = c / n * (1.0 - s);
    }
    return w;
  }

  int order_;
  std::vector<double> x_;
  std::vector<double> bary_;
  Eigen::MatrixXd d1_;
  Eigen::MatrixXd d2_;
  std::vector<double> cc_;
};

} // namespace efimov::numerics
