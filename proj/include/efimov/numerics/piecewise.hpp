#pragma once

#include "efimov/numerics/chebyshev.hpp"
#include "efimov/numerics/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <memory>
#include <vector>

namespace efimov::numerics {

// Continuous piecewise polynomial of degree p on the given breaks, stored
// by values at the Chebyshev-Gauss-Lobatto nodes of each element. Shared
// element ends hold one value. Order 1 is the piecewise-linear case.
class PiecewiseSpace {
public:
  PiecewiseSpace(std::vector<double> breaks, int order)
      : breaks_(std::move(breaks)), basis_(std::make_shared<ChebyshevBasis>(order)) {
    assert(breaks_.size() >= 2);
    const int p = order;
    nodes_.reserve(size());
    for (int e = 0; e < elements(); ++e) {
      const double a = breaks_[e], b = breaks_[e + 1];
      for (int j = 0; j < p; ++j)
        nodes_.push_back(a + 0.5 * (b - a) * (basis_->nodes()[j] + 1.0));
    }
    nodes_.push_back(breaks_.back());
  }

  int order() const { return basis_->order(); }
  int elements() const { return static_cast<int>(breaks_.size()) - 1; }
  int size() const { return elements() * order() + 1; }
  const std::vector<double> &breaks() const { return breaks_; }
  const std::vector<double> &nodes() const { return nodes_; }
  const ChebyshevBasis &basis() const { return *basis_; }
  double width(int e) const { return breaks_[e + 1] - breaks_[e]; }
  // Global index of the first node of element e.
  int offset(int e) const { return e * order(); }

  int locate(double x) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    int e = static_cast<int>(it - breaks_.begin()) - 1;
    return std::clamp(e, 0, elements() - 1);
  }

  double local(int e, double x) const {
    return 2.0 * (x - breaks_[e]) / width(e) - 1.0;
  }

  // Interpolation weights at x: returns element index; w has order()+1
  // entries starting at offset(e).
  int value_row(double x, double *w) const {
    const int e = locate(x);
    basis_->interpolation_row(std::clamp(local(e, x), -1.0, 1.0), w);
    return e;
  }

  int derivative_row(double x, double *w) const {
    const int e = locate(x);
    basis_->derivative_row(std::clamp(local(e, x), -1.0, 1.0), w);
    const double s = 2.0 / width(e);
    for (int j = 0; j <= order(); ++j)
      w[j] *= s;
    return e;
  }

  double evaluate(const Eigen::VectorXd &v, double x) const {
    std::vector<double> w(order() + 1);
    const int e = value_row(x, w.data());
    double s = 0.0;
    for (int j = 0; j <= order(); ++j)
      s += w[j] * v[offset(e) + j];
    return s;
  }

  double derivative(const Eigen::VectorXd &v, double x) const {
    std::vector<double> w(order() + 1);
    const int e = derivative_row(x, w.data());
    double s = 0.0;
    for (int j = 0; j <= order(); ++j)
      s += w[j] * v[offset(e) + j];
    return s;
  }

  // Adds scale * (weights of int_lo^hi f) to row, quadrature split at the
  // element breaks so each piece is polynomial.
  template <class Row>
  void add_integral_row(double lo, double hi, const GaussLegendre &gl,
                        double scale, Row &&row) const {
    if (!(hi > lo))
      return;
    std::vector<double> pts{lo};
    for (double b : breaks_)
      if (b > lo && b < hi)
        pts.push_back(b);
    pts.push_back(hi);
    std::vector<double> w(order() + 1);
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
      const double a = pts[s], b = pts[s + 1];
      const double c = 0.5 * (a + b), h = 0.5 * (b - a);
      const int e = locate(c);
      for (int q = 0; q < gl.size(); ++q) {
        const double x = c + h * gl.x[q];
        basis_->interpolation_row(local(e, x), w.data());
        const double wq = scale * h * gl.w[q];
        for (int j = 0; j <= order(); ++j)
          row[offset(e) + j] += wq * w[j];
      }
    }
  }

private:
  std::vector<double> breaks_;
  std::shared_ptr<const ChebyshevBasis> basis_;
  std::vector<double> nodes_;
};

} // namespace efimov::numerics
