#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the library's closed forms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace oracle {

// Dual objective (1/n) w'M theta - (1/2n) |M theta|^2.
inline double dual_objective(const Eigen::MatrixXd& m, const Eigen::VectorXd& w, const Eigen::VectorXd& theta) {
  const double n = static_cast<double>(m.rows());
  const Eigen::VectorXd mt = m * theta;
  return w.dot(mt) / n - 0.5 * mt.squaredNorm() / n;
}

// Maximizes the dual by exact coordinate ascent (Gauss-Seidel sweeps).
inline double coordinate_ascent_max(const Eigen::MatrixXd& m, const Eigen::VectorXd& w, int sweeps = 200000) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(m.cols());
  Eigen::VectorXd resid = w;  // w - M theta
  for (int s = 0; s < sweeps; ++s) {
    double largest = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double nj = m.col(j).squaredNorm();
      if (nj == 0.0) continue;
      const double step = m.col(j).dot(resid) / nj;
      theta(j) += step;
      resid -= step * m.col(j);
      largest = std::max(largest, std::abs(step));
    }
    if (largest < 1e-14) break;
  }
  return dual_objective(m, w, theta);
}

// Central differences of a scalar function.
inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, double step = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd up = x, down = x;
    up(j) += step;
    down(j) -= step;
    g(j) = (f(up) - f(down)) / (2.0 * step);
  }
  return g;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Root of F(x) = p by bisection for a centered normal with standard deviation sd.
inline double normal_quantile_bisect(double p, double sd) {
  double lo = -40.0 * sd, hi = 40.0 * sd;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid / sd) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Direct average of h(pi(x), x) over correlated Gaussian contexts.
inline double brute_value(const Eigen::Vector4d& b, const Eigen::Vector2d& gate, double rho, std::size_t m,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double c = std::sqrt(1.0 - rho * rho);
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double x1 = normal(rng);
    const double x2 = rho * x1 + c * normal(rng);
    const int a = gate(0) * x1 + gate(1) * x2 > 0.0 ? 1 : 0;
    sum += b(0) * x1 + b(1) * x2 + a * (b(2) * x1 + b(3) * x2);
  }
  return sum / static_cast<double>(m);
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
