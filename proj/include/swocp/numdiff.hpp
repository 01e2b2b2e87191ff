#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace swocp::numdiff {

inline constexpr double kRelativeStep = 1e-6;

inline double step_for(double value) { return kRelativeStep * std::max(1.0, std::abs(value)); }

/// Central-difference gradient of a scalar function.
template <typename F>
Eigen::VectorXd gradient(const F& f, Eigen::VectorXd z) {
  Eigen::VectorXd g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double zi = z[i];
    const double h = step_for(zi);
    z[i] = zi + h;
    const double fp = f(z);
    z[i] = zi - h;
    const double fm = f(z);
    z[i] = zi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Central-difference Jacobian of a vector function; `rows` is the output size.
template <typename F>
Eigen::MatrixXd jacobian(const F& f, Eigen::VectorXd z, Eigen::Index rows) {
  Eigen::MatrixXd jac(rows, z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double zi = z[i];
    const double h = step_for(zi);
    z[i] = zi + h;
    const Eigen::VectorXd fp = f(z);
    z[i] = zi - h;
    const Eigen::VectorXd fm = f(z);
    z[i] = zi;
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

}  // namespace swocp::numdiff
