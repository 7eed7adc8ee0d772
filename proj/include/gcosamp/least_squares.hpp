#pragma once

#include "gcosamp/common.hpp"

namespace gcosamp {

struct CglsResult {
  Vector coefficients;
  int iterations = 0;
  bool converged = false;
  bool regularized = false;
  double normal_residual = 0.0;  // ||M^T (y - M c) - damp c||
};

/// Conjugate gradients on the normal equations (CGLS) for
///   min ||y - M c||^2 + damp ||c||^2
/// with M given by `apply` (R^dim -> R^m) and `adjoint` (R^m -> R^dim).
/// Stops when the normal residual drops below tol times its initial value.
/// On curvature breakdown (a direction p with ||M p|| = 0, i.e. a rank-deficient
/// system) the solve restarts once with damp = 1e-10 * ||M^T y|| / ||y|| and is flagged.
template <typename Apply, typename Adjoint>
CglsResult cgls(const Apply& apply, const Adjoint& adjoint, const Vector& y, Index dim, int max_iterations,
                double tol, double damp = 0.0) {
  CglsResult out;
  out.coefficients = Vector::Zero(dim);
  if (dim == 0) {
    out.converged = true;
    return out;
  }

  Vector r = y;
  Vector s = adjoint(r);
  const double initial = s.norm();
  out.normal_residual = initial;
  if (initial == 0.0) {
    out.converged = true;
    return out;
  }

  Vector& c = out.coefficients;
  Vector p = s;
  double gamma = s.squaredNorm();
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector q = apply(p);
    const double delta = q.squaredNorm() + damp * p.squaredNorm();
    if (!(delta > 1e-300 * p.squaredNorm()) || !std::isfinite(delta)) {
      if (damp == 0.0) {
        CglsResult retry = cgls(apply, adjoint, y, dim, max_iterations, tol, 1e-10 * initial / y.norm());
        retry.regularized = true;
        return retry;
      }
      break;
    }
    const double alpha = gamma / delta;
    c += alpha * p;
    r -= alpha * q;
    s = adjoint(r) - damp * c;
    const double gamma_next = s.squaredNorm();
    out.iterations = it;
    out.normal_residual = std::sqrt(gamma_next);
    if (out.normal_residual <= tol * initial) {
      out.converged = true;
      break;
    }
    p = s + (gamma_next / gamma) * p;
    gamma = gamma_next;
  }
  return out;
}

/// CGLS on an explicit m x dim matrix.
inline CglsResult cgls_dense(const Matrix& m, const Vector& y, int max_iterations, double tol) {
  return cgls([&](const Vector& c) -> Vector { return m * c; },
              [&](const Vector& r) -> Vector { return m.transpose() * r; }, y, m.cols(), max_iterations, tol);
}

}  // namespace gcosamp
