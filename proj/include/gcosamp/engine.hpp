#pragma once

#include "gcosamp/least_squares.hpp"
#include "gcosamp/models.hpp"
#include "gcosamp/operators.hpp"

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

namespace gcosamp {

struct RecoverySettings {
  int max_iterations = 50;
  double residual_relative_improvement_floor = 1e-4;
  double absolute_residual_floor = 1e-9;
  int ls_max_iterations = 200;
  double ls_tolerance = 1e-10;
  // basis dimensions up to this size get an explicit A B matrix inside the LS solve
  Index explicit_image_limit = 1024;

  void validate() const {
    require_config(max_iterations >= 1, "max_iterations must be >= 1");
    require_config(residual_relative_improvement_floor > 0.0 && absolute_residual_floor > 0.0 && ls_tolerance > 0.0,
                   "tolerances must be positive");
    require_config(ls_max_iterations >= 1, "ls_max_iterations must be >= 1");
  }
};

enum class HaltReason { residual_floor, stagnation, max_iterations };

inline const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::residual_floor: return "residual-floor";
    case HaltReason::stagnation: return "stagnation";
    case HaltReason::max_iterations: return "max-iterations";
  }
  return "unknown";
}

struct TraceRow {
  int t = 0;
  double residual_norm = 0.0;
  std::optional<double> error_norm;
  std::optional<double> intermediate_error_norm;
  Index subspace_dim = 0;
  int ls_iterations = 0;
  bool ls_converged = true;
  bool ls_regularized = false;
};

struct RecoveryTrace {
  std::vector<TraceRow> rows;
  Vector estimate;
  HaltReason halt = HaltReason::max_iterations;
  Subspace final_subspace;

  bool ls_all_converged() const {
    return std::all_of(rows.begin(), rows.end(), [](const TraceRow& r) { return r.ls_converged; });
  }
};

/// Stopping rule evaluated after iteration t with the residual history
/// [||y||, ||r_1||, ..., ||r_t||].
inline std::optional<HaltReason> halt_check(const std::vector<double>& residual_history, int t,
                                            const RecoverySettings& settings) {
  if (residual_history.empty()) return std::nullopt;
  const double current = residual_history.back();
  if (current < settings.absolute_residual_floor) return HaltReason::residual_floor;
  if (residual_history.size() >= 2) {
    const double previous = residual_history[residual_history.size() - 2];
    if (previous > 0.0 && (previous - current) / previous < settings.residual_relative_improvement_floor)
      return HaltReason::stagnation;
  }
  if (t >= settings.max_iterations) return HaltReason::max_iterations;
  return std::nullopt;
}

struct LeastSquaresSolution {
  Vector estimate;      // x in the ambient space
  Vector coefficients;  // basis coordinates
  int iterations = 0;
  bool converged = true;
  bool regularized = false;
};

/// argmin ||y - A z|| subject to z in range(basis), via CGLS in basis coordinates.
inline LeastSquaresSolution solve_in_basis(const MeasurementOperator& a, const Vector& y, const SubspaceBasis& basis,
                                           const RecoverySettings& settings) {
  require_shape(y.size() == a.rows(), "least squares: measurement length mismatch");
  LeastSquaresSolution out;
  CglsResult res;
  if (basis.dim() <= settings.explicit_image_limit) {
    const Matrix image = basis.image(a);
    res = cgls_dense(image, y, settings.ls_max_iterations, settings.ls_tolerance);
  } else {
    res = cgls([&](const Vector& c) -> Vector { return a.apply(basis.expand(c)); },
               [&](const Vector& r) -> Vector { return basis.reduce(a.adjoint(r)); }, y, basis.dim(),
               settings.ls_max_iterations, settings.ls_tolerance);
  }
  out.coefficients = std::move(res.coefficients);
  out.estimate = basis.expand(out.coefficients);
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.regularized = res.regularized;
  return out;
}

inline LeastSquaresSolution constrained_least_squares(const MeasurementOperator& a, const Vector& y,
                                                      const Subspace& sub, const UnionModel& model,
                                                      const RecoverySettings& settings) {
  require_shape(a.cols() == model.ambient_dim(), "least squares: operator/model dimension mismatch");
  return solve_in_basis(a, y, basis_map(sub, model), settings);
}

namespace detail {
inline void guard_finite(const Vector& v, const char* stage, int t) {
  if (!v.allFinite())
    throw NumericalAbort(std::string("non-finite values after ") + stage + " at iteration " + std::to_string(t));
}
}  // namespace detail

/// Generalized CoSaMP: proxy, order-2 selection, merge, constrained LS, order-1
/// re-selection and projection, residual update.
inline RecoveryTrace run_gcosamp(const MeasurementOperator& a, const Vector& y, const UnionModel& model,
                                 const RecoverySettings& settings, const std::optional<Vector>& truth = std::nullopt) {
  settings.validate();
  require_shape(y.size() == a.rows(), "run_gcosamp: measurement length mismatch");
  require_shape(a.cols() == model.ambient_dim(), "run_gcosamp: operator/model dimension mismatch");
  if (truth) require_shape(truth->size() == a.cols(), "run_gcosamp: truth length mismatch");
  detail::guard_finite(y, "input", 0);

  RecoveryTrace trace;
  Vector x = Vector::Zero(a.cols());
  Vector r = y;
  Subspace current = empty_subspace(model);
  std::vector<double> history{y.norm()};

  for (int t = 1;; ++t) {
    const Vector proxy = a.adjoint(r);
    detail::guard_finite(proxy, "proxy", t);
    const Subspace delta = select_subspace(model, proxy, 2);
    const Subspace merged = sum_subspaces(current, delta, model);
    const LeastSquaresSolution ls = constrained_least_squares(a, y, merged, model, settings);
    detail::guard_finite(ls.estimate, "least squares", t);
    current = select_subspace(model, ls.estimate, 1);
    x = project(current, ls.estimate, model);
    detail::guard_finite(x, "pruning", t);
    r = y - a.apply(x);

    TraceRow row;
    row.t = t;
    row.residual_norm = r.norm();
    if (truth) {
      row.error_norm = (x - *truth).norm();
      row.intermediate_error_norm = (ls.estimate - *truth).norm();
    }
    row.subspace_dim = basis_map(current, model).dim();
    row.ls_iterations = ls.iterations;
    row.ls_converged = ls.converged;
    row.ls_regularized = ls.regularized;
    trace.rows.push_back(row);
    history.push_back(row.residual_norm);

    if (auto halt = halt_check(history, t, settings)) {
      trace.halt = *halt;
      break;
    }
  }
  trace.estimate = std::move(x);
  trace.final_subspace = std::move(current);
  return trace;
}

namespace detail {
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : ""; }
}  // namespace detail

/// `t,residual_norm,error_norm,intermediate_error_norm,subspace_dim` rows, then `halt,<reason>`.
/// Missing error columns (no truth supplied) are left empty.
inline void write_trace_csv(std::ostream& out, const RecoveryTrace& trace) {
  out << "t,residual_norm,error_norm,intermediate_error_norm,subspace_dim\n";
  for (const auto& r : trace.rows)
    out << r.t << ',' << detail::format_number(r.residual_norm) << ',' << detail::format_optional(r.error_norm) << ','
        << detail::format_optional(r.intermediate_error_norm) << ',' << r.subspace_dim << '\n';
  out << "halt," << to_string(trace.halt) << '\n';
}

}  // namespace gcosamp
