#pragma once

#include "gcosamp/engine.hpp"
#include "gcosamp/io.hpp"
#include "gcosamp/models.hpp"

namespace gcosamp {

/// Joint least squares over both components, or the ablation that solves the
/// synthesis part first and then the analysis part on what is left.
enum class LsMode { unified, split };

inline const char* to_string(LsMode m) { return m == LsMode::unified ? "unified" : "split"; }

struct CombinedState {
  IndexSet support;     // T, atoms of D
  IndexSet cosupport;   // Lambda, rows of Omega
  Vector alpha;         // length d, zero off T
  Vector x1;            // D_T alpha_T
  Vector x2;            // Q_Lambda x2_tilde
  Vector residual;
};

struct CombinedTraceRow {
  TraceRow base;
  Index support_size = 0;
  Index cosupport_size = 0;
  std::optional<double> psnr_x2;
};

struct CombinedTruth {
  Vector x1;
  Vector x2;
};

struct SacosampResult {
  Vector x1;
  Vector x2;
  Vector x;  // x1 + x2
  std::vector<CombinedTraceRow> rows;
  HaltReason halt = HaltReason::max_iterations;
  CombinedState state;
  bool any_regularized = false;

  int iterations() const { return static_cast<int>(rows.size()); }
};

struct JointLsSolution {
  Vector alpha;  // length d, zero off T~
  Vector x2;     // in null(Omega_Lambda~)
  int iterations = 0;
  bool converged = true;
  bool regularized = false;
};

namespace detail {

inline SubspaceBasis null_space_basis(const AnalysisOperator& omega, const IndexSet& cosupport) {
  if (omega.is_finite_difference()) return {omega.cols(), fd_components(omega, cosupport)};
  return {omega.cols(), SubspaceBasis::Columns{dense_null_space(omega, cosupport)}};
}

inline Vector scatter(const IndexSet& support, const Vector& values, Index size) {
  Vector out = Vector::Zero(size);
  for (std::size_t j = 0; j < support.size(); ++j) out[support[j]] = values[static_cast<Index>(j)];
  return out;
}

inline Vector restrict_to(const Vector& v, const IndexSet& support) {
  Vector out(static_cast<Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) out[static_cast<Index>(j)] = v[support[j]];
  return out;
}

}  // namespace detail

/// Q_Lambda v = (I - pinv(Omega_Lambda) Omega_Lambda) v.
inline Vector cosupport_projection(const AnalysisOperator& omega, const IndexSet& cosupport, const Vector& v) {
  return project_onto(detail::null_space_basis(omega, cosupport), v);
}

/// min ||y - A(D a + x2)|| s.t. a zero off `support`, Omega_cosupport x2 = 0.
/// x2 is parameterized in an orthonormal basis of null(Omega_cosupport).
inline JointLsSolution joint_constrained_ls(const MeasurementOperator& a, const Vector& y,
                                            const SynthesisDictionary& d, const AnalysisOperator& omega,
                                            const IndexSet& support, const IndexSet& cosupport,
                                            const RecoverySettings& settings) {
  require_shape(d.rows() == a.cols() && omega.cols() == a.cols(), "joint LS: operator dimensions disagree");
  std::vector<SubspaceBasis> parts;
  parts.emplace_back(a.cols(), SubspaceBasis::Columns{d.atoms_of(support), false});
  parts.push_back(detail::null_space_basis(omega, cosupport));
  const Index nt = parts.front().dim();
  const SubspaceBasis stacked(a.cols(), SubspaceBasis::Stacked{std::move(parts)});
  const auto ls = solve_in_basis(a, y, stacked, settings);

  JointLsSolution out;
  out.alpha = detail::scatter(support, ls.coefficients.head(nt), d.atoms());
  out.x2 = stacked.stacked()->parts[1].expand(ls.coefficients.tail(ls.coefficients.size() - nt));
  out.iterations = ls.iterations;
  out.converged = ls.converged;
  out.regularized = ls.regularized;
  return out;
}

/// Split ablation: synthesis LS against y - A x2_prev, then analysis LS against
/// the synthesis remainder.
inline JointLsSolution split_constrained_ls(const MeasurementOperator& a, const Vector& y,
                                            const SynthesisDictionary& d, const AnalysisOperator& omega,
                                            const IndexSet& support, const IndexSet& cosupport,
                                            const Vector& x2_previous, const RecoverySettings& settings) {
  JointLsSolution out;
  const SubspaceBasis atoms(a.cols(), SubspaceBasis::Columns{d.atoms_of(support), false});
  const auto first = solve_in_basis(a, Vector(y - a.apply(x2_previous)), atoms, settings);
  out.alpha = detail::scatter(support, first.coefficients, d.atoms());
  const Vector x1 = atoms.expand(first.coefficients);
  const auto second = solve_in_basis(a, Vector(y - a.apply(x1)), detail::null_space_basis(omega, cosupport), settings);
  out.x2 = second.estimate;
  out.iterations = first.iterations + second.iterations;
  out.converged = first.converged && second.converged;
  out.regularized = first.regularized || second.regularized;
  return out;
}

/// Synthesis-analysis CoSaMP. Measurements from Fourier operators are already real
/// (real/imaginary interleaving), so every LS solve stays in the real domain.
inline SacosampResult run_sacosamp(const MeasurementOperator& a, const Vector& y, const SynthesisDictionary& d,
                                   const AnalysisOperator& omega, Index k, Index ell, LsMode mode,
                                   const RecoverySettings& settings,
                                   const std::optional<CombinedTruth>& truth = std::nullopt, double psnr_peak = 255.0) {
  settings.validate();
  require_shape(y.size() == a.rows(), "run_sacosamp: measurement length mismatch");
  require_shape(d.rows() == a.cols() && omega.cols() == a.cols(), "run_sacosamp: operator dimensions disagree");
  require_config(k >= 1 && k <= d.atoms(), "run_sacosamp: need 1 <= k <= d");
  require_config(ell >= 0 && ell <= omega.rows(), "run_sacosamp: need 0 <= ell <= p");
  detail::guard_finite(y, "input", 0);

  const Index n = a.cols();
  SacosampResult res;
  CombinedState& s = res.state;
  s.cosupport = full_range(omega.rows());
  s.alpha = Vector::Zero(d.atoms());
  s.x1 = Vector::Zero(n);
  s.x2 = Vector::Zero(n);
  s.residual = y;
  std::vector<double> history{y.norm()};

  for (int t = 1;; ++t) {
    const Vector proxy = a.adjoint(s.residual);
    detail::guard_finite(proxy, "proxy", t);
    const IndexSet support_delta = top_indices(d.adjoint(proxy).cwiseAbs(), 2 * k);
    const IndexSet cosupport_delta = bottom_indices(omega.apply(proxy).cwiseAbs(), ell);
    const IndexSet support_merged = set_union(s.support, support_delta);
    const IndexSet cosupport_merged = set_intersection(s.cosupport, cosupport_delta);

    const JointLsSolution ls =
        mode == LsMode::unified
            ? joint_constrained_ls(a, y, d, omega, support_merged, cosupport_merged, settings)
            : split_constrained_ls(a, y, d, omega, support_merged, cosupport_merged, s.x2, settings);
    detail::guard_finite(ls.alpha, "least squares", t);
    detail::guard_finite(ls.x2, "least squares", t);

    // prune: k largest coefficients among T~, ell smallest analysis entries of x2~
    Vector merged_coeffs(static_cast<Index>(support_merged.size()));
    for (std::size_t j = 0; j < support_merged.size(); ++j)
      merged_coeffs[static_cast<Index>(j)] = std::abs(ls.alpha[support_merged[j]]);
    s.support.clear();
    for (Index j : top_indices(merged_coeffs, k)) s.support.push_back(support_merged[static_cast<std::size_t>(j)]);
    s.cosupport = bottom_indices(omega.apply(ls.x2).cwiseAbs(), ell);

    s.alpha = Vector::Zero(d.atoms());
    for (Index j : s.support) s.alpha[j] = ls.alpha[j];
    s.x1 = d.atoms_of(s.support) * detail::restrict_to(s.alpha, s.support);
    s.x2 = cosupport_projection(omega, s.cosupport, ls.x2);
    detail::guard_finite(s.x1, "pruning", t);
    detail::guard_finite(s.x2, "pruning", t);
    s.residual = y - a.apply(Vector(s.x1 + s.x2));

    CombinedTraceRow row;
    row.base.t = t;
    row.base.residual_norm = s.residual.norm();
    if (truth) {
      const Vector x_true = truth->x1 + truth->x2;
      row.base.error_norm = (s.x1 + s.x2 - x_true).norm();
      row.base.intermediate_error_norm = (d.atoms_of(support_merged) * detail::restrict_to(ls.alpha, support_merged) +
                                          ls.x2 - x_true)
                                             .norm();
      row.psnr_x2 = psnr(truth->x2, s.x2, psnr_peak);
    }
    row.support_size = static_cast<Index>(s.support.size());
    row.cosupport_size = static_cast<Index>(s.cosupport.size());
    row.base.subspace_dim = row.support_size + detail::null_space_basis(omega, s.cosupport).dim();
    row.base.ls_iterations = ls.iterations;
    row.base.ls_converged = ls.converged;
    row.base.ls_regularized = ls.regularized;
    res.any_regularized = res.any_regularized || ls.regularized;
    res.rows.push_back(row);
    history.push_back(row.base.residual_norm);

    if (auto halt = halt_check(history, t, settings)) {
      res.halt = *halt;
      break;
    }
  }
  res.x1 = s.x1;
  res.x2 = s.x2;
  res.x = res.x1 + res.x2;
  return res;
}

/// Trace CSV with the combined-model columns appended.
inline void write_sacosamp_trace_csv(std::ostream& out, const SacosampResult& res) {
  out << "t,residual_norm,error_norm,intermediate_error_norm,subspace_dim,|T|,|\xCE\x9B|,psnr_x2\n";
  for (const auto& r : res.rows)
    out << r.base.t << ',' << detail::format_number(r.base.residual_norm) << ','
        << detail::format_optional(r.base.error_norm) << ',' << detail::format_optional(r.base.intermediate_error_norm)
        << ',' << r.base.subspace_dim << ',' << r.support_size << ',' << r.cosupport_size << ','
        << detail::format_optional(r.psnr_x2) << '\n';
  out << "halt," << to_string(res.halt) << '\n';
}

}  // namespace gcosamp
