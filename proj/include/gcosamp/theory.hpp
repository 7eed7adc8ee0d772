#pragma once

#include "gcosamp/common.hpp"
#include "gcosamp/models.hpp"

#include <limits>
#include <variant>

namespace gcosamp {

// ---------------------------------------------------------------------------
// b_m = E ||g||_2 for g ~ N(0, I_m)
// ---------------------------------------------------------------------------

/// Mean of the chi distribution with m degrees of freedom, sqrt(2) Gamma((m+1)/2) / Gamma(m/2).
inline double expected_gaussian_norm(long m) {
  require_config(m >= 1, "expected_gaussian_norm: m must be >= 1");
  const double md = static_cast<double>(m);
  return std::sqrt(2.0) * std::exp(std::lgamma((md + 1.0) / 2.0) - std::lgamma(md / 2.0));
}

// ---------------------------------------------------------------------------
// Monte-Carlo Gaussian mean width of U^B intersected with the unit sphere
// ---------------------------------------------------------------------------

enum class SupExactness { exact_sup, lower_bound_sup };

inline const char* to_string(SupExactness e) {
  return e == SupExactness::exact_sup ? "exact-sup" : "lower-bound-sup";
}

struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
  std::optional<double> analytic_upper;
  std::optional<double> analytic_lower;
  SupExactness exactness = SupExactness::exact_sup;
};

/// sup over z in U^B, ||z|| = 1 of <g, z>. Exact for ksparse, blocksparse and lowrank;
/// for the other models the norm of the projection onto the greedily selected member,
/// which lower-bounds the supremum.
inline double width_sample(const UnionModel& model, int order, const Vector& g) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KSparse>) {
          const Vector a = g.cwiseAbs();
          double s = 0.0;
          for (Index i : top_indices(a, order * m.k)) s += a[i] * a[i];
          return std::sqrt(s);
        } else if constexpr (std::is_same_v<T, BlockSparse>) {
          const Vector e = detail::block_energies(g, m.block);
          double s = 0.0;
          for (Index b : top_indices(e, order * m.k / m.block)) s += e[b];
          return std::sqrt(s);
        } else if constexpr (std::is_same_v<T, LowRank>) {
          const Matrix x =
              Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(g.data(), m.n1, m.n2);
          const Vector sv = Eigen::JacobiSVD<Matrix>(x).singularValues();
          const Index count = std::min<Index>(order * m.r, sv.size());
          return sv.head(count).norm();
        } else {
          return project(select_subspace(model, g, order), g, model).norm();
        }
      },
      model.variant());
}

namespace detail {
inline WidthEstimate summarize(const std::vector<double>& values, bool exact) {
  WidthEstimate w;
  w.samples = static_cast<long>(values.size());
  const double n = static_cast<double>(values.size());
  w.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - w.mean) * (v - w.mean);
  w.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  w.exactness = exact ? SupExactness::exact_sup : SupExactness::lower_bound_sup;
  return w;
}
}  // namespace detail

/// Per-sample suprema for orders in `orders`, all evaluated on the same Gaussian draws.
/// Sample i uses its own stream derived from (seed, i).
inline std::vector<std::vector<double>> width_samples(const UnionModel& model, const std::vector<int>& orders,
                                                      long samples, std::uint64_t seed) {
  std::vector<std::vector<double>> out(orders.size(), std::vector<double>(static_cast<std::size_t>(samples)));
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t i) {
    Rng rng = make_rng(seed, 0x77u, static_cast<std::uint32_t>(i));
    const Vector g = gaussian_vector(model.ambient_dim(), rng);
    for (std::size_t o = 0; o < orders.size(); ++o) out[o][i] = width_sample(model, orders[o], g);
  });
  return out;
}

inline WidthEstimate mc_mean_width(const UnionModel& model, int order, long samples, std::uint64_t seed) {
  require_config(samples >= 2, "mc_mean_width: need at least 2 samples");
  require_config(order >= 1, "mc_mean_width: order must be >= 1");
  return detail::summarize(width_samples(model, {order}, samples, seed)[0], model.exact());
}

// ---------------------------------------------------------------------------
// Closed-form width bounds
// ---------------------------------------------------------------------------

namespace width {

struct Sparse {
  double n, k;
};
struct Tree {
  double k;
};
struct Block {
  double n, k, block;
};
struct LowRank {
  double n1, n2, r;
};
/// delta: RIP constant of D at order B k
struct Synthesis {
  double d, k, delta;
};
/// delta: RIP constant of pinv(Omega) at order B (p - ell)
struct Analysis {
  double p, ell, delta;
};
/// |S| <= exp(gamma) structured-sparsity family
struct Structured {
  double k, gamma;
};
struct Sum;

using Descriptor = std::variant<Sparse, Tree, Block, LowRank, Synthesis, Analysis, Structured, std::shared_ptr<Sum>>;

struct Sum {
  std::vector<Descriptor> parts;
};

inline Descriptor sum(std::vector<Descriptor> parts) { return std::make_shared<Sum>(Sum{std::move(parts)}); }

}  // namespace width

/// Upper bound on w(U^B intersected with the unit sphere). Sparse, low-rank, synthesis
/// and analysis bounds are stated directly for order B; tree, block and structured
/// bounds hold for U^1 and are lifted by w(U^B) <= B w(U^1). Sums add their parts.
inline double width_upper_bound(const width::Descriptor& model, int order, double c = 1.0) {
  require_config(order >= 1, "width_upper_bound: order must be >= 1");
  require_config(c > 0.0, "width_upper_bound: constant C must be positive");
  const double b = order;
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, width::Sparse>) {
          require_config(b * m.k <= m.n, "sparse bound: B k exceeds n");
          return std::sqrt(c * b * m.k * std::log(2.0 * m.n / (b * m.k)));
        } else if constexpr (std::is_same_v<T, width::Tree>) {
          return b * std::sqrt(c * m.k);
        } else if constexpr (std::is_same_v<T, width::Block>) {
          return b * std::sqrt(c * (m.k + (m.k / m.block) * std::log(m.n / m.k)));
        } else if constexpr (std::is_same_v<T, width::LowRank>) {
          return (std::sqrt(m.n1) + std::sqrt(m.n2)) * std::sqrt(b * m.r);
        } else if constexpr (std::is_same_v<T, width::Synthesis>) {
          require_config(m.delta >= 0.0 && m.delta < 1.0, "synthesis bound: RIP constant must be in [0, 1)");
          return c * std::sqrt(b * m.k / (1.0 - m.delta) * std::log(m.d));
        } else if constexpr (std::is_same_v<T, width::Analysis>) {
          require_config(m.delta >= 0.0 && m.delta < 1.0, "analysis bound: RIP constant must be in [0, 1)");
          return c * std::sqrt(b * (m.p - m.ell) / (1.0 - m.delta) * std::log(m.p));
        } else if constexpr (std::is_same_v<T, width::Structured>) {
          return b * std::sqrt(c * (m.k + 2.0 * m.gamma));
        } else {
          double total = 0.0;
          for (const auto& part : m->parts) total += width_upper_bound(part, order, c);
          return total;
        }
      },
      model);
}

/// Generic lift w(U^B) <= B w(U^1).
inline double lift_width_to_order(double width_order_one, int order) { return order * width_order_one; }

// ---------------------------------------------------------------------------
// Recovery bound report
// ---------------------------------------------------------------------------

struct BoundReport {
  long m = 0;
  double b_m = 0.0;
  double w4 = 0.0;
  double w3 = 0.0;
  double eta = 0.0;
  double m0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  double rho1 = 0.0;
  double xi1 = 0.0;
  double rho2 = 0.0;
  double xi2 = 0.0;
  double rho_m = 1.0;
  double xi_m = std::numeric_limits<double>::infinity();
  double noise_coefficient = std::numeric_limits<double>::infinity();
  double contraction = 0.0;  // 16 rho2^2 + rho1^2
  double threshold = 0.0;    // 14.5^2 m0 + 1
  bool converges = false;
  double probability_floor = 0.0;
};

namespace detail {

inline BoundReport fill_bound_report(long m, double sqrt_m0, double w3_plus_eta, double w4, double w3, double eta) {
  require_config(m >= 1, "bound_report: m must be >= 1");
  BoundReport r;
  r.m = m;
  r.w4 = w4;
  r.w3 = w3;
  r.eta = eta;
  r.m0 = sqrt_m0 * sqrt_m0;
  r.b_m = expected_gaussian_norm(m);
  r.mu1 = r.mu2 = 1.0 / ((r.b_m + sqrt_m0) * (r.b_m + sqrt_m0));
  const double gap = r.b_m - sqrt_m0;
  r.rho1 = 1.0 - r.mu1 * gap * gap;
  r.rho2 = 1.0 - r.mu2 * gap * gap;
  r.xi1 = r.mu1 * w3_plus_eta;
  r.xi2 = r.mu2 * sqrt_m0;
  r.contraction = 16.0 * r.rho2 * r.rho2 + r.rho1 * r.rho1;

  const double md = static_cast<double>(m);
  const double sm = std::sqrt(md);
  const double lower = md / std::sqrt(md + 1.0);  // lower bound on b_m
  const double low_gap = lower - sqrt_m0;
  if (low_gap > 0.0) {
    const double up = sm + sqrt_m0;
    r.rho_m = std::min(1.0, 4.0 * (up * up - low_gap * low_gap) / (low_gap * up));
    const double denom = md * md / (md + 1.0) - r.m0;
    r.xi_m = 2.0 * sqrt_m0 * std::sqrt((md + 1.0) / md) / denom * (2.0 + up / low_gap);
  }
  r.noise_coefficient = r.rho_m < 1.0 ? r.xi_m / (1.0 - r.rho_m) : std::numeric_limits<double>::infinity();
  r.threshold = 14.5 * 14.5 * r.m0 + 1.0;
  r.converges = md > r.threshold;
  r.probability_floor = 1.0 - 6.0 * std::exp(-eta * eta / 2.0);
  return r;
}

}  // namespace detail

/// Step sizes at their largest permitted value (b_m + sqrt(m0))^-2 with
/// m0 = (w4 + eta)^2; xi1 uses w3 + eta.
inline BoundReport bound_report(long m, double w4, double w3, double eta) {
  require_config(w4 >= w3 && w3 >= 0.0, "bound_report: need w4 >= w3 >= 0");
  require_config(eta > 0.0, "bound_report: eta must be positive");
  return detail::fill_bound_report(m, w4 + eta, w3 + eta, w4, w3, eta);
}

/// Report for a directly specified sample-complexity scale m0 (taking w3 = w4).
/// eta only enters the probability floor.
inline BoundReport bound_report_from_m0(long m, double m0, double eta = 1.0) {
  require_config(m0 > 0.0, "bound_report: m0 must be positive");
  const double s = std::sqrt(m0);
  BoundReport r = detail::fill_bound_report(m, s, s, std::max(0.0, s - eta), std::max(0.0, s - eta), eta);
  return r;
}

// ---------------------------------------------------------------------------
// Empirical verifiers
// ---------------------------------------------------------------------------

/// Random member of S^order: orthonormal basis of its subspace.
inline Matrix random_member_basis(const UnionModel& model, int order, Rng& rng) {
  const Subspace sub = std::visit(
      [&](const auto& m) -> Subspace {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KSparse>) {
          return {SupportSet{random_subset(m.n, std::min(order * m.k, m.n), rng)}, order};
        } else if constexpr (std::is_same_v<T, BlockSparse>) {
          const IndexSet blocks = random_subset(m.n / m.block, std::min(order * m.k / m.block, m.n / m.block), rng);
          IndexSet idx;
          for (Index b : blocks)
            for (Index j = 0; j < m.block; ++j) idx.push_back(b * m.block + j);
          return {SupportSet{idx}, order};
        } else if constexpr (std::is_same_v<T, LowRank>) {
          const Index rank = std::min<Index>(order * m.r, std::min(m.n1, m.n2));
          const Matrix u = Eigen::HouseholderQR<Matrix>(gaussian_matrix(m.n1, rank, rng)).householderQ() *
                           Matrix::Identity(m.n1, rank);
          const Matrix w = Eigen::HouseholderQR<Matrix>(gaussian_matrix(m.n2, rank, rng)).householderQ() *
                           Matrix::Identity(m.n2, rank);
          Matrix basis(m.n1 * m.n2, rank);
          for (Index t = 0; t < rank; ++t)
            for (Index i = 0; i < m.n1; ++i)
              for (Index j = 0; j < m.n2; ++j) basis(i * m.n2 + j, t) = u(i, t) * w(j, t);
          return {FactorBasis{basis}, order};
        } else if constexpr (std::is_same_v<T, SynthesisModel>) {
          return {SupportSet{random_subset(m.dictionary->atoms(), std::min(order * m.k, m.dictionary->atoms()), rng)},
                  order};
        } else if constexpr (std::is_same_v<T, AnalysisModel>) {
          return {CosupportSet{random_subset(m.omega->rows(), m.ell, rng)}, order};
        } else {
          return {SupportCosupportPair{random_subset(m.dictionary->atoms(), std::min(order * m.k, m.dictionary->atoms()), rng),
                                       random_subset(m.omega->rows(), m.ell, rng)},
                  order};
        }
      },
      model.variant());
  return subspace_basis(sub, model);
}

struct VerificationResult {
  long trials = 0;
  long passed = 0;
  double pass_rate = 0.0;
  double floor = 0.0;  // 1 - 2 exp(-eta^2 / 2)
  double width = 0.0;  // MC width estimate plugged into the bounds
  double b_m = 0.0;
  double lower = 0.0;  // bound values
  double upper = 0.0;
};

struct VerifyOptions {
  long width_samples = 2000;
};

/// Fresh Gaussian A and a random unit vector from a random member of S^order per trial;
/// counts ||A u|| / ||u|| inside [b_m - w - eta, b_m + w + eta].
inline VerificationResult verify_gordon(const UnionModel& model, int order, long m, double eta, long trials,
                                        std::uint64_t seed, VerifyOptions opts = {}) {
  require_config(trials >= 1 && m >= 1 && eta > 0.0, "verify_gordon: invalid arguments");
  VerificationResult out;
  out.trials = trials;
  out.width = mc_mean_width(model, order, opts.width_samples, seed ^ 0x9e3779b97f4a7c15ULL).mean;
  out.b_m = expected_gaussian_norm(m);
  out.lower = out.b_m - out.width - eta;
  out.upper = out.b_m + out.width + eta;
  out.floor = 1.0 - 2.0 * std::exp(-eta * eta / 2.0);
  const Index n = model.ambient_dim();
  std::vector<char> pass(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t i) {
    Rng rng = make_rng(seed, 0x676fu, static_cast<std::uint32_t>(i));
    const Matrix basis = random_member_basis(model, order, rng);
    const Matrix a = gaussian_matrix(m, n, rng);
    Vector u = basis * gaussian_vector(basis.cols(), rng);
    if (u.norm() == 0.0) u = basis.col(0);
    const double ratio = (a * u).norm() / u.norm();
    pass[i] = ratio >= out.lower && ratio <= out.upper;
  });
  out.passed = std::count(pass.begin(), pass.end(), 1);
  out.pass_rate = static_cast<double>(out.passed) / static_cast<double>(trials);
  return out;
}

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
inline double symmetric_spectral_norm(const Matrix& s, double rel_tol = 1e-10, int max_iterations = 1000) {
  if (s.rows() == 0) return 0.0;
  Vector v = Vector::Ones(s.rows()) / std::sqrt(static_cast<double>(s.rows()));
  double estimate = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = s * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(norm - estimate) <= rel_tol * norm) return norm;
    estimate = norm;
  }
  return estimate;
}

/// Checks ||P_V (I - mu A*A) P_V|| <= 1 - mu (b_m - w - eta)^2 on fresh (A, V) pairs.
/// The norm is evaluated in V's orthonormal coordinates: I - mu (A B)^T (A B).
inline VerificationResult verify_projected_contraction(const UnionModel& model, int order, long m, double mu,
                                                       double eta, long trials, std::uint64_t seed,
                                                       VerifyOptions opts = {}) {
  require_config(trials >= 1 && m >= 1 && eta > 0.0, "verify_projected_contraction: invalid arguments");
  VerificationResult out;
  out.trials = trials;
  out.width = mc_mean_width(model, order, opts.width_samples, seed ^ 0x9e3779b97f4a7c15ULL).mean;
  out.b_m = expected_gaussian_norm(m);
  const double mu_max = 1.0 / std::pow(out.b_m + out.width + eta, 2);
  if (mu < 0.0 || mu > mu_max)
    throw ConfigError("verify_projected_contraction: mu must lie in [0, (b_m + w + eta)^-2] = [0, " +
                      std::to_string(mu_max) + "]");
  const double gap = out.b_m - out.width - eta;
  out.upper = 1.0 - mu * gap * gap;
  out.floor = 1.0 - 2.0 * std::exp(-eta * eta / 2.0);
  const Index n = model.ambient_dim();
  std::vector<char> pass(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t i) {
    Rng rng = make_rng(seed, 0x636fu, static_cast<std::uint32_t>(i));
    const Matrix basis = random_member_basis(model, order, rng);
    const Matrix a = gaussian_matrix(m, n, rng);
    const Matrix ab = a * basis;
    const Matrix s = Matrix::Identity(basis.cols(), basis.cols()) - mu * ab.transpose() * ab;
    pass[i] = symmetric_spectral_norm(s) <= out.upper + 1e-12;
  });
  out.passed = std::count(pass.begin(), pass.end(), 1);
  out.pass_rate = static_cast<double>(out.passed) / static_cast<double>(trials);
  return out;
}

/// Spectral norm of P_V (I - mu A*A) P_V for a given basis (used by tests and the CLI).
inline double projected_operator_norm(const Matrix& a, const Matrix& basis, double mu) {
  if (basis.cols() == 0) return 0.0;
  const Matrix ab = a * basis;
  return symmetric_spectral_norm(Matrix::Identity(basis.cols(), basis.cols()) - mu * ab.transpose() * ab);
}

}  // namespace gcosamp
