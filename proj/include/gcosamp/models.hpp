#pragma once

#include "gcosamp/common.hpp"
#include "gcosamp/least_squares.hpp"
#include "gcosamp/operators.hpp"

#include <memory>
#include <variant>

namespace gcosamp {

// ---------------------------------------------------------------------------
// Union-of-subspaces models
// ---------------------------------------------------------------------------

struct KSparse {
  Index n;
  Index k;
};

/// Disjoint consecutive blocks of size `block`; k counts entries, so k / block blocks.
struct BlockSparse {
  Index n;
  Index k;
  Index block;
};

/// Rank-r n1 x n2 matrices, vectorized row-major: v[i * n2 + j] = X(i, j).
struct LowRank {
  Index n1;
  Index n2;
  Index r;
};

enum class SynthesisSelection { thresholding, omp };

struct SynthesisModel {
  std::shared_ptr<const SynthesisDictionary> dictionary;
  Index k;
  SynthesisSelection selection = SynthesisSelection::thresholding;
};

struct AnalysisModel {
  std::shared_ptr<const AnalysisOperator> omega;
  Index ell;
};

struct CombinedModel {
  std::shared_ptr<const SynthesisDictionary> dictionary;
  Index k;
  std::shared_ptr<const AnalysisOperator> omega;
  Index ell;
};

class UnionModel {
 public:
  using Variant = std::variant<KSparse, BlockSparse, LowRank, SynthesisModel, AnalysisModel, CombinedModel>;

  static UnionModel ksparse(Index n, Index k) {
    require_config(n >= 1 && k >= 1 && k <= n, "ksparse: need 1 <= k <= n");
    return UnionModel(KSparse{n, k});
  }
  static UnionModel blocksparse(Index n, Index k, Index block) {
    require_config(block >= 1 && n % block == 0 && k % block == 0, "blocksparse: block size must divide n and k");
    require_config(k >= block && k <= n, "blocksparse: need block <= k <= n");
    return UnionModel(BlockSparse{n, k, block});
  }
  static UnionModel lowrank(Index n1, Index n2, Index r) {
    require_config(n1 >= 1 && n2 >= 1 && r >= 1 && r <= std::min(n1, n2), "lowrank: need 1 <= r <= min(n1, n2)");
    return UnionModel(LowRank{n1, n2, r});
  }
  static UnionModel synthesis(std::shared_ptr<const SynthesisDictionary> d, Index k,
                              SynthesisSelection selection = SynthesisSelection::thresholding) {
    require_config(d != nullptr, "synthesis: missing dictionary");
    require_config(k >= 1 && k <= d->atoms(), "synthesis: need 1 <= k <= d");
    return UnionModel(SynthesisModel{std::move(d), k, selection});
  }
  static UnionModel analysis(std::shared_ptr<const AnalysisOperator> omega, Index ell) {
    require_config(omega != nullptr, "analysis: missing operator");
    require_config(ell >= 0 && ell <= omega->rows(), "analysis: need 0 <= ell <= p");
    return UnionModel(AnalysisModel{std::move(omega), ell});
  }
  static UnionModel combined(std::shared_ptr<const SynthesisDictionary> d, Index k,
                             std::shared_ptr<const AnalysisOperator> omega, Index ell) {
    require_config(d != nullptr && omega != nullptr, "combined: missing operator");
    require_config(d->rows() == omega->cols(), "combined: dictionary and analysis operator disagree on n");
    require_config(k >= 1 && k <= d->atoms() && ell >= 0 && ell <= omega->rows(), "combined: invalid k or ell");
    return UnionModel(CombinedModel{std::move(d), k, std::move(omega), ell});
  }

  const Variant& variant() const { return v_; }

  /// Whether select() solves the nearest-subspace problem exactly.
  bool exact() const {
    return std::holds_alternative<KSparse>(v_) || std::holds_alternative<BlockSparse>(v_) ||
           std::holds_alternative<LowRank>(v_);
  }

  Index ambient_dim() const {
    return std::visit(
        [](const auto& m) -> Index {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, KSparse> || std::is_same_v<T, BlockSparse>) return m.n;
          else if constexpr (std::is_same_v<T, LowRank>) return m.n1 * m.n2;
          else if constexpr (std::is_same_v<T, SynthesisModel>) return m.dictionary->rows();
          else if constexpr (std::is_same_v<T, AnalysisModel>) return m.omega->cols();
          else return m.dictionary->rows();
        },
        v_);
  }

  std::string name() const {
    static const char* names[] = {"ksparse", "blocksparse", "lowrank", "synthesis", "analysis", "combined"};
    return names[v_.index()];
  }

 private:
  explicit UnionModel(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// ---------------------------------------------------------------------------
// Member subspaces
// ---------------------------------------------------------------------------

/// Index set into [0, n) (ksparse, blocksparse) or [0, d) (synthesis atoms).
struct SupportSet {
  IndexSet indices;
};

/// Rows of Omega constrained to zero; the subspace is null(Omega_Lambda).
struct CosupportSet {
  IndexSet indices;
};

/// Orthonormal columns spanning a sum of rank-one matrices (vectorized row-major).
struct FactorBasis {
  Matrix basis;
};

struct SupportCosupportPair {
  IndexSet support;
  IndexSet cosupport;
};

struct Subspace {
  std::variant<SupportSet, CosupportSet, FactorBasis, SupportCosupportPair> rep;
  int order = 1;
};

// ---------------------------------------------------------------------------
// Linear parameterizations of a subspace (R^dim -> R^n)
// ---------------------------------------------------------------------------

/// A linear map B whose range is the subspace. Not necessarily orthonormal
/// (synthesis atoms, stacked bases of combined models).
class SubspaceBasis {
 public:
  struct Coordinates {
    IndexSet indices;
  };
  struct Columns {
    Matrix columns;
    bool orthonormal = true;
  };
  /// Piecewise-constant functions on the connected components of a pixel graph,
  /// one normalized indicator per component.
  struct Components {
    std::vector<Index> label;  // per ambient entry
    std::vector<double> scale;  // 1 / sqrt(component size)
  };
  struct Stacked {
    std::vector<SubspaceBasis> parts;
  };

  SubspaceBasis(Index ambient, Coordinates c) : ambient_(ambient), rep_(std::move(c)) {}
  SubspaceBasis(Index ambient, Columns c) : ambient_(ambient), rep_(std::move(c)) {}
  SubspaceBasis(Index ambient, Components c) : ambient_(ambient), rep_(std::move(c)) {}
  SubspaceBasis(Index ambient, Stacked c) : ambient_(ambient), rep_(std::move(c)) {}

  Index ambient() const { return ambient_; }

  Index dim() const {
    return std::visit(
        [](const auto& r) -> Index {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Coordinates>) return static_cast<Index>(r.indices.size());
          else if constexpr (std::is_same_v<T, Columns>) return r.columns.cols();
          else if constexpr (std::is_same_v<T, Components>) return static_cast<Index>(r.scale.size());
          else {
            Index d = 0;
            for (const auto& p : r.parts) d += p.dim();
            return d;
          }
        },
        rep_);
  }

  /// B c
  Vector expand(const Vector& c) const {
    require_shape(c.size() == dim(), "basis expand: dimension mismatch");
    return std::visit(
        [&](const auto& r) -> Vector {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Coordinates>) {
            Vector v = Vector::Zero(ambient_);
            for (std::size_t j = 0; j < r.indices.size(); ++j) v[r.indices[j]] = c[static_cast<Index>(j)];
            return v;
          } else if constexpr (std::is_same_v<T, Columns>) {
            return r.columns * c;
          } else if constexpr (std::is_same_v<T, Components>) {
            Vector v(ambient_);
            for (Index i = 0; i < ambient_; ++i) {
              const Index l = r.label[static_cast<std::size_t>(i)];
              v[i] = c[l] * r.scale[static_cast<std::size_t>(l)];
            }
            return v;
          } else {
            Vector v = Vector::Zero(ambient_);
            Index offset = 0;
            for (const auto& p : r.parts) {
              v += p.expand(c.segment(offset, p.dim()));
              offset += p.dim();
            }
            return v;
          }
        },
        rep_);
  }

  /// B^T v
  Vector reduce(const Vector& v) const {
    require_shape(v.size() == ambient_, "basis reduce: dimension mismatch");
    return std::visit(
        [&](const auto& r) -> Vector {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Coordinates>) {
            Vector c(static_cast<Index>(r.indices.size()));
            for (std::size_t j = 0; j < r.indices.size(); ++j) c[static_cast<Index>(j)] = v[r.indices[j]];
            return c;
          } else if constexpr (std::is_same_v<T, Columns>) {
            return r.columns.transpose() * v;
          } else if constexpr (std::is_same_v<T, Components>) {
            Vector c = Vector::Zero(static_cast<Index>(r.scale.size()));
            for (Index i = 0; i < ambient_; ++i) c[r.label[static_cast<std::size_t>(i)]] += v[i];
            for (Index l = 0; l < c.size(); ++l) c[l] *= r.scale[static_cast<std::size_t>(l)];
            return c;
          } else {
            Vector c(dim());
            Index offset = 0;
            for (const auto& p : r.parts) {
              c.segment(offset, p.dim()) = p.reduce(v);
              offset += p.dim();
            }
            return c;
          }
        },
        rep_);
  }

  /// B as an explicit n x dim matrix.
  Matrix matrix() const {
    if (auto* c = std::get_if<Columns>(&rep_)) return c->columns;
    Matrix out(ambient_, dim());
    Vector e = Vector::Zero(dim());
    for (Index j = 0; j < dim(); ++j) {
      e[j] = 1.0;
      out.col(j) = expand(e);
      e[j] = 0.0;
    }
    return out;
  }

  /// A B, exploiting coordinate bases (column gathers) where possible.
  Matrix image(const MeasurementOperator& a) const {
    require_shape(a.cols() == ambient_, "basis image: operator column mismatch");
    return std::visit(
        [&](const auto& r) -> Matrix {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Coordinates>) return a.select_columns(r.indices);
          else if constexpr (std::is_same_v<T, Columns>) return a.apply_columns(r.columns);
          else if constexpr (std::is_same_v<T, Components>) return a.apply_columns(matrix());
          else {
            Matrix out(a.rows(), dim());
            Index offset = 0;
            for (const auto& p : r.parts) {
              out.middleCols(offset, p.dim()) = p.image(a);
              offset += p.dim();
            }
            return out;
          }
        },
        rep_);
  }

  bool is_stacked() const { return std::holds_alternative<Stacked>(rep_); }
  bool orthonormal() const {
    if (const auto* c = std::get_if<Columns>(&rep_)) return c->orthonormal;
    return !is_stacked();
  }
  const Stacked* stacked() const { return std::get_if<Stacked>(&rep_); }

 private:
  Index ambient_;
  std::variant<Coordinates, Columns, Components, Stacked> rep_;
};

namespace detail {

/// Connected components of the pixel graph whose edges are the finite-difference
/// rows in `cosupport`. Labels are assigned in order of first pixel.
inline SubspaceBasis::Components fd_components(const AnalysisOperator& omega, const IndexSet& cosupport) {
  const Index n = omega.cols();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (Index row : cosupport) {
    const auto e = omega.edge(row);
    const Index a = find(e.from), b = find(e.to);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  SubspaceBasis::Components out;
  out.label.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> root_label(static_cast<std::size_t>(n), -1);
  std::vector<Index> sizes;
  for (Index i = 0; i < n; ++i) {
    const Index root = find(i);
    Index& l = root_label[static_cast<std::size_t>(root)];
    if (l < 0) {
      l = static_cast<Index>(sizes.size());
      sizes.push_back(0);
    }
    out.label[static_cast<std::size_t>(i)] = l;
    ++sizes[static_cast<std::size_t>(l)];
  }
  out.scale.resize(sizes.size());
  for (std::size_t l = 0; l < sizes.size(); ++l) out.scale[l] = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
  return out;
}

/// Orthonormal basis of null(Omega_Lambda) for an explicit operator.
inline Matrix dense_null_space(const AnalysisOperator& omega, const IndexSet& cosupport) {
  const Index n = omega.cols();
  if (cosupport.empty()) return Matrix::Identity(n, n);
  const Matrix rows = omega.rows_of(cosupport);
  Eigen::JacobiSVD<Matrix> svd(rows, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = static_cast<double>(std::max(rows.rows(), rows.cols())) * 1e-15 * (sv.size() ? sv[0] : 0.0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

/// Modified Gram-Schmidt with one re-orthogonalization pass; columns whose remaining
/// norm falls below drop_tol times their original norm are discarded.
inline Matrix orthonormalize(const Matrix& columns, double drop_tol = 1e-12) {
  std::vector<Vector> kept;
  for (Index j = 0; j < columns.cols(); ++j) {
    Vector v = columns.col(j);
    const double original = v.norm();
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : kept) v -= q.dot(v) * q;
    const double remaining = v.norm();
    if (remaining <= drop_tol * original) continue;
    kept.push_back(v / remaining);
  }
  Matrix out(columns.rows(), static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Index>(j)) = kept[j];
  return out;
}

/// Top `count` singular triplets of the n1 x n2 matricization of v as vec(u v^T) columns.
inline Matrix dominant_rank_one_basis(const Vector& v, Index n1, Index n2, Index count) {
  const Matrix x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(v.data(), n1, n2);
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  count = std::min<Index>(count, svd.singularValues().size());
  Matrix basis(n1 * n2, count);
  for (Index t = 0; t < count; ++t) {
    const Vector u = svd.matrixU().col(t);
    const Vector w = svd.matrixV().col(t);
    for (Index i = 0; i < n1; ++i)
      for (Index j = 0; j < n2; ++j) basis(i * n2 + j, t) = u[i] * w[j];
  }
  return basis;
}

inline Vector block_energies(const Vector& v, Index block) {
  const Index blocks = v.size() / block;
  Vector e(blocks);
  for (Index b = 0; b < blocks; ++b) e[b] = v.segment(b * block, block).squaredNorm();
  return e;
}

/// Greedy OMP support of size `count` for v in dictionary D.
inline IndexSet omp_support(const SynthesisDictionary& d, const Vector& v, Index count) {
  IndexSet support;
  Vector residual = v;
  for (Index it = 0; it < count; ++it) {
    Vector corr = d.adjoint(residual).cwiseAbs();
    for (Index j : support) corr[j] = -1.0;
    const IndexSet best = top_indices(corr, 1);
    support = set_union(support, best);
    const Matrix dt = d.atoms_of(support);
    const Vector coef = dt.colPivHouseholderQr().solve(v);
    residual = v - dt * coef;
    if (residual.norm() <= 1e-14 * v.norm()) break;
  }
  return support;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model operations
// ---------------------------------------------------------------------------

/// The zero-dimensional member (initial state of the greedy iterations).
inline Subspace empty_subspace(const UnionModel& model) {
  return std::visit(
      [](const auto& m) -> Subspace {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LowRank>) return {FactorBasis{Matrix(m.n1 * m.n2, 0)}, 0};
        else if constexpr (std::is_same_v<T, AnalysisModel>) return {CosupportSet{full_range(m.omega->rows())}, 0};
        else if constexpr (std::is_same_v<T, CombinedModel>)
          return {SupportCosupportPair{{}, full_range(m.omega->rows())}, 0};
        else return {SupportSet{}, 0};
      },
      model.variant());
}

/// Nearest member of S^order to v. Exact for ksparse, blocksparse and lowrank;
/// thresholding surrogates for synthesis (B k largest |D* v|), analysis (ell smallest
/// |Omega v| at every order) and combined. Ties go to the lowest index; the zero
/// vector selects the zero-dimensional subspace.
inline Subspace select_subspace(const UnionModel& model, const Vector& v, int order) {
  if (order != 1 && order != 2) throw ConfigError("selection order must be 1 or 2");
  require_shape(v.size() == model.ambient_dim(), "select_subspace: dimension mismatch");
  if (v.isZero(0.0)) {
    Subspace s = empty_subspace(model);
    s.order = order;
    return s;
  }
  const Index b = order;
  return std::visit(
      [&](const auto& m) -> Subspace {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KSparse>) {
          return {SupportSet{top_indices(v.cwiseAbs(), b * m.k)}, order};
        } else if constexpr (std::is_same_v<T, BlockSparse>) {
          const IndexSet blocks = top_indices(detail::block_energies(v, m.block), b * m.k / m.block);
          IndexSet idx;
          for (Index blk : blocks)
            for (Index j = 0; j < m.block; ++j) idx.push_back(blk * m.block + j);
          return {SupportSet{std::move(idx)}, order};
        } else if constexpr (std::is_same_v<T, LowRank>) {
          return {FactorBasis{detail::dominant_rank_one_basis(v, m.n1, m.n2, b * m.r)}, order};
        } else if constexpr (std::is_same_v<T, SynthesisModel>) {
          if (m.selection == SynthesisSelection::omp)
            return {SupportSet{detail::omp_support(*m.dictionary, v, b * m.k)}, order};
          return {SupportSet{top_indices(m.dictionary->adjoint(v).cwiseAbs(), b * m.k)}, order};
        } else if constexpr (std::is_same_v<T, AnalysisModel>) {
          return {CosupportSet{bottom_indices(m.omega->apply(v).cwiseAbs(), m.ell)}, order};
        } else {
          return {SupportCosupportPair{top_indices(m.dictionary->adjoint(v).cwiseAbs(), b * m.k),
                                       bottom_indices(m.omega->apply(v).cwiseAbs(), m.ell)},
                  order};
        }
      },
      model.variant());
}

/// Linear parameterization of `sub` used by the constrained least-squares solver.
inline SubspaceBasis basis_map(const Subspace& sub, const UnionModel& model) {
  const Index n = model.ambient_dim();
  return std::visit(
      [&](const auto& m) -> SubspaceBasis {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KSparse> || std::is_same_v<T, BlockSparse>) {
          const auto* s = std::get_if<SupportSet>(&sub.rep);
          if (!s) throw ConfigError("subspace representation does not match model " + model.name());
          return SubspaceBasis(n, SubspaceBasis::Coordinates{s->indices});
        } else if constexpr (std::is_same_v<T, LowRank>) {
          const auto* f = std::get_if<FactorBasis>(&sub.rep);
          if (!f) throw ConfigError("subspace representation does not match model " + model.name());
          return SubspaceBasis(n, SubspaceBasis::Columns{f->basis});
        } else if constexpr (std::is_same_v<T, SynthesisModel>) {
          const auto* s = std::get_if<SupportSet>(&sub.rep);
          if (!s) throw ConfigError("subspace representation does not match model " + model.name());
          return SubspaceBasis(n, SubspaceBasis::Columns{m.dictionary->atoms_of(s->indices), false});
        } else if constexpr (std::is_same_v<T, AnalysisModel>) {
          const auto* c = std::get_if<CosupportSet>(&sub.rep);
          if (!c) throw ConfigError("subspace representation does not match model " + model.name());
          if (m.omega->is_finite_difference())
            return SubspaceBasis(n, detail::fd_components(*m.omega, c->indices));
          return SubspaceBasis(n, SubspaceBasis::Columns{detail::dense_null_space(*m.omega, c->indices)});
        } else {
          const auto* p = std::get_if<SupportCosupportPair>(&sub.rep);
          if (!p) throw ConfigError("subspace representation does not match model " + model.name());
          std::vector<SubspaceBasis> parts;
          parts.emplace_back(n, SubspaceBasis::Columns{m.dictionary->atoms_of(p->support), false});
          if (m.omega->is_finite_difference())
            parts.emplace_back(n, detail::fd_components(*m.omega, p->cosupport));
          else
            parts.emplace_back(n, SubspaceBasis::Columns{detail::dense_null_space(*m.omega, p->cosupport)});
          return SubspaceBasis(n, SubspaceBasis::Stacked{std::move(parts)});
        }
      },
      model.variant());
}

/// Orthogonal projection onto the range of a basis map.
inline Vector project_onto(const SubspaceBasis& basis, const Vector& v) {
  require_shape(v.size() == basis.ambient(), "project: dimension mismatch");
  if (basis.dim() == 0) return Vector::Zero(v.size());
  if (basis.orthonormal()) return basis.expand(basis.reduce(v));
  if (basis.dim() <= 2048) {
    const Matrix cols = basis.matrix();
    return cols * cols.colPivHouseholderQr().solve(v);
  }
  // Large stacked maps: least squares over the concatenated coefficients, then one
  // refinement sweep on the remainder.
  auto apply = [&](const Vector& c) -> Vector { return basis.expand(c); };
  auto adjoint = [&](const Vector& r) -> Vector { return basis.reduce(r); };
  const Vector p = basis.expand(cgls(apply, adjoint, v, basis.dim(), 5000, 1e-15).coefficients);
  return p + basis.expand(cgls(apply, adjoint, Vector(v - p), basis.dim(), 5000, 1e-15).coefficients);
}

/// P_V v. Synthesis supports project by least squares onto the selected atoms; analysis
/// cosupports apply Q_Lambda = I - pinv(Omega_Lambda) Omega_Lambda.
inline Vector project(const Subspace& sub, const Vector& v, const UnionModel& model) {
  require_shape(v.size() == model.ambient_dim(), "project: dimension mismatch");
  if (const auto* m = std::get_if<SynthesisModel>(&model.variant())) {
    const auto* s = std::get_if<SupportSet>(&sub.rep);
    if (!s) throw ConfigError("subspace representation does not match model synthesis");
    if (s->indices.empty()) return Vector::Zero(v.size());
    const Matrix dt = m->dictionary->atoms_of(s->indices);
    return dt * dt.colPivHouseholderQr().solve(v);
  }
  return project_onto(basis_map(sub, model), v);
}

/// V_a + V_b: union of supports, intersection of cosupports, re-orthonormalized factor
/// span (drop tolerance 1e-12); pairs combine component-wise.
inline Subspace sum_subspaces(const Subspace& a, const Subspace& b, const UnionModel& model) {
  if (a.rep.index() != b.rep.index()) throw ConfigError("sum_subspaces: subspace representations differ");
  const int order = a.order + b.order;
  return std::visit(
      [&](const auto& ra) -> Subspace {
        using T = std::decay_t<decltype(ra)>;
        const auto& rb = std::get<T>(b.rep);
        if constexpr (std::is_same_v<T, SupportSet>) {
          return {SupportSet{set_union(ra.indices, rb.indices)}, order};
        } else if constexpr (std::is_same_v<T, CosupportSet>) {
          return {CosupportSet{set_intersection(ra.indices, rb.indices)}, order};
        } else if constexpr (std::is_same_v<T, FactorBasis>) {
          require_shape(ra.basis.rows() == model.ambient_dim() && rb.basis.rows() == model.ambient_dim(),
                        "sum_subspaces: factor dimension mismatch");
          Matrix both(ra.basis.rows(), ra.basis.cols() + rb.basis.cols());
          both << ra.basis, rb.basis;
          return {FactorBasis{detail::orthonormalize(both)}, order};
        } else {
          return {SupportCosupportPair{set_union(ra.support, rb.support), set_intersection(ra.cosupport, rb.cosupport)},
                  order};
        }
      },
      a.rep);
}

/// Orthonormal basis of V as ambient-space columns.
inline Matrix subspace_basis(const Subspace& sub, const UnionModel& model) {
  const SubspaceBasis map = basis_map(sub, model);
  if (map.orthonormal()) return map.matrix();
  return detail::orthonormalize(map.matrix());
}

/// Subspace dimension (rank of the basis map).
inline Index subspace_dim(const Subspace& sub, const UnionModel& model) {
  if (const auto* s = std::get_if<SupportSet>(&sub.rep); s && model.exact()) return static_cast<Index>(s->indices.size());
  return subspace_basis(sub, model).cols();
}

/// Residual ||v - P_V v|| of the selected subspace.
inline double selection_residual(const UnionModel& model, const Vector& v, int order) {
  return (v - project(select_subspace(model, v, order), v, model)).norm();
}

}  // namespace gcosamp
