#pragma once

#include "gcosamp/common.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <variant>

namespace gcosamp {

// ---------------------------------------------------------------------------
// Fourier-domain sampling masks
// ---------------------------------------------------------------------------

enum class MaskPattern { full, variable_density, radial, custom };

/// Set of selected 2-D DFT indices, stored as sorted linear indices `row * width + col`
/// in unshifted (DC at 0) frequency coordinates.
class SamplingMask {
 public:
  SamplingMask(Index height, Index width, IndexSet selected, MaskPattern pattern)
      : height_(height), width_(width), selected_(std::move(selected)), pattern_(pattern) {
    require_config(height_ > 0 && width_ > 0, "mask dimensions must be positive");
    std::sort(selected_.begin(), selected_.end());
    selected_.erase(std::unique(selected_.begin(), selected_.end()), selected_.end());
    require_config(selected_.empty() || (selected_.front() >= 0 && selected_.back() < height_ * width_),
                   "mask index out of range");
  }

  static SamplingMask full(Index height, Index width) {
    return {height, width, full_range(height * width), MaskPattern::full};
  }

  /// Radially decaying inclusion density (1 - r)^decay with r the normalized distance
  /// from DC. Draws exactly round(fraction * N) distinct frequencies by weighted
  /// sampling without replacement; DC is always kept.
  static SamplingMask variable_density(Index height, Index width, double fraction, double decay,
                                       std::uint64_t seed) {
    require_config(fraction > 0.0 && fraction <= 1.0, "sampling fraction must be in (0, 1]");
    require_config(decay >= 0.0, "decay exponent must be non-negative");
    const Index total = height * width;
    const Index count = std::max<Index>(1, static_cast<Index>(std::llround(fraction * static_cast<double>(total))));
    Rng rng = make_rng(seed, 0x6d61736bu);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector key(total);
    for (Index i = 0; i < height; ++i) {
      for (Index j = 0; j < width; ++j) {
        const double fu = static_cast<double>(centered(i, height)) / (0.5 * static_cast<double>(height));
        const double fv = static_cast<double>(centered(j, width)) / (0.5 * static_cast<double>(width));
        const double r = std::min(1.0, std::sqrt(fu * fu + fv * fv) / std::numbers::sqrt2);
        const double weight = std::max(std::pow(1.0 - r, decay), 1e-6);
        double u = unif(rng);
        while (u <= 0.0) u = unif(rng);
        key[i * width + j] = std::log(u) / weight;
      }
    }
    key[0] = std::numeric_limits<double>::infinity();
    return {height, width, top_indices(key, count), MaskPattern::variable_density};
  }

  /// `lines` straight lines through DC at equally spaced angles in [0, pi).
  static SamplingMask radial(Index height, Index width, int lines) {
    require_config(lines >= 1, "radial mask needs at least one line");
    std::vector<char> hit(static_cast<std::size_t>(height * width), 0);
    const double radius = std::hypot(static_cast<double>(height), static_cast<double>(width));
    for (int l = 0; l < lines; ++l) {
      const double theta = std::numbers::pi * static_cast<double>(l) / static_cast<double>(lines);
      for (double t = -radius; t <= radius; t += 0.25) {
        const auto u = static_cast<Index>(std::lround(t * std::sin(theta)));
        const auto v = static_cast<Index>(std::lround(t * std::cos(theta)));
        if (u < -height / 2 || u >= height - height / 2 || v < -width / 2 || v >= width - width / 2) continue;
        const Index i = (u + height) % height;
        const Index j = (v + width) % width;
        hit[static_cast<std::size_t>(i * width + j)] = 1;
      }
    }
    IndexSet sel;
    for (Index k = 0; k < height * width; ++k)
      if (hit[static_cast<std::size_t>(k)]) sel.push_back(k);
    return {height, width, std::move(sel), MaskPattern::radial};
  }

  Index height() const { return height_; }
  Index width() const { return width_; }
  const IndexSet& selected() const { return selected_; }
  MaskPattern pattern() const { return pattern_; }
  Index count() const { return static_cast<Index>(selected_.size()); }
  double fraction() const {
    return static_cast<double>(selected_.size()) / static_cast<double>(height_ * width_);
  }

  /// 0/1 bitmap, row-major.
  Matrix bitmap() const {
    Matrix b = Matrix::Zero(height_, width_);
    for (Index k : selected_) b(k / width_, k % width_) = 1.0;
    return b;
  }

 private:
  static Index centered(Index i, Index size) { return i < (size + 1) / 2 ? i : i - size; }

  Index height_;
  Index width_;
  IndexSet selected_;
  MaskPattern pattern_;
};

namespace detail {

/// Unitary 2-D DFT of a real row-major h x w image (forward) or of a complex spectrum
/// (inverse). Row transforms then column transforms.
class Fft2 {
 public:
  using Complex = std::complex<double>;
  using Spectrum = std::vector<Complex>;

  Fft2(Index height, Index width) : h_(height), w_(width) {}

  Spectrum forward(const Vector& image) const {
    Spectrum data(static_cast<std::size_t>(h_ * w_));
    for (Index k = 0; k < h_ * w_; ++k) data[static_cast<std::size_t>(k)] = image[k];
    transform(data, false);
    return data;
  }

  Spectrum inverse(Spectrum data) const {
    transform(data, true);
    return data;
  }

 private:
  void transform(Spectrum& data, bool inverse) const {
    Eigen::FFT<double> fft;
    std::vector<Complex> in, out;
    in.resize(static_cast<std::size_t>(w_));
    for (Index i = 0; i < h_; ++i) {
      for (Index j = 0; j < w_; ++j) in[static_cast<std::size_t>(j)] = data[static_cast<std::size_t>(i * w_ + j)];
      if (inverse) fft.inv(out, in); else fft.fwd(out, in);
      for (Index j = 0; j < w_; ++j) data[static_cast<std::size_t>(i * w_ + j)] = out[static_cast<std::size_t>(j)];
    }
    in.resize(static_cast<std::size_t>(h_));
    for (Index j = 0; j < w_; ++j) {
      for (Index i = 0; i < h_; ++i) in[static_cast<std::size_t>(i)] = data[static_cast<std::size_t>(i * w_ + j)];
      if (inverse) fft.inv(out, in); else fft.fwd(out, in);
      for (Index i = 0; i < h_; ++i) data[static_cast<std::size_t>(i * w_ + j)] = out[static_cast<std::size_t>(i)];
    }
    // Eigen's inverse already divides by the length; rescale both directions to unitary.
    const double n = static_cast<double>(h_ * w_);
    const double scale = inverse ? std::sqrt(n) : 1.0 / std::sqrt(n);
    for (auto& c : data) c *= scale;
  }

  Index h_;
  Index w_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Measurement operators
// ---------------------------------------------------------------------------

enum class OperatorKind { dense_matrix, gaussian_random, subsampled_fourier, identity, composite };

/// Immutable m x n linear map with apply (A x) and adjoint (A* y).
///
/// Subsampled Fourier measurements are real vectors of length 2|mask|: real parts of the
/// selected unitary DFT coefficients followed by their imaginary parts.
class MeasurementOperator {
 public:
  static MeasurementOperator dense(Matrix a) {
    require_config(a.rows() > 0 && a.cols() > 0, "dense operator must be non-empty");
    return MeasurementOperator(OperatorKind::dense_matrix, DenseImpl{std::move(a)});
  }

  /// i.i.d. N(0, 1) entries (no 1/sqrt(m) normalization).
  static MeasurementOperator gaussian(Index m, Index n, std::uint64_t seed) {
    require_config(m > 0 && n > 0, "gaussian operator needs positive dimensions");
    Rng rng = make_rng(seed, 0x41u);
    MeasurementOperator op(OperatorKind::gaussian_random, DenseImpl{gaussian_matrix(m, n, rng)});
    op.seed_ = seed;
    return op;
  }

  static MeasurementOperator subsampled_fourier(SamplingMask mask) {
    require_config(mask.count() > 0, "Fourier mask selects no frequencies");
    return MeasurementOperator(OperatorKind::subsampled_fourier,
                               FourierImpl{std::make_shared<const SamplingMask>(std::move(mask))});
  }

  static MeasurementOperator identity(Index n) {
    require_config(n > 0, "identity dimension must be positive");
    return MeasurementOperator(OperatorKind::identity, IdentityImpl{n});
  }

  /// outer o inner
  static MeasurementOperator composite(const MeasurementOperator& outer, const MeasurementOperator& inner) {
    require_shape(outer.cols() == inner.rows(), "composite: inner rows must equal outer cols");
    return MeasurementOperator(
        OperatorKind::composite,
        CompositeImpl{std::make_shared<const MeasurementOperator>(outer), std::make_shared<const MeasurementOperator>(inner)});
  }

  OperatorKind kind() const { return kind_; }
  Index rows() const {
    return std::visit([](const auto& impl) { return impl.rows(); }, impl_);
  }
  Index cols() const {
    return std::visit([](const auto& impl) { return impl.cols(); }, impl_);
  }
  std::optional<std::uint64_t> seed() const { return seed_; }

  bool is_fourier() const {
    if (kind_ == OperatorKind::subsampled_fourier) return true;
    if (auto* c = std::get_if<CompositeImpl>(&impl_)) return c->outer->is_fourier() || c->inner->is_fourier();
    return false;
  }

  /// Explicit matrix for dense kinds, nullptr otherwise.
  const Matrix* matrix() const {
    if (auto* d = std::get_if<DenseImpl>(&impl_)) return &d->a;
    return nullptr;
  }

  const SamplingMask* mask() const {
    if (auto* f = std::get_if<FourierImpl>(&impl_)) return f->mask.get();
    return nullptr;
  }

  Vector apply(const Vector& x) const {
    require_shape(x.size() == cols(), "apply: expected length " + std::to_string(cols()) + ", got " +
                                          std::to_string(x.size()));
    return std::visit([&](const auto& impl) { return impl.apply(x); }, impl_);
  }

  Vector adjoint(const Vector& y) const {
    require_shape(y.size() == rows(), "adjoint: expected length " + std::to_string(rows()) + ", got " +
                                          std::to_string(y.size()));
    return std::visit([&](const auto& impl) { return impl.adjoint(y); }, impl_);
  }

  /// A * B for an n x k matrix B.
  Matrix apply_columns(const Matrix& b) const {
    require_shape(b.rows() == cols(), "apply_columns: row mismatch");
    if (auto* d = std::get_if<DenseImpl>(&impl_)) return d->a * b;
    Matrix out(rows(), b.cols());
    for (Index j = 0; j < b.cols(); ++j) out.col(j) = apply(b.col(j));
    return out;
  }

  /// Columns of A indexed by `support`.
  Matrix select_columns(const IndexSet& support) const {
    Matrix out(rows(), static_cast<Index>(support.size()));
    if (auto* d = std::get_if<DenseImpl>(&impl_)) {
      for (std::size_t j = 0; j < support.size(); ++j) out.col(static_cast<Index>(j)) = d->a.col(support[j]);
      return out;
    }
    Vector e = Vector::Zero(cols());
    for (std::size_t j = 0; j < support.size(); ++j) {
      e[support[j]] = 1.0;
      out.col(static_cast<Index>(j)) = apply(e);
      e[support[j]] = 0.0;
    }
    return out;
  }

 private:
  struct DenseImpl {
    Matrix a;
    Index rows() const { return a.rows(); }
    Index cols() const { return a.cols(); }
    Vector apply(const Vector& x) const { return a * x; }
    Vector adjoint(const Vector& y) const { return a.transpose() * y; }
  };

  struct FourierImpl {
    std::shared_ptr<const SamplingMask> mask;
    Index rows() const { return 2 * mask->count(); }
    Index cols() const { return mask->height() * mask->width(); }
    Vector apply(const Vector& x) const {
      const detail::Fft2 fft(mask->height(), mask->width());
      const auto spectrum = fft.forward(x);
      const Index count = mask->count();
      Vector y(2 * count);
      for (Index k = 0; k < count; ++k) {
        const auto& c = spectrum[static_cast<std::size_t>(mask->selected()[static_cast<std::size_t>(k)])];
        y[k] = c.real();
        y[count + k] = c.imag();
      }
      return y;
    }
    Vector adjoint(const Vector& y) const {
      const detail::Fft2 fft(mask->height(), mask->width());
      const Index count = mask->count();
      detail::Fft2::Spectrum spectrum(static_cast<std::size_t>(cols()));
      for (Index k = 0; k < count; ++k)
        spectrum[static_cast<std::size_t>(mask->selected()[static_cast<std::size_t>(k)])] = {y[k], y[count + k]};
      const auto image = fft.inverse(std::move(spectrum));
      Vector x(cols());
      for (Index k = 0; k < cols(); ++k) x[k] = image[static_cast<std::size_t>(k)].real();
      return x;
    }
  };

  struct IdentityImpl {
    Index n;
    Index rows() const { return n; }
    Index cols() const { return n; }
    Vector apply(const Vector& x) const { return x; }
    Vector adjoint(const Vector& y) const { return y; }
  };

  struct CompositeImpl {
    std::shared_ptr<const MeasurementOperator> outer;
    std::shared_ptr<const MeasurementOperator> inner;
    Index rows() const { return outer->rows(); }
    Index cols() const { return inner->cols(); }
    Vector apply(const Vector& x) const { return outer->apply(inner->apply(x)); }
    Vector adjoint(const Vector& y) const { return inner->adjoint(outer->adjoint(y)); }
  };

  using Impl = std::variant<DenseImpl, FourierImpl, IdentityImpl, CompositeImpl>;

  MeasurementOperator(OperatorKind kind, Impl impl) : kind_(kind), impl_(std::move(impl)) {}

  OperatorKind kind_;
  Impl impl_;
  std::optional<std::uint64_t> seed_;
};

// ---------------------------------------------------------------------------
// Analysis operators
// ---------------------------------------------------------------------------

/// p x n analysis operator Omega. The finite-difference kind is implicit: rows are
/// non-periodic forward differences, all horizontal ones (row-major) then all vertical.
class AnalysisOperator {
 public:
  struct Edge {
    Index from;
    Index to;  // row value is x[to] - x[from]
  };

  static AnalysisOperator finite_difference(Index h, Index w) {
    require_config(h >= 2 && w >= 2, "finite difference operator needs h >= 2 and w >= 2");
    AnalysisOperator op;
    op.h_ = h;
    op.w_ = w;
    op.rows_ = h * (w - 1) + (h - 1) * w;
    op.cols_ = h * w;
    return op;
  }

  static AnalysisOperator dense(Matrix omega) {
    require_config(omega.rows() > 0 && omega.cols() > 0, "analysis operator must be non-empty");
    AnalysisOperator op;
    op.rows_ = omega.rows();
    op.cols_ = omega.cols();
    op.dense_ = std::move(omega);
    return op;
  }

  bool is_finite_difference() const { return h_ > 0; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index image_height() const { return h_; }
  Index image_width() const { return w_; }
  const Matrix& matrix() const { return dense_; }

  Edge edge(Index row) const {
    const Index horizontal = h_ * (w_ - 1);
    if (row < horizontal) {
      const Index i = row / (w_ - 1), j = row % (w_ - 1);
      return {i * w_ + j, i * w_ + j + 1};
    }
    const Index r = row - horizontal;
    const Index i = r / w_, j = r % w_;
    return {i * w_ + j, (i + 1) * w_ + j};
  }

  Vector apply(const Vector& x) const {
    require_shape(x.size() == cols_, "analysis apply: dimension mismatch");
    if (!is_finite_difference()) return dense_ * x;
    Vector z(rows_);
    for (Index r = 0; r < rows_; ++r) {
      const Edge e = edge(r);
      z[r] = x[e.to] - x[e.from];
    }
    return z;
  }

  Vector adjoint(const Vector& z) const {
    require_shape(z.size() == rows_, "analysis adjoint: dimension mismatch");
    if (!is_finite_difference()) return dense_.transpose() * z;
    Vector x = Vector::Zero(cols_);
    for (Index r = 0; r < rows_; ++r) {
      const Edge e = edge(r);
      x[e.to] += z[r];
      x[e.from] -= z[r];
    }
    return x;
  }

  /// Explicit rows Omega_Lambda.
  Matrix rows_of(const IndexSet& rows) const {
    Matrix out = Matrix::Zero(static_cast<Index>(rows.size()), cols_);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (is_finite_difference()) {
        const Edge e = edge(rows[k]);
        out(static_cast<Index>(k), e.to) = 1.0;
        out(static_cast<Index>(k), e.from) = -1.0;
      } else {
        out.row(static_cast<Index>(k)) = dense_.row(rows[k]);
      }
    }
    return out;
  }

 private:
  AnalysisOperator() = default;

  Index h_ = 0;
  Index w_ = 0;
  Index rows_ = 0;
  Index cols_ = 0;
  Matrix dense_;
};

// ---------------------------------------------------------------------------
// Synthesis dictionaries
// ---------------------------------------------------------------------------

struct LocalDctGeometry {
  Index image_h = 0;
  Index image_w = 0;
  Index window = 0;
  Index overlap = 0;
  Index excluded = 0;

  Index stride() const { return window - overlap; }
  Index windows_down() const { return (image_h - window) / stride() + 1; }
  Index windows_across() const { return (image_w - window) / stride() + 1; }
  Index window_count() const { return windows_down() * windows_across(); }
  Index atoms_per_window() const { return window * window - excluded * excluded; }
};

/// n x d dictionary D with unit-norm atoms.
class SynthesisDictionary {
 public:
  /// Windowed orthonormal 2-D DCT-II atoms, zero outside their window, without the
  /// lowest excluded x excluded frequencies of each window.
  static SynthesisDictionary local_dct(Index image_h, Index image_w, Index window, Index overlap, Index excluded) {
    LocalDctGeometry g{image_h, image_w, window, overlap, excluded};
    require_config(window >= 1 && overlap >= 0 && overlap < window, "local DCT: need 0 <= overlap < window");
    require_config(excluded >= 0 && excluded < window, "local DCT: excluded block must be smaller than window");
    require_config(window <= image_h && window <= image_w, "local DCT: window larger than image");
    require_config((image_h - window) % g.stride() == 0 && (image_w - window) % g.stride() == 0,
                   "local DCT: windows do not tile the image with the given overlap");
    SynthesisDictionary dict;
    dict.geometry_ = g;
    dict.n_ = image_h * image_w;
    dict.d_ = g.window_count() * g.atoms_per_window();
    dict.dct_ = dct_matrix(window);
    for (Index u = 0; u < window; ++u)
      for (Index v = 0; v < window; ++v)
        if (u >= excluded || v >= excluded) dict.freqs_.push_back({u, v});
    return dict;
  }

  /// Columns are normalized to unit Euclidean norm.
  static SynthesisDictionary dense(Matrix d) {
    require_config(d.rows() > 0 && d.cols() > 0, "dictionary must be non-empty");
    for (Index j = 0; j < d.cols(); ++j) {
      const double norm = d.col(j).norm();
      require_config(norm > 0.0, "dictionary atom " + std::to_string(j) + " is zero");
      d.col(j) /= norm;
    }
    SynthesisDictionary dict;
    dict.n_ = d.rows();
    dict.d_ = d.cols();
    dict.dense_ = std::move(d);
    return dict;
  }

  bool is_local_dct() const { return geometry_.window > 0; }
  const LocalDctGeometry& geometry() const { return geometry_; }
  Index rows() const { return n_; }
  Index atoms() const { return d_; }

  /// Window index of atom j (local DCT only).
  Index window_of(Index atom) const { return atom / geometry_.atoms_per_window(); }

  /// D alpha
  Vector apply(const Vector& alpha) const {
    require_shape(alpha.size() == d_, "dictionary apply: dimension mismatch");
    if (!is_local_dct()) return dense_ * alpha;
    Vector x = Vector::Zero(n_);
    const auto& g = geometry_;
    const Index per = g.atoms_per_window();
    Matrix coef(g.window, g.window);
    for (Index wi = 0; wi < g.window_count(); ++wi) {
      coef.setZero();
      bool any = false;
      for (Index f = 0; f < per; ++f) {
        const double a = alpha[wi * per + f];
        if (a != 0.0) {
          coef(freqs_[static_cast<std::size_t>(f)].first, freqs_[static_cast<std::size_t>(f)].second) = a;
          any = true;
        }
      }
      if (!any) continue;
      const Matrix patch = dct_.transpose() * coef * dct_;
      add_patch(x, wi, patch);
    }
    return x;
  }

  /// D* v
  Vector adjoint(const Vector& v) const {
    require_shape(v.size() == n_, "dictionary adjoint: dimension mismatch");
    if (!is_local_dct()) return dense_.transpose() * v;
    const auto& g = geometry_;
    const Index per = g.atoms_per_window();
    Vector alpha(d_);
    for (Index wi = 0; wi < g.window_count(); ++wi) {
      const Matrix coef = dct_ * extract_patch(v, wi) * dct_.transpose();
      for (Index f = 0; f < per; ++f)
        alpha[wi * per + f] = coef(freqs_[static_cast<std::size_t>(f)].first, freqs_[static_cast<std::size_t>(f)].second);
    }
    return alpha;
  }

  Vector atom(Index j) const {
    require_shape(j >= 0 && j < d_, "atom index out of range");
    if (!is_local_dct()) return dense_.col(j);
    const auto& g = geometry_;
    const Index per = g.atoms_per_window();
    const Index wi = j / per;
    const auto [u, v] = freqs_[static_cast<std::size_t>(j % per)];
    Matrix patch = dct_.row(u).transpose() * dct_.row(v);
    Vector x = Vector::Zero(n_);
    add_patch(x, wi, patch);
    return x;
  }

  /// D_T as an explicit n x |T| matrix.
  Matrix atoms_of(const IndexSet& support) const {
    Matrix out(n_, static_cast<Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k) out.col(static_cast<Index>(k)) = atom(support[k]);
    return out;
  }

  /// Pixel indices covered by window wi (local DCT only).
  IndexSet window_pixels(Index wi) const {
    const auto& g = geometry_;
    const Index r0 = (wi / g.windows_across()) * g.stride();
    const Index c0 = (wi % g.windows_across()) * g.stride();
    IndexSet px;
    for (Index i = 0; i < g.window; ++i)
      for (Index j = 0; j < g.window; ++j) px.push_back((r0 + i) * g.image_w + c0 + j);
    return px;
  }

 private:
  static Matrix dct_matrix(Index size) {
    Matrix c(size, size);
    const double n = static_cast<double>(size);
    for (Index u = 0; u < size; ++u) {
      const double s = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (Index x = 0; x < size; ++x)
        c(u, x) = s * std::cos(std::numbers::pi * (2.0 * static_cast<double>(x) + 1.0) * static_cast<double>(u) / (2.0 * n));
    }
    return c;
  }

  Matrix extract_patch(const Vector& v, Index wi) const {
    const auto& g = geometry_;
    const Index r0 = (wi / g.windows_across()) * g.stride();
    const Index c0 = (wi % g.windows_across()) * g.stride();
    Matrix patch(g.window, g.window);
    for (Index i = 0; i < g.window; ++i)
      for (Index j = 0; j < g.window; ++j) patch(i, j) = v[(r0 + i) * g.image_w + c0 + j];
    return patch;
  }

  void add_patch(Vector& x, Index wi, const Matrix& patch) const {
    const auto& g = geometry_;
    const Index r0 = (wi / g.windows_across()) * g.stride();
    const Index c0 = (wi % g.windows_across()) * g.stride();
    for (Index i = 0; i < g.window; ++i)
      for (Index j = 0; j < g.window; ++j) x[(r0 + i) * g.image_w + c0 + j] += patch(i, j);
  }

  LocalDctGeometry geometry_;
  Index n_ = 0;
  Index d_ = 0;
  Matrix dense_;
  Matrix dct_;
  std::vector<std::pair<Index, Index>> freqs_;
};

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// i.i.d. Laplace(0, scale) samples, deterministic per seed.
inline Vector sample_laplace_noise(Index len, double scale, std::uint64_t seed) {
  require_config(len >= 1, "noise length must be positive");
  require_config(scale > 0.0, "Laplace scale must be positive");
  Rng rng = make_rng(seed, 0x4c61u);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  Vector e(len);
  for (Index i = 0; i < len; ++i) {
    double u = unif(rng);
    while (u == -0.5) u = unif(rng);
    e[i] = -scale * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
  }
  return e;
}

/// Rescales e so that ||e'|| / ||Ax|| = ratio.
inline Vector scale_noise_to_ratio(const Vector& e, const Vector& ax, double ratio) {
  const double ne = e.norm();
  const double nax = ax.norm();
  require_config(ne > 0.0, "noise vector has zero norm");
  require_config(nax > 0.0, "measurement vector has zero norm");
  require_config(ratio >= 0.0, "noise ratio must be non-negative");
  return e * (ratio * nax / ne);
}

}  // namespace gcosamp
