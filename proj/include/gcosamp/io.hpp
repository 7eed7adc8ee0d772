#pragma once

#include "gcosamp/common.hpp"
#include "gcosamp/operators.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace gcosamp {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// CSV matrices: header line `rows,cols`, then one comma-separated line per row.
// ---------------------------------------------------------------------------

inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
  out << m.rows() << ',' << m.cols() << '\n';
  char buf[40];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

inline Matrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("matrix csv: missing header");
  Index rows = 0, cols = 0;
  char comma = 0;
  std::istringstream header(line);
  if (!(header >> rows >> comma >> cols) || comma != ',' || rows <= 0 || cols <= 0)
    throw IoError("matrix csv: header must be `rows,cols`");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw IoError("matrix csv: expected " + std::to_string(rows) + " data lines");
    std::istringstream ls(line);
    std::string cell;
    Index j = 0;
    while (std::getline(ls, cell, ',')) {
      if (j >= cols) throw IoError("matrix csv: too many columns on line " + std::to_string(i + 2));
      try {
        m(i, j++) = std::stod(cell);
      } catch (const std::exception&) {
        throw IoError("matrix csv: bad number '" + cell + "' on line " + std::to_string(i + 2));
      }
    }
    if (j != cols) throw IoError("matrix csv: too few columns on line " + std::to_string(i + 2));
  }
  return m;
}

inline void save_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_matrix_csv(out, m);
}

inline Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return read_matrix_csv(in);
}

/// Masks are stored as their 0/1 bitmap matrix.
inline void save_mask_csv(const std::string& path, const SamplingMask& mask) { save_matrix_csv(path, mask.bitmap()); }

inline SamplingMask load_mask_csv(const std::string& path) {
  const Matrix b = load_matrix_csv(path);
  IndexSet sel;
  for (Index i = 0; i < b.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      if (b(i, j) != 0.0) sel.push_back(i * b.cols() + j);
  return {b.rows(), b.cols(), std::move(sel), MaskPattern::custom};
}

/// Vectors are n x 1 matrices.
inline Vector load_vector_csv(const std::string& path) {
  const Matrix m = load_matrix_csv(path);
  if (m.cols() != 1 && m.rows() != 1) throw IoError(path + ": expected a single row or column");
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline void save_vector_csv(const std::string& path, const Vector& v) { save_matrix_csv(path, Matrix(v)); }

// ---------------------------------------------------------------------------
// Binary PGM (P5, maxval 255)
// ---------------------------------------------------------------------------

/// Row-major grayscale image with real-valued pixels.
struct Image {
  Index height = 0;
  Index width = 0;
  Vector pixels;
};

/// Rounds and clamps to [0, 255].
inline std::vector<unsigned char> quantize_8bit(const Vector& pixels) {
  std::vector<unsigned char> out(static_cast<std::size_t>(pixels.size()));
  for (Index i = 0; i < pixels.size(); ++i) {
    const double v = std::isfinite(pixels[i]) ? std::round(pixels[i]) : 0.0;
    out[static_cast<std::size_t>(i)] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

inline void write_pgm(std::ostream& out, const Image& img) {
  require_shape(img.pixels.size() == img.height * img.width, "pgm: pixel count mismatch");
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  const auto bytes = quantize_8bit(img.pixels);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Image read_pgm(std::istream& in) {
  auto next_token = [&]() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(c);
    }
    return tok;
  };
  if (next_token() != "P5") throw IoError("pgm: only binary P5 is supported");
  Image img;
  try {
    img.width = std::stol(next_token());
    img.height = std::stol(next_token());
    if (std::stol(next_token()) != 255) throw IoError("pgm: maxval must be 255");
  } catch (const std::logic_error&) {
    throw IoError("pgm: malformed header");
  }
  if (img.width <= 0 || img.height <= 0) throw IoError("pgm: bad dimensions");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(img.width * img.height));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw IoError("pgm: truncated pixel data");
  img.pixels.resize(img.width * img.height);
  for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels[static_cast<Index>(i)] = bytes[i];
  return img;
}

inline void save_pgm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_pgm(out, img);
}

inline Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return read_pgm(in);
}

/// 10 log10(peak^2 / MSE); +infinity for identical images.
inline double psnr(const Vector& reference, const Vector& test, double peak = 255.0) {
  require_shape(reference.size() == test.size(), "psnr: image size mismatch");
  require_shape(reference.size() > 0, "psnr: empty image");
  const double mse = (reference - test).squaredNorm() / static_cast<double>(reference.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace gcosamp
