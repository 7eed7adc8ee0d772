#pragma once

#include "gcosamp/config.hpp"
#include "gcosamp/engine.hpp"
#include "gcosamp/io.hpp"
#include "gcosamp/models.hpp"
#include "gcosamp/operators.hpp"
#include "gcosamp/sacosamp.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

namespace gcosamp {

// ---------------------------------------------------------------------------
// Model descriptors (the [model] config section)
// ---------------------------------------------------------------------------

/// Plain-data description of a UnionModel that round-trips through config text.
struct ModelSpec {
  std::string type = "ksparse";  // ksparse | blocksparse | lowrank | synthesis | analysis | combined
  long n = 0;
  long k = 0;
  long block = 1;
  long n1 = 0, n2 = 0, r = 0;
  std::string selection = "thresholding";
  // synthesis dictionary: "localdct" or a CSV path
  std::string dictionary = "localdct";
  long image_h = 0, image_w = 0, window = 0, overlap = 0, excluded = 0;
  // analysis operator: "fd" or a CSV path
  std::string analysis = "fd";
  long ell = 0;

  static ModelSpec from_config(const Config& cfg, const std::string& section = "model") {
    cfg.check_keys(section, {"type", "n", "k", "block", "n1", "n2", "r", "selection", "dictionary", "image_h",
                             "image_w", "window", "overlap", "excluded", "analysis", "ell"});
    ModelSpec s;
    s.type = cfg.get_string(section, "type");
    s.n = cfg.get_int(section, "n", 0);
    s.k = cfg.get_int(section, "k", 0);
    s.block = cfg.get_int(section, "block", 1);
    s.n1 = cfg.get_int(section, "n1", 0);
    s.n2 = cfg.get_int(section, "n2", 0);
    s.r = cfg.get_int(section, "r", 0);
    s.selection = cfg.get_string(section, "selection", "thresholding");
    s.dictionary = cfg.get_string(section, "dictionary", "localdct");
    s.image_h = cfg.get_int(section, "image_h", 0);
    s.image_w = cfg.get_int(section, "image_w", 0);
    s.window = cfg.get_int(section, "window", 0);
    s.overlap = cfg.get_int(section, "overlap", 0);
    s.excluded = cfg.get_int(section, "excluded", 0);
    s.analysis = cfg.get_string(section, "analysis", "fd");
    s.ell = cfg.get_int(section, "ell", 0);
    return s;
  }

  /// Writes only the keys meaningful for `type`.
  void to_config(Config& cfg, const std::string& section = "model") const {
    cfg.set(section, "type", type);
    auto put = [&](const char* key, long v) { cfg.set(section, key, std::to_string(v)); };
    if (type == "ksparse" || type == "blocksparse") {
      put("n", n);
      put("k", k);
      if (type == "blocksparse") put("block", block);
    } else if (type == "lowrank") {
      put("n1", n1);
      put("n2", n2);
      put("r", r);
    }
    const bool synth = type == "synthesis" || type == "combined";
    const bool anal = type == "analysis" || type == "combined";
    if (synth) {
      put("k", k);
      cfg.set(section, "selection", selection);
      cfg.set(section, "dictionary", dictionary);
    }
    if (synth || anal) {
      put("image_h", image_h);
      put("image_w", image_w);
    }
    if (synth && dictionary == "localdct") {
      put("window", window);
      put("overlap", overlap);
      put("excluded", excluded);
    }
    if (anal) {
      cfg.set(section, "analysis", analysis);
      put("ell", ell);
    }
  }

  std::shared_ptr<const SynthesisDictionary> build_dictionary() const {
    if (dictionary == "localdct")
      return std::make_shared<const SynthesisDictionary>(
          SynthesisDictionary::local_dct(image_h, image_w, window, overlap, excluded));
    return std::make_shared<const SynthesisDictionary>(SynthesisDictionary::dense(load_matrix_csv(dictionary)));
  }

  std::shared_ptr<const AnalysisOperator> build_analysis() const {
    if (analysis == "fd") return std::make_shared<const AnalysisOperator>(AnalysisOperator::finite_difference(image_h, image_w));
    return std::make_shared<const AnalysisOperator>(AnalysisOperator::dense(load_matrix_csv(analysis)));
  }

  UnionModel build() const {
    if (type == "ksparse") return UnionModel::ksparse(n, k);
    if (type == "blocksparse") return UnionModel::blocksparse(n, k, block);
    if (type == "lowrank") return UnionModel::lowrank(n1, n2, r);
    if (selection != "thresholding" && selection != "omp") throw ConfigError("selection must be thresholding or omp");
    const auto sel = selection == "omp" ? SynthesisSelection::omp : SynthesisSelection::thresholding;
    if (type == "synthesis") return UnionModel::synthesis(build_dictionary(), k, sel);
    if (type == "analysis") return UnionModel::analysis(build_analysis(), ell);
    if (type == "combined") return UnionModel::combined(build_dictionary(), k, build_analysis(), ell);
    throw ConfigError("unknown model type '" + type + "'");
  }
};

inline RecoverySettings settings_from_config(const Config& cfg, RecoverySettings s = {}) {
  cfg.check_keys("settings", {"max_iterations", "residual_relative_improvement_floor", "absolute_residual_floor",
                              "ls_max_iterations", "ls_tolerance"});
  s.max_iterations = static_cast<int>(cfg.get_int("settings", "max_iterations", s.max_iterations));
  s.residual_relative_improvement_floor =
      cfg.get_double("settings", "residual_relative_improvement_floor", s.residual_relative_improvement_floor);
  s.absolute_residual_floor = cfg.get_double("settings", "absolute_residual_floor", s.absolute_residual_floor);
  s.ls_max_iterations = static_cast<int>(cfg.get_int("settings", "ls_max_iterations", s.ls_max_iterations));
  s.ls_tolerance = cfg.get_double("settings", "ls_tolerance", s.ls_tolerance);
  s.validate();
  return s;
}

/// Random member of the model's union U^1 with standard-normal coefficients.
inline Vector random_model_signal(const UnionModel& model, Rng& rng) {
  const Index n = model.ambient_dim();
  return std::visit(
      [&](const auto& m) -> Vector {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KSparse>) {
          Vector x = Vector::Zero(n);
          for (Index i : random_subset(m.n, m.k, rng)) x[i] = gaussian_vector(1, rng)[0];
          return x;
        } else if constexpr (std::is_same_v<T, BlockSparse>) {
          Vector x = Vector::Zero(n);
          for (Index b : random_subset(m.n / m.block, m.k / m.block, rng))
            x.segment(b * m.block, m.block) = gaussian_vector(m.block, rng);
          return x;
        } else if constexpr (std::is_same_v<T, LowRank>) {
          const Matrix l = gaussian_matrix(m.n1, m.r, rng);
          const Matrix rt = gaussian_matrix(m.r, m.n2, rng);
          const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x = l * rt;
          return Eigen::Map<const Vector>(x.data(), n);
        } else if constexpr (std::is_same_v<T, SynthesisModel>) {
          Vector alpha = Vector::Zero(m.dictionary->atoms());
          for (Index j : random_subset(m.dictionary->atoms(), m.k, rng)) alpha[j] = gaussian_vector(1, rng)[0];
          return m.dictionary->apply(alpha);
        } else {
          throw ConfigError("random signals are only generated for ksparse, blocksparse, lowrank and synthesis models");
        }
      },
      model.variant());
}

// ---------------------------------------------------------------------------
// Single recovery from a config file
// ---------------------------------------------------------------------------

struct RecoverProblem {
  MeasurementOperator a;
  Vector y;
  std::optional<Vector> truth;
};

/// [problem] operator = gaussian | identity | csv; m, n, seed; matrix (csv path);
/// measurements (csv path) or signal = random with noise_ratio; truth (csv path).
inline RecoverProblem problem_from_config(const Config& cfg, const UnionModel& model) {
  cfg.check_keys("problem", {"operator", "m", "n", "seed", "matrix", "measurements", "truth", "signal", "noise_ratio"});
  const std::string kind = cfg.get_string("problem", "operator", "gaussian");
  const auto seed = static_cast<std::uint64_t>(cfg.get_int("problem", "seed", 0));
  const Index n = cfg.get_int("problem", "n", model.ambient_dim());
  require_config(n == model.ambient_dim(), "[problem] n disagrees with the model dimension");
  std::optional<MeasurementOperator> a;
  if (kind == "gaussian") a = MeasurementOperator::gaussian(cfg.get_int("problem", "m"), n, seed);
  else if (kind == "identity") a = MeasurementOperator::identity(n);
  else if (kind == "csv") a = MeasurementOperator::dense(load_matrix_csv(cfg.get_string("problem", "matrix")));
  else throw ConfigError("[problem] operator must be gaussian, identity or csv");
  require_config(a->cols() == n, "[problem] operator column count disagrees with the model dimension");

  RecoverProblem p{*a, Vector(), std::nullopt};
  if (cfg.has("problem", "truth")) p.truth = load_vector_csv(cfg.get_string("problem", "truth"));
  if (cfg.has("problem", "measurements")) {
    p.y = load_vector_csv(cfg.get_string("problem", "measurements"));
    require_config(p.y.size() == p.a.rows(), "[problem] measurement length disagrees with the operator");
    return p;
  }
  if (!p.truth) {
    require_config(cfg.get_string("problem", "signal", "random") == "random", "[problem] signal must be random");
    Rng rng = make_rng(seed, 0x7369u);
    p.truth = random_model_signal(model, rng);
  }
  const Vector ax = p.a.apply(*p.truth);
  p.y = ax;
  const double ratio = cfg.get_double("problem", "noise_ratio", 0.0);
  if (ratio > 0.0) p.y += scale_noise_to_ratio(sample_laplace_noise(ax.size(), 1.0, seed + 1), ax, ratio);
  return p;
}

// ---------------------------------------------------------------------------
// Vanishing-noise experiment
// ---------------------------------------------------------------------------

struct VanishingNoiseConfig {
  long n = 2000;
  long k = 5;
  std::vector<long> m_grid = log_spaced_grid(50, 1900, 24);
  long trials = 30;
  double noise_ratio = 0.01;
  std::string noise = "laplace";
  std::uint64_t seed = 20240601;
  double slope_fit_floor = 0.0;  // 0: use 8 k log n
  RecoverySettings settings{};

  static std::vector<long> log_spaced_grid(long lo, long hi, int points) {
    std::vector<long> grid;
    for (int i = 0; i < points; ++i) {
      const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
      const long v = std::lround(std::exp(std::log(static_cast<double>(lo)) * (1 - t) + std::log(static_cast<double>(hi)) * t));
      if (grid.empty() || v != grid.back()) grid.push_back(v);
    }
    return grid;
  }

  double fit_floor() const {
    return slope_fit_floor > 0.0 ? slope_fit_floor : 8.0 * static_cast<double>(k) * std::log(static_cast<double>(n));
  }

  void validate() const {
    require_config(n >= 1 && k >= 1 && k <= n, "vanishing-noise: need 1 <= k <= n");
    require_config(!m_grid.empty(), "vanishing-noise: empty m grid");
    for (long m : m_grid) require_config(m >= 1 && m < n, "vanishing-noise: every m must satisfy 1 <= m < n");
    require_config(trials >= 3, "vanishing-noise: need at least 3 trials");
    require_config(noise_ratio >= 0.0, "vanishing-noise: noise ratio must be non-negative");
    require_config(noise == "laplace", "vanishing-noise: only laplace noise is supported");
    settings.validate();
  }

  static VanishingNoiseConfig from_config(const Config& cfg) {
    cfg.check_keys("experiment", {"kind", "n", "k", "m_grid", "m_min", "m_max", "m_points", "trials", "noise_ratio",
                                  "noise", "seed", "slope_fit_floor"});
    VanishingNoiseConfig c;
    c.n = cfg.get_int("experiment", "n", c.n);
    c.k = cfg.get_int("experiment", "k", c.k);
    if (cfg.has("experiment", "m_grid")) c.m_grid = cfg.get_int_list("experiment", "m_grid");
    else if (cfg.has("experiment", "m_min") || cfg.has("experiment", "m_max") || cfg.has("experiment", "m_points"))
      c.m_grid = log_spaced_grid(cfg.get_int("experiment", "m_min", 50), cfg.get_int("experiment", "m_max", 1900),
                                 static_cast<int>(cfg.get_int("experiment", "m_points", 24)));
    c.trials = cfg.get_int("experiment", "trials", c.trials);
    c.noise_ratio = cfg.get_double("experiment", "noise_ratio", c.noise_ratio);
    c.noise = cfg.get_string("experiment", "noise", c.noise);
    c.seed = static_cast<std::uint64_t>(cfg.get_int("experiment", "seed", static_cast<long>(c.seed)));
    c.slope_fit_floor = cfg.get_double("experiment", "slope_fit_floor", 0.0);
    c.settings = settings_from_config(cfg, c.settings);
    c.validate();
    return c;
  }
};

struct VanishingNoiseRow {
  long m = 0;
  double median_error = 0.0;
  double mean_error = 0.0;
  double std_error = 0.0;  // sample standard deviation of the errors
  double mean_iterations = 0.0;
  long failures = 0;
  std::vector<double> errors;  // per trial, NaN on failure
};

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double slope_half_width = std::numeric_limits<double>::quiet_NaN();  // 95% confidence
  long points = 0;
};

/// Least-squares line through (x_i, y_i) with a Student-t 95% half-width on the slope.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.points = static_cast<long>(x.size());
  if (x.size() < 2) return f;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      sse += e * e;
    }
    const double se = std::sqrt(sse / (n - 2.0) / sxx);
    const boost::math::students_t dist(n - 2.0);
    f.slope_half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  }
  return f;
}

struct VanishingNoiseResult {
  std::vector<VanishingNoiseRow> rows;
  LineFit fit;
  double fit_floor = 0.0;
  long failed_trials = 0;
};

inline double median_of(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double d) { return std::isnan(d); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// One trial: Gaussian A, k-sparse x with N(0,1) nonzeros, Laplace noise at the
/// configured ratio, CoSaMP recovery. Returns (error, iterations).
/// Trial i draws the same signal and noise stream at every m (common random numbers
/// across the grid); only A depends on m.
inline std::pair<double, int> vanishing_noise_trial(const VanishingNoiseConfig& cfg, long m, long trial) {
  Rng signal_rng = make_rng(cfg.seed, 0x7367u, static_cast<std::uint32_t>(trial));
  const auto noise_seed = signal_rng();
  Rng op_rng = make_rng(cfg.seed, 0x766eu, static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(trial));
  const MeasurementOperator a = MeasurementOperator::gaussian(m, cfg.n, op_rng());
  const UnionModel model = UnionModel::ksparse(cfg.n, cfg.k);
  const Vector x = random_model_signal(model, signal_rng);
  const Vector ax = a.apply(x);
  Vector y = ax;
  if (cfg.noise_ratio > 0.0) y += scale_noise_to_ratio(sample_laplace_noise(m, 1.0, noise_seed), ax, cfg.noise_ratio);
  const RecoveryTrace trace = run_gcosamp(a, y, model, cfg.settings);
  return {(trace.estimate - x).norm(), static_cast<int>(trace.rows.size())};
}

inline VanishingNoiseResult run_vanishing_noise(const VanishingNoiseConfig& cfg) {
  cfg.validate();
  VanishingNoiseResult out;
  out.fit_floor = cfg.fit_floor();
  for (long m : cfg.m_grid) {
    VanishingNoiseRow row;
    row.m = m;
    row.errors.assign(static_cast<std::size_t>(cfg.trials), std::numeric_limits<double>::quiet_NaN());
    std::vector<int> iters(static_cast<std::size_t>(cfg.trials), 0);
    parallel_for(static_cast<std::size_t>(cfg.trials), [&](std::size_t t) {
      try {
        const auto [err, it] = vanishing_noise_trial(cfg, m, static_cast<long>(t));
        row.errors[t] = err;
        iters[t] = it;
      } catch (const NumericalAbort&) {
        // recorded as NaN
      }
    });
    std::vector<double> ok;
    double it_sum = 0.0;
    for (std::size_t t = 0; t < row.errors.size(); ++t) {
      if (std::isnan(row.errors[t])) {
        ++row.failures;
        continue;
      }
      ok.push_back(row.errors[t]);
      it_sum += iters[t];
    }
    out.failed_trials += row.failures;
    row.median_error = median_of(ok);
    if (!ok.empty()) {
      row.mean_error = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
      double ss = 0.0;
      for (double e : ok) ss += (e - row.mean_error) * (e - row.mean_error);
      row.std_error = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
      row.mean_iterations = it_sum / static_cast<double>(ok.size());
    } else {
      row.mean_error = row.std_error = row.mean_iterations = std::numeric_limits<double>::quiet_NaN();
    }
    out.rows.push_back(std::move(row));
  }
  std::vector<double> lx, ly;
  for (const auto& r : out.rows) {
    if (static_cast<double>(r.m) < out.fit_floor || !(r.median_error > 0.0)) continue;
    lx.push_back(std::log(static_cast<double>(r.m)));
    ly.push_back(std::log(r.median_error));
  }
  out.fit = fit_line(lx, ly);
  return out;
}

inline void write_vanishing_noise_csv(std::ostream& out, const VanishingNoiseResult& res) {
  out << "m,median_error,mean_error,std_error,mean_iterations,failures\n";
  for (const auto& r : res.rows)
    out << r.m << ',' << detail::format_number(r.median_error) << ',' << detail::format_number(r.mean_error) << ','
        << detail::format_number(r.std_error) << ',' << detail::format_number(r.mean_iterations) << ',' << r.failures
        << '\n';
}

inline void write_line_fit_csv(std::ostream& out, const VanishingNoiseResult& res) {
  out << "slope,slope_half_width,intercept,points,fit_floor\n";
  out << detail::format_number(res.fit.slope) << ',' << detail::format_number(res.fit.slope_half_width) << ','
      << detail::format_number(res.fit.intercept) << ',' << res.fit.points << ',' << detail::format_number(res.fit_floor)
      << '\n';
}

// ---------------------------------------------------------------------------
// Cartoon + texture image experiment
// ---------------------------------------------------------------------------

struct ImageExperimentConfig {
  long height = 64;
  long width = 64;
  long rectangles = 6;
  long window = 8;
  long overlap = 4;
  long excluded = 4;
  long k = 40;
  long ell = 0;  // 0: derive from the phantom, see cosupport_slack
  // ell = p - slack * (p - exact cosparsity of the phantom)
  double cosupport_slack = 4.0;
  double texture_ratio = 0.1;
  std::string mask = "variable-density";  // variable-density | radial | full
  double sampling_fraction = 0.25;
  double mask_decay = 3.0;
  long radial_lines = 25;
  std::vector<LsMode> modes{LsMode::unified, LsMode::split};
  bool analysis_only = true;
  std::uint64_t seed = 1;
  RecoverySettings settings = default_settings();

  static RecoverySettings default_settings() {
    RecoverySettings s;
    s.ls_max_iterations = 400;
    s.max_iterations = 40;
    return s;
  }

  void validate() const {
    require_config(height >= 2 && width >= 2, "image experiment: image must be at least 2x2");
    require_config(k >= 1, "image experiment: k must be positive");
    require_config(texture_ratio >= 0.0, "image experiment: texture ratio must be non-negative");
    require_config(sampling_fraction > 0.0 && sampling_fraction <= 1.0, "image experiment: sampling fraction must be in (0, 1]");
    require_config(mask == "variable-density" || mask == "radial" || mask == "full",
                   "image experiment: mask must be variable-density, radial or full");
    require_config(rectangles >= 0, "image experiment: rectangle count must be non-negative");
    require_config(cosupport_slack >= 1.0, "image experiment: cosupport slack must be >= 1");
    require_config(ell >= 0, "image experiment: ell must be non-negative");
    settings.validate();
  }

  static ImageExperimentConfig from_config(const Config& cfg) {
    cfg.check_keys("experiment", {"kind", "height", "width", "rectangles", "window", "overlap", "excluded", "k", "ell",
                                  "cosupport_slack", "texture_ratio", "mask", "sampling_fraction", "mask_decay", "radial_lines", "modes",
                                  "analysis_only", "seed"});
    ImageExperimentConfig c;
    c.height = cfg.get_int("experiment", "height", c.height);
    c.width = cfg.get_int("experiment", "width", c.width);
    c.rectangles = cfg.get_int("experiment", "rectangles", c.rectangles);
    c.window = cfg.get_int("experiment", "window", c.window);
    c.overlap = cfg.get_int("experiment", "overlap", c.overlap);
    c.excluded = cfg.get_int("experiment", "excluded", c.excluded);
    c.k = cfg.get_int("experiment", "k", c.k);
    c.ell = cfg.get_int("experiment", "ell", c.ell);
    c.cosupport_slack = cfg.get_double("experiment", "cosupport_slack", c.cosupport_slack);
    c.texture_ratio = cfg.get_double("experiment", "texture_ratio", c.texture_ratio);
    c.mask = cfg.get_string("experiment", "mask", c.mask);
    c.sampling_fraction = cfg.get_double("experiment", "sampling_fraction", c.sampling_fraction);
    c.mask_decay = cfg.get_double("experiment", "mask_decay", c.mask_decay);
    c.radial_lines = cfg.get_int("experiment", "radial_lines", c.radial_lines);
    if (cfg.has("experiment", "modes")) {
      c.modes.clear();
      std::string raw = cfg.get_string("experiment", "modes");
      std::replace(raw.begin(), raw.end(), ',', ' ');
      std::istringstream in(raw);
      std::string tok;
      while (in >> tok) {
        if (tok == "unified") c.modes.push_back(LsMode::unified);
        else if (tok == "split") c.modes.push_back(LsMode::split);
        else throw ConfigError("[experiment] modes: unknown mode '" + tok + "'");
      }
    }
    c.analysis_only = cfg.get_int("experiment", "analysis_only", c.analysis_only ? 1 : 0) != 0;
    c.seed = static_cast<std::uint64_t>(cfg.get_int("experiment", "seed", static_cast<long>(c.seed)));
    c.settings = settings_from_config(cfg, c.settings);
    c.validate();
    return c;
  }

  SamplingMask build_mask() const {
    if (mask == "full") return SamplingMask::full(height, width);
    if (mask == "radial") return SamplingMask::radial(height, width, static_cast<int>(radial_lines));
    return SamplingMask::variable_density(height, width, sampling_fraction, mask_decay, seed ^ 0x5a5a5a5aULL);
  }
};

struct CartoonTexture {
  Vector cartoon;   // x2
  Vector texture;   // x1 = D alpha
  Vector noisy;     // x1 + x2
  Vector alpha;
  IndexSet texture_support;
};

/// Piecewise-constant cartoon (axis-aligned rectangles on a constant background) and a
/// texture of k random atoms with Gaussian coefficients, rescaled so that
/// ||texture||_F = ratio ||cartoon||_F.
inline CartoonTexture synthesize_cartoon_texture(const ImageExperimentConfig& cfg, const SynthesisDictionary& d) {
  require_config(d.rows() == cfg.height * cfg.width, "cartoon/texture: dictionary does not match the image size");
  require_config(cfg.k <= d.atoms(), "cartoon/texture: k exceeds the number of atoms");
  Rng rng = make_rng(cfg.seed, 0x63617274u);
  std::uniform_real_distribution<double> background(40.0, 80.0);
  std::uniform_real_distribution<double> level(90.0, 220.0);
  CartoonTexture out;
  out.cartoon = Vector::Constant(cfg.height * cfg.width, std::round(background(rng)));
  const long min_side = std::max<long>(2, std::min(cfg.height, cfg.width) / 8);
  const long max_side = std::max<long>(min_side, std::min(cfg.height, cfg.width) / 2);
  for (long r = 0; r < cfg.rectangles; ++r) {
    std::uniform_int_distribution<long> side(min_side, max_side);
    const long h = std::min(side(rng), cfg.height), w = std::min(side(rng), cfg.width);
    std::uniform_int_distribution<long> top(0, cfg.height - h), left(0, cfg.width - w);
    const long r0 = top(rng), c0 = left(rng);
    const double value = std::round(level(rng));
    for (long i = r0; i < r0 + h; ++i)
      for (long j = c0; j < c0 + w; ++j) out.cartoon[i * cfg.width + j] = value;
  }
  out.texture_support = random_subset(d.atoms(), cfg.k, rng);
  out.alpha = Vector::Zero(d.atoms());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index j : out.texture_support) out.alpha[j] = normal(rng);
  Vector texture = d.apply(out.alpha);
  const double scale = texture.norm() > 0.0 ? cfg.texture_ratio * out.cartoon.norm() / texture.norm() : 0.0;
  out.alpha *= scale;
  out.texture = texture * scale;
  out.noisy = out.cartoon + out.texture;
  return out;
}

/// Exact cosparsity p - ||Omega x||_0 of an image.
inline Index exact_cosparsity(const AnalysisOperator& omega, const Vector& x) {
  const Vector z = omega.apply(x);
  return static_cast<Index>((z.array() == 0.0).count());
}

/// p - slack * ||Omega x||_0, clamped at 0.
inline Index derived_cosparsity(const AnalysisOperator& omega, const Vector& x, double slack) {
  const double nnz = static_cast<double>(omega.rows() - exact_cosparsity(omega, x));
  return std::max<Index>(0, omega.rows() - static_cast<Index>(std::ceil(slack * nnz)));
}

struct ImageModeResult {
  std::string mode;  // unified | split | analysis-only | naive
  double psnr_x2 = 0.0;
  double psnr_x = 0.0;
  int iterations = 0;
  std::string halt;
  Vector x2;
  Vector x;
  Vector x1;
};

struct ImageExperimentResult {
  std::vector<ImageModeResult> rows;
  CartoonTexture truth;
  SamplingMask mask = SamplingMask::full(1, 1);
  Index ell = 0;
  Index p = 0;

  const ImageModeResult* find(const std::string& mode) const {
    for (const auto& r : rows)
      if (r.mode == mode) return &r;
    return nullptr;
  }
};

inline ImageExperimentResult run_image_experiment(const ImageExperimentConfig& cfg) {
  cfg.validate();
  const auto d = std::make_shared<const SynthesisDictionary>(
      SynthesisDictionary::local_dct(cfg.height, cfg.width, cfg.window, cfg.overlap, cfg.excluded));
  const auto omega = std::make_shared<const AnalysisOperator>(AnalysisOperator::finite_difference(cfg.height, cfg.width));
  ImageExperimentResult out;
  out.truth = synthesize_cartoon_texture(cfg, *d);
  out.p = omega->rows();
  out.ell = cfg.ell > 0 ? cfg.ell : derived_cosparsity(*omega, out.truth.cartoon, cfg.cosupport_slack);
  require_config(out.ell <= omega->rows(), "image experiment: ell exceeds the number of analysis rows");
  out.mask = cfg.build_mask();
  const MeasurementOperator a = MeasurementOperator::subsampled_fourier(out.mask);
  const Vector y = a.apply(out.truth.noisy);

  ImageModeResult naive;
  naive.mode = "naive";
  naive.x = a.adjoint(y);
  naive.x2 = naive.x;
  naive.x1 = Vector::Zero(naive.x.size());
  naive.psnr_x = psnr(out.truth.noisy, naive.x);
  naive.psnr_x2 = psnr(out.truth.cartoon, naive.x2);
  naive.halt = "none";
  out.rows.push_back(std::move(naive));

  const CombinedTruth truth{out.truth.texture, out.truth.cartoon};
  for (LsMode mode : cfg.modes) {
    const SacosampResult res = run_sacosamp(a, y, *d, *omega, cfg.k, out.ell, mode, cfg.settings, truth);
    ImageModeResult row;
    row.mode = to_string(mode);
    row.x1 = res.x1;
    row.x2 = res.x2;
    row.x = res.x;
    row.psnr_x2 = psnr(out.truth.cartoon, res.x2);
    row.psnr_x = psnr(out.truth.noisy, res.x);
    row.iterations = res.iterations();
    row.halt = to_string(res.halt);
    out.rows.push_back(std::move(row));
  }
  if (cfg.analysis_only) {
    const UnionModel model = UnionModel::analysis(omega, out.ell);
    const RecoveryTrace trace = run_gcosamp(a, y, model, cfg.settings);
    ImageModeResult row;
    row.mode = "analysis-only";
    row.x = trace.estimate;
    row.x2 = trace.estimate;
    row.x1 = Vector::Zero(row.x.size());
    row.psnr_x2 = psnr(out.truth.cartoon, row.x2);
    row.psnr_x = psnr(out.truth.noisy, row.x);
    row.iterations = static_cast<int>(trace.rows.size());
    row.halt = to_string(trace.halt);
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline void write_image_experiment_csv(std::ostream& out, const ImageExperimentResult& res) {
  out << "mode,psnr_x2,psnr_x,iterations,halt,ell,p,sampling_fraction\n";
  for (const auto& r : res.rows)
    out << r.mode << ',' << detail::format_number(r.psnr_x2) << ',' << detail::format_number(r.psnr_x) << ','
        << r.iterations << ',' << r.halt << ',' << res.ell << ',' << res.p << ','
        << detail::format_number(res.mask.fraction()) << '\n';
}

/// Writes the CSV summary and 8-bit PGM images into `dir`.
inline void write_image_experiment_outputs(const std::string& dir, const ImageExperimentResult& res, Index height,
                                           Index width) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream csv(base / "results.csv");
    if (!csv) throw IoError("cannot write " + (base / "results.csv").string());
    write_image_experiment_csv(csv, res);
  }
  auto save = [&](const std::string& name, const Vector& px) { save_pgm((base / name).string(), Image{height, width, px}); };
  save("cartoon.pgm", res.truth.cartoon);
  save("noisy.pgm", res.truth.noisy);
  save("texture.pgm", Vector(res.truth.texture.array() + 128.0));
  const Matrix bits = res.mask.bitmap();
  Vector mask_px(height * width);
  for (Index i = 0; i < height; ++i)
    for (Index j = 0; j < width; ++j) mask_px[i * width + j] = 255.0 * bits(i, j);
  save("mask.pgm", mask_px);
  for (const auto& r : res.rows) {
    save(r.mode + "_x2.pgm", r.x2);
    save(r.mode + "_x.pgm", r.x);
  }
}

}  // namespace gcosamp
