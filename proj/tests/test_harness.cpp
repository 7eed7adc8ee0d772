#include "gcosamp/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gcosamp;

namespace {

ImageExperimentConfig small_image_config() {
  ImageExperimentConfig c;
  c.height = c.width = 32;
  c.rectangles = 4;
  c.k = 10;
  return c;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gcosamp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(CartoonTexture, ZeroRatioGivesPureCartoon) {
  auto cfg = small_image_config();
  cfg.texture_ratio = 0.0;
  const auto d = SynthesisDictionary::local_dct(32, 32, 8, 4, 4);
  const auto ct = synthesize_cartoon_texture(cfg, d);
  EXPECT_EQ(ct.noisy, ct.cartoon);
  EXPECT_TRUE(ct.texture.isZero(0.0));
}

TEST(CartoonTexture, TextureRatioAndSparsity) {
  auto cfg = small_image_config();
  const auto d = SynthesisDictionary::local_dct(32, 32, 8, 4, 4);
  for (double ratio : {0.1, 0.2}) {
    cfg.texture_ratio = ratio;
    const auto ct = synthesize_cartoon_texture(cfg, d);
    EXPECT_NEAR(ct.texture.norm() / ct.cartoon.norm(), ratio, 1e-10);
    EXPECT_EQ(static_cast<long>(ct.texture_support.size()), cfg.k);
    EXPECT_LT((d.apply(ct.alpha) - ct.texture).norm(), 1e-9 * ct.texture.norm());
    EXPECT_EQ(ct.noisy, ct.cartoon + ct.texture);
  }
}

TEST(CartoonTexture, CosparsityIsFeasible) {
  auto cfg = small_image_config();
  const auto d = SynthesisDictionary::local_dct(32, 32, 8, 4, 4);
  const auto omega = AnalysisOperator::finite_difference(32, 32);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    const auto ct = synthesize_cartoon_texture(cfg, d);
    const Vector z = omega.apply(ct.cartoon);
    const Index ell = exact_cosparsity(omega, ct.cartoon);
    const Index nnz = omega.rows() - ell;
    // every nonzero difference sits on a rectangle boundary
    EXPECT_LE(nnz, cfg.rectangles * 2 * (cfg.height + cfg.width));
    const IndexSet lambda = bottom_indices(z.cwiseAbs(), ell);
    EXPECT_EQ((omega.rows_of(lambda) * ct.cartoon).norm(), 0.0);
    EXPECT_EQ(derived_cosparsity(omega, ct.cartoon, 1.0), ell);
    EXPECT_EQ(derived_cosparsity(omega, ct.cartoon, 2.0), omega.rows() - 2 * nnz);
  }
}

TEST(VanishingNoise, NoiselessRecoveryIsExact) {
  VanishingNoiseConfig cfg;
  cfg.noise_ratio = 0.0;
  cfg.trials = 5;
  cfg.m_grid = {static_cast<long>(10.0 * cfg.k * std::log(static_cast<double>(cfg.n)))};
  const auto res = run_vanishing_noise(cfg);
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_LT(res.rows[0].median_error, 1e-6);
  EXPECT_EQ(res.failed_trials, 0);
}

TEST(VanishingNoise, ErrorScalesWithNoise) {
  VanishingNoiseConfig cfg;
  cfg.trials = 9;
  cfg.m_grid = {1200};
  const double e1 = run_vanishing_noise(cfg).rows[0].median_error;
  cfg.noise_ratio *= 2.0;
  const double e2 = run_vanishing_noise(cfg).rows[0].median_error;
  EXPECT_NEAR(e2 / e1, 2.0, 0.4);
}

TEST(VanishingNoise, ConfigValidationAndGrid) {
  const auto grid = VanishingNoiseConfig::log_spaced_grid(50, 1900, 24);
  ASSERT_EQ(grid.size(), 24u);
  EXPECT_EQ(grid.front(), 50);
  EXPECT_EQ(grid.back(), 1900);
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
  VanishingNoiseConfig cfg;
  cfg.m_grid = {2000};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.m_grid = {100};
  cfg.trials = 2;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_NEAR(VanishingNoiseConfig{}.fit_floor(), 40.0 * std::log(2000.0), 1e-9);
  const auto parsed = VanishingNoiseConfig::from_config(
      Config::parse_string("[experiment]\nkind = vanishing-noise\nn = 500\nk = 3\nm_grid = 60, 120, 240\ntrials = 4\n"));
  EXPECT_EQ(parsed.m_grid, (std::vector<long>{60, 120, 240}));
  EXPECT_EQ(parsed.n, 500);
}

TEST(VanishingNoise, CsvSchemaAndReproducibility) {
  VanishingNoiseConfig cfg;
  cfg.n = 400;
  cfg.k = 3;
  cfg.trials = 4;
  cfg.m_grid = {60, 120, 240};
  cfg.slope_fit_floor = 1.0;
  auto render = [&] {
    const auto res = run_vanishing_noise(cfg);
    std::ostringstream a, b;
    write_vanishing_noise_csv(a, res);
    write_line_fit_csv(b, res);
    return a.str() + b.str();
  };
  const std::string first = render();
  EXPECT_EQ(first, render());
  const auto lines = lines_of(first);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "m,median_error,mean_error,std_error,mean_iterations,failures");
  for (int i = 1; i <= 3; ++i) EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 5);
  EXPECT_EQ(lines[4], "slope,slope_half_width,intercept,points,fit_floor");
  EXPECT_EQ(std::count(lines[5].begin(), lines[5].end(), ','), 4);
}

TEST(LineFitting, ExactLineHasZeroHalfWidth) {
  const auto f = fit_line({0, 1, 2, 3}, {1, -1, -3, -5});
  EXPECT_NEAR(f.slope, -2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.slope_half_width, 0.0, 1e-9);
  EXPECT_EQ(f.points, 4);
  // noisy line: half width from the t(2) quantile 4.303
  const auto g = fit_line({0, 1, 2, 3}, {0, 1, 1, 3});
  EXPECT_NEAR(g.slope, 0.9, 1e-12);
  const double resid_ss = 0.1 * 0.1 + 0.2 * 0.2 + 0.7 * 0.7 + 0.4 * 0.4;
  EXPECT_NEAR(g.slope_half_width, 4.302652729911275 * std::sqrt(resid_ss / 2.0 / 5.0), 1e-9);
  EXPECT_TRUE(std::isnan(fit_line({1.0}, {2.0}).slope));
}

TEST(ImageExperiment, FullSamplingIsNearExact) {
  auto cfg = small_image_config();
  cfg.mask = "full";
  cfg.sampling_fraction = 1.0;
  cfg.texture_ratio = 0.0;
  cfg.analysis_only = false;
  cfg.modes = {LsMode::unified};
  const auto d = SynthesisDictionary::local_dct(32, 32, 8, 4, 4);
  cfg.ell = exact_cosparsity(AnalysisOperator::finite_difference(32, 32), synthesize_cartoon_texture(cfg, d).cartoon);
  const auto res = run_image_experiment(cfg);
  const auto* uni = res.find("unified");
  ASSERT_NE(uni, nullptr);
  EXPECT_GE(uni->psnr_x2, 60.0);
}

TEST(ImageExperiment, ComponentsAddUpAndCsvMatchesRows) {
  auto cfg = small_image_config();
  const auto res = run_image_experiment(cfg);
  ASSERT_EQ(res.rows.size(), 4u);
  for (const auto& r : res.rows) EXPECT_EQ(r.x, r.mode == "naive" ? r.x2 : Vector(r.x1 + r.x2)) << r.mode;
  EXPECT_NE(res.find("split"), nullptr);
  EXPECT_NE(res.find("analysis-only"), nullptr);
  EXPECT_EQ(res.find("nope"), nullptr);
  EXPECT_LE(res.ell, res.p);

  std::ostringstream out;
  write_image_experiment_csv(out, res);
  const auto lines = lines_of(out.str());
  ASSERT_EQ(lines.size(), res.rows.size() + 1);
  EXPECT_EQ(lines[0], "mode,psnr_x2,psnr_x,iterations,halt,ell,p,sampling_fraction");
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 7);
}

TEST(ImageExperiment, OutputsAreWrittenAndReproducible) {
  auto cfg = small_image_config();
  cfg.modes = {LsMode::unified};
  cfg.analysis_only = false;
  const auto dir = scratch_dir("image");
  write_image_experiment_outputs(dir.string(), run_image_experiment(cfg), cfg.height, cfg.width);
  for (const char* f : {"results.csv", "cartoon.pgm", "noisy.pgm", "texture.pgm", "mask.pgm", "naive_x2.pgm",
                        "unified_x2.pgm", "unified_x.pgm"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const Image img = load_pgm((dir / "cartoon.pgm").string());
  EXPECT_EQ(img.height, 32);
  std::ifstream a(dir / "results.csv");
  const std::string first((std::istreambuf_iterator<char>(a)), {});
  std::ostringstream again;
  write_image_experiment_csv(again, run_image_experiment(cfg));
  EXPECT_EQ(first, again.str());
  std::filesystem::remove_all(dir);
}

TEST(ImageExperiment, RejectsInfeasibleSettings) {
  auto cfg = small_image_config();
  cfg.ell = 100000;
  EXPECT_THROW(run_image_experiment(cfg), ConfigError);
  cfg = small_image_config();
  cfg.sampling_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(ImageExperimentConfig::from_config(Config::parse_string("[experiment]\nmodes = unified, fancy\n")),
               ConfigError);
  const auto parsed = ImageExperimentConfig::from_config(
      Config::parse_string("[experiment]\nheight = 32\nwidth = 32\nmodes = split\nanalysis_only = 0\n"));
  EXPECT_EQ(parsed.modes, (std::vector<LsMode>{LsMode::split}));
  EXPECT_FALSE(parsed.analysis_only);
}

TEST(ModelSpecConfig, RoundTripsThroughText) {
  ModelSpec s;
  s.type = "combined";
  s.k = 7;
  s.image_h = s.image_w = 16;
  s.window = 8;
  s.overlap = 4;
  s.excluded = 2;
  s.ell = 300;
  Config cfg;
  s.to_config(cfg);
  std::ostringstream out;
  cfg.write(out);
  const ModelSpec back = ModelSpec::from_config(Config::parse_string(out.str()));
  EXPECT_EQ(back.type, "combined");
  EXPECT_EQ(back.k, 7);
  EXPECT_EQ(back.window, 8);
  EXPECT_EQ(back.ell, 300);
  const UnionModel m = back.build();
  EXPECT_EQ(m.name(), "combined");
  EXPECT_EQ(m.ambient_dim(), 256);

  EXPECT_THROW(ModelSpec::from_config(Config::parse_string("[model]\ntype = ksparse\nbogus = 1\n")), ConfigError);
  ModelSpec bad;
  bad.type = "fancy";
  EXPECT_THROW(bad.build(), ConfigError);
}

TEST(RecoverConfig, GaussianProblemRecovers) {
  const Config cfg = Config::parse_string(
      "[problem]\noperator = gaussian\nm = 80\nseed = 3\n[model]\ntype = ksparse\nn = 200\nk = 4\n"
      "[settings]\nmax_iterations = 30\n");
  const UnionModel model = ModelSpec::from_config(cfg).build();
  const auto settings = settings_from_config(cfg);
  EXPECT_EQ(settings.max_iterations, 30);
  const auto p = problem_from_config(cfg, model);
  ASSERT_TRUE(p.truth.has_value());
  EXPECT_EQ(p.a.rows(), 80);
  const auto trace = run_gcosamp(p.a, p.y, model, settings, p.truth);
  EXPECT_LT((trace.estimate - *p.truth).norm() / p.truth->norm(), 1e-6);
}

TEST(RecoverConfig, CsvInputsAndNoise) {
  const auto dir = scratch_dir("recover");
  Rng rng = make_rng(8);
  const Matrix a = gaussian_matrix(30, 12, rng);
  save_matrix_csv((dir / "a.csv").string(), a);
  Vector x = Vector::Zero(12);
  x[2] = 1.5;
  x[9] = -0.5;
  save_vector_csv((dir / "x.csv").string(), x);
  const std::string base = "[model]\ntype = ksparse\nn = 12\nk = 2\n[problem]\noperator = csv\nmatrix = " +
                           (dir / "a.csv").string() + "\ntruth = " + (dir / "x.csv").string() + "\n";
  const auto model = ModelSpec::from_config(Config::parse_string(base)).build();
  const auto clean = problem_from_config(Config::parse_string(base), model);
  EXPECT_LT((clean.y - a * x).norm(), 1e-12);
  const auto noisy = problem_from_config(Config::parse_string(base + "noise_ratio = 0.05\n"), model);
  EXPECT_NEAR((noisy.y - a * x).norm() / (a * x).norm(), 0.05, 1e-12);
  EXPECT_THROW(problem_from_config(Config::parse_string(base + "m = 3\nn = 13\n"), model), ConfigError);
  std::filesystem::remove_all(dir);
}
