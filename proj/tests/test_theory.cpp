#include "gcosamp/theory.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace gcosamp;

TEST(GaussianNorm, ClosedFormsAndSandwich) {
  EXPECT_NEAR(expected_gaussian_norm(1), std::sqrt(2.0 / std::numbers::pi), 1e-12);
  EXPECT_NEAR(expected_gaussian_norm(2), std::sqrt(std::numbers::pi / 2.0), 1e-12);
  const double b100 = expected_gaussian_norm(100);
  EXPECT_GE(b100, 100.0 / std::sqrt(101.0));
  EXPECT_LE(b100, 10.0);
  for (long m = 1; m <= 10000; ++m) {
    const double b = expected_gaussian_norm(m), md = static_cast<double>(m);
    ASSERT_GE(b, md / std::sqrt(md + 1.0)) << m;
    ASSERT_LE(b, std::sqrt(md)) << m;
  }
  EXPECT_THROW(expected_gaussian_norm(0), ConfigError);
}

TEST(MeanWidth, OneAndTwoDimensionalOracles) {
  const auto w1 = mc_mean_width(UnionModel::ksparse(1, 1), 1, 20000, 3);
  EXPECT_NEAR(w1.mean, std::sqrt(2.0 / std::numbers::pi), 3.0 * w1.std_error);
  const auto w2 = mc_mean_width(UnionModel::ksparse(2, 1), 1, 20000, 4);
  EXPECT_NEAR(w2.mean, 2.0 / std::sqrt(std::numbers::pi), 3.0 * w2.std_error);
  EXPECT_EQ(w2.samples, 20000);
  EXPECT_EQ(w2.exactness, SupExactness::exact_sup);
  EXPECT_THROW(mc_mean_width(UnionModel::ksparse(2, 1), 1, 1, 4), ConfigError);
}

TEST(MeanWidth, OrderTwoDominatesPerSample) {
  const std::vector<UnionModel> models{UnionModel::ksparse(50, 4), UnionModel::blocksparse(48, 6, 3),
                                       UnionModel::lowrank(6, 7, 2)};
  for (const auto& model : models) {
    const auto s = width_samples(model, {1, 2}, 300, 9);
    for (std::size_t i = 0; i < s[0].size(); ++i) ASSERT_GE(s[1][i], s[0][i]) << model.name();
  }
}

TEST(MeanWidth, ApproximateModelsAreFlagged) {
  auto om = std::make_shared<const AnalysisOperator>(AnalysisOperator::finite_difference(4, 4));
  auto d = std::make_shared<const SynthesisDictionary>(SynthesisDictionary::local_dct(4, 4, 4, 0, 1));
  EXPECT_EQ(mc_mean_width(UnionModel::analysis(om, 18), 1, 50, 1).exactness, SupExactness::lower_bound_sup);
  EXPECT_EQ(mc_mean_width(UnionModel::synthesis(d, 2), 1, 50, 1).exactness, SupExactness::lower_bound_sup);
  EXPECT_EQ(mc_mean_width(UnionModel::combined(d, 2, om, 18), 1, 50, 1).exactness, SupExactness::lower_bound_sup);
}

TEST(MeanWidth, KSparseBelowAnalyticBound) {
  const auto w = mc_mean_width(UnionModel::ksparse(400, 10), 1, 2000, 5);
  EXPECT_LE(w.mean, width_upper_bound(width::Sparse{400, 10}, 1, 2.0));
  EXPECT_GE(w.mean, width_upper_bound(width::Sparse{400, 10}, 1, 0.5));
}

TEST(WidthBounds, FormulaExamples) {
  EXPECT_NEAR(width_upper_bound(width::LowRank{16, 16, 2}, 4), 8.0 * std::sqrt(8.0), 1e-12);
  EXPECT_NEAR(width_upper_bound(width::LowRank{16, 16, 2}, 4), 22.627, 1e-3);
  EXPECT_NEAR(width_upper_bound(width::Sparse{100, 5}, 2), std::sqrt(10.0 * std::log(20.0)), 1e-12);
  EXPECT_NEAR(width_upper_bound(width::Structured{10, 3}, 1, 2.0), std::sqrt(2.0 * 16.0), 1e-12);
  EXPECT_NEAR(width_upper_bound(width::Tree{9}, 2), 6.0, 1e-12);
  EXPECT_NEAR(width_upper_bound(width::Block{100, 10, 5}, 1), std::sqrt(10.0 + 2.0 * std::log(10.0)), 1e-12);
  EXPECT_NEAR(width_upper_bound(width::Synthesis{100, 4, 0.5}, 1), std::sqrt(8.0 * std::log(100.0)), 1e-12);
  EXPECT_NEAR(width_upper_bound(width::Analysis{50, 40, 0.0}, 2), std::sqrt(20.0 * std::log(50.0)), 1e-12);
  const auto combined = width::sum({width::Tree{9.0}, width::Tree{16.0}});
  EXPECT_NEAR(width_upper_bound(combined, 1), 7.0, 1e-12);
}

TEST(WidthBounds, RejectsBadInputs) {
  EXPECT_THROW(width_upper_bound(width::Synthesis{100, 4, 1.0}, 1), ConfigError);
  EXPECT_THROW(width_upper_bound(width::Analysis{100, 40, 1.5}, 1), ConfigError);
  EXPECT_THROW(width_upper_bound(width::Sparse{10, 6}, 2), ConfigError);
  EXPECT_THROW(width_upper_bound(width::Tree{4}, 1, 0.0), ConfigError);
}

TEST(BoundReport, QuotedThreshold) {
  const auto r = bound_report_from_m0(20000, 56.1);
  EXPECT_NEAR(r.threshold, 14.5 * 14.5 * 56.1 + 1.0, 1.0);
  EXPECT_NEAR(r.threshold, 1.18e4, 0.01e4);
  EXPECT_TRUE(r.converges);
  EXPECT_FALSE(bound_report_from_m0(11795, 56.1).converges);
}

TEST(BoundReport, AsymptoticRatios) {
  const double m0 = 56.1;
  const long m = static_cast<long>(1e6 * m0);
  const auto r = bound_report_from_m0(m, m0);
  const double md = static_cast<double>(m);
  const double rho_ratio = r.rho_m / (16.0 * std::sqrt(m0 / md));
  const double xi_ratio = r.xi_m / (6.0 * std::sqrt(m0) / md);
  EXPECT_GE(rho_ratio, 0.95);
  EXPECT_LE(rho_ratio, 1.05);
  EXPECT_GE(xi_ratio, 0.9);
  EXPECT_LE(xi_ratio, 1.1);
}

TEST(BoundReport, StepSizesAndFields) {
  const auto r = bound_report(5000, 4.0, 3.0, 1.0);
  EXPECT_NEAR(r.m0, 25.0, 1e-12);
  EXPECT_NEAR(r.mu1, 1.0 / std::pow(r.b_m + 5.0, 2), 1e-15);
  EXPECT_LE(r.mu1, 1.0 / std::pow(r.b_m + r.w4 + r.eta, 2) * (1 + 1e-12));
  EXPECT_NEAR(r.xi1, r.mu1 * 4.0, 1e-15);
  EXPECT_NEAR(r.xi2, r.mu2 * 5.0, 1e-15);
  EXPECT_NEAR(r.probability_floor, 1.0 - 6.0 * std::exp(-0.5), 1e-15);
  EXPECT_GE(r.rho_m, 0.0);
  EXPECT_LE(r.rho_m, 1.0);
  EXPECT_THROW(bound_report(100, 2.0, 3.0, 1.0), ConfigError);
  EXPECT_THROW(bound_report(100, 2.0, 1.0, 0.0), ConfigError);
  // below the threshold: no convergence, and a saturated rho gives an infinite noise coefficient
  const auto small = bound_report(10, 4.0, 4.0, 1.0);
  EXPECT_FALSE(small.converges);
  EXPECT_EQ(small.rho_m, 1.0);
  EXPECT_TRUE(std::isinf(small.noise_coefficient));
}

TEST(BoundReport, ConvergesImpliesContraction) {
  for (double m0 : {1.0, 4.0, 25.0, 56.1, 300.0})
    for (double factor : {1.0, 1.01, 1.5, 3.0, 10.0, 100.0, 1e4}) {
      const long m = static_cast<long>(std::ceil(factor * (14.5 * 14.5 * m0 + 1.0))) + 1;
      const auto r = bound_report_from_m0(m, m0);
      ASSERT_TRUE(r.converges);
      EXPECT_LT(r.contraction, 1.0) << m0 << " " << m;
    }
}

TEST(BoundReport, RhoAndXiDecreaseAboveThreshold) {
  const double m0 = 56.1;
  double prev_rho = 2.0, prev_xi = std::numeric_limits<double>::infinity();
  for (long m = 11800; m < 20000000; m = m * 3 / 2) {
    const auto r = bound_report_from_m0(m, m0);
    EXPECT_LT(r.rho_m, prev_rho) << m;
    EXPECT_LT(r.xi_m, prev_xi) << m;
    prev_rho = r.rho_m;
    prev_xi = r.xi_m;
  }
}

TEST(Verifiers, GordonAtEtaThree) {
  const auto res = verify_gordon(UnionModel::ksparse(200, 5), 1, 60, 3.0, 500, 11);
  EXPECT_NEAR(res.floor, 1.0 - 2.0 * std::exp(-4.5), 1e-15);
  EXPECT_GE(res.pass_rate, res.floor - 0.02);
  EXPECT_EQ(res.trials, 500);
  EXPECT_LT(res.lower, res.b_m);
  EXPECT_GT(res.upper, res.b_m);
}

TEST(Verifiers, ContractionAtEtaThree) {
  const auto model = UnionModel::lowrank(8, 8, 1);
  const double w = mc_mean_width(model, 2, VerifyOptions{}.width_samples, 12 ^ 0x9e3779b97f4a7c15ULL).mean;
  const double mu = 1.0 / std::pow(expected_gaussian_norm(80) + w + 3.0, 2);
  const auto res = verify_projected_contraction(model, 2, 80, mu, 3.0, 500, 12);
  EXPECT_GE(res.pass_rate, res.floor - 0.02);
  EXPECT_THROW(verify_projected_contraction(model, 2, 80, 2.0 * mu, 3.0, 10, 12), ConfigError);
  EXPECT_THROW(verify_projected_contraction(model, 2, 80, -1.0, 3.0, 10, 12), ConfigError);
}

TEST(Verifiers, DegenerateCases) {
  Rng rng = make_rng(13);
  const Matrix a = gaussian_matrix(20, 10, rng);
  const Matrix basis = Matrix::Identity(10, 3);
  EXPECT_NEAR(projected_operator_norm(a, basis, 0.0), 1.0, 1e-12);
  EXPECT_EQ(projected_operator_norm(a, Matrix(10, 0), 0.01), 0.0);
  // the norm ratio is scale invariant
  const Vector u = gaussian_vector(10, rng);
  EXPECT_NEAR((a * u).norm() / u.norm(), (a * (2.0 * u)).norm() / (2.0 * u).norm(), 1e-12);
}

TEST(Verifiers, PowerIterationMatchesEigenSolver) {
  Rng rng = make_rng(14);
  const Matrix g = gaussian_matrix(12, 12, rng);
  const Matrix s = g + g.transpose();
  const Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const double expect = es.eigenvalues().cwiseAbs().maxCoeff();
  EXPECT_NEAR(symmetric_spectral_norm(s, 1e-12, 100000), expect, 1e-6 * expect);
}

TEST(Verifiers, RandomMembersHaveModelDimension) {
  Rng rng = make_rng(15);
  EXPECT_EQ(random_member_basis(UnionModel::ksparse(30, 4), 2, rng).cols(), 8);
  EXPECT_EQ(random_member_basis(UnionModel::blocksparse(30, 6, 3), 1, rng).cols(), 6);
  const Matrix lr = random_member_basis(UnionModel::lowrank(5, 6, 2), 1, rng);
  EXPECT_EQ(lr.cols(), 2);
  EXPECT_LT((lr.transpose() * lr - Matrix::Identity(2, 2)).norm(), 1e-10);
}
