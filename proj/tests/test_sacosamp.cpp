#include "gcosamp/sacosamp.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace gcosamp;

namespace {

Vector sparse_coeffs(Index d, Index k, Rng& rng) {
  Vector a = Vector::Zero(d);
  for (Index j : random_subset(d, k, rng)) a[j] = 1.0 + std::abs(gaussian_vector(1, rng)[0]);
  return a;
}

struct SmallImage {
  SynthesisDictionary d = SynthesisDictionary::local_dct(16, 16, 8, 4, 4);
  AnalysisOperator omega = AnalysisOperator::finite_difference(16, 16);
  Vector x1, x2;
};

SmallImage small_image(std::uint64_t seed) {
  SmallImage s;
  Rng rng = make_rng(seed);
  s.x2 = Vector::Constant(256, 60.0);
  for (Index i = 3; i < 11; ++i)
    for (Index j = 5; j < 13; ++j) s.x2[i * 16 + j] = 180.0;
  s.x1 = s.d.apply(4.0 * sparse_coeffs(s.d.atoms(), 4, rng));
  return s;
}

}  // namespace

TEST(JointLs, TrivialIdentityExample) {
  // one atom e0, Omega = I with cosupport {0, 1}: x2 lives on coordinate 2
  Matrix dm = Matrix::Identity(3, 1);
  const auto d = SynthesisDictionary::dense(dm);
  const auto omega = AnalysisOperator::dense(Matrix::Identity(3, 3));
  const auto a = MeasurementOperator::identity(3);
  const Vector y = (Vector(3) << 1, 2, 3).finished();
  const auto ls = joint_constrained_ls(a, y, d, omega, {0}, {0, 1}, RecoverySettings{});
  EXPECT_NEAR(ls.alpha[0], 1.0, 1e-12);
  EXPECT_LT((ls.x2 - (Vector(3) << 0, 0, 3).finished()).norm(), 1e-12);
}

TEST(JointLs, OrthogonalityAndFeasibility) {
  Rng rng = make_rng(51);
  const auto d = SynthesisDictionary::dense(gaussian_matrix(30, 50, rng));
  const auto omega = AnalysisOperator::dense(gaussian_matrix(40, 30, rng));
  const auto a = MeasurementOperator::gaussian(25, 30, 3);
  const Vector y = gaussian_vector(25, rng);
  const IndexSet support{3, 8, 20}, cosupport = random_subset(40, 27, rng);
  const auto ls = joint_constrained_ls(a, y, d, omega, support, cosupport, RecoverySettings{});
  EXPECT_LT((omega.rows_of(cosupport) * ls.x2).norm(), 1e-8);
  for (Index j = 0; j < 50; ++j)
    if (!std::binary_search(support.begin(), support.end(), j)) EXPECT_EQ(ls.alpha[j], 0.0);
  const Vector r = y - a.apply(Vector(d.apply(ls.alpha) + ls.x2));
  // the residual is orthogonal to A D_T and to A null(Omega_Lambda)
  EXPECT_LT((a.apply_columns(d.atoms_of(support)).transpose() * r).norm(), 1e-8 * y.norm());
  const Matrix null = detail::null_space_basis(omega, cosupport).matrix();
  ASSERT_EQ(null.cols(), 3);
  EXPECT_LT((a.apply_columns(null).transpose() * r).norm(), 1e-8 * y.norm());
}

TEST(JointLs, UnifiedResidualNeverExceedsSplit) {
  Rng rng = make_rng(52);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = SynthesisDictionary::dense(gaussian_matrix(30, 50, rng));
    const auto omega = AnalysisOperator::finite_difference(5, 6);
    const auto a = MeasurementOperator::gaussian(20, 30, 10 + rep);
    const Vector y = gaussian_vector(20, rng);
    const IndexSet support = random_subset(50, 4, rng);
    const IndexSet cosupport = random_subset(omega.rows(), 40, rng);
    const Vector prev = gaussian_vector(30, rng);
    const RecoverySettings s;
    const auto joint = joint_constrained_ls(a, y, d, omega, support, cosupport, s);
    const auto split = split_constrained_ls(a, y, d, omega, support, cosupport, prev, s);
    const double rj = (y - a.apply(Vector(d.apply(joint.alpha) + joint.x2))).norm();
    const double rs = (y - a.apply(Vector(d.apply(split.alpha) + split.x2))).norm();
    EXPECT_LE(rj, rs + 1e-9);
  }
}

TEST(CosupportProjection, AnnihilatesRows) {
  Rng rng = make_rng(53);
  const auto omega = AnalysisOperator::finite_difference(6, 6);
  const IndexSet lambda = random_subset(omega.rows(), 45, rng);
  const Vector v = gaussian_vector(36, rng);
  const Vector p = cosupport_projection(omega, lambda, v);
  EXPECT_LT((omega.rows_of(lambda) * p).norm(), 1e-10);
  EXPECT_LT((cosupport_projection(omega, lambda, p) - p).norm(), 1e-10);
}

TEST(Sacosamp, ZeroMeasurements) {
  const auto s = small_image(1);
  const auto a = MeasurementOperator::subsampled_fourier(SamplingMask::variable_density(16, 16, 0.4, 2.0, 1));
  const auto res = run_sacosamp(a, Vector::Zero(a.rows()), s.d, s.omega, 4, 400, LsMode::unified, RecoverySettings{});
  EXPECT_EQ(res.iterations(), 1);
  EXPECT_TRUE(res.x.isZero(1e-12));
  EXPECT_EQ(res.halt, HaltReason::residual_floor);
}

TEST(Sacosamp, FullCosupportIdentityReducesToSynthesis) {
  Rng rng = make_rng(54);
  const Index n = 40, k = 3;
  const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(n, n, rng));
  const Matrix q = qr.householderQ();
  const auto d = std::make_shared<const SynthesisDictionary>(SynthesisDictionary::dense(q));
  const auto omega = AnalysisOperator::dense(Matrix::Identity(n, n));
  const auto a = MeasurementOperator::gaussian(25, n, 6);
  const Vector alpha = sparse_coeffs(n, k, rng);
  const Vector y = a.apply(d->apply(alpha));
  const auto combined = run_sacosamp(a, y, *d, omega, k, n, LsMode::unified, RecoverySettings{});
  const auto synth = run_gcosamp(a, y, UnionModel::synthesis(d, k), RecoverySettings{});
  ASSERT_EQ(static_cast<std::size_t>(combined.iterations()), synth.rows.size());
  for (std::size_t t = 0; t < synth.rows.size(); ++t)
    EXPECT_NEAR(combined.rows[t].base.residual_norm, synth.rows[t].residual_norm, 1e-8);
  EXPECT_TRUE(combined.x2.isZero(0.0));
  EXPECT_LT((combined.x - synth.estimate).norm(), 1e-8);
}

TEST(Sacosamp, IdentityAnalysisRecoversSparseSynthesisSignal) {
  Rng rng = make_rng(55);
  const Index m = 120, n = 60, k = 4;
  const auto d = SynthesisDictionary::dense(gaussian_matrix(n, n, rng));
  const auto omega = AnalysisOperator::dense(Matrix::Identity(n, n));
  const auto a = MeasurementOperator::gaussian(m, n, 7);
  const Vector x = d.apply(sparse_coeffs(n, k, rng));
  const auto res = run_sacosamp(a, a.apply(x), d, omega, k, n, LsMode::unified, RecoverySettings{});
  EXPECT_LT((res.x - x).norm(), 1e-4);
}

TEST(Sacosamp, IterationInvariants) {
  const auto s = small_image(2);
  const auto a = MeasurementOperator::subsampled_fourier(SamplingMask::variable_density(16, 16, 0.5, 2.0, 3));
  const Vector x = s.x1 + s.x2;
  const Index ell = s.omega.rows() - 40;
  for (LsMode mode : {LsMode::unified, LsMode::split}) {
    const auto res = run_sacosamp(a, a.apply(x), s.d, s.omega, 4, ell, mode, RecoverySettings{},
                                  CombinedTruth{s.x1, s.x2});
    for (const auto& row : res.rows) {
      EXPECT_LE(row.support_size, 4);
      EXPECT_EQ(row.cosupport_size, ell);
      ASSERT_TRUE(row.psnr_x2.has_value());
    }
    EXPECT_LT((s.omega.rows_of(res.state.cosupport) * res.x2).norm(), 1e-8 * (1 + res.x2.norm()));
    EXPECT_LT((res.x - res.x1 - res.x2).norm(), 1e-12 * (1 + res.x.norm()));
    EXPECT_LT((res.x1 - s.d.apply(res.state.alpha)).norm(), 1e-9 * (1 + res.x1.norm()));
    Index nnz = 0;
    for (Index j = 0; j < res.state.alpha.size(); ++j) nnz += res.state.alpha[j] != 0.0;
    EXPECT_LE(nnz, 4);
  }
}

TEST(Sacosamp, RejectsBadParameters) {
  const auto s = small_image(3);
  const auto a = MeasurementOperator::identity(256);
  EXPECT_THROW(run_sacosamp(a, Vector::Zero(256), s.d, s.omega, 0, 10, LsMode::unified, RecoverySettings{}),
               ConfigError);
  EXPECT_THROW(run_sacosamp(a, Vector::Zero(256), s.d, s.omega, 2, s.omega.rows() + 1, LsMode::unified,
                            RecoverySettings{}),
               ConfigError);
  EXPECT_THROW(run_sacosamp(a, Vector::Zero(10), s.d, s.omega, 2, 10, LsMode::unified, RecoverySettings{}), ShapeError);
}

TEST(Sacosamp, TraceCsvHasCombinedColumns) {
  const auto s = small_image(4);
  const auto a = MeasurementOperator::subsampled_fourier(SamplingMask::variable_density(16, 16, 0.5, 2.0, 3));
  const auto res = run_sacosamp(a, a.apply(Vector(s.x1 + s.x2)), s.d, s.omega, 4, 400, LsMode::split,
                                RecoverySettings{}, CombinedTruth{s.x1, s.x2});
  std::ostringstream out;
  write_sacosamp_trace_csv(out, res);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,residual_norm,error_norm,intermediate_error_norm,subspace_dim,|T|,|\xCE\x9B|,psnr_x2");
  EXPECT_NE(text.find(std::string("halt,") + to_string(res.halt)), std::string::npos);
}
