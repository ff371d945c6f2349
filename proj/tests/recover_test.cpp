#include "sparsegen/recover.hpp"

#include <gtest/gtest.h>

#include "sparsegen/verify.hpp"

namespace sparsegen {
namespace {

SolverConfig unclipped_config() {
  SolverConfig cfg;
  cfg.clip_lo = -1e30;
  cfg.clip_hi = 1e30;
  return cfg;
}

SensingEnsemble identity_ensemble(Eigen::Index n) {
  SensingEnsemble e;
  e.matrix = DenseMatrix::Identity(n, n);
  e.noise_std = 0;
  return e;
}

TEST(Lasso, IdentityMatrixGivesSoftThreshold) {
  const Eigen::Index n = 12;
  const auto e = identity_ensemble(n);
  SeededRng rng(1, 0);
  Signal y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.uniform();  // inside the clip box
  const double mu = 0.4;
  const auto result = lasso(e, y, mu, 500);
  const Signal expected = soft_threshold(y, mu / 2);
  EXPECT_LT((result.x_hat - expected).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lasso, ZeroMeasurementsGiveZero) {
  const auto e = gaussian_ensemble(10, 30, 0, 3);
  const auto result = lasso(e, Measurements::Zero(10), 0.1, 200);
  EXPECT_DOUBLE_EQ(result.x_hat.cwiseAbs().maxCoeff(), 0.0);
}

// Brute force over all supports with least squares as the oracle for an
// exactly 1-sparse signal.
TEST(Lasso, RecoversOneSparseSignal) {
  const Eigen::Index n = 6, m = 4;
  const auto e = gaussian_ensemble(m, n, 0, 11);
  Signal x_star = Signal::Zero(n);
  x_star[2] = 0.8;
  const Measurements y = sense(e, x_star, 0);

  Eigen::Index oracle_support = -1;
  double oracle_value = 0, best_residual = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double coef = e.matrix.col(i).dot(y) / e.matrix.col(i).squaredNorm();
    const double residual = (e.matrix.col(i) * coef - y).norm();
    if (residual < best_residual) {
      best_residual = residual;
      oracle_support = i;
      oracle_value = coef;
    }
  }
  ASSERT_EQ(oracle_support, 2);
  ASSERT_NEAR(oracle_value, 0.8, 1e-9);

  const auto result = lasso(e, y, 1e-4, 4000);
  EXPECT_NEAR(result.x_hat[2], 0.8, 1e-3);
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != 2) EXPECT_NEAR(result.x_hat[i], 0.0, 1e-3);
}

TEST(Lasso, RejectsBadArguments) {
  const auto e = gaussian_ensemble(4, 8, 0, 0);
  EXPECT_THROW(lasso(e, Measurements::Zero(3), 0.1), std::invalid_argument);
  EXPECT_THROW(lasso(e, Measurements::Zero(4), 0.0), std::invalid_argument);
}

TEST(Lasso, NanMeasurementsRaiseNumericError) {
  const auto e = gaussian_ensemble(4, 8, 0, 0);
  Measurements y = Measurements::Zero(4);
  y[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(lasso(e, y, 0.1, 10), NumericError);
}

TEST(GenRecover, ZeroGeneratorReturnsOrigin) {
  const auto e = gaussian_ensemble(8, 20, 0, 5);
  SeededRng rng(5, 1);
  const Measurements y = rng.gaussian_vector(8);
  auto cfg = unclipped_config();
  cfg.iterations = 50;
  cfg.restarts = 3;
  const auto result = gen_recover(e, y, zero_generator(4, 20), cfg);
  EXPECT_DOUBLE_EQ(result.x_hat.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(result.measurement_error, y.norm(), 1e-12);
}

// Well-conditioned affine generator: normal equations give the exact latent,
// so the measurement error should be driven to ~0.
TEST(GenRecover, AffineGeneratorSolvesLeastSquares) {
  const Eigen::Index k = 4, n = 30, m = 12;
  SeededRng rng(6, 0);
  Eigen::MatrixXd w(n, k);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.gaussian();
  const auto g = affine_generator(w, Eigen::VectorXd::Zero(n));
  const auto e = gaussian_ensemble(m, n, 0, 7);
  const LatentCode z_star = rng.gaussian_vector(k);
  const Measurements y = e.matrix * forward(g, z_star);

  const Eigen::MatrixXd aw = e.matrix * w;
  const LatentCode z_oracle = (aw.transpose() * aw).ldlt().solve(aw.transpose() * y);
  ASSERT_LT((aw * z_oracle - y).norm(), 1e-10 * y.norm());

  auto cfg = unclipped_config();
  cfg.iterations = 2000;
  cfg.restarts = 2;
  cfg.step_size = 0.05;
  cfg.seed = 1;
  const auto result = gen_recover(e, y, g, cfg);
  EXPECT_LE(result.measurement_error, 1e-4 * y.norm());
}

TEST(GenRecover, DeterministicGivenSeedAndConfig) {
  const auto e = gaussian_ensemble(10, 25, 0, 8);
  const auto g = random_relu_generator({3, 12, 25}, 2);
  SeededRng rng(9, 0);
  const Measurements y = rng.gaussian_vector(10);
  auto cfg = unclipped_config();
  cfg.iterations = 120;
  cfg.restarts = 4;
  cfg.seed = 77;
  const auto a = gen_recover(e, y, g, cfg);
  const auto b = gen_recover(e, y, g, cfg);
  EXPECT_TRUE(a.x_hat == b.x_hat);
  EXPECT_TRUE(*a.z_hat == *b.z_hat);
  EXPECT_EQ(a.best_restart, b.best_restart);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
}

TEST(GenRecover, ErrorNonincreasingInRestartCount) {
  const auto e = gaussian_ensemble(15, 40, 0, 12);
  const auto g = random_relu_generator({4, 16, 40}, 3);
  SeededRng rng(13, 0);
  const Measurements y = e.matrix * forward(g, rng.gaussian_vector(4));
  auto cfg = unclipped_config();
  cfg.iterations = 150;
  cfg.seed = 5;
  double previous = std::numeric_limits<double>::infinity();
  for (long restarts = 1; restarts <= 5; ++restarts) {
    cfg.restarts = restarts;
    const auto result = gen_recover(e, y, g, cfg);
    EXPECT_LE(result.measurement_error, previous + 1e-12);
    EXPECT_NEAR(result.measurement_error, (e.matrix * result.x_hat - y).norm(), 1e-9);
    previous = result.measurement_error;
  }
}

// With a zero generator the joint objective equals lambda times the LASSO
// Lagrangian with mu = 1/lambda at every point, not just at the optimum.
TEST(SparseGen, ZeroGeneratorObjectiveIdentityPointwise) {
  SeededRng rng(101, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index n = 30, m = 18;
    const auto e = gaussian_ensemble(m, n, 0, 300 + trial);
    const Signal nu = rng.gaussian_vector(n);
    const Measurements y = rng.gaussian_vector(m);
    const double lambda = std::exp(4.0 * (rng.uniform() - 0.5));
    const Signal gz = Signal::Zero(n);
    const double joint = detail::joint_objective(e, y, gz, identity_basis(n), nu, lambda);
    const double lasso_lagrangian =
        (e.matrix * nu - y).squaredNorm() + (1.0 / lambda) * nu.lpNorm<1>();
    EXPECT_NEAR(joint, lambda * lasso_lagrangian, 1e-12 * std::abs(joint));
  }
}

// With a zero generator and identity basis the joint objective is the LASSO
// Lagrangian scaled by lambda (mu = 1/lambda).
TEST(SparseGen, ZeroGeneratorMatchesLassoObjective) {
  const double lambda = 100.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::Index n = 60, m = 30;
    const auto e = gaussian_ensemble(m, n, 0, seed);
    SeededRng rng(seed, 40);
    Signal x_star = Signal::Zero(n);
    for (int s = 0; s < 6; ++s) x_star[rng.below(n)] = rng.uniform();
    const Measurements y = sense(e, x_star, 0);

    const auto lasso_result = lasso(e, y, 1.0 / lambda, 1500, -1e30, 1e30);
    const double lasso_obj = (e.matrix * (*lasso_result.nu_hat) - y).squaredNorm() +
                             (1.0 / lambda) * lasso_result.nu_hat->lpNorm<1>();

    auto cfg = unclipped_config();
    cfg.lambda = lambda;
    cfg.iterations = 1500;
    cfg.restarts = 1;
    cfg.mode = SolverMode::alternating_prox;
    cfg.seed = seed;
    const auto sg = sparse_gen(e, y, zero_generator(4, n), cfg);
    const double sg_obj = sg.objective_trace.back();
    EXPECT_NEAR(sg_obj, lambda * lasso_obj, 0.01 * lambda * lasso_obj);
  }
}

TEST(SparseGen, IdentityMatrixGivesSoftThresholdedDeviation) {
  const Eigen::Index n = 10;
  const auto e = identity_ensemble(n);
  SeededRng rng(3, 2);
  Signal y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = rng.uniform();
  auto cfg = unclipped_config();
  cfg.lambda = 100;
  cfg.iterations = 400;
  cfg.restarts = 1;
  cfg.mode = SolverMode::alternating_prox;
  const auto result = sparse_gen(e, y, zero_generator(2, n), cfg);
  const Signal expected = soft_threshold(y, 1.0 / (2.0 * cfg.lambda));
  EXPECT_LT((*result.nu_hat - expected).cwiseAbs().maxCoeff(), 1e-6);
}

// Full-measurement regime: the joint model recovers an off-range signal that
// the pure generative path cannot represent.
TEST(SparseGen, ExactRecoveryAtFullMeasurements) {
  const Eigen::Index k = 6, n = 40;
  const auto g = random_relu_generator({k, 30, n}, 17);
  SeededRng rng(18, 0);
  const LatentCode z_star = rng.gaussian_vector(k);
  Signal nu_star = Signal::Zero(n);
  for (int s = 0; s < 4; ++s)
    nu_star[rng.below(n)] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.5 + rng.uniform());
  const Signal x_star = forward(g, z_star) + nu_star;
  const auto e = gaussian_ensemble(n, n, 0, 19);
  const Measurements y = e.matrix * x_star;

  auto cfg = unclipped_config();
  cfg.lambda = 100;
  cfg.iterations = 1500;
  cfg.restarts = 5;
  cfg.step_size = 0.03;
  cfg.mode = SolverMode::alternating_prox;
  cfg.seed = 4;
  const auto result = sparse_gen(e, y, g, cfg);
  EXPECT_LE((result.x_hat - x_star).norm(), 1e-2 * x_star.norm());

  const auto gen_result = gen_recover(e, y, g, cfg);
  EXPECT_GT((gen_result.x_hat - x_star).norm(), 3 * (result.x_hat - x_star).norm());
}

// A proximal polish warm-started from the joint solution must not lose
// ground: the prox steps descend and the final objective can only improve.
TEST(SparseGen, WarmStartPolishDoesNotRegress) {
  const Eigen::Index k = 5, n = 36;
  const auto g = random_relu_generator({k, 24, n}, 71);
  SeededRng rng(72, 0);
  const Signal x_star = forward(g, rng.gaussian_vector(k));
  const auto e = gaussian_ensemble(24, n, 0, 73);
  const Measurements y = e.matrix * x_star;

  auto cfg = unclipped_config();
  cfg.iterations = 400;
  cfg.restarts = 3;
  cfg.seed = 9;
  cfg.mode = SolverMode::joint_subgradient;
  const auto joint = sparse_gen(e, y, g, cfg);

  SolverConfig polish = cfg;
  polish.mode = SolverMode::alternating_prox;
  polish.iterations = 200;
  polish.restarts = 1;
  polish.z_init = joint.z_hat;
  polish.nu_init = joint.nu_hat;
  const auto refined = sparse_gen(e, y, g, polish);
  EXPECT_LE(refined.objective_trace.back(), joint.objective_trace.back() + 1e-9);
  EXPECT_NEAR(refined.objective_trace.front(), joint.objective_trace.back(), 1e-9);
}

// Freezing nu at zero with lambda = 1 must reproduce the generative-only
// trajectory bit for bit: both paths share the restart machinery.
TEST(SparseGen, FrozenNuReproducesGenRecoverTrajectory) {
  const auto e = gaussian_ensemble(12, 30, 0, 23);
  const auto g = random_relu_generator({4, 14, 30}, 29);
  SeededRng rng(31, 0);
  const Measurements y = rng.gaussian_vector(12);
  auto cfg = unclipped_config();
  cfg.iterations = 200;
  cfg.restarts = 3;
  cfg.seed = 11;
  cfg.lambda = 1.0;
  cfg.freeze_nu = true;
  cfg.mode = SolverMode::joint_subgradient;
  const auto frozen = sparse_gen(e, y, g, identity_basis(30), cfg);
  const auto gen = gen_recover(e, y, g, cfg);
  ASSERT_EQ(frozen.objective_trace.size(), gen.objective_trace.size());
  for (std::size_t i = 0; i < frozen.objective_trace.size(); ++i)
    ASSERT_EQ(frozen.objective_trace[i], gen.objective_trace[i]);
  EXPECT_TRUE(frozen.x_hat == gen.x_hat);
  EXPECT_TRUE(*frozen.z_hat == *gen.z_hat);
}

// Each proximal step on nu cannot increase the joint objective at fixed z.
TEST(SparseGen, ProxStepDescendsObjective) {
  SeededRng rng(37, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 25, m = 15;
    const auto e = gaussian_ensemble(m, n, 0, 100 + trial);
    const auto basis = trial % 2 == 0 ? identity_basis(n) : dct_basis(n);
    const Signal gz = rng.gaussian_vector(n);
    const Measurements y = rng.gaussian_vector(m);
    Signal nu = rng.gaussian_vector(n);
    const double lambda = 50;
    const double eta = 1.0 / (2.0 * lambda * top_eigenvalue_ata(e.matrix) * 1.02);
    for (int step = 0; step < 5; ++step) {
      const double before = detail::joint_objective(e, y, gz, basis, nu, lambda);
      nu = detail::prox_nu_step(e, y, gz, basis, nu, eta, lambda);
      const double after = detail::joint_objective(e, y, gz, basis, nu, lambda);
      ASSERT_LE(after, before + 1e-10);
    }
  }
}

TEST(SparseGen, JointModeFinalObjectiveBelowInitial) {
  const auto e = gaussian_ensemble(20, 50, 0, 41);
  const auto g = random_relu_generator({5, 20, 50}, 43);
  SeededRng rng(47, 0);
  const Measurements y = rng.gaussian_vector(20);
  auto cfg = unclipped_config();
  cfg.iterations = 300;
  cfg.restarts = 2;
  cfg.mode = SolverMode::joint_subgradient;
  const auto result = sparse_gen(e, y, g, cfg);
  EXPECT_LT(result.objective_trace.back(), result.objective_trace.front());
}

TEST(SparseGen, AlternatingProxTraceNonincreasingWithFrozenZ) {
  // With a zero generator the z step is inert, so the whole trace must be
  // monotone under the prox updates.
  const auto e = gaussian_ensemble(20, 50, 0, 53);
  SeededRng rng(59, 0);
  const Measurements y = rng.gaussian_vector(20);
  auto cfg = unclipped_config();
  cfg.iterations = 300;
  cfg.restarts = 1;
  cfg.mode = SolverMode::alternating_prox;
  const auto result = sparse_gen(e, y, zero_generator(3, 50), cfg);
  for (std::size_t i = 1; i < result.objective_trace.size(); ++i)
    ASSERT_LE(result.objective_trace[i], result.objective_trace[i - 1] + 1e-10);
}

TEST(SparseGen, RejectsBadInputs) {
  const auto e = gaussian_ensemble(6, 12, 0, 61);
  const auto g = zero_generator(2, 12);
  SolverConfig cfg;
  EXPECT_THROW(sparse_gen(e, Measurements::Zero(5), g, cfg), std::invalid_argument);
  EXPECT_THROW(sparse_gen(e, Measurements::Zero(6), zero_generator(2, 10), cfg),
               std::invalid_argument);
  cfg.lambda = -1;
  EXPECT_THROW(sparse_gen(e, Measurements::Zero(6), g, cfg), std::invalid_argument);
}

TEST(OracleDecode, ExactOneSparseRecovery) {
  const Eigen::Index n = 8, m = 6;
  const auto e = gaussian_ensemble(m, n, 0, 67);
  Signal x_star = Signal::Zero(n);
  x_star[5] = 1.3;
  const Measurements y = e.matrix * x_star;
  const Signal decoded = oracle_decode(e, y, zero_generator(2, n), 1, 0);
  EXPECT_LT((decoded - x_star).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(OracleDecode, SparsityZeroCases) {
  const auto e = gaussian_ensemble(5, 8, 0, 71);
  const auto g = zero_generator(2, 8);
  const Signal decoded = oracle_decode(e, Measurements::Zero(5), g, 0, 0.1);
  EXPECT_DOUBLE_EQ(decoded.cwiseAbs().maxCoeff(), 0.0);
  SeededRng rng(73, 0);
  const Measurements y = rng.gaussian_vector(5);
  EXPECT_THROW(oracle_decode(e, y, g, 0, 1e-6), std::domain_error);
}

TEST(OracleDecode, TwoSparseRecoveryUnderVerifiedRip) {
  const Eigen::Index n = 6, m = 5;
  const auto e = gaussian_ensemble(m, n, 0, 79);
  // Requires an empirically well-conditioned matrix on 4-sparse supports.
  ASSERT_LT(exhaustive_rip_alpha(e.matrix, 2), 0.9);
  Signal x_star = Signal::Zero(n);
  x_star[1] = 0.9;
  x_star[4] = -0.7;
  const Measurements y = e.matrix * x_star;
  const Signal decoded = oracle_decode(e, y, zero_generator(2, n), 2, 0);
  EXPECT_LT((decoded - x_star).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(OracleDecode, AffineGeneratorUsesLatentGrid) {
  const Eigen::Index n = 8, m = 6, k = 1;
  SeededRng rng(83, 0);
  Eigen::MatrixXd w(n, k);
  for (Eigen::Index i = 0; i < n; ++i) w(i, 0) = rng.gaussian();
  const auto g = affine_generator(w, Eigen::VectorXd::Zero(n));
  const auto e = gaussian_ensemble(m, n, 0, 89);
  LatentCode z_star(1);
  z_star << 1.5;  // on the 21-point grid over [-3, 3]
  Signal x_star = forward(g, z_star);
  x_star[3] += 0.6;
  const Measurements y = e.matrix * x_star;
  const Signal decoded = oracle_decode(e, y, g, 1, 0);
  EXPECT_LT((decoded - x_star).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(OracleDecode, EnforcesScaleLimits) {
  const auto e = gaussian_ensemble(8, 16, 0, 91);
  EXPECT_THROW(oracle_decode(e, Measurements::Zero(8), zero_generator(2, 16), 1, 0),
               std::invalid_argument);
  const auto e2 = gaussian_ensemble(8, 10, 0, 93);
  EXPECT_THROW(oracle_decode(e2, Measurements::Zero(8), random_relu_generator({2, 4, 10}, 0), 1, 0),
               std::invalid_argument);
}

}  // namespace
}  // namespace sparsegen
