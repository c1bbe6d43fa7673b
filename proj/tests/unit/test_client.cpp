#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "pfednet/client.hpp"
#include "pfednet/error.hpp"

using namespace pfednet;
namespace t = pfednet::testing;

namespace {

Vector random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

LocalDataset random_dataset(int n, int d, LossKind kind, std::mt19937_64& rng) {
  LocalDataset data;
  data.features.resize(n, d);
  data.labels.resize(n);
  std::normal_distribution<double> normal;
  for (int i = 0; i < data.features.size(); ++i) data.features.data()[i] = normal(rng);
  for (int i = 0; i < n; ++i) {
    data.labels[i] = kind == LossKind::kLogistic ? (rng() % 2 ? 1.0 : -1.0) : normal(rng);
  }
  return data;
}

double rel_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

// Gradient of the scaled augmented Lagrangian in y, multiplied by eta*gamma.
Vector y_stationarity(const Vector& y, const Vector& r, const Vector& ya, const Vector& omega,
                      const Vector& g, double gamma, double eta, double rho) {
  const Matrix l = t::difference_matrix(static_cast<int>(y.size()));
  return y - ya + eta * g - eta * gamma * l.transpose() * omega -
         rho * eta * gamma * l.transpose() * (r - l * (y - ya));
}

}  // namespace

TEST(LocalGradient, LogisticAtZero) {
  LocalDataset data;
  data.features = (Matrix(1, 2) << 1.0, 2.0).finished();
  data.labels = (Vector(1) << 1.0).finished();
  const Vector g = local_gradient(Vector::Zero(2), data, LossKind::kLogistic);
  EXPECT_NEAR(g[0], -0.5, 1e-15);
  EXPECT_NEAR(g[1], -1.0, 1e-15);
}

TEST(LocalGradient, SaturatedMarginIsTiny) {
  LocalDataset data;
  data.features = (Matrix(1, 1) << 1.0).finished();
  data.labels = (Vector(1) << 1.0).finished();
  const Vector g = local_gradient((Vector(1) << 50.0).finished(), data, LossKind::kLogistic);
  EXPECT_LT(g.norm(), 1e-20);
  EXPECT_TRUE(std::isfinite(local_loss((Vector(1) << -800.0).finished(), data, LossKind::kLogistic)));
}

TEST(LocalGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (LossKind kind : {LossKind::kLogistic, LossKind::kRidge}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto data = random_dataset(20, 5, kind, rng);
      const std::vector<int> batch = {0, 3, 3, 7, 11, 12, 18, 19};
      const Vector w = random_vector(5, rng);
      const Vector fd = t::finite_difference(
          [&](const Vector& v) { return local_loss(v, data, batch, kind); }, w, 1e-6);
      EXPECT_LT(rel_error(local_gradient(w, data, batch, kind), fd), 1e-5);
    }
  }
}

TEST(LocalGradient, RejectsBadInput) {
  std::mt19937_64 rng(1);
  const auto data = random_dataset(4, 3, LossKind::kLogistic, rng);
  EXPECT_THROW(local_gradient(Vector::Zero(3), data, std::vector<int>{}, LossKind::kLogistic), Error);
  EXPECT_THROW(local_gradient(Vector::Zero(2), data, LossKind::kLogistic), Error);
  EXPECT_THROW(local_gradient(Vector::Zero(3), data, std::vector<int>{4}, LossKind::kLogistic), Error);
  EXPECT_THROW(parse_loss_kind("hinge"), Error);
  EXPECT_EQ(parse_loss_kind("ridge"), LossKind::kRidge);
  EXPECT_EQ(loss_kind_name(LossKind::kLogistic), "logistic");
}

TEST(DifferenceOperator, MatchesDenseMatrix) {
  std::mt19937_64 rng(2);
  for (int d : {1, 2, 5, 17}) {
    const Matrix l = t::difference_matrix(d);
    EXPECT_EQ(difference_operator::dense(d), l);
    const Vector v = random_vector(d, rng);
    EXPECT_LT((difference_operator::apply(v) - l * v).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((difference_operator::apply_transpose(v) - l.transpose() * v).cwiseAbs().maxCoeff(),
              1e-15);
    Eigen::JacobiSVD<Matrix> svd(l);
    EXPECT_GT(svd.singularValues().minCoeff(), 0.0);
  }
}

TEST(CerWorkspace, EigendecompositionReconstructsGram) {
  for (int d : {1, 3, 10, 100}) {
    const CerWorkspace ws(d);
    const Matrix l = t::difference_matrix(d);
    const Matrix& p = ws.eigvecs();
    EXPECT_LT((p * ws.eigvals().asDiagonal() * p.transpose() - l.transpose() * l).cwiseAbs().maxCoeff(),
              1e-10);
    EXPECT_LT((p.transpose() * p - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(ws.eigvals().minCoeff(), 0.0);
  }
  EXPECT_EQ(CerWorkspace::for_dimension(7).get(), CerWorkspace::for_dimension(7).get());
  EXPECT_THROW(CerWorkspace(0), Error);
}

TEST(CerRStep, ZeroInputsGiveZero) {
  const Vector y = (Vector(3) << 1, 2, 3).finished();
  EXPECT_TRUE(cer_r_step(y, y, Vector::Zero(3), 1.0).isZero());
}

TEST(CerRStep, ScalarSoftThreshold) {
  const Vector zero = Vector::Zero(1);
  EXPECT_DOUBLE_EQ(cer_r_step((Vector(1) << 3.0).finished(), zero, zero, 1.0)[0], 2.0);
  EXPECT_DOUBLE_EQ(cer_r_step((Vector(1) << -3.0).finished(), zero, zero, 1.0)[0], -2.0);
  EXPECT_DOUBLE_EQ(cer_r_step((Vector(1) << 0.4).finished(), zero, zero, 1.0)[0], 0.0);
}

TEST(CerRStep, MatchesNumericMinimizer) {
  // min ||r||_1 + rho/2 ||r - (L(y - ya) - omega/rho)||^2 is separable.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const double rho = 0.2 + 2.0 * (rng() % 1000) / 1000.0;
    const Vector y = random_vector(4, rng, 2.0), ya = random_vector(4, rng, 2.0);
    const Vector omega = random_vector(4, rng);
    const Vector u = t::difference_matrix(4) * (y - ya) - omega / rho;
    const Vector r = cer_r_step(y, ya, omega, rho);
    for (int i = 0; i < 4; ++i) {
      const double ref = t::golden_min(
          [&](double s) { return std::abs(s) + 0.5 * rho * (s - u[i]) * (s - u[i]); }, -50, 50);
      EXPECT_NEAR(r[i], ref, 1e-6);
    }
  }
}

TEST(CerYStep, NoRegularizationIsGradientStep) {
  std::mt19937_64 rng(12);
  const Vector ya = random_vector(6, rng), g = random_vector(6, rng);
  const CerWorkspace ws(6);
  const Vector y = cer_y_step(ws, random_vector(6, rng), ya, random_vector(6, rng), g, 0.0, 0.3, 1.0);
  EXPECT_LT((y - (ya - 0.3 * g)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CerYStep, ScalarClosedForm) {
  const double gamma = 2.0, eta = 0.5, rho = 1.5;
  const double ya = 0.7, g = -1.2, r = 0.3, omega = 0.4;
  const double c = rho * eta * gamma;
  const double expected = (c * (r + ya + omega / rho) + ya - eta * g) / (c + 1.0);
  const CerWorkspace ws(1);
  const Vector y = cer_y_step(ws, Vector::Constant(1, r), Vector::Constant(1, ya),
                              Vector::Constant(1, omega), Vector::Constant(1, g), gamma, eta, rho);
  EXPECT_NEAR(y[0], expected, 1e-14);
}

TEST(CerYStep, StationarityResidual) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 5;
    const CerWorkspace ws(d);
    const double gamma = 0.1 + (rng() % 100) / 10.0, eta = 0.05 + (rng() % 100) / 100.0;
    const double rho = 0.1 + (rng() % 100) / 20.0;
    const Vector r = random_vector(d, rng), ya = random_vector(d, rng);
    const Vector omega = random_vector(d, rng), g = random_vector(d, rng);
    const Vector y = cer_y_step(ws, r, ya, omega, g, gamma, eta, rho);
    EXPECT_LT(y_stationarity(y, r, ya, omega, g, gamma, eta, rho).norm(), 1e-8);
  }
}

TEST(CerOmegaStep, DualUpdate) {
  const Vector ya = (Vector(2) << 1.0, -1.0).finished();
  const Vector y = (Vector(2) << 2.0, 0.5).finished();
  const Vector omega = (Vector(2) << 0.3, -0.2).finished();
  const Vector feasible = t::difference_matrix(2) * (y - ya);
  EXPECT_LT((cer_omega_step(omega, feasible, y, ya, 4.0) - omega).cwiseAbs().maxCoeff(), 1e-15);
  const Vector shifted = cer_omega_step(Vector::Zero(2), feasible + Vector::Ones(2), y, ya, 1.0);
  EXPECT_LT((shifted - Vector::Ones(2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CerSolve, PrimalResidualVanishes) {
  std::mt19937_64 rng(14);
  CerConfig cfg;
  cfg.gamma = 0.5;
  cfg.eta = 0.5;
  cfg.inner_iters = 200;
  const CerWorkspace ws(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto res = cer_solve(random_vector(4, rng), random_vector(4, rng), cfg, ws);
    EXPECT_LT(res.primal_residual, 1e-6);
  }
}

TEST(CerUpdate, NoRegularizationReturnsGradient) {
  std::mt19937_64 rng(15);
  for (int iters : {1, 7, 200}) {
    CerConfig cfg;
    cfg.gamma = 0.0;
    cfg.inner_iters = iters;
    const Vector ya = random_vector(9, rng), g = random_vector(9, rng, 10.0);
    EXPECT_LT((cer_update(ya, g, cfg) - g).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(CerUpdate, HugeRegularizationSuppressesUpdate) {
  std::mt19937_64 rng(16);
  CerConfig cfg;
  cfg.gamma = 1e6;
  cfg.eta = 0.1;
  cfg.inner_iters = 100;
  const Vector delta = cer_update(random_vector(8, rng), random_vector(8, rng), cfg);
  EXPECT_LT(delta.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(CerUpdate, MatchesEnumerationOracle) {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 20; ++trial) {
    CerConfig cfg;
    cfg.gamma = 0.05 + (rng() % 100) / 50.0;
    cfg.eta = 0.1 + (rng() % 100) / 100.0;
    cfg.inner_iters = 500;
    const Vector ya = random_vector(3, rng), g = random_vector(3, rng, 2.0);
    const Vector v = cer_solve(ya, g, cfg, CerWorkspace(3)).v;
    const Vector v_ref = t::cer_enumeration_oracle(ya, g, cfg.gamma, cfg.eta);
    const double f = t::cer_objective_dense(v, ya, g, cfg.gamma, cfg.eta);
    const double f_ref = t::cer_objective_dense(v_ref, ya, g, cfg.gamma, cfg.eta);
    EXPECT_LT(std::abs(f - f_ref), 1e-5) << "trial " << trial;
    EXPECT_NEAR(cer_objective(v, ya, g, cfg.gamma, cfg.eta), f, 1e-12);
  }
}

TEST(CerUpdate, ObjectiveBeatsNaiveCandidates) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    CerConfig cfg;
    cfg.gamma = 0.1 + (rng() % 100) / 10.0;
    cfg.eta = 0.1;
    cfg.inner_iters = 300;
    const Vector ya = random_vector(12, rng), g = random_vector(12, rng, 5.0);
    const Vector v = ya - cfg.eta * cer_update(ya, g, cfg);
    const double f = cer_objective(v, ya, g, cfg.gamma, cfg.eta);
    EXPECT_LE(f, cer_objective(ya, ya, g, cfg.gamma, cfg.eta) + 1e-9);
    EXPECT_LE(f, cer_objective(ya - cfg.eta * g, ya, g, cfg.gamma, cfg.eta) + 1e-9);
  }
}

TEST(CerUpdate, DifferentialSparsityGrowsWithGamma) {
  const auto inst = t::sparsity_instance();
  const Matrix l = t::difference_matrix(100);
  int previous = 101;
  for (double gamma : {0.0, 50.0, 100.0, 500.0, 1000.0}) {
    CerConfig cfg;
    cfg.gamma = gamma;
    cfg.eta = inst.eta;
    cfg.inner_iters = 500;
    const Vector delta = cer_update(inst.y_anchor, inst.g, cfg);
    const int nnz = t::count_nonzero(l * delta, 1e-6);
    EXPECT_LE(nnz, previous) << "gamma " << gamma;
    previous = nnz;
  }
  EXPECT_LT(previous, 100);
}

TEST(CerConfig, Validation) {
  CerConfig cfg;
  cfg.gamma = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.rho = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.inner_iters = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  EXPECT_THROW(cer_update(Vector::Zero(3), Vector::Zero(4), cfg), Error);
}
