#include "pfednet/client.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "pfednet/error.hpp"

namespace pfednet {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "logistic") return LossKind::kLogistic;
  if (name == "ridge") return LossKind::kRidge;
  throw_invalid("unknown loss kind '" + std::string(name) + "' (expected logistic or ridge)");
}

std::string_view loss_kind_name(LossKind kind) {
  return kind == LossKind::kLogistic ? "logistic" : "ridge";
}

namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(-m)) without overflow.
double logistic_loss(double margin) {
  if (margin > 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

void check_batch(const Vector& w, const LocalDataset& data, std::span<const int> batch) {
  if (batch.empty()) throw_invalid("empty batch");
  if (w.size() != data.dim()) {
    throw_invalid("model has length " + std::to_string(w.size()) + " but data has " +
                  std::to_string(data.dim()) + " features");
  }
  for (int i : batch) {
    if (i < 0 || i >= data.size()) throw_invalid("batch index out of range");
  }
}

std::vector<int> all_rows(const LocalDataset& data) {
  std::vector<int> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

double local_loss(const Vector& w, const LocalDataset& data, std::span<const int> batch,
                  LossKind kind) {
  check_batch(w, data, batch);
  double total = 0.0;
  for (int i : batch) {
    const double score = data.features.row(i).dot(w);
    if (kind == LossKind::kLogistic) {
      total += logistic_loss(data.labels[i] * score);
    } else {
      const double residual = score - data.labels[i];
      total += 0.5 * residual * residual;
    }
  }
  return total / static_cast<double>(batch.size());
}

double local_loss(const Vector& w, const LocalDataset& data, LossKind kind) {
  return local_loss(w, data, all_rows(data), kind);
}

Vector local_gradient(const Vector& w, const LocalDataset& data, std::span<const int> batch,
                      LossKind kind) {
  check_batch(w, data, batch);
  Vector grad = Vector::Zero(w.size());
  for (int i : batch) {
    const double score = data.features.row(i).dot(w);
    double coeff;
    if (kind == LossKind::kLogistic) {
      const double y = data.labels[i];
      coeff = -y * sigmoid(-y * score);
    } else {
      coeff = score - data.labels[i];
    }
    grad.noalias() += coeff * data.features.row(i).transpose();
  }
  return grad / static_cast<double>(batch.size());
}

Vector local_gradient(const Vector& w, const LocalDataset& data, LossKind kind) {
  return local_gradient(w, data, all_rows(data), kind);
}

void CerConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw_invalid("cer gamma must be >= 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw_invalid("cer rho must be > 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw_invalid("eta must be > 0");
  if (inner_iters < 1) throw_invalid("cer inner_iters must be >= 1");
}

namespace difference_operator {

Vector apply(const Vector& v) {
  const auto d = v.size();
  Vector out(d);
  if (d == 0) return out;
  out.head(d - 1) = v.head(d - 1) - v.tail(d - 1);
  out[d - 1] = v[d - 1];
  return out;
}

Vector apply_transpose(const Vector& v) {
  const auto d = v.size();
  Vector out(d);
  if (d == 0) return out;
  out[0] = v[0];
  out.tail(d - 1) = v.tail(d - 1) - v.head(d - 1);
  return out;
}

Matrix dense(int d) {
  Matrix l = Matrix::Identity(d, d);
  for (int i = 0; i + 1 < d; ++i) l(i, i + 1) = -1.0;
  return l;
}

}  // namespace difference_operator

CerWorkspace::CerWorkspace(int d) {
  if (d < 1) throw_invalid("CER dimension must be positive");
  const Matrix l = difference_operator::dense(d);
  const Matrix gram = l.transpose() * l;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  if (solver.info() != Eigen::Success) throw_numeric("eigendecomposition of L^T L failed");
  eigvecs_ = solver.eigenvectors();
  eigvals_ = solver.eigenvalues();
  if (eigvals_.minCoeff() <= 0.0) throw_numeric("L^T L is not positive definite");
}

std::shared_ptr<const CerWorkspace> CerWorkspace::for_dimension(int d) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const CerWorkspace>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[d];
  if (!slot) slot = std::make_shared<const CerWorkspace>(d);
  return slot;
}

Vector cer_r_step(const Vector& y_cur, const Vector& y_anchor, const Vector& omega, double rho) {
  const Vector u = difference_operator::apply(y_cur - y_anchor) - omega / rho;
  const double thr = 1.0 / rho;
  return (u.array() - thr).max(0.0) - (-u.array() - thr).max(0.0);
}

Vector cer_y_step(const CerWorkspace& ws, const Vector& r_next, const Vector& y_anchor,
                  const Vector& omega, const Vector& g, double gamma, double eta, double rho) {
  const double c = rho * eta * gamma;
  Vector rhs = y_anchor - eta * g;
  // P P^T = I, so the regularizer-free step needs no basis change.
  if (c == 0.0) return rhs;
  rhs += c * difference_operator::apply_transpose(
                 r_next + difference_operator::apply(y_anchor) + omega / rho);
  const Vector coeffs = ws.eigvecs().transpose() * rhs;
  return ws.eigvecs() * (coeffs.array() / (c * ws.eigvals().array() + 1.0)).matrix();
}

Vector cer_omega_step(const Vector& omega, const Vector& r_next, const Vector& y_next,
                      const Vector& y_anchor, double rho) {
  return omega + rho * (r_next - difference_operator::apply(y_next - y_anchor));
}

CerResult cer_solve(const Vector& y_anchor, const Vector& g, const CerConfig& cfg,
                    const CerWorkspace& ws) {
  cfg.validate();
  const auto d = y_anchor.size();
  if (g.size() != d || ws.dim() != d) {
    throw_invalid("CER dimension mismatch: anchor " + std::to_string(d) + ", gradient " +
                  std::to_string(g.size()) + ", workspace " + std::to_string(ws.dim()));
  }
  CerResult res;
  res.r = Vector::Zero(d);
  res.v = y_anchor;
  res.omega = Vector::Zero(d);
  for (int j = 0; j < cfg.inner_iters; ++j) {
    res.r = cer_r_step(res.v, y_anchor, res.omega, cfg.rho);
    res.v = cer_y_step(ws, res.r, y_anchor, res.omega, g, cfg.gamma, cfg.eta, cfg.rho);
    res.omega = cer_omega_step(res.omega, res.r, res.v, y_anchor, cfg.rho);
  }
  if (!res.v.allFinite() || !res.omega.allFinite()) throw_numeric("CER diverged");
  res.delta = (y_anchor - res.v) / cfg.eta;
  res.primal_residual = (res.r - difference_operator::apply(res.v - y_anchor)).norm();
  return res;
}

Vector cer_update(const Vector& y_anchor, const Vector& g, const CerConfig& cfg) {
  const auto ws = CerWorkspace::for_dimension(static_cast<int>(y_anchor.size()));
  return cer_solve(y_anchor, g, cfg, *ws).delta;
}

double cer_objective(const Vector& v, const Vector& y_anchor, const Vector& g, double gamma,
                     double eta) {
  const Vector diff = v - y_anchor;
  return g.dot(v) + gamma * difference_operator::apply(diff).lpNorm<1>() +
         diff.squaredNorm() / (2.0 * eta);
}

}  // namespace pfednet
