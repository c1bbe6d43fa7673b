#pragma once

#include <memory>
#include <span>
#include <string_view>

#include "pfednet/types.hpp"

namespace pfednet {

enum class LossKind { kLogistic, kRidge };

LossKind parse_loss_kind(std::string_view name);
std::string_view loss_kind_name(LossKind kind);

// Rows of `features` are samples. Labels are +-1 for logistic, real for ridge.
struct LocalDataset {
  Matrix features;
  Vector labels;

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

// Mean loss over the given rows: log(1 + exp(-y a^T w)) or (a^T w - y)^2 / 2.
double local_loss(const Vector& w, const LocalDataset& data, std::span<const int> batch,
                  LossKind kind);
double local_loss(const Vector& w, const LocalDataset& data, LossKind kind);

// Mean gradient over the given rows.
Vector local_gradient(const Vector& w, const LocalDataset& data, std::span<const int> batch,
                      LossKind kind);
Vector local_gradient(const Vector& w, const LocalDataset& data, LossKind kind);

struct CerConfig {
  double gamma = 0.0;
  double rho = 1.0;
  double eta = 0.1;
  int inner_iters = 50;

  void validate() const;
};

// Upper-bidiagonal difference operator: (Lv)_i = v_i - v_{i+1}, (Lv)_{d-1} = v_{d-1}.
namespace difference_operator {
Vector apply(const Vector& v);
Vector apply_transpose(const Vector& v);
Matrix dense(int d);
}  // namespace difference_operator

// Eigenfactorization L^T L = P diag(eigvals) P^T for one dimension.
class CerWorkspace {
 public:
  explicit CerWorkspace(int d);

  int dim() const { return static_cast<int>(eigvals_.size()); }
  const Matrix& eigvecs() const { return eigvecs_; }
  const Vector& eigvals() const { return eigvals_; }

  // Process-wide cache keyed by dimension. Thread-safe.
  static std::shared_ptr<const CerWorkspace> for_dimension(int d);

 private:
  Matrix eigvecs_;
  Vector eigvals_;
};

// r = soft_threshold(L(y_cur - y_anchor) - omega/rho, 1/rho)
Vector cer_r_step(const Vector& y_cur, const Vector& y_anchor, const Vector& omega, double rho);

// y = P (rho eta gamma S + I)^-1 P^T [rho eta gamma L^T (r + L y_anchor + omega/rho) + y_anchor - eta g]
Vector cer_y_step(const CerWorkspace& ws, const Vector& r_next, const Vector& y_anchor,
                  const Vector& omega, const Vector& g, double gamma, double eta, double rho);

// omega + rho (r - L y_next + L y_anchor)
Vector cer_omega_step(const Vector& omega, const Vector& r_next, const Vector& y_next,
                      const Vector& y_anchor, double rho);

struct CerResult {
  Vector delta;  // (y_anchor - v) / eta
  Vector v;      // final y iterate
  Vector r;
  Vector omega;
  double primal_residual = 0.0;  // ||r - L(v - y_anchor)||_2
};

CerResult cer_solve(const Vector& y_anchor, const Vector& g, const CerConfig& cfg,
                    const CerWorkspace& ws);

// Runs cfg.inner_iters ADMM rounds from r = 0, y = y_anchor, omega = 0 and
// returns the update (y_anchor - y_J) / eta.
Vector cer_update(const Vector& y_anchor, const Vector& g, const CerConfig& cfg);

// <g, v> + gamma ||L(v - y_anchor)||_1 + ||v - y_anchor||^2 / (2 eta)
double cer_objective(const Vector& v, const Vector& y_anchor, const Vector& g, double gamma,
                     double eta);

}  // namespace pfednet
