#pragma once

#include <optional>
#include <string_view>

#include "pfednet/partition.hpp"
#include "pfednet/types.hpp"

namespace pfednet {

enum class NormOrder { kL1 = 1, kL2 = 2 };

NormOrder parse_norm_order(std::string_view text);
int norm_order_value(NormOrder p);

struct ServerHyper {
  double lambda = 0.0;
  double rho = 1.0;
  double eta = 0.1;
  NormOrder p = NormOrder::kL2;
  int admm_iters = 50;

  void validate() const;
};

// x - eta * (1/N) sum_n M^T G[:, n]
Vector update_shared(const Vector& x, const Matrix& updates, const ModelPartition& partition,
                     double eta);

// argmin_b threshold ||b||_p + 1/2 ||b - u||^2 for p in {1, 2}.
Vector group_prox(const Vector& u, double threshold, NormOrder p);

// sum_m ||(ZQ)[:, m]||_p
double fused_norm(const Matrix& z, const Matrix& q, NormOrder p);

// ADMM iterates for the personalized block plus the cached factor of
// I_N + eta rho Q Q^T.
class AdmmZState {
 public:
  bool initialized() const { return initialized_; }
  void reset();
  void initialize(const Matrix& z, const Matrix& q);

  Matrix& w() { return w_; }
  Matrix& omega() { return omega_; }
  const Matrix& w() const { return w_; }
  const Matrix& omega() const { return omega_; }

  // Refactors only when (eta, rho) or Q changed.
  const Eigen::LLT<Matrix>& factor(const Matrix& q, double eta, double rho);
  int factorizations() const { return factorizations_; }

 private:
  bool initialized_ = false;
  Matrix w_;
  Matrix omega_;
  std::optional<Eigen::LLT<Matrix>> llt_;
  Matrix factored_q_;
  double factored_eta_ = 0.0;
  double factored_rho_ = 0.0;
  int factorizations_ = 0;
};

// Z_{k+1} = [eta (rho W Q^T - Omega Q^T - N^T G / N) + Z_t] (I + eta rho Q Q^T)^-1
Matrix z_step(const Matrix& z_t, const Matrix& w, const Matrix& omega,
              const Matrix& personal_grad, const Matrix& q, double eta, double rho,
              const Eigen::LLT<Matrix>& factor);

// Column-wise group_prox(Z Q + Omega / rho, lambda / rho, p).
Matrix w_step(const Matrix& z_next, const Matrix& omega, const Matrix& q, double lambda,
              double rho, NormOrder p);

// Omega + rho (Z Q - W)
Matrix omega_step(const Matrix& omega, const Matrix& z_next, const Matrix& w_next,
                  const Matrix& q, double rho);

// Runs hyper.admm_iters rounds of z/w/omega updates. An uninitialized state
// starts from W = Z_t Q, Omega = 0; an initialized one is warm-started.
// `updates` is d x N; N^T is applied through the partition.
Matrix update_personalized(const Matrix& z_t, const Matrix& updates,
                           const ModelPartition& partition, const Matrix& q,
                           const ServerHyper& hyper, AdmmZState& state);
Matrix update_personalized(const Matrix& z_t, const Matrix& updates,
                           const ModelPartition& partition, const Matrix& q,
                           const ServerHyper& hyper);

// (1/N) <N^T G, Z> + lambda ||ZQ||_{1,p} + ||Z - Z_t||_F^2 / (2 eta)
double z_subproblem_objective(const Matrix& z, const Matrix& z_t, const Matrix& personal_grad,
                              const Matrix& q, double lambda, double eta, NormOrder p);

}  // namespace pfednet
