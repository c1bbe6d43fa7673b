#include "pfednet/server.hpp"

#include <cmath>
#include <string>

#include "pfednet/error.hpp"

namespace pfednet {

NormOrder parse_norm_order(std::string_view text) {
  if (text == "1") return NormOrder::kL1;
  if (text == "2") return NormOrder::kL2;
  if (text == "inf" || text == "infinity") {
    throw_invalid("norm order p=inf is not supported (use 1 or 2)");
  }
  throw_invalid("unsupported norm order '" + std::string(text) + "' (use 1 or 2)");
}

int norm_order_value(NormOrder p) { return static_cast<int>(p); }

void ServerHyper::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw_invalid("lambda must be >= 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw_invalid("rho must be > 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw_invalid("eta must be > 0");
  if (p != NormOrder::kL1 && p != NormOrder::kL2) throw_invalid("norm order must be 1 or 2");
  if (admm_iters < 1) throw_invalid("admm_iters must be >= 1");
}

Vector update_shared(const Vector& x, const Matrix& updates, const ModelPartition& partition,
                     double eta) {
  if (x.size() != partition.shared_dim() || updates.rows() != partition.dim() ||
      updates.cols() < 1) {
    throw_invalid("update_shared: dimension mismatch");
  }
  const Vector mean_update = updates.rowwise().mean();
  return x - eta * partition.project_shared(mean_update);
}

Vector group_prox(const Vector& u, double threshold, NormOrder p) {
  if (!(threshold >= 0.0)) throw_invalid("prox threshold must be >= 0");
  switch (p) {
    case NormOrder::kL2: {
      const double norm = u.norm();
      if (norm <= threshold) return Vector::Zero(u.size());
      return (1.0 - threshold / norm) * u;
    }
    case NormOrder::kL1:
      return (u.array() - threshold).max(0.0) - (-u.array() - threshold).max(0.0);
  }
  throw_invalid("unsupported norm order");
}

double fused_norm(const Matrix& z, const Matrix& q, NormOrder p) {
  const Matrix zq = z * q;
  double total = 0.0;
  for (Eigen::Index m = 0; m < zq.cols(); ++m) {
    total += p == NormOrder::kL2 ? zq.col(m).norm() : zq.col(m).lpNorm<1>();
  }
  return total;
}

void AdmmZState::reset() {
  initialized_ = false;
  w_.resize(0, 0);
  omega_.resize(0, 0);
}

void AdmmZState::initialize(const Matrix& z, const Matrix& q) {
  w_ = z * q;
  omega_ = Matrix::Zero(w_.rows(), w_.cols());
  initialized_ = true;
}

const Eigen::LLT<Matrix>& AdmmZState::factor(const Matrix& q, double eta, double rho) {
  const bool same_q = factored_q_.rows() == q.rows() && factored_q_.cols() == q.cols() &&
                      factored_q_ == q;
  if (llt_ && same_q && factored_eta_ == eta && factored_rho_ == rho) return *llt_;
  const auto n = q.rows();
  Matrix system = Matrix::Identity(n, n);
  system.noalias() += eta * rho * q * q.transpose();
  llt_.emplace(system);
  if (llt_->info() != Eigen::Success) {
    llt_.reset();
    throw Error(ErrorCode::kInternal, "factorization of I + eta rho Q Q^T failed");
  }
  factored_q_ = q;
  factored_eta_ = eta;
  factored_rho_ = rho;
  ++factorizations_;
  return *llt_;
}

Matrix z_step(const Matrix& z_t, const Matrix& w, const Matrix& omega,
              const Matrix& personal_grad, const Matrix& q, double eta, double rho,
              const Eigen::LLT<Matrix>& factor) {
  const double n_clients = static_cast<double>(z_t.cols());
  Matrix rhs = z_t;
  rhs.noalias() += eta * ((rho * w - omega) * q.transpose() - personal_grad / n_clients);
  // The system matrix is symmetric, so Z = rhs A^-1 is (A^-1 rhs^T)^T.
  return factor.solve(rhs.transpose()).transpose();
}

Matrix w_step(const Matrix& z_next, const Matrix& omega, const Matrix& q, double lambda,
              double rho, NormOrder p) {
  const Matrix target = z_next * q + omega / rho;
  Matrix w(target.rows(), target.cols());
  for (Eigen::Index m = 0; m < target.cols(); ++m) {
    w.col(m) = group_prox(target.col(m), lambda / rho, p);
  }
  return w;
}

Matrix omega_step(const Matrix& omega, const Matrix& z_next, const Matrix& w_next,
                  const Matrix& q, double rho) {
  return omega + rho * (z_next * q - w_next);
}

Matrix update_personalized(const Matrix& z_t, const Matrix& updates,
                           const ModelPartition& partition, const Matrix& q,
                           const ServerHyper& hyper, AdmmZState& state) {
  hyper.validate();
  if (z_t.rows() != partition.personal_dim() || z_t.cols() != q.rows() ||
      updates.cols() != z_t.cols()) {
    throw_invalid("update_personalized: Z is " + std::to_string(z_t.rows()) + "x" +
                  std::to_string(z_t.cols()) + ", updates " + std::to_string(updates.rows()) +
                  "x" + std::to_string(updates.cols()) + ", Q " + std::to_string(q.rows()) + "x" +
                  std::to_string(q.cols()));
  }
  const Matrix personal_grad = partition.project_personal_columns(updates);
  if (!state.initialized() || state.w().rows() != z_t.rows() || state.w().cols() != q.cols()) {
    state.initialize(z_t, q);
  }
  const auto& factor = state.factor(q, hyper.eta, hyper.rho);

  Matrix z = z_t;
  for (int k = 0; k < hyper.admm_iters; ++k) {
    z = z_step(z_t, state.w(), state.omega(), personal_grad, q, hyper.eta, hyper.rho, factor);
    state.w() = w_step(z, state.omega(), q, hyper.lambda, hyper.rho, hyper.p);
    state.omega() = omega_step(state.omega(), z, state.w(), q, hyper.rho);
  }
  if (!z.allFinite() || !state.omega().allFinite()) {
    throw_numeric("personalized ADMM diverged");
  }
  return z;
}

Matrix update_personalized(const Matrix& z_t, const Matrix& updates,
                           const ModelPartition& partition, const Matrix& q,
                           const ServerHyper& hyper) {
  AdmmZState state;
  return update_personalized(z_t, updates, partition, q, hyper, state);
}

double z_subproblem_objective(const Matrix& z, const Matrix& z_t, const Matrix& personal_grad,
                              const Matrix& q, double lambda, double eta, NormOrder p) {
  const double n_clients = static_cast<double>(z.cols());
  return (personal_grad.array() * z.array()).sum() / n_clients + lambda * fused_norm(z, q, p) +
         (z - z_t).squaredNorm() / (2.0 * eta);
}

}  // namespace pfednet
