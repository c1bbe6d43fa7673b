#include "pfednet/partition.hpp"

#include <string>

#include "pfednet/error.hpp"

namespace pfednet {

ModelPartition::ModelPartition(int d, std::vector<int> shared_rows,
                               std::vector<int> personal_rows)
    : dim_(d), shared_rows_(std::move(shared_rows)), personal_rows_(std::move(personal_rows)) {}

ModelPartition ModelPartition::split_at(int d, int s) {
  if (d < 1) throw_invalid("model dimension must be positive");
  if (s < 0 || s > d) {
    throw_invalid("split_at must lie in [0, " + std::to_string(d) + "], got " + std::to_string(s));
  }
  std::vector<int> shared(s);
  std::vector<int> personal(d - s);
  for (int r = 0; r < s; ++r) shared[r] = r;
  for (int r = s; r < d; ++r) personal[r - s] = r;
  return ModelPartition(d, std::move(shared), std::move(personal));
}

ModelPartition ModelPartition::from_rows(int d, std::vector<int> shared_rows,
                                         std::vector<int> personal_rows) {
  if (d < 1) throw_invalid("model dimension must be positive");
  std::vector<int> owner(d, 0);
  auto claim = [&](const std::vector<int>& rows, const char* block) {
    for (int r : rows) {
      if (r < 0 || r >= d) {
        throw_invalid(std::string(block) + " row " + std::to_string(r + 1) + " outside [1, " +
                      std::to_string(d) + "]");
      }
      if (owner[r]++ != 0) {
        throw_invalid("model row " + std::to_string(r + 1) + " assigned more than once");
      }
    }
  };
  claim(shared_rows, "shared");
  claim(personal_rows, "personal");
  for (int r = 0; r < d; ++r) {
    if (owner[r] == 0) {
      throw_invalid("model row " + std::to_string(r + 1) + " is neither shared nor personal");
    }
  }
  return ModelPartition(d, std::move(shared_rows), std::move(personal_rows));
}

Vector ModelPartition::compose(const Vector& x, const Vector& z) const {
  if (x.size() != shared_dim() || z.size() != personal_dim()) {
    throw_invalid("compose: expected x of length " + std::to_string(shared_dim()) +
                  " and z of length " + std::to_string(personal_dim()) + ", got " +
                  std::to_string(x.size()) + " and " + std::to_string(z.size()));
  }
  Vector y(dim_);
  for (int c = 0; c < shared_dim(); ++c) y[shared_rows_[c]] = x[c];
  for (int c = 0; c < personal_dim(); ++c) y[personal_rows_[c]] = z[c];
  return y;
}

namespace {

Vector gather(const Vector& g, const std::vector<int>& rows, int d) {
  if (g.size() != d) {
    throw_invalid("projection: expected vector of length " + std::to_string(d) + ", got " +
                  std::to_string(g.size()));
  }
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) out[c] = g[rows[c]];
  return out;
}

Matrix selector(const std::vector<int>& rows, int d) {
  Matrix s = Matrix::Zero(d, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) s(rows[c], c) = 1.0;
  return s;
}

}  // namespace

Vector ModelPartition::project_shared(const Vector& g) const {
  return gather(g, shared_rows_, dim_);
}

Vector ModelPartition::project_personal(const Vector& g) const {
  return gather(g, personal_rows_, dim_);
}

Matrix ModelPartition::project_personal_columns(const Matrix& g) const {
  if (g.rows() != dim_) {
    throw_invalid("projection: expected " + std::to_string(dim_) + " rows, got " +
                  std::to_string(g.rows()));
  }
  Matrix out(personal_dim(), g.cols());
  for (int c = 0; c < personal_dim(); ++c) out.row(c) = g.row(personal_rows_[c]);
  return out;
}

Matrix ModelPartition::shared_selector() const { return selector(shared_rows_, dim_); }

Matrix ModelPartition::personal_selector() const { return selector(personal_rows_, dim_); }

}  // namespace pfednet
