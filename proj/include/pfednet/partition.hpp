#pragma once

#include <span>
#include <vector>

#include "pfednet/types.hpp"

namespace pfednet {

// Selector matrices M (d x d1) and N (d x d2) stored as index maps: column c
// of M has its single 1 at row shared_rows()[c], likewise for N. Every model
// coordinate belongs to exactly one of the two blocks.
class ModelPartition {
 public:
  ModelPartition() = default;

  // Rows [0, s) shared, [s, d) personalized.
  static ModelPartition split_at(int d, int s);

  // Explicit 0-based row lists; column order is list order.
  static ModelPartition from_rows(int d, std::vector<int> shared_rows,
                                  std::vector<int> personal_rows);

  int dim() const { return dim_; }
  int shared_dim() const { return static_cast<int>(shared_rows_.size()); }
  int personal_dim() const { return static_cast<int>(personal_rows_.size()); }

  std::span<const int> shared_rows() const { return shared_rows_; }
  std::span<const int> personal_rows() const { return personal_rows_; }

  // y = Mx + Nz
  Vector compose(const Vector& x, const Vector& z) const;
  // M^T g
  Vector project_shared(const Vector& g) const;
  // N^T g
  Vector project_personal(const Vector& g) const;
  // N^T G, one column per client.
  Matrix project_personal_columns(const Matrix& g) const;

  Matrix shared_selector() const;
  Matrix personal_selector() const;

 private:
  ModelPartition(int d, std::vector<int> shared_rows, std::vector<int> personal_rows);

  int dim_ = 0;
  std::vector<int> shared_rows_;
  std::vector<int> personal_rows_;
};

}  // namespace pfednet
