#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fidsus/common.hpp"

namespace fidsus {

// Real symmetric operator in CSR form. Column indices are strictly ascending
// within each row and exact zeros are never stored. matvec accumulates each
// row in storage order, so repeated applications are bit-identical.
class SparseOperator {
 public:
  using Entry = std::pair<std::uint32_t, double>;

  SparseOperator() = default;

  // row_fn(r, entries) appends (col, value) pairs for row r; duplicates are
  // merged and zeros dropped here.
  static SparseOperator from_rows(
      std::size_t dim,
      const std::function<void(std::size_t, std::vector<Entry>&)>& row_fn) {
    SparseOperator op;
    op.dim_ = dim;
    op.row_ptr_.resize(dim + 1, 0);
    std::vector<Entry> scratch;
    for (std::size_t r = 0; r < dim; ++r) {
      scratch.clear();
      row_fn(r, scratch);
      std::sort(scratch.begin(), scratch.end(),
                [](const Entry& a, const Entry& b) { return a.first < b.first; });
      std::size_t n = 0;
      for (std::size_t k = 0; k < scratch.size();) {
        const std::uint32_t col = scratch[k].first;
        double v = 0.0;
        while (k < scratch.size() && scratch[k].first == col) v += scratch[k++].second;
        if (v != 0.0) {
          op.col_.push_back(col);
          op.val_.push_back(v);
          ++n;
        }
      }
      op.row_ptr_[r + 1] = op.row_ptr_[r] + n;
    }
    return op;
  }

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return val_.size(); }

  void apply(const double* x, double* y) const {
    for (std::size_t r = 0; r < dim_; ++r) {
      double acc = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        acc += val_[k] * x[col_[k]];
      }
      y[r] = acc;
    }
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != dim_ || y.size() != dim_) {
      throw ArgumentError("SparseOperator::apply: dimension mismatch");
    }
    apply(x.data(), y.data());
  }

  double coeff(std::size_t i, std::size_t j) const {
    const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(j));
    if (it == last || *it != j) return 0.0;
    return val_[static_cast<std::size_t>(it - col_.begin())];
  }

  bool is_symmetric() const {
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        if (coeff(col_[k], r) != val_[k]) return false;
      }
    }
    return true;
  }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> cols() const { return col_; }
  std::span<const double> vals() const { return val_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;
};

}  // namespace fidsus
