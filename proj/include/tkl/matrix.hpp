#pragma once
// Dense exact linear algebra over a Field.  Everything is deterministic:
// reduction scans columns left to right and picks the first nonzero pivot row,
// so the reduced echelon form — and hence the canonical nullspace basis — is a
// pure function of the matrix.

#include <vector>

#include "tkl/field.hpp"

namespace tkl {

class Matrix {
 public:
  Matrix(const Field* f, std::size_t rows, std::size_t cols)
      : f_(f), rows_(rows), cols_(cols), a_(rows * cols, FieldElem::zero(f)) {}

  const Field* field() const { return f_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  FieldElem& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  const FieldElem& at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

  // In-place reduced row echelon form; returns the pivot column of each pivot row.
  std::vector<std::size_t> rref() {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols_ && row < rows_; ++col) {
      std::size_t pr = row;
      while (pr < rows_ && at(pr, col).is_zero()) ++pr;
      if (pr == rows_) continue;
      if (pr != row)
        for (std::size_t c = 0; c < cols_; ++c) std::swap(at(pr, c), at(row, c));
      FieldElem inv = at(row, col).inv();
      for (std::size_t c = col; c < cols_; ++c) at(row, c) = at(row, c) * inv;
      for (std::size_t r = 0; r < rows_; ++r) {
        if (r == row || at(r, col).is_zero()) continue;
        FieldElem factor = at(r, col);
        for (std::size_t c = col; c < cols_; ++c)
          at(r, c) = at(r, c) - factor * at(row, c);
      }
      pivots.push_back(col);
      ++row;
    }
    return pivots;
  }

  std::size_t rank() const {
    Matrix m = *this;
    return m.rref().size();
  }

  // Canonical nullspace basis: one vector per free column, ascending, each in
  // reduced echelon shape (1 at its free column, pivot entries filled in).
  std::vector<std::vector<FieldElem>> nullspace() const {
    Matrix m = *this;
    std::vector<std::size_t> pivots = m.rref();
    std::vector<bool> is_pivot(cols_, false);
    for (std::size_t c : pivots) is_pivot[c] = true;
    std::vector<std::vector<FieldElem>> basis;
    for (std::size_t free = 0; free < cols_; ++free) {
      if (is_pivot[free]) continue;
      std::vector<FieldElem> v(cols_, FieldElem::zero(f_));
      v[free] = FieldElem::one(f_);
      for (std::size_t r = 0; r < pivots.size(); ++r)
        v[pivots[r]] = -m.at(r, free);
      basis.push_back(std::move(v));
    }
    return basis;
  }

  // Unique solution of A x = b restricted to the column space; nullopt if
  // inconsistent.  If the system is underdetermined the canonical solution
  // (free variables = 0) is returned.
  std::optional<std::vector<FieldElem>> solve(const std::vector<FieldElem>& b) const {
    TKL_ASSERT(b.size() == rows_, "solve: rhs has wrong size");
    Matrix m(f_, rows_, cols_ + 1);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) m.at(r, c) = at(r, c);
      m.at(r, cols_) = b[r];
    }
    std::vector<std::size_t> pivots = m.rref();
    if (!pivots.empty() && pivots.back() == cols_) return std::nullopt;  // 0 = 1 row
    std::vector<FieldElem> x(cols_, FieldElem::zero(f_));
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = m.at(r, cols_);
    return x;
  }

 private:
  const Field* f_;
  std::size_t rows_, cols_;
  std::vector<FieldElem> a_;
};

}  // namespace tkl
