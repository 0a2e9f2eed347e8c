#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace fastgcn {

using Index = std::size_t;
using Real = double;

/// Dense row-major matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(Index n_rows, Index n_cols)
        : rows_(n_rows), cols_(n_cols), data_(n_rows * n_cols, 0.0) {}
    DenseMatrix(Index n_rows, Index n_cols, std::vector<Real> values);

    static DenseMatrix identity(Index n);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    Real operator()(Index i, Index j) const { return data_[i * cols_ + j]; }
    Real& operator()(Index i, Index j) { return data_[i * cols_ + j]; }

    std::span<const Real> row(Index i) const {
        return {data_.data() + i * cols_, cols_};
    }

    const std::vector<Real>& data() const { return data_; }
    std::vector<Real>& data() { return data_; }

    bool same_shape(const DenseMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Real> data_;
};

/// C = A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// C = A^T * B
DenseMatrix matmul_trans_a(const DenseMatrix& a, const DenseMatrix& b);
/// C = A * B^T
DenseMatrix matmul_trans_b(const DenseMatrix& a, const DenseMatrix& b);

/// Compressed-sparse-row matrix. Column indices are strictly increasing
/// within each row and no explicit zeros are stored.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Builds from (row, col, value) triplets; duplicates are summed and
    /// entries that cancel to zero are dropped.
    static SparseMatrix from_triplets(Index n_rows, Index n_cols,
                                      std::vector<std::tuple<Index, Index, Real>> triplets);

    Index rows() const { return n_rows_; }
    Index cols() const { return n_cols_; }
    Index nnz() const { return values_.size(); }

    /// Element lookup; O(log row-degree). Returns 0 for unstored entries.
    Real at(Index i, Index j) const;

    const std::vector<Index>& row_offsets() const { return row_offsets_; }
    const std::vector<Index>& col_indices() const { return col_indices_; }
    const std::vector<Real>& values() const { return values_; }

    DenseMatrix to_dense() const;

private:
    Index n_rows_ = 0;
    Index n_cols_ = 0;
    std::vector<Index> row_offsets_;   // length n_rows + 1
    std::vector<Index> col_indices_;
    std::vector<Real> values_;
};

/// Symmetric renormalization with self loops: given an undirected edge list,
/// returns D^(-1/2) (A + I) D^(-1/2) where D is the degree matrix of A + I.
/// Duplicate edges and self loops in the input are ignored after the first.
SparseMatrix build_normalized_adjacency(const std::vector<std::pair<Index, Index>>& edges,
                                        Index n);

/// Entry u is the squared Euclidean norm of column u.
std::vector<Real> column_squared_norms(const SparseMatrix& a);

/// Dense block A(rows, cols); duplicate indices are permitted.
DenseMatrix submatrix(const SparseMatrix& a, std::span<const Index> rows,
                      std::span<const Index> cols);

/// Sparse-dense product A * B.
DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b);

}  // namespace fastgcn
