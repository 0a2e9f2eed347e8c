#include "fastgcn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fastgcn {

DenseMatrix::DenseMatrix(Index n_rows, Index n_cols, std::vector<Real> values)
    : rows_(n_rows), cols_(n_cols), data_(std::move(values)) {
    if (data_.size() != n_rows * n_cols) {
        throw std::invalid_argument("DenseMatrix: value count " +
                                    std::to_string(data_.size()) + " != " +
                                    std::to_string(n_rows) + "x" + std::to_string(n_cols));
    }
}

DenseMatrix DenseMatrix::identity(Index n) {
    DenseMatrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimensions " + std::to_string(a.cols()) +
                                    " and " + std::to_string(b.rows()) + " differ");
    }
    DenseMatrix c(a.rows(), b.cols());
    const Index n = a.rows(), k_dim = a.cols(), m = b.cols();
    // i-k-j order keeps all three matrices streaming row-major.
    for (Index i = 0; i < n; ++i) {
        Real* ci = &c.data()[i * m];
        for (Index k = 0; k < k_dim; ++k) {
            const Real aik = a(i, k);
            if (aik == 0.0) continue;
            const Real* bk = &b.data()[k * m];
            for (Index j = 0; j < m; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

DenseMatrix matmul_trans_a(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("matmul_trans_a: row counts differ");
    }
    DenseMatrix c(a.cols(), b.cols());
    const Index n = a.rows(), p = a.cols(), m = b.cols();
    for (Index k = 0; k < n; ++k) {
        const Real* ak = &a.data()[k * p];
        const Real* bk = &b.data()[k * m];
        for (Index i = 0; i < p; ++i) {
            const Real aki = ak[i];
            if (aki == 0.0) continue;
            Real* ci = &c.data()[i * m];
            for (Index j = 0; j < m; ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

DenseMatrix matmul_trans_b(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("matmul_trans_b: column counts differ");
    }
    DenseMatrix c(a.rows(), b.rows());
    const Index n = a.rows(), p = b.rows(), k_dim = a.cols();
    for (Index i = 0; i < n; ++i) {
        const Real* ai = &a.data()[i * k_dim];
        for (Index j = 0; j < p; ++j) {
            const Real* bj = &b.data()[j * k_dim];
            Real acc = 0.0;
            for (Index k = 0; k < k_dim; ++k) acc += ai[k] * bj[k];
            c(i, j) = acc;
        }
    }
    return c;
}

SparseMatrix SparseMatrix::from_triplets(Index n_rows, Index n_cols,
                                         std::vector<std::tuple<Index, Index, Real>> triplets) {
    for (const auto& [i, j, v] : triplets) {
        (void)v;
        if (i >= n_rows || j >= n_cols) {
            throw std::out_of_range("from_triplets: entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") outside " + std::to_string(n_rows) +
                                    "x" + std::to_string(n_cols));
        }
    }
    std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });

    SparseMatrix m;
    m.n_rows_ = n_rows;
    m.n_cols_ = n_cols;
    m.row_offsets_.assign(n_rows + 1, 0);

    std::vector<Index> cols;
    std::vector<Real> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());

    std::size_t k = 0;
    for (Index r = 0; r < n_rows; ++r) {
        while (k < triplets.size() && std::get<0>(triplets[k]) == r) {
            const Index c = std::get<1>(triplets[k]);
            Real v = std::get<2>(triplets[k]);
            ++k;
            while (k < triplets.size() && std::get<0>(triplets[k]) == r &&
                   std::get<1>(triplets[k]) == c) {
                v += std::get<2>(triplets[k]);
                ++k;
            }
            if (v != 0.0) {
                cols.push_back(c);
                vals.push_back(v);
            }
        }
        m.row_offsets_[r + 1] = cols.size();
    }
    m.col_indices_ = std::move(cols);
    m.values_ = std::move(vals);
    return m;
}

Real SparseMatrix::at(Index i, Index j) const {
    if (i >= n_rows_ || j >= n_cols_) {
        throw std::out_of_range("SparseMatrix::at: index (" + std::to_string(i) + "," +
                                std::to_string(j) + ") outside " + std::to_string(n_rows_) +
                                "x" + std::to_string(n_cols_));
    }
    const auto begin = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
    const auto end = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d(n_rows_, n_cols_);
    for (Index i = 0; i < n_rows_; ++i) {
        for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            d(i, col_indices_[k]) = values_[k];
        }
    }
    return d;
}

SparseMatrix build_normalized_adjacency(const std::vector<std::pair<Index, Index>>& edges,
                                        Index n) {
    if (n == 0) {
        throw std::invalid_argument("build_normalized_adjacency: empty graph (n = 0)");
    }
    // Unique neighbor lists, self loops dropped (the +I term supplies them).
    std::vector<std::vector<Index>> adj(n);
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) {
            throw std::invalid_argument("build_normalized_adjacency: edge (" +
                                        std::to_string(u) + "," + std::to_string(v) +
                                        ") references vertex >= n = " + std::to_string(n));
        }
        if (u == v) continue;
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<Real> inv_sqrt_deg(n);
    for (Index u = 0; u < n; ++u) {
        auto& nbrs = adj[u];
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        inv_sqrt_deg[u] = 1.0 / std::sqrt(static_cast<Real>(nbrs.size() + 1));
    }

    std::vector<std::tuple<Index, Index, Real>> triplets;
    std::size_t nnz = n;
    for (const auto& nbrs : adj) nnz += nbrs.size();
    triplets.reserve(nnz);
    for (Index u = 0; u < n; ++u) {
        triplets.emplace_back(u, u, inv_sqrt_deg[u] * inv_sqrt_deg[u]);
        for (Index v : adj[u]) {
            triplets.emplace_back(u, v, inv_sqrt_deg[u] * inv_sqrt_deg[v]);
        }
    }
    return SparseMatrix::from_triplets(n, n, std::move(triplets));
}

std::vector<Real> column_squared_norms(const SparseMatrix& a) {
    std::vector<Real> norms(a.cols(), 0.0);
    const auto& cols = a.col_indices();
    const auto& vals = a.values();
    for (std::size_t k = 0; k < vals.size(); ++k) {
        norms[cols[k]] += vals[k] * vals[k];
    }
    return norms;
}

DenseMatrix submatrix(const SparseMatrix& a, std::span<const Index> rows,
                      std::span<const Index> cols) {
    DenseMatrix block(rows.size(), cols.size());
    for (Index i = 0; i < rows.size(); ++i) {
        for (Index j = 0; j < cols.size(); ++j) {
            block(i, j) = a.at(rows[i], cols[j]);
        }
    }
    return block;
}

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("spmm: A has " + std::to_string(a.cols()) +
                                    " columns but B has " + std::to_string(b.rows()) + " rows");
    }
    DenseMatrix c(a.rows(), b.cols());
    const Index m = b.cols();
    const auto& offs = a.row_offsets();
    const auto& cols = a.col_indices();
    const auto& vals = a.values();
    for (Index i = 0; i < a.rows(); ++i) {
        Real* ci = &c.data()[i * m];
        for (Index k = offs[i]; k < offs[i + 1]; ++k) {
            const Real aik = vals[k];
            const Real* bk = &b.data()[cols[k] * m];
            for (Index j = 0; j < m; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

}  // namespace fastgcn
