#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "glr/dense.hpp"

namespace glr {

/// One (row, col, value) entry of a sparse matrix under construction.
struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

/// Compressed sparse row matrix, canonical form: row_ptr non-decreasing with
/// row_ptr[0] = 0 and row_ptr[n_rows] = nnz, column indices strictly
/// increasing within each row, every col_idx < n_cols. Immutable by
/// convention once built; kernels below never mutate their inputs.
struct CsrMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const { return col_idx.size(); }

    std::span<const std::size_t> row_cols(std::size_t r) const {
        return {col_idx.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
    }
    std::span<const double> row_values(std::size_t r) const {
        return {values.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
    }
    std::size_t row_nnz(std::size_t r) const { return row_ptr[r + 1] - row_ptr[r]; }

    bool operator==(const CsrMatrix&) const = default;
};

/// Verify canonical-form invariants; throws std::invalid_argument on the
/// first violation. Cheap (one pass), called by every builder.
inline void validate_csr(const CsrMatrix& m) {
    if (m.row_ptr.size() != m.n_rows + 1) throw std::invalid_argument("csr: row_ptr length != n_rows+1");
    if (m.row_ptr.front() != 0) throw std::invalid_argument("csr: row_ptr[0] != 0");
    if (m.row_ptr.back() != m.col_idx.size() || m.col_idx.size() != m.values.size())
        throw std::invalid_argument("csr: row_ptr[n_rows] != nnz");
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        if (m.row_ptr[r] > m.row_ptr[r + 1]) throw std::invalid_argument("csr: row_ptr decreasing");
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            if (m.col_idx[k] >= m.n_cols) throw std::invalid_argument("csr: column index out of range");
            if (k > m.row_ptr[r] && m.col_idx[k] <= m.col_idx[k - 1])
                throw std::invalid_argument("csr: columns not strictly increasing within row");
        }
    }
}

/// Build a canonical CSR matrix from unordered triplets. Duplicate (row, col)
/// entries are summed; exact zeros produced by summation are kept (callers
/// that care strip them explicitly).
inline CsrMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                               std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row >= n_rows) throw std::out_of_range("from_triplets: row index out of range");
        if (t.col >= n_cols) throw std::out_of_range("from_triplets: col index out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });

    CsrMatrix m;
    m.n_rows = n_rows;
    m.n_cols = n_cols;
    m.row_ptr.assign(n_rows + 1, 0);
    m.col_idx.reserve(triplets.size());
    m.values.reserve(triplets.size());

    std::size_t i = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        while (i < triplets.size() && triplets[i].row == r) {
            double v = triplets[i].value;
            std::size_t c = triplets[i].col;
            ++i;
            while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
                v += triplets[i].value;
                ++i;
            }
            m.col_idx.push_back(c);
            m.values.push_back(v);
        }
        m.row_ptr[r + 1] = m.col_idx.size();
    }
    return m;
}

inline CsrMatrix csr_identity(std::size_t n) {
    CsrMatrix m;
    m.n_rows = m.n_cols = n;
    m.row_ptr.resize(n + 1);
    m.col_idx.resize(n);
    m.values.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        m.row_ptr[i + 1] = i + 1;
        m.col_idx[i] = i;
    }
    return m;
}

/// Exact transpose, canonical form preserved (counting sort per column).
inline CsrMatrix transpose(const CsrMatrix& m) {
    CsrMatrix t;
    t.n_rows = m.n_cols;
    t.n_cols = m.n_rows;
    t.row_ptr.assign(m.n_cols + 1, 0);
    t.col_idx.resize(m.nnz());
    t.values.resize(m.nnz());

    for (std::size_t k = 0; k < m.nnz(); ++k) t.row_ptr[m.col_idx[k] + 1]++;
    for (std::size_t c = 0; c < m.n_cols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];

    std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            std::size_t pos = cursor[m.col_idx[k]]++;
            t.col_idx[pos] = r;
            t.values[pos] = m.values[k];
        }
    }
    return t;
}

/// Horizontal concatenation [a | b]; b's columns are shifted by a.n_cols.
inline CsrMatrix hconcat(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.n_rows != b.n_rows)
        throw std::invalid_argument("hconcat: row counts differ (" + std::to_string(a.n_rows) +
                                    " vs " + std::to_string(b.n_rows) + ")");
    CsrMatrix out;
    out.n_rows = a.n_rows;
    out.n_cols = a.n_cols + b.n_cols;
    out.row_ptr.resize(a.n_rows + 1);
    out.col_idx.reserve(a.nnz() + b.nnz());
    out.values.reserve(a.nnz() + b.nnz());

    out.row_ptr[0] = 0;
    for (std::size_t r = 0; r < a.n_rows; ++r) {
        for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            out.col_idx.push_back(a.col_idx[k]);
            out.values.push_back(a.values[k]);
        }
        for (std::size_t k = b.row_ptr[r]; k < b.row_ptr[r + 1]; ++k) {
            out.col_idx.push_back(b.col_idx[k] + a.n_cols);
            out.values.push_back(b.values[k]);
        }
        out.row_ptr[r + 1] = out.col_idx.size();
    }
    return out;
}

/// Rows of m selected by index list, in list order (duplicates allowed).
inline CsrMatrix row_submatrix(const CsrMatrix& m, std::span<const std::size_t> rows) {
    CsrMatrix out;
    out.n_rows = rows.size();
    out.n_cols = m.n_cols;
    out.row_ptr.resize(rows.size() + 1);
    out.row_ptr[0] = 0;
    std::size_t total = 0;
    for (std::size_t r : rows) {
        if (r >= m.n_rows) throw std::out_of_range("row_submatrix: row index out of range");
        total += m.row_nnz(r);
    }
    out.col_idx.reserve(total);
    out.values.reserve(total);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t r = rows[i];
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            out.col_idx.push_back(m.col_idx[k]);
            out.values.push_back(m.values[k]);
        }
        out.row_ptr[i + 1] = out.col_idx.size();
    }
    return out;
}

/// Columns [col_begin, col_end) of m as a new matrix, columns re-based to 0.
inline CsrMatrix col_range_submatrix(const CsrMatrix& m, std::size_t col_begin, std::size_t col_end) {
    if (col_begin > col_end || col_end > m.n_cols)
        throw std::invalid_argument("col_range_submatrix: bad column range");
    CsrMatrix out;
    out.n_rows = m.n_rows;
    out.n_cols = col_end - col_begin;
    out.row_ptr.resize(m.n_rows + 1);
    out.row_ptr[0] = 0;
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            if (m.col_idx[k] >= col_begin && m.col_idx[k] < col_end) {
                out.col_idx.push_back(m.col_idx[k] - col_begin);
                out.values.push_back(m.values[k]);
            }
        }
        out.row_ptr[r + 1] = out.col_idx.size();
    }
    return out;
}

/// y = m · x
inline std::vector<double> spmv(const CsrMatrix& m, std::span<const double> x) {
    if (x.size() != m.n_cols) throw std::invalid_argument("spmv: dimension mismatch");
    std::vector<double> y(m.n_rows, 0.0);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        double acc = 0.0;
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
            acc += m.values[k] * x[m.col_idx[k]];
        y[r] = acc;
    }
    return y;
}

/// C = m · B with B dense (m: r×k, B: k×d).
inline DenseMatrix spmm_dense(const CsrMatrix& m, const DenseMatrix& b) {
    if (b.rows != m.n_cols) throw std::invalid_argument("spmm_dense: dimension mismatch");
    DenseMatrix out(m.n_rows, b.cols);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        double* dst = out.data.data() + r * out.cols;
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
            const double v = m.values[k];
            const double* src = b.data.data() + m.col_idx[k] * b.cols;
            for (std::size_t c = 0; c < b.cols; ++c) dst[c] += v * src[c];
        }
    }
    return out;
}

/// Rows scaled to unit Euclidean norm; zero rows stay zero.
inline CsrMatrix l2_normalize_rows(const CsrMatrix& m) {
    CsrMatrix out = m;
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        double sq = 0.0;
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
            sq += m.values[k] * m.values[k];
        if (sq <= 0.0) continue;
        double inv = 1.0 / std::sqrt(sq);
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) out.values[k] *= inv;
    }
    return out;
}

/// Per-row sums (degree vector when m is a binary adjacency).
inline std::vector<double> row_sums(const CsrMatrix& m) {
    std::vector<double> s(m.n_rows, 0.0);
    for (std::size_t r = 0; r < m.n_rows; ++r)
        for (std::size_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) s[r] += m.values[k];
    return s;
}

}  // namespace glr
