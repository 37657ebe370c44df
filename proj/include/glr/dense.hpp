#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace glr {

/// Row-major dense matrix of doubles. Used for parameter blocks, label
/// temperature matrices and embeddings; never for graph-sized n×n storage.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const DenseMatrix&) const = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// In-place orthonormalization of the columns of q (modified Gram-Schmidt,
/// two passes). Throws if a column collapses to numerical zero.
inline void orthonormalize_columns(DenseMatrix& q) {
    const std::size_t n = q.rows, k = q.cols;
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < j; ++i) {
                double proj = 0.0;
                for (std::size_t r = 0; r < n; ++r) proj += q.at(r, i) * q.at(r, j);
                for (std::size_t r = 0; r < n; ++r) q.at(r, j) -= proj * q.at(r, i);
            }
            double nrm = 0.0;
            for (std::size_t r = 0; r < n; ++r) nrm += q.at(r, j) * q.at(r, j);
            nrm = std::sqrt(nrm);
            if (nrm < 1e-300) throw std::runtime_error("orthonormalize_columns: rank-deficient block");
            for (std::size_t r = 0; r < n; ++r) q.at(r, j) /= nrm;
        }
    }
}

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi sweeps.
/// Eigenvalues returned in descending order with matching eigenvector columns.
inline void jacobi_eigh(const DenseMatrix& m, std::vector<double>& eigenvalues,
                        DenseMatrix& eigenvectors) {
    const std::size_t n = m.rows;
    if (m.cols != n) throw std::invalid_argument("jacobi_eigh: matrix must be square");
    DenseMatrix a = m;
    DenseMatrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t r = 0; r < n; ++r) {
                    double arp = a.at(r, p), arq = a.at(r, q);
                    a.at(r, p) = c * arp - s * arq;
                    a.at(r, q) = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    double apr = a.at(p, r), aqr = a.at(q, r);
                    a.at(p, r) = c * apr - s * aqr;
                    a.at(q, r) = s * apr + c * aqr;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    double vrp = v.at(r, p), vrq = v.at(r, q);
                    v.at(r, p) = c * vrp - s * vrq;
                    v.at(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a.at(x, x) > a.at(y, y); });

    eigenvalues.assign(n, 0.0);
    eigenvectors = DenseMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        eigenvalues[j] = a.at(order[j], order[j]);
        for (std::size_t r = 0; r < n; ++r) eigenvectors.at(r, j) = v.at(r, order[j]);
    }
}

}  // namespace glr
