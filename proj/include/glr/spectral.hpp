#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "glr/csr.hpp"
#include "glr/dense.hpp"
#include "glr/rng.hpp"

namespace glr {

namespace detail {

/// Apply the iteration operator to a block: symmetric case B·Q = A·Q + shift·Q,
/// rectangular case (X·Xᵀ + shift·I)·Q computed as two sparse passes.
inline DenseMatrix apply_operator(const CsrMatrix& m, const CsrMatrix* m_t, double shift,
                                  const DenseMatrix& q) {
    DenseMatrix z;
    if (m_t == nullptr) {
        z = spmm_dense(m, q);
    } else {
        z = spmm_dense(m, spmm_dense(*m_t, q));
    }
    if (shift != 0.0) {
        for (std::size_t i = 0; i < z.data.size(); ++i) z.data[i] += shift * q.data[i];
    }
    return z;
}

/// Estimate of the spectral norm by a short power iteration.
inline double spectral_norm_estimate(const CsrMatrix& m, const CsrMatrix* m_t, SplitMix64& rng) {
    const std::size_t n = m.n_rows;
    DenseMatrix v(n, 1);
    for (std::size_t i = 0; i < n; ++i) v.at(i, 0) = rng.normal();
    double norm = 0.0;
    for (int it = 0; it < 30; ++it) {
        double nrm = norm2(std::span<const double>(v.data));
        if (nrm < 1e-300) return 1.0;
        for (double& x : v.data) x /= nrm;
        v = apply_operator(m, m_t, 0.0, v);
        norm = norm2(std::span<const double>(v.data));
    }
    return std::max(norm, 1e-12);
}

}  // namespace detail

/// Low-dimensional node coordinates from the leading spectrum of m.
///
/// Square symmetric input: columns are the eigenvectors of the `dim` largest
/// (algebraic) eigenvalues. Rectangular input: columns are the leading left
/// singular vectors, computed through the Gram operator m·mᵀ without ever
/// materializing it. Both paths run seeded block orthogonal iteration with
/// Rayleigh-Ritz extraction; a positive diagonal shift keeps the symmetric
/// operator definite so ordering by magnitude and by value coincide.
///
/// Deterministic for a fixed seed. Columns come back orthonormal (< 1e-8
/// deviation) with the sign convention that each column's largest-magnitude
/// entry is positive. Throws on convergence failure.
inline DenseMatrix spectral_embed(const CsrMatrix& m, std::size_t dim, std::uint64_t seed) {
    const std::size_t n = m.n_rows;
    if (dim < 1) throw std::invalid_argument("spectral_embed: dim must be >= 1");
    if (dim >= n) throw std::invalid_argument("spectral_embed: dim must be < row count");

    bool symmetric = false;
    CsrMatrix m_transposed;
    if (m.n_rows == m.n_cols) {
        m_transposed = transpose(m);
        symmetric = (m_transposed == m);
    }
    if (!symmetric) {
        if (m.n_rows != m.n_cols) m_transposed = transpose(m);
        if (dim > std::min(m.n_rows, m.n_cols))
            throw std::invalid_argument("spectral_embed: dim exceeds matrix rank bound");
    }
    const CsrMatrix* gram_factor = symmetric ? nullptr : &m_transposed;

    SplitMix64 rng(seed);
    const double norm_est = detail::spectral_norm_estimate(m, gram_factor, rng);
    // Symmetric spectra may reach -norm_est; shifting by ~norm_est makes every
    // eigenvalue of the iterated operator positive. The Gram operator is
    // already PSD; a tiny shift only guards rank deficiency there.
    const double shift = symmetric ? 1.02 * norm_est + 1e-12 : 1e-10 * (norm_est + 1.0);

    const std::size_t block = std::min(dim + 8, symmetric ? n : std::min(n, m.n_cols));
    DenseMatrix q(n, block);
    for (std::size_t i = 0; i < q.data.size(); ++i) q.data[i] = rng.normal();
    orthonormalize_columns(q);

    const double tol = 1e-10 * std::max(1.0, norm_est);
    constexpr std::size_t kMaxIter = 1500;
    DenseMatrix ritz_vectors;
    std::vector<double> ritz_values;

    for (std::size_t iter = 0; iter < kMaxIter; ++iter) {
        DenseMatrix z = detail::apply_operator(m, gram_factor, shift, q);
        orthonormalize_columns(z);
        q = std::move(z);

        if (iter % 10 != 9 && iter + 1 != kMaxIter) continue;

        // Rayleigh-Ritz on the unshifted operator.
        DenseMatrix aq = detail::apply_operator(m, gram_factor, 0.0, q);
        DenseMatrix small(block, block);
        for (std::size_t i = 0; i < block; ++i)
            for (std::size_t j = 0; j < block; ++j) {
                double s = 0.0;
                for (std::size_t r = 0; r < n; ++r) s += q.at(r, i) * aq.at(r, j);
                small.at(i, j) = s;
            }
        // Symmetrize away accumulation noise.
        for (std::size_t i = 0; i < block; ++i)
            for (std::size_t j = i + 1; j < block; ++j) {
                double avg = 0.5 * (small.at(i, j) + small.at(j, i));
                small.at(i, j) = small.at(j, i) = avg;
            }
        DenseMatrix rotation;
        jacobi_eigh(small, ritz_values, rotation);

        ritz_vectors = DenseMatrix(n, dim);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < dim; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < block; ++i) s += q.at(r, i) * rotation.at(i, j);
                ritz_vectors.at(r, j) = s;
            }

        DenseMatrix residual = detail::apply_operator(m, gram_factor, 0.0, ritz_vectors);
        bool converged = true;
        for (std::size_t j = 0; j < dim && converged; ++j) {
            double rr = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                double diff = residual.at(r, j) - ritz_values[j] * ritz_vectors.at(r, j);
                rr += diff * diff;
            }
            if (std::sqrt(rr) > tol) converged = false;
        }
        if (converged) {
            for (std::size_t j = 0; j < dim; ++j) {
                std::size_t arg = 0;
                double best = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    double a = std::abs(ritz_vectors.at(r, j));
                    if (a > best) { best = a; arg = r; }
                }
                if (ritz_vectors.at(arg, j) < 0.0)
                    for (std::size_t r = 0; r < n; ++r) ritz_vectors.at(r, j) = -ritz_vectors.at(r, j);
            }
            return ritz_vectors;
        }
    }
    throw std::runtime_error("spectral_embed: no convergence after max iterations");
}

/// Leading Ritz values alongside the embedding (test and diagnostics hook).
inline std::pair<DenseMatrix, std::vector<double>> spectral_embed_with_values(const CsrMatrix& m,
                                                                              std::size_t dim,
                                                                              std::uint64_t seed) {
    DenseMatrix embedding = spectral_embed(m, dim, seed);
    DenseMatrix image = m.n_rows == m.n_cols && transpose(m) == m
                            ? spmm_dense(m, embedding)
                            : spmm_dense(m, spmm_dense(transpose(m), embedding));
    std::vector<double> values(dim, 0.0);
    for (std::size_t j = 0; j < dim; ++j) {
        double num = 0.0;
        for (std::size_t r = 0; r < m.n_rows; ++r) num += embedding.at(r, j) * image.at(r, j);
        values[j] = num;
    }
    return {std::move(embedding), std::move(values)};
}

}  // namespace glr
