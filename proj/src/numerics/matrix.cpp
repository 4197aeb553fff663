// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "numerics/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace proxyrestore::numerics {

void CovMatrix::check_invariants() const {
    const std::size_t k = dim();
    if (entries.cols() != k)
        throw Error(ErrorCode::contract_violation, "covariance matrix is not square");
    for (std::size_t i = 0; i < k; ++i) {
        if (entries(i, i) < 0.0)
            throw Error(ErrorCode::contract_violation,
                        "covariance diagonal entry " + std::to_string(i) + " is negative");
        for (std::size_t j = i + 1; j < k; ++j) {
            const double scale = std::max({std::fabs(entries(i, j)), std::fabs(entries(j, i)), 1.0});
            if (std::fabs(entries(i, j) - entries(j, i)) > 1e-12 * scale)
                throw Error(ErrorCode::contract_violation, "covariance matrix is asymmetric");
        }
    }
}

CovMatrix sample_cov(const Matrix& columns, std::vector<std::string> labels) {
    const std::size_t n = columns.rows();
    const std::size_t k = columns.cols();
    if (n < 2)
        throw Error(ErrorCode::insufficient_data,
                    "sample_cov needs at least 2 rows, got " + std::to_string(n));

    std::vector<double> mean(k, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = columns.row(r);
        for (std::size_t c = 0; c < k; ++c) mean[c] += row[c];
    }
    for (double& m : mean) m /= static_cast<double>(n);

    Matrix cov(k, k);
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = columns.row(r);
        for (std::size_t i = 0; i < k; ++i) {
            const double di = row[i] - mean[i];
            for (std::size_t j = i; j < k; ++j)
                cov(i, j) += di * (row[j] - mean[j]);
        }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            cov(i, j) /= denom;
            cov(j, i) = cov(i, j);
        }

    if (labels.empty())
        for (std::size_t c = 0; c < k; ++c) labels.push_back("v" + std::to_string(c));
    return CovMatrix{std::move(labels), std::move(cov)};
}

namespace {

// LU with partial pivoting, in place. Returns false on an exactly zero pivot.
bool lu_factor(Matrix& a, std::vector<std::size_t>& perm) {
    const std::size_t n = a.rows();
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::fabs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::fabs(a(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best == 0.0) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(pivot, c));
            std::swap(perm[col], perm[pivot]);
        }
        const double inv = 1.0 / a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) * inv;
            a(r, col) = f;
            for (std::size_t c = col + 1; c < n; ++c) a(r, c) -= f * a(col, c);
        }
    }
    return true;
}

void lu_solve(const Matrix& lu, const std::vector<std::size_t>& perm,
              std::span<const double> b, std::vector<double>& x) {
    const std::size_t n = lu.rows();
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
        x[i] /= lu(i, i);
    }
}

double norm_inf(const Matrix& a) {
    double best = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) s += std::fabs(a(r, c));
        best = std::max(best, s);
    }
    return best;
}

void check_square(const Matrix& a) {
    if (a.rows() != a.cols())
        throw Error(ErrorCode::invalid_parameter, "matrix must be square");
    if (a.rows() == 0)
        throw Error(ErrorCode::invalid_parameter, "matrix must be nonempty");
    if (a.rows() > 64)
        throw Error(ErrorCode::invalid_parameter,
                    "dense solves are capped at dimension 64, got " + std::to_string(a.rows()));
}

}  // namespace

double condition_inf(const Matrix& a) {
    check_square(a);
    const std::size_t n = a.rows();
    Matrix lu = a;
    std::vector<std::size_t> perm;
    if (!lu_factor(lu, perm)) return std::numeric_limits<double>::infinity();

    Matrix inv(n, n);
    std::vector<double> e(n, 0.0), col;
    for (std::size_t j = 0; j < n; ++j) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        lu_solve(lu, perm, e, col);
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(col[i])) return std::numeric_limits<double>::infinity();
            inv(i, j) = col[i];
        }
    }
    return norm_inf(a) * norm_inf(inv);
}

std::vector<double> solve_linear(const Matrix& a, std::span<const double> b,
                                 double condition_limit) {
    check_square(a);
    if (b.size() != a.rows())
        throw Error(ErrorCode::invalid_parameter, "right-hand side length mismatch");

    const double cond = condition_inf(a);
    if (!(cond <= condition_limit))
        throw Error(ErrorCode::singular_matrix,
                    "linear system condition estimate " + std::to_string(cond) +
                        " exceeds limit " + std::to_string(condition_limit),
                    cond);

    Matrix lu = a;
    std::vector<std::size_t> perm;
    lu_factor(lu, perm);
    std::vector<double> x;
    lu_solve(lu, perm, b, x);
    return x;
}

}  // namespace proxyrestore::numerics
