// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace proxyrestore::numerics {

// Dense row-major matrix of doubles. Sized for the desk-scale problems in
// this library (covariance blocks, MLP layers); not a general BLAS.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    void resize(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, 0.0);
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Labeled symmetric covariance matrix.
struct CovMatrix {
    std::vector<std::string> labels;
    Matrix entries;

    double operator()(std::size_t i, std::size_t j) const { return entries(i, j); }
    std::size_t dim() const { return entries.rows(); }

    // Throws contract_violation if asymmetric beyond 1e-12 relative
    // tolerance or a diagonal entry is negative.
    void check_invariants() const;
};

// Unbiased (n-1 denominator) sample covariance of a column table.
// columns: n x k matrix whose columns are the variables.
CovMatrix sample_cov(const Matrix& columns, std::vector<std::string> labels = {});

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws singular_matrix (condition estimate attached) when the infinity-norm
// condition number exceeds `condition_limit`. Dimension capped at 64.
std::vector<double> solve_linear(const Matrix& a, std::span<const double> b,
                                 double condition_limit = 1e12);

// Infinity-norm condition number computed via the explicit inverse
// (exact up to roundoff; fine at this library's dimensions).
// Returns +inf for an exactly singular matrix.
double condition_inf(const Matrix& a);

}  // namespace proxyrestore::numerics
