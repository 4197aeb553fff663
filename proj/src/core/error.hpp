// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace proxyrestore {

// Error taxonomy shared by the whole library. The C API maps these codes
// one-to-one onto pr_status values.
enum class ErrorCode : int {
    invalid_parameter = 1,   // parameter outside its domain
    insufficient_data = 2,   // too few rows / empty conditioning cell
    singular_matrix = 3,     // linear solve beyond condition threshold
    non_identifiable = 4,    // covariance denominators below threshold
    degenerate_variance = 5, // negative implied variance
    proxy_degeneracy = 6,    // uninformative proxy matrix
    collinearity = 7,        // rank-deficient regression design
    degenerate_treatment = 8,
    shape_mismatch = 9,
    schema_mismatch = 10,
    non_finite = 11,
    contract_violation = 12,
    io_error = 13,
    unknown_name = 14,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    Error(ErrorCode code, const std::string& what, double detail)
        : std::runtime_error(what), code_(code), detail_(detail) {}

    ErrorCode code() const { return code_; }

    // Numeric payload, e.g. the condition estimate of a singular solve.
    double detail() const { return detail_; }

  private:
    ErrorCode code_;
    double detail_ = std::nan("");
};

const char* error_code_name(ErrorCode code);

}  // namespace proxyrestore
