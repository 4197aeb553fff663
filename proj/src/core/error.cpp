// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "core/error.hpp"

namespace proxyrestore {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_parameter: return "invalid_parameter";
        case ErrorCode::insufficient_data: return "insufficient_data";
        case ErrorCode::singular_matrix: return "singular_matrix";
        case ErrorCode::non_identifiable: return "non_identifiable";
        case ErrorCode::degenerate_variance: return "degenerate_variance";
        case ErrorCode::proxy_degeneracy: return "proxy_degeneracy";
        case ErrorCode::collinearity: return "collinearity";
        case ErrorCode::degenerate_treatment: return "degenerate_treatment";
        case ErrorCode::shape_mismatch: return "shape_mismatch";
        case ErrorCode::schema_mismatch: return "schema_mismatch";
        case ErrorCode::non_finite: return "non_finite";
        case ErrorCode::contract_violation: return "contract_violation";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::unknown_name: return "unknown_name";
    }
    return "unknown";
}

}  // namespace proxyrestore
