// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "numerics/gaussian.hpp"

#include <string>

#include "core/error.hpp"

namespace proxyrestore::numerics {

double gaussian_kl_diag(std::span<const double> mean, std::span<const double> sd) {
    if (mean.size() != sd.size())
        throw Error(ErrorCode::invalid_parameter, "gaussian_kl_diag: mean/sd length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < sd.size(); ++i) {
        if (!(sd[i] > 0.0))
            throw Error(ErrorCode::invalid_parameter,
                        "gaussian_kl_diag: sd[" + std::to_string(i) + "] must be positive");
        total += gaussian_kl_term(mean[i], sd[i]);
    }
    return total;
}

double gaussian_logpdf(double y, double mean, double sd) {
    if (!(sd > 0.0))
        throw Error(ErrorCode::invalid_parameter, "gaussian_logpdf: sd must be positive");
    return gaussian_logpdf_unchecked(y, mean, sd);
}

}  // namespace proxyrestore::numerics
