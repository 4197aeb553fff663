// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>

namespace proxyrestore::numerics {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

// KL[N(mean, diag(sd^2)) || N(0, I)] = sum_i (sd_i^2 + mean_i^2)/2 - ln sd_i - 1/2.
// Throws invalid_parameter on a nonpositive sd.
double gaussian_kl_diag(std::span<const double> mean, std::span<const double> sd);

// log N(y; mean, sd^2). Throws invalid_parameter on a nonpositive sd.
double gaussian_logpdf(double y, double mean, double sd);

// Unchecked single-coordinate versions for hot loops that already
// guarantee sd > 0.
inline double gaussian_kl_term(double mean, double sd) {
    return 0.5 * (sd * sd + mean * mean) - std::log(sd) - 0.5;
}

inline double gaussian_logpdf_unchecked(double y, double mean, double sd) {
    const double z = (y - mean) / sd;
    return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * z * z;
}

}  // namespace proxyrestore::numerics
