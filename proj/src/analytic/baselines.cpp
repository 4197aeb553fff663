// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "analytic/baselines.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "numerics/matrix.hpp"

namespace proxyrestore::analytic {

using proxyrestore::Error;
using proxyrestore::ErrorCode;
using numerics::Matrix;

namespace {

datagen::InterventionalDistribution residual_do_dist(const datagen::ObservedData& data,
                                                     double coef_t, std::size_t dof_spent) {
    const std::size_t n = data.n();
    double r_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) r_mean += data.y[i] - coef_t * data.t[i];
    r_mean /= static_cast<double>(n);

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = data.y[i] - coef_t * data.t[i] - r_mean;
        ss += r * r;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - dof_spent));
    return datagen::InterventionalDistribution::gaussian_linear(coef_t, sd, r_mean);
}

}  // namespace

RegressionEstimate direct_adjust(const datagen::ObservedData& data, double ridge) {
    if (data.schema.outcome != datagen::VarKind::continuous)
        throw Error(ErrorCode::schema_mismatch, "direct_adjust needs a continuous outcome");
    const std::size_t k = data.proxy_dim();
    const std::size_t p = k + 2;  // proxies, t, intercept
    if (data.n() <= p)
        throw Error(ErrorCode::insufficient_data,
                    "direct_adjust needs n > " + std::to_string(p) + " rows");
    if (ridge < 0.0) throw Error(ErrorCode::invalid_parameter, "ridge must be nonnegative");

    const std::size_t n = data.n();
    // Normal equations over the design [proxies, t, 1], scaled by 1/n so the
    // ridge and the condition threshold act on second moments, not raw sums.
    Matrix g(p, p);
    std::vector<double> rhs(p, 0.0), row(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < k; ++c) row[c] = data.x(i, c);
        row[k] = data.t[i];
        row[k + 1] = 1.0;
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a; b < p; ++b) g(a, b) += row[a] * row[b];
            rhs[a] += row[a] * data.y[i];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t a = 0; a < p; ++a) {
        rhs[a] *= inv_n;
        for (std::size_t b = a; b < p; ++b) {
            g(a, b) *= inv_n;
            g(b, a) = g(a, b);
        }
    }
    for (std::size_t a = 0; a + 1 < p; ++a) g(a, a) += ridge;  // intercept unpenalized

    const double cond = numerics::condition_inf(g);
    if (!(cond <= 1e10))
        throw Error(ErrorCode::collinearity,
                    "rank-deficient regression design (condition " + std::to_string(cond) +
                        "); exact proxy copies need a ridge",
                    cond);

    const std::vector<double> beta = numerics::solve_linear(g, rhs);
    const double coef_t = beta[k];
    return RegressionEstimate{coef_t, residual_do_dist(data, coef_t, 2)};
}

RegressionEstimate no_adjust(const datagen::ObservedData& data) {
    const std::size_t n = data.n();
    if (n < 3) throw Error(ErrorCode::insufficient_data, "no_adjust needs at least 3 rows");

    double t_mean = 0.0, y_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        t_mean += data.t[i];
        y_mean += data.y[i];
    }
    t_mean /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);

    double s_tt = 0.0, s_ty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dt = data.t[i] - t_mean;
        s_tt += dt * dt;
        s_ty += dt * (data.y[i] - y_mean);
    }
    const double var_t = s_tt / static_cast<double>(n - 1);
    if (var_t < 1e-12)
        throw Error(ErrorCode::degenerate_treatment,
                    "treatment variance " + std::to_string(var_t) + " is degenerate", var_t);

    const double coef_t = s_ty / s_tt;
    return RegressionEstimate{coef_t, residual_do_dist(data, coef_t, 2)};
}

}  // namespace proxyrestore::analytic
