// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "analytic/restore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.hpp"

namespace proxyrestore::analytic {

using proxyrestore::Error;
using proxyrestore::ErrorCode;
using numerics::Matrix;

LinGaussRestoration restore_lingauss(const numerics::CovMatrix& cov) {
    if (cov.dim() != 4)
        throw Error(ErrorCode::shape_mismatch, "restore_lingauss expects a 4x4 (x1,x2,t,y) matrix");
    cov.check_invariants();

    const double c_x1x2 = cov(0, 1);
    const double c_x1t = cov(0, 2);
    const double c_x2t = cov(1, 2);
    const double c_x1y = cov(0, 3);
    const double c_x2y = cov(1, 3);
    const double c_ty = cov(2, 3);
    const double v_t = cov(2, 2);
    const double v_y = cov(3, 3);

    const double denom = v_t * c_x1x2 - c_x1t * c_x2t;
    if (std::fabs(denom) <= 1e-9 || std::fabs(c_x1x2) <= 1e-9)
        throw Error(ErrorCode::non_identifiable,
                    "covariance denominators too close to zero (Var(t)Cov(x1,x2)-Cov(x1,t)Cov(x2,t)=" +
                        std::to_string(denom) + ", Cov(x1,x2)=" + std::to_string(c_x1x2) + ")");

    LinGaussRestoration r;
    r.c_yt_hat = (c_ty * c_x1x2 - c_x2y * c_x1t) / denom;

    // The printed solution uses Var(t)Cov(x2,t)/Cov(x1,x2) here, which does
    // not reproduce c_t^2 from the covariance entries it was solved from;
    // Cov(x1,t)Cov(x2,t)/Cov(x1,x2) = c1 c_t c2 c_t / (c1 c2) does.
    r.c_t_sq_hat = c_x1t * c_x2t / c_x1x2;
    r.sigma_t_sq_hat = v_t - r.c_t_sq_hat;
    r.c_t_c_yz_hat = c_ty - r.c_yt_hat * r.sigma_t_sq_hat - r.c_t_sq_hat * r.c_yt_hat;

    if (std::fabs(c_x2t) > 1e-9) {
        const double inner = c_ty * c_x2t - v_t * c_x2y;
        r.c_yz_sq_hat = c_x1t * c_x1x2 * inner * inner / (c_x2t * denom * denom);
    } else {
        // Unconfounded treatment boundary (Cov(x2,t) -> 0 makes the primary
        // form 0/0): Cov(x1,y)Cov(x2,y)/Cov(x1,x2) = (c_t c_yt + c_yz)^2,
        // from which the cross terms already recovered above peel off.
        const double loading_sq = c_x1y * c_x2y / c_x1x2;
        r.c_yz_sq_hat = loading_sq - 2.0 * r.c_yt_hat * r.c_t_c_yz_hat -
                        r.c_t_sq_hat * r.c_yt_hat * r.c_yt_hat;
    }

    r.sigma_y_sq_hat = v_y - r.c_yz_sq_hat - r.c_yt_hat * r.c_yt_hat * r.sigma_t_sq_hat -
                       2.0 * r.c_yt_hat * r.c_t_c_yz_hat - r.c_t_sq_hat * r.c_yt_hat * r.c_yt_hat;

    const double do_var = r.sigma_y_sq_hat + r.c_yz_sq_hat;
    if (!(do_var > 0.0))
        throw Error(ErrorCode::degenerate_variance,
                    "implied do-variance is nonpositive (sigma_y^2=" +
                        std::to_string(r.sigma_y_sq_hat) + ", c_yz^2=" +
                        std::to_string(r.c_yz_sq_hat) + ")",
                    do_var);
    r.do_dist = datagen::InterventionalDistribution::gaussian_linear(r.c_yt_hat, std::sqrt(do_var));
    return r;
}

namespace {

inline double cell(const std::array<double, 16>& joint, int x1, int x2, int t, int y) {
    return joint[x1 * 8 + x2 * 4 + t * 2 + y];
}

}  // namespace

datagen::InterventionalDistribution restore_binary(const std::array<double, 16>& joint) {
    for (double p : joint)
        if (!(p >= 0.0) || !std::isfinite(p))
            throw Error(ErrorCode::invalid_parameter, "joint table entries must be nonnegative");

    // P(x1 = .) marginal.
    double p_x1[2] = {0.0, 0.0};
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2)
            for (int t = 0; t < 2; ++t)
                for (int y = 0; y < 2; ++y) p_x1[x1] += cell(joint, x1, x2, t, y);

    std::array<double, 2> p_y1_do{};
    for (int t = 0; t < 2; ++t) {
        double p_tx2[2];  // P(t, x2 = .)
        for (int x2 = 0; x2 < 2; ++x2) {
            p_tx2[x2] = 0.0;
            for (int x1 = 0; x1 < 2; ++x1)
                for (int y = 0; y < 2; ++y) p_tx2[x2] += cell(joint, x1, x2, t, y);
            if (!(p_tx2[x2] > 0.0))
                throw Error(ErrorCode::insufficient_data,
                            "empty conditioning cell (t=" + std::to_string(t) +
                                ", x2=" + std::to_string(x2) + ")");
        }

        // M[x1][x2] = P(x1 | t, x2), v[y][x2] = P(y | t, x2).
        Matrix m(2, 2);
        double v[2][2];
        for (int x2 = 0; x2 < 2; ++x2) {
            for (int x1 = 0; x1 < 2; ++x1) {
                double p_x1tx2 = 0.0;
                for (int y = 0; y < 2; ++y) p_x1tx2 += cell(joint, x1, x2, t, y);
                m(x1, x2) = p_x1tx2 / p_tx2[x2];
            }
            for (int y = 0; y < 2; ++y) {
                double p_ytx2 = 0.0;
                for (int x1 = 0; x1 < 2; ++x1) p_ytx2 += cell(joint, x1, x2, t, y);
                v[y][x2] = p_ytx2 / p_tx2[x2];
            }
        }

        const double cond = numerics::condition_inf(m);
        if (!(cond <= 1e8))
            throw Error(ErrorCode::proxy_degeneracy,
                        "proxy matrix P(x1|t,x2) at t=" + std::to_string(t) +
                            " is ill-conditioned (condition " + std::to_string(cond) + ")",
                        cond);

        // w = M^-1 P(x1 = .), then p(y|do(t)) = sum_x2 P(y|t,x2) w[x2].
        const std::vector<double> w = numerics::solve_linear(m, std::span<const double>(p_x1, 2));
        double p_do[2];
        for (int y = 0; y < 2; ++y) p_do[y] = v[y][0] * w[0] + v[y][1] * w[1];

        p_do[0] = std::clamp(p_do[0], 0.0, 1.0);
        p_do[1] = std::clamp(p_do[1], 0.0, 1.0);
        const double total = p_do[0] + p_do[1];
        if (!(total > 0.0))
            throw Error(ErrorCode::degenerate_variance,
                        "restored do-probabilities vanish at t=" + std::to_string(t));
        p_y1_do[t] = p_do[1] / total;
    }
    return datagen::InterventionalDistribution::discrete_table(p_y1_do);
}

std::array<double, 16> empirical_joint(const datagen::ObservedData& data) {
    if (!data.schema.all_binary())
        throw Error(ErrorCode::schema_mismatch, "empirical_joint needs an all-binary dataset");
    if (data.proxy_dim() != 2)
        throw Error(ErrorCode::schema_mismatch, "empirical_joint needs exactly two proxies");
    if (data.n() == 0) throw Error(ErrorCode::insufficient_data, "empty dataset");

    std::array<double, 16> joint{};
    const double w = 1.0 / static_cast<double>(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const int x1 = data.x(i, 0) != 0.0;
        const int x2 = data.x(i, 1) != 0.0;
        const int t = data.t[i] != 0.0;
        const int y = data.y[i] != 0.0;
        joint[x1 * 8 + x2 * 4 + t * 2 + y] += w;
    }
    return joint;
}

}  // namespace proxyrestore::analytic
