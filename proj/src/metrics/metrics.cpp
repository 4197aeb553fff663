// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "numerics/gaussian.hpp"

namespace proxyrestore::metrics {

using proxyrestore::Error;
using proxyrestore::ErrorCode;
using datagen::GaussianMixture;

void AidSpec::validate() const {
    if (t_sample_count < 1)
        throw Error(ErrorCode::invalid_parameter, "t_sample_count must be positive");
    if (!(y_bounds_multiplier > 0.0))
        throw Error(ErrorCode::invalid_parameter, "y bounds multiplier must be positive");
    if (y_grid_points < 3 || y_grid_points % 2 == 0)
        throw Error(ErrorCode::invalid_parameter, "y_grid_points must be odd and at least 3");
}

namespace {

// Adds w * N(y; mean, sd^2) evaluated on the uniform grid lo + k*h to acc.
// Uses the constant-ratio recurrence for exp of a quadratic: starting from
// the peak, f(k+1) = f(k) * rho(k) with rho(k+1) = rho(k) * exp(-h^2/sd^2),
// so the grid costs two multiplies per point instead of an exp each.
void accumulate_component(std::vector<double>& acc, double lo, double h, double w, double mean,
                          double sd) {
    const std::size_t points = acc.size();
    const double inv_var = 1.0 / (sd * sd);
    const double peak_w = w / (sd * 2.5066282746310005024);  // w / (sd sqrt(2pi))

    const double k_star_real = std::clamp((mean - lo) / h, 0.0, static_cast<double>(points - 1));
    const std::size_t k0 = static_cast<std::size_t>(std::llround(k_star_real));
    const double y0 = lo + static_cast<double>(k0) * h;
    const double d0 = y0 - mean;
    const double f0 = peak_w * std::exp(-0.5 * d0 * d0 * inv_var);
    acc[k0] += f0;

    const double ratio_step = std::exp(-h * h * inv_var);
    // Upward sweep: f(y+h)/f(y) = exp(-(2h(y-mean)+h^2) / (2 sd^2)).
    double f = f0;
    double rho = std::exp(-(h * d0 + 0.5 * h * h) * inv_var);
    for (std::size_t k = k0 + 1; k < points; ++k) {
        f *= rho;
        rho *= ratio_step;
        if (f == 0.0) break;
        acc[k] += f;
    }
    // Downward sweep, mirrored.
    f = f0;
    rho = std::exp((h * d0 - 0.5 * h * h) * inv_var);
    for (std::size_t k = k0; k-- > 0;) {
        f *= rho;
        rho *= ratio_step;
        if (f == 0.0) break;
        acc[k] += f;
    }
}

void mixture_density(const GaussianMixture& mix, double lo, double h, std::vector<double>& acc) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t i = 0; i < mix.weight.size(); ++i)
        accumulate_component(acc, lo, h, mix.weight[i], mix.mean[i], mix.sd[i]);
}

void mixture_bounds(const GaussianMixture& mix, double mult, double& lo, double& hi) {
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    double max_sd = 0.0;
    for (std::size_t i = 0; i < mix.mean.size(); ++i) {
        mn = std::min(mn, mix.mean[i]);
        mx = std::max(mx, mix.mean[i]);
        max_sd = std::max(max_sd, mix.sd[i]);
    }
    lo = std::min(lo, mn - mult * max_sd);
    hi = std::max(hi, mx + mult * max_sd);
}

}  // namespace

double aid(const InterventionalDistribution& est, const InterventionalDistribution& truth,
           std::span<const double> t_draws, const AidSpec& spec) {
    spec.validate();
    if (est.discrete() || truth.discrete())
        throw Error(ErrorCode::schema_mismatch,
                    "continuous AID called with a discrete distribution");
    if (t_draws.empty())
        throw Error(ErrorCode::insufficient_data, "AID needs at least one treatment draw");

    const std::size_t points = static_cast<std::size_t>(spec.y_grid_points);
    std::vector<double> f_est(points), f_truth(points);
    double total = 0.0;
    for (const double t : t_draws) {
        const GaussianMixture me = est.components_at(t);
        const GaussianMixture mt = truth.components_at(t);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        mixture_bounds(me, spec.y_bounds_multiplier, lo, hi);
        mixture_bounds(mt, spec.y_bounds_multiplier, lo, hi);
        const double h = (hi - lo) / static_cast<double>(points - 1);

        mixture_density(me, lo, h, f_est);
        mixture_density(mt, lo, h, f_truth);

        double inner = 0.0;
        for (std::size_t k = 0; k < points; ++k) {
            const double v = std::fabs(f_est[k] - f_truth[k]);
            inner += (k == 0 || k + 1 == points) ? 0.5 * v : v;
        }
        total += inner * h;
    }
    return total / static_cast<double>(t_draws.size());
}

double aid_discrete(const InterventionalDistribution& est,
                    const InterventionalDistribution& truth, double p_t1) {
    if (!est.discrete() || !truth.discrete())
        throw Error(ErrorCode::schema_mismatch, "discrete AID needs two discrete distributions");
    if (!(p_t1 >= 0.0 && p_t1 <= 1.0))
        throw Error(ErrorCode::invalid_parameter, "p(t=1) must lie in [0,1]");
    double total = 0.0;
    for (int t = 0; t < 2; ++t) {
        const double w = t == 1 ? p_t1 : 1.0 - p_t1;
        double inner = 0.0;
        for (int y = 0; y < 2; ++y) inner += std::fabs(est.table_prob(t, y) - truth.table_prob(t, y));
        total += w * inner;
    }
    return total;
}

double aid(const InterventionalDistribution& est, const InterventionalDistribution& truth,
           const datagen::ObservedData& data, const AidSpec& spec,
           numerics::RandomStream stream) {
    if (est.discrete() != truth.discrete())
        throw Error(ErrorCode::schema_mismatch,
                    "cannot mix discrete and continuous do-distributions in AID");
    if (data.n() == 0) throw Error(ErrorCode::insufficient_data, "empty dataset");
    if (est.discrete()) {
        double p_t1 = 0.0;
        for (const double t : data.t) p_t1 += t != 0.0 ? 1.0 : 0.0;
        return aid_discrete(est, truth, p_t1 / static_cast<double>(data.n()));
    }
    spec.validate();
    std::vector<double> draws(static_cast<std::size_t>(spec.t_sample_count));
    for (double& d : draws)
        d = data.t[static_cast<std::size_t>(stream.next_unit() * static_cast<double>(data.n()))];
    return aid(est, truth, draws, spec);
}

double ate_error(const InterventionalDistribution& est, const InterventionalDistribution& truth) {
    const double ate_est = est.mean_at(1.0) - est.mean_at(0.0);
    const double ate_true = truth.mean_at(1.0) - truth.mean_at(0.0);
    return std::fabs(ate_est - ate_true);
}

std::vector<double> do_means(const InterventionalDistribution& dist,
                             std::span<const double> t_values) {
    std::vector<double> out;
    out.reserve(t_values.size());
    for (const double t : t_values) out.push_back(dist.mean_at(t));
    return out;
}

}  // namespace proxyrestore::metrics
