// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "datagen/intervention.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace proxyrestore::datagen {

using proxyrestore::Error;
using proxyrestore::ErrorCode;

InterventionalDistribution InterventionalDistribution::gaussian_linear(double slope, double sd,
                                                                       double intercept) {
    if (!(sd > 0.0))
        throw Error(ErrorCode::invalid_parameter, "gaussian-linear do-distribution needs sd > 0");
    InterventionalDistribution d;
    d.kind_ = Kind::gaussian_linear;
    d.slope_ = slope;
    d.sd_ = sd;
    d.intercept_ = intercept;
    return d;
}

InterventionalDistribution InterventionalDistribution::discrete_table(
    const std::array<double, 2>& p_y1_do_t) {
    std::array<std::array<double, 2>, 2> full{};
    for (int t = 0; t < 2; ++t) {
        full[t][1] = p_y1_do_t[t];
        full[t][0] = 1.0 - p_y1_do_t[t];
    }
    return discrete_table_full(full);
}

InterventionalDistribution InterventionalDistribution::discrete_table_full(
    const std::array<std::array<double, 2>, 2>& p_t_y) {
    for (int t = 0; t < 2; ++t) {
        for (int y = 0; y < 2; ++y)
            if (!(p_t_y[t][y] >= 0.0 && p_t_y[t][y] <= 1.0))
                throw Error(ErrorCode::invalid_parameter,
                            "discrete do-table entries must lie in [0,1]");
        if (std::fabs(p_t_y[t][0] + p_t_y[t][1] - 1.0) > 1e-9)
            throw Error(ErrorCode::invalid_parameter,
                        "discrete do-table row t=" + std::to_string(t) +
                            " must sum to 1 within 1e-9");
    }
    InterventionalDistribution d;
    d.kind_ = Kind::discrete_table;
    d.table_ = p_t_y;
    return d;
}

InterventionalDistribution InterventionalDistribution::mc_mixture(ComponentFn components) {
    if (!components)
        throw Error(ErrorCode::invalid_parameter, "mc-mixture needs a component function");
    InterventionalDistribution d;
    d.kind_ = Kind::mc_mixture;
    d.components_ = std::make_shared<const ComponentFn>(std::move(components));
    return d;
}

double InterventionalDistribution::slope() const {
    if (kind_ != Kind::gaussian_linear)
        throw Error(ErrorCode::contract_violation, "slope() on a non-gaussian-linear distribution");
    return slope_;
}

double InterventionalDistribution::sd() const {
    if (kind_ != Kind::gaussian_linear)
        throw Error(ErrorCode::contract_violation, "sd() on a non-gaussian-linear distribution");
    return sd_;
}

double InterventionalDistribution::intercept() const {
    if (kind_ != Kind::gaussian_linear)
        throw Error(ErrorCode::contract_violation,
                    "intercept() on a non-gaussian-linear distribution");
    return intercept_;
}

double InterventionalDistribution::table_prob(int t, int y) const {
    if (kind_ != Kind::discrete_table)
        throw Error(ErrorCode::contract_violation, "table_prob() on a continuous distribution");
    if (t < 0 || t > 1 || y < 0 || y > 1)
        throw Error(ErrorCode::invalid_parameter, "table_prob indices must be 0 or 1");
    return table_[t][y];
}

GaussianMixture InterventionalDistribution::components_at(double t) const {
    switch (kind_) {
        case Kind::gaussian_linear:
            return GaussianMixture{{1.0}, {slope_ * t + intercept_}, {sd_}};
        case Kind::mc_mixture: return (*components_)(t);
        case Kind::discrete_table:
            throw Error(ErrorCode::contract_violation,
                        "components_at() on a discrete distribution");
    }
    return {};
}

double InterventionalDistribution::mean_at(double t) const {
    switch (kind_) {
        case Kind::gaussian_linear: return slope_ * t + intercept_;
        case Kind::discrete_table: {
            const int ti = static_cast<int>(t);
            if (!(t == 0.0 || t == 1.0))
                throw Error(ErrorCode::invalid_parameter,
                            "discrete do-distribution defined only at t in {0,1}");
            return table_[ti][1];
        }
        case Kind::mc_mixture: {
            const GaussianMixture mix = (*components_)(t);
            double m = 0.0, w = 0.0;
            for (std::size_t i = 0; i < mix.weight.size(); ++i) {
                m += mix.weight[i] * mix.mean[i];
                w += mix.weight[i];
            }
            return m / w;
        }
    }
    return 0.0;
}

}  // namespace proxyrestore::datagen
