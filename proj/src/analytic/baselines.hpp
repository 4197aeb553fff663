// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "datagen/dataset.hpp"
#include "datagen/intervention.hpp"

namespace proxyrestore::analytic {

struct RegressionEstimate {
    double coef_t = 0;
    datagen::InterventionalDistribution do_dist;
};

// Least-squares fit of y on (all proxies, t, intercept). The do-distribution
// is N(coef_t * t + r_bar, sd(r)^2) with r = y - coef_t * t, i.e. the
// population direct-adjustment functional for linear data.
// ridge > 0 adds ridge to the non-intercept normal-equation diagonal, which
// keeps exact proxy copies solvable; with ridge = 0 such designs raise a
// collinearity error (condition > 1e10).
RegressionEstimate direct_adjust(const datagen::ObservedData& data, double ridge = 0.0);

// Least-squares fit of y on t alone; population value Cov(t,y)/Var(t).
RegressionEstimate no_adjust(const datagen::ObservedData& data);

}  // namespace proxyrestore::analytic
