// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "datagen/dataset.hpp"
#include "datagen/intervention.hpp"
#include "numerics/random.hpp"

namespace proxyrestore::metrics {

using datagen::InterventionalDistribution;

// Discretization of the AID integrals. The outer expectation over p(t) uses
// t_sample_count empirical draws; the inner integral uses a trapezoid grid
// spanning both distributions' component means +- bounds_multiplier * max sd.
struct AidSpec {
    int t_sample_count = 1000;
    double y_bounds_multiplier = 6.0;
    int y_grid_points = 2001;  // must be odd

    void validate() const;
};

// Average Interventional Distance between two continuous do-distributions,
// with the outer expectation taken over the given treatment draws.
double aid(const InterventionalDistribution& est, const InterventionalDistribution& truth,
           std::span<const double> t_draws, const AidSpec& spec = {});

// Discrete AID: exact double sum weighted by p(t=1).
double aid_discrete(const InterventionalDistribution& est,
                    const InterventionalDistribution& truth, double p_t1);

// Dispatches on the distributions' domain kind: continuous distributions use
// t_sample_count draws (with replacement) from the dataset's treatment
// column; discrete pairs use the empirical p(t). Mixed kinds are an error.
double aid(const InterventionalDistribution& est, const InterventionalDistribution& truth,
           const datagen::ObservedData& data, const AidSpec& spec,
           numerics::RandomStream stream);

// |ATE_est - ATE_true| with ATE = E[y|do(1)] - E[y|do(0)].
double ate_error(const InterventionalDistribution& est, const InterventionalDistribution& truth);

// E[y|do(t)] for each requested treatment value.
std::vector<double> do_means(const InterventionalDistribution& dist,
                             std::span<const double> t_values);

}  // namespace proxyrestore::metrics
