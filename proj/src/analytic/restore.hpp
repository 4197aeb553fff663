// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "datagen/dataset.hpp"
#include "datagen/intervention.hpp"
#include "numerics/matrix.hpp"

namespace proxyrestore::analytic {

// Closed-form restoration of the linear-Gaussian process from the observed
// (x1, x2, t, y) covariances. The recovered pieces identify p(y|do(t)) as
// N(c_yt * t, c_yz^2 + sigma_y^2).
struct LinGaussRestoration {
    double c_yt_hat = 0;
    double c_yz_sq_hat = 0;  // nonnegative in population; sampling noise can dip below 0
    double c_t_sq_hat = 0;
    double sigma_t_sq_hat = 0;
    double c_t_c_yz_hat = 0;
    double sigma_y_sq_hat = 0;
    datagen::InterventionalDistribution do_dist;
};

// cov must be the 4x4 covariance over (x1, x2, t, y) in that order.
// Throws non_identifiable when a solve denominator is within 1e-9 of zero
// and degenerate_variance when the implied do-variance is nonpositive.
LinGaussRestoration restore_lingauss(const numerics::CovMatrix& cov);

// Effect restoration for the all-binary process from the (empirical or
// exact) 16-cell joint over (x1, x2, t, y), flattened as x1*8 + x2*4 + t*2 + y.
// For each t it evaluates P(y|t,X2=.)^T [P(X1|t,X2=.)]^-1 P(X1=.), clips to
// [0,1] and renormalizes over y. Exact joints reproduce the adjustment-sum
// truth exactly.
datagen::InterventionalDistribution restore_binary(const std::array<double, 16>& joint);

// Empirical 16-cell joint of an all-binary dataset.
std::array<double, 16> empirical_joint(const datagen::ObservedData& data);

}  // namespace proxyrestore::analytic
