// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace proxyrestore::datagen {

// Equal-length component arrays of a finite Gaussian mixture at one
// treatment value.
struct GaussianMixture {
    std::vector<double> weight;
    std::vector<double> mean;
    std::vector<double> sd;
};

// A representation of p(y|do(t)) in one of three forms:
//  - gaussian_linear: y|do(t) ~ N(slope*t + intercept, sd^2) for all t
//  - discrete_table:  p(y|do(t)) for binary t and y
//  - mc_mixture:      finite Gaussian mixture whose components depend on t
//                     (e.g. decoder heads evaluated at prior draws)
class InterventionalDistribution {
  public:
    enum class Kind { gaussian_linear, discrete_table, mc_mixture };

    // Defaults to the standard normal N(0,1) at every t.
    InterventionalDistribution() = default;

    using ComponentFn = std::function<GaussianMixture(double t)>;

    static InterventionalDistribution gaussian_linear(double slope, double sd,
                                                      double intercept = 0.0);
    // p_y1_do_t[t] = p(y=1|do(t)); rows are completed with p(y=0) = 1 - p(y=1).
    static InterventionalDistribution discrete_table(const std::array<double, 2>& p_y1_do_t);
    // Full 2x2 form p[t][y]; each row must sum to 1 within 1e-9.
    static InterventionalDistribution discrete_table_full(
        const std::array<std::array<double, 2>, 2>& p_t_y);
    static InterventionalDistribution mc_mixture(ComponentFn components);

    Kind kind() const { return kind_; }
    bool discrete() const { return kind_ == Kind::discrete_table; }

    double slope() const;
    double sd() const;
    double intercept() const;

    // p(y|do(t)) for t, y in {0,1}.
    double table_prob(int t, int y) const;

    // Mixture components at treatment value t (continuous kinds only).
    GaussianMixture components_at(double t) const;

    // E[y|do(t)]. For the discrete kind t must be 0 or 1.
    double mean_at(double t) const;

  private:
    Kind kind_ = Kind::gaussian_linear;
    double slope_ = 0.0, sd_ = 1.0, intercept_ = 0.0;
    std::array<std::array<double, 2>, 2> table_{};
    std::shared_ptr<const ComponentFn> components_;
};

}  // namespace proxyrestore::datagen
