// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "numerics/random.hpp"

namespace proxyrestore::numerics {

// Distribution specification for draw(). Parameters are validated at
// construction; gamma is (shape, scale).
class Distribution {
  public:
    enum class Kind { gaussian, gamma, beta, bernoulli, categorical };

    static Distribution gaussian(double mean, double sd);
    static Distribution gamma(double shape, double scale);
    static Distribution beta(double a, double b);
    static Distribution bernoulli(double p);
    static Distribution categorical(std::vector<double> probs);

    Kind kind() const { return kind_; }
    double mean() const;      // analytic mean (categorical: mean index)
    double variance() const;  // analytic variance

    double sample(RandomStream& stream) const;

  private:
    Distribution(Kind kind, double p0, double p1) : kind_(kind), p0_(p0), p1_(p1) {}
    explicit Distribution(std::vector<double> probs)
        : kind_(Kind::categorical), probs_(std::move(probs)) {}

    Kind kind_;
    double p0_ = 0.0, p1_ = 0.0;
    std::vector<double> probs_;
};

// n i.i.d. draws from the given stream (passed by value: a stream is an
// immutable descriptor, so identical calls yield identical vectors).
std::vector<double> draw(const Distribution& spec, RandomStream stream, std::size_t n);

// Scalar samplers used by the generators; they advance the given stream.
double sample_gamma(double shape, double scale, RandomStream& stream);
double sample_beta(double a, double b, RandomStream& stream);

}  // namespace proxyrestore::numerics
