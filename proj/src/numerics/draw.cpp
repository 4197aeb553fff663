// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "numerics/draw.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace proxyrestore::numerics {

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok)
        throw Error(ErrorCode::invalid_parameter, "distribution parameter '" + field + "' " + why);
}

}  // namespace

Distribution Distribution::gaussian(double mean, double sd) {
    require(sd > 0.0, "sd", "must be positive");
    return {Kind::gaussian, mean, sd};
}

Distribution Distribution::gamma(double shape, double scale) {
    require(shape > 0.0, "shape", "must be positive");
    require(scale > 0.0, "scale", "must be positive");
    return {Kind::gamma, shape, scale};
}

Distribution Distribution::beta(double a, double b) {
    require(a > 0.0, "a", "must be positive");
    require(b > 0.0, "b", "must be positive");
    return {Kind::beta, a, b};
}

Distribution Distribution::bernoulli(double p) {
    require(p >= 0.0 && p <= 1.0, "p", "must lie in [0,1]");
    return {Kind::bernoulli, p, 0.0};
}

Distribution Distribution::categorical(std::vector<double> probs) {
    require(!probs.empty(), "probs", "must be nonempty");
    double sum = 0.0;
    for (double p : probs) {
        require(p >= 0.0, "probs", "entries must be nonnegative");
        sum += p;
    }
    require(std::fabs(sum - 1.0) <= 1e-9, "probs", "must sum to 1 within 1e-9");
    return Distribution(std::move(probs));
}

double Distribution::mean() const {
    switch (kind_) {
        case Kind::gaussian: return p0_;
        case Kind::gamma: return p0_ * p1_;
        case Kind::beta: return p0_ / (p0_ + p1_);
        case Kind::bernoulli: return p0_;
        case Kind::categorical: {
            double m = 0.0;
            for (std::size_t i = 0; i < probs_.size(); ++i) m += static_cast<double>(i) * probs_[i];
            return m;
        }
    }
    return 0.0;
}

double Distribution::variance() const {
    switch (kind_) {
        case Kind::gaussian: return p1_ * p1_;
        case Kind::gamma: return p0_ * p1_ * p1_;
        case Kind::beta: {
            const double s = p0_ + p1_;
            return p0_ * p1_ / (s * s * (s + 1.0));
        }
        case Kind::bernoulli: return p0_ * (1.0 - p0_);
        case Kind::categorical: {
            const double m = mean();
            double v = 0.0;
            for (std::size_t i = 0; i < probs_.size(); ++i) {
                const double d = static_cast<double>(i) - m;
                v += d * d * probs_[i];
            }
            return v;
        }
    }
    return 0.0;
}

double sample_gamma(double shape, double scale, RandomStream& stream) {
    // Marsaglia-Tsang squeeze for shape >= 1; boost via u^(1/shape) below 1.
    if (shape < 1.0) {
        const double u = stream.next_unit_pos();
        return sample_gamma(shape + 1.0, scale, stream) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = stream.next_gaussian();
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = stream.next_unit_pos();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

double sample_beta(double a, double b, RandomStream& stream) {
    const double x = sample_gamma(a, 1.0, stream);
    const double y = sample_gamma(b, 1.0, stream);
    return x / (x + y);
}

double Distribution::sample(RandomStream& stream) const {
    switch (kind_) {
        case Kind::gaussian: return p0_ + p1_ * stream.next_gaussian();
        case Kind::gamma: return sample_gamma(p0_, p1_, stream);
        case Kind::beta: return sample_beta(p0_, p1_, stream);
        case Kind::bernoulli: return stream.next_unit() < p0_ ? 1.0 : 0.0;
        case Kind::categorical: {
            const double u = stream.next_unit();
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < probs_.size(); ++i) {
                acc += probs_[i];
                if (u < acc) return static_cast<double>(i);
            }
            return static_cast<double>(probs_.size() - 1);
        }
    }
    return 0.0;
}

std::vector<double> draw(const Distribution& spec, RandomStream stream, std::size_t n) {
    std::vector<double> out(n);
    if (spec.kind() == Distribution::Kind::gaussian) {
        // Block fill keeps the Box-Muller pairing; then shift/scale.
        stream.fill_gaussian(out);
        const double m = spec.mean();
        const double sd = std::sqrt(spec.variance());
        for (double& v : out) v = m + sd * v;
        return out;
    }
    for (double& v : out) v = spec.sample(stream);
    return out;
}

}  // namespace proxyrestore::numerics
