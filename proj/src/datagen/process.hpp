// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <variant>

#include "datagen/dataset.hpp"
#include "datagen/intervention.hpp"
#include "numerics/matrix.hpp"
#include "numerics/random.hpp"

namespace proxyrestore::datagen {

using numerics::RandomStream;

// Structural parameters of the linear-Gaussian confounded process
//   z ~ N(0,1), x1|z ~ N(c1 z, s1^2), x2|z ~ N(c2 z, s2^2),
//   t|z ~ N(c_t z, s_t^2), y|z,t ~ N(c_yz z + c_yt t, s_y^2).
struct LinearGaussianParams {
    double c1 = 0, c2 = 0, c_t = 0, c_yz = 0, c_yt = 0;
    double sigma_x1 = 1, sigma_x2 = 1, sigma_t = 1, sigma_y = 1;

    void validate() const;  // all sigmas > 0
};

// Structural parameters of the all-binary process on the same graph.
struct BinaryParams {
    double p_z = 0.5;
    std::array<double, 2> p_x1_given_z{0.5, 0.5};  // indexed by z
    std::array<double, 2> p_x2_given_z{0.5, 0.5};
    std::array<double, 2> p_t_given_z{0.5, 0.5};
    std::array<double, 4> p_y_given_zt{0.5, 0.5, 0.5, 0.5};  // index z*2 + t

    double p_y(int z, int t) const { return p_y_given_zt[z * 2 + t]; }
    void validate() const;  // all probabilities strictly inside (0,1)
};

struct PlainVariant {};

// Appends a third pure-noise proxy x3 ~ N(0, sigma_x3^2) and rotates the
// proxy triple by R = Rz(yaw) * Ry(pitch) * Rx(roll).
struct RotatedNoiseVariant {
    double sigma_x3 = 20.0;
    double yaw = 0.7853981633974483;
    double pitch = 0.7853981633974483;
    double roll = 0.7853981633974483;
};

// Appends noisy (or exact) copies of both proxies.
struct RepeatedProxyVariant {
    double copy_noise_sd = 0.1;
    bool exact_copies = false;
};

struct ProcessVariant {
    LinearGaussianParams base;
    std::variant<PlainVariant, RotatedNoiseVariant, RepeatedProxyVariant> variant;

    std::size_t proxy_dim() const;
};

// Parameter samplers matching the randomized-process protocol: sigmas from
// Gamma(1,5); coefficients sign * (sigma/2 + sigma * Gamma(0.3,4)) with a
// fair sign flip, which forces |c|/sigma >= 1/2.
LinearGaussianParams sample_lingauss_params(RandomStream stream);

// All 11 probabilities i.i.d. Beta(2,2), clipped to [0.01, 0.99].
BinaryParams sample_binary_params(RandomStream stream);

// Ancestral sampling of n observations; the confounder is stored in the
// dataset's hidden column. Throws insufficient_data for n = 0.
Dataset generate(const ProcessVariant& process, std::size_t n, RandomStream stream);
Dataset generate(const BinaryParams& params, std::size_t n, RandomStream stream);

// Population covariance of (x1, x2, t, y) in closed form.
numerics::CovMatrix population_cov_lingauss(const LinearGaussianParams& p);

// Ground-truth p(y|do(t)). Structural variants inherit the base truth:
// rotations and proxy copies do not touch the t -> y mechanism.
InterventionalDistribution true_do(const LinearGaussianParams& p);
InterventionalDistribution true_do(const ProcessVariant& p);
InterventionalDistribution true_do(const BinaryParams& p);

// Exact 16-cell joint p(x1, x2, t, y), flattened as x1*8 + x2*4 + t*2 + y.
std::array<double, 16> population_joint(const BinaryParams& p);

// p(t=1) marginal of the binary process.
double treatment_marginal(const BinaryParams& p);

// The 3x3 rotation used by RotatedNoiseVariant (exposed for tests).
numerics::Matrix rotation_matrix(double yaw, double pitch, double roll);

}  // namespace proxyrestore::datagen
