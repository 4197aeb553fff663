// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "datagen/process.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "numerics/draw.hpp"

namespace proxyrestore::datagen {

using proxyrestore::Error;
using proxyrestore::ErrorCode;
using numerics::Matrix;

void LinearGaussianParams::validate() const {
    const double sds[] = {sigma_x1, sigma_x2, sigma_t, sigma_y};
    const char* names[] = {"sigma_x1", "sigma_x2", "sigma_t", "sigma_y"};
    for (int i = 0; i < 4; ++i)
        if (!(sds[i] > 0.0))
            throw Error(ErrorCode::invalid_parameter,
                        std::string(names[i]) + " must be positive");
}

void BinaryParams::validate() const {
    auto check = [](double p, const char* name) {
        if (!(p > 0.0 && p < 1.0))
            throw Error(ErrorCode::invalid_parameter,
                        std::string(name) + " must lie strictly inside (0,1)");
    };
    check(p_z, "p_z");
    for (int z = 0; z < 2; ++z) {
        check(p_x1_given_z[z], "p_x1_given_z");
        check(p_x2_given_z[z], "p_x2_given_z");
        check(p_t_given_z[z], "p_t_given_z");
        for (int t = 0; t < 2; ++t) check(p_y(z, t), "p_y_given_zt");
    }
}

std::size_t ProcessVariant::proxy_dim() const {
    if (std::holds_alternative<RotatedNoiseVariant>(variant)) return 3;
    if (std::holds_alternative<RepeatedProxyVariant>(variant)) return 4;
    return 2;
}

namespace {

// Substream layout for generation; fixed so that structural variants reuse
// the base draws (an exact-copy column is bitwise equal to its original).
enum : std::uint64_t {
    kSubZ = 0,
    kSubX1 = 1,
    kSubX2 = 2,
    kSubT = 3,
    kSubY = 4,
    kSubX3 = 5,
    kSubCopy1 = 6,
    kSubCopy2 = 7,
};

std::vector<double> gaussian_block(RandomStream stream, std::size_t n) {
    std::vector<double> out(n);
    stream.fill_gaussian(out);
    return out;
}

double sample_coefficient(double sigma, RandomStream& stream) {
    const double g = numerics::sample_gamma(0.3, 4.0, stream);
    const double sign = stream.next_unit() < 0.5 ? -1.0 : 1.0;
    return sign * (sigma / 2.0 + sigma * g);
}

}  // namespace

LinearGaussianParams sample_lingauss_params(RandomStream stream) {
    LinearGaussianParams p;
    p.sigma_x1 = numerics::sample_gamma(1.0, 5.0, stream);
    p.sigma_x2 = numerics::sample_gamma(1.0, 5.0, stream);
    p.sigma_t = numerics::sample_gamma(1.0, 5.0, stream);
    p.sigma_y = numerics::sample_gamma(1.0, 5.0, stream);
    p.c1 = sample_coefficient(p.sigma_x1, stream);
    p.c2 = sample_coefficient(p.sigma_x2, stream);
    p.c_t = sample_coefficient(p.sigma_t, stream);
    p.c_yz = sample_coefficient(p.sigma_y, stream);
    p.c_yt = sample_coefficient(p.sigma_y, stream);
    return p;
}

BinaryParams sample_binary_params(RandomStream stream) {
    auto next = [&stream]() {
        return std::clamp(numerics::sample_beta(2.0, 2.0, stream), 0.01, 0.99);
    };
    BinaryParams p;
    p.p_z = next();
    for (int z = 0; z < 2; ++z) p.p_x1_given_z[z] = next();
    for (int z = 0; z < 2; ++z) p.p_x2_given_z[z] = next();
    for (int z = 0; z < 2; ++z) p.p_t_given_z[z] = next();
    for (int i = 0; i < 4; ++i) p.p_y_given_zt[i] = next();
    return p;
}

Dataset generate(const ProcessVariant& process, std::size_t n, RandomStream stream) {
    if (n == 0) throw Error(ErrorCode::insufficient_data, "cannot generate an empty dataset");
    const LinearGaussianParams& p = process.base;
    p.validate();

    const std::vector<double> z = gaussian_block(stream.substream(kSubZ), n);
    const std::vector<double> e1 = gaussian_block(stream.substream(kSubX1), n);
    const std::vector<double> e2 = gaussian_block(stream.substream(kSubX2), n);
    const std::vector<double> et = gaussian_block(stream.substream(kSubT), n);
    const std::vector<double> ey = gaussian_block(stream.substream(kSubY), n);

    const std::size_t k = process.proxy_dim();
    Matrix x(n, k);
    std::vector<double> t(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = p.c1 * z[i] + p.sigma_x1 * e1[i];
        x(i, 1) = p.c2 * z[i] + p.sigma_x2 * e2[i];
        t[i] = p.c_t * z[i] + p.sigma_t * et[i];
        y[i] = p.c_yz * z[i] + p.c_yt * t[i] + p.sigma_y * ey[i];
    }

    if (const auto* rot = std::get_if<RotatedNoiseVariant>(&process.variant)) {
        if (!(rot->sigma_x3 > 0.0))
            throw Error(ErrorCode::invalid_parameter, "sigma_x3 must be positive");
        const std::vector<double> e3 = gaussian_block(stream.substream(kSubX3), n);
        const Matrix r = rotation_matrix(rot->yaw, rot->pitch, rot->roll);
        for (std::size_t i = 0; i < n; ++i) {
            const double v[3] = {x(i, 0), x(i, 1), rot->sigma_x3 * e3[i]};
            for (int row = 0; row < 3; ++row)
                x(i, row) = r(row, 0) * v[0] + r(row, 1) * v[1] + r(row, 2) * v[2];
        }
    } else if (const auto* rep = std::get_if<RepeatedProxyVariant>(&process.variant)) {
        if (rep->copy_noise_sd < 0.0)
            throw Error(ErrorCode::invalid_parameter, "copy_noise_sd must be nonnegative");
        const bool exact = rep->exact_copies || rep->copy_noise_sd == 0.0;
        std::vector<double> d1, d2;
        if (!exact) {
            d1 = gaussian_block(stream.substream(kSubCopy1), n);
            d2 = gaussian_block(stream.substream(kSubCopy2), n);
        }
        for (std::size_t i = 0; i < n; ++i) {
            x(i, 2) = x(i, 0) + (exact ? 0.0 : rep->copy_noise_sd * d1[i]);
            x(i, 3) = x(i, 1) + (exact ? 0.0 : rep->copy_noise_sd * d2[i]);
        }
    }

    return Dataset(std::move(x), std::move(t), std::move(y), Schema{}, z);
}

Dataset generate(const BinaryParams& params, std::size_t n, RandomStream stream) {
    if (n == 0) throw Error(ErrorCode::insufficient_data, "cannot generate an empty dataset");
    params.validate();

    RandomStream sz = stream.substream(kSubZ);
    RandomStream s1 = stream.substream(kSubX1);
    RandomStream s2 = stream.substream(kSubX2);
    RandomStream st = stream.substream(kSubT);
    RandomStream sy = stream.substream(kSubY);

    Matrix x(n, 2);
    std::vector<double> t(n), y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int zi = sz.next_unit() < params.p_z ? 1 : 0;
        z[i] = zi;
        x(i, 0) = s1.next_unit() < params.p_x1_given_z[zi] ? 1.0 : 0.0;
        x(i, 1) = s2.next_unit() < params.p_x2_given_z[zi] ? 1.0 : 0.0;
        const int ti = st.next_unit() < params.p_t_given_z[zi] ? 1 : 0;
        t[i] = ti;
        y[i] = sy.next_unit() < params.p_y(zi, ti) ? 1.0 : 0.0;
    }
    const Schema schema{VarKind::binary, VarKind::binary, VarKind::binary};
    return Dataset(std::move(x), std::move(t), std::move(y), schema, std::move(z));
}

numerics::CovMatrix population_cov_lingauss(const LinearGaussianParams& p) {
    p.validate();
    Matrix c(4, 4);
    const double load_y = p.c_t * p.c_yt + p.c_yz;  // Cov(x_i, y) / c_i
    c(0, 0) = p.c1 * p.c1 + p.sigma_x1 * p.sigma_x1;
    c(0, 1) = p.c1 * p.c2;
    c(0, 2) = p.c1 * p.c_t;
    c(0, 3) = p.c1 * load_y;
    c(1, 1) = p.c2 * p.c2 + p.sigma_x2 * p.sigma_x2;
    c(1, 2) = p.c2 * p.c_t;
    c(1, 3) = p.c2 * load_y;
    c(2, 2) = p.c_t * p.c_t + p.sigma_t * p.sigma_t;
    c(2, 3) = p.c_t * p.c_t * p.c_yt + p.c_t * p.c_yz + p.c_yt * p.sigma_t * p.sigma_t;
    c(3, 3) = p.c_t * p.c_t * p.c_yt * p.c_yt + 2.0 * p.c_t * p.c_yt * p.c_yz +
              p.c_yt * p.c_yt * p.sigma_t * p.sigma_t + p.c_yz * p.c_yz + p.sigma_y * p.sigma_y;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) c(i, j) = c(j, i);
    return numerics::CovMatrix{{"x1", "x2", "t", "y"}, std::move(c)};
}

InterventionalDistribution true_do(const LinearGaussianParams& p) {
    p.validate();
    const double sd = std::sqrt(p.sigma_y * p.sigma_y + p.c_yz * p.c_yz);
    return InterventionalDistribution::gaussian_linear(p.c_yt, sd);
}

InterventionalDistribution true_do(const ProcessVariant& p) { return true_do(p.base); }

InterventionalDistribution true_do(const BinaryParams& p) {
    p.validate();
    std::array<double, 2> p_y1{};
    for (int t = 0; t < 2; ++t)
        p_y1[t] = (1.0 - p.p_z) * p.p_y(0, t) + p.p_z * p.p_y(1, t);
    return InterventionalDistribution::discrete_table(p_y1);
}

std::array<double, 16> population_joint(const BinaryParams& p) {
    p.validate();
    std::array<double, 16> joint{};
    for (int z = 0; z < 2; ++z) {
        const double pz = z ? p.p_z : 1.0 - p.p_z;
        for (int x1 = 0; x1 < 2; ++x1) {
            const double px1 = x1 ? p.p_x1_given_z[z] : 1.0 - p.p_x1_given_z[z];
            for (int x2 = 0; x2 < 2; ++x2) {
                const double px2 = x2 ? p.p_x2_given_z[z] : 1.0 - p.p_x2_given_z[z];
                for (int t = 0; t < 2; ++t) {
                    const double pt = t ? p.p_t_given_z[z] : 1.0 - p.p_t_given_z[z];
                    for (int y = 0; y < 2; ++y) {
                        const double py = y ? p.p_y(z, t) : 1.0 - p.p_y(z, t);
                        joint[x1 * 8 + x2 * 4 + t * 2 + y] += pz * px1 * px2 * pt * py;
                    }
                }
            }
        }
    }
    return joint;
}

double treatment_marginal(const BinaryParams& p) {
    return (1.0 - p.p_z) * p.p_t_given_z[0] + p.p_z * p.p_t_given_z[1];
}

numerics::Matrix rotation_matrix(double yaw, double pitch, double roll) {
    const double ca = std::cos(yaw), sa = std::sin(yaw);
    const double cb = std::cos(pitch), sb = std::sin(pitch);
    const double cg = std::cos(roll), sg = std::sin(roll);
    // Rz(yaw) * Ry(pitch) * Rx(roll), multiplied out.
    Matrix r(3, 3);
    r(0, 0) = ca * cb;
    r(0, 1) = ca * sb * sg - sa * cg;
    r(0, 2) = ca * sb * cg + sa * sg;
    r(1, 0) = sa * cb;
    r(1, 1) = sa * sb * sg + ca * cg;
    r(1, 2) = sa * sb * cg - ca * sg;
    r(2, 0) = -sb;
    r(2, 1) = cb * sg;
    r(2, 2) = cb * cg;
    return r;
}

}  // namespace proxyrestore::datagen
