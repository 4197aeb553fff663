// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "analytic/baselines.hpp"
#include "analytic/restore.hpp"
#include "core/error.hpp"
#include "datagen/process.hpp"
#include "doctest.h"

using namespace proxyrestore;
using namespace proxyrestore::analytic;
using datagen::BinaryParams;
using datagen::LinearGaussianParams;
using datagen::PlainVariant;
using datagen::ProcessVariant;
using datagen::RepeatedProxyVariant;
using numerics::Matrix;
using numerics::RandomStream;

namespace {

const LinearGaussianParams kProcess1{-0.53, 0.92, 0.99, -1.15, 0.46, 0.71, 1.02, 1.14, 0.84};

BinaryParams main_binary() {
    BinaryParams p;
    p.p_z = 0.56;
    p.p_x1_given_z = {0.56, 0.73};
    p.p_x2_given_z = {0.94, 0.26};
    p.p_t_given_z = {0.71, 0.16};
    p.p_y_given_zt = {0.57, 0.36, 0.17, 0.04};
    return p;
}

const LinearGaussianParams kRepeated{1.0, 1.0, 0.5, 0.6, 1.0, 2.0, 2.0, 1.0, 1.0};

}  // namespace

TEST_CASE("restoration from the Process 1 population covariance") {
    const auto r = restore_lingauss(datagen::population_cov_lingauss(kProcess1));
    CHECK(std::fabs(r.c_yt_hat - 0.46) < 1e-6);
    CHECK(std::fabs(r.c_yz_sq_hat - 1.3225) < 1e-3);
    CHECK(std::fabs(r.sigma_y_sq_hat - 0.7056) < 1e-3);
    CHECK(std::fabs(r.c_t_sq_hat - 0.9801) < 1e-6);
    CHECK(std::fabs(r.sigma_t_sq_hat - 1.14 * 1.14) < 1e-6);
    CHECK(std::fabs(r.c_t_c_yz_hat - 0.99 * (-1.15)) < 1e-6);
    CHECK(r.do_dist.slope() == doctest::Approx(r.c_yt_hat));
    CHECK(r.do_dist.sd() == doctest::Approx(std::sqrt(0.7056 + 1.3225)));
}

TEST_CASE("restoration is exact on population covariances of random processes") {
    int accepted = 0;
    std::uint64_t stream_id = 0;
    while (accepted < 100) {
        const auto p = datagen::sample_lingauss_params(RandomStream(61, stream_id++));
        const auto cov = datagen::population_cov_lingauss(p);
        const double denom = cov(2, 2) * cov(0, 1) - cov(0, 2) * cov(1, 2);
        if (std::fabs(denom) <= 1e-3 || std::fabs(cov(0, 1)) <= 1e-3) continue;
        ++accepted;
        const auto r = restore_lingauss(cov);
        CHECK(std::fabs(r.c_yt_hat - p.c_yt) <= 1e-9 * std::max(1.0, std::fabs(p.c_yt)));
        CHECK(std::fabs(r.c_yz_sq_hat - p.c_yz * p.c_yz) <=
              1e-9 * std::max(1.0, p.c_yz * p.c_yz));
        CHECK(std::fabs(r.sigma_t_sq_hat - p.sigma_t * p.sigma_t) <=
              1e-9 * std::max(1.0, p.sigma_t * p.sigma_t));
        CHECK(std::fabs(r.sigma_y_sq_hat - p.sigma_y * p.sigma_y) <=
              1e-9 * std::max(1.0, p.sigma_y * p.sigma_y));
    }
}

TEST_CASE("unconfounded treatment reduces to the regression slope") {
    LinearGaussianParams p = kProcess1;
    p.c_t = 0.0;
    const auto cov = datagen::population_cov_lingauss(p);
    const auto r = restore_lingauss(cov);
    CHECK(r.c_yt_hat == doctest::Approx(cov(2, 3) / cov(2, 2)));
    CHECK(r.c_yt_hat == doctest::Approx(p.c_yt));
}

TEST_CASE("identifiability guards") {
    LinearGaussianParams p = kProcess1;
    p.c1 = 0.0;  // Cov(x1,x2) = 0
    try {
        restore_lingauss(datagen::population_cov_lingauss(p));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_identifiable);
    }

    // Shrinking Var(y) below the implied variance forces sigma_y^2 + c_yz^2
    // negative. Needs c_t c_yz > 0, hence the sign flip on c_yz.
    LinearGaussianParams flipped = kProcess1;
    flipped.c_yz = 1.15;
    auto cov = datagen::population_cov_lingauss(flipped);
    cov.entries(3, 3) = 0.1;
    try {
        restore_lingauss(cov);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_variance);
        CHECK(doctest::String(e.what()).size() > 0);
    }
}

TEST_CASE("binary restoration reproduces the truth on the exact joint") {
    const auto dist = restore_binary(datagen::population_joint(main_binary()));
    CHECK(std::fabs(dist.table_prob(0, 1) - 0.3460) <= 1e-10);
    CHECK(std::fabs(dist.table_prob(1, 1) - 0.1808) <= 1e-10);
}

TEST_CASE("binary restoration is exact for 100 well-conditioned processes") {
    int accepted = 0;
    std::uint64_t stream_id = 0;
    while (accepted < 100) {
        const auto p = datagen::sample_binary_params(RandomStream(71, stream_id++));
        // Keep only processes whose proxy matrices are comfortably regular.
        const auto joint = datagen::population_joint(p);
        bool ok = true;
        for (int t = 0; t < 2 && ok; ++t) {
            Matrix m(2, 2);
            for (int x2 = 0; x2 < 2; ++x2) {
                double p_tx2 = 0.0;
                for (int x1 = 0; x1 < 2; ++x1)
                    for (int y = 0; y < 2; ++y) p_tx2 += joint[x1 * 8 + x2 * 4 + t * 2 + y];
                for (int x1 = 0; x1 < 2; ++x1) {
                    double c = 0.0;
                    for (int y = 0; y < 2; ++y) c += joint[x1 * 8 + x2 * 4 + t * 2 + y];
                    m(x1, x2) = c / p_tx2;
                }
            }
            ok = numerics::condition_inf(m) < 100.0;
        }
        if (!ok) continue;
        ++accepted;
        const auto truth = datagen::true_do(p);
        const auto dist = restore_binary(joint);
        for (int t = 0; t < 2; ++t)
            CHECK(std::fabs(dist.table_prob(t, 1) - truth.table_prob(t, 1)) <= 1e-10);
    }
}

TEST_CASE("binary restoration with an outcome-independent confounder") {
    BinaryParams p = main_binary();
    p.p_y_given_zt = {0.37, 0.81, 0.37, 0.81};  // p(y|z,t) = p(y|t)
    const auto joint = datagen::population_joint(p);
    const auto dist = restore_binary(joint);
    // p(y|do(t)) must equal p(y|t) from the joint.
    for (int t = 0; t < 2; ++t) {
        double p_t = 0.0, p_ty1 = 0.0;
        for (int x1 = 0; x1 < 2; ++x1)
            for (int x2 = 0; x2 < 2; ++x2) {
                p_t += joint[x1 * 8 + x2 * 4 + t * 2 + 0] + joint[x1 * 8 + x2 * 4 + t * 2 + 1];
                p_ty1 += joint[x1 * 8 + x2 * 4 + t * 2 + 1];
            }
        CHECK(std::fabs(dist.table_prob(t, 1) - p_ty1 / p_t) <= 1e-12);
    }
}

TEST_CASE("uninformative proxy raises proxy degeneracy") {
    BinaryParams p = main_binary();
    p.p_x1_given_z = {0.5, 0.5};
    try {
        restore_binary(datagen::population_joint(p));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::proxy_degeneracy);
    }
}

TEST_CASE("empty conditioning cell raises insufficient data") {
    std::array<double, 16> joint{};
    // All mass on t = 0: the (t=1, x2) cells are empty.
    joint[0 * 8 + 0 * 4 + 0 * 2 + 0] = 0.5;
    joint[1 * 8 + 1 * 4 + 0 * 2 + 1] = 0.5;
    try {
        restore_binary(joint);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::insufficient_data);
    }
}

TEST_CASE("empirical joint counts cells") {
    const auto data = datagen::generate(main_binary(), 50000, RandomStream(81, 0));
    const auto joint = empirical_joint(data.observed());
    double total = 0.0;
    for (const double v : joint) total += v;
    CHECK(total == doctest::Approx(1.0));
    const auto pop = datagen::population_joint(main_binary());
    for (int i = 0; i < 16; ++i) CHECK(std::fabs(joint[i] - pop[i]) < 0.02);
}

TEST_CASE("direct adjustment is consistent without confounding") {
    LinearGaussianParams p = kProcess1;
    p.c_yz = 0.0;
    const std::size_t n = 100000;
    const auto data = datagen::generate(ProcessVariant{p, PlainVariant{}}, n, RandomStream(91, 0));
    const auto fit = direct_adjust(data.observed());

    // OLS standard error of the t coefficient via the normal equations.
    const auto obs = data.observed();
    Matrix g(4, 4);
    for (std::size_t i = 0; i < n; ++i) {
        const double row[4] = {obs.x(i, 0), obs.x(i, 1), obs.t[i], 1.0};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) g(a, b) += row[a] * row[b];
    }
    std::vector<double> unit(4, 0.0);
    unit[2] = 1.0;
    const double g_inv_tt = numerics::solve_linear(g, unit)[2];
    const double se = fit.do_dist.sd() * std::sqrt(g_inv_tt);
    CHECK(std::fabs(fit.coef_t - p.c_yt) <= 3.0 * se);
}

TEST_CASE("exact copies need a ridge") {
    ProcessVariant exact{kRepeated, RepeatedProxyVariant{0.0, true}};
    const auto data = datagen::generate(exact, 2000, RandomStream(92, 0));
    try {
        direct_adjust(data.observed());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::collinearity);
    }
    const auto fit = direct_adjust(data.observed(), 1e-6);
    CHECK(std::isfinite(fit.coef_t));
}

TEST_CASE("direct adjustment matches the population coefficient on noisy copies") {
    // Population regression oracle from the process's full covariance,
    // assembled independently of the estimator.
    const LinearGaussianParams& p = kRepeated;
    const double copy_sd = 0.1;
    const auto base = datagen::population_cov_lingauss(p);
    // Regressors (x1, x2, x1~, x2~, t); response y.
    Matrix sigma(5, 5);
    std::vector<double> sigma_y(5);
    const auto base_idx = [](int i) { return i < 2 ? i : (i < 4 ? i - 2 : 2); };
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            sigma(i, j) = base(base_idx(i), base_idx(j));
            if (i == j && i >= 2 && i < 4) sigma(i, j) += copy_sd * copy_sd;
        }
        sigma_y[i] = base(base_idx(i), 3);
    }
    const auto beta = numerics::solve_linear(sigma, sigma_y);
    const double population_coef = beta[4];
    CHECK(population_coef == doctest::Approx(1.1714285714).epsilon(1e-6));

    const std::size_t n = 1000000;
    ProcessVariant noisy{p, RepeatedProxyVariant{copy_sd, false}};
    const auto data = datagen::generate(noisy, n, RandomStream(93, 0));
    const auto fit = direct_adjust(data.observed());
    // Generous SE bound: residual sd over sqrt(n * residual variance of t).
    const double se = 3.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(fit.coef_t - population_coef) <= 3.0 * se);
}

TEST_CASE("no adjustment recovers Cov(t,y)/Var(t)") {
    // Population value for the repeated-proxy process: 1.55 / 1.25 = 1.24.
    const auto base = datagen::population_cov_lingauss(kRepeated);
    CHECK(base(2, 3) / base(2, 2) == doctest::Approx(1.24));

    const std::size_t n = 100000;
    ProcessVariant noisy{kRepeated, RepeatedProxyVariant{0.1, false}};
    const auto data = datagen::generate(noisy, n, RandomStream(94, 0));
    const auto fit = no_adjust(data.observed());
    const double se = fit.do_dist.sd() / std::sqrt(static_cast<double>(n) * base(2, 2));
    CHECK(std::fabs(fit.coef_t - 1.24) <= 3.0 * se);

    LinearGaussianParams unconfounded = kProcess1;
    unconfounded.c_yz = 0.0;
    const auto clean = datagen::generate(ProcessVariant{unconfounded, PlainVariant{}}, 100000,
                                         RandomStream(94, 1));
    const auto clean_fit = no_adjust(clean.observed());
    CHECK(std::fabs(clean_fit.coef_t - unconfounded.c_yt) < 0.05);
}

TEST_CASE("constant treatment is degenerate") {
    Matrix x(10, 2);
    std::vector<double> t(10, 1.0), y(10);
    for (int i = 0; i < 10; ++i) y[i] = i;
    datagen::Dataset data(std::move(x), std::move(t), std::move(y), datagen::Schema{});
    try {
        no_adjust(data.observed());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_treatment);
    }
}

TEST_CASE("direct adjustment preconditions") {
    Matrix x(4, 2);
    std::vector<double> t{0, 1, 0, 1}, y{0, 1, 1, 0};
    datagen::Dataset tiny(std::move(x), std::move(t), std::move(y), datagen::Schema{});
    CHECK_THROWS_AS(direct_adjust(tiny.observed()), Error);  // n <= proxies + 2

    const auto bin = datagen::generate(main_binary(), 100, RandomStream(95, 0));
    CHECK_THROWS_AS(direct_adjust(bin.observed()), Error);  // binary outcome
}
