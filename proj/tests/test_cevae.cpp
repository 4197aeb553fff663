// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>

#include "cevae/cevae.hpp"
#include "core/error.hpp"
#include "datagen/process.hpp"
#include "doctest.h"
#include "numerics/gaussian.hpp"

using namespace proxyrestore;
using namespace proxyrestore::cevae;
using datagen::BinaryParams;
using datagen::LinearGaussianParams;
using datagen::PlainVariant;
using datagen::ProcessVariant;
using datagen::Schema;
using datagen::VarKind;
using numerics::RandomStream;

namespace {

const LinearGaussianParams kMain{1.03, 1.47, 1.0, 0.71, -0.62, 0.65, 0.96, 1.25, 0.48};

datagen::Dataset small_continuous(std::size_t n, std::uint64_t sub) {
    return datagen::generate(ProcessVariant{kMain, PlainVariant{}}, n, RandomStream(1000, sub));
}

BinaryParams main_binary() {
    BinaryParams p;
    p.p_z = 0.56;
    p.p_x1_given_z = {0.56, 0.73};
    p.p_x2_given_z = {0.94, 0.26};
    p.p_t_given_z = {0.71, 0.16};
    p.p_y_given_zt = {0.57, 0.36, 0.17, 0.04};
    return p;
}

std::vector<double> model_flat(const CevaeModel& m) {
    std::vector<double> flat(m.flat_size());
    m.to_flat(flat);
    return flat;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

TEST_CASE("prior-matching encoder with z-blind decoders gives a pure likelihood ELBO") {
    const auto data = small_continuous(64, 0);
    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 1;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(2, 0));

    // Zero everything: encoder emits N(0,1) = the prior, decoders emit
    // N(0,1) for every conditional.
    std::vector<double> flat(model.flat_size(), 0.0);
    model.from_flat(flat);

    Matrix eps(64, 1);
    RandomStream noise(3, 0);
    noise.fill_gaussian(eps.flat());
    const ElboResult res =
        elbo_with_noise(model, data.observed(), 1.0, 1.0, eps, nullptr);

    CHECK(res.kl_term == 0.0);
    double expect = 0.0;
    const auto obs = data.observed();
    for (std::size_t i = 0; i < obs.n(); ++i) {
        double ll = 0.0;
        for (int j = 0; j < 2; ++j) ll += numerics::gaussian_logpdf(obs.x(i, j), 0.0, 1.0);
        ll += numerics::gaussian_logpdf(obs.t[i], 0.0, 1.0);
        ll += numerics::gaussian_logpdf(obs.y[i], 0.0, 1.0);
        expect += ll;
    }
    expect /= static_cast<double>(obs.n());
    CHECK(res.elbo == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("hand-built single observation composes the numerics primitives") {
    // One datapoint, fixed z, all sds 1: the ELBO must equal three
    // gaussian_logpdf calls minus gaussian_kl_diag.
    Matrix x(1, 2);
    x(0, 0) = 0.3;
    x(0, 1) = -0.7;
    datagen::Dataset data(std::move(x), {0.9}, {-1.1}, Schema{});

    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 1;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(4, 0));
    std::vector<double> flat(model.flat_size(), 0.0);
    model.from_flat(flat);
    // Encoder mean = 0.5 * x1; decoders read z with loading 1.
    model.enc.layers()[0].w(0, 0) = 0.5;
    model.xdec.layers()[0].w(0, 0) = 1.0;
    model.xdec.layers()[0].w(1, 0) = 1.0;
    model.tdec.layers()[0].w(0, 0) = 1.0;
    model.ydec.layers()[0].w(0, 0) = 1.0;
    model.ydec.layers()[0].w(0, 1) = 0.25;  // gamma_yt

    Matrix eps(1, 1);
    eps(0, 0) = 0.6;
    const ElboResult res = elbo_with_noise(model, data.observed(), 2.0, 0.7, eps, nullptr);

    const double mu = 0.5 * 0.3;
    const double unit_sd = 1.0;
    const double z = mu + 1.0 * 0.6;
    const double x_ll = numerics::gaussian_logpdf(0.3, z, 1.0) +
                        numerics::gaussian_logpdf(-0.7, z, 1.0);
    const double t_ll = numerics::gaussian_logpdf(0.9, z, 1.0);
    const double y_ll = numerics::gaussian_logpdf(-1.1, z + 0.25 * 0.9, 1.0);
    const double kl = numerics::gaussian_kl_diag(std::span(&mu, 1), std::span(&unit_sd, 1));
    CHECK(res.elbo == doctest::Approx(2.0 * x_ll + t_ll + y_ll - 0.7 * kl).epsilon(1e-12));
    CHECK(res.x_term_unscaled == doctest::Approx(x_ll).epsilon(1e-12));
    CHECK(res.kl_term == doctest::Approx(kl).epsilon(1e-12));
}

TEST_CASE("zero proxy scale removes the x term exactly") {
    const auto data = small_continuous(32, 1);
    CevaeConfig config;
    config.latent_dim = 3;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(5, 0));
    Matrix eps(32, 3);
    RandomStream noise(6, 0);
    noise.fill_gaussian(eps.flat());
    const ElboResult res = elbo_with_noise(model, data.observed(), 0.0, 1.0, eps, nullptr);
    CHECK(res.x_term_scaled == 0.0);
    CHECK(res.elbo ==
          doctest::Approx(res.t_term + res.y_term - res.kl_term).epsilon(1e-12));
}

TEST_CASE("elbo gradients match finite differences for every variant") {
    struct Case {
        const char* name;
        Variant variant;
        YHead y_head;
        int latent;
        bool binary;
    };
    const Case cases[] = {
        {"full continuous", Variant::full, YHead::mlp, 3, false},
        {"full linear-y", Variant::full, YHead::linear, 2, false},
        {"linear", Variant::linear, YHead::linear, 2, false},
        {"full binary", Variant::full, YHead::mlp, 2, true},
        {"binary latent", Variant::binary_latent, YHead::mlp, 1, true},
    };
    for (const Case& c : cases) {
        CAPTURE(c.name);
        datagen::Dataset data = c.binary
                                    ? datagen::generate(main_binary(), 16, RandomStream(7, 1))
                                    : small_continuous(16, 2);
        CevaeConfig config;
        config.variant = c.variant;
        config.y_head = c.y_head;
        config.latent_dim = c.latent;
        config.hidden_layers = 2;
        config.hidden_width = 8;
        CevaeModel model = build_model(config, data.schema(), 2, RandomStream(8, 3));

        Matrix eps(16, model.config.latent_dim);
        RandomStream noise(9, 0);
        noise.fill_gaussian(eps.flat());

        const double lambda = 0.8, klw = 0.9;
        std::vector<double> grads;
        elbo_with_noise(model, data.observed(), lambda, klw, eps, &grads);

        std::vector<double> flat = model_flat(model);
        RandomStream pick(10, 0);
        const double h = 1e-5;
        for (int probe = 0; probe < 60; ++probe) {
            const std::size_t idx =
                static_cast<std::size_t>(pick.next_unit() * static_cast<double>(flat.size()));
            CevaeModel bumped = model;
            std::vector<double> tweaked = flat;
            tweaked[idx] = flat[idx] + h;
            bumped.from_flat(tweaked);
            const double up =
                elbo_with_noise(bumped, data.observed(), lambda, klw, eps, nullptr).elbo;
            tweaked[idx] = flat[idx] - h;
            bumped.from_flat(tweaked);
            const double down =
                elbo_with_noise(bumped, data.observed(), lambda, klw, eps, nullptr).elbo;
            const double fd = (up - down) / (2.0 * h);
            const double scale = std::max({std::fabs(fd), std::fabs(grads[idx]), 1e-6});
            CHECK(std::fabs(fd - grads[idx]) / scale < 1e-3);
        }
    }
}

TEST_CASE("training is deterministic in the stream") {
    const auto data = small_continuous(300, 3);
    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 1;
    config.epochs = 20;
    config.batch_size = 100;
    const auto a = train(config, data.observed(), RandomStream(11, 5));
    const auto b = train(config, data.observed(), RandomStream(11, 5));
    CHECK(model_flat(a.model) == model_flat(b.model));
    CHECK(a.report.final_elbo() == b.report.final_elbo());

    const auto c = train(config, data.observed(), RandomStream(11, 6));
    CHECK(model_flat(c.model) != model_flat(a.model));
}

TEST_CASE("zero proxy scale leaves the x decoder untouched during training") {
    const auto data = small_continuous(300, 4);
    CevaeConfig config;
    config.epochs = 5;
    config.batch_size = 100;
    config.latent_dim = 2;
    config.proxy_scale = 0.0;
    CevaeModel init = build_model(config, data.schema(), 2, RandomStream(12, 0).substream(100));
    std::vector<double> xdec_before(init.xdec.flat_size());
    init.xdec.to_flat(xdec_before);

    const auto out = train(config, data.observed(), RandomStream(12, 0));
    std::vector<double> xdec_after(out.model.xdec.flat_size());
    out.model.xdec.to_flat(xdec_after);
    CHECK(xdec_before == xdec_after);
}

TEST_CASE("ELBO rises and plateaus on an easy problem") {
    const auto data = small_continuous(2000, 5);
    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 1;
    config.epochs = 120;
    const auto out = train(config, data.observed(), RandomStream(13, 0));
    const auto& epochs = out.report.epochs;
    CHECK(epochs.back().elbo > epochs.front().elbo);
    double running_max = -1e300;
    for (std::size_t e = epochs.size() - 20; e < epochs.size(); ++e) {
        running_max = std::max(running_max, epochs[e].elbo);
        // The running max of noisy epoch means sits above a typical epoch,
        // so the tolerance is on the batch-fluctuation scale.
        CHECK(epochs[e].elbo >= running_max - 2.0 * std::max(epochs[e].elbo_batch_sd, 1e-6));
    }
}

TEST_CASE("schema and configuration guards") {
    const auto bin = datagen::generate(main_binary(), 50, RandomStream(14, 0));
    CevaeConfig linear_cfg;
    linear_cfg.variant = Variant::linear;
    CHECK_THROWS_AS(build_model(linear_cfg, bin.schema(), 2, RandomStream(1, 1)), Error);

    const auto cont = small_continuous(50, 6);
    CevaeConfig bl;
    bl.variant = Variant::binary_latent;
    CHECK_THROWS_AS(build_model(bl, cont.schema(), 2, RandomStream(1, 1)), Error);

    CevaeConfig big_batch;
    big_batch.batch_size = 100;
    big_batch.epochs = 1;
    CHECK_THROWS_AS(train(big_batch, small_continuous(50, 7).observed(), RandomStream(1, 1)),
                    Error);
}

TEST_CASE("non-finite data is reported with epoch and batch indices") {
    Matrix x(40, 2);
    std::vector<double> t(40, 0.5), y(40, 0.5);
    y[7] = std::nan("");
    datagen::Dataset data(std::move(x), std::move(t), std::move(y), Schema{});
    CevaeConfig config;
    config.epochs = 2;
    config.batch_size = 40;
    try {
        train(config, data.observed(), RandomStream(15, 0));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_finite);
        CHECK(doctest::String(e.what()) == doctest::Contains("epoch 0"));
    }
}

TEST_CASE("estimate_do with a z-blind y decoder is exact for any sample count") {
    const auto data = small_continuous(100, 8);
    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 2;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(16, 0));
    std::vector<double> flat(model.flat_size(), 0.0);
    model.from_flat(flat);
    auto& yw = model.ydec.layers()[0].w;
    yw(0, 0) = 0.0;
    yw(0, 1) = 0.0;
    yw(0, 2) = -0.62;  // y depends on t only

    const double ts[] = {0.0, 1.0, 2.5};
    const auto few = estimate_do(model, ts, 3, RandomStream(17, 0));
    const auto many = estimate_do(model, ts, 400, RandomStream(17, 1));
    for (const double t : ts) {
        CHECK(few.mean_at(t) == doctest::Approx(-0.62 * t).epsilon(1e-12));
        CHECK(many.mean_at(t) == doctest::Approx(-0.62 * t).epsilon(1e-12));
    }
}

TEST_CASE("estimate_do mixture matches the closed form for a linear decoder") {
    const auto data = small_continuous(100, 9);
    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 2;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(18, 0));
    std::vector<double> flat(model.flat_size(), 0.0);
    model.from_flat(flat);
    auto& yw = model.ydec.layers()[0].w;
    yw(0, 0) = 0.8;   // gamma_yz1
    yw(0, 1) = -0.5;  // gamma_yz2
    yw(0, 2) = 1.3;   // gamma_yt
    // log_sd layout [enc(2), x(2), t, y]; set s_y = 0.9.
    model.log_sd[5] = std::log(0.9);

    const auto closed = linear_do_closed_form(model);
    CHECK(closed.slope() == doctest::Approx(1.3));
    CHECK(closed.sd() == doctest::Approx(std::sqrt(0.9 * 0.9 + 0.8 * 0.8 + 0.25)));

    const int n_z = 4000;
    const double ts[] = {1.0};
    const auto mc = estimate_do(model, ts, n_z, RandomStream(19, 0));
    const auto mix = mc.components_at(1.0);
    double mean = 0.0, second = 0.0;
    for (std::size_t i = 0; i < mix.weight.size(); ++i) {
        mean += mix.weight[i] * mix.mean[i];
        second += mix.weight[i] * (mix.mean[i] * mix.mean[i] + mix.sd[i] * mix.sd[i]);
    }
    const double var = second - mean * mean;
    // Gamma_yz has norm sqrt(0.89): component means have that sd, so the
    // mixture mean has MC standard error sqrt(0.89 / n_z).
    const double se_mean = std::sqrt(0.89 / n_z);
    CHECK(std::fabs(mean - 1.3) <= 3.0 * se_mean);
    CHECK(std::fabs(var - (0.81 + 0.89)) <= 0.1);
}

TEST_CASE("binary-latent estimate_do reproduces the adjustment sum") {
    const auto data = datagen::generate(main_binary(), 50, RandomStream(20, 0));
    CevaeConfig config;
    config.variant = Variant::binary_latent;
    config.hidden_layers = 1;
    config.hidden_width = 3;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(21, 0));

    // Hidden layer computing (z, t, elu(z + t - 1)) lets the output layer
    // realize any 2x2 logit table exactly on {0,1}^2 inputs.
    CevaeParams init{model.enc, model.xdec, model.tdec, model.ydec, model.log_sd, 0.0};
    auto& h = init.ydec.layers()[0];
    h.w.fill(0.0);
    h.w(0, 0) = 1.0;
    h.w(1, 1) = 1.0;
    h.w(2, 0) = 1.0;
    h.w(2, 1) = 1.0;
    h.b = {0.0, 0.0, -1.0};
    const auto& p = main_binary();
    const double l00 = logit(p.p_y(0, 0)), l01 = logit(p.p_y(0, 1));
    const double l10 = logit(p.p_y(1, 0)), l11 = logit(p.p_y(1, 1));
    const double alpha = std::exp(-1.0) - 1.0;
    auto& o = init.ydec.layers()[1];
    // Heads: l00 = alpha w3 + b; l01 = w2 + b; l10 = w1 + b;
    // l11 = w1 + w2 + w3 + b, so w3 (1 + alpha) = l11 - l01 - l10 + l00.
    const double w3_solved = (l11 - l01 - l10 + l00) / (1.0 + alpha);
    const double b = l00 - alpha * w3_solved;
    const double w2 = l01 - b;
    const double w1 = l10 - b;
    o.w(0, 0) = w1;
    o.w(0, 1) = w2;
    o.w(0, 2) = w3_solved;
    o.b = {b};
    init.prior_logit = logit(0.56);
    model = set_custom_init(model, init);

    const double ts[] = {0.0, 1.0};
    const auto dist = estimate_do(model, ts, 1, RandomStream(22, 0));
    CHECK(dist.table_prob(0, 1) == doctest::Approx(0.3460).epsilon(1e-9));
    CHECK(dist.table_prob(1, 1) == doctest::Approx(0.1808).epsilon(1e-9));
}

TEST_CASE("doubling the do-sample count moves the mixture mean within MC noise") {
    const auto data = small_continuous(2000, 20);
    CevaeConfig config;
    config.epochs = 40;
    config.latent_dim = 4;
    const auto out = train(config, data.observed(), RandomStream(30, 0));
    const double ts[] = {1.0};
    const auto a = estimate_do(out.model, ts, 500, RandomStream(31, 0));
    const auto b = estimate_do(out.model, ts, 1000, RandomStream(31, 1));
    const auto mix = a.components_at(1.0);
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < mix.weight.size(); ++i) mean += mix.weight[i] * mix.mean[i];
    for (std::size_t i = 0; i < mix.weight.size(); ++i) {
        const double d = mix.mean[i] - mean;
        var += mix.weight[i] * d * d;
    }
    const double se = std::sqrt(var / 500.0);
    CHECK(std::fabs(a.mean_at(1.0) - b.mean_at(1.0)) < 2.0 * std::max(se, 1e-9));
}

TEST_CASE("the binary-latent prior is learned") {
    BinaryParams skewed = main_binary();
    skewed.p_z = 0.85;
    const auto data = datagen::generate(skewed, 3000, RandomStream(32, 0));
    CevaeConfig config;
    config.variant = Variant::binary_latent;
    config.epochs = 60;
    config.hidden_width = 8;
    config.hidden_layers = 1;
    const auto out = train(config, data.observed(), RandomStream(32, 1));
    CHECK(out.model.prior_logit != 0.0);  // moved off its initialization
    CHECK(std::isfinite(out.model.prior_logit));
}

TEST_CASE("latent activity scores") {
    const auto data = small_continuous(500, 10);
    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 2;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(23, 0));
    std::vector<double> flat(model.flat_size(), 0.0);
    model.from_flat(flat);
    SUBCASE("zero encoder is fully collapsed") {
        const auto scores = latent_activity(model, data.observed());
        CHECK(scores[0] == 0.0);
        CHECK(scores[1] == 0.0);
        CHECK(active_dimensions(scores) == 0);
    }
    SUBCASE("mu = (x1, 0) has the x1 variance in slot 0") {
        model.enc.layers()[0].w(0, 0) = 1.0;
        const auto scores = latent_activity(model, data.observed());
        double mean = 0.0, var = 0.0;
        const auto obs = data.observed();
        for (std::size_t i = 0; i < obs.n(); ++i) mean += obs.x(i, 0);
        mean /= static_cast<double>(obs.n());
        for (std::size_t i = 0; i < obs.n(); ++i) {
            const double d = obs.x(i, 0) - mean;
            var += d * d;
        }
        var /= static_cast<double>(obs.n() - 1);
        CHECK(scores[0] == doctest::Approx(var).epsilon(1e-12));
        CHECK(scores[1] == 0.0);
        CHECK(active_dimensions(scores) == 1);
    }
}

TEST_CASE("extract_cyt") {
    const auto data = small_continuous(50, 11);
    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 1;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(24, 0));
    std::vector<double> flat(model.flat_size(), 0.0);
    model.from_flat(flat);
    CHECK(extract_cyt(model) == 0.0);
    model.ydec.layers()[0].w(0, 1) = 0.42;
    CHECK(extract_cyt(model) == 0.42);

    CevaeConfig mlp_cfg;
    CevaeModel mlp_model = build_model(mlp_cfg, data.schema(), 2, RandomStream(24, 1));
    CHECK_THROWS_AS(extract_cyt(mlp_model), Error);
}

TEST_CASE("custom init round trip and shape validation") {
    const auto data = small_continuous(50, 12);
    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 2;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(25, 0));
    CevaeParams params{model.enc, model.xdec, model.tdec, model.ydec, model.log_sd, 0.3};
    params.ydec.layers()[0].w(0, 2) = -9.0;
    const CevaeModel reinit = set_custom_init(model, params);
    CHECK(extract_cyt(reinit) == -9.0);
    CHECK(reinit.prior_logit == 0.3);

    CevaeConfig other;
    other.variant = Variant::linear;
    other.latent_dim = 3;
    CevaeModel wrong = build_model(other, data.schema(), 2, RandomStream(25, 1));
    CevaeParams bad{wrong.enc, wrong.xdec, wrong.tdec, wrong.ydec, wrong.log_sd, 0.0};
    CHECK_THROWS_AS(set_custom_init(model, bad), Error);
}

TEST_CASE("training from the generating parameters stays at the optimum") {
    const std::size_t n = 5000;
    const auto data = small_continuous(n, 13);
    CevaeConfig config;
    config.variant = Variant::linear;
    config.latent_dim = 1;
    config.epochs = 60;
    config.lr_start = 0.003;
    config.lr_end = 0.001;
    CevaeModel model = build_model(config, data.schema(), 2, RandomStream(26, 0));

    CevaeParams init{model.enc, model.xdec, model.tdec, model.ydec, model.log_sd, 0.0};
    init.xdec.layers()[0].w(0, 0) = kMain.c1;
    init.xdec.layers()[0].w(1, 0) = kMain.c2;
    init.tdec.layers()[0].w(0, 0) = kMain.c_t;
    init.ydec.layers()[0].w(0, 0) = kMain.c_yz;
    init.ydec.layers()[0].w(0, 1) = kMain.c_yt;
    for (auto& l : init.xdec.layers()) std::fill(l.b.begin(), l.b.end(), 0.0);
    init.log_sd = {0.0, std::log(kMain.sigma_x1), std::log(kMain.sigma_x2),
                   std::log(kMain.sigma_t), std::log(kMain.sigma_y)};
    model = set_custom_init(model, init);
    model = with_matched_posterior_encoder(model);

    const auto out = train_from(model, data.observed(), RandomStream(26, 1));
    CHECK(std::fabs(extract_cyt(out.model) - kMain.c_yt) < 0.05);
}

TEST_CASE("checkpoint JSON round trip") {
    const auto data = small_continuous(200, 14);
    CevaeConfig config;
    config.epochs = 3;
    config.batch_size = 100;
    config.latent_dim = 2;
    const auto out = train(config, data.observed(), RandomStream(27, 0));
    const std::string text = out.model.to_json();
    const CevaeModel loaded = CevaeModel::from_json(text);
    CHECK(model_flat(loaded) == model_flat(out.model));
    CHECK(loaded.config.latent_dim == 2);
    CHECK(loaded.proxy_dim == 2);

    const double ts[] = {0.0, 1.0};
    const auto a = estimate_do(out.model, ts, 50, RandomStream(28, 0));
    const auto b = estimate_do(loaded, ts, 50, RandomStream(28, 0));
    CHECK(a.mean_at(1.0) == b.mean_at(1.0));
}

TEST_CASE("train report CSV") {
    const auto data = small_continuous(200, 15);
    CevaeConfig config;
    config.epochs = 4;
    config.batch_size = 50;
    const auto out = train(config, data.observed(), RandomStream(29, 0));
    REQUIRE(out.report.epochs.size() == 4);
    out.report.save_csv("cevae_report.csv");
    std::ifstream file("cevae_report.csv");
    std::string header;
    std::getline(file, header);
    CHECK(header == "epoch,elbo,x_term_unscaled,t_term,y_term,kl_term");
    int lines = 0;
    std::string line;
    while (std::getline(file, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 4);
    std::remove("cevae_report.csv");
}
