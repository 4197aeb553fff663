// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

#include "cevae/cevae.hpp"
#include "core/error.hpp"
#include "json.hpp"

namespace proxyrestore::cevae {

using proxyrestore::Error;
using proxyrestore::ErrorCode;
using datagen::GaussianMixture;
using datagen::InterventionalDistribution;

namespace {

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Shared y-decoder evaluation over a block of latent draws at treatment t.
struct YDecoderEval {
    std::vector<double> mean;
    std::vector<double> sd;  // empty for binary outcomes (mean holds logits)
};

YDecoderEval eval_ydec(const CevaeModel& m, const Matrix& z, double t) {
    const std::size_t n = z.rows();
    const int latent = m.config.latent_dim;
    Matrix in(n, latent + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = in.row(i);
        for (int j = 0; j < latent; ++j) row[j] = z(i, j);
        row[latent] = t;
    }
    nn::Tape tape;
    const Matrix& out = nn::forward(m.ydec_spec, m.ydec, in, tape);

    YDecoderEval eval;
    eval.mean.resize(n);
    const bool binary = m.schema.all_binary();
    if (binary) {
        for (std::size_t i = 0; i < n; ++i) eval.mean[i] = out(i, 0);
        return eval;
    }
    eval.sd.resize(n);
    if (m.linear_y_head()) {
        const double s = std::exp(m.log_sd.back());  // y slot is last in both layouts
        for (std::size_t i = 0; i < n; ++i) {
            eval.mean[i] = out(i, 0);
            eval.sd[i] = s;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            eval.mean[i] = out(i, 0);
            eval.sd[i] = softplus(out(i, 1)) + m.config.sd_floor;
        }
    }
    return eval;
}

}  // namespace

InterventionalDistribution estimate_do(const CevaeModel& model, std::span<const double> t_values,
                                       int n_z, RandomStream stream) {
    if (n_z < 1) throw Error(ErrorCode::invalid_parameter, "estimate_do needs n_z >= 1");
    const bool binary = model.schema.all_binary();

    if (model.config.variant == Variant::binary_latent) {
        // Exact two-component sum weighted by the learned prior.
        const double pi = sigmoid(model.prior_logit);
        Matrix z(2, 1);
        z(1, 0) = 1.0;
        std::array<double, 2> p_y1{};
        for (int t = 0; t < 2; ++t) {
            const YDecoderEval eval = eval_ydec(model, z, static_cast<double>(t));
            p_y1[t] = (1.0 - pi) * sigmoid(eval.mean[0]) + pi * sigmoid(eval.mean[1]);
        }
        return InterventionalDistribution::discrete_table(p_y1);
    }

    // Gaussian latent: prior draws shared across treatment values.
    auto z = std::make_shared<Matrix>(static_cast<std::size_t>(n_z),
                                      static_cast<std::size_t>(model.config.latent_dim));
    stream.fill_gaussian(z->flat());

    if (binary) {
        std::array<double, 2> p_y1{};
        for (int t = 0; t < 2; ++t) {
            const YDecoderEval eval = eval_ydec(model, *z, static_cast<double>(t));
            double acc = 0.0;
            for (const double logit : eval.mean) acc += sigmoid(logit);
            p_y1[t] = acc / static_cast<double>(n_z);
        }
        return InterventionalDistribution::discrete_table(p_y1);
    }

    for (const double t : t_values) {
        if (!std::isfinite(t))
            throw Error(ErrorCode::invalid_parameter, "non-finite treatment value");
    }
    auto model_copy = std::make_shared<const CevaeModel>(model);
    const double weight = 1.0 / static_cast<double>(n_z);
    return InterventionalDistribution::mc_mixture([model_copy, z, weight](double t) {
        const YDecoderEval eval = eval_ydec(*model_copy, *z, t);
        GaussianMixture mix;
        mix.weight.assign(eval.mean.size(), weight);
        mix.mean = eval.mean;
        mix.sd = eval.sd;
        return mix;
    });
}

InterventionalDistribution linear_do_closed_form(const CevaeModel& model) {
    if (!model.gaussian_latent() || model.schema.all_binary() || !model.linear_y_head())
        throw Error(ErrorCode::contract_violation,
                    "closed-form do-distribution needs a Gaussian latent and a linear y decoder");
    const Matrix& w = model.ydec.layers().back().w;
    const int latent = model.config.latent_dim;
    double gamma_sq = 0.0;
    for (int j = 0; j < latent; ++j) gamma_sq += w(0, j) * w(0, j);
    const double gamma_yt = w(0, latent);
    const double b_y = model.ydec.layers().back().b[0];
    const double s_y = std::exp(model.log_sd.back());
    return InterventionalDistribution::gaussian_linear(gamma_yt,
                                                       std::sqrt(s_y * s_y + gamma_sq), b_y);
}

std::vector<double> latent_activity(const CevaeModel& model, const ObservedData& data) {
    if (!model.gaussian_latent())
        throw Error(ErrorCode::contract_violation, "latent_activity needs a Gaussian latent");
    if (data.n() < 2) throw Error(ErrorCode::insufficient_data, "need at least 2 rows");

    const std::size_t n = data.n();
    const int k = model.proxy_dim;
    const int latent = model.config.latent_dim;
    Matrix in(n, k + 2);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = in.row(i);
        for (int c = 0; c < k; ++c) row[c] = data.x(i, c);
        row[k] = data.t[i];
        row[k + 1] = data.y[i];
    }
    nn::Tape tape;
    const Matrix& out = nn::forward(model.enc_spec, model.enc, in, tape);

    std::vector<double> mean(latent, 0.0), var(latent, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < latent; ++j) mean[j] += out(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < latent; ++j) {
            const double d = out(i, j) - mean[j];
            var[j] += d * d;
        }
    for (double& v : var) v /= static_cast<double>(n - 1);
    return var;
}

int active_dimensions(std::span<const double> activity, double threshold) {
    int count = 0;
    for (const double a : activity)
        if (a > threshold) ++count;
    return count;
}

double extract_cyt(const CevaeModel& model) {
    if (!model.linear_y_head())
        throw Error(ErrorCode::contract_violation,
                    "extract_cyt needs a linear y decoder (got an MLP head)");
    return model.ydec.layers().back().w(0, model.config.latent_dim);
}

CevaeModel set_custom_init(const CevaeModel& model, const CevaeParams& params) {
    CevaeModel out = model;
    if (!params.enc.same_shape(model.enc) || !params.xdec.same_shape(model.xdec) ||
        !params.tdec.same_shape(model.tdec) || !params.ydec.same_shape(model.ydec))
        throw Error(ErrorCode::shape_mismatch, "custom init network shapes do not match");
    if (params.log_sd.size() != model.log_sd.size())
        throw Error(ErrorCode::shape_mismatch, "custom init log-sd length mismatch");
    out.enc = params.enc;
    out.xdec = params.xdec;
    out.tdec = params.tdec;
    out.ydec = params.ydec;
    out.log_sd = params.log_sd;
    out.prior_logit = params.prior_logit;
    out.enc.bump_stamp();
    out.xdec.bump_stamp();
    out.tdec.bump_stamp();
    out.ydec.bump_stamp();
    return out;
}

CevaeModel with_matched_posterior_encoder(const CevaeModel& model) {
    if (model.config.variant != Variant::linear)
        throw Error(ErrorCode::contract_violation,
                    "matched-posterior initialization is defined for the linear variant");
    const int latent = model.config.latent_dim;
    const int k = model.proxy_dim;
    const int v_dim = k + 2;

    // Joint of (x, t, y) under the decoder: v = B z + noise + bias.
    const Matrix& gx = model.xdec.layers().back().w;   // k x latent
    const Matrix& gt = model.tdec.layers().back().w;   // 1 x latent
    const Matrix& gy = model.ydec.layers().back().w;   // 1 x (latent+1)
    const double gamma_yt = gy(0, latent);

    Matrix b(v_dim, latent);
    for (int r = 0; r < k; ++r)
        for (int j = 0; j < latent; ++j) b(r, j) = gx(r, j);
    for (int j = 0; j < latent; ++j) b(k, j) = gt(0, j);
    for (int j = 0; j < latent; ++j) b(k + 1, j) = gy(0, j) + gamma_yt * gt(0, j);

    // Noise covariance: diagonal except the t/y coupling through gamma_yt.
    const int lay_x = latent;  // linear-variant log_sd layout
    Matrix noise(v_dim, v_dim);
    for (int r = 0; r < k; ++r) {
        const double s = std::exp(model.log_sd[lay_x + r]);
        noise(r, r) = s * s;
    }
    const double s_t = std::exp(model.log_sd[latent + k]);
    const double s_y = std::exp(model.log_sd[latent + k + 1]);
    noise(k, k) = s_t * s_t;
    noise(k + 1, k + 1) = gamma_yt * gamma_yt * s_t * s_t + s_y * s_y;
    noise(k, k + 1) = noise(k + 1, k) = gamma_yt * s_t * s_t;

    Matrix sigma_v = noise;
    for (int r = 0; r < v_dim; ++r)
        for (int c = 0; c < v_dim; ++c) {
            double acc = 0.0;
            for (int j = 0; j < latent; ++j) acc += b(r, j) * b(c, j);
            sigma_v(r, c) += acc;
        }

    // Posterior mean weights W = B^T Sigma_v^-1 and covariance I - W B.
    Matrix w_enc(latent, v_dim);
    for (int j = 0; j < latent; ++j) {
        std::vector<double> col(v_dim);
        for (int r = 0; r < v_dim; ++r) col[r] = b(r, j);
        const std::vector<double> sol = numerics::solve_linear(sigma_v, col);
        for (int r = 0; r < v_dim; ++r) w_enc(j, r) = sol[r];
    }

    CevaeModel out = model;
    ParamSet enc(model.enc_spec);
    for (int j = 0; j < latent; ++j)
        for (int r = 0; r < v_dim; ++r) enc.layers()[0].w(j, r) = w_enc(j, r);

    // Bias absorbs the decoder means: mean_v = (b_x, b_t, b_y + gyt b_t).
    std::vector<double> mu_v(v_dim);
    for (int r = 0; r < k; ++r) mu_v[r] = model.xdec.layers().back().b[0 + r];
    mu_v[k] = model.tdec.layers().back().b[0];
    mu_v[k + 1] = model.ydec.layers().back().b[0] + gamma_yt * model.tdec.layers().back().b[0];
    for (int j = 0; j < latent; ++j) {
        double acc = 0.0;
        for (int r = 0; r < v_dim; ++r) acc += w_enc(j, r) * mu_v[r];
        enc.layers()[0].b[j] = -acc;
    }
    enc.bump_stamp();
    out.enc = std::move(enc);

    for (int j = 0; j < latent; ++j) {
        double wb = 0.0;
        for (int r = 0; r < v_dim; ++r) wb += w_enc(j, r) * b(r, j);
        const double post_var = std::max(1.0 - wb, model.config.sd_floor * model.config.sd_floor);
        out.log_sd[j] = 0.5 * std::log(post_var);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json spec_to_json(const MlpSpec& s) {
    return json{{"input_dim", s.input_dim},
                {"output_heads", s.output_heads},
                {"hidden_layers", s.hidden_layers},
                {"hidden_width", s.hidden_width},
                {"activation", s.activation == nn::Activation::elu ? "elu" : "identity"}};
}

MlpSpec spec_from_json(const json& j) {
    MlpSpec s;
    s.input_dim = j.at("input_dim").get<int>();
    s.output_heads = j.at("output_heads").get<int>();
    s.hidden_layers = j.at("hidden_layers").get<int>();
    s.hidden_width = j.at("hidden_width").get<int>();
    s.activation = j.at("activation").get<std::string>() == "elu" ? nn::Activation::elu
                                                                  : nn::Activation::identity;
    return s;
}

json params_to_json(const ParamSet& p) {
    std::vector<double> flat(p.flat_size());
    p.to_flat(flat);
    return json(flat);
}

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::linear: return "linear";
        case Variant::binary_latent: return "binary-latent";
    }
    return "full";
}

Variant variant_from_name(const std::string& name) {
    if (name == "full") return Variant::full;
    if (name == "linear") return Variant::linear;
    if (name == "binary-latent") return Variant::binary_latent;
    throw Error(ErrorCode::unknown_name, "unknown CEVAE variant '" + name + "'");
}

}  // namespace

std::string CevaeModel::to_json() const {
    json j;
    j["variant"] = variant_name(config.variant);
    j["latent_dim"] = config.latent_dim;
    j["y_head"] = config.y_head == YHead::linear ? "linear" : "mlp";
    j["hidden_layers"] = config.hidden_layers;
    j["hidden_width"] = config.hidden_width;
    j["sd_floor"] = config.sd_floor;
    j["binary"] = schema.all_binary();
    j["proxy_dim"] = proxy_dim;
    j["enc_spec"] = spec_to_json(enc_spec);
    j["xdec_spec"] = spec_to_json(xdec_spec);
    j["tdec_spec"] = spec_to_json(tdec_spec);
    j["ydec_spec"] = spec_to_json(ydec_spec);
    j["enc"] = params_to_json(enc);
    j["xdec"] = params_to_json(xdec);
    j["tdec"] = params_to_json(tdec);
    j["ydec"] = params_to_json(ydec);
    j["log_sd"] = log_sd;
    j["prior_logit"] = prior_logit;
    return j.dump();
}

CevaeModel CevaeModel::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io_error, std::string("bad model checkpoint: ") + e.what());
    }
    CevaeModel m;
    m.config.variant = variant_from_name(j.at("variant").get<std::string>());
    m.config.latent_dim = j.at("latent_dim").get<int>();
    m.config.y_head =
        j.at("y_head").get<std::string>() == "linear" ? YHead::linear : YHead::mlp;
    m.config.hidden_layers = j.at("hidden_layers").get<int>();
    m.config.hidden_width = j.at("hidden_width").get<int>();
    m.config.sd_floor = j.at("sd_floor").get<double>();
    if (j.at("binary").get<bool>())
        m.schema = Schema{datagen::VarKind::binary, datagen::VarKind::binary,
                          datagen::VarKind::binary};
    m.proxy_dim = j.at("proxy_dim").get<int>();
    m.enc_spec = spec_from_json(j.at("enc_spec"));
    m.xdec_spec = spec_from_json(j.at("xdec_spec"));
    m.tdec_spec = spec_from_json(j.at("tdec_spec"));
    m.ydec_spec = spec_from_json(j.at("ydec_spec"));
    m.enc = ParamSet(m.enc_spec);
    m.xdec = ParamSet(m.xdec_spec);
    m.tdec = ParamSet(m.tdec_spec);
    m.ydec = ParamSet(m.ydec_spec);
    m.enc.from_flat(j.at("enc").get<std::vector<double>>());
    m.xdec.from_flat(j.at("xdec").get<std::vector<double>>());
    m.tdec.from_flat(j.at("tdec").get<std::vector<double>>());
    m.ydec.from_flat(j.at("ydec").get<std::vector<double>>());
    m.log_sd = j.at("log_sd").get<std::vector<double>>();
    m.prior_logit = j.at("prior_logit").get<double>();
    return m;
}

void TrainReport::save_csv(const std::string& path) const {
    std::ofstream file(path);
    if (!file) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
    file << "epoch,elbo,x_term_unscaled,t_term,y_term,kl_term\n";
    char buf[160];
    for (const EpochStats& e : epochs) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.elbo,
                      e.x_term_unscaled, e.t_term, e.y_term, e.kl_term);
        file << buf;
    }
}

}  // namespace proxyrestore::cevae
