// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "cevae/cevae.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

#include "core/error.hpp"
#include "numerics/gaussian.hpp"

namespace proxyrestore::cevae {

using proxyrestore::Error;
using proxyrestore::ErrorCode;
using numerics::gaussian_kl_term;
using numerics::gaussian_logpdf_unchecked;

namespace {

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// log Bernoulli(v; sigmoid(logit)) for v in {0,1}.
inline double bernoulli_loglik(double v, double logit) {
    return v != 0.0 ? -softplus(-logit) : -softplus(logit);
}

}  // namespace

void CevaeConfig::validate() const {
    if (latent_dim < 1) throw Error(ErrorCode::invalid_parameter, "latent_dim must be >= 1");
    if (!(proxy_scale >= 0.0))
        throw Error(ErrorCode::invalid_parameter, "proxy_scale must be nonnegative");
    if (epochs < 1 || batch_size < 1)
        throw Error(ErrorCode::invalid_parameter, "epochs and batch_size must be positive");
    if (!(lr_start > 0.0) || !(lr_end > 0.0))
        throw Error(ErrorCode::invalid_parameter, "learning rates must be positive");
    if (hidden_layers < 0 || hidden_width < 1)
        throw Error(ErrorCode::invalid_parameter, "bad hidden layer configuration");
    if (mc_do_samples < 1)
        throw Error(ErrorCode::invalid_parameter, "mc_do_samples must be positive");
    if (!(sd_floor > 0.0)) throw Error(ErrorCode::invalid_parameter, "sd_floor must be positive");
    if (!(kl.start_weight >= 0.0))
        throw Error(ErrorCode::invalid_parameter, "kl start weight must be nonnegative");
}

// ---------------------------------------------------------------------------
// Model construction and flat-parameter plumbing
// ---------------------------------------------------------------------------

namespace {

// Offsets into CevaeModel::log_sd. Only the slots that exist for the given
// model are meaningful.
struct SdLayout {
    int enc = -1, x = -1, t = -1, y = -1;
    int total = 0;
};

SdLayout sd_layout(const CevaeModel& m) {
    SdLayout lay;
    const bool continuous = !m.schema.all_binary();
    if (!continuous) return lay;
    if (m.config.variant == Variant::linear) {
        const int latent = m.config.latent_dim;
        lay.enc = 0;
        lay.x = latent;
        lay.t = latent + m.proxy_dim;
        lay.y = latent + m.proxy_dim + 1;
        lay.total = latent + m.proxy_dim + 2;
    } else if (m.config.variant == Variant::full && m.config.y_head == YHead::linear) {
        lay.y = 0;
        lay.total = 1;
    }
    return lay;
}

}  // namespace

CevaeModel build_model(const CevaeConfig& config_in, const Schema& schema, int proxy_dim,
                       RandomStream stream) {
    CevaeConfig config = config_in;
    config.validate();
    if (proxy_dim < 1) throw Error(ErrorCode::invalid_parameter, "need at least one proxy");

    const bool binary = schema.all_binary();
    if (!binary && schema != Schema{})
        throw Error(ErrorCode::schema_mismatch,
                    "dataset schema must be all-continuous or all-binary");
    if (binary && config.variant == Variant::linear)
        throw Error(ErrorCode::schema_mismatch, "the linear variant needs continuous data");
    if (!binary && config.variant == Variant::binary_latent)
        throw Error(ErrorCode::schema_mismatch, "the binary-latent variant needs binary data");
    if (config.variant == Variant::binary_latent) config.latent_dim = 1;
    if (config.variant == Variant::linear) config.y_head = YHead::linear;

    CevaeModel m;
    m.config = config;
    m.schema = schema;
    m.proxy_dim = proxy_dim;
    const int latent = config.latent_dim;
    const int hl = config.hidden_layers;
    const int hw = config.hidden_width;

    const bool mlp = config.variant != Variant::linear;
    const auto net = [&](int in, int heads, bool as_mlp) {
        MlpSpec spec;
        spec.input_dim = in;
        spec.output_heads = heads;
        spec.hidden_layers = as_mlp ? hl : 0;
        spec.hidden_width = hw;
        spec.activation = as_mlp ? nn::Activation::elu : nn::Activation::identity;
        return spec;
    };

    const int enc_heads = config.variant == Variant::binary_latent ? 1
                          : config.variant == Variant::full        ? 2 * latent
                                                                   : latent;
    m.enc_spec = net(proxy_dim + 2, enc_heads, mlp);
    m.xdec_spec = net(latent, binary ? proxy_dim
                              : config.variant == Variant::full ? 2 * proxy_dim
                                                                : proxy_dim,
                      mlp);
    m.tdec_spec = net(latent, binary ? 1 : config.variant == Variant::full ? 2 : 1, mlp);
    const bool y_linear = config.variant == Variant::linear || config.y_head == YHead::linear;
    m.ydec_spec = net(latent + 1, (!binary && !y_linear) ? 2 : 1, y_linear ? false : mlp);

    m.enc = nn::init_params(m.enc_spec, stream.substream(0));
    m.xdec = nn::init_params(m.xdec_spec, stream.substream(1));
    m.tdec = nn::init_params(m.tdec_spec, stream.substream(2));
    m.ydec = nn::init_params(m.ydec_spec, stream.substream(3));
    m.log_sd.assign(sd_layout(m).total, 0.0);
    m.prior_logit = 0.0;
    return m;
}

std::size_t CevaeModel::flat_size() const {
    std::size_t total = enc.flat_size() + xdec.flat_size() + tdec.flat_size() + ydec.flat_size() +
                        log_sd.size();
    if (config.variant == Variant::binary_latent) total += 1;
    return total;
}

void CevaeModel::to_flat(std::span<double> out) const {
    if (out.size() != flat_size())
        throw Error(ErrorCode::shape_mismatch, "model flat view length mismatch");
    std::size_t pos = 0;
    for (const ParamSet* p : {&enc, &xdec, &tdec, &ydec}) {
        p->to_flat(out.subspan(pos, p->flat_size()));
        pos += p->flat_size();
    }
    std::memcpy(out.data() + pos, log_sd.data(), log_sd.size() * sizeof(double));
    pos += log_sd.size();
    if (config.variant == Variant::binary_latent) out[pos] = prior_logit;
}

void CevaeModel::from_flat(std::span<const double> in) {
    if (in.size() != flat_size())
        throw Error(ErrorCode::shape_mismatch, "model flat view length mismatch");
    std::size_t pos = 0;
    for (ParamSet* p : {&enc, &xdec, &tdec, &ydec}) {
        p->from_flat(in.subspan(pos, p->flat_size()));
        pos += p->flat_size();
    }
    std::memcpy(log_sd.data(), in.data() + pos, log_sd.size() * sizeof(double));
    pos += log_sd.size();
    if (config.variant == Variant::binary_latent) prior_logit = in[pos];
}

// ---------------------------------------------------------------------------
// ELBO forward/backward
// ---------------------------------------------------------------------------

namespace {

struct BatchView {
    const Matrix* x = nullptr;
    std::span<const double> t, y;
    std::size_t n() const { return t.size(); }
};

// Gradient accumulator shaped like the model's trainables.
struct Grads {
    ParamSet enc, xdec, tdec, ydec;
    std::vector<double> log_sd;
    double prior_logit = 0.0;

    explicit Grads(const CevaeModel& m)
        : enc(m.enc_spec), xdec(m.xdec_spec), tdec(m.tdec_spec), ydec(m.ydec_spec),
          log_sd(m.log_sd.size(), 0.0) {}

    void zero() {
        enc.fill(0.0);
        xdec.fill(0.0);
        tdec.fill(0.0);
        ydec.fill(0.0);
        std::fill(log_sd.begin(), log_sd.end(), 0.0);
        prior_logit = 0.0;
    }

    // Flattens d(elbo) as d(-elbo) for the descent-form optimizer.
    void to_descent_flat(const CevaeModel& m, std::span<double> out) const {
        std::size_t pos = 0;
        for (const ParamSet* p : {&enc, &xdec, &tdec, &ydec}) {
            p->to_flat(out.subspan(pos, p->flat_size()));
            pos += p->flat_size();
        }
        std::memcpy(out.data() + pos, log_sd.data(), log_sd.size() * sizeof(double));
        pos += log_sd.size();
        if (m.config.variant == Variant::binary_latent) out[pos] = prior_logit;
        for (double& v : out) v = -v;
    }
};

struct Workspace {
    Matrix enc_in, mu, sd, sd_sig, z, ydec_in;
    Matrix dx_out, dt_out, dy_out, dmu, dsd, denc_out;
    Matrix dz_x, dz_t, dz_y;
    nn::Tape enc_tape, x_tape, t_tape, y_tape;
    // binary latent
    Matrix z_const0, z_const1, y_in0, y_in1;
    Matrix gx0, gx1, gt0, gt1, gy0, gy1;
    nn::Tape x0_tape, x1_tape, t0_tape, t1_tape, y0_tape, y1_tape;
    std::vector<double> ll0, ll1;
};

// Mean log-likelihood of Gaussian heads laid out as [means | raw sds] and,
// when grads are requested, d(mean loglik)/d(outputs) scaled by `scale`.
// Shared-sd conditionals pass sd_shared (per column) instead of raw heads.
struct GaussianHeadResult {
    double mean_loglik = 0.0;
};

template <typename TargetAt>
GaussianHeadResult gaussian_heads(const Matrix& out, int dim, TargetAt target_at, double floor,
                                  const double* shared_sd, double scale, Matrix* dout,
                                  double* dlog_sd_shared) {
    const std::size_t n = out.rows();
    const double w = scale / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* o = out.row(i);
        double* g = dout ? dout->row(i) : nullptr;
        for (int j = 0; j < dim; ++j) {
            const double v = target_at(i, j);
            const double mean = o[j];
            double s, sig = 0.0;
            if (shared_sd) {
                s = shared_sd[j];
            } else {
                const double raw = o[dim + j];
                s = softplus(raw) + floor;
                sig = sigmoid(raw);
            }
            const double d = v - mean;
            total += gaussian_logpdf_unchecked(v, mean, s);
            if (g) {
                const double inv_s2 = 1.0 / (s * s);
                g[j] = w * d * inv_s2;
                if (shared_sd) {
                    dlog_sd_shared[j] += w * (d * d * inv_s2 - 1.0);
                } else {
                    g[dim + j] = w * (d * d * inv_s2 - 1.0) / s * sig;
                }
            }
        }
    }
    return {total / static_cast<double>(n)};
}

template <typename TargetAt>
double bernoulli_heads(const Matrix& out, int dim, TargetAt target_at, double scale,
                       Matrix* dout) {
    const std::size_t n = out.rows();
    const double w = scale / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* o = out.row(i);
        double* g = dout ? dout->row(i) : nullptr;
        for (int j = 0; j < dim; ++j) {
            const double v = target_at(i, j);
            total += bernoulli_loglik(v, o[j]);
            if (g) g[j] = w * (v - sigmoid(o[j]));
        }
    }
    return total / static_cast<double>(n);
}

ElboResult gaussian_latent_elbo(const CevaeModel& m, const BatchView& b, double lambda,
                                double kl_weight, const Matrix& eps, Workspace& ws, Grads* grads) {
    const std::size_t n = b.n();
    const int k = m.proxy_dim;
    const int latent = m.config.latent_dim;
    const bool binary = m.schema.all_binary();
    const bool full = m.config.variant == Variant::full;
    const SdLayout lay = sd_layout(m);
    const double floor = m.config.sd_floor;

    if (eps.rows() != n || eps.cols() != static_cast<std::size_t>(latent))
        throw Error(ErrorCode::shape_mismatch, "reparameterization noise shape mismatch");

    // Encoder pass and posterior parameters.
    ws.enc_in.resize(n, k + 2);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = ws.enc_in.row(i);
        const double* xr = b.x->row(i);
        for (int c = 0; c < k; ++c) row[c] = xr[c];
        row[k] = b.t[i];
        row[k + 1] = b.y[i];
    }
    const Matrix& enc_out = nn::forward(m.enc_spec, m.enc, ws.enc_in, ws.enc_tape);

    ws.mu.resize(n, latent);
    ws.sd.resize(n, latent);
    if (full) ws.sd_sig.resize(n, latent);
    for (std::size_t i = 0; i < n; ++i) {
        const double* o = enc_out.row(i);
        double* mu = ws.mu.row(i);
        double* sd = ws.sd.row(i);
        for (int j = 0; j < latent; ++j) {
            mu[j] = o[j];
            if (full) {
                const double raw = o[latent + j];
                sd[j] = softplus(raw) + floor;
                ws.sd_sig(i, j) = sigmoid(raw);
            } else {
                sd[j] = std::exp(m.log_sd[lay.enc + j]);
            }
        }
    }

    // Reparameterized latent and decoder passes.
    ws.z.resize(n, latent);
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < latent; ++j) ws.z(i, j) = ws.mu(i, j) + ws.sd(i, j) * eps(i, j);

    const Matrix& x_out = nn::forward(m.xdec_spec, m.xdec, ws.z, ws.x_tape);
    const Matrix& t_out = nn::forward(m.tdec_spec, m.tdec, ws.z, ws.t_tape);
    ws.ydec_in.resize(n, latent + 1);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = ws.ydec_in.row(i);
        for (int j = 0; j < latent; ++j) row[j] = ws.z(i, j);
        row[latent] = b.t[i];
    }
    const Matrix& y_out = nn::forward(m.ydec_spec, m.ydec, ws.ydec_in, ws.y_tape);

    if (grads) {
        ws.dx_out.resize(x_out.rows(), x_out.cols());
        ws.dt_out.resize(t_out.rows(), t_out.cols());
        ws.dy_out.resize(y_out.rows(), y_out.cols());
        ws.dx_out.fill(0.0);
        ws.dt_out.fill(0.0);
        ws.dy_out.fill(0.0);
    }

    const auto x_at = [&](std::size_t i, int j) { return (*b.x)(i, j); };
    const auto t_at = [&](std::size_t i, int) { return b.t[i]; };
    const auto y_at = [&](std::size_t i, int) { return b.y[i]; };

    double x_term, t_term, y_term;
    if (binary) {
        x_term = bernoulli_heads(x_out, k, x_at, lambda, grads ? &ws.dx_out : nullptr);
        t_term = bernoulli_heads(t_out, 1, t_at, 1.0, grads ? &ws.dt_out : nullptr);
        y_term = bernoulli_heads(y_out, 1, y_at, 1.0, grads ? &ws.dy_out : nullptr);
    } else {
        const bool shared_x = lay.x >= 0;
        std::vector<double> sx, st, sy;
        if (shared_x) {
            for (int j = 0; j < k; ++j) sx.push_back(std::exp(m.log_sd[lay.x + j]));
            st.push_back(std::exp(m.log_sd[lay.t]));
        }
        if (lay.y >= 0) sy.push_back(std::exp(m.log_sd[lay.y]));

        x_term = gaussian_heads(x_out, k, x_at, floor, shared_x ? sx.data() : nullptr, lambda,
                                grads ? &ws.dx_out : nullptr,
                                grads && shared_x ? grads->log_sd.data() + lay.x : nullptr)
                     .mean_loglik;
        t_term = gaussian_heads(t_out, 1, t_at, floor, shared_x ? st.data() : nullptr, 1.0,
                                grads ? &ws.dt_out : nullptr,
                                grads && shared_x ? grads->log_sd.data() + lay.t : nullptr)
                     .mean_loglik;
        y_term = gaussian_heads(y_out, 1, y_at, floor, !sy.empty() ? sy.data() : nullptr, 1.0,
                                grads ? &ws.dy_out : nullptr,
                                grads && lay.y >= 0 ? grads->log_sd.data() + lay.y : nullptr)
                     .mean_loglik;
    }

    double kl_term = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < latent; ++j) kl_term += gaussian_kl_term(ws.mu(i, j), ws.sd(i, j));
    kl_term /= static_cast<double>(n);

    ElboResult res;
    res.x_term_unscaled = x_term;
    res.x_term_scaled = lambda * x_term;
    res.t_term = t_term;
    res.y_term = y_term;
    res.kl_term = kl_term;
    res.elbo = lambda * x_term + t_term + y_term - kl_weight * kl_term;
    if (!std::isfinite(res.elbo)) {
        const char* which = !std::isfinite(x_term)   ? "x reconstruction"
                            : !std::isfinite(t_term) ? "t reconstruction"
                            : !std::isfinite(y_term) ? "y reconstruction"
                                                     : "KL";
        throw Error(ErrorCode::non_finite, std::string("non-finite ELBO (") + which + " term)");
    }
    if (!grads) return res;

    // Reverse pass: decoders first, collecting d(elbo)/dz.
    nn::backward(ws.x_tape, ws.dx_out, grads->xdec, &ws.dz_x);
    nn::backward(ws.t_tape, ws.dt_out, grads->tdec, &ws.dz_t);
    nn::backward(ws.y_tape, ws.dy_out, grads->ydec, &ws.dz_y);

    const double w = 1.0 / static_cast<double>(n);
    ws.dmu.resize(n, latent);
    ws.dsd.resize(n, latent);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < latent; ++j) {
            const double dz =
                ws.dz_x(i, j) + ws.dz_t(i, j) + ws.dz_y(i, j);  // y input grad: z columns
            const double sd = ws.sd(i, j);
            ws.dmu(i, j) = dz - kl_weight * w * ws.mu(i, j);
            ws.dsd(i, j) = dz * eps(i, j) - kl_weight * w * (sd - 1.0 / sd);
        }
    }

    ws.denc_out.resize(n, ws.enc_tape.outputs().cols());
    for (std::size_t i = 0; i < n; ++i) {
        double* g = ws.denc_out.row(i);
        for (int j = 0; j < latent; ++j) {
            g[j] = ws.dmu(i, j);
            if (full) g[latent + j] = ws.dsd(i, j) * ws.sd_sig(i, j);
        }
    }
    nn::backward(ws.enc_tape, ws.denc_out, grads->enc);
    if (!full) {
        for (int j = 0; j < latent; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += ws.dsd(i, j);
            grads->log_sd[lay.enc + j] += acc * std::exp(m.log_sd[lay.enc + j]);
        }
    }
    return res;
}

ElboResult binary_latent_elbo(const CevaeModel& m, const BatchView& b, double lambda,
                              double kl_weight, Workspace& ws, Grads* grads) {
    const std::size_t n = b.n();
    const int k = m.proxy_dim;
    const double w = 1.0 / static_cast<double>(n);
    const double pi_logit = m.prior_logit;

    ws.enc_in.resize(n, k + 2);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = ws.enc_in.row(i);
        const double* xr = b.x->row(i);
        for (int c = 0; c < k; ++c) row[c] = xr[c];
        row[k] = b.t[i];
        row[k + 1] = b.y[i];
    }
    const Matrix& enc_out = nn::forward(m.enc_spec, m.enc, ws.enc_in, ws.enc_tape);

    // x and t decoders see only z, so one evaluation per z value suffices.
    ws.z_const0.resize(1, 1);
    ws.z_const1.resize(1, 1);
    ws.z_const0(0, 0) = 0.0;
    ws.z_const1(0, 0) = 1.0;
    const Matrix& x_out0 = nn::forward(m.xdec_spec, m.xdec, ws.z_const0, ws.x0_tape);
    const Matrix& x_out1 = nn::forward(m.xdec_spec, m.xdec, ws.z_const1, ws.x1_tape);
    const Matrix& t_out0 = nn::forward(m.tdec_spec, m.tdec, ws.z_const0, ws.t0_tape);
    const Matrix& t_out1 = nn::forward(m.tdec_spec, m.tdec, ws.z_const1, ws.t1_tape);

    ws.y_in0.resize(n, 2);
    ws.y_in1.resize(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        ws.y_in0(i, 0) = 0.0;
        ws.y_in0(i, 1) = b.t[i];
        ws.y_in1(i, 0) = 1.0;
        ws.y_in1(i, 1) = b.t[i];
    }
    const Matrix& y_out0 = nn::forward(m.ydec_spec, m.ydec, ws.y_in0, ws.y0_tape);
    const Matrix& y_out1 = nn::forward(m.ydec_spec, m.ydec, ws.y_in1, ws.y1_tape);

    ElboResult res;
    double elbo = 0.0, x_acc = 0.0, t_acc = 0.0, y_acc = 0.0, kl_acc = 0.0;
    ws.ll0.resize(n);
    ws.ll1.resize(n);
    if (grads) {
        ws.gx0.resize(1, k);
        ws.gx1.resize(1, k);
        ws.gt0.resize(1, 1);
        ws.gt1.resize(1, 1);
        ws.gy0.resize(n, 1);
        ws.gy1.resize(n, 1);
        ws.gx0.fill(0.0);
        ws.gx1.fill(0.0);
        ws.gt0.fill(0.0);
        ws.gt1.fill(0.0);
        ws.denc_out.resize(n, 1);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double q = sigmoid(enc_out(i, 0));
        const double* xr = b.x->row(i);

        double xll0 = 0.0, xll1 = 0.0;
        for (int j = 0; j < k; ++j) {
            xll0 += bernoulli_loglik(xr[j], x_out0(0, j));
            xll1 += bernoulli_loglik(xr[j], x_out1(0, j));
        }
        const double tll0 = bernoulli_loglik(b.t[i], t_out0(0, 0));
        const double tll1 = bernoulli_loglik(b.t[i], t_out1(0, 0));
        const double yll0 = bernoulli_loglik(b.y[i], y_out0(i, 0));
        const double yll1 = bernoulli_loglik(b.y[i], y_out1(i, 0));

        ws.ll0[i] = lambda * xll0 + tll0 + yll0;
        ws.ll1[i] = lambda * xll1 + tll1 + yll1;

        // KL[Bern(q) || Bern(pi)] through logits for stability.
        const double kl = q * (softplus(-pi_logit) - softplus(-enc_out(i, 0))) +
                          (1.0 - q) * (softplus(pi_logit) - softplus(enc_out(i, 0)));

        elbo += (1.0 - q) * ws.ll0[i] + q * ws.ll1[i] - kl_weight * kl;
        x_acc += (1.0 - q) * xll0 + q * xll1;
        t_acc += (1.0 - q) * tll0 + q * tll1;
        y_acc += (1.0 - q) * yll0 + q * yll1;
        kl_acc += kl;

        if (grads) {
            const double w0 = w * (1.0 - q), w1 = w * q;
            for (int j = 0; j < k; ++j) {
                ws.gx0(0, j) += lambda * w0 * (xr[j] - sigmoid(x_out0(0, j)));
                ws.gx1(0, j) += lambda * w1 * (xr[j] - sigmoid(x_out1(0, j)));
            }
            ws.gt0(0, 0) += w0 * (b.t[i] - sigmoid(t_out0(0, 0)));
            ws.gt1(0, 0) += w1 * (b.t[i] - sigmoid(t_out1(0, 0)));
            ws.gy0(i, 0) = w0 * (b.y[i] - sigmoid(y_out0(i, 0)));
            ws.gy1(i, 0) = w1 * (b.y[i] - sigmoid(y_out1(i, 0)));

            const double dq = (ws.ll1[i] - ws.ll0[i]) - kl_weight * (enc_out(i, 0) - pi_logit);
            ws.denc_out(i, 0) = w * dq * q * (1.0 - q);
            grads->prior_logit += kl_weight * w * (q - sigmoid(pi_logit));
        }
    }

    res.x_term_unscaled = x_acc * w;
    res.x_term_scaled = lambda * res.x_term_unscaled;
    res.t_term = t_acc * w;
    res.y_term = y_acc * w;
    res.kl_term = kl_acc * w;
    res.elbo = elbo * w;
    if (!std::isfinite(res.elbo))
        throw Error(ErrorCode::non_finite, "non-finite ELBO (binary latent)");
    if (!grads) return res;

    nn::backward(ws.x0_tape, ws.gx0, grads->xdec);
    nn::backward(ws.x1_tape, ws.gx1, grads->xdec);
    nn::backward(ws.t0_tape, ws.gt0, grads->tdec);
    nn::backward(ws.t1_tape, ws.gt1, grads->tdec);
    nn::backward(ws.y0_tape, ws.gy0, grads->ydec);
    nn::backward(ws.y1_tape, ws.gy1, grads->ydec);
    nn::backward(ws.enc_tape, ws.denc_out, grads->enc);
    return res;
}

ElboResult elbo_core(const CevaeModel& m, const BatchView& b, double lambda, double kl_weight,
                     const Matrix& eps, Workspace& ws, Grads* grads) {
    if (b.n() == 0) throw Error(ErrorCode::insufficient_data, "empty batch");
    if (!(lambda >= 0.0) || !(kl_weight >= 0.0))
        throw Error(ErrorCode::invalid_parameter, "lambda and kl weight must be nonnegative");
    if (m.config.variant == Variant::binary_latent)
        return binary_latent_elbo(m, b, lambda, kl_weight, ws, grads);
    return gaussian_latent_elbo(m, b, lambda, kl_weight, eps, ws, grads);
}

void check_schema(const CevaeModel& m, const ObservedData& data) {
    if (data.schema != m.schema)
        throw Error(ErrorCode::schema_mismatch, "dataset schema does not match the model");
    if (static_cast<int>(data.proxy_dim()) != m.proxy_dim)
        throw Error(ErrorCode::schema_mismatch, "proxy dimension does not match the model");
}

}  // namespace

ElboResult elbo_batch(const CevaeModel& model, const ObservedData& batch, double lambda,
                      double kl_weight, RandomStream stream) {
    check_schema(model, batch);
    Workspace ws;
    Matrix eps;
    if (model.gaussian_latent()) {
        eps.resize(batch.n(), model.config.latent_dim);
        stream.fill_gaussian(eps.flat());
    }
    const BatchView view{&batch.x, batch.t, batch.y};
    return elbo_core(model, view, lambda, kl_weight, eps, ws, nullptr);
}

ElboResult elbo_with_noise(const CevaeModel& model, const ObservedData& batch, double lambda,
                           double kl_weight, const Matrix& eps, std::vector<double>* flat_grads) {
    check_schema(model, batch);
    Workspace ws;
    const BatchView view{&batch.x, batch.t, batch.y};
    if (!flat_grads) return elbo_core(model, view, lambda, kl_weight, eps, ws, nullptr);
    Grads grads(model);
    grads.zero();
    const ElboResult res = elbo_core(model, view, lambda, kl_weight, eps, ws, &grads);
    flat_grads->resize(model.flat_size());
    grads.to_descent_flat(model, *flat_grads);
    for (double& v : *flat_grads) v = -v;  // back to ascent orientation
    return res;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, RandomStream& stream) {
    for (std::size_t i = idx.size(); i-- > 1;) {
        const std::size_t j =
            static_cast<std::size_t>(stream.next_unit() * static_cast<double>(i + 1));
        std::swap(idx[i], idx[j]);
    }
}

}  // namespace

TrainOutcome train_from(CevaeModel model, const ObservedData& data, RandomStream stream) {
    check_schema(model, data);
    const CevaeConfig& cfg = model.config;
    const std::size_t n = data.n();
    if (static_cast<std::size_t>(cfg.batch_size) > n)
        throw Error(ErrorCode::invalid_parameter, "batch_size exceeds the dataset size");

    const auto t_start = std::chrono::steady_clock::now();
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
    const std::size_t batches_per_epoch = (n + batch - 1) / batch;
    const int latent = cfg.latent_dim;
    const double log_floor = std::log(cfg.sd_floor);

    nn::ExpSchedule schedule{cfg.lr_start, cfg.lr_end,
                             static_cast<long>(batches_per_epoch) * cfg.epochs};
    nn::AdamState adam(model.flat_size(), schedule);
    std::vector<double> flat(model.flat_size()), flat_grads(model.flat_size());

    RandomStream shuffle_root = stream.substream(101);
    RandomStream noise_root = stream.substream(102);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    Workspace ws;
    Grads grads(model);
    Matrix xb, eps;
    std::vector<double> tb, yb;

    TrainReport report;
    report.stream_seed = stream.seed();
    report.stream_substream = stream.substream_id();
    report.epochs.reserve(cfg.epochs);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double kl_weight = cfg.kl.weight_at(epoch);
        RandomStream shuffle_stream = shuffle_root.substream(epoch);
        shuffle_indices(order, shuffle_stream);
        RandomStream epoch_noise = noise_root.substream(epoch);

        double sum[5] = {0, 0, 0, 0, 0};
        double sumsq[5] = {0, 0, 0, 0, 0};
        double obs_weighted[5] = {0, 0, 0, 0, 0};
        std::size_t obs_total = 0;

        for (std::size_t start = 0, bi = 0; start < n; start += batch, ++bi) {
            const std::size_t m = std::min(batch, n - start);
            xb.resize(m, model.proxy_dim);
            tb.resize(m);
            yb.resize(m);
            for (std::size_t r = 0; r < m; ++r) {
                const std::size_t src = order[start + r];
                const double* xr = data.x.row(src);
                for (int c = 0; c < model.proxy_dim; ++c) xb(r, c) = xr[c];
                tb[r] = data.t[src];
                yb[r] = data.y[src];
            }
            if (model.gaussian_latent()) {
                eps.resize(m, latent);
                RandomStream batch_noise = epoch_noise.substream(bi);
                batch_noise.fill_gaussian(eps.flat());
            }

            grads.zero();
            const BatchView view{&xb, tb, yb};
            ElboResult r;
            try {
                r = elbo_core(model, view, cfg.proxy_scale, kl_weight, eps, ws, &grads);
                grads.to_descent_flat(model, flat_grads);
                model.to_flat(flat);
                nn::adam_step(adam, flat, flat_grads);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::non_finite) throw;
                throw Error(ErrorCode::non_finite,
                            std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                                ", batch " + std::to_string(bi));
            }
            // Keep shared sds at or above the floor.
            if (!model.log_sd.empty()) {
                const std::size_t sd_off = flat.size() - model.log_sd.size() -
                                           (cfg.variant == Variant::binary_latent ? 1 : 0);
                for (std::size_t j = 0; j < model.log_sd.size(); ++j)
                    flat[sd_off + j] = std::max(flat[sd_off + j], log_floor);
            }
            model.from_flat(flat);

            const double vals[5] = {r.elbo, r.x_term_unscaled, r.t_term, r.y_term, r.kl_term};
            for (int s = 0; s < 5; ++s) {
                sum[s] += vals[s];
                sumsq[s] += vals[s] * vals[s];
                obs_weighted[s] += vals[s] * static_cast<double>(m);
            }
            obs_total += m;
        }

        EpochStats st;
        st.epoch = epoch;
        const double nb = static_cast<double>(batches_per_epoch);
        st.elbo = obs_weighted[0] / static_cast<double>(obs_total);
        st.x_term_unscaled = obs_weighted[1] / static_cast<double>(obs_total);
        st.x_term_scaled = cfg.proxy_scale * st.x_term_unscaled;
        st.t_term = obs_weighted[2] / static_cast<double>(obs_total);
        st.y_term = obs_weighted[3] / static_cast<double>(obs_total);
        st.kl_term = obs_weighted[4] / static_cast<double>(obs_total);
        auto batch_sd = [&](int s) {
            if (batches_per_epoch < 2) return 0.0;
            const double mean = sum[s] / nb;
            const double var = std::max(0.0, sumsq[s] / nb - mean * mean);
            return std::sqrt(var);
        };
        st.elbo_batch_sd = batch_sd(0);
        st.x_batch_sd = batch_sd(1);
        st.t_batch_sd = batch_sd(2);
        st.y_batch_sd = batch_sd(3);
        st.batches = static_cast<int>(batches_per_epoch);
        report.epochs.push_back(st);
    }

    report.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return TrainOutcome{std::move(model), std::move(report)};
}

TrainOutcome train(const CevaeConfig& config, const ObservedData& data, RandomStream stream) {
    CevaeModel model =
        build_model(config, data.schema, static_cast<int>(data.proxy_dim()), stream.substream(100));
    return train_from(std::move(model), data, stream);
}

}  // namespace proxyrestore::cevae
