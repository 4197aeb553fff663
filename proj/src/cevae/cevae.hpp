// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "datagen/dataset.hpp"
#include "datagen/intervention.hpp"
#include "nn/adam.hpp"
#include "nn/mlp.hpp"

namespace proxyrestore::cevae {

using datagen::ObservedData;
using datagen::Schema;
using nn::Matrix;
using nn::MlpSpec;
using nn::ParamSet;
using numerics::RandomStream;

enum class Variant { full, linear, binary_latent };
enum class YHead { mlp, linear };

// KL weight ramps linearly from start_weight to 1 over ramp_epochs, then
// stays at 1. The default is the constant-1 schedule.
struct KlSchedule {
    double start_weight = 1.0;
    int ramp_epochs = 0;

    double weight_at(int epoch) const {
        if (ramp_epochs <= 0 || epoch >= ramp_epochs) return 1.0;
        const double frac = static_cast<double>(epoch) / static_cast<double>(ramp_epochs);
        return start_weight + (1.0 - start_weight) * frac;
    }
};

struct CevaeConfig {
    Variant variant = Variant::full;
    int latent_dim = 10;  // binary_latent forces 1
    YHead y_head = YHead::mlp;
    double proxy_scale = 1.0;  // lambda on the x reconstruction term
    KlSchedule kl;
    int epochs = 300;
    int batch_size = 200;
    double lr_start = 0.01;
    double lr_end = 0.001;
    int hidden_layers = 3;
    int hidden_width = 30;
    int mc_do_samples = 500;  // prior draws for estimate_do
    double sd_floor = 1e-3;

    void validate() const;
};

// Encoder/decoder bundle. The decoder factorizes as p(x|z) p(t|z) p(y|z,t);
// the y network reads the observed treatment, never a reconstruction of it.
// Gaussian conditionals emit softplus-linked sds floored at sd_floor; the
// linear variant instead keeps one learnable log-sd per conditional
// coordinate in log_sd. Binary conditionals emit logits.
struct CevaeModel {
    CevaeConfig config;
    Schema schema;
    int proxy_dim = 2;

    MlpSpec enc_spec, xdec_spec, tdec_spec, ydec_spec;
    ParamSet enc, xdec, tdec, ydec;

    // Layout: [encoder latent sds (linear variant), x sds, t sd, y sd];
    // the y slot is also present for the full variant with a linear y head.
    std::vector<double> log_sd;
    double prior_logit = 0.0;  // binary-latent prior parameter, pi = sigmoid

    bool gaussian_latent() const { return config.variant != Variant::binary_latent; }
    bool linear_y_head() const {
        return config.variant == Variant::linear || config.y_head == YHead::linear;
    }

    std::size_t flat_size() const;
    void to_flat(std::span<double> out) const;
    void from_flat(std::span<const double> in);

    // Checkpoint round trip: spec header plus flat parameter arrays.
    std::string to_json() const;
    static CevaeModel from_json(const std::string& text);
};

// Builds the architecture for a dataset schema and initializes parameters
// from the stream (shared log-sds start at 0, the prior logit at 0).
CevaeModel build_model(const CevaeConfig& config, const Schema& schema, int proxy_dim,
                       RandomStream stream);

struct ElboResult {
    double elbo = 0;
    double x_term_unscaled = 0;
    double x_term_scaled = 0;
    double t_term = 0;
    double y_term = 0;
    double kl_term = 0;
};

// Single-sample reparameterized ELBO of one batch (exact two-point
// expectation for the binary latent). Noise is drawn from the stream.
ElboResult elbo_batch(const CevaeModel& model, const ObservedData& batch, double lambda,
                      double kl_weight, RandomStream stream);

// Deterministic variant with caller-provided reparameterization noise
// (ignored by the binary latent); optionally returns d(elbo)/d(flat params).
// This is the surface the gradient checks probe.
ElboResult elbo_with_noise(const CevaeModel& model, const ObservedData& batch, double lambda,
                           double kl_weight, const Matrix& eps, std::vector<double>* flat_grads);

struct EpochStats {
    int epoch = 0;
    double elbo = 0;
    double x_term_unscaled = 0;
    double x_term_scaled = 0;
    double t_term = 0;
    double y_term = 0;
    double kl_term = 0;
    // Standard deviation across the epoch's batches, for plateau checks.
    double elbo_batch_sd = 0;
    double x_batch_sd = 0;
    double t_batch_sd = 0;
    double y_batch_sd = 0;
    int batches = 0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double wall_clock_s = 0;
    std::uint64_t stream_seed = 0;
    std::uint64_t stream_substream = 0;

    double final_elbo() const { return epochs.empty() ? 0.0 : epochs.back().elbo; }
    // CSV columns: epoch,elbo,x_term_unscaled,t_term,y_term,kl_term.
    void save_csv(const std::string& path) const;
};

struct TrainOutcome {
    CevaeModel model;
    TrainReport report;
};

// Minibatch Adam ascent on the ELBO. Deterministic given (config, data,
// stream): initialization, shuffling and reparameterization noise all come
// from derived substreams.
TrainOutcome train(const CevaeConfig& config, const ObservedData& data, RandomStream stream);

// p_theta(y|do(t)) via the adjustment formula. Gaussian latents use n_z
// prior draws (a Monte Carlo mixture over t for continuous y, an averaged
// table for binary y); the binary latent is summed exactly with weights
// (1-pi, pi). t_values is the set of treatments the caller will evaluate;
// continuous outputs remain evaluable at any t.
datagen::InterventionalDistribution estimate_do(const CevaeModel& model,
                                                std::span<const double> t_values, int n_z,
                                                RandomStream stream);

// Closed form N(gamma_yt * t + b_y, s_y^2 + |gamma_yz|^2) available when the
// y decoder is linear and the latent Gaussian.
datagen::InterventionalDistribution linear_do_closed_form(const CevaeModel& model);

// Per-dimension variance of the posterior mean over the dataset. A
// dimension counts as active above the 0.01 threshold.
std::vector<double> latent_activity(const CevaeModel& model, const ObservedData& data);
int active_dimensions(std::span<const double> activity, double threshold = 0.01);

// The treatment coefficient of a linear y decoder.
double extract_cyt(const CevaeModel& model);

// Explicit parameter bundle for custom initializations.
struct CevaeParams {
    ParamSet enc, xdec, tdec, ydec;
    std::vector<double> log_sd;
    double prior_logit = 0.0;
};

CevaeModel set_custom_init(const CevaeModel& model, const CevaeParams& params);

// Replaces the encoder of a linear-variant model with the exact posterior
// implied by its current decoder (the joint is Gaussian, so the posterior
// is linear with a constant covariance).
CevaeModel with_matched_posterior_encoder(const CevaeModel& model);

// Continues training an already-initialized model; used by the custom-init
// experiments. Epoch/batch/lr settings still come from model.config.
TrainOutcome train_from(CevaeModel model, const ObservedData& data, RandomStream stream);

}  // namespace proxyrestore::cevae
