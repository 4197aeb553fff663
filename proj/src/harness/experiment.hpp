// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "cevae/cevae.hpp"
#include "datagen/process.hpp"
#include "metrics/metrics.hpp"

namespace proxyrestore::harness {

// One generative process under a stable identifier. Inline parameters or a
// sampled spec (resolved once per experiment from sample_seed).
struct ProcessSpec {
    std::string id;
    std::variant<datagen::ProcessVariant, datagen::BinaryParams> params;
    bool ct_defaulted = false;  // set when c_t was not part of the source table

    bool binary() const { return std::holds_alternative<datagen::BinaryParams>(params); }
};

enum class EstimatorKind {
    analytic,       // covariance restoration (continuous) or joint-table (binary)
    cevae,          // any CEVAE variant, configured below
    cevae_custom_2d,  // 2D linear CEVAE from the crafted split initialization
    direct_adjust,
    no_adjust,
};

struct EstimatorSpec {
    std::string id;
    EstimatorKind kind = EstimatorKind::analytic;
    cevae::CevaeConfig cevae;  // used by the cevae kinds
    double ridge = 0.0;        // direct_adjust regularization
};

struct ExperimentConfig {
    std::string experiment_id;
    std::uint64_t master_seed = 0;
    std::vector<ProcessSpec> processes;
    std::vector<EstimatorSpec> estimators;
    std::vector<std::uint64_t> sample_sizes;
    std::vector<double> proxy_scales{1.0};
    std::vector<std::uint64_t> seeds{0};
    metrics::AidSpec aid;
    bool record_timing = true;
    std::string out;  // default results path; CLI flags override

    void validate() const;
};

// One sweep cell. The tuple (experiment_id, process_id, estimator_id, n,
// lambda, seed) is the unique key; failed cells carry the error in-band.
struct ResultRow {
    std::string experiment_id;
    std::string process_id;
    std::string estimator_id;
    std::uint64_t n = 0;
    double lambda = 1.0;
    std::uint64_t seed = 0;
    double aid = std::nan("");
    double ate_error = std::nan("");
    double c_yt_hat = std::nan("");
    double do_mean_t0 = std::nan("");
    double do_mean_t1 = std::nan("");
    int active_dims = -1;
    double final_elbo = std::nan("");
    double wall_clock_s = 0.0;
    std::string error;
};

// Executes the full cross product of processes x sizes x scales x seeds x
// estimators. Every cell derives its streams from a pure hash of its key, so
// any worker count (workers <= 0: $PROXYRESTORE_WORKERS, else hardware
// concurrency) produces identical rows. Rows come back sorted by key.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, int workers = 0);

// Non-constant terms of the restricted ELBO path for N proxy copies,
// (1 - 5N/8) ln s - N gamma1^2 / 2 - s^2 / 2, per requested s in (0,1).
// Diverges upward as s -> 0 for N = 2 and downward for N = 1.
std::vector<double> prop2_path_eval(double gamma1, std::span<const double> s_values,
                                    int copy_count);

// Built-in experiment configurations reproducing the in-scope figures.
// Names: fig2a, fig2d, fig3b, fig3de, lambda_sweep, kl_anneal_10d,
// binary_latent, custom_init_2d, replication_lingauss, replication_binary.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Named generative processes (lingauss_main, binary_main, rotated_noise,
// repeated_proxy, repeated_proxy_exact, lingauss_p1..p4, binary_p1..p4).
ProcessSpec named_process(const std::string& name);
std::vector<std::string> process_names();

// Serialization (declared here, implemented in serialize.cpp).
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);
std::string process_to_json(const ProcessSpec& process);
ProcessSpec process_from_json(const std::string& text);

enum class EmitFormat { csv, json };
void emit(const std::vector<ResultRow>& rows, const std::string& path, EmitFormat format);
std::vector<ResultRow> load_results(const std::string& path);

// Key-derivation hash shared by the orchestrator (exposed for tests).
std::uint64_t cell_hash(std::initializer_list<std::string> parts);

}  // namespace proxyrestore::harness
