// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "proxyrestore.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "analytic/baselines.hpp"
#include "analytic/restore.hpp"
#include "cevae/cevae.hpp"
#include "core/error.hpp"
#include "datagen/process.hpp"
#include "harness/experiment.hpp"
#include "json.hpp"
#include "metrics/metrics.hpp"

using namespace proxyrestore;
using nlohmann::json;

// Handle definitions. Each wraps the corresponding core value.
struct pr_process {
    harness::ProcessSpec spec;
};
struct pr_dataset {
    datagen::Dataset data;
};
struct pr_results {
    std::vector<harness::ResultRow> rows;
};

namespace {

thread_local std::string g_last_error;

pr_status to_status(ErrorCode code) { return static_cast<pr_status>(code); }

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Runs `fn`, translating exceptions into status codes + the thread-local
// error message.
template <typename Fn>
pr_status guarded(Fn&& fn) {
    try {
        fn();
        return PR_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PR_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return PR_ERR_INTERNAL;
    }
}

pr_status require(bool ok, const char* what) {
    if (ok) return PR_OK;
    g_last_error = what;
    return PR_ERR_INVALID_PARAMETER;
}

}  // namespace

extern "C" {

const char* pr_last_error(void) { return g_last_error.c_str(); }

const char* pr_status_name(pr_status status) {
    if (status == PR_OK) return "ok";
    if (status == PR_ERR_INTERNAL) return "internal";
    return error_code_name(static_cast<ErrorCode>(status));
}

void pr_string_free(char* text) { std::free(text); }

pr_status pr_process_named(const char* name, pr_process** out) {
    if (pr_status s = require(name && out, "name and out must be non-null")) return s;
    return guarded([&] { *out = new pr_process{harness::named_process(name)}; });
}

pr_status pr_process_from_json(const char* json_text, pr_process** out) {
    if (pr_status s = require(json_text && out, "json and out must be non-null")) return s;
    return guarded([&] { *out = new pr_process{harness::process_from_json(json_text)}; });
}

pr_status pr_process_sample(const char* kind, uint64_t sample_seed, pr_process** out) {
    if (pr_status s = require(kind && out, "kind and out must be non-null")) return s;
    return guarded([&] {
        const json spec{{"kind", std::string("sampled-") + kind}, {"sample_seed", sample_seed}};
        *out = new pr_process{harness::process_from_json(spec.dump())};
    });
}

pr_status pr_process_to_json(const pr_process* process, char** out_json) {
    if (pr_status s = require(process && out_json, "process and out must be non-null")) return s;
    return guarded([&] { *out_json = dup_string(harness::process_to_json(process->spec)); });
}

void pr_process_free(pr_process* process) { delete process; }

pr_status pr_dataset_generate(const pr_process* process, uint64_t n, uint64_t seed,
                              uint64_t substream, pr_dataset** out) {
    if (pr_status s = require(process && out, "process and out must be non-null")) return s;
    return guarded([&] {
        numerics::RandomStream stream(seed, substream);
        datagen::Dataset data =
            process->spec.binary()
                ? datagen::generate(std::get<datagen::BinaryParams>(process->spec.params), n,
                                    stream)
                : datagen::generate(std::get<datagen::ProcessVariant>(process->spec.params), n,
                                    stream);
        *out = new pr_dataset{std::move(data)};
    });
}

pr_status pr_dataset_load_csv(const char* path, pr_dataset** out) {
    if (pr_status s = require(path && out, "path and out must be non-null")) return s;
    return guarded([&] { *out = new pr_dataset{datagen::Dataset::load_csv(path)}; });
}

pr_status pr_dataset_save_csv(const pr_dataset* dataset, const char* path, int include_hidden) {
    if (pr_status s = require(dataset && path, "dataset and path must be non-null")) return s;
    return guarded([&] { dataset->data.save_csv(path, include_hidden != 0); });
}

pr_status pr_dataset_rows(const pr_dataset* dataset, uint64_t* out_rows) {
    if (pr_status s = require(dataset && out_rows, "dataset and out must be non-null")) return s;
    *out_rows = dataset->data.n();
    return PR_OK;
}

pr_status pr_dataset_proxy_dim(const pr_dataset* dataset, uint64_t* out_dim) {
    if (pr_status s = require(dataset && out_dim, "dataset and out must be non-null")) return s;
    *out_dim = dataset->data.proxy_dim();
    return PR_OK;
}

void pr_dataset_free(pr_dataset* dataset) { delete dataset; }

pr_status pr_fit(const pr_process* process, const pr_dataset* dataset,
                 const char* estimator_json, const char* options_json,
                 char** out_metrics_json) {
    if (pr_status s = require(process && dataset && estimator_json && out_metrics_json,
                              "process, dataset, estimator and out must be non-null"))
        return s;
    return guarded([&] {
        // Reuse the sweep machinery: a one-cell config over the provided
        // dataset's exact rows would diverge from the sweep's generation
        // path, so fit directly here.
        json je = json::parse(estimator_json);
        json opts = options_json ? json::parse(options_json) : json::object();
        const std::uint64_t seed = opts.value("seed", 0ull);

        const datagen::ObservedData observed = dataset->data.observed();
        const datagen::InterventionalDistribution truth =
            process->spec.binary()
                ? datagen::true_do(std::get<datagen::BinaryParams>(process->spec.params))
                : datagen::true_do(std::get<datagen::ProcessVariant>(process->spec.params));

        json out;
        out["estimator_id"] = je.value("id", std::string("estimator"));
        const std::string kind = je.at("kind").get<std::string>();
        datagen::InterventionalDistribution estimate;

        if (kind == "analytic") {
            if (process->spec.binary()) {
                estimate = analytic::restore_binary(analytic::empirical_joint(observed));
            } else {
                const auto cov =
                    numerics::sample_cov(observed.xxty_columns(), {"x1", "x2", "t", "y"});
                const analytic::LinGaussRestoration r = analytic::restore_lingauss(cov);
                estimate = r.do_dist;
                out["c_yt_hat"] = r.c_yt_hat;
            }
        } else if (kind == "direct_adjust") {
            const auto r = analytic::direct_adjust(observed, je.value("ridge", 0.0));
            estimate = r.do_dist;
            out["c_yt_hat"] = r.coef_t;
        } else if (kind == "no_adjust") {
            const auto r = analytic::no_adjust(observed);
            estimate = r.do_dist;
            out["c_yt_hat"] = r.coef_t;
        } else if (kind == "cevae") {
            harness::ExperimentConfig probe;  // reuse the JSON schema for the cevae block
            const std::string est_text =
                json{{"experiment_id", "fit"},
                     {"processes", json::array({json::parse(harness::process_to_json(process->spec))})},
                     {"estimators", json::array({je})},
                     {"sample_sizes", json::array({1})}}
                    .dump();
            probe = harness::config_from_json(est_text);
            cevae::CevaeConfig config = probe.estimators.at(0).cevae;

            const auto outcome =
                cevae::train(config, observed, numerics::RandomStream(seed, 1));
            out["final_elbo"] = outcome.report.final_elbo();
            if (outcome.model.gaussian_latent()) {
                const auto activity = cevae::latent_activity(outcome.model, observed);
                out["active_dims"] = cevae::active_dimensions(activity);
            }
            if (outcome.model.linear_y_head())
                out["c_yt_hat"] = cevae::extract_cyt(outcome.model);
            const bool closed_form = outcome.model.linear_y_head() &&
                                     outcome.model.gaussian_latent() &&
                                     !outcome.model.schema.all_binary();
            const double t_values[2] = {0.0, 1.0};
            estimate = closed_form ? cevae::linear_do_closed_form(outcome.model)
                                   : cevae::estimate_do(outcome.model, t_values,
                                                        config.mc_do_samples,
                                                        numerics::RandomStream(seed, 2));
            if (opts.contains("save_model")) {
                std::ofstream f(opts.at("save_model").get<std::string>());
                f << outcome.model.to_json();
            }
            if (opts.contains("train_report"))
                outcome.report.save_csv(opts.at("train_report").get<std::string>());
        } else {
            throw Error(ErrorCode::unknown_name, "unknown estimator kind '" + kind + "'");
        }

        out["aid"] = metrics::aid(estimate, truth, observed, metrics::AidSpec{},
                                  numerics::RandomStream(seed, 3));
        out["ate_error"] = metrics::ate_error(estimate, truth);
        out["do_mean_t0"] = estimate.mean_at(0.0);
        out["do_mean_t1"] = estimate.mean_at(1.0);
        *out_metrics_json = dup_string(out.dump(2));
    });
}

pr_status pr_sweep_run(const char* config_json, int workers, pr_results** out) {
    if (pr_status s = require(config_json && out, "config and out must be non-null")) return s;
    return guarded([&] {
        const harness::ExperimentConfig config = harness::config_from_json(config_json);
        *out = new pr_results{harness::run_experiment(config, workers)};
    });
}

pr_status pr_preset_config(const char* name, char** out_config_json) {
    if (pr_status s = require(name && out_config_json, "name and out must be non-null")) return s;
    return guarded(
        [&] { *out_config_json = dup_string(harness::config_to_json(harness::preset(name))); });
}

pr_status pr_config_output_path(const char* config_json, char** out_path) {
    if (pr_status s = require(config_json && out_path, "config and out must be non-null")) return s;
    return guarded([&] {
        const harness::ExperimentConfig config = harness::config_from_json(config_json);
        *out_path = dup_string(config.out);
    });
}

pr_status pr_results_row_count(const pr_results* results, uint64_t* out_rows) {
    if (pr_status s = require(results && out_rows, "results and out must be non-null")) return s;
    *out_rows = results->rows.size();
    return PR_OK;
}

pr_status pr_results_save(const pr_results* results, const char* path, const char* format) {
    if (pr_status s = require(results && path && format,
                              "results, path and format must be non-null"))
        return s;
    return guarded([&] {
        const std::string fmt = format;
        if (fmt != "csv" && fmt != "json")
            throw Error(ErrorCode::unknown_name, "format must be 'csv' or 'json'");
        harness::emit(results->rows, path,
                      fmt == "csv" ? harness::EmitFormat::csv : harness::EmitFormat::json);
    });
}

void pr_results_free(pr_results* results) { delete results; }

pr_status pr_prop2_path_eval(double gamma1, const double* s_values, size_t count, int copy_count,
                             double* out) {
    if (pr_status s = require(s_values && out, "s_values and out must be non-null")) return s;
    return guarded([&] {
        const auto values =
            harness::prop2_path_eval(gamma1, std::span<const double>(s_values, count), copy_count);
        std::memcpy(out, values.data(), count * sizeof(double));
    });
}

}  // extern "C"
