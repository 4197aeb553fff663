// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end over the shared-library C API.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "proxyrestore.h"

namespace {

[[noreturn]] void fail(pr_status status) {
    std::fprintf(stderr, "error (%s): %s\n", pr_status_name(status), pr_last_error());
    std::exit(1);
}

void check(pr_status status) {
    if (status != PR_OK) fail(status);
}

pr_process* open_process(const std::string& name_or_file) {
    pr_process* process = nullptr;
    if (name_or_file.size() > 5 &&
        name_or_file.compare(name_or_file.size() - 5, 5, ".json") == 0) {
        std::ifstream file(name_or_file);
        if (!file) {
            std::fprintf(stderr, "error: cannot read '%s'\n", name_or_file.c_str());
            std::exit(1);
        }
        std::stringstream buf;
        buf << file.rdbuf();
        check(pr_process_from_json(buf.str().c_str(), &process));
    } else {
        check(pr_process_named(name_or_file.c_str(), &process));
    }
    return process;
}

std::string read_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        std::fprintf(stderr, "error: cannot read '%s'\n", path.c_str());
        std::exit(1);
    }
    std::stringstream buf;
    buf << file.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effect restoration under proxy-measured confounding: generators, estimators "
                 "and consistency experiments"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_path;
    int workers = 0;

    // gen: sample a dataset and write it as CSV.
    auto* gen = app.add_subcommand("gen", "Generate a dataset from a process and write CSV");
    std::string gen_process = "lingauss_main";
    std::uint64_t gen_n = 1000;
    bool gen_hidden = false;
    gen->add_option("--process", gen_process, "Named process or a .json parameter file");
    gen->add_option("--n", gen_n, "Number of observations")->required();
    gen->add_option("--seed", seed, "Stream seed");
    gen->add_option("--out", out_path, "Output CSV path")->required();
    gen->add_flag("--include-hidden", gen_hidden, "Also write the hidden confounder column");

    // fit: run one estimator on one dataset and print metrics.
    auto* fit = app.add_subcommand("fit", "Fit one estimator and print its metrics as JSON");
    std::string fit_process = "lingauss_main";
    std::string fit_estimator = "analytic";
    std::string fit_estimator_json;
    std::string fit_data;
    std::uint64_t fit_n = 10000;
    std::string fit_save_model, fit_train_report;
    fit->add_option("--process", fit_process, "Named process or a .json parameter file");
    fit->add_option("--estimator", fit_estimator,
                    "Estimator kind: analytic, direct_adjust, no_adjust, cevae");
    fit->add_option("--estimator-json", fit_estimator_json,
                    "Full estimator spec JSON (overrides --estimator)");
    fit->add_option("--data", fit_data, "Dataset CSV (default: generate from the process)");
    fit->add_option("--n", fit_n, "Rows to generate when --data is not given");
    fit->add_option("--seed", seed, "Stream seed");
    fit->add_option("--save-model", fit_save_model, "Write the trained model checkpoint here");
    fit->add_option("--train-report", fit_train_report, "Write the per-epoch ELBO trace here");

    // sweep: run an experiment config.
    auto* sweep = app.add_subcommand("sweep", "Run an experiment sweep from a config JSON");
    std::string sweep_config;
    std::string sweep_format = "csv";
    sweep->add_option("--config", sweep_config, "ExperimentConfig JSON file")->required();
    sweep->add_option("--out", out_path, "Results file (default: the config's \"out\" field)");
    sweep->add_option("--format", sweep_format, "csv or json");
    sweep->add_option("--workers", workers, "Parallel cells (default $PROXYRESTORE_WORKERS)");

    // repro: run a built-in preset.
    auto* repro = app.add_subcommand("repro", "Run a built-in experiment preset");
    std::string repro_name;
    std::string repro_format = "csv";
    bool repro_print = false;
    repro->add_option("name", repro_name,
                      "fig2a, fig2d, fig3b, fig3de, lambda_sweep, kl_anneal_10d, binary_latent, "
                      "custom_init_2d, replication_lingauss, replication_binary")
        ->required();
    repro->add_option("--out", out_path, "Results file");
    repro->add_option("--format", repro_format, "csv or json");
    repro->add_option("--workers", workers, "Parallel cells (default $PROXYRESTORE_WORKERS)");
    repro->add_flag("--print-config", repro_print, "Print the resolved config and exit");

    // prop2-path: evaluate the restricted ELBO path.
    auto* prop2 = app.add_subcommand("prop2-path",
                                     "Evaluate the copied-proxy ELBO path term by term");
    double prop2_gamma = 1.0;
    int prop2_copies = 2;
    std::vector<double> prop2_s{0.1, 0.01, 0.001, 0.0001};
    prop2->add_option("--gamma1", prop2_gamma, "Latent-to-proxy loading on the path");
    prop2->add_option("--copies", prop2_copies, "Number of proxy copies (1 or 2)");
    prop2->add_option("--s", prop2_s, "Path positions in (0,1)")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        pr_process* process = open_process(gen_process);
        pr_dataset* dataset = nullptr;
        check(pr_dataset_generate(process, gen_n, seed, 0, &dataset));
        check(pr_dataset_save_csv(dataset, out_path.c_str(), gen_hidden ? 1 : 0));
        std::uint64_t rows = 0;
        pr_dataset_rows(dataset, &rows);
        std::printf("wrote %llu rows to %s\n", static_cast<unsigned long long>(rows),
                    out_path.c_str());
        pr_dataset_free(dataset);
        pr_process_free(process);
        return 0;
    }

    if (fit->parsed()) {
        pr_process* process = open_process(fit_process);
        pr_dataset* dataset = nullptr;
        if (fit_data.empty()) {
            check(pr_dataset_generate(process, fit_n, seed, 0, &dataset));
        } else {
            check(pr_dataset_load_csv(fit_data.c_str(), &dataset));
        }
        std::string estimator = fit_estimator_json;
        if (estimator.empty())
            estimator = "{\"id\":\"" + fit_estimator + "\",\"kind\":\"" + fit_estimator + "\"}";
        std::string options = "{\"seed\":" + std::to_string(seed);
        if (!fit_save_model.empty()) options += ",\"save_model\":\"" + fit_save_model + "\"";
        if (!fit_train_report.empty())
            options += ",\"train_report\":\"" + fit_train_report + "\"";
        options += "}";
        char* metrics = nullptr;
        check(pr_fit(process, dataset, estimator.c_str(), options.c_str(), &metrics));
        std::printf("%s\n", metrics);
        pr_string_free(metrics);
        pr_dataset_free(dataset);
        pr_process_free(process);
        return 0;
    }

    if (sweep->parsed()) {
        const std::string config = read_file(sweep_config);
        if (out_path.empty()) {
            char* config_out = nullptr;
            check(pr_config_output_path(config.c_str(), &config_out));
            out_path = config_out;
            pr_string_free(config_out);
            if (out_path.empty()) {
                std::fprintf(stderr, "error: no --out and the config has no \"out\" field\n");
                return 1;
            }
        }
        pr_results* results = nullptr;
        check(pr_sweep_run(config.c_str(), workers, &results));
        check(pr_results_save(results, out_path.c_str(), sweep_format.c_str()));
        std::uint64_t rows = 0;
        pr_results_row_count(results, &rows);
        std::printf("wrote %llu rows to %s\n", static_cast<unsigned long long>(rows),
                    out_path.c_str());
        pr_results_free(results);
        return 0;
    }

    if (repro->parsed()) {
        char* config = nullptr;
        check(pr_preset_config(repro_name.c_str(), &config));
        if (repro_print) {
            std::printf("%s\n", config);
            pr_string_free(config);
            return 0;
        }
        if (out_path.empty()) out_path = repro_name + "_results." + repro_format;
        pr_results* results = nullptr;
        check(pr_sweep_run(config, workers, &results));
        pr_string_free(config);
        check(pr_results_save(results, out_path.c_str(), repro_format.c_str()));
        std::uint64_t rows = 0;
        pr_results_row_count(results, &rows);
        std::printf("wrote %llu rows to %s\n", static_cast<unsigned long long>(rows),
                    out_path.c_str());
        pr_results_free(results);
        return 0;
    }

    if (prop2->parsed()) {
        std::vector<double> values(prop2_s.size());
        check(pr_prop2_path_eval(prop2_gamma, prop2_s.data(), prop2_s.size(), prop2_copies,
                                 values.data()));
        std::printf("s,path_value\n");
        for (std::size_t i = 0; i < prop2_s.size(); ++i)
            std::printf("%.17g,%.17g\n", prop2_s[i], values[i]);
        return 0;
    }

    return 0;
}
