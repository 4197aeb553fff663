// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "doctest.h"
#include "harness/experiment.hpp"

using namespace proxyrestore;
using namespace proxyrestore::harness;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream file(path);
    std::stringstream ss;
    ss << file.rdbuf();
    return ss.str();
}

// A fast two-estimator configuration for orchestration checks.
ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.experiment_id = "tiny";
    cfg.processes = {named_process("lingauss_p1")};
    EstimatorSpec analytic;
    analytic.id = "analytic";
    analytic.kind = EstimatorKind::analytic;
    EstimatorSpec none;
    none.id = "no_adjust";
    none.kind = EstimatorKind::no_adjust;
    cfg.estimators = {analytic, none};
    cfg.sample_sizes = {50, 100, 200};
    cfg.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    cfg.aid.t_sample_count = 50;
    cfg.aid.y_grid_points = 201;
    cfg.record_timing = false;
    return cfg;
}

ExperimentConfig training_config() {
    ExperimentConfig cfg;
    cfg.experiment_id = "tiny_train";
    cfg.processes = {named_process("lingauss_p1")};
    EstimatorSpec est;
    est.id = "linear1d";
    est.kind = EstimatorKind::cevae;
    est.cevae.variant = cevae::Variant::linear;
    est.cevae.latent_dim = 1;
    est.cevae.epochs = 25;
    est.cevae.batch_size = 100;
    cfg.estimators = {est};
    cfg.sample_sizes = {300};
    cfg.seeds = {0, 1, 2};
    cfg.aid.t_sample_count = 100;
    cfg.aid.y_grid_points = 401;
    cfg.record_timing = false;
    return cfg;
}

}  // namespace

TEST_CASE("cross product size and key ordering") {
    const auto rows = run_experiment(tiny_config(), 2);
    CHECK(rows.size() == 3 * 10 * 2);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto key = [](const ResultRow& r) {
            return std::tie(r.experiment_id, r.process_id, r.estimator_id, r.n, r.lambda, r.seed);
        };
        CHECK(key(rows[i - 1]) < key(rows[i]));
    }
    for (const auto& row : rows) {
        CHECK(row.error.empty());
        CHECK(std::isfinite(row.aid));
        CHECK(row.aid >= 0.0);
        CHECK(row.wall_clock_s == 0.0);
    }
}

TEST_CASE("reruns and worker counts do not change emitted bytes") {
    const auto cfg = training_config();
    const auto serial = run_experiment(cfg, 1);
    const auto parallel = run_experiment(cfg, 4);
    const auto again = run_experiment(cfg, 2);

    emit(serial, "h_serial.csv", EmitFormat::csv);
    emit(parallel, "h_parallel.csv", EmitFormat::csv);
    emit(again, "h_again.csv", EmitFormat::csv);
    const std::string a = slurp("h_serial.csv");
    CHECK(a == slurp("h_parallel.csv"));
    CHECK(a == slurp("h_again.csv"));
    std::remove("h_serial.csv");
    std::remove("h_parallel.csv");
    std::remove("h_again.csv");
}

TEST_CASE("estimators inside one cell share the dataset") {
    // The analytic row and the no-adjust row of the same (n, seed) cell are
    // fit to identical data, so their do-means derive from one sample; check
    // via the deterministic c_yt relationship at a large n.
    ExperimentConfig cfg = tiny_config();
    cfg.sample_sizes = {5000};
    cfg.seeds = {3};
    const auto rows = run_experiment(cfg, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].estimator_id == "analytic");
    CHECK(std::fabs(rows[0].c_yt_hat - 0.46) < 0.1);
    CHECK(std::fabs(rows[1].c_yt_hat - rows[0].c_yt_hat) > 1e-6);  // confounded
}

TEST_CASE("failed cells carry errors in-band") {
    ExperimentConfig cfg;
    cfg.experiment_id = "err";
    cfg.processes = {named_process("repeated_proxy_exact")};
    EstimatorSpec direct;
    direct.id = "direct";
    direct.kind = EstimatorKind::direct_adjust;  // exact copies, no ridge
    EstimatorSpec none;
    none.id = "no_adjust";
    none.kind = EstimatorKind::no_adjust;
    cfg.estimators = {direct, none};
    cfg.sample_sizes = {500};
    cfg.seeds = {0};
    cfg.record_timing = false;
    const auto rows = run_experiment(cfg, 1);
    REQUIRE(rows.size() == 2);
    CHECK(!rows[0].error.empty());
    CHECK(std::isnan(rows[0].aid));
    CHECK(rows[1].error.empty());
    CHECK(std::isfinite(rows[1].aid));

    // With a ridge the same design fits.
    cfg.estimators[0].ridge = 1e-6;
    const auto ridged = run_experiment(cfg, 1);
    CHECK(ridged[0].error.empty());
}

TEST_CASE("emit format contract") {
    const auto rows = run_experiment(tiny_config(), 2);
    emit(rows, "h_table.csv", EmitFormat::csv);
    std::ifstream file("h_table.csv");
    int lines = 0;
    std::string line;
    while (std::getline(file, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 61);  // header + 60 rows
    std::remove("h_table.csv");

    CHECK_THROWS_AS(emit({}, "nothing.csv", EmitFormat::csv), Error);
}

TEST_CASE("result round trip preserves every value") {
    const auto rows = run_experiment(training_config(), 2);
    emit(rows, "h_rt.json", EmitFormat::json);
    const auto from_json = load_results("h_rt.json");
    emit(from_json, "h_rt.csv", EmitFormat::csv);
    const auto from_csv = load_results("h_rt.csv");
    emit(from_csv, "h_rt2.json", EmitFormat::json);
    REQUIRE(from_csv.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(from_csv[i].aid == rows[i].aid);
        CHECK(from_csv[i].ate_error == rows[i].ate_error);
        CHECK(from_csv[i].c_yt_hat == rows[i].c_yt_hat);
        CHECK(from_csv[i].final_elbo == rows[i].final_elbo);
        CHECK(from_csv[i].seed == rows[i].seed);
        CHECK(from_csv[i].active_dims == rows[i].active_dims);
    }
    CHECK(slurp("h_rt.json") == slurp("h_rt2.json"));
    std::remove("h_rt.json");
    std::remove("h_rt.csv");
    std::remove("h_rt2.json");
}

TEST_CASE("error text with commas and quotes survives the CSV round trip") {
    ResultRow row;
    row.experiment_id = "e";
    row.process_id = "p";
    row.estimator_id = "est";
    row.n = 10;
    row.lambda = 1.0;
    row.seed = 0;
    row.error = "denominators too close to zero (a=1, b=2), said \"the solver\"";
    emit({row}, "h_err.csv", EmitFormat::csv);
    const auto back = load_results("h_err.csv");
    REQUIRE(back.size() == 1);
    CHECK(back[0].error == row.error);
    CHECK(std::isnan(back[0].aid));
    std::remove("h_err.csv");
}

TEST_CASE("prop2 path fixtures and monotonicity") {
    const double s_fix[] = {0.01, 0.001};
    const auto n2 = prop2_path_eval(1.0, s_fix, 2);
    CHECK(n2[0] == doctest::Approx(0.1512).epsilon(1e-3));
    CHECK(n2[1] == doctest::Approx(0.7269).epsilon(1e-3));
    CHECK(n2[1] > n2[0]);

    const auto n1 = prop2_path_eval(1.0, s_fix, 1);
    CHECK(n1[0] == doctest::Approx(-2.227).epsilon(1e-3));
    CHECK(n1[1] == doctest::Approx(-3.090).epsilon(1e-3));

    // Strict monotonicity on a dense grid from 0.5 down to 1e-6.
    std::vector<double> grid;
    for (double s = 0.5; s >= 1e-6; s *= 0.8) grid.push_back(s);
    const auto up = prop2_path_eval(1.0, grid, 2);
    const auto down = prop2_path_eval(1.0, grid, 1);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(up[i] > up[i - 1]);
        CHECK(down[i] < down[i - 1]);
    }

    CHECK_THROWS_AS(prop2_path_eval(1.0, std::vector<double>{1.5}, 2), Error);
    CHECK_THROWS_AS(prop2_path_eval(1.0, std::vector<double>{0.1}, 3), Error);
}

TEST_CASE("presets resolve to the documented hyperparameters") {
    for (const std::string& name : preset_names()) {
        const ExperimentConfig cfg = preset(name);
        CHECK(cfg.experiment_id == name);
        cfg.validate();
        for (const EstimatorSpec& est : cfg.estimators) {
            if (est.kind != EstimatorKind::cevae && est.kind != EstimatorKind::cevae_custom_2d)
                continue;
            if (name == "custom_init_2d") {
                // The crafted 2D runs use the careful-training settings; the
                // 1D comparison keeps the standard protocol.
                CHECK(est.cevae.batch_size == (est.cevae.latent_dim == 2 ? 1000 : 200));
            } else {
                CHECK(est.cevae.batch_size == 200);
                CHECK(est.cevae.lr_start == 0.01);
            }
            if (name == "lambda_sweep") {
                CHECK(est.cevae.epochs == 100);
            } else if (name != "custom_init_2d") {
                const int expected =
                    est.cevae.variant == cevae::Variant::linear ? 500 : 300;
                CHECK(est.cevae.epochs == expected);
            }
        }
    }

    const auto fig2a = preset("fig2a");
    CHECK(fig2a.sample_sizes == std::vector<std::uint64_t>{500, 2000, 20000});
    CHECK(fig2a.seeds.size() == 10);
    CHECK(fig2a.estimators.size() == 3);

    const auto fig3b = preset("fig3b");
    CHECK(fig3b.estimators.size() == 2);
    CHECK(fig3b.estimators[0].cevae.latent_dim == 1);
    CHECK(fig3b.estimators[1].cevae.latent_dim == 2);
    CHECK(fig3b.processes[0].id == "rotated_noise");

    const auto sweep = preset("lambda_sweep");
    CHECK(sweep.proxy_scales.size() == 11);
    CHECK(sweep.proxy_scales.front() == 0.0);
    CHECK(sweep.proxy_scales.back() == 1.0);
    CHECK(sweep.sample_sizes == std::vector<std::uint64_t>{20000});
    CHECK(sweep.estimators[0].cevae.y_head == cevae::YHead::linear);

    const auto repl = preset("replication_binary");
    CHECK(repl.processes.size() == 4);
    CHECK(repl.processes[0].binary());

    const auto anneal = preset("kl_anneal_10d");
    CHECK(anneal.seeds.size() == 20);
    CHECK(anneal.sample_sizes == std::vector<std::uint64_t>{2000});
    CHECK(anneal.estimators[0].cevae.kl.start_weight == 0.05);

    CHECK_THROWS_WITH_AS(preset("fig9z"), doctest::Contains("fig2a"), Error);
}

TEST_CASE("named processes parse and round trip through JSON") {
    for (const std::string& name : process_names()) {
        const ProcessSpec spec = named_process(name);
        CHECK(spec.id == name);
        const std::string text = process_to_json(spec);
        const ProcessSpec back = process_from_json(text);
        CHECK(back.id == name);
        CHECK(back.binary() == spec.binary());
        CHECK(process_to_json(back) == text);
    }
    CHECK_THROWS_AS(named_process("nope"), Error);

    const ProcessSpec sampled = process_from_json(
        "{\"kind\":\"sampled-lingauss\",\"sample_seed\":5}");
    const ProcessSpec sampled2 = process_from_json(
        "{\"kind\":\"sampled-lingauss\",\"sample_seed\":5}");
    CHECK(process_to_json(sampled) == process_to_json(sampled2));
}

TEST_CASE("config JSON round trip") {
    const ExperimentConfig cfg = preset("fig3de");
    const std::string text = config_to_json(cfg);
    const ExperimentConfig back = config_from_json(text);
    CHECK(back.experiment_id == cfg.experiment_id);
    CHECK(back.sample_sizes == cfg.sample_sizes);
    CHECK(back.proxy_scales == cfg.proxy_scales);
    CHECK(back.seeds == cfg.seeds);
    CHECK(back.estimators.size() == cfg.estimators.size());
    CHECK(back.estimators[0].cevae.y_head == cevae::YHead::linear);
    CHECK(back.aid.t_sample_count == cfg.aid.t_sample_count);
    CHECK(config_to_json(back) == text);

    CHECK_THROWS_AS(config_from_json("{not json"), Error);
}

TEST_CASE("cell hash is stable and sensitive") {
    const auto h1 = cell_hash({"data", "exp", "proc", "100", "3"});
    const auto h2 = cell_hash({"data", "exp", "proc", "100", "3"});
    CHECK(h1 == h2);
    CHECK(h1 != cell_hash({"data", "exp", "proc", "100", "4"}));
    CHECK(h1 != cell_hash({"train", "exp", "proc", "100", "3"}));
    CHECK(cell_hash({"ab", "c"}) != cell_hash({"a", "bc"}));
}

TEST_CASE("config validation rejects empty axes") {
    ExperimentConfig cfg = tiny_config();
    cfg.sample_sizes.clear();
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = tiny_config();
    cfg.proxy_scales = {-0.5};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = tiny_config();
    cfg.experiment_id.clear();
    CHECK_THROWS_AS(cfg.validate(), Error);
}
