// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "harness/experiment.hpp"
#include "json.hpp"

namespace proxyrestore::harness {

using proxyrestore::Error;
using proxyrestore::ErrorCode;
using nlohmann::json;

namespace {

json lingauss_to_json(const datagen::ProcessVariant& p) {
    json j{{"kind", "lingauss"},
           {"c1", p.base.c1},
           {"c2", p.base.c2},
           {"c_t", p.base.c_t},
           {"c_yz", p.base.c_yz},
           {"c_yt", p.base.c_yt},
           {"sigma_x1", p.base.sigma_x1},
           {"sigma_x2", p.base.sigma_x2},
           {"sigma_t", p.base.sigma_t},
           {"sigma_y", p.base.sigma_y}};
    if (const auto* rot = std::get_if<datagen::RotatedNoiseVariant>(&p.variant)) {
        j["variant"] = "rotated-noise";
        j["sigma_x3"] = rot->sigma_x3;
        j["yaw"] = rot->yaw;
        j["pitch"] = rot->pitch;
        j["roll"] = rot->roll;
    } else if (const auto* rep = std::get_if<datagen::RepeatedProxyVariant>(&p.variant)) {
        j["variant"] = "repeated-proxy";
        j["copy_noise_sd"] = rep->copy_noise_sd;
        j["exact_copies"] = rep->exact_copies;
    } else {
        j["variant"] = "plain";
    }
    return j;
}

json binary_to_json(const datagen::BinaryParams& p) {
    return json{{"kind", "binary"},
                {"p_z", p.p_z},
                {"p_x1_given_z", p.p_x1_given_z},
                {"p_x2_given_z", p.p_x2_given_z},
                {"p_t_given_z", p.p_t_given_z},
                {"p_y_given_zt", p.p_y_given_zt}};
}

json process_spec_to_json(const ProcessSpec& spec) {
    json j = spec.binary() ? binary_to_json(std::get<datagen::BinaryParams>(spec.params))
                           : lingauss_to_json(std::get<datagen::ProcessVariant>(spec.params));
    j["id"] = spec.id;
    if (spec.ct_defaulted) j["ct_defaulted"] = true;
    return j;
}

ProcessSpec process_spec_from_json(const json& j) {
    if (j.is_string()) return named_process(j.get<std::string>());
    if (j.contains("preset")) return named_process(j.at("preset").get<std::string>());

    ProcessSpec spec;
    spec.id = j.value("id", std::string("process"));
    spec.ct_defaulted = j.value("ct_defaulted", false);
    const std::string kind = j.at("kind").get<std::string>();

    if (kind == "sampled-lingauss" || kind == "sampled-binary") {
        const auto seed = j.at("sample_seed").get<std::uint64_t>();
        numerics::RandomStream stream(seed, cell_hash({"sample-process", kind}));
        if (kind == "sampled-lingauss")
            spec.params = datagen::ProcessVariant{datagen::sample_lingauss_params(stream),
                                                  datagen::PlainVariant{}};
        else
            spec.params = datagen::sample_binary_params(stream);
        if (spec.id == "process") spec.id = kind + "-" + std::to_string(seed);
        return spec;
    }
    if (kind == "binary") {
        datagen::BinaryParams p;
        p.p_z = j.at("p_z").get<double>();
        p.p_x1_given_z = j.at("p_x1_given_z").get<std::array<double, 2>>();
        p.p_x2_given_z = j.at("p_x2_given_z").get<std::array<double, 2>>();
        p.p_t_given_z = j.at("p_t_given_z").get<std::array<double, 2>>();
        p.p_y_given_zt = j.at("p_y_given_zt").get<std::array<double, 4>>();
        spec.params = p;
        return spec;
    }
    if (kind != "lingauss")
        throw Error(ErrorCode::unknown_name, "unknown process kind '" + kind + "'");

    datagen::LinearGaussianParams base;
    base.c1 = j.at("c1").get<double>();
    base.c2 = j.at("c2").get<double>();
    base.c_t = j.at("c_t").get<double>();
    base.c_yz = j.at("c_yz").get<double>();
    base.c_yt = j.at("c_yt").get<double>();
    base.sigma_x1 = j.at("sigma_x1").get<double>();
    base.sigma_x2 = j.at("sigma_x2").get<double>();
    base.sigma_t = j.at("sigma_t").get<double>();
    base.sigma_y = j.at("sigma_y").get<double>();

    datagen::ProcessVariant pv{base, datagen::PlainVariant{}};
    const std::string variant = j.value("variant", std::string("plain"));
    if (variant == "rotated-noise") {
        datagen::RotatedNoiseVariant rot;
        rot.sigma_x3 = j.value("sigma_x3", rot.sigma_x3);
        rot.yaw = j.value("yaw", rot.yaw);
        rot.pitch = j.value("pitch", rot.pitch);
        rot.roll = j.value("roll", rot.roll);
        pv.variant = rot;
    } else if (variant == "repeated-proxy") {
        datagen::RepeatedProxyVariant rep;
        rep.copy_noise_sd = j.value("copy_noise_sd", rep.copy_noise_sd);
        rep.exact_copies = j.value("exact_copies", rep.exact_copies);
        pv.variant = rep;
    } else if (variant != "plain") {
        throw Error(ErrorCode::unknown_name, "unknown process variant '" + variant + "'");
    }
    spec.params = pv;
    return spec;
}

const char* estimator_kind_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::analytic: return "analytic";
        case EstimatorKind::cevae: return "cevae";
        case EstimatorKind::cevae_custom_2d: return "cevae_custom_2d";
        case EstimatorKind::direct_adjust: return "direct_adjust";
        case EstimatorKind::no_adjust: return "no_adjust";
    }
    return "analytic";
}

EstimatorKind estimator_kind_from_name(const std::string& name) {
    if (name == "analytic") return EstimatorKind::analytic;
    if (name == "cevae") return EstimatorKind::cevae;
    if (name == "cevae_custom_2d") return EstimatorKind::cevae_custom_2d;
    if (name == "direct_adjust") return EstimatorKind::direct_adjust;
    if (name == "no_adjust") return EstimatorKind::no_adjust;
    throw Error(ErrorCode::unknown_name, "unknown estimator kind '" + name + "'");
}

json cevae_config_to_json(const cevae::CevaeConfig& c) {
    return json{{"variant", c.variant == cevae::Variant::full         ? "full"
                            : c.variant == cevae::Variant::linear     ? "linear"
                                                                      : "binary-latent"},
                {"latent_dim", c.latent_dim},
                {"y_head", c.y_head == cevae::YHead::linear ? "linear" : "mlp"},
                {"kl_start_weight", c.kl.start_weight},
                {"kl_ramp_epochs", c.kl.ramp_epochs},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"lr_start", c.lr_start},
                {"lr_end", c.lr_end},
                {"hidden_layers", c.hidden_layers},
                {"hidden_width", c.hidden_width},
                {"mc_do_samples", c.mc_do_samples},
                {"sd_floor", c.sd_floor}};
}

cevae::CevaeConfig cevae_config_from_json(const json& j) {
    cevae::CevaeConfig c;
    const std::string variant = j.value("variant", std::string("full"));
    c.variant = variant == "full"     ? cevae::Variant::full
                : variant == "linear" ? cevae::Variant::linear
                : variant == "binary-latent"
                    ? cevae::Variant::binary_latent
                    : throw Error(ErrorCode::unknown_name, "unknown variant '" + variant + "'");
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.y_head = j.value("y_head", std::string("mlp")) == "linear" ? cevae::YHead::linear
                                                                 : cevae::YHead::mlp;
    c.kl.start_weight = j.value("kl_start_weight", c.kl.start_weight);
    c.kl.ramp_epochs = j.value("kl_ramp_epochs", c.kl.ramp_epochs);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr_start = j.value("lr_start", c.lr_start);
    c.lr_end = j.value("lr_end", c.lr_end);
    c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
    c.hidden_width = j.value("hidden_width", c.hidden_width);
    c.mc_do_samples = j.value("mc_do_samples", c.mc_do_samples);
    c.sd_floor = j.value("sd_floor", c.sd_floor);
    return c;
}

}  // namespace

std::string process_to_json(const ProcessSpec& process) {
    return process_spec_to_json(process).dump(2);
}

ProcessSpec process_from_json(const std::string& text) {
    try {
        return process_spec_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io_error, std::string("bad process JSON: ") + e.what());
    }
}

std::string config_to_json(const ExperimentConfig& config) {
    json j;
    j["experiment_id"] = config.experiment_id;
    j["master_seed"] = config.master_seed;
    json processes = json::array();
    for (const ProcessSpec& p : config.processes) processes.push_back(process_spec_to_json(p));
    j["processes"] = processes;
    json estimators = json::array();
    for (const EstimatorSpec& e : config.estimators) {
        json je{{"id", e.id}, {"kind", estimator_kind_name(e.kind)}};
        if (e.kind == EstimatorKind::cevae || e.kind == EstimatorKind::cevae_custom_2d)
            je["cevae"] = cevae_config_to_json(e.cevae);
        if (e.kind == EstimatorKind::direct_adjust) je["ridge"] = e.ridge;
        estimators.push_back(je);
    }
    j["estimators"] = estimators;
    j["sample_sizes"] = config.sample_sizes;
    j["proxy_scales"] = config.proxy_scales;
    j["seeds"] = config.seeds;
    j["aid"] = json{{"t_sample_count", config.aid.t_sample_count},
                    {"y_bounds_multiplier", config.aid.y_bounds_multiplier},
                    {"y_grid_points", config.aid.y_grid_points}};
    j["record_timing"] = config.record_timing;
    if (!config.out.empty()) j["out"] = config.out;
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io_error, std::string("bad config JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.experiment_id = j.at("experiment_id").get<std::string>();
        cfg.master_seed = j.value("master_seed", 0ull);
        if (j.contains("process")) cfg.processes.push_back(process_spec_from_json(j.at("process")));
        if (j.contains("processes"))
            for (const json& p : j.at("processes")) cfg.processes.push_back(process_spec_from_json(p));
        for (const json& je : j.at("estimators")) {
            EstimatorSpec e;
            e.id = je.at("id").get<std::string>();
            e.kind = estimator_kind_from_name(je.at("kind").get<std::string>());
            if (je.contains("cevae")) e.cevae = cevae_config_from_json(je.at("cevae"));
            e.ridge = je.value("ridge", 0.0);
            cfg.estimators.push_back(e);
        }
        cfg.sample_sizes = j.at("sample_sizes").get<std::vector<std::uint64_t>>();
        if (j.contains("proxy_scales"))
            cfg.proxy_scales = j.at("proxy_scales").get<std::vector<double>>();
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (j.contains("aid")) {
            const json& ja = j.at("aid");
            cfg.aid.t_sample_count = ja.value("t_sample_count", cfg.aid.t_sample_count);
            cfg.aid.y_bounds_multiplier =
                ja.value("y_bounds_multiplier", cfg.aid.y_bounds_multiplier);
            cfg.aid.y_grid_points = ja.value("y_grid_points", cfg.aid.y_grid_points);
        }
        cfg.record_timing = j.value("record_timing", true);
        cfg.out = j.value("out", std::string());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io_error, std::string("bad config JSON: ") + e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Result emission
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader =
    "experiment_id,process_id,estimator_id,n,lambda,seed,aid,ate_error,c_yt_hat,do_mean_t0,"
    "do_mean_t1,active_dims,final_elbo,wall_clock_s,error";

std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// The error column is free text (estimator diagnostics contain commas), so
// it is quoted when needed. It is also the last column, which keeps parsing
// simple.
std::string csv_error(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (const char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string csv_unerror(const std::string& cell) {
    if (cell.size() < 2 || cell.front() != '"') return cell;
    std::string out;
    for (std::size_t i = 1; i + 1 < cell.size(); ++i) {
        if (cell[i] == '"' && cell[i + 1] == '"') ++i;
        out += cell[i];
    }
    return out;
}

json row_to_json(const ResultRow& r) {
    json j{{"experiment_id", r.experiment_id},
           {"process_id", r.process_id},
           {"estimator_id", r.estimator_id},
           {"n", r.n},
           {"lambda", r.lambda},
           {"seed", r.seed},
           {"active_dims", r.active_dims},
           {"wall_clock_s", r.wall_clock_s},
           {"error", r.error}};
    auto set = [&j](const char* key, double v) {
        if (std::isnan(v))
            j[key] = nullptr;
        else
            j[key] = v;
    };
    set("aid", r.aid);
    set("ate_error", r.ate_error);
    set("c_yt_hat", r.c_yt_hat);
    set("do_mean_t0", r.do_mean_t0);
    set("do_mean_t1", r.do_mean_t1);
    set("final_elbo", r.final_elbo);
    return j;
}

ResultRow row_from_json(const json& j) {
    ResultRow r;
    r.experiment_id = j.at("experiment_id").get<std::string>();
    r.process_id = j.at("process_id").get<std::string>();
    r.estimator_id = j.at("estimator_id").get<std::string>();
    r.n = j.at("n").get<std::uint64_t>();
    r.lambda = j.at("lambda").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.active_dims = j.at("active_dims").get<int>();
    r.wall_clock_s = j.at("wall_clock_s").get<double>();
    r.error = j.at("error").get<std::string>();
    auto get = [&j](const char* key) {
        return j.at(key).is_null() ? std::nan("") : j.at(key).get<double>();
    };
    r.aid = get("aid");
    r.ate_error = get("ate_error");
    r.c_yt_hat = get("c_yt_hat");
    r.do_mean_t0 = get("do_mean_t0");
    r.do_mean_t1 = get("do_mean_t1");
    r.final_elbo = get("final_elbo");
    return r;
}

}  // namespace

void emit(const std::vector<ResultRow>& rows, const std::string& path, EmitFormat format) {
    if (rows.empty())
        throw Error(ErrorCode::contract_violation, "refusing to emit an empty result table");
    std::ofstream file(path);
    if (!file) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");

    if (format == EmitFormat::json) {
        json out = json::array();
        for (const ResultRow& r : rows) out.push_back(row_to_json(r));
        file << out.dump(2) << '\n';
    } else {
        file << kCsvHeader << '\n';
        for (const ResultRow& r : rows) {
            file << r.experiment_id << ',' << r.process_id << ',' << r.estimator_id << ',' << r.n
                 << ',' << csv_number(r.lambda) << ',' << r.seed << ',' << csv_number(r.aid) << ','
                 << csv_number(r.ate_error) << ',' << csv_number(r.c_yt_hat) << ','
                 << csv_number(r.do_mean_t0) << ',' << csv_number(r.do_mean_t1) << ','
                 << r.active_dims << ',' << csv_number(r.final_elbo) << ','
                 << csv_number(r.wall_clock_s) << ',' << csv_error(r.error) << '\n';
        }
    }
    if (!file) throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
}

std::vector<ResultRow> load_results(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for reading");
    std::stringstream buffer;
    buffer << file.rdbuf();
    const std::string text = buffer.str();

    std::vector<ResultRow> rows;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::io_error, std::string("bad results JSON: ") + e.what());
        }
        for (const json& je : j) rows.push_back(row_from_json(je));
        return rows;
    }

    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line != kCsvHeader)
        throw Error(ErrorCode::io_error, "unexpected results CSV header");
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        // Fourteen plain fields, then the (possibly quoted) error text.
        std::vector<std::string> cells;
        std::size_t pos = 0;
        for (int field = 0; field < 14 && pos <= line.size(); ++field) {
            const std::size_t next = line.find(',', pos);
            if (next == std::string::npos)
                throw Error(ErrorCode::io_error, "short results CSV row");
            cells.push_back(line.substr(pos, next - pos));
            pos = next + 1;
        }
        cells.push_back(csv_unerror(line.substr(pos)));
        ResultRow r;
        r.experiment_id = cells[0];
        r.process_id = cells[1];
        r.estimator_id = cells[2];
        r.n = std::stoull(cells[3]);
        auto num = [](const std::string& s) { return s.empty() ? std::nan("") : std::stod(s); };
        r.lambda = num(cells[4]);
        r.seed = std::stoull(cells[5]);
        r.aid = num(cells[6]);
        r.ate_error = num(cells[7]);
        r.c_yt_hat = num(cells[8]);
        r.do_mean_t0 = num(cells[9]);
        r.do_mean_t1 = num(cells[10]);
        r.active_dims = std::stoi(cells[11]);
        r.final_elbo = num(cells[12]);
        r.wall_clock_s = cells[13].empty() ? 0.0 : std::stod(cells[13]);
        r.error = cells[14];
        rows.push_back(r);
    }
    return rows;
}

}  // namespace proxyrestore::harness
