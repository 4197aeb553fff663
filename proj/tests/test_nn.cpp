// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "core/error.hpp"
#include "doctest.h"
#include "nn/adam.hpp"
#include "nn/mlp.hpp"

using namespace proxyrestore;
using namespace proxyrestore::nn;
using numerics::RandomStream;

namespace {

// Scalar objective of a network under a fixed output-grad contraction, for
// finite differencing: f(params) = sum_ij g(i,j) * out(i,j).
double contracted_output(const MlpSpec& spec, const ParamSet& params, const Matrix& input,
                         const Matrix& output_grads) {
    Tape tape;
    const Matrix& out = forward(spec, params, input, tape);
    double total = 0.0;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) total += output_grads(r, c) * out(r, c);
    return total;
}

}  // namespace

TEST_CASE("forward basics") {
    MlpSpec spec{3, 2, 1, 4, Activation::elu};
    ParamSet zero(spec);
    Tape tape;
    const auto out = forward(spec, zero, std::vector<double>{1.0, -2.0, 0.5}, tape);
    CHECK(out.size() == 2);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.0);

    // Wrong input width names the layer.
    Matrix bad(1, 2);
    ParamSet params(spec);
    CHECK_THROWS_WITH_AS(forward(spec, params, bad, tape), doctest::Contains("layer 0"), Error);
}

TEST_CASE("elu values pass through a 1-1 network") {
    CHECK(elu(0.0) == 0.0);
    CHECK(elu(1.0) == 1.0);
    CHECK(elu(-1.0) == doctest::Approx(std::exp(-1.0) - 1.0));

    MlpSpec spec{1, 1, 1, 1, Activation::elu};
    ParamSet params(spec);
    params.layers()[0].w(0, 0) = 1.0;
    params.layers()[1].w(0, 0) = 1.0;
    Tape tape;
    for (const double v : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
        const auto out = forward(spec, params, std::vector<double>{v}, tape);
        CHECK(out[0] == doctest::Approx(elu(v)));
    }
}

TEST_CASE("backward matches central finite differences") {
    MlpSpec spec{4, 3, 2, 7, Activation::elu};
    ParamSet params = init_params(spec, RandomStream(1, 0));
    RandomStream data_stream(2, 0);
    Matrix input(5, 4);
    // Inputs straddle zero so the ELU kink region is exercised.
    for (auto& v : input.flat()) v = 2.0 * data_stream.next_gaussian();
    Matrix output_grads(5, 3);
    for (auto& v : output_grads.flat()) v = data_stream.next_gaussian();

    Tape tape;
    forward(spec, params, input, tape);
    ParamSet grads(spec);
    Matrix input_grads;
    backward(tape, output_grads, grads, &input_grads);

    std::vector<double> flat(params.flat_size()), gflat(params.flat_size());
    params.to_flat(flat);
    grads.to_flat(gflat);

    RandomStream pick(3, 0);
    const double h = 1e-5;
    for (int probe = 0; probe < 50; ++probe) {
        const std::size_t idx =
            static_cast<std::size_t>(pick.next_unit() * static_cast<double>(flat.size()));
        std::vector<double> bumped = flat;
        bumped[idx] = flat[idx] + h;
        ParamSet plus(spec);
        plus.from_flat(bumped);
        bumped[idx] = flat[idx] - h;
        ParamSet minus(spec);
        minus.from_flat(bumped);
        const double fd = (contracted_output(spec, plus, input, output_grads) -
                           contracted_output(spec, minus, input, output_grads)) /
                          (2.0 * h);
        const double scale = std::max({std::fabs(fd), std::fabs(gflat[idx]), 1e-8});
        CHECK(std::fabs(fd - gflat[idx]) / scale < 1e-4);
    }

    // Input gradients, same scheme.
    for (int probe = 0; probe < 10; ++probe) {
        const std::size_t r = static_cast<std::size_t>(pick.next_unit() * 5.0);
        const std::size_t c = static_cast<std::size_t>(pick.next_unit() * 4.0);
        Matrix plus = input, minus = input;
        plus(r, c) += h;
        minus(r, c) -= h;
        const double fd = (contracted_output(spec, params, plus, output_grads) -
                           contracted_output(spec, params, minus, output_grads)) /
                          (2.0 * h);
        const double scale = std::max({std::fabs(fd), std::fabs(input_grads(r, c)), 1e-8});
        CHECK(std::fabs(fd - input_grads(r, c)) / scale < 1e-4);
    }
}

TEST_CASE("zero output gradients give zero parameter gradients") {
    MlpSpec spec{2, 2, 1, 3, Activation::elu};
    ParamSet params = init_params(spec, RandomStream(4, 0));
    Matrix input(3, 2);
    input.fill(0.7);
    Tape tape;
    forward(spec, params, input, tape);
    ParamSet grads(spec);
    Matrix zeros(3, 2);
    backward(tape, zeros, grads);
    std::vector<double> gflat(grads.flat_size());
    grads.to_flat(gflat);
    for (const double g : gflat) CHECK(g == 0.0);
}

TEST_CASE("linear network gradients are exact outer products") {
    MlpSpec spec{3, 2, 0, 1, Activation::identity};
    ParamSet params = init_params(spec, RandomStream(5, 0));
    Matrix input(1, 3);
    input(0, 0) = 0.5;
    input(0, 1) = -1.5;
    input(0, 2) = 2.0;
    Matrix output_grads(1, 2);
    output_grads(0, 0) = 2.0;
    output_grads(0, 1) = -3.0;

    Tape tape;
    forward(spec, params, input, tape);
    ParamSet grads(spec);
    backward(tape, output_grads, grads);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j)
            CHECK(grads.layers()[0].w(i, j) == output_grads(0, i) * input(0, j));
        CHECK(grads.layers()[0].b[i] == output_grads(0, i));
    }
}

TEST_CASE("stale tapes are rejected") {
    MlpSpec spec{2, 1, 0, 1, Activation::identity};
    ParamSet params = init_params(spec, RandomStream(6, 0));
    Matrix input(1, 2);
    Tape tape;
    forward(spec, params, input, tape);
    std::vector<double> flat(params.flat_size());
    params.to_flat(flat);
    params.from_flat(flat);  // revision bump, same values
    ParamSet grads(spec);
    Matrix og(1, 1);
    try {
        backward(tape, og, grads);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::contract_violation);
    }
}

TEST_CASE("adam reference oracle") {
    // Ten-line scalar Adam, kept independent of the implementation.
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, lr = 0.01;
    double ref = 0.3, m = 0.0, v = 0.0;
    const double grads[] = {1.0, -0.5, 2.0, 0.25, -1.25};
    AdamState state(1, ExpSchedule{lr, lr, 0});
    std::vector<double> param{0.3};
    for (int step = 0; step < 5; ++step) {
        const double g = grads[step];
        m = beta1 * m + (1 - beta1) * g;
        v = beta2 * v + (1 - beta2) * g * g;
        const double mhat = m / (1 - std::pow(beta1, step + 1));
        const double vhat = v / (1 - std::pow(beta2, step + 1));
        ref -= lr * mhat / (std::sqrt(vhat) + eps);

        const double gs[] = {g};
        adam_step(state, param, gs);
        CHECK(param[0] == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK(state.step == 5);
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
    AdamState state(3, ExpSchedule{0.01, 0.001, 100});
    std::vector<double> params{1.0, -2.0, 0.5};
    const std::vector<double> zero(3, 0.0);
    adam_step(state, params, zero);
    CHECK(params[0] == 1.0);
    CHECK(params[1] == -2.0);
    CHECK(params[2] == 0.5);
    CHECK(state.step == 1);
}

TEST_CASE("learning-rate schedule endpoints") {
    ExpSchedule s{0.01, 0.001, 3000};
    CHECK(s.lr_at(0) == doctest::Approx(0.01));
    CHECK(s.lr_at(3000) == doctest::Approx(0.001));
    CHECK(s.lr_at(1500) == doctest::Approx(std::sqrt(0.01 * 0.001)));
    for (long step = 1; step <= 3000; step += 37) CHECK(s.lr_at(step) < s.lr_at(step - 1));
}

TEST_CASE("non-finite gradients abort with the step index") {
    AdamState state(2, ExpSchedule{0.01, 0.01, 0});
    std::vector<double> params{0.0, 0.0};
    const std::vector<double> bad{1.0, std::nan("")};
    try {
        adam_step(state, params, bad);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_finite);
        CHECK(doctest::String(e.what()) == doctest::Contains("step 0"));
    }
}

TEST_CASE("initialization: zero biases, deterministic, fan-scaled variance") {
    MlpSpec spec{30, 30, 3, 30, Activation::elu};
    const ParamSet a = init_params(spec, RandomStream(9, 9));
    const ParamSet b = init_params(spec, RandomStream(9, 9));
    std::vector<double> fa(a.flat_size()), fb(b.flat_size());
    a.to_flat(fa);
    b.to_flat(fb);
    CHECK(fa == fb);
    for (const auto& layer : a.layers())
        for (const double bias : layer.b) CHECK(bias == 0.0);

    // Middle 30x30 layer: empirical variance within 10% of 2/(fan_in+fan_out).
    const auto& w = a.layers()[1].w;
    double mean = 0.0, var = 0.0;
    for (const double v : w.flat()) mean += v;
    mean /= 900.0;
    for (const double v : w.flat()) var += (v - mean) * (v - mean);
    var /= 899.0;
    const double target = 2.0 / 60.0;
    CHECK(std::fabs(var - target) <= 0.1 * target);
}

TEST_CASE("flat view round trip is bit-identical") {
    MlpSpec spec{5, 4, 2, 6, Activation::elu};
    const ParamSet params = init_params(spec, RandomStream(10, 0));
    std::vector<double> flat(params.flat_size());
    params.to_flat(flat);
    ParamSet copy(spec);
    copy.from_flat(flat);
    std::vector<double> flat2(copy.flat_size());
    copy.to_flat(flat2);
    CHECK(flat == flat2);
    CHECK(params.flat_size() == 5 * 6 + 6 + 6 * 6 + 6 + 6 * 4 + 4);
}
