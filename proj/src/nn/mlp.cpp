// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "nn/mlp.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "core/error.hpp"

namespace proxyrestore::nn {

using proxyrestore::Error;
using proxyrestore::ErrorCode;

void MlpSpec::validate() const {
    if (input_dim < 1 || output_heads < 1)
        throw Error(ErrorCode::invalid_parameter, "network needs positive input/output dims");
    if (hidden_layers < 0 || (hidden_layers > 0 && hidden_width < 1))
        throw Error(ErrorCode::invalid_parameter, "bad hidden layer configuration");
    if (activation == Activation::identity && hidden_layers != 0)
        throw Error(ErrorCode::invalid_parameter,
                    "identity activation is only valid for linear networks");
}

ParamSet::ParamSet(const MlpSpec& spec) {
    spec.validate();
    layers_.resize(spec.layer_count());
    for (int l = 0; l < spec.layer_count(); ++l) {
        layers_[l].w.resize(spec.layer_out(l), spec.layer_in(l));
        layers_[l].b.assign(spec.layer_out(l), 0.0);
    }
}

std::size_t ParamSet::flat_size() const {
    std::size_t total = 0;
    for (const Layer& l : layers_) total += l.w.flat().size() + l.b.size();
    return total;
}

void ParamSet::to_flat(std::span<double> out) const {
    if (out.size() != flat_size())
        throw Error(ErrorCode::shape_mismatch, "flat view length mismatch");
    std::size_t pos = 0;
    for (const Layer& l : layers_) {
        std::memcpy(out.data() + pos, l.w.flat().data(), l.w.flat().size() * sizeof(double));
        pos += l.w.flat().size();
        std::memcpy(out.data() + pos, l.b.data(), l.b.size() * sizeof(double));
        pos += l.b.size();
    }
}

void ParamSet::from_flat(std::span<const double> in) {
    if (in.size() != flat_size())
        throw Error(ErrorCode::shape_mismatch, "flat view length mismatch");
    std::size_t pos = 0;
    for (Layer& l : layers_) {
        std::memcpy(l.w.flat().data(), in.data() + pos, l.w.flat().size() * sizeof(double));
        pos += l.w.flat().size();
        std::memcpy(l.b.data(), in.data() + pos, l.b.size() * sizeof(double));
        pos += l.b.size();
    }
    ++stamp_;
}

bool ParamSet::same_shape(const ParamSet& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l)
        if (layers_[l].w.rows() != other.layers_[l].w.rows() ||
            layers_[l].w.cols() != other.layers_[l].w.cols() ||
            layers_[l].b.size() != other.layers_[l].b.size())
            return false;
    return true;
}

void ParamSet::fill(double v) {
    for (Layer& l : layers_) {
        l.w.fill(v);
        std::fill(l.b.begin(), l.b.end(), v);
    }
    ++stamp_;
}

namespace {

// out(n x rows(w)) = in(n x cols(w)) * w^T + b, optionally ELU-activated.
void affine_forward(const Matrix& in, const Matrix& w, const std::vector<double>& b,
                    bool apply_elu, Matrix& out) {
    const std::size_t n = in.rows(), dout = w.rows(), din = w.cols();
    out.resize(n, dout);
    for (std::size_t r = 0; r < n; ++r) {
        const double* x = in.row(r);
        double* o = out.row(r);
        for (std::size_t j = 0; j < dout; ++j) {
            const double* wr = w.row(j);
            double acc = b[j];
            for (std::size_t c = 0; c < din; ++c) acc += wr[c] * x[c];
            o[j] = apply_elu ? elu(acc) : acc;
        }
    }
}

}  // namespace

const Matrix& forward(const MlpSpec& spec, const ParamSet& params, const Matrix& input,
                      Tape& tape) {
    spec.validate();
    if (input.cols() != static_cast<std::size_t>(spec.input_dim))
        throw Error(ErrorCode::shape_mismatch,
                    "layer 0 expects input width " + std::to_string(spec.input_dim) + ", got " +
                        std::to_string(input.cols()));
    const auto& layers = params.layers();
    if (layers.size() != static_cast<std::size_t>(spec.layer_count()))
        throw Error(ErrorCode::shape_mismatch, "parameter set does not match spec depth");
    for (int l = 0; l < spec.layer_count(); ++l)
        if (layers[l].w.rows() != static_cast<std::size_t>(spec.layer_out(l)) ||
            layers[l].w.cols() != static_cast<std::size_t>(spec.layer_in(l)))
            throw Error(ErrorCode::shape_mismatch,
                        "layer " + std::to_string(l) + " weight shape mismatch");

    tape.spec = &spec;
    tape.params = &params;
    tape.stamp = params.stamp();
    tape.input = input;
    tape.activation.resize(spec.layer_count());
    const Matrix* cur = &tape.input;
    for (int l = 0; l < spec.layer_count(); ++l) {
        const bool hidden = l < spec.hidden_layers;
        const bool use_elu = hidden && spec.activation == Activation::elu;
        affine_forward(*cur, layers[l].w, layers[l].b, use_elu, tape.activation[l]);
        cur = &tape.activation[l];
    }
    return tape.activation.back();
}

std::vector<double> forward(const MlpSpec& spec, const ParamSet& params,
                            std::span<const double> input, Tape& tape) {
    Matrix in(1, input.size());
    for (std::size_t c = 0; c < input.size(); ++c) in(0, c) = input[c];
    const Matrix& out = forward(spec, params, in, tape);
    return {out.row(0), out.row(0) + out.cols()};
}

void backward(const Tape& tape, const Matrix& output_grads, ParamSet& grads,
              Matrix* input_grads) {
    if (tape.spec == nullptr || tape.params == nullptr)
        throw Error(ErrorCode::contract_violation, "backward on an empty tape");
    if (tape.stamp != tape.params->stamp())
        throw Error(ErrorCode::contract_violation,
                    "stale tape: parameters changed since the forward pass");
    const MlpSpec& spec = *tape.spec;
    const auto& layers = tape.params->layers();
    if (output_grads.rows() != tape.input.rows() ||
        output_grads.cols() != static_cast<std::size_t>(spec.output_heads))
        throw Error(ErrorCode::shape_mismatch, "output gradient shape mismatch");
    if (!grads.same_shape(*tape.params))
        throw Error(ErrorCode::shape_mismatch, "gradient accumulator shape mismatch");

    const std::size_t n = tape.input.rows();
    Matrix delta = output_grads;  // gradient w.r.t. current layer pre-activation
    Matrix next_delta;

    for (int l = spec.layer_count() - 1; l >= 0; --l) {
        const Matrix& below = l == 0 ? tape.input : tape.activation[l - 1];
        const Matrix& w = layers[l].w;
        Matrix& gw = grads.layers()[l].w;
        std::vector<double>& gb = grads.layers()[l].b;
        const std::size_t dout = w.rows(), din = w.cols();

        // dW += delta^T * below, db += column sums of delta.
        for (std::size_t r = 0; r < n; ++r) {
            const double* d = delta.row(r);
            const double* x = below.row(r);
            for (std::size_t j = 0; j < dout; ++j) {
                const double g = d[j];
                if (g == 0.0) continue;
                double* gwr = gw.row(j);
                for (std::size_t c = 0; c < din; ++c) gwr[c] += g * x[c];
                gb[j] += g;
            }
        }

        const bool need_input_grad = l > 0 || input_grads != nullptr;
        if (!need_input_grad) break;

        // d(below) = delta * W, then through the ELU of the layer below.
        next_delta.resize(n, din);
        next_delta.fill(0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const double* d = delta.row(r);
            double* nd = next_delta.row(r);
            for (std::size_t j = 0; j < dout; ++j) {
                const double g = d[j];
                if (g == 0.0) continue;
                const double* wr = w.row(j);
                for (std::size_t c = 0; c < din; ++c) nd[c] += g * wr[c];
            }
        }
        if (l > 0 && spec.activation == Activation::elu) {
            // Post-activation a = elu(p): d/dp = 1 for p > 0, else a + 1.
            const Matrix& act = tape.activation[l - 1];
            for (std::size_t r = 0; r < n; ++r) {
                const double* a = act.row(r);
                double* nd = next_delta.row(r);
                for (std::size_t c = 0; c < din; ++c)
                    if (a[c] <= 0.0) nd[c] *= a[c] + 1.0;
            }
        }
        if (l == 0) {
            *input_grads = next_delta;
        } else {
            std::swap(delta, next_delta);
        }
    }
}

ParamSet init_params(const MlpSpec& spec, RandomStream stream) {
    ParamSet params(spec);
    for (int l = 0; l < spec.layer_count(); ++l) {
        Matrix& w = params.layers()[l].w;
        const double bound = std::sqrt(6.0 / static_cast<double>(spec.layer_in(l) + spec.layer_out(l)));
        for (double& v : w.flat()) v = bound * (2.0 * stream.next_unit() - 1.0);
    }
    params.bump_stamp();
    return params;
}

}  // namespace proxyrestore::nn
