// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "numerics/matrix.hpp"
#include "numerics/random.hpp"

namespace proxyrestore::nn {

using numerics::Matrix;
using numerics::RandomStream;

enum class Activation { elu, identity };

// Architecture of a dense network: hidden_layers affine+ELU blocks followed
// by a linear layer with output_heads scalar outputs. identity activation is
// reserved for purely linear (0-hidden-layer) networks.
struct MlpSpec {
    int input_dim = 1;
    int output_heads = 1;
    int hidden_layers = 0;
    int hidden_width = 1;
    Activation activation = Activation::elu;

    void validate() const;
    int layer_count() const { return hidden_layers + 1; }
    int layer_in(int layer) const { return layer == 0 ? input_dim : hidden_width; }
    int layer_out(int layer) const { return layer == hidden_layers ? output_heads : hidden_width; }

    bool operator==(const MlpSpec&) const = default;
};

// Per-layer weights (out x in) and biases, plus a flat view whose layout is
// layer-major: W0 row-major, b0, W1, b1, ... Flat round-trips are
// bit-identical; optimizer state aligns to this layout.
class ParamSet {
  public:
    struct Layer {
        Matrix w;
        std::vector<double> b;
    };

    ParamSet() = default;
    explicit ParamSet(const MlpSpec& spec);  // zero-initialized

    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    std::size_t flat_size() const;
    void to_flat(std::span<double> out) const;
    void from_flat(std::span<const double> in);  // bumps the revision stamp

    bool same_shape(const ParamSet& other) const;
    void fill(double v);

    // Incremented by every mutation; lets a tape detect staleness.
    std::uint64_t stamp() const { return stamp_; }
    void bump_stamp() { ++stamp_; }

  private:
    std::vector<Layer> layers_;
    std::uint64_t stamp_ = 0;
};

// Evaluation trace of one batched forward pass: the input batch plus every
// post-activation, enough to run the exact reverse sweep.
struct Tape {
    const MlpSpec* spec = nullptr;
    const ParamSet* params = nullptr;
    std::uint64_t stamp = 0;
    Matrix input;                   // n x input_dim
    std::vector<Matrix> activation;  // per layer, n x layer_out

    const Matrix& outputs() const { return activation.back(); }
};

inline double elu(double v) { return v > 0.0 ? v : std::expm1(v); }

// Batched forward pass; rows of `input` are independent observations.
// Returns the outputs (also kept in tape.activation.back()).
const Matrix& forward(const MlpSpec& spec, const ParamSet& params, const Matrix& input,
                      Tape& tape);

// Single-observation convenience wrapper.
std::vector<double> forward(const MlpSpec& spec, const ParamSet& params,
                            std::span<const double> input, Tape& tape);

// Reverse sweep for sum_ij output_grads(i,j) * outputs(i,j). Accumulates
// into grads (caller clears when accumulation is not wanted); when
// input_grads is non-null it receives d/d(input), overwriting.
// Throws on a tape whose parameters changed since the forward pass.
void backward(const Tape& tape, const Matrix& output_grads, ParamSet& grads,
              Matrix* input_grads = nullptr);

// Fan-balanced uniform initialization on +-sqrt(6/(fan_in+fan_out)), zero
// biases; deterministic in the stream.
ParamSet init_params(const MlpSpec& spec, RandomStream stream);

}  // namespace proxyrestore::nn
