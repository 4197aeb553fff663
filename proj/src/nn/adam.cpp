// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "nn/adam.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace proxyrestore::nn {

using proxyrestore::Error;
using proxyrestore::ErrorCode;

double ExpSchedule::lr_at(long step) const {
    if (total_steps <= 0) return start;
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return start * std::pow(end / start, frac);
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
    if (params.size() != state.m.size() || grads.size() != state.m.size())
        throw Error(ErrorCode::shape_mismatch, "adam state not aligned with parameter vector");

    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            throw Error(ErrorCode::non_finite,
                        "non-finite gradient at flat index " + std::to_string(i) + ", step " +
                            std::to_string(state.step));

    const double lr = state.lr.lr_at(state.step);
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        params[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + state.epsilon);
    }
}

}  // namespace proxyrestore::nn
