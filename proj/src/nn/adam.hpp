// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace proxyrestore::nn {

// lr(step) = start * (end/start)^(step/total_steps); lr(0) = start and
// lr(total_steps) = end exactly.
struct ExpSchedule {
    double start = 1e-3;
    double end = 1e-3;
    long total_steps = 0;

    double lr_at(long step) const;
};

// Bias-corrected Adam over a flat parameter vector (gradient descent).
struct AdamState {
    long step = 0;
    std::vector<double> m, v;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    ExpSchedule lr;

    explicit AdamState(std::size_t length, ExpSchedule schedule)
        : m(length, 0.0), v(length, 0.0), lr(schedule) {}
};

// One update of params -= lr * m_hat / (sqrt(v_hat) + eps). Throws
// non_finite (with the step index) if any gradient entry is not finite.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

}  // namespace proxyrestore::nn
