// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "numerics/matrix.hpp"

namespace proxyrestore::datagen {

enum class VarKind { continuous, binary };

struct Schema {
    VarKind proxies = VarKind::continuous;
    VarKind treatment = VarKind::continuous;
    VarKind outcome = VarKind::continuous;

    bool all_binary() const {
        return proxies == VarKind::binary && treatment == VarKind::binary &&
               outcome == VarKind::binary;
    }
    bool operator==(const Schema&) const = default;
};

class Dataset;

// The estimator-facing view of a dataset: proxies, treatment and outcome
// only. The hidden confounder cannot be reached through this type, which is
// what keeps oracle information out of the estimation path.
struct ObservedData {
    const numerics::Matrix& x;
    std::span<const double> t;
    std::span<const double> y;
    Schema schema;

    std::size_t n() const { return t.size(); }
    std::size_t proxy_dim() const { return x.cols(); }

    // n x 4 column table (x1, x2, t, y) for the two-proxy estimators.
    numerics::Matrix xxty_columns() const;
};

class Dataset {
  public:
    Dataset() = default;
    Dataset(numerics::Matrix x, std::vector<double> t, std::vector<double> y, Schema schema,
            std::optional<std::vector<double>> z_hidden = std::nullopt);

    std::size_t n() const { return t_.size(); }
    std::size_t proxy_dim() const { return x_.cols(); }
    const numerics::Matrix& x() const { return x_; }
    std::span<const double> t() const { return t_; }
    std::span<const double> y() const { return y_; }
    const Schema& schema() const { return schema_; }

    bool has_hidden() const { return z_hidden_.has_value(); }
    // Oracle-only accessor; estimators never see this column because they
    // take ObservedData.
    std::span<const double> z_hidden() const;

    // Projection that strips the hidden confounder.
    ObservedData observed() const { return ObservedData{x_, t_, y_, schema_}; }

    // CSV with header x1,...,xk,t,y[,z]; z emitted only when present and
    // include_hidden is set.
    void save_csv(const std::string& path, bool include_hidden = false) const;
    static Dataset load_csv(const std::string& path);

  private:
    numerics::Matrix x_;
    std::vector<double> t_, y_;
    std::optional<std::vector<double>> z_hidden_;
    Schema schema_;
};

}  // namespace proxyrestore::datagen
