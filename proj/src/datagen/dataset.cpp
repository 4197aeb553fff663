// Copyright (c) 2026 proxyrestore developers
// SPDX-License-Identifier: Apache-2.0
#include "datagen/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace proxyrestore::datagen {

using proxyrestore::Error;
using proxyrestore::ErrorCode;

numerics::Matrix ObservedData::xxty_columns() const {
    if (x.cols() < 2)
        throw Error(ErrorCode::schema_mismatch, "need at least two proxies for (x1,x2,t,y) table");
    numerics::Matrix cols(n(), 4);
    for (std::size_t r = 0; r < n(); ++r) {
        cols(r, 0) = x(r, 0);
        cols(r, 1) = x(r, 1);
        cols(r, 2) = t[r];
        cols(r, 3) = y[r];
    }
    return cols;
}

Dataset::Dataset(numerics::Matrix x, std::vector<double> t, std::vector<double> y, Schema schema,
                 std::optional<std::vector<double>> z_hidden)
    : x_(std::move(x)), t_(std::move(t)), y_(std::move(y)), z_hidden_(std::move(z_hidden)),
      schema_(schema) {
    const std::size_t n = t_.size();
    if (x_.rows() != n || y_.size() != n || (z_hidden_ && z_hidden_->size() != n))
        throw Error(ErrorCode::shape_mismatch, "dataset columns must share one length");
}

std::span<const double> Dataset::z_hidden() const {
    if (!z_hidden_)
        throw Error(ErrorCode::contract_violation, "dataset carries no hidden confounder column");
    return *z_hidden_;
}

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace

void Dataset::save_csv(const std::string& path, bool include_hidden) const {
    std::ofstream file(path);
    if (!file) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");

    const bool with_z = include_hidden && z_hidden_.has_value();
    std::string line;
    for (std::size_t c = 0; c < proxy_dim(); ++c) {
        line += "x" + std::to_string(c + 1);
        line += ',';
    }
    line += "t,y";
    if (with_z) line += ",z";
    file << line << '\n';

    for (std::size_t r = 0; r < n(); ++r) {
        line.clear();
        for (std::size_t c = 0; c < proxy_dim(); ++c) {
            append_number(line, x_(r, c));
            line += ',';
        }
        append_number(line, t_[r]);
        line += ',';
        append_number(line, y_[r]);
        if (with_z) {
            line += ',';
            append_number(line, (*z_hidden_)[r]);
        }
        file << line << '\n';
    }
    if (!file) throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
}

Dataset Dataset::load_csv(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for reading");

    std::string header;
    if (!std::getline(file, header))
        throw Error(ErrorCode::io_error, "'" + path + "' is empty");

    std::vector<std::string> names;
    {
        std::stringstream ss(header);
        std::string cell;
        while (std::getline(ss, cell, ',')) names.push_back(cell);
    }
    std::size_t k = 0;
    while (k < names.size() && names[k] == "x" + std::to_string(k + 1)) ++k;
    const bool with_z = !names.empty() && names.back() == "z";
    const std::size_t expected = k + 2 + (with_z ? 1 : 0);
    if (k == 0 || names.size() != expected || names[k] != "t" || names[k + 1] != "y")
        throw Error(ErrorCode::io_error, "'" + path + "' header must be x1,...,xk,t,y[,z]");

    std::vector<double> flat;
    std::string line;
    std::size_t rows = 0;
    while (std::getline(file, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            flat.push_back(std::stod(cell));
            ++cols;
        }
        if (cols != expected)
            throw Error(ErrorCode::io_error, "'" + path + "' row " + std::to_string(rows + 1) +
                                                 " has " + std::to_string(cols) + " cells");
        ++rows;
    }

    numerics::Matrix x(rows, k);
    std::vector<double> t(rows), y(rows);
    std::optional<std::vector<double>> z;
    if (with_z) z.emplace(rows);
    bool binary = true;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* cells = flat.data() + r * expected;
        for (std::size_t c = 0; c < k; ++c) {
            x(r, c) = cells[c];
            binary = binary && (cells[c] == 0.0 || cells[c] == 1.0);
        }
        t[r] = cells[k];
        y[r] = cells[k + 1];
        binary = binary && (t[r] == 0.0 || t[r] == 1.0) && (y[r] == 0.0 || y[r] == 1.0);
        if (with_z) (*z)[r] = cells[k + 2];
    }
    const Schema schema = binary && rows > 0
                              ? Schema{VarKind::binary, VarKind::binary, VarKind::binary}
                              : Schema{};
    return Dataset(std::move(x), std::move(t), std::move(y), schema, std::move(z));
}

}  // namespace proxyrestore::datagen
