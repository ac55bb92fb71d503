#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "causal/errors.hpp"

namespace causal {

/// Uniform discretization t_k = k * T / n of [0, T].
class Grid {
public:
    Grid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw std::invalid_argument("Grid: horizon must be a finite positive number");
        }
        if (steps < 1) {
            throw std::invalid_argument("Grid: at least one step is required");
        }
    }

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t size() const noexcept { return steps_ + 1; }
    double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }

    /// Node times are computed as k*T/n so that t_n == T exactly.
    double time(std::size_t k) const noexcept {
        return k == steps_ ? horizon_ : horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
    }

    /// Index of node t, or npos if t is not a node (to 1e-9 of a step).
    std::size_t index_of(double t) const noexcept {
        const double pos = t / dt();
        const double k = std::round(pos);
        if (k < 0.0 || k > static_cast<double>(steps_) || std::abs(pos - k) > 1e-9) {
            return npos;
        }
        return static_cast<std::size_t>(k);
    }

    /// True when every node of `coarse` is a node of this grid.
    bool refines(const Grid& coarse) const noexcept {
        return coarse.horizon_ == horizon_ && steps_ % coarse.steps_ == 0;
    }

    bool operator==(const Grid& other) const noexcept {
        return horizon_ == other.horizon_ && steps_ == other.steps_;
    }

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

private:
    double horizon_;
    std::size_t steps_;
};

/// Real-valued function sampled on the nodes of a Grid.
class Path {
public:
    explicit Path(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

    Path(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw GridMismatch("Path: " + std::to_string(values_.size()) + " values for a grid with " +
                               std::to_string(grid_.size()) + " nodes");
        }
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t k) const noexcept { return values_[k]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }

    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    double time(std::size_t k) const noexcept { return grid_.time(k); }
    double front() const noexcept { return values_.front(); }
    double back() const noexcept { return values_.back(); }

    bool all_finite() const noexcept {
        for (double v : values_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    /// Restriction to a coarser grid whose nodes are a subset of this one.
    Path restrict_to(const Grid& coarse) const {
        if (!grid_.refines(coarse)) {
            throw GridMismatch("Path::restrict_to: target grid is not embedded in the source grid");
        }
        const std::size_t stride = grid_.steps() / coarse.steps();
        Path out(coarse);
        for (std::size_t k = 0; k < coarse.size(); ++k) out[k] = values_[k * stride];
        return out;
    }

    bool operator==(const Path& other) const noexcept {
        return grid_ == other.grid_ && values_ == other.values_;
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const Path& a, const Path& b, const char* where) {
    if (!(a.grid() == b.grid())) {
        throw GridMismatch(std::string(where) + ": paths live on different grids");
    }
}

/// Writes paths sharing one grid as CSV with a leading `t` column.
inline void write_paths_csv(const std::string& file, const std::vector<std::string>& names,
                            const std::vector<const Path*>& columns) {
    if (names.size() != columns.size() || columns.empty()) {
        throw std::invalid_argument("write_paths_csv: one name per column required");
    }
    for (const Path* p : columns) require_same_grid(*columns.front(), *p, "write_paths_csv");

    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open " + file + " for writing");
    out << "t";
    for (const auto& n : names) out << ',' << n;
    out << '\n' << std::setprecision(17);
    const Path& first = *columns.front();
    for (std::size_t k = 0; k < first.size(); ++k) {
        out << first.time(k);
        for (const Path* p : columns) out << ',' << (*p)[k];
        out << '\n';
    }
}

inline void write_path_csv(const std::string& file, const Path& path) {
    write_paths_csv(file, {"value"}, {&path});
}

/// Reads a (t, value) CSV. Times must form a uniform grid starting at 0.
/// Extra columns are ignored; `column` selects which value column to read (1-based after t).
inline Path read_path_csv(const std::string& file, std::size_t column = 1) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::string line;
    std::vector<double> ts;
    std::vector<double> vs;
    bool header_checked = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!header_checked) {
            header_checked = true;
            try {
                (void)std::stod(cells.at(0));
            } catch (const std::invalid_argument&) {
                continue;  // header row
            }
        }
        if (cells.size() <= column) {
            throw std::runtime_error(file + ": row with too few columns");
        }
        ts.push_back(std::stod(cells[0]));
        vs.push_back(std::stod(cells[column]));
    }
    if (ts.size() < 2) throw std::runtime_error(file + ": need at least two rows");
    if (ts.front() != 0.0) throw GridMismatch(file + ": first time must be 0");

    const std::size_t n = ts.size() - 1;
    Grid grid(ts.back(), n);
    for (std::size_t k = 0; k <= n; ++k) {
        if (std::abs(ts[k] - grid.time(k)) > 1e-9 * std::max(1.0, grid.horizon())) {
            throw GridMismatch(file + ": times are not uniformly spaced");
        }
    }
    return Path(grid, std::move(vs));
}

/// Reads the column called `name` from a CSV whose first row is a header
/// and whose first column is t.
inline Path read_path_csv(const std::string& file, const std::string& name) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::string header;
    std::getline(in, header);
    std::stringstream ss(header);
    std::string cell;
    std::size_t index = 0;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        if (cell == name) return read_path_csv(file, index);
        ++index;
    }
    throw std::runtime_error(file + ": no column named '" + name + "'");
}

/// Column names of a CSV header row.
inline std::vector<std::string> read_csv_header(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    std::string header;
    std::getline(in, header);
    std::vector<std::string> names;
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        names.push_back(cell);
    }
    return names;
}

}  // namespace causal
