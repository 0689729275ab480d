/*
   Copyright 2026 The nlvr Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "nlvr/detect.hpp"
#include "nlvr/nonlocal.hpp"
#include "nlvr/parallel.hpp"
#include "nlvr/stats.hpp"

// Batch analysis over many stocks/samples and many window pairs.
//
// The scan is unit-major: each unit's window-average columns are computed
// once and shared across all grid cells, and cross-sectional accumulation
// runs in fixed unit order, so results are independent of the parallelism
// degree. Per-cell arithmetic is identical to lag_curve's.

namespace nlvr {

/// (T1, T2) scan ranges. Defaults: T1 in 1..44 step 1, T2 in 45..250 step 5.
struct GridSpec {
    int t1_lo = 1, t1_hi = 44, t1_step = 1;
    int t2_lo = 45, t2_hi = 250, t2_step = 5;

    void validate() const {
        if (t1_lo < 1 || t1_hi < t1_lo || t1_step < 1 || t2_lo < 1 || t2_hi < t2_lo ||
            t2_step < 1)
            throw std::invalid_argument("invalid grid spec");
    }
};

/// Expands the grid in row-major (T1, T2) order. For the RMS-window
/// estimator T1 starts at m, since shorter windows are undefined.
inline std::vector<WindowPair> make_grid(const GridSpec& gs, const VolatilitySpec& spec) {
    gs.validate();
    const int t1_min = spec.kind == VolKind::RmsWindow ? std::max(gs.t1_lo, spec.m) : gs.t1_lo;
    std::vector<WindowPair> grid;
    for (int t1 = t1_min; t1 <= gs.t1_hi; t1 += gs.t1_step)
        for (int t2 = gs.t2_lo; t2 <= gs.t2_hi; t2 += gs.t2_step)
            if (t1 < t2) grid.push_back({t1, t2});
    if (grid.empty()) throw std::invalid_argument("grid spec yields no window pairs");
    return grid;
}

struct ScanOptions {
    int t_max = 150;
    int tau = kDefaultTau;
    int keep_lag_lo = 1;   // per-unit values kept for significance testing
    int keep_lag_hi = 10;
    int jobs = 0;

    void validate() const {
        if (t_max < 1) throw std::invalid_argument("scan: t_max must be >= 1");
        if (keep_lag_lo < 1 || keep_lag_hi < keep_lag_lo || keep_lag_hi > t_max)
            throw std::invalid_argument("scan: bad kept lag span");
    }
};

struct GridScan {
    std::vector<WindowPair> grid;
    std::vector<std::vector<double>> mean_curves;        // [cell][lag-1]
    std::vector<std::vector<std::vector<double>>> kept;  // [cell][lag-keep_lo][unit]
    Landscape landscape;
    int keep_lag_lo = 1;
};

/// Scans every grid cell over all units: cross-sectional mean curves,
/// per-unit values on the kept lag span, and the two-pass landscape.
inline GridScan grid_scan(const std::vector<ReturnSeries>& units, const VolatilitySpec& spec,
                          Observable obs, const std::vector<WindowPair>& grid,
                          const ScanOptions& opt) {
    opt.validate();
    if (units.empty()) throw std::invalid_argument("grid_scan: no input series");
    if (obs == Observable::LocalF)
        throw std::invalid_argument("grid_scan: the local baseline has no window pair");
    const VolatilitySpec rspec = resolve_spec(obs, spec);
    const std::size_t n_cells = grid.size();
    const std::size_t n_units = units.size();
    const std::size_t span =
        static_cast<std::size_t>(opt.keep_lag_hi - opt.keep_lag_lo + 1);

    GridScan scan;
    scan.grid = grid;
    scan.keep_lag_lo = opt.keep_lag_lo;
    scan.mean_curves.assign(n_cells, std::vector<double>(static_cast<std::size_t>(opt.t_max), 0.0));
    scan.kept.assign(n_cells,
                     std::vector<std::vector<double>>(span, std::vector<double>(n_units, 0.0)));

    // Distinct window lengths, shared by all cells of a unit.
    std::vector<int> lengths;
    for (const auto& pair : grid) {
        pair.validate();
        if (rspec.kind == VolKind::RmsWindow && pair.t1 < rspec.m)
            throw std::invalid_argument("grid_scan: T1 below volatility window m");
        lengths.push_back(pair.t1);
        lengths.push_back(pair.t2);
    }
    std::sort(lengths.begin(), lengths.end());
    lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());
    std::map<int, std::size_t> column_index;
    for (std::size_t i = 0; i < lengths.size(); ++i) column_index[lengths[i]] = i;

    std::vector<std::vector<double>> cell_values(n_cells);
    for (std::size_t u = 0; u < n_units; ++u) {
        const ReturnSeries& unit = units[u];
        const detail::VolBasis basis = detail::make_basis(unit, rspec);
        std::vector<std::vector<double>> columns(lengths.size());
        parallel_for(lengths.size(), opt.jobs, [&](std::size_t i) {
            columns[i] = detail::window_avg_column(basis, lengths[i]);
        });
        const detail::SignBits r_bits = detail::sign_bits(unit.values);

        parallel_for(n_cells, opt.jobs, [&](std::size_t ci) {
            const WindowPair& pair = grid[ci];
            const std::vector<double>& short_col = columns[column_index.at(pair.t1)];
            const std::vector<double>& long_col = columns[column_index.at(pair.t2)];
            const int n = static_cast<int>(unit.n());
            std::vector<double> dv(static_cast<std::size_t>(n),
                                   std::numeric_limits<double>::quiet_NaN());
            for (int i = pair.t2 - 1; i < n; ++i)
                dv[static_cast<std::size_t>(i)] =
                    short_col[static_cast<std::size_t>(i)] - long_col[static_cast<std::size_t>(i)];
            LagCurve curve;
            curve.observable = obs;
            curve.pair = pair;
            curve.spec = rspec;
            detail::fill_lag_curve(curve, dv, pair.t2, unit, opt.t_max, &r_bits);
            cell_values[ci] = std::move(curve.values);
        });

        for (std::size_t ci = 0; ci < n_cells; ++ci) {
            const auto& vals = cell_values[ci];
            auto& acc = scan.mean_curves[ci];
            for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += vals[t];
            for (std::size_t s = 0; s < span; ++s)
                scan.kept[ci][s][u] = vals[static_cast<std::size_t>(opt.keep_lag_lo) - 1 + s];
        }
    }

    for (auto& curve : scan.mean_curves)
        for (double& v : curve) v /= static_cast<double>(n_units);

    std::vector<std::pair<WindowPair, LagCurve>> mean_cells;
    mean_cells.reserve(n_cells);
    for (std::size_t ci = 0; ci < n_cells; ++ci) {
        LagCurve c;
        c.observable = obs;
        c.pair = grid[ci];
        c.spec = rspec;
        c.values = scan.mean_curves[ci];
        mean_cells.emplace_back(grid[ci], std::move(c));
    }
    scan.landscape = landscape_scan(mean_cells, opt.tau);
    return scan;
}

/// Single-pair analysis: per-unit curves, cross-sectional mean, and per-lag
/// t-tests (with two or more units).
struct PairAnalysis {
    std::vector<LagCurve> unit_curves;
    CrossSection cross_section;
    std::vector<TTestResult> t_tests;  // empty for a single unit
};

inline PairAnalysis analyze_pair(const std::vector<ReturnSeries>& units,
                                 const VolatilitySpec& spec, const WindowPair& pair,
                                 Observable obs, int t_max, int jobs = 0) {
    if (units.empty()) throw std::invalid_argument("analyze_pair: no input series");
    PairAnalysis pa;
    pa.unit_curves.resize(units.size());
    parallel_for(units.size(), jobs, [&](std::size_t u) {
        pa.unit_curves[u] = lag_curve(units[u], spec, pair, obs, t_max);
    });
    pa.cross_section = cross_sectional_average(pa.unit_curves);
    if (units.size() >= 2) {
        std::vector<std::vector<double>> vals;
        vals.reserve(units.size());
        for (const auto& c : pa.unit_curves) vals.push_back(c.values);
        pa.t_tests = t_tests_per_lag(vals);
    }
    return pa;
}

}  // namespace nlvr
