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

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlvr/nonlocal.hpp"

// Non-zero-curve detection.
//
// A lag curve is declared non-zero by a four-step procedure: (1) smooth
// with a 3-point moving window; (2) split at the first sign change t1 into
// a first part (lags 1..t1-1) and a second part of fixed length tau; (3)
// compute the mean absolute values AP1/AP2 of the two parts; (4) accept if
// the curve stays beyond AP2 for an initial run t0 > 10 lags and the second
// part never reaches AP1. The signed amplitude AP0 is the mean over the
// initial run, or 0 on rejection. A scan over (T1,T2) additionally keeps
// only cells with |AP0| above the grid mean |AP0-bar|.

namespace nlvr {

constexpr int kDefaultTau = 44;       // trading days in two months
constexpr int kMinInitialRun = 10;    // condition (i): t0 must exceed this

struct DetectionResult {
    int t1 = 0;        // first sign-change lag of the smoothed curve
    double ap1 = 0.0;  // mean |curve| over the first part
    double ap2 = 0.0;  // mean |curve| over the second part
    int t0 = 0;        // length of the initial run exceeding ap2
    double ap0 = 0.0;  // signed amplitude; 0 unless both conditions hold
    bool passed_i = false;
    bool passed_ii = false;
};

/// Centered 3-point moving average; the window shrinks to 2 points at the
/// boundaries so lag alignment is preserved.
inline std::vector<double> smooth3(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 3) throw std::invalid_argument("smooth3: need at least 3 points");
    std::vector<double> out(n);
    out[0] = (v[0] + v[1]) / 2.0;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (v[i - 1] + v[i] + v[i + 1]) / 3.0;
    out[n - 1] = (v[n - 2] + v[n - 1]) / 2.0;
    return out;
}

inline LagCurve smooth3(const LagCurve& curve) {
    LagCurve out = curve;
    out.values = smooth3(curve.values);
    return out;
}

namespace detail {
inline int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }
}

/// Steps (2)-(4) on an already-smoothed curve. The reference orientation is
/// the sign of the first lag, so negatively-correlated markets classify
/// symmetrically. When no sign change occurs early enough, t1 falls back to
/// len - tau + 1 so a full second part always exists.
inline DetectionResult classify(const std::vector<double>& smoothed, int tau = kDefaultTau) {
    const int len = static_cast<int>(smoothed.size());
    if (tau < 1) throw std::invalid_argument("classify: tau must be >= 1");
    if (len < tau + 1)
        throw std::invalid_argument("classify: curve shorter than tau + 1 = " +
                                    std::to_string(tau + 1));
    DetectionResult res;
    const int s = detail::sign_of(smoothed[0]);

    const int t1_max = len - tau + 1;
    res.t1 = t1_max;
    for (int t = 2; t <= t1_max; ++t) {
        if (detail::sign_of(smoothed[t - 1]) != s) {
            res.t1 = t;
            break;
        }
    }

    double sum_abs1 = 0.0;
    for (int t = 1; t < res.t1; ++t) sum_abs1 += std::fabs(smoothed[t - 1]);
    res.ap1 = sum_abs1 / static_cast<double>(res.t1 - 1);

    double sum_abs2 = 0.0;
    for (int t = res.t1; t <= res.t1 - 1 + tau; ++t) sum_abs2 += std::fabs(smoothed[t - 1]);
    res.ap2 = sum_abs2 / static_cast<double>(tau);

    res.t0 = 0;
    while (res.t0 < len && s * smoothed[res.t0] > res.ap2) ++res.t0;

    res.passed_i = res.t0 > kMinInitialRun;
    res.passed_ii = true;
    for (int t = res.t1; t <= res.t1 - 1 + tau; ++t) {
        if (!(std::fabs(smoothed[t - 1]) < res.ap1)) {
            res.passed_ii = false;
            break;
        }
    }

    if (res.passed_i && res.passed_ii) {
        double sum = 0.0;
        for (int t = 1; t <= res.t0; ++t) sum += smoothed[t - 1];
        res.ap0 = sum / static_cast<double>(res.t0);
    }
    return res;
}

inline DetectionResult classify(const LagCurve& smoothed, int tau = kDefaultTau) {
    return classify(smoothed.values, tau);
}

struct LandscapeCell {
    WindowPair pair;
    double ap0 = 0.0;
};

/// AP0 (or AF0) over the (T1,T2) grid after both passes.
struct Landscape {
    Observable observable = Observable::DeltaP;
    std::vector<LandscapeCell> cells;
    double ap0_bar = 0.0;  // signed mean of pass-one nonzero amplitudes

    int nonzero_count() const {
        int c = 0;
        for (const auto& cell : cells) c += cell.ap0 != 0.0;
        return c;
    }
};

/// Pass two of the landscape criteria: ap0_bar is the signed mean of the
/// nonzero amplitudes, and only cells with |ap0| strictly above |ap0_bar|
/// survive. A lone nonzero cell therefore never survives.
inline double apply_amplitude_filter(std::vector<LandscapeCell>& cells) {
    double sum = 0.0;
    long count = 0;
    for (const auto& cell : cells)
        if (cell.ap0 != 0.0) {
            sum += cell.ap0;
            ++count;
        }
    const double ap0_bar = count > 0 ? sum / static_cast<double>(count) : 0.0;
    for (auto& cell : cells)
        if (!(std::fabs(cell.ap0) > std::fabs(ap0_bar))) cell.ap0 = 0.0;
    return ap0_bar;
}

/// Runs the four-step criteria on every cell (pass one), then the amplitude
/// filter (pass two). Input curves are raw; smoothing is step (1).
inline Landscape landscape_scan(const std::vector<std::pair<WindowPair, LagCurve>>& curves,
                                int tau = kDefaultTau) {
    Landscape ls;
    if (!curves.empty()) ls.observable = curves.front().second.observable;
    ls.cells.reserve(curves.size());
    for (const auto& [pair, curve] : curves) {
        const DetectionResult det = classify(smooth3(curve.values), tau);
        ls.cells.push_back({pair, det.ap0});
    }
    ls.ap0_bar = apply_amplitude_filter(ls.cells);
    return ls;
}

/// Per-lag mean and standard error across stocks or samples. The standard
/// errors are empty when fewer than two curves are given.
struct CrossSection {
    std::vector<double> mean;
    std::vector<double> se;
    std::size_t n_units = 0;
};

inline CrossSection cross_sectional_average(const std::vector<std::vector<double>>& curves) {
    if (curves.empty()) throw std::invalid_argument("cross_sectional_average: no curves");
    const std::size_t len = curves.front().size();
    for (const auto& c : curves)
        if (c.size() != len)
            throw std::invalid_argument("cross_sectional_average: mismatched lag ranges");
    CrossSection cs;
    cs.n_units = curves.size();
    cs.mean.assign(len, 0.0);
    for (const auto& c : curves)
        for (std::size_t i = 0; i < len; ++i) cs.mean[i] += c[i];
    for (std::size_t i = 0; i < len; ++i) cs.mean[i] /= static_cast<double>(cs.n_units);
    if (cs.n_units >= 2) {
        cs.se.assign(len, 0.0);
        for (const auto& c : curves)
            for (std::size_t i = 0; i < len; ++i) {
                const double d = c[i] - cs.mean[i];
                cs.se[i] += d * d;
            }
        const double denom = static_cast<double>(cs.n_units - 1);
        for (std::size_t i = 0; i < len; ++i)
            cs.se[i] = std::sqrt(cs.se[i] / denom / static_cast<double>(cs.n_units));
    }
    return cs;
}

inline CrossSection cross_sectional_average(const std::vector<LagCurve>& curves) {
    std::vector<std::vector<double>> vals;
    vals.reserve(curves.size());
    for (const auto& c : curves) vals.push_back(c.values);
    return cross_sectional_average(vals);
}

}  // namespace nlvr
