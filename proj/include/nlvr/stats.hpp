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
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nlvr/nonlocal.hpp"
#include "nlvr/parallel.hpp"
#include "nlvr/timeseries.hpp"

// Significance machinery: per-lag one-sample Student's t-tests across
// stocks/samples, the all-lags confirmation protocol, and shuffled-returns
// null testing.

namespace nlvr {

namespace detail {

/// Continued-fraction kernel of the incomplete beta function (Lentz).
inline double betacf(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-14;
    constexpr int kMaxIter = 500;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a, b must be > 0");
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::betacf(a, b, x) / a;
    return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of a Student's t statistic with df degrees of freedom,
/// via P = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided_p: df must be > 0");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

struct TTestResult {
    int lag = 0;
    double t_stat = 0.0;
    double p_value = 1.0;
    long long df = 0;
    bool degenerate = false;  // zero sample variance
};

/// One-sample two-sided t-test of mean zero across units (stocks or
/// samples) at one lag. Zero-variance samples are reported as degenerate
/// certainty (p = 0 for nonzero mean, p = 1 otherwise) instead of aborting
/// scan pipelines.
inline TTestResult t_test_per_lag(const std::vector<double>& values_across_units, int lag = 0) {
    const std::size_t n = values_across_units.size();
    if (n < 2) throw std::invalid_argument("t_test_per_lag: need at least 2 values");
    TTestResult res;
    res.lag = lag;
    res.df = static_cast<long long>(n) - 1;
    double sum = 0.0;
    for (double v : values_across_units) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values_across_units) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(n - 1);
    if (var == 0.0) {
        res.degenerate = true;
        res.t_stat = mean == 0.0 ? 0.0
                                 : std::copysign(std::numeric_limits<double>::infinity(), mean);
        res.p_value = mean == 0.0 ? 1.0 : 0.0;
        return res;
    }
    res.t_stat = mean / std::sqrt(var / static_cast<double>(n));
    res.p_value = student_t_two_sided_p(res.t_stat, static_cast<double>(res.df));
    return res;
}

/// Per-lag t-tests for a whole unit-major curve matrix (unit_curves[u][t-1]).
inline std::vector<TTestResult> t_tests_per_lag(
    const std::vector<std::vector<double>>& unit_curves) {
    if (unit_curves.empty()) throw std::invalid_argument("t_tests_per_lag: no curves");
    const std::size_t len = unit_curves.front().size();
    for (const auto& c : unit_curves)
        if (c.size() != len) throw std::invalid_argument("t_tests_per_lag: mismatched lag ranges");
    std::vector<TTestResult> out;
    out.reserve(len);
    std::vector<double> column(unit_curves.size());
    for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t u = 0; u < unit_curves.size(); ++u) column[u] = unit_curves[u][t];
        out.push_back(t_test_per_lag(column, static_cast<int>(t) + 1));
    }
    return out;
}

/// A curve is confirmed non-zero when every lag in [lag_lo, lag_hi] has
/// p < alpha across units.
inline bool confirm_nonzero(const std::vector<std::vector<double>>& unit_curves, int lag_lo = 1,
                            int lag_hi = 10, double alpha = 0.01) {
    if (lag_lo < 1 || lag_hi < lag_lo) throw std::invalid_argument("confirm_nonzero: bad lag span");
    if (unit_curves.empty() ||
        unit_curves.front().size() < static_cast<std::size_t>(lag_hi))
        throw std::invalid_argument("confirm_nonzero: curves do not cover the lag span");
    const auto tests = t_tests_per_lag(unit_curves);
    for (int t = lag_lo; t <= lag_hi; ++t)
        if (!(tests[static_cast<std::size_t>(t) - 1].p_value < alpha)) return false;
    return true;
}

/// Shuffled-returns null test output. null_mean_curves[k] is the
/// cross-sectional mean curve of shuffle k; significance entries are only
/// produced with at least two units.
struct SurrogateNullReport {
    std::vector<std::vector<double>> null_mean_curves;
    std::vector<long long> per_lag_significant;  // across shuffles, per lag
    long long significant_tests = 0;
    long long total_tests = 0;
    double alpha = 0.01;
    std::size_t n_units = 0;

    double significant_fraction() const {
        return total_tests > 0
                   ? static_cast<double>(significant_tests) / static_cast<double>(total_tests)
                   : std::numeric_limits<double>::quiet_NaN();
    }
};

/// Recomputes the observable on seeded random permutations of each unit's
/// returns. Per-unit, per-shuffle seeds derive from `seed`, so the report
/// is reproducible and independent of the parallelism degree.
inline SurrogateNullReport surrogate_null(const std::vector<ReturnSeries>& units,
                                          const VolatilitySpec& spec, const WindowPair& pair,
                                          Observable obs, int t_max, int n_shuffles,
                                          std::uint64_t seed, double alpha = 0.01, int jobs = 0) {
    if (n_shuffles < 1) throw std::invalid_argument("surrogate_null: n_shuffles must be >= 1");
    if (units.empty()) throw std::invalid_argument("surrogate_null: no input series");
    SurrogateNullReport rep;
    rep.alpha = alpha;
    rep.n_units = units.size();
    rep.null_mean_curves.resize(static_cast<std::size_t>(n_shuffles));
    std::vector<std::vector<char>> significant(static_cast<std::size_t>(n_shuffles));

    parallel_for(static_cast<std::size_t>(n_shuffles), jobs, [&](std::size_t k) {
        std::vector<std::vector<double>> curves;
        curves.reserve(units.size());
        for (std::size_t u = 0; u < units.size(); ++u) {
            const ReturnSeries surrogate =
                shuffle(units[u], derive_seed(seed, k * units.size() + u));
            curves.push_back(lag_curve(surrogate, spec, pair, obs, t_max).values);
        }
        std::vector<double> mean(static_cast<std::size_t>(t_max), 0.0);
        for (const auto& c : curves)
            for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += c[t];
        for (double& v : mean) v /= static_cast<double>(units.size());
        rep.null_mean_curves[k] = std::move(mean);
        if (units.size() >= 2) {
            const auto tests = t_tests_per_lag(curves);
            auto& sig = significant[k];
            sig.resize(tests.size());
            for (std::size_t t = 0; t < tests.size(); ++t) sig[t] = tests[t].p_value < alpha;
        }
    });

    if (units.size() >= 2) {
        rep.per_lag_significant.assign(static_cast<std::size_t>(t_max), 0);
        for (const auto& sig : significant)
            for (std::size_t t = 0; t < sig.size(); ++t) {
                rep.per_lag_significant[t] += sig[t];
                rep.significant_tests += sig[t];
            }
        rep.total_tests = static_cast<long long>(n_shuffles) * t_max;
    }
    return rep;
}

}  // namespace nlvr
