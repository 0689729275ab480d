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
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlvr/rng.hpp"

// Daily return series and volatility estimators.
//
// Trading days are indexed 1..n throughout the library, matching the usual
// time-series convention; values[i] holds day i+1. Calendar gaps are
// ignored: consecutive rows are consecutive trading days.

namespace nlvr {

/// Calendar date, kept only for provenance and ordering of price rows.
struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    friend auto operator<=>(const Date&, const Date&) = default;

    /// Parses strict `YYYY-MM-DD`. Throws std::runtime_error on malformed input.
    static Date parse(const std::string& s) {
        auto fail = [&] { throw std::runtime_error("bad date '" + s + "' (expected YYYY-MM-DD)"); };
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
        for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
            if (s[i] < '0' || s[i] > '9') fail();
        Date d;
        d.year = std::stoi(s.substr(0, 4));
        d.month = std::stoi(s.substr(5, 2));
        d.day = std::stoi(s.substr(8, 2));
        if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31) fail();
        return d;
    }

    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
        return buf;
    }
};

/// Daily closing prices Y(t'), t' = 1..len. Dates strictly increasing,
/// prices positive, at least two rows.
struct PriceSeries {
    std::string symbol;
    std::vector<Date> dates;
    std::vector<double> closes;

    std::size_t size() const { return closes.size(); }

    void validate() const {
        if (closes.size() < 2) throw std::runtime_error("price series needs at least 2 rows");
        if (dates.size() != closes.size())
            throw std::runtime_error("price series: dates/closes length mismatch");
        for (std::size_t i = 0; i < closes.size(); ++i) {
            if (!(closes[i] > 0.0) || !std::isfinite(closes[i]))
                throw std::runtime_error("non-positive price at row " + std::to_string(i + 1) +
                                         " (" + dates[i].str() + ")");
            if (i > 0 && !(dates[i - 1] < dates[i]))
                throw std::runtime_error("dates not strictly increasing at row " +
                                         std::to_string(i + 1) + " (" + dates[i].str() + ")");
        }
    }
};

/// Log-returns R(t') = ln Y(t') - ln Y(t'-1); one element shorter than prices.
struct RawReturnSeries {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// Normalized returns r(t') = (R(t') - <R>) / sigma with the population
/// standard deviation. Carries the subtracted moments so the raw series can
/// be recovered. Surrogate and simulated series reuse this type, so
/// construction does not force zero mean / unit variance; `normalize()`
/// guarantees it for its own output.
struct ReturnSeries {
    std::vector<double> values;
    double mean_raw = 0.0;
    double sigma_raw = 1.0;

    std::size_t n() const { return values.size(); }

    /// r(t') with t' in 1..n.
    double at(int t_prime) const { return values[static_cast<std::size_t>(t_prime) - 1]; }

    static ReturnSeries from_values(std::vector<double> vals) {
        ReturnSeries rs;
        rs.values = std::move(vals);
        return rs;
    }
};

enum class VolKind {
    Abs,            // v(t')  = |r(t')|
    RmsWindow,      // v1(t') = sqrt(mean of r^2 over the last m days)
    RmsCumulative,  // v2: defined only at the window-average level
};

/// Which volatility estimator to use, and its window length m (RmsWindow only).
struct VolatilitySpec {
    VolKind kind = VolKind::Abs;
    int m = 5;

    void validate() const {
        if (m < 1) throw std::invalid_argument("volatility window m must be >= 1");
    }
};

/// Pointwise volatility series aligned with the returns; entries before
/// first_valid (1-based) are NaN.
struct VolatilitySeries {
    std::vector<double> values;
    VolatilitySpec spec;
    int first_valid = 1;

    double at(int t_prime) const { return values[static_cast<std::size_t>(t_prime) - 1]; }
};

inline RawReturnSeries log_returns(const PriceSeries& prices) {
    prices.validate();
    RawReturnSeries out;
    out.values.resize(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i)
        out.values[i] = std::log(prices.closes[i + 1]) - std::log(prices.closes[i]);
    return out;
}

/// Standardizes raw returns to zero mean and unit population standard
/// deviation. Throws "degenerate series" when all returns are equal.
inline ReturnSeries normalize(const RawReturnSeries& raw) {
    const std::size_t n = raw.size();
    if (n < 2) throw std::invalid_argument("normalize: need at least 2 returns");
    double sum = 0.0;
    for (double v : raw.values) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : raw.values) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(n));
    if (!(sigma > 0.0)) throw std::runtime_error("degenerate series: zero return variance");
    ReturnSeries out;
    out.mean_raw = mean;
    out.sigma_raw = sigma;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = (raw.values[i] - mean) / sigma;
    return out;
}

/// Pointwise volatility under `spec`. RmsCumulative has no pointwise form
/// (it is defined directly as a window average) and is rejected here.
inline VolatilitySeries volatility(const ReturnSeries& returns, const VolatilitySpec& spec) {
    spec.validate();
    const std::size_t n = returns.n();
    VolatilitySeries out;
    out.spec = spec;
    switch (spec.kind) {
        case VolKind::Abs:
            out.first_valid = 1;
            out.values.resize(n);
            for (std::size_t i = 0; i < n; ++i) out.values[i] = std::fabs(returns.values[i]);
            break;
        case VolKind::RmsWindow: {
            const int m = spec.m;
            if (n < static_cast<std::size_t>(m))
                throw std::invalid_argument("volatility: series shorter than window m");
            out.first_valid = m;
            out.values.assign(n, std::numeric_limits<double>::quiet_NaN());
            for (std::size_t i = static_cast<std::size_t>(m) - 1; i < n; ++i) {
                double ss = 0.0;
                for (int j = 0; j < m; ++j) {
                    const double r = returns.values[i - static_cast<std::size_t>(j)];
                    ss += r * r;
                }
                out.values[i] = std::sqrt(ss / static_cast<double>(m));
            }
            break;
        }
        case VolKind::RmsCumulative:
            throw std::invalid_argument("volatility: RMS_CUMULATIVE is defined at window level");
    }
    return out;
}

/// Uniformly random permutation of the return values (Fisher-Yates under a
/// seeded generator). The multiset of values is preserved exactly.
inline ReturnSeries shuffle(const ReturnSeries& returns, std::uint64_t seed) {
    ReturnSeries out = returns;
    std::mt19937_64 rng(seed);
    for (std::size_t i = out.values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(out.values[i - 1], out.values[j]);
    }
    return out;
}

}  // namespace nlvr
