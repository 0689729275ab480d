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

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nlvr/timeseries.hpp"

// Observables nonlocal in time.
//
// The two-window volatility difference Dv(t') compares the average
// volatility over a short recent window T1 against a long background window
// T2. Conditional probabilities and correlation functions of the return t
// days ahead, conditioned on the sign (or value) of Dv(t'), quantify how
// past volatility levels bias future returns.
//
// Arithmetic is canonical on purpose: window sums run i = 1..count over
// v(t'-i+1), day loops run ascending in t', and means divide a plain
// accumulated sum. This makes results reproducible against direct
// enumeration bit-for-bit.

namespace nlvr {

/// Short/long averaging windows, in trading days. 1 <= T1 < T2.
struct WindowPair {
    int t1 = 0;
    int t2 = 0;

    friend auto operator<=>(const WindowPair&, const WindowPair&) = default;

    void validate() const {
        if (t1 < 1 || t1 >= t2)
            throw std::invalid_argument("window pair requires 1 <= T1 < T2");
    }
};

/// Dv(t') aligned with the returns; NaN before first_valid (1-based).
struct DeltaVSeries {
    std::vector<double> values;
    VolatilitySpec spec;
    WindowPair pair;
    int first_valid = 1;

    double at(int t_prime) const { return values[static_cast<std::size_t>(t_prime) - 1]; }
};

enum class Observable {
    DeltaP,   // P+(t)|Dv>0 - P+(t)|Dv<0
    DeltaP1,  // same, v1 (m-day RMS) volatility
    DeltaP2,  // same, cumulative-RMS window volatility
    F,        // < Dv(t') * r(t'+t) >
    F1,       // F with v1
    G,        // < sgn Dv(t') * sgn r(t'+t) >, zero-sign terms excluded
    H,        // < sgn Dv(t') * r(t'+t) >
    LocalF,   // < v(t') * r(t'+t) >, the local baseline
};

inline const char* observable_name(Observable o) {
    switch (o) {
        case Observable::DeltaP: return "delta_p";
        case Observable::DeltaP1: return "delta_p1";
        case Observable::DeltaP2: return "delta_p2";
        case Observable::F: return "f";
        case Observable::F1: return "f1";
        case Observable::G: return "g";
        case Observable::H: return "h";
        case Observable::LocalF: return "local_f";
    }
    return "?";
}

/// DeltaP1/F1/DeltaP2 fix their volatility estimator; everything else uses
/// the caller's spec.
inline VolatilitySpec resolve_spec(Observable obs, const VolatilitySpec& spec) {
    switch (obs) {
        case Observable::DeltaP1:
        case Observable::F1:
            return VolatilitySpec{VolKind::RmsWindow, spec.m};
        case Observable::DeltaP2:
            return VolatilitySpec{VolKind::RmsCumulative, spec.m};
        default:
            return spec;
    }
}

inline bool is_count_observable(Observable o) {
    return o == Observable::DeltaP || o == Observable::DeltaP1 ||
           o == Observable::DeltaP2 || o == Observable::G;
}

namespace detail {

// --- packed sign bitmaps -------------------------------------------------
//
// Count observables reduce to joint counts of {sgn Dv(t'), sgn r(t'+t)}
// over a contiguous t' range. Packing signs into 64-bit words turns the
// per-lag pass into shifted AND + popcount, which is what makes the
// 44x42-pair landscape affordable. Counts are integers, so this path is
// exactly equal to the scalar loop.

struct BitVec {
    std::vector<std::uint64_t> words;
    int n = 0;

    BitVec() = default;
    explicit BitVec(int size) : words((static_cast<std::size_t>(size) + 63) / 64, 0), n(size) {}

    void set(int i) { words[static_cast<std::size_t>(i) >> 6] |= 1ull << (i & 63); }
    bool test(int i) const {
        return (words[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u;
    }
};

/// Number of i in [lo, hi] with a[i] set.
inline long long count_range(const BitVec& a, int lo, int hi) {
    if (lo > hi) return 0;
    const int wl = lo >> 6, wh = hi >> 6;
    const std::uint64_t ml = ~0ull << (lo & 63);
    const std::uint64_t mh = (hi & 63) == 63 ? ~0ull : ((1ull << ((hi & 63) + 1)) - 1);
    if (wl == wh) return std::popcount(a.words[wl] & ml & mh);
    long long c = std::popcount(a.words[wl] & ml);
    for (int w = wl + 1; w < wh; ++w) c += std::popcount(a.words[w]);
    c += std::popcount(a.words[wh] & mh);
    return c;
}

// Word w of b viewed through a right-shift by q words + s bits.
inline std::uint64_t shifted_word(const BitVec& b, int w, int q, int s) {
    const std::size_t i = static_cast<std::size_t>(w) + static_cast<std::size_t>(q);
    const std::uint64_t lo = i < b.words.size() ? b.words[i] : 0;
    if (s == 0) return lo;
    const std::uint64_t hi = i + 1 < b.words.size() ? b.words[i + 1] : 0;
    return (lo >> s) | (hi << (64 - s));
}

/// Number of i in [lo, hi] with a[i] && b[i + t].
inline long long count_joint(const BitVec& a, const BitVec& b, int t, int lo, int hi) {
    if (lo > hi) return 0;
    const int q = t >> 6, s = t & 63;
    const int wl = lo >> 6, wh = hi >> 6;
    const std::uint64_t ml = ~0ull << (lo & 63);
    const std::uint64_t mh = (hi & 63) == 63 ? ~0ull : ((1ull << ((hi & 63) + 1)) - 1);
    long long c = 0;
    for (int w = wl; w <= wh; ++w) {
        std::uint64_t x = a.words[w];
        if (w == wl) x &= ml;
        if (w == wh) x &= mh;
        if (!x) continue;
        c += std::popcount(x & shifted_word(b, w, q, s));
    }
    return c;
}

struct SignBits {
    BitVec pos, neg;
};

/// Strict-sign bitmaps; zeros and NaNs set neither bit.
inline SignBits sign_bits(const std::vector<double>& v) {
    SignBits sb{BitVec(static_cast<int>(v.size())), BitVec(static_cast<int>(v.size()))};
    for (int i = 0; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > 0.0) sb.pos.set(i);
        else if (v[i] < 0.0) sb.neg.set(i);
    }
    return sb;
}

// --- pointwise volatility basis ------------------------------------------
//
// All three estimators share one window-average shape: a mean of a
// pointwise basis over the trailing window, optionally finished by a sqrt.
//   Abs:           basis = |r|,  count = T
//   RmsWindow:     basis = v1,   count = T - m + 1
//   RmsCumulative: basis = r^2,  count = T, sqrt at the end

struct VolBasis {
    std::vector<double> values;  // values[t'-1]; NaN where undefined
    VolKind kind = VolKind::Abs;
    int m = 1;

    int count_for(int T) const { return kind == VolKind::RmsWindow ? T - m + 1 : T; }
    bool sqrt_finish() const { return kind == VolKind::RmsCumulative; }
};

inline VolBasis make_basis(const ReturnSeries& returns, const VolatilitySpec& spec) {
    spec.validate();
    VolBasis b;
    b.kind = spec.kind;
    b.m = spec.m;
    const std::size_t n = returns.n();
    b.values.resize(n);
    switch (spec.kind) {
        case VolKind::Abs:
            for (std::size_t i = 0; i < n; ++i) b.values[i] = std::fabs(returns.values[i]);
            break;
        case VolKind::RmsCumulative:
            for (std::size_t i = 0; i < n; ++i)
                b.values[i] = returns.values[i] * returns.values[i];
            break;
        case VolKind::RmsWindow: {
            const int m = spec.m;
            if (n < static_cast<std::size_t>(m))
                throw std::invalid_argument("series shorter than volatility window m");
            std::fill(b.values.begin(), b.values.end(),
                      std::numeric_limits<double>::quiet_NaN());
            for (std::size_t i = static_cast<std::size_t>(m) - 1; i < n; ++i) {
                double ss = 0.0;
                for (int j = 0; j < m; ++j) {
                    const double r = returns.values[i - static_cast<std::size_t>(j)];
                    ss += r * r;
                }
                b.values[i] = std::sqrt(ss / static_cast<double>(m));
            }
            break;
        }
    }
    return b;
}

/// <v(t')>_T; sums newest to oldest, i = 1..count.
inline double window_avg(const VolBasis& b, int T, int t_prime) {
    const int cnt = b.count_for(T);
    double sum = 0.0;
    for (int i = 1; i <= cnt; ++i) sum += b.values[static_cast<std::size_t>(t_prime - i)];
    const double mean = sum / static_cast<double>(cnt);
    return b.sqrt_finish() ? std::sqrt(mean) : mean;
}

/// <v(t')>_T for every t'; NaN before t' = T. O(n*T), deliberately naive so
/// every entry equals window_avg exactly.
inline std::vector<double> window_avg_column(const VolBasis& b, int T) {
    if (b.count_for(T) < 1)
        throw std::invalid_argument("window length T must be >= volatility window m");
    const int n = static_cast<int>(b.values.size());
    std::vector<double> col(static_cast<std::size_t>(n),
                            std::numeric_limits<double>::quiet_NaN());
    for (int t_prime = T; t_prime <= n; ++t_prime)
        col[static_cast<std::size_t>(t_prime) - 1] = window_avg(b, T, t_prime);
    return col;
}

}  // namespace detail

/// Average volatility over the trailing T days at day t_prime (1-based),
/// under the chosen estimator. Requires t_prime >= T (and T >= m for the
/// RMS-window estimator).
inline double window_avg_volatility(const ReturnSeries& returns, const VolatilitySpec& spec,
                                    int T, int t_prime) {
    spec.validate();
    if (T < 1) throw std::invalid_argument("window length T must be >= 1");
    if (spec.kind == VolKind::RmsWindow && T < spec.m)
        throw std::invalid_argument("window length T must be >= volatility window m");
    if (t_prime < T || t_prime > static_cast<int>(returns.n()))
        throw std::out_of_range("window average undefined at t' = " + std::to_string(t_prime));
    return detail::window_avg(detail::make_basis(returns, spec), T, t_prime);
}

/// Dv(t') = <v(t')>_T1 - <v(t')>_T2 for all t' >= T2.
inline DeltaVSeries delta_v_series(const ReturnSeries& returns, const VolatilitySpec& spec,
                                   const WindowPair& pair) {
    spec.validate();
    pair.validate();
    if (spec.kind == VolKind::RmsWindow && pair.t1 < spec.m)
        throw std::invalid_argument("T1 must be >= volatility window m");
    const int n = static_cast<int>(returns.n());
    if (n <= pair.t2) throw std::invalid_argument("series too short for window pair");
    const detail::VolBasis basis = detail::make_basis(returns, spec);
    const std::vector<double> short_col = detail::window_avg_column(basis, pair.t1);
    const std::vector<double> long_col = detail::window_avg_column(basis, pair.t2);
    DeltaVSeries dv;
    dv.spec = spec;
    dv.pair = pair;
    dv.first_valid = pair.t2;
    dv.values.assign(static_cast<std::size_t>(n),
                     std::numeric_limits<double>::quiet_NaN());
    for (int i = pair.t2 - 1; i < n; ++i)
        dv.values[static_cast<std::size_t>(i)] = short_col[static_cast<std::size_t>(i)] -
                                                 long_col[static_cast<std::size_t>(i)];
    return dv;
}

/// Conditional-probability tallies at one lag. Probabilities are left
/// unset when their condition set is empty; p0 excludes zero-Dv days so the
/// identity n_pos*P+|vol + n_neg*P+|stb = (n_pos+n_neg)*P0 holds in count
/// arithmetic.
struct ConditionalProbabilities {
    std::optional<double> p_plus_given_volatile;
    std::optional<double> p_plus_given_stable;
    double p0 = std::numeric_limits<double>::quiet_NaN();
    long long n_pos = 0;      // days with Dv > 0
    long long n_neg = 0;      // days with Dv < 0
    long long n_zero_dv = 0;  // days excluded for Dv == 0
    long long n_zero_r = 0;   // zero returns inside the condition sets
    long long up_pos = 0;     // r(t'+t) > 0 and Dv(t') > 0
    long long up_neg = 0;     // r(t'+t) > 0 and Dv(t') < 0
    long long down_pos = 0;   // r(t'+t) < 0 and Dv(t') > 0
    long long down_neg = 0;   // r(t'+t) < 0 and Dv(t') < 0
};

inline ConditionalProbabilities conditional_probabilities(const ReturnSeries& returns,
                                                          const DeltaVSeries& dv, int t) {
    if (t < 1) throw std::invalid_argument("lag t must be >= 1");
    const int n = static_cast<int>(returns.n());
    const int lo = dv.first_valid, hi = n - t;
    if (lo > hi) throw std::invalid_argument("no valid days at lag " + std::to_string(t));
    ConditionalProbabilities cp;
    for (int tp = lo; tp <= hi; ++tp) {
        const double d = dv.at(tp);
        const double r = returns.at(tp + t);
        if (d > 0.0) {
            ++cp.n_pos;
            if (r > 0.0) ++cp.up_pos;
            else if (r < 0.0) ++cp.down_pos;
            else ++cp.n_zero_r;
        } else if (d < 0.0) {
            ++cp.n_neg;
            if (r > 0.0) ++cp.up_neg;
            else if (r < 0.0) ++cp.down_neg;
            else ++cp.n_zero_r;
        } else {
            ++cp.n_zero_dv;
        }
    }
    if (cp.n_pos > 0)
        cp.p_plus_given_volatile = static_cast<double>(cp.up_pos) / static_cast<double>(cp.n_pos);
    if (cp.n_neg > 0)
        cp.p_plus_given_stable = static_cast<double>(cp.up_neg) / static_cast<double>(cp.n_neg);
    if (cp.n_pos + cp.n_neg > 0)
        cp.p0 = static_cast<double>(cp.up_pos + cp.up_neg) /
                static_cast<double>(cp.n_pos + cp.n_neg);
    return cp;
}

/// One observable as a function of lag t = 1..t_max, with the per-lag
/// condition counts and the unconditional positive-return probability.
struct LagCurve {
    Observable observable = Observable::DeltaP;
    WindowPair pair;
    VolatilitySpec spec;  // estimator actually used
    std::vector<double> values;
    std::vector<long long> counts_pos;
    std::vector<long long> counts_neg;
    std::vector<double> p0;

    int t_max() const { return static_cast<int>(values.size()); }
    double at(int t) const { return values[static_cast<std::size_t>(t) - 1]; }
};

namespace detail {

/// Fills curve.values/counts/p0 from a conditioning series (Dv, or the
/// pointwise volatility for the local baseline). `source` is day-aligned
/// with NaN before first_valid.
inline void fill_lag_curve(LagCurve& curve, const std::vector<double>& source, int first_valid,
                           const ReturnSeries& returns, int t_max, const SignBits* r_bits) {
    const int n = static_cast<int>(returns.n());
    if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
    if (n - t_max < first_valid)
        throw std::invalid_argument("series too short for t_max = " + std::to_string(t_max));
    curve.values.resize(static_cast<std::size_t>(t_max));
    curve.counts_pos.resize(static_cast<std::size_t>(t_max));
    curve.counts_neg.resize(static_cast<std::size_t>(t_max));
    curve.p0.resize(static_cast<std::size_t>(t_max));
    const double nan = std::numeric_limits<double>::quiet_NaN();

    if (is_count_observable(curve.observable)) {
        const SignBits src_bits = sign_bits(source);
        SignBits local_r;
        if (!r_bits) {
            local_r = sign_bits(returns.values);
            r_bits = &local_r;
        }
        for (int t = 1; t <= t_max; ++t) {
            const int lo = first_valid - 1, hi = n - t - 1;  // 0-based day range
            const long long n_pos = count_range(src_bits.pos, lo, hi);
            const long long n_neg = count_range(src_bits.neg, lo, hi);
            const long long up_pos = count_joint(src_bits.pos, r_bits->pos, t, lo, hi);
            const long long up_neg = count_joint(src_bits.neg, r_bits->pos, t, lo, hi);
            curve.counts_pos[t - 1] = n_pos;
            curve.counts_neg[t - 1] = n_neg;
            curve.p0[t - 1] = (n_pos + n_neg) > 0
                                  ? static_cast<double>(up_pos + up_neg) /
                                        static_cast<double>(n_pos + n_neg)
                                  : nan;
            if (curve.observable == Observable::G) {
                const long long down_pos = count_joint(src_bits.pos, r_bits->neg, t, lo, hi);
                const long long down_neg = count_joint(src_bits.neg, r_bits->neg, t, lo, hi);
                const long long den = up_pos + up_neg + down_pos + down_neg;
                curve.values[t - 1] =
                    den > 0 ? static_cast<double>((up_pos + down_neg) - (down_pos + up_neg)) /
                                  static_cast<double>(den)
                            : nan;
            } else {
                curve.values[t - 1] =
                    (n_pos > 0 && n_neg > 0)
                        ? static_cast<double>(up_pos) / static_cast<double>(n_pos) -
                              static_cast<double>(up_neg) / static_cast<double>(n_neg)
                        : nan;
            }
        }
        return;
    }

    // Value observables: one ascending day pass per lag.
    const bool signed_weight = curve.observable == Observable::H;
    for (int t = 1; t <= t_max; ++t) {
        const int lo = first_valid, hi = n - t;
        double sum = 0.0;
        long long n_pos = 0, n_neg = 0, up = 0;
        for (int tp = lo; tp <= hi; ++tp) {
            const double d = source[static_cast<std::size_t>(tp) - 1];
            const double r = returns.at(tp + t);
            if (signed_weight) {
                if (d > 0.0) sum += r;
                else if (d < 0.0) sum -= r;
            } else {
                sum += d * r;
            }
            if (d > 0.0) {
                ++n_pos;
                if (r > 0.0) ++up;
            } else if (d < 0.0) {
                ++n_neg;
                if (r > 0.0) ++up;
            }
        }
        const long long len = hi - lo + 1;
        curve.values[t - 1] = sum / static_cast<double>(len);
        curve.counts_pos[t - 1] = n_pos;
        curve.counts_neg[t - 1] = n_neg;
        curve.p0[t - 1] = (n_pos + n_neg) > 0
                              ? static_cast<double>(up) / static_cast<double>(n_pos + n_neg)
                              : nan;
    }
}

}  // namespace detail

/// Computes one observable for lags 1..t_max. DeltaP/F/G/H condition on the
/// caller's estimator; DeltaP1/F1/DeltaP2 force theirs. The local baseline
/// LocalF conditions on the pointwise volatility and ignores the pair.
inline LagCurve lag_curve(const ReturnSeries& returns, const VolatilitySpec& spec,
                          const WindowPair& pair, Observable obs, int t_max) {
    LagCurve curve;
    curve.observable = obs;
    curve.pair = pair;
    curve.spec = resolve_spec(obs, spec);
    if (obs == Observable::LocalF) {
        const VolatilitySeries vol = volatility(returns, curve.spec);
        detail::fill_lag_curve(curve, vol.values, vol.first_valid, returns, t_max, nullptr);
    } else {
        const DeltaVSeries dv = delta_v_series(returns, curve.spec, pair);
        detail::fill_lag_curve(curve, dv.values, dv.first_valid, returns, t_max, nullptr);
    }
    return curve;
}

}  // namespace nlvr
