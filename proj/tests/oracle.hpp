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
#include <vector>

#include "nlvr/timeseries.hpp"

// Test-only enumeration oracles: direct transcriptions of the defining
// formulas. No library internals are reused, so agreement with the
// implementation is meaningful. Sums run in the written order (window terms
// newest to oldest, days ascending); the implementation promises the same,
// which is what makes bit-for-bit comparison possible.

namespace oracle {

/// v1(s) = sqrt( (1/m) * sum_{j=1..m} r(s-j+1)^2 ), s 1-based.
inline double v1_at(const std::vector<double>& r, int m, int s) {
    double ss = 0.0;
    for (int j = 1; j <= m; ++j) {
        const double x = r[static_cast<std::size_t>(s - j)];
        ss += x * x;
    }
    return std::sqrt(ss / static_cast<double>(m));
}

/// <v(t')>_T under the chosen estimator, t' 1-based.
inline double window_avg(const std::vector<double>& r, nlvr::VolKind kind, int m, int T, int tp) {
    switch (kind) {
        case nlvr::VolKind::Abs: {
            double s = 0.0;
            for (int i = 1; i <= T; ++i) s += std::fabs(r[static_cast<std::size_t>(tp - i)]);
            return s / static_cast<double>(T);
        }
        case nlvr::VolKind::RmsWindow: {
            const int cnt = T - m + 1;
            double s = 0.0;
            for (int i = 1; i <= cnt; ++i) s += v1_at(r, m, tp - i + 1);
            return s / static_cast<double>(cnt);
        }
        case nlvr::VolKind::RmsCumulative: {
            double s = 0.0;
            for (int i = 1; i <= T; ++i) {
                const double x = r[static_cast<std::size_t>(tp - i)];
                s += x * x;
            }
            return std::sqrt(s / static_cast<double>(T));
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

inline double delta_v(const std::vector<double>& r, nlvr::VolKind kind, int m, int t1, int t2,
                      int tp) {
    return window_avg(r, kind, m, t1, tp) - window_avg(r, kind, m, t2, tp);
}

struct Observables {
    double delta_p = std::numeric_limits<double>::quiet_NaN();
    double p0 = std::numeric_limits<double>::quiet_NaN();
    double f = std::numeric_limits<double>::quiet_NaN();
    double g = std::numeric_limits<double>::quiet_NaN();
    double h = std::numeric_limits<double>::quiet_NaN();
    long long n_pos = 0, n_neg = 0;
    long long up_pos = 0, up_neg = 0;
};

/// Every nonlocal observable at one lag by direct enumeration over the
/// valid days t' = T2 .. n - t.
inline Observables observables_at(const std::vector<double>& r, nlvr::VolKind kind, int m, int t1,
                                  int t2, int t) {
    const int n = static_cast<int>(r.size());
    Observables o;
    double f_sum = 0.0, h_sum = 0.0;
    long long down_pos = 0, down_neg = 0, len = 0;
    for (int tp = t2; tp <= n - t; ++tp) {
        const double dv = delta_v(r, kind, m, t1, t2, tp);
        const double rv = r[static_cast<std::size_t>(tp + t - 1)];
        f_sum += dv * rv;
        if (dv > 0.0) {
            ++o.n_pos;
            h_sum += rv;
            if (rv > 0.0) ++o.up_pos;
            else if (rv < 0.0) ++down_pos;
        } else if (dv < 0.0) {
            ++o.n_neg;
            h_sum -= rv;
            if (rv > 0.0) ++o.up_neg;
            else if (rv < 0.0) ++down_neg;
        }
        ++len;
    }
    if (len > 0) {
        o.f = f_sum / static_cast<double>(len);
        o.h = h_sum / static_cast<double>(len);
    }
    if (o.n_pos > 0 && o.n_neg > 0)
        o.delta_p = static_cast<double>(o.up_pos) / static_cast<double>(o.n_pos) -
                    static_cast<double>(o.up_neg) / static_cast<double>(o.n_neg);
    if (o.n_pos + o.n_neg > 0)
        o.p0 = static_cast<double>(o.up_pos + o.up_neg) / static_cast<double>(o.n_pos + o.n_neg);
    const long long g_den = o.up_pos + o.up_neg + down_pos + down_neg;
    if (g_den > 0)
        o.g = static_cast<double>((o.up_pos + down_neg) - (down_pos + o.up_neg)) /
              static_cast<double>(g_den);
    return o;
}

/// The local baseline f(t) = < v(t') * r(t'+t) > with pointwise volatility.
inline double local_f_at(const std::vector<double>& r, nlvr::VolKind kind, int m, int t) {
    const int n = static_cast<int>(r.size());
    const int fv = kind == nlvr::VolKind::RmsWindow ? m : 1;
    double sum = 0.0;
    long long len = 0;
    for (int tp = fv; tp <= n - t; ++tp) {
        const double v = kind == nlvr::VolKind::RmsWindow
                             ? v1_at(r, m, tp)
                             : std::fabs(r[static_cast<std::size_t>(tp - 1)]);
        sum += v * r[static_cast<std::size_t>(tp + t - 1)];
        ++len;
    }
    return sum / static_cast<double>(len);
}

// --- Student's t distribution by quadrature -------------------------------
//
// With x = sqrt(df) tan(theta) the t density integrates to
// Int cos^(df-1)(theta) d(theta), so the two-sided p-value of t is
// the ratio of that integral over [atan(|t|/sqrt(df)), pi/2] to the one
// over [0, pi/2]. No gamma functions or continued fractions involved.

namespace detail {

template <class F>
double simpson(const F& f, double a, double b, double fa, double fm, double fb, double whole,
               double tol, int depth) {
    const double m = (a + b) / 2.0;
    const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <class F>
double integrate(const F& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f((a + b) / 2.0);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace detail

inline double t_two_sided_p(double t, double df) {
    const double theta = std::atan(std::fabs(t) / std::sqrt(df));
    const auto integrand = [df](double th) { return std::pow(std::cos(th), df - 1.0); };
    const double half_pi = std::acos(0.0);
    const double tail = detail::integrate(integrand, theta, half_pi, 1e-13);
    const double total = detail::integrate(integrand, 0.0, half_pi, 1e-13);
    return tail / total;
}

}  // namespace oracle
