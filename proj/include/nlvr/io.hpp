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
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlvr/detect.hpp"
#include "nlvr/nonlocal.hpp"
#include "nlvr/stats.hpp"
#include "nlvr/timeseries.hpp"

// CSV ingestion and dump formats.
//
//   TWO_COLUMN:  `YYYY-MM-DD,<close>` rows, optional `date,close` header.
//   YAHOO_CSV:   standard Yahoo Finance header; only Date and Close are read.
//   series dump: `index,value` rows, 15 significant digits.

namespace nlvr {

enum class PriceFormat { TwoColumn, YahooCsv };

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    fields.push_back(trim(cur));
    return fields;
}

inline double parse_close(const std::string& field, std::size_t row) {
    const std::string s = trim(field);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw std::runtime_error("non-numeric price at row " + std::to_string(row) + ": '" + s +
                                 "'");
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::runtime_error("non-positive price at row " + std::to_string(row) + ": '" + s +
                                 "'");
    return v;
}

}  // namespace detail

/// Parses daily closing prices. Rows are sorted ascending by date;
/// duplicate dates, non-positive closes and sub-2-row inputs are rejected.
inline PriceSeries load_price_series(std::istream& in, PriceFormat format,
                                     const std::string& symbol = "") {
    PriceSeries ps;
    ps.symbol = symbol;
    std::string line;
    std::size_t row = 0;
    int date_col = 0, close_col = 1;
    bool header_done = false;

    std::vector<std::pair<Date, double>> rows;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const std::vector<std::string> fields = detail::split_csv(line);

        if (!header_done) {
            header_done = true;
            if (format == PriceFormat::YahooCsv) {
                date_col = close_col = -1;
                for (std::size_t i = 0; i < fields.size(); ++i) {
                    const std::string name = detail::lower(fields[i]);
                    if (name == "date") date_col = static_cast<int>(i);
                    if (name == "close") close_col = static_cast<int>(i);
                }
                if (date_col < 0 || close_col < 0)
                    throw std::runtime_error("Yahoo CSV header must contain Date and Close");
                continue;
            }
            // TWO_COLUMN: a `date,close` header row is optional.
            if (detail::lower(fields[0]) == "date") continue;
        }

        const int needed = std::max(date_col, close_col);
        if (static_cast<int>(fields.size()) <= needed)
            throw std::runtime_error("too few columns at row " + std::to_string(row));
        const Date d = Date::parse(fields[static_cast<std::size_t>(date_col)]);
        rows.emplace_back(d, detail::parse_close(fields[static_cast<std::size_t>(close_col)], row));
    }

    if (rows.size() < 2) throw std::runtime_error("fewer than 2 rows of prices");
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].first == rows[i - 1].first)
            throw std::runtime_error("duplicate date " + rows[i].first.str());

    ps.dates.reserve(rows.size());
    ps.closes.reserve(rows.size());
    for (const auto& [d, c] : rows) {
        ps.dates.push_back(d);
        ps.closes.push_back(c);
    }
    ps.validate();
    return ps;
}

inline PriceSeries load_price_file(const std::string& path, PriceFormat format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::string stem = path;
    if (const auto slash = stem.find_last_of('/'); slash != std::string::npos)
        stem = stem.substr(slash + 1);
    if (const auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    return load_price_series(in, format, stem);
}

/// `index,value` series with one value per line (no header), the dump
/// format shared by simulated and derived series.
inline std::vector<double> load_value_series(std::istream& in) {
    std::vector<double> values;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv(line);
        if (row == 1 && detail::lower(fields[0]) == "index") continue;
        if (fields.size() < 2)
            throw std::runtime_error("expected index,value at row " + std::to_string(row));
        char* end = nullptr;
        const double v = std::strtod(fields[1].c_str(), &end);
        if (fields[1].empty() || end != fields[1].c_str() + fields[1].size())
            throw std::runtime_error("non-numeric value at row " + std::to_string(row));
        values.push_back(v);
    }
    if (values.empty()) throw std::runtime_error("empty series");
    return values;
}

/// 15 significant digits; enough to round-trip analysis results while
/// keeping dumps diffable.
inline std::string fmt15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

inline void write_series_csv(std::ostream& out, const std::vector<double>& values) {
    out << "index,value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out << (i + 1) << ',' << fmt15(values[i]) << '\n';
}

inline void write_curve_csv(std::ostream& out, const LagCurve& curve) {
    out << "t,value,n_pos,n_neg,p0\n";
    for (int t = 1; t <= curve.t_max(); ++t)
        out << t << ',' << fmt15(curve.values[t - 1]) << ',' << curve.counts_pos[t - 1] << ','
            << curve.counts_neg[t - 1] << ',' << fmt15(curve.p0[t - 1]) << '\n';
}

inline void write_mean_curve_csv(std::ostream& out, const CrossSection& cs) {
    if (cs.n_units < 2) {
        out << "# single series: standard error column omitted\n";
        out << "t,value\n";
        for (std::size_t i = 0; i < cs.mean.size(); ++i)
            out << (i + 1) << ',' << fmt15(cs.mean[i]) << '\n';
        return;
    }
    out << "t,value,se\n";
    for (std::size_t i = 0; i < cs.mean.size(); ++i)
        out << (i + 1) << ',' << fmt15(cs.mean[i]) << ',' << fmt15(cs.se[i]) << '\n';
}

inline void write_delta_v_csv(std::ostream& out, const DeltaVSeries& dv) {
    out << "t_prime,delta_v\n";
    for (std::size_t i = static_cast<std::size_t>(dv.first_valid) - 1; i < dv.values.size(); ++i)
        out << (i + 1) << ',' << fmt15(dv.values[i]) << '\n';
}

inline void write_ttest_csv(std::ostream& out, const std::vector<TTestResult>& tests) {
    out << "lag,t_stat,p_value,df\n";
    for (const auto& t : tests)
        out << t.lag << ',' << fmt15(t.t_stat) << ',' << fmt15(t.p_value) << ',' << t.df << '\n';
}

inline void write_landscape_csv(std::ostream& out, const Landscape& ls) {
    out << "T1,T2,ap0\n";
    for (const auto& cell : ls.cells)
        out << cell.pair.t1 << ',' << cell.pair.t2 << ',' << fmt15(cell.ap0) << '\n';
}

inline nlohmann::json landscape_summary(const Landscape& ls) {
    nlohmann::json j;
    j["observable"] = observable_name(ls.observable);
    j["ap0_bar"] = ls.ap0_bar;
    double max_ap0 = 0.0;
    WindowPair argmax{0, 0};
    nlohmann::json region = nlohmann::json::array();
    for (const auto& cell : ls.cells) {
        if (cell.ap0 == 0.0) continue;
        region.push_back({{"T1", cell.pair.t1}, {"T2", cell.pair.t2}});
        if (std::fabs(cell.ap0) > std::fabs(max_ap0)) {
            max_ap0 = cell.ap0;
            argmax = cell.pair;
        }
    }
    j["max_ap0"] = max_ap0;
    j["argmax"] = {{"T1", argmax.t1}, {"T2", argmax.t2}};
    j["effective_region"] = region;
    return j;
}

}  // namespace nlvr
