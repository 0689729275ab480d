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
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "nlvr/parallel.hpp"
#include "nlvr/rng.hpp"
#include "nlvr/timeseries.hpp"

// Agent-based market model with asymmetric trading preference.
//
// N agents trade one share a day (buy/sell/hold). The population of
// investment horizons follows a power law gamma_i ~ i^-eta up to M days.
// Each day the agents are regrouped into 1/D(t) herds, where the herding
// degree D(t) = |R'(t-1)|/N follows the horizon-weighted average return
// R'(t-1); every herd draws a single trading decision. Buying and selling
// probabilities split asymmetrically around p according to the agents'
// integrated view xi(t) of recent versus background volatility, with
// preference degree c. The net demand R(t) is the daily return.

namespace nlvr {

struct SimConfig {
    long n_agents = 10000;       // N
    int max_horizon = 150;       // M
    double eta = 1.12;           // horizon power-law exponent
    double p = 0.0154;           // one-sided trading probability at xi = 1
    double c = 1.0 / 80.0;       // asymmetric-preference degree, may be negative
    long total_steps = 20000;    // simulated days
    long warmup_discard = 15000; // leading days dropped for equilibration
    std::uint64_t seed = 0;

    void validate() const {
        if (n_agents < 1) throw std::invalid_argument("sim config: N must be >= 1");
        if (max_horizon < 1) throw std::invalid_argument("sim config: M must be >= 1");
        if (!(eta > 0.0)) throw std::invalid_argument("sim config: eta must be > 0");
        if (!(p > 0.0) || !(p < 0.5))
            throw std::invalid_argument("sim config: p must be in (0, 1/2)");
        if (!(std::fabs(c) <= 1.0)) throw std::invalid_argument("sim config: |c| must be <= 1");
        if (warmup_discard < max_horizon)
            throw std::invalid_argument("sim config: warmup must cover the horizon M");
        if (total_steps <= warmup_discard)
            throw std::invalid_argument("sim config: total_steps must exceed warmup");
    }
};

/// Normalized horizon weights gamma_i = i^-eta / sum_j j^-eta together with
/// the derived aggregation weights: weight_by_age[j] multiplies R(t-j) in
/// R'(t), and k rescales so |R'| <= max |R|.
struct HorizonWeights {
    std::vector<double> gamma;          // gamma[i-1], i = 1..M
    std::vector<double> weight_by_age;  // sum of gamma_i over horizons i > age
    double k = 1.0;

    int horizon() const { return static_cast<int>(gamma.size()); }
};

inline std::vector<double> horizon_weights(int max_horizon, double eta) {
    if (max_horizon < 1) throw std::invalid_argument("horizon_weights: M must be >= 1");
    if (!(eta > 0.0)) throw std::invalid_argument("horizon_weights: eta must be > 0");
    std::vector<double> gamma(static_cast<std::size_t>(max_horizon));
    double norm = 0.0;
    for (int i = 1; i <= max_horizon; ++i) {
        gamma[i - 1] = std::pow(static_cast<double>(i), -eta);
        norm += gamma[i - 1];
    }
    for (double& g : gamma) g /= norm;
    return gamma;
}

inline HorizonWeights make_horizon_weights(int max_horizon, double eta) {
    HorizonWeights hw;
    hw.gamma = horizon_weights(max_horizon, eta);
    const int m = max_horizon;
    // weight_by_age[j] = sum_{i=j+1..M} gamma_i; their total is 1/k.
    hw.weight_by_age.assign(static_cast<std::size_t>(m), 0.0);
    double suffix = 0.0;
    for (int j = m - 1; j >= 0; --j) {
        suffix += hw.gamma[static_cast<std::size_t>(j)];
        hw.weight_by_age[static_cast<std::size_t>(j)] = suffix;
    }
    double total = 0.0;
    for (double w : hw.weight_by_age) total += w;
    hw.k = 1.0 / total;
    return hw;
}

/// R'(t) from the chronological return history (history.back() = R(t)).
/// Uses the O(M) regrouped form k * sum_j weight_by_age[j] * R(t-j).
inline double weighted_return(std::span<const double> history, const HorizonWeights& hw) {
    const int m = hw.horizon();
    if (history.size() < static_cast<std::size_t>(m))
        throw std::invalid_argument("weighted_return: history shorter than horizon M");
    const std::size_t last = history.size() - 1;
    double sum = 0.0;
    for (int j = 0; j < m; ++j)
        sum += hw.weight_by_age[static_cast<std::size_t>(j)] * history[last - static_cast<std::size_t>(j)];
    return hw.k * sum;
}

struct HerdingGroups {
    double degree = 0.0;    // D = |R'|/N
    long group_count = 1;   // 1/D rounded, clamped to [1, N]
};

inline HerdingGroups herding_degree(double r_weighted, long n_agents) {
    if (n_agents < 1) throw std::invalid_argument("herding_degree: N must be >= 1");
    HerdingGroups hg;
    hg.degree = std::fabs(r_weighted) / static_cast<double>(n_agents);
    if (hg.degree > 1.0) throw std::invalid_argument("herding_degree: |R'| exceeds N");
    if (hg.degree > 0.0)
        hg.group_count = std::clamp<long>(std::llround(1.0 / hg.degree), 1, n_agents);
    else
        hg.group_count = n_agents;  // no herding signal: all agents independent
    return hg;
}

/// xi(t): horizon-weighted average of the trailing-mean volatilities
/// V_i(t), relative to the background V_M(t). Neutral (1) when the
/// background volatility vanishes.
inline double perceived_volatility(std::span<const double> vol_history,
                                   const HorizonWeights& hw) {
    const int m = hw.horizon();
    if (vol_history.size() < static_cast<std::size_t>(m))
        throw std::invalid_argument("perceived_volatility: history shorter than horizon M");
    const std::size_t last = vol_history.size() - 1;
    double acc = 0.0;
    double trailing_sum = 0.0;
    for (int i = 1; i <= m; ++i) {
        trailing_sum += vol_history[last - static_cast<std::size_t>(i) + 1];
        acc += hw.gamma[static_cast<std::size_t>(i) - 1] * (trailing_sum / static_cast<double>(i));
    }
    const double background = trailing_sum / static_cast<double>(m);
    return background > 0.0 ? acc / background : 1.0;
}

struct TradingProbabilities {
    double p_buy = 0.0;
    double p_sell = 0.0;
};

/// P_buy = p [c xi + (1 - c)], clamped to [0, 2p]; P_sell takes the
/// remainder so the total trading probability stays exactly 2p.
inline TradingProbabilities trading_probabilities(double xi, double p, double c) {
    const double two_p = 2.0 * p;
    TradingProbabilities tp;
    tp.p_buy = std::clamp(p * (c * xi + (1.0 - c)), 0.0, two_p);
    tp.p_sell = two_p - tp.p_buy;
    return tp;
}

namespace detail {

/// Net demand of one day: the herds draw independent buy/sell/hold
/// decisions and contribute their whole size. Herd sizes are balanced, the
/// first (N mod g) herds taking one extra agent.
template <class Rng>
long draw_net_demand(Rng& rng, long group_count, long n_agents, double p_buy, double two_p) {
    const long base = n_agents / group_count;
    const long remainder = n_agents % group_count;
    long net = 0;
    for (long j = 0; j < group_count; ++j) {
        const long size = base + (j < remainder ? 1 : 0);
        const double u = uniform01(rng);
        if (u < p_buy) net += size;
        else if (u < two_p) net -= size;
    }
    return net;
}

}  // namespace detail

/// One market with its evolving state. Histories are chronological; the
/// first M entries are the Gaussian warmup draws.
class Market {
  public:
    explicit Market(const SimConfig& cfg)
        : cfg_(cfg), hw_(make_horizon_weights(cfg.max_horizon, cfg.eta)), rng_(cfg.seed) {
        cfg_.validate();
        const int m = cfg_.max_horizon;
        returns_.reserve(static_cast<std::size_t>(m + cfg_.total_steps));
        vol_.reserve(static_cast<std::size_t>(m + cfg_.total_steps));
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < m; ++i) {
            const double r = gauss(rng_);
            returns_.push_back(r);
            vol_.push_back(std::fabs(r));
        }
    }

    /// Advances one day and returns R(t).
    double step() {
        const int m = cfg_.max_horizon;
        const std::span<const double> r_hist(returns_.data() + returns_.size() - m,
                                             static_cast<std::size_t>(m));
        const std::span<const double> v_hist(vol_.data() + vol_.size() - m,
                                             static_cast<std::size_t>(m));
        last_weighted_return_ = weighted_return(r_hist, hw_);
        const HerdingGroups hg = herding_degree(last_weighted_return_, cfg_.n_agents);
        last_herding_ = hg;
        last_xi_ = perceived_volatility(v_hist, hw_);
        const TradingProbabilities tp = trading_probabilities(last_xi_, cfg_.p, cfg_.c);
        last_probs_ = tp;
        const long net = detail::draw_net_demand(rng_, hg.group_count, cfg_.n_agents, tp.p_buy,
                                                 2.0 * cfg_.p);
        const double r = static_cast<double>(net);
        returns_.push_back(r);
        vol_.push_back(std::fabs(r));
        return r;
    }

    const SimConfig& config() const { return cfg_; }
    const HorizonWeights& weights() const { return hw_; }
    const std::vector<double>& returns() const { return returns_; }
    double last_weighted_return() const { return last_weighted_return_; }
    const HerdingGroups& last_herding() const { return last_herding_; }
    double last_xi() const { return last_xi_; }
    const TradingProbabilities& last_probabilities() const { return last_probs_; }

  private:
    SimConfig cfg_;
    HorizonWeights hw_;
    std::vector<double> returns_;  // warmup seeds + R(t)
    std::vector<double> vol_;      // V(t) = |R(t)|
    std::mt19937_64 rng_;
    double last_weighted_return_ = 0.0;
    HerdingGroups last_herding_;
    double last_xi_ = 1.0;
    TradingProbabilities last_probs_;
};

/// Runs a full simulation: M Gaussian warmup days, total_steps market days,
/// drop warmup_discard, normalize the rest. Deterministic given the seed.
inline ReturnSeries simulate(const SimConfig& cfg) {
    Market market(cfg);
    for (long t = 0; t < cfg.total_steps; ++t) market.step();
    const auto& all = market.returns();
    const std::size_t begin =
        static_cast<std::size_t>(cfg.max_horizon) + static_cast<std::size_t>(cfg.warmup_discard);
    RawReturnSeries raw;
    raw.values.assign(all.begin() + static_cast<std::ptrdiff_t>(begin), all.end());
    bool constant = true;
    for (double v : raw.values)
        if (v != raw.values.front()) {
            constant = false;
            break;
        }
    if (constant) throw std::runtime_error("degenerate simulation: constant returns");
    return normalize(raw);
}

/// Per-sample seeds for an ensemble run, derived from the base seed and
/// checked for collisions.
inline std::vector<std::uint64_t> ensemble_seeds(std::uint64_t base_seed, int n_samples) {
    if (n_samples < 1) throw std::invalid_argument("ensemble: n_samples must be >= 1");
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i)
        seeds[static_cast<std::size_t>(i)] = derive_seed(base_seed, static_cast<std::uint64_t>(i));
    std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
    if (unique.size() != seeds.size())
        throw std::runtime_error("ensemble: derived seed collision");
    return seeds;
}

/// n_samples independent runs; sample i uses the i-th derived seed, so the
/// result does not depend on scheduling.
inline std::vector<ReturnSeries> ensemble(const SimConfig& cfg, int n_samples,
                                          std::uint64_t base_seed, int jobs = 0) {
    const std::vector<std::uint64_t> seeds = ensemble_seeds(base_seed, n_samples);
    std::vector<ReturnSeries> out(static_cast<std::size_t>(n_samples));
    parallel_for(static_cast<std::size_t>(n_samples), jobs, [&](std::size_t i) {
        SimConfig local = cfg;
        local.seed = seeds[i];
        out[i] = simulate(local);
    });
    return out;
}

}  // namespace nlvr
