#pragma once

#include "dspend/delaymodel.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace dspend {

/// Per-trial random stream: std::mt19937_64 seeded through std::seed_seq from
/// the four 32-bit halves of (seed, stream). Streams for distinct (seed, stream)
/// pairs are statistically independent for simulation purposes.
using SimRng = std::mt19937_64;
SimRng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Exact sampler of the honest inter-mining time: first event of a Poisson
/// process whose rate follows the piecewise-constant hashrate profile.
class InterMiningSampler {
public:
    explicit InterMiningSampler(const HashrateProfile& profile);

    /// Inverts the cumulative hazard at an Exp(1) variate.
    double operator()(SimRng& rng) const;
    double sample_from_hazard(double hazard) const noexcept;

private:
    std::vector<double> thresholds_;
    std::vector<double> rates_;
    std::vector<double> hazard_;  ///< cumulative hazard at each threshold
    double fullrate_;
};

double draw_inter_mining_time(const HashrateProfile& profile, SimRng& rng);

/// Profile with full rate from t = 0 on, i.e. the zero-delay model.
HashrateProfile zero_delay_profile(double alpha);

struct SimConfig {
    HashrateProfile profile = zero_delay_profile(1.0 / 600.0);
    double beta = 0.0;
    int k = 1;
    double delta_conf = 0.0;
    int warmup_blocks = 10000;
    int stop_lead = 64;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
};

struct SimEstimate {
    int k = 0;
    double q_hat = 0.0;
    double std_err = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t violations = 0;
    std::string regime_notes;
};

/// Monte Carlo estimate of the double-spend probability at depth config.k.
SimEstimate simulate_attack(const SimConfig& config);

/// Estimates for k = 1..k_max from shared sample paths: each trial draws one
/// pre-mining lead, one Poisson(beta * delta_conf) count and one sequence of
/// honest intervals; depth k confirms after the first k intervals and races on
/// the ones after. Every cell has the law of an independent run.
std::vector<SimEstimate> simulate_attack_sweep(const SimConfig& config, int k_max);

/// Empirical stationary pmf of Q' = (Q + Phi - 1)^+ from one trajectory
/// started at 0, discarding the first 10% of steps.
std::vector<double> simulate_lindley(const std::function<int(SimRng&)>& phi_sampler, std::uint64_t steps,
                                     std::uint64_t seed);

}  // namespace dspend
