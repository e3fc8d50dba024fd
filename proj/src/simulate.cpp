#include "dspend/simulate.hpp"

#include "dspend/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <thread>

namespace dspend {

namespace {

int poisson(double mean, SimRng& rng) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<int>(mean)(rng);
}

void validate(const SimConfig& c, int k_max) {
    if (c.trials < 1) throw InvalidArgument("simulation needs at least one trial");
    if (k_max < 1) throw InvalidArgument("k must be >= 1");
    if (c.stop_lead < k_max) throw InvalidArgument("stop_lead must be >= k");
    if (c.warmup_blocks < 1000) throw InvalidArgument("warmup_blocks must be >= 1000");
    if (!(c.beta >= 0.0) || !std::isfinite(c.beta)) throw InvalidArgument("beta must be nonnegative");
    if (!(c.delta_conf >= 0.0)) throw InvalidArgument("delta_conf must be nonnegative");
}

// Violation flags for every k in 1..k_max (bit k-1) from one sample path.
std::uint64_t run_trial(const SimConfig& c, const InterMiningSampler& theta, int k_max, std::uint64_t trial) {
    SimRng rng = make_stream(c.seed, trial);
    auto phi = [&] { return poisson(c.beta * theta(rng), rng); };

    // Pre-mining: lead right after each honest block.
    long lead = 0;
    for (int i = 0; i < c.warmup_blocks; ++i) lead = std::max(lead + phi() - 1, 0L);
    const long late = poisson(c.beta * c.delta_conf, rng);

    std::vector<int> counts;  // adversary blocks per honest interval after tau_0
    counts.reserve(static_cast<std::size_t>(k_max) + 2 * static_cast<std::size_t>(c.stop_lead));
    auto count_at = [&](std::size_t i) {
        while (counts.size() <= i) counts.push_back(phi());
        return counts[i];
    };

    std::uint64_t flags = 0;
    long confirmed = 0;  // adversary blocks in the first k intervals
    for (int k = 1; k <= k_max; ++k) {
        confirmed += count_at(static_cast<std::size_t>(k) - 1);
        long z = (k - 1) - (lead + confirmed + late);
        bool violated = z < 0;
        // Post-confirmation race at the embedded instants; ties go to the
        // adversary, reaching stop_lead counts as safe.
        for (std::size_t i = static_cast<std::size_t>(k); !violated && z < c.stop_lead; ++i) {
            z += 1 - count_at(i);
            violated = z <= 0;
        }
        if (violated) flags |= std::uint64_t{1} << (k - 1);
    }
    return flags;
}

}  // namespace

SimRng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return SimRng(seq);
}

InterMiningSampler::InterMiningSampler(const HashrateProfile& profile)
    : thresholds_(profile.thresholds()), fullrate_(profile.fullrate()) {
    hazard_.push_back(0.0);
    for (int i = 0; i < profile.segments(); ++i) {
        rates_.push_back(profile.fractions()[static_cast<std::size_t>(i)] * fullrate_);
        hazard_.push_back(hazard_.back() + rates_.back() * profile.segment_length(i));
    }
}

double InterMiningSampler::sample_from_hazard(double e) const noexcept {
    if (e >= hazard_.back()) return thresholds_.back() + (e - hazard_.back()) / fullrate_;
    // First threshold whose cumulative hazard exceeds e; zero-rate segments
    // have flat hazard and are skipped by upper_bound.
    const auto it = std::upper_bound(hazard_.begin(), hazard_.end(), e);
    const auto seg = static_cast<std::size_t>(std::distance(hazard_.begin(), it)) - 1;
    return thresholds_[seg] + (e - hazard_[seg]) / rates_[seg];
}

double InterMiningSampler::operator()(SimRng& rng) const {
    return sample_from_hazard(std::exponential_distribution<double>(1.0)(rng));
}

double draw_inter_mining_time(const HashrateProfile& profile, SimRng& rng) { return InterMiningSampler(profile)(rng); }

HashrateProfile zero_delay_profile(double alpha) { return {{0.0, 1.0}, {1.0}, alpha}; }

std::vector<SimEstimate> simulate_attack_sweep(const SimConfig& config, int k_max) {
    validate(config, k_max);
    if (k_max > 64) throw InvalidArgument("simulation sweeps support k <= 64");
    const InterMiningSampler theta(config.profile);

    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 64u));
    std::vector<std::vector<std::uint64_t>> hits(workers, std::vector<std::uint64_t>(static_cast<std::size_t>(k_max)));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                auto& mine = hits[w];
                for (std::uint64_t t = w; t < config.trials; t += workers) {
                    const std::uint64_t flags = run_trial(config, theta, k_max, t);
                    for (int k = 0; k < k_max; ++k)
                        if (flags >> k & 1u) ++mine[static_cast<std::size_t>(k)];
                }
            });
    }

    std::vector<SimEstimate> out;
    for (int k = 1; k <= k_max; ++k) {
        SimEstimate e;
        e.k = k;
        e.trials = config.trials;
        for (const auto& h : hits) e.violations += h[static_cast<std::size_t>(k) - 1];
        e.q_hat = static_cast<double>(e.violations) / static_cast<double>(e.trials);
        e.std_err = std::sqrt(e.q_hat * (1.0 - e.q_hat) / static_cast<double>(e.trials));
        e.regime_notes = fmt::format("warmup={};stop_lead={}", config.warmup_blocks, config.stop_lead);
        out.push_back(std::move(e));
    }
    return out;
}

SimEstimate simulate_attack(const SimConfig& config) {
    // Cells of a sweep are exchangeable in law; the last one is depth config.k.
    return simulate_attack_sweep(config, config.k).back();
}

std::vector<double> simulate_lindley(const std::function<int(SimRng&)>& phi_sampler, std::uint64_t steps,
                                     std::uint64_t seed) {
    if (steps < 100000) throw InvalidArgument("Lindley simulation needs at least 1e5 steps");
    SimRng rng = make_stream(seed, 0);
    const std::uint64_t burn_in = steps / 10;
    std::vector<std::uint64_t> visits;
    long q = 0;
    for (std::uint64_t i = 0; i < steps; ++i) {
        q = std::max(q + phi_sampler(rng) - 1, 0L);
        if (i < burn_in) continue;
        if (visits.size() <= static_cast<std::size_t>(q)) visits.resize(static_cast<std::size_t>(q) + 1, 0);
        ++visits[static_cast<std::size_t>(q)];
    }
    std::vector<double> pmf(visits.size());
    const double kept = static_cast<double>(steps - burn_in);
    for (std::size_t i = 0; i < visits.size(); ++i) pmf[i] = static_cast<double>(visits[i]) / kept;
    return pmf;
}

}  // namespace dspend
