#include "dspend/doublespend.hpp"
#include "dspend/errors.hpp"
#include "dspend/simulate.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dspend;

namespace {

double combined_sigma(const SimEstimate& a, const SimEstimate& b) {
    return std::sqrt(a.std_err * a.std_err + b.std_err * b.std_err);
}

}  // namespace

TEST_SUITE("simulate") {
    TEST_CASE("zero-delay inter-mining times are exponential") {
        const double alpha = 1.0 / 600.0;
        const InterMiningSampler sampler(zero_delay_profile(alpha));
        auto rng = make_stream(1, 0);
        const int n = 200000;
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = sampler(rng);
            sum += x;
            sq += x * x;
        }
        const double mean = sum / n;
        const double sd = std::sqrt(sq / n - mean * mean);
        CHECK(std::abs(mean - 600.0) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
    }

    TEST_CASE("no honest block while the rate is zero") {
        const HashrateProfile p({0.0, 15.0, 30.0}, {0.0, 0.5}, 0.01);
        auto rng = make_stream(3, 0);
        for (int i = 0; i < 20000; ++i) CHECK(draw_inter_mining_time(p, rng) >= 15.0);
    }

    TEST_CASE("sampler cdf matches the exact survival function") {
        const HashrateProfile p({0.0, 5.0, 40.0, 100.0}, {0.0, 0.4, 0.8}, 1.0 / 200.0);
        const InterMiningSampler sampler(p);
        auto rng = make_stream(5, 0);
        const int n = 200000;
        std::vector<double> draws(n);
        for (auto& x : draws) x = sampler(rng);
        std::sort(draws.begin(), draws.end());
        for (double t : {5.0, 20.0, 40.0, 70.0, 100.0, 300.0}) {
            const double empirical =
                static_cast<double>(std::lower_bound(draws.begin(), draws.end(), t) - draws.begin()) / n;
            const double exact = 1.0 - oracle::profile_survival(p, t);
            CHECK(std::abs(empirical - exact) <= 4.0 * std::sqrt(exact * (1 - exact) / n) + 1e-12);
        }
        // Hazard inversion is exact at segment boundaries.
        CHECK(sampler.sample_from_hazard(0.0) == 5.0);
        CHECK(sampler.sample_from_hazard(0.4 / 200.0 * 35.0) == doctest::Approx(40.0));
    }

    TEST_CASE("config validation") {
        SimConfig c;
        c.trials = 0;
        CHECK_THROWS_AS(simulate_attack(c), InvalidArgument);
        c.trials = 10;
        c.k = 5;
        c.stop_lead = 4;
        CHECK_THROWS_AS(simulate_attack(c), InvalidArgument);
        c.stop_lead = 64;
        c.warmup_blocks = 999;
        CHECK_THROWS_AS(simulate_attack(c), InvalidArgument);
    }

    TEST_CASE("negligible adversary never wins") {
        SimConfig c;
        c.beta = 1e-12 / 600.0;
        c.trials = 2000;
        c.warmup_blocks = 1000;
        for (const auto& e : simulate_attack_sweep(c, 6)) {
            CHECK(e.q_hat == 0.0);
            CHECK(e.std_err == 0.0);
        }
    }

    TEST_CASE("same seed, same estimate; single trial is 0 or 1") {
        SimConfig c;
        c.beta = 0.2 / 600.0;
        c.trials = 3000;
        c.warmup_blocks = 1000;
        c.k = 3;
        const auto a = simulate_attack(c), b = simulate_attack(c);
        CHECK(a.violations == b.violations);
        c.seed = 2;
        c.trials = 1;
        const auto one = simulate_attack(c);
        CHECK((one.q_hat == 0.0 || one.q_hat == 1.0));
    }

    TEST_CASE("zero-delay estimates agree with the analytic q") {
        SimConfig c;
        c.beta = 0.2 / 600.0;
        c.trials = 40000;
        c.warmup_blocks = 1000;
        c.seed = 11;
        const auto sim = simulate_attack_sweep(c, 6);
        AnalysisConfig acfg;
        acfg.k_max = 6;
        const auto ana = analyze(acfg);
        for (std::size_t k = 0; k < 6; ++k) {
            CAPTURE(k + 1);
            CHECK(std::abs(sim[k].q_hat - ana.results[k].q) <= 3.0 * sim[k].std_err);
            CHECK(sim[k].std_err == doctest::Approx(std::sqrt(sim[k].q_hat * (1 - sim[k].q_hat) / c.trials)));
        }
    }

    TEST_CASE("doubling the stop lead does not move the estimate") {
        SimConfig c;
        c.profile = HashrateProfile({0.0, 2.0, 8.0, 20.0}, {0.0, 0.3, 0.7}, 1.0 / 590.0);
        c.beta = 0.2 / 590.0;
        c.delta_conf = 20.0;
        c.trials = 20000;
        c.warmup_blocks = 1000;
        c.k = 2;
        c.stop_lead = 50;
        const auto short_race = simulate_attack(c);
        c.stop_lead = 100;
        c.seed = 99;
        const auto long_race = simulate_attack(c);
        CHECK(std::abs(short_race.q_hat - long_race.q_hat) <= 2.0 * combined_sigma(short_race, long_race));
    }

    TEST_CASE("Lindley chain: empirical lead law") {
        const double rho = 0.2, p = 1.0 / (1.0 + rho);
        auto geometric = [p](SimRng& rng) { return std::geometric_distribution<int>(p)(rng); };
        const std::uint64_t steps = 400000;
        const auto pmf = simulate_lindley(geometric, steps, 7);
        // Successive states are correlated; a tenfold effective-size discount is ample at rho = 0.2.
        const double n_eff = 0.9 * steps / 10.0;
        const double p0 = 1 - rho * rho;
        CHECK(std::abs(pmf[0] - p0) <= 3.0 * std::sqrt(p0 * (1 - p0) / n_eff));
        const double p1 = rho * rho * (1 - rho);
        CHECK(std::abs(pmf[1] - p1) <= 3.0 * std::sqrt(p1 * (1 - p1) / n_eff));

        const auto degenerate = simulate_lindley([](SimRng&) { return 0; }, 100000, 1);
        CHECK(degenerate.size() == 1);
        CHECK(degenerate[0] == 1.0);
        CHECK_THROWS_AS(simulate_lindley(geometric, 1000, 1), InvalidArgument);
    }

    TEST_CASE("Lindley chain matches the analytic lead of a delayed model") {
        const double alpha = 1.0 / 590.0, beta = 0.3 / 590.0;
        const HashrateProfile profile({0.0, 10.0}, {0.0}, alpha);
        const InterMiningSampler theta(profile);
        auto phi_sampler = [&](SimRng& rng) { return std::poisson_distribution<int>(beta * theta(rng))(rng); };
        const std::uint64_t steps = 400000;
        const auto pmf = simulate_lindley(phi_sampler, steps, 21);
        const auto lead = lead_pmf(phi_from_theta(fixed_delay_theta(10.0, alpha, 27), beta, 4), 4);
        const double n_eff = 0.9 * steps / 10.0;
        for (std::size_t n = 0; n < 3; ++n) {
            const double m = lead.masses[n];
            CHECK(std::abs(pmf[n] - m) <= 3.0 * std::sqrt(m * (1 - m) / n_eff));
        }
    }
}
