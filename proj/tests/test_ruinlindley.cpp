#include "dspend/errors.hpp"
#include "dspend/ruinlindley.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dspend;

namespace {

std::vector<double> padded(std::vector<double> pmf, std::size_t depth) {
    pmf.resize(std::max(pmf.size(), depth), 0.0);
    return pmf;
}

std::vector<double> geometric(double rho, int depth) {
    const double p = 1.0 / (1.0 + rho);
    std::vector<double> g(static_cast<std::size_t>(depth));
    for (int n = 0; n < depth; ++n) g[static_cast<std::size_t>(n)] = p * std::pow(1 - p, n);
    return g;
}

}  // namespace

TEST_SUITE("ruinlindley") {
    TEST_CASE("gambler's ruin and geometric lead for geometric Phi") {
        for (double rho : {0.1, 0.2, 0.3}) {
            const auto g = geometric(rho, 10);
            const PhiPmfView view{g, rho};
            const auto rec = ruin_recursive(view, 10);
            const auto lin = ruin_via_lindley(view, 10);
            const auto lead = lead_pmf(view, 10);
            for (int u = 0; u < 10; ++u) {
                CHECK(std::abs(rec.psi[static_cast<std::size_t>(u)] - std::pow(rho, u + 1)) <= 1e-12);
                CHECK(std::abs(lin.psi[static_cast<std::size_t>(u)] - std::pow(rho, u + 1)) <= 1e-12);
            }
            // Q is geometric beyond an atom: P(Q >= n) = rho^{n+1} for n >= 1.
            CHECK(lead.masses[0] == doctest::Approx(1.0 - rho * rho).epsilon(1e-12));
            for (int n = 1; n < 10; ++n)
                CHECK(std::abs(lead.masses[static_cast<std::size_t>(n)] - std::pow(rho, n + 1) * (1 - rho)) <= 1e-12);
        }
    }

    TEST_CASE("property: both ruin routes and the drift identity on random pmfs") {
        std::mt19937_64 rng(2024);
        for (int rep = 0; rep < 100; ++rep) {
            const auto pmf = oracle::random_stable_pmf(rng);
            const int depth = 20;
            const auto masses = padded(pmf, depth);
            const PhiPmfView view{masses, oracle::pmf_mean(pmf)};
            const auto rec = ruin_recursive(view, depth);
            const auto lin = ruin_via_lindley(view, depth);
            for (int u = 0; u < depth; ++u)
                CHECK(std::abs(rec.psi[static_cast<std::size_t>(u)] - lin.psi[static_cast<std::size_t>(u)]) <= 1e-10);
            const auto lead = lead_pmf(view, depth);
            CHECK(std::abs(lead.masses[0] * pmf[0] - (1.0 - view.mean)) <= 1e-10);
            double total = 0.0;
            for (double m : lead.masses) {
                CHECK(m >= 0.0);
                total += m;
            }
            CHECK(total <= 1.0 + 1e-10);
        }
    }

    TEST_CASE("ruin matches brute-force surplus propagation") {
        std::mt19937_64 rng(77);
        for (int rep = 0; rep < 12; ++rep) {
            auto pmf = oracle::random_stable_pmf(rng);
            const double mean = oracle::pmf_mean(pmf);
            if (mean > 0.7) continue;  // keep the finite horizon representative
            const auto brute = oracle::ruin_by_propagation(pmf, 6, 1500);
            const auto masses = padded(pmf, 6);
            const auto rec = ruin_recursive(PhiPmfView{masses, mean}, 6);
            for (int u = 0; u < 6; ++u)
                CHECK(std::abs(rec.psi[static_cast<std::size_t>(u)] - brute[static_cast<std::size_t>(u)]) <= 1e-9);
        }
    }

    TEST_CASE("lead matches the stationary law of the Lindley chain") {
        std::mt19937_64 rng(5);
        for (int rep = 0; rep < 10; ++rep) {
            auto pmf = oracle::random_stable_pmf(rng);
            const double mean = oracle::pmf_mean(pmf);
            if (mean > 0.7) continue;
            const auto stationary = oracle::lindley_stationary(pmf, 120, 4000);
            const auto masses = padded(pmf, 8);
            const auto lead = lead_pmf(PhiPmfView{masses, mean}, 8);
            for (int n = 0; n < 8; ++n)
                CHECK(std::abs(lead.masses[static_cast<std::size_t>(n)] - stationary[static_cast<std::size_t>(n)]) <=
                      1e-9);
        }
    }

    TEST_CASE("PhiDistribution overloads agree with the view") {
        const double alpha = 1.0 / 600.0;
        const auto phi = phi_from_theta(zero_delay_theta(alpha), 0.2 * alpha, 6);
        const auto ruin = ruin_recursive(phi, 6);
        CHECK(ruin.psi[0] == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(lead_pmf(phi, 6).partial_pgf().depth() == 6);
    }

    TEST_CASE("error conditions") {
        const std::vector<double> heavy{0.2, 0.2, 0.6};
        CHECK_THROWS_AS(ruin_recursive(PhiPmfView{heavy, 1.4}, 3), UnstableRegime);
        CHECK_THROWS_AS(lead_pmf(PhiPmfView{heavy, 1.0}, 3), UnstableRegime);
        const std::vector<double> no_zero{0.0, 1.0};
        CHECK_THROWS_AS(ruin_recursive(PhiPmfView{no_zero, 0.99}, 2), InvalidArgument);
        const std::vector<double> shortpmf{0.9, 0.1};
        CHECK_THROWS_AS(ruin_recursive(PhiPmfView{shortpmf, 0.1}, 3), InvalidArgument);
        CHECK_THROWS_AS(lead_pmf(PhiPmfView{shortpmf, 0.1}, 0), InvalidArgument);
    }
}
