#include "dspend/errors.hpp"
#include "dspend/pgf.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dspend;

namespace {

std::vector<double> random_subprobability(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> c(static_cast<std::size_t>(k));
    double s = 0.0;
    for (auto& x : c) s += (x = u(rng));
    const double scale = u(rng) / s;
    for (auto& x : c) x *= scale;
    return c;
}

std::vector<double> full_convolution(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

}  // namespace

TEST_SUITE("pgf") {
    TEST_CASE("construction checks") {
        CHECK_THROWS_AS(PartialPGF({0.5, -0.1}), InvalidArgument);
        CHECK_THROWS_AS(PartialPGF({0.7, 0.4}), InvalidArgument);
        const PartialPGF clamped({0.5, -1e-13});
        CHECK(clamped[1] == 0.0);
        const auto id = PartialPGF::identity(4);
        CHECK(id.total() == 1.0);
        CHECK(id.evaluate(0.3) == 1.0);
        CHECK_THROWS_AS(PartialPGF::identity(0), InvalidArgument);
    }

    TEST_CASE("Horner evaluation") {
        const PartialPGF p({0.1, 0.2, 0.3});
        CHECK(p.evaluate(0.5) == doctest::Approx(0.1 + 0.1 + 0.075));
        CHECK(p.evaluate(1.0) == doctest::Approx(p.total()));
    }

    TEST_CASE("truncated product is the truncated full convolution") {
        std::mt19937_64 rng(3);
        for (int rep = 0; rep < 50; ++rep) {
            const int k = 1 + rep % 12;
            const auto a = random_subprobability(rng, k), b = random_subprobability(rng, k);
            const auto full = full_convolution(a, b);
            const auto prod = truncated_product(PartialPGF(a), PartialPGF(b));
            for (int n = 0; n < k; ++n) CHECK(std::abs(prod[n] - full[static_cast<std::size_t>(n)]) <= 1e-15);
        }
        CHECK_THROWS_AS(truncated_product(PartialPGF::identity(2), PartialPGF::identity(3)), InvalidArgument);
    }

    TEST_CASE("product is associative and commutative") {
        std::mt19937_64 rng(5);
        for (int rep = 0; rep < 30; ++rep) {
            const int k = 8;
            const PartialPGF a(random_subprobability(rng, k)), b(random_subprobability(rng, k)),
                c(random_subprobability(rng, k));
            const auto left = truncated_product(truncated_product(a, b), c);
            const auto right = truncated_product(a, truncated_product(b, c));
            const auto swapped = truncated_product(b, a);
            const auto ab = truncated_product(a, b);
            for (int n = 0; n < k; ++n) {
                CHECK(std::abs(left[n] - right[n]) <= 1e-14);
                CHECK(std::abs(swapped[n] - ab[n]) <= 1e-15);
            }
        }
    }

    TEST_CASE("power by squaring equals repeated products") {
        std::mt19937_64 rng(9);
        for (int power : {0, 1, 2, 5, 13}) {
            const PartialPGF a(random_subprobability(rng, 7));
            PartialPGF expected = PartialPGF::identity(7);
            for (int i = 0; i < power; ++i) expected = truncated_product(expected, a);
            const auto got = truncated_power(a, power);
            for (int n = 0; n < 7; ++n) CHECK(std::abs(got[n] - expected[n]) <= 1e-14);
        }
        CHECK_THROWS_AS(truncated_power(PartialPGF::identity(2), -1), InvalidArgument);
    }

    TEST_CASE("geometric pgf powers match negative binomial coefficients") {
        const double p = 0.8;
        std::vector<double> g(10);
        for (int n = 0; n < 10; ++n) g[static_cast<std::size_t>(n)] = p * std::pow(1 - p, n);
        const auto cube = truncated_power(PartialPGF(g), 3);
        for (int n = 0; n < 10; ++n) {
            const double nb = (n + 1) * (n + 2) / 2.0 * std::pow(p, 3) * std::pow(1 - p, n);
            CHECK(cube[n] == doctest::Approx(nb).epsilon(1e-13));
        }
    }
}
