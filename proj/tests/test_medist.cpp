#include "dspend/errors.hpp"
#include "dspend/medist.hpp"
#include "oracles.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

using namespace dspend;

namespace {

// Block upper-triangular ME: exponential(a) feeding an Erlang-3 with mean d.
MEDistribution delayed_exponential(double a, double d) {
    Matrix t = Matrix::Zero(4, 4);
    const double r = 3.0 / d;
    for (int i = 0; i < 3; ++i) {
        t(i, i) = -r;
        t(i, i + 1) = r;
    }
    t(3, 3) = -a;
    RowVector v = RowVector::Zero(4);
    v(0) = 1.0;
    return make_me(v, t);
}

}  // namespace

TEST_SUITE("medist") {
    TEST_CASE("exponential law matches its closed forms") {
        const double rate = 0.25;
        const auto e = exponential_me(rate);
        CHECK(e.order() == 1);
        CHECK(e.mean() == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(e.scv() == doctest::Approx(1.0).epsilon(1e-12));
        for (double x : {0.0, 0.5, 3.0, 17.0}) {
            CHECK(e.pdf(x) == doctest::Approx(rate * std::exp(-rate * x)).epsilon(1e-12));
            CHECK(e.cdf(x) == doctest::Approx(1.0 - std::exp(-rate * x)).epsilon(1e-12));
        }
        CHECK(e.mgf(-0.1) == doctest::Approx(rate / (rate + 0.1)).epsilon(1e-13));
    }

    TEST_CASE("Erlang law: mean, scv and cdf against the regularised gamma") {
        for (int k : {1, 2, 5, 27}) {
            const double delta = 3.5;
            const auto e = erlang_me(k, delta);
            CHECK(e.mean() == doctest::Approx(delta).epsilon(1e-13));
            CHECK(std::abs(e.scv() - 1.0 / k) <= 1e-10);
            for (double x : {0.5, 2.0, 3.5, 8.0})
                CHECK(std::abs(e.cdf(x) - boost::math::gamma_p(k, k * x / delta)) <= 1e-10);
        }
    }

    TEST_CASE("construction invariants") {
        const auto d = delayed_exponential(0.5, 2.0);
        CHECK((d.exit() + d.dense_subgen() * Vector::Ones(4)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(d.mgf(0.0) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(d.mean() == doctest::Approx(2.0 + 2.0).epsilon(1e-12));
    }

    TEST_CASE("invalid representations are rejected") {
        Matrix t = Matrix::Constant(1, 1, -1.0);
        CHECK_THROWS_AS(make_me(RowVector::Constant(1, 0.5), t), InvalidArgument);
        CHECK_THROWS_AS(make_me(RowVector::Ones(1), Matrix::Constant(1, 1, 0.5)), InvalidArgument);
        CHECK_THROWS_AS(make_me(RowVector::Ones(2), t), InvalidArgument);
        Matrix nan_t = Matrix::Constant(1, 1, std::nan(""));
        CHECK_THROWS_AS(make_me(RowVector::Ones(1), nan_t), InvalidArgument);
        CHECK_THROWS_AS(exponential_me(0.0), InvalidArgument);
        CHECK_THROWS_AS(erlang_me(0, 1.0), InvalidArgument);
        CHECK_THROWS_AS(exponential_me(1.0).pdf(-1.0), InvalidArgument);
    }

    TEST_CASE("mgf derivative at zero equals the mean") {
        const auto d = delayed_exponential(0.3, 1.5);
        const double h = 1e-5;
        const double slope = (d.mgf(h) - d.mgf(-h)) / (2 * h);
        CHECK(std::abs(slope - d.mean()) <= 1e-6 * d.mean());
    }

    TEST_CASE("pdf is the derivative of the cdf") {
        const auto d = cme(9, 2.0);
        const double h = 1e-4 * 2.0;
        for (double x = 0.4; x < 4.0; x += 0.37) {
            const double numeric = (d.cdf(x + h) - d.cdf(x - h)) / (2 * h);
            CHECK(std::abs(numeric - d.pdf(x)) <= 1e-4 * std::max(1.0, std::abs(d.pdf(x))));
        }
    }

    TEST_CASE("pdf integrates to the cdf by quadrature") {
        using boost::math::quadrature::gauss_kronrod;
        const auto d = delayed_exponential(0.8, 1.0);
        const double x_max = 40.0;
        REQUIRE(d.cdf(x_max) > 1.0 - 1e-8);
        const double integral =
            gauss_kronrod<double, 61>::integrate([&](double x) { return d.pdf(x); }, 0.0, x_max, 15, 1e-12);
        CHECK(std::abs(integral - d.cdf(x_max)) <= 1e-6);
    }

    TEST_CASE("cdf is monotone and bounded on a grid") {
        const auto d = cme(11, 1.0);
        double prev = -1.0;
        for (double x = 0.0; x < 5.0; x += 0.01) {
            const double f = d.cdf(x);
            CHECK(f >= prev - 1e-9);
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
            prev = f;
        }
    }

    TEST_CASE("spectrum over strong components equals the dense spectrum") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.1, 2.0);
        for (int rep = 0; rep < 10; ++rep) {
            // Upper block-triangular with 2x2 rotation blocks.
            const int blocks = 4;
            Matrix t = Matrix::Zero(2 * blocks, 2 * blocks);
            for (int b = 0; b < blocks; ++b) {
                const double a = u(rng), w = u(rng);
                t(2 * b, 2 * b) = -a;
                t(2 * b + 1, 2 * b + 1) = -a;
                t(2 * b, 2 * b + 1) = w;
                t(2 * b + 1, 2 * b) = -w;
                if (b + 1 < blocks) t(2 * b + 1, 2 * b + 2) = u(rng) * 0.1;
            }
            auto fast = spectrum(t.sparseView());
            Eigen::EigenSolver<Matrix> es(t);
            std::vector<std::complex<double>> dense(es.eigenvalues().data(),
                                                    es.eigenvalues().data() + es.eigenvalues().size());
            auto key = [](std::complex<double> a, std::complex<double> b) {
                return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
            };
            std::sort(fast.begin(), fast.end(), key);
            std::sort(dense.begin(), dense.end(), key);
            REQUIRE(fast.size() == dense.size());
            for (std::size_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast[i] - dense[i]) <= 1e-10);
        }
    }

    TEST_CASE("expm of a diagonal and of a rotation") {
        Matrix d = Matrix::Zero(2, 2);
        d(0, 0) = -1.0;
        d(1, 1) = -3.0;
        const Matrix e = expm(d);
        CHECK(e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
        CHECK(e(1, 1) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
        Matrix r(2, 2);
        r << 0.0, 1.0, -1.0, 0.0;
        const Matrix er = expm(r * 0.7);
        CHECK(er(0, 0) == doctest::Approx(std::cos(0.7)).epsilon(1e-13));
        CHECK(er(0, 1) == doctest::Approx(std::sin(0.7)).epsilon(1e-13));
    }

    TEST_CASE("density grid agrees with pointwise pdf and cdf") {
        const auto d = delayed_exponential(0.5, 2.0);
        const auto grid = density_grid(d, 10.0, 51);
        REQUIRE(grid.size() == 51);
        CHECK(grid.back().x == 10.0);
        for (const auto& p : grid) {
            CHECK(std::abs(p.f - d.pdf(p.x)) <= 1e-10);
            CHECK(std::abs(p.F - d.cdf(p.x)) <= 1e-10);
        }
        CHECK_THROWS_AS(density_grid(d, 10.0, 1), InvalidArgument);
    }
}

TEST_SUITE("cme") {
    TEST_CASE("mean is exact and scv within 2.5/K^2") {
        for (int k = 3; k <= 27; k += 2) {
            const auto c = cme(k, 2.0);
            CAPTURE(k);
            CHECK(std::abs(c.mean() - 2.0) <= 1e-9 * 2.0);
            CHECK(c.scv() <= 2.5 / (k * k));
            CHECK(c.scv() < 1.0 / k);
            CHECK(c.order() == k);
        }
    }

    TEST_CASE("shape scv matches the representation") {
        for (int k : {5, 11, 27}) {
            const auto& s = cme_shape(k);
            CHECK(std::abs(cme(k, 1.0).scv() - s.scv) <= 1e-8);
            CHECK(s.decay > 0.0);
        }
    }

    TEST_CASE("approximates a step at delta") {
        const auto c = cme(27, 2.0);
        CHECK(c.cdf(1.0) < 0.01);
        CHECK(c.cdf(3.0) > 0.99);
        CHECK(c.cdf(2.0) == doctest::Approx(0.5).epsilon(0.15));
    }

    TEST_CASE("density is nonnegative up to numerical slack") {
        const auto c = cme(27, 1.0);
        for (const auto& p : density_grid(c, 4.0, 400)) CHECK(p.f >= -1e-9);
    }

    TEST_CASE("order checks and the order-one fallback") {
        CHECK_THROWS_AS(cme(4, 1.0), InvalidArgument);
        CHECK_THROWS_AS(cme(0, 1.0), InvalidArgument);
        CHECK_THROWS_AS(cme(5, -1.0), InvalidArgument);
        const auto one = cme(1, 3.0);
        CHECK(one.order() == 1);
        CHECK(one.mean() == doctest::Approx(3.0));
    }
}
