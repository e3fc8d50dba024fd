#include "dspend/errors.hpp"
#include "dspend/medist.hpp"

#include <boost/math/tools/minima.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace dspend {

namespace {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Gram matrices of the basis exp(-a t / 2) e^{ijt}, j = 0..n, weighted by t^r:
//   G_r[p, q] = int_0^inf t^r exp(-a t) e^{i(q - p)t} dt = r! / (a + i(p - q))^{r+1}.
// A coefficient vector c then has moments c^H G_r c of exp(-a t)|p(e^{it})|^2.
struct Gram {
    ComplexMatrix g0, g1, g2;
};

Gram gram(int n, double a) {
    Gram out{ComplexMatrix(n + 1, n + 1), ComplexMatrix(n + 1, n + 1), ComplexMatrix(n + 1, n + 1)};
    for (int p = 0; p <= n; ++p)
        for (int q = 0; q <= n; ++q) {
            const Complex z(a, static_cast<double>(p - q));
            const Complex inv = 1.0 / z;
            out.g0(p, q) = inv;
            out.g1(p, q) = inv * inv;
            out.g2(p, q) = 2.0 * inv * inv * inv;
        }
    return out;
}

// min_c E[(X - mu)^2] / mu^2 over the family; equals scv/(1 + scv) at the
// optimal mu, so minimising it over mu minimises the scv.
double centred_ratio(const Gram& g, double mu, ComplexVector* best = nullptr) {
    const ComplexMatrix lhs = g.g2 - 2.0 * mu * g.g1 + mu * mu * g.g0;
    Eigen::GeneralizedSelfAdjointEigenSolver<ComplexMatrix> es(lhs, g.g0);
    if (es.info() != Eigen::Success) throw NumericalError("CME shape search: eigen solver failed");
    if (best) *best = es.eigenvectors().col(0);
    return es.eigenvalues()(0) / (mu * mu);
}

constexpr int kSearchBits = 40;
constexpr double kMuLo = 0.3;
constexpr double kMuHi = 3.0 * std::numbers::pi;

std::pair<double, double> best_centre(const Gram& g) {
    auto f = [&](double mu) { return centred_ratio(g, mu); };
    return boost::math::tools::brent_find_minima(f, kMuLo, kMuHi, kSearchBits);
}

CmeShape build_shape(int order) {
    const int n = (order - 1) / 2;
    auto objective = [n](double a) { return best_centre(gram(n, a)).second; };
    const double decay = boost::math::tools::brent_find_minima(objective, 0.01, 8.0, kSearchBits).first;

    const Gram g = gram(n, decay);
    ComplexVector c;
    centred_ratio(g, best_centre(g).first, &c);

    const double m0 = (c.adjoint() * g.g0 * c)(0).real();
    const double m1 = (c.adjoint() * g.g1 * c)(0).real();
    const double m2 = (c.adjoint() * g.g2 * c)(0).real();

    CmeShape shape;
    shape.order = order;
    shape.decay = decay;
    shape.mean = m1 / m0;
    shape.scv = m2 * m0 / (m1 * m1) - 1.0;

    // |p(e^{it})|^2 = r_0 + sum_{d>=1} 2 Re(r_d e^{idt}),  r_d = sum_j c_{j+d} conj(c_j).
    shape.cos_coef.assign(static_cast<std::size_t>(n), 0.0);
    shape.sin_coef.assign(static_cast<std::size_t>(n), 0.0);
    shape.constant = c.squaredNorm() / m0;
    for (int d = 1; d <= n; ++d) {
        Complex r{0.0, 0.0};
        for (int j = 0; j + d <= n; ++j) r += c(j + d) * std::conj(c(j));
        shape.cos_coef[static_cast<std::size_t>(d - 1)] = 2.0 * r.real() / m0;
        shape.sin_coef[static_cast<std::size_t>(d - 1)] = -2.0 * r.imag() / m0;
    }
    return shape;
}

}  // namespace

const CmeShape& cme_shape(int order) {
    if (order < 1 || order % 2 == 0) throw InvalidArgument("CME order must be odd and positive, got " + std::to_string(order));
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<const CmeShape>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) {
        if (order == 1) {
            auto s = std::make_unique<CmeShape>();
            slot = std::move(s);
        } else {
            slot = std::make_unique<const CmeShape>(build_shape(order));
        }
    }
    return *slot;
}

MEDistribution cme(int order, double delta) {
    if (order < 1 || order % 2 == 0) throw InvalidArgument("CME order must be odd and positive, got " + std::to_string(order));
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("CME mean must be positive");
    if (order == 1) {
        spdlog::info("cme: order 1 requested, using the exponential law with mean {}", delta);
        return exponential_me(1.0 / delta);
    }

    const CmeShape& shape = cme_shape(order);
    const int n = (order - 1) / 2;
    const double a = shape.decay;

    // Block diagonal: [-a] and, per harmonic d, [[-a, d], [-d, -a]], whose
    // exponential is exp(-a t) times a rotation by d t. The initial vector is
    // matched so that v exp(Tt) h reproduces the shape's Fourier coefficients.
    std::vector<Triplet> entries;
    RowVector v(order);
    entries.emplace_back(0, 0, -a);
    v(0) = shape.constant / a;
    for (int d = 1; d <= n; ++d) {
        const int i = 2 * d - 1;
        entries.emplace_back(i, i, -a);
        entries.emplace_back(i, i + 1, static_cast<double>(d));
        entries.emplace_back(i + 1, i, -static_cast<double>(d));
        entries.emplace_back(i + 1, i + 1, -a);
        // cos coefficient: v1 h1 + v2 h2, sin coefficient: v1 h2 - v2 h1
        const double h1 = a - d, h2 = a + d;
        const double alpha = shape.cos_coef[static_cast<std::size_t>(d - 1)];
        const double beta = shape.sin_coef[static_cast<std::size_t>(d - 1)];
        const double det = h1 * h1 + h2 * h2;
        v(i) = (alpha * h1 + beta * h2) / det;
        v(i + 1) = (alpha * h2 - beta * h1) / det;
    }
    v /= v.sum();

    SparseMatrix t(order, order);
    t.setFromTriplets(entries.begin(), entries.end());
    t *= shape.mean / delta;
    return make_me(std::move(v), std::move(t));
}

}  // namespace dspend
