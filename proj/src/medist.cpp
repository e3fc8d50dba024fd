#include "dspend/medist.hpp"

#include "dspend/errors.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dspend {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kSpectrumTol = 1e-8;

void require_finite(const SparseMatrix& m) {
    for (Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            if (!std::isfinite(it.value())) throw InvalidArgument("sub-generator has a non-finite entry");
}

}  // namespace

std::vector<std::complex<double>> spectrum(const SparseMatrix& subgen) {
    using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
    const auto n = static_cast<std::size_t>(subgen.rows());
    Graph g(n);
    for (Index k = 0; k < subgen.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(subgen, k); it; ++it)
            if (it.row() != it.col() && it.value() != 0.0)
                boost::add_edge(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()), g);

    std::vector<int> component(n);
    const int count = boost::strong_components(g, component.data());
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(component[i])].push_back(static_cast<Index>(i));

    // Under a permutation to block-triangular form the diagonal blocks are the
    // components, so their spectra together are the spectrum of the whole matrix.
    const Matrix dense_cache = n <= 64 ? Matrix(subgen) : Matrix();
    std::vector<std::complex<double>> eig;
    eig.reserve(n);
    for (const auto& idx : members) {
        const auto b = static_cast<Index>(idx.size());
        if (b == 1) {
            eig.emplace_back(subgen.coeff(idx[0], idx[0]), 0.0);
            continue;
        }
        Matrix block(b, b);
        for (Index r = 0; r < b; ++r)
            for (Index c = 0; c < b; ++c)
                block(r, c) = dense_cache.size() ? dense_cache(idx[r], idx[c]) : subgen.coeff(idx[r], idx[c]);
        Eigen::EigenSolver<Matrix> solver(block, false);
        if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
        for (Index i = 0; i < b; ++i) eig.push_back(solver.eigenvalues()(i));
    }
    return eig;
}

MEDistribution::MEDistribution(RowVector init, const Matrix& subgen)
    : MEDistribution(std::move(init), SparseMatrix(subgen.sparseView())) {}

MEDistribution::MEDistribution(RowVector init, SparseMatrix subgen) : init_(std::move(init)), subgen_(std::move(subgen)) {
    const Index m = init_.size();
    if (m < 1) throw InvalidArgument("ME distribution needs order >= 1");
    if (subgen_.rows() != m || subgen_.cols() != m)
        throw InvalidArgument("dimension mismatch: init has " + std::to_string(m) + " entries, sub-generator is " +
                              std::to_string(subgen_.rows()) + "x" + std::to_string(subgen_.cols()));
    if (!init_.allFinite()) throw InvalidArgument("initial vector has a non-finite entry");
    require_finite(subgen_);
    subgen_.makeCompressed();

    const double mass = init_.sum();
    if (std::abs(mass - 1.0) > kMassTol)
        throw InvalidArgument("initial vector mass is " + std::to_string(mass) + ", expected 1");

    const auto eig = spectrum(subgen_);
    double radius = 0.0, abscissa = -std::numeric_limits<double>::infinity();
    for (const auto& l : eig) {
        radius = std::max(radius, std::abs(l));
        abscissa = std::max(abscissa, l.real());
    }
    if (!(abscissa < -kSpectrumTol * radius) || abscissa >= 0.0)
        throw InvalidArgument("sub-generator has an eigenvalue with nonnegative real part (" + std::to_string(abscissa) +
                              ")");

    exit_ = -(subgen_ * Vector::Ones(m));

    Eigen::SparseLU<SparseMatrix, Eigen::NaturalOrdering<int>> lu(subgen_);
    if (lu.info() != Eigen::Success) throw NumericalError("internal error: sub-generator is singular");
    const Vector y = lu.solve(Vector::Ones(m));
    const Vector z = lu.solve(y);
    mean_ = -init_.dot(y);
    second_moment_ = 2.0 * init_.dot(z);
    if (!(std::isfinite(mean_) && mean_ > 0.0))
        throw InvalidArgument("ME mean must be positive and finite, got " + std::to_string(mean_));
}

double MEDistribution::scv() const noexcept { return (second_moment_ - mean_ * mean_) / (mean_ * mean_); }

double MEDistribution::mgf(double s) const {
    SparseMatrix shifted = subgen_;
    for (Index i = 0; i < order(); ++i) shifted.coeffRef(i, i) += s;
    Eigen::SparseLU<SparseMatrix, Eigen::NaturalOrdering<int>> lu(shifted);
    if (lu.info() != Eigen::Success) throw NumericalError("sI + T is singular at s = " + std::to_string(s));
    const Vector x = lu.solve(exit_);
    if (!x.allFinite()) throw NumericalError("sI + T is singular at s = " + std::to_string(s));
    return -init_.dot(x);
}

double MEDistribution::pdf(double x) const {
    if (x < 0.0) throw InvalidArgument("pdf argument must be nonnegative");
    const RowVector row = init_ * expm(dense_subgen() * x);
    return row.dot(exit_);
}

double MEDistribution::cdf(double x) const {
    if (x < 0.0) throw InvalidArgument("cdf argument must be nonnegative");
    const RowVector row = init_ * expm(dense_subgen() * x);
    return std::clamp(1.0 - row.sum(), 0.0, 1.0);
}

Matrix expm(const Matrix& a) {
    Matrix out = a.exp();
    if (!out.allFinite()) throw NumericalError("matrix exponential overflowed");
    return out;
}

std::vector<DensityPoint> density_grid(const MEDistribution& d, double x_max, int points) {
    if (!(x_max > 0.0) || points < 2) throw InvalidArgument("density grid needs x_max > 0 and at least 2 points");
    const double step = x_max / (points - 1);
    const Matrix propagator = expm(d.dense_subgen() * step);
    std::vector<DensityPoint> out;
    out.reserve(static_cast<std::size_t>(points));
    RowVector row = d.init();
    for (int i = 0; i < points; ++i) {
        const double x = i == points - 1 ? x_max : step * i;
        out.push_back({x, row.dot(d.exit()), std::clamp(1.0 - row.sum(), 0.0, 1.0)});
        row = row * propagator;
    }
    return out;
}

MEDistribution make_me(RowVector init, const Matrix& subgen) { return {std::move(init), subgen}; }
MEDistribution make_me(RowVector init, SparseMatrix subgen) { return {std::move(init), std::move(subgen)}; }

MEDistribution exponential_me(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument("exponential rate must be positive");
    return make_me(RowVector::Ones(1), Matrix::Constant(1, 1, -rate));
}

MEDistribution erlang_me(int order, double delta) {
    if (order < 1) throw InvalidArgument("Erlang order must be >= 1");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("Erlang mean must be positive");
    const double rate = order / delta;
    std::vector<Triplet> entries;
    for (int i = 0; i < order; ++i) {
        entries.emplace_back(i, i, -rate);
        if (i + 1 < order) entries.emplace_back(i, i + 1, rate);
    }
    SparseMatrix t(order, order);
    t.setFromTriplets(entries.begin(), entries.end());
    RowVector v = RowVector::Zero(order);
    v(0) = 1.0;
    return make_me(std::move(v), std::move(t));
}

}  // namespace dspend
