#include "dspend/phi.hpp"

#include "dspend/errors.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <string>

namespace dspend {

// The solves run in long double: CME blocks have alternating coefficients of
// order 10^2, and over ~100 coupled segments double precision loses enough to
// push the mass total past 1 + 1e-10.
using Wide = long double;
using WideVector = Eigen::Matrix<Wide, Eigen::Dynamic, 1>;
using WideSparse = Eigen::SparseMatrix<Wide>;
// T is block upper triangular in its natural order, so no fill-reducing
// permutation is needed and none would help.
using WideLU = Eigen::SparseLU<WideSparse, Eigen::NaturalOrdering<int>>;

struct PhiDistribution::Factor {
    WideLU lu;  // I - T / beta
};

namespace {

constexpr double kNegativeMassTol = 1e-12;
constexpr int kPowerIterations = 500;

double power_iteration_radius(const PhiDistribution& phi, Index m) {
    Vector x = Vector::Ones(m) / std::sqrt(static_cast<double>(m));
    double log_growth = 0.0, log_growth_half = 0.0;
    const int half = kPowerIterations / 2;
    for (int i = 1; i <= kPowerIterations; ++i) {
        x = phi.apply_a(x);
        const double norm = x.norm();
        if (norm == 0.0 || !std::isfinite(norm)) return norm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        log_growth += std::log(norm);
        x /= norm;
        if (i == half) log_growth_half = log_growth;
    }
    return std::exp((log_growth - log_growth_half) / (kPowerIterations - half));
}

}  // namespace

Vector PhiDistribution::apply_a(const Vector& x) const {
    const WideVector y = factor_->lu.solve(x.cast<Wide>());
    return y.cast<double>();
}

Matrix PhiDistribution::a_matrix() const {
    const Index m = b_.size();
    Matrix out(m, m);
    for (Index j = 0; j < m; ++j) out.col(j) = apply_a(Vector::Unit(m, j));
    return out;
}

double PhiDistribution::ccdf(int n) const {
    if (n < 0 || n >= depth())
        throw InvalidArgument("ccdf index " + std::to_string(n) + " outside [0, " + std::to_string(depth()) + ")");
    return ccdf_[static_cast<std::size_t>(n)];
}

PhiDistribution phi_from_theta(const MEDistribution& theta, double beta, int depth) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("adversary rate beta must be positive");
    if (depth < 1 || depth > kMaxDepth)
        throw InvalidArgument("depth must lie in [1, " + std::to_string(kMaxDepth) + "]");

    const Index m = theta.order();
    const Wide wbeta = beta;
    const WideSparse t = theta.subgen().cast<Wide>();
    WideSparse eye(m, m);
    eye.setIdentity();
    WideSparse shifted = eye - t / wbeta;
    shifted.makeCompressed();

    auto factor = std::make_shared<PhiDistribution::Factor>();
    factor->lu.compute(shifted);
    if (factor->lu.info() != Eigen::Success) throw NumericalError("I - T/beta is singular");

    // The exit vector is recomputed from T at the working precision.
    const WideVector b = -(t * WideVector::Ones(m));
    const WideVector c = factor->lu.transpose().solve(WideVector(theta.init().transpose().cast<Wide>())) / wbeta;

    PhiDistribution phi;
    phi.factor_ = factor;
    phi.beta_ = beta;
    phi.b_ = b.cast<double>();
    phi.c_ = c.cast<double>().transpose();

    phi.spectral_radius_ = power_iteration_radius(phi, m);
    if (!(phi.spectral_radius_ < 1.0))
        throw NumericalError("spectral radius of A is " + std::to_string(phi.spectral_radius_) + " >= 1");

    phi.masses_.resize(static_cast<std::size_t>(depth));
    phi.ccdf_.resize(static_cast<std::size_t>(depth));
    WideVector y = b;
    Wide cumulative = 0.0L;
    for (int n = 0; n < depth; ++n) {
        if (n > 0) y = factor->lu.solve(y);
        const Wide wp = c.dot(y);
        auto p = static_cast<double>(wp);
        if (p < -kNegativeMassTol) throw NumericalError("negative Phi mass at n = " + std::to_string(n));
        p = std::max(p, 0.0);
        phi.masses_[static_cast<std::size_t>(n)] = p;
        cumulative += std::max(wp, 0.0L);
        phi.ccdf_[static_cast<std::size_t>(n)] = std::max(0.0, static_cast<double>(1.0L - cumulative));
    }

    // E[Phi] = c A (I - A)^{-2} b. With A = (I - T/beta)^{-1},
    // (I - A) x = r  <=>  T x = -beta (I - T/beta) r, so each (I - A) solve is
    // a multiply by I - T/beta followed by a solve against T.
    WideLU t_lu(t);
    if (t_lu.info() != Eigen::Success) throw NumericalError("sub-generator is singular");
    auto solve_i_minus_a = [&](const WideVector& r) -> WideVector {
        const WideVector rhs = -wbeta * (shifted * r);
        return t_lu.solve(rhs);
    };
    const WideVector x2 = solve_i_minus_a(solve_i_minus_a(b));
    phi.mean_ = static_cast<double>(c.dot(factor->lu.solve(x2)));
    if (!std::isfinite(phi.mean_)) throw NumericalError("I - A is singular");
    phi.mean_ = std::max(phi.mean_, 0.0);
    return phi;
}

}  // namespace dspend
