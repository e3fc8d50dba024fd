#pragma once

#include "dspend/linalg.hpp"

#include <complex>
#include <vector>

namespace dspend {

/// Matrix-exponential law ME(v, T) with density -v exp(Tx) T e.
///
/// The sub-generator is held sparse: the inter-mining laws assembled in
/// delaymodel reach order ~3500 but have only O(N K^2) nonzeros. Instances are
/// validated on construction and immutable afterwards.
class MEDistribution {
public:
    /// Validates dimensions, unit initial mass, spectrum and mean; throws
    /// InvalidArgument or NumericalError.
    MEDistribution(RowVector init, SparseMatrix subgen);
    MEDistribution(RowVector init, const Matrix& subgen);

    Index order() const noexcept { return init_.size(); }
    const RowVector& init() const noexcept { return init_; }
    const SparseMatrix& subgen() const noexcept { return subgen_; }
    const Vector& exit() const noexcept { return exit_; }
    Matrix dense_subgen() const { return Matrix(subgen_); }

    double mean() const noexcept { return mean_; }
    double second_moment() const noexcept { return second_moment_; }
    double scv() const noexcept;

    /// E[exp(sX)] = -v (sI + T)^{-1} h.
    double mgf(double s) const;
    double pdf(double x) const;
    double cdf(double x) const;

private:
    RowVector init_;
    SparseMatrix subgen_;
    Vector exit_;
    double mean_ = 0.0;
    double second_moment_ = 0.0;
};

MEDistribution make_me(RowVector init, const Matrix& subgen);
MEDistribution make_me(RowVector init, SparseMatrix subgen);

/// Exponential law with the given rate, as an order-1 ME.
MEDistribution exponential_me(double rate);

/// Erlang-K with mean delta (scv 1/K).
MEDistribution erlang_me(int order, double delta);

/// Concentrated ME approximation of the constant delta; order must be odd.
/// Order 1 falls back to the exponential with mean delta.
MEDistribution cme(int order, double delta);

/// Eigenvalues of the sub-generator, computed blockwise over the strongly
/// connected components of its sparsity graph.
std::vector<std::complex<double>> spectrum(const SparseMatrix& subgen);

/// Dense matrix exponential (scaling and squaring with Pade approximants).
Matrix expm(const Matrix& a);

struct DensityPoint {
    double x;
    double f;
    double F;
};

/// pdf/cdf on the uniform grid 0, x_max/(points-1), ..., x_max, obtained by
/// propagating v through a single exp(T h) step matrix.
std::vector<DensityPoint> density_grid(const MEDistribution& d, double x_max, int points);

/// Normalised shape of the concentrated ME family of a given odd order.
///
/// Density on the unit-frequency time axis:
///   f(t) = exp(-decay t) [c_0 + sum_{j=1}^n (a_j cos(jt) + b_j sin(jt))],
/// i.e. exp(-decay t) |p(e^{it})|^2 for a degree-n polynomial p, n = (K-1)/2.
/// decay and p are chosen to minimise the scv.
struct CmeShape {
    int order = 1;
    double decay = 1.0;
    double constant = 1.0;
    std::vector<double> cos_coef;
    std::vector<double> sin_coef;
    double mean = 1.0;  ///< on the unit-frequency axis
    double scv = 1.0;
};

/// Cached per order; safe to call concurrently.
const CmeShape& cme_shape(int order);

}  // namespace dspend
