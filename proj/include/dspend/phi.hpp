#pragma once

#include "dspend/medist.hpp"
#include "dspend/pgf.hpp"

#include <memory>
#include <vector>

namespace dspend {

inline constexpr int kMaxDepth = 10000;

/// Adversary blocks mined during one honest inter-mining time.
///
/// p(n) = c A^n b with A = (I - T/beta)^{-1}, c = v A / beta, b = h. A is never
/// formed: applying it is a solve against a sparse LU of I - T/beta, which
/// keeps order ~3500 models cheap. Only p(0..k-1) are computed.
class PhiDistribution {
public:
    const std::vector<double>& masses() const noexcept { return masses_; }
    int depth() const noexcept { return static_cast<int>(masses_.size()); }
    double mass(int n) const { return masses_.at(static_cast<std::size_t>(n)); }
    double mean() const noexcept { return mean_; }
    double beta() const noexcept { return beta_; }

    /// Power-iteration estimate of the spectral radius of A.
    double spectral_radius() const noexcept { return spectral_radius_; }
    const RowVector& c() const noexcept { return c_; }
    const Vector& b() const noexcept { return b_; }
    /// A x via the stored factorisation.
    Vector apply_a(const Vector& x) const;
    /// A materialised column by column; for diagnostics on small orders.
    Matrix a_matrix() const;

    /// 1 - sum_{j<=n} p(j), for 0 <= n < depth().
    double ccdf(int n) const;

    PartialPGF partial_pgf() const { return PartialPGF(masses_); }

    friend PhiDistribution phi_from_theta(const MEDistribution& theta, double beta, int depth);

private:
    struct Factor;
    std::shared_ptr<const Factor> factor_;
    std::vector<double> masses_;
    std::vector<double> ccdf_;
    double mean_ = 0.0;
    double beta_ = 0.0;
    double spectral_radius_ = 0.0;
    RowVector c_;
    Vector b_;
};

PhiDistribution phi_from_theta(const MEDistribution& theta, double beta, int depth);

inline double phi_ccdf(const PhiDistribution& phi, int n) { return phi.ccdf(n); }
inline PartialPGF phi_partial_pgf(const PhiDistribution& phi) { return phi.partial_pgf(); }

}  // namespace dspend
