#pragma once

#include <vector>

namespace dspend {

/// First k coefficients p(0..k-1) of a probability generating function.
class PartialPGF {
public:
    PartialPGF() = default;
    /// Coefficients in [-1e-12, 0) are clamped to zero; anything more negative,
    /// or a total above 1 + 1e-10, throws InvalidArgument.
    explicit PartialPGF(std::vector<double> coefficients);

    /// Coefficients (1, 0, ..., 0).
    static PartialPGF identity(int k);

    int depth() const noexcept { return static_cast<int>(coef_.size()); }
    const std::vector<double>& coefficients() const noexcept { return coef_; }
    double operator[](int n) const { return coef_.at(static_cast<std::size_t>(n)); }
    double total() const noexcept;
    /// sum_n p(n) z^n by Horner's rule.
    double evaluate(double z) const noexcept;

private:
    std::vector<double> coef_;
};

/// {a(z) b(z)}_k: product truncated to degree k-1. Exact for every retained
/// coefficient since discarded cross terms have degree >= k.
PartialPGF truncated_product(const PartialPGF& a, const PartialPGF& b);

/// {a(z)^power}_k by binary exponentiation with truncation after every multiply.
PartialPGF truncated_power(const PartialPGF& a, int power);

}  // namespace dspend
