#include "dspend/pgf.hpp"

#include "dspend/errors.hpp"
#include "dspend/linalg.hpp"

#include <string>

namespace dspend {

PartialPGF::PartialPGF(std::vector<double> coefficients) : coef_(std::move(coefficients)) {
    for (auto& c : coef_) {
        if (!(c >= -1e-12)) throw InvalidArgument("pgf coefficient " + std::to_string(c) + " is negative");
        if (c < 0.0) c = 0.0;
    }
    if (total() > 1.0 + 1e-10) throw InvalidArgument("pgf coefficients sum to " + std::to_string(total()) + " > 1");
}

PartialPGF PartialPGF::identity(int k) {
    if (k < 1) throw InvalidArgument("pgf depth must be >= 1");
    std::vector<double> c(static_cast<std::size_t>(k), 0.0);
    c[0] = 1.0;
    return PartialPGF(std::move(c));
}

double PartialPGF::total() const noexcept { return compensated_sum(coef_); }

double PartialPGF::evaluate(double z) const noexcept {
    double acc = 0.0;
    for (auto it = coef_.rbegin(); it != coef_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

PartialPGF truncated_product(const PartialPGF& a, const PartialPGF& b) {
    if (a.depth() != b.depth())
        throw InvalidArgument("pgf depth mismatch: " + std::to_string(a.depth()) + " vs " + std::to_string(b.depth()));
    const auto k = static_cast<std::size_t>(a.depth());
    const auto& x = a.coefficients();
    const auto& y = b.coefficients();
    std::vector<double> out(k);
    for (std::size_t n = 0; n < k; ++n) {
        CompensatedSum acc;
        for (std::size_t j = 0; j <= n; ++j) acc += x[j] * y[n - j];
        out[n] = acc.value();
    }
    return PartialPGF(std::move(out));
}

PartialPGF truncated_power(const PartialPGF& a, int power) {
    if (power < 0) throw InvalidArgument("pgf power must be nonnegative");
    PartialPGF result = PartialPGF::identity(a.depth());
    PartialPGF base = a;
    while (power > 0) {
        if (power & 1) result = truncated_product(result, base);
        power >>= 1;
        if (power > 0) base = truncated_product(base, base);
    }
    return result;
}

}  // namespace dspend
