#include "dspend/ruinlindley.hpp"

#include "dspend/errors.hpp"

#include <algorithm>
#include <string>

namespace dspend {

namespace {

// Validates and returns the ccdf F(n) = 1 - sum_{j<=n} p(j), n < depth.
std::vector<double> checked_ccdf(PhiPmfView phi, int depth) {
    if (depth < 1) throw InvalidArgument("depth must be >= 1");
    if (static_cast<std::size_t>(depth) > phi.masses.size())
        throw InvalidArgument("depth " + std::to_string(depth) + " exceeds the " + std::to_string(phi.masses.size()) +
                              " available Phi masses");
    if (!(phi.mean < 1.0)) throw UnstableRegime(phi.mean);
    if (!(phi.masses[0] > 0.0)) throw InvalidArgument("p_Phi(0) must be positive");
    std::vector<double> ccdf(static_cast<std::size_t>(depth));
    CompensatedSum acc;
    for (std::size_t n = 0; n < ccdf.size(); ++n) {
        acc += phi.masses[n];
        ccdf[n] = std::max(0.0, 1.0 - acc.value());
    }
    return ccdf;
}

}  // namespace

LeadDistribution lead_pmf(PhiPmfView phi, int depth) {
    const auto ccdf = checked_ccdf(phi, depth);
    const double p0 = phi.masses[0];
    LeadDistribution lead;
    lead.masses.resize(static_cast<std::size_t>(depth));
    lead.masses[0] = (1.0 - phi.mean) / p0;
    for (std::size_t n = 1; n < lead.masses.size(); ++n) {
        CompensatedSum acc;
        for (std::size_t j = 0; j < n; ++j) acc += lead.masses[j] * ccdf[n - j];
        lead.masses[n] = std::max(0.0, acc.value() / p0);
    }
    return lead;
}

RuinTable ruin_recursive(PhiPmfView phi, int depth) {
    const auto ccdf = checked_ccdf(phi, depth);
    const double p0 = phi.masses[0];
    RuinTable ruin;
    ruin.psi.resize(static_cast<std::size_t>(depth));
    ruin.psi[0] = phi.mean;
    // psi(u) = E + sum_{j=0}^{u-1} F(j) (psi(u-j) - 1). The j = 0 term holds
    // psi(u) itself; moving it left leaves a factor 1 - F(0) = p(0).
    for (std::size_t u = 1; u < ruin.psi.size(); ++u) {
        CompensatedSum acc;
        acc += phi.mean;
        for (std::size_t j = 0; j < u; ++j) acc += -ccdf[j];
        for (std::size_t j = 1; j < u; ++j) acc += ccdf[j] * ruin.psi[u - j];
        ruin.psi[u] = std::clamp(acc.value() / p0, 0.0, 1.0);
    }
    return ruin;
}

RuinTable ruin_via_lindley(PhiPmfView phi, int depth) {
    const auto lead = lead_pmf(phi, depth);
    RuinTable ruin;
    ruin.psi.resize(static_cast<std::size_t>(depth));
    ruin.psi[0] = phi.mean;
    CompensatedSum below;
    for (std::size_t u = 1; u < ruin.psi.size(); ++u) {
        below += lead.masses[u - 1];
        ruin.psi[u] = std::clamp(1.0 - below.value(), 0.0, 1.0);
    }
    return ruin;
}

}  // namespace dspend
