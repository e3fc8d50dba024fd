#pragma once

#include "dspend/phi.hpp"

#include <span>
#include <vector>

namespace dspend {

/// Stationary lead Q of the Lindley chain Q' = (Q + Phi - 1)^+, p_Q(0..k-1).
struct LeadDistribution {
    std::vector<double> masses;

    PartialPGF partial_pgf() const { return PartialPGF(masses); }
};

/// Ultimate ruin probabilities psi(0..k-1) of the unit-premium surplus process
/// U_n = u + n - sum Phi_i (ruin: U_n <= 0 for some n >= 1).
struct RuinTable {
    std::vector<double> psi;
};

/// The two routes only need p_Phi(0..k-1) and E[Phi]; this view lets them run
/// on arbitrary pmfs (property tests) as well as on a PhiDistribution.
struct PhiPmfView {
    std::span<const double> masses;
    double mean;
};

inline PhiPmfView view_of(const PhiDistribution& phi) { return {phi.masses(), phi.mean()}; }

/// Throws UnstableRegime when E[Phi] >= 1 and InvalidArgument when p_Phi(0) = 0
/// or depth exceeds the available masses.
LeadDistribution lead_pmf(PhiPmfView phi, int depth);
RuinTable ruin_recursive(PhiPmfView phi, int depth);
RuinTable ruin_via_lindley(PhiPmfView phi, int depth);

inline LeadDistribution lead_pmf(const PhiDistribution& phi, int depth) { return lead_pmf(view_of(phi), depth); }
inline RuinTable ruin_recursive(const PhiDistribution& phi, int depth) { return ruin_recursive(view_of(phi), depth); }
inline RuinTable ruin_via_lindley(const PhiDistribution& phi, int depth) { return ruin_via_lindley(view_of(phi), depth); }

}  // namespace dspend
