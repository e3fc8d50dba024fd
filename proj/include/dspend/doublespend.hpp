#pragma once

#include "dspend/delaymodel.hpp"
#include "dspend/pgf.hpp"
#include "dspend/phi.hpp"
#include "dspend/ruinlindley.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dspend {

enum class Regime {
    Stable,    ///< E[Phi] < 1
    Unstable,  ///< E[Phi] >= 1, every attack succeeds
};

struct DoubleSpendResult {
    int k = 0;
    double q = 0.0;
    PartialPGF p_v;           ///< adversary lead V at confirmation
    std::vector<double> p_z;  ///< honest lead Z = k - 1 - V, indices 0..k-1
    double deficit_mass = 0.0;  ///< P(Z < 0) = P(V >= k)
    Regime regime = Regime::Stable;
    std::string model_tag;
};

/// Poisson(lambda) masses n < k, evaluated in log space.
PartialPGF poisson_partial_pgf(double lambda, int k);

/// {G_Q G_Phi^k G_Delta}_k with G_Delta the Poisson(delta_conf * beta) pgf.
PartialPGF adversary_lead_pmf(const LeadDistribution& lead, const PhiDistribution& phi, double delta_conf,
                              double beta, int k);

struct HonestLead {
    std::vector<double> p_z;
    double deficit_mass = 0.0;
};

/// p_Z(i) = p_V(k-1-i); the deficit is the mass of V beyond k-1.
HonestLead honest_lead_pmf(const PartialPGF& p_v);

/// q = 1 - sum_u p_Z(u) (1 - psi(u)).
DoubleSpendResult compute_q(const HonestLead& z, const RuinTable& ruin);

// Delay models. Each has a single free honest rate, calibrated so that the
// mean inter-mining time equals the block interval.
struct ZeroDelay {};
struct FixedDelay {
    double delay;
};
/// Delay ~ exponential(rate) during which honest mining is off.
struct ExpDelay {
    double rate;
};
struct MEDelay {
    MEDistribution delay;
};
struct VariableDelay {
    HashrateProfile profile;
};
using DelayModel = std::variant<ZeroDelay, FixedDelay, ExpDelay, MEDelay, VariableDelay>;

std::string model_tag(const DelayModel& model, int cme_order);

struct AnalysisConfig {
    DelayModel model = ZeroDelay{};
    double beta_fraction = 0.2;
    double block_interval = 600.0;
    int k_max = 6;
    int cme_order = kDefaultCmeOrder;
    /// Defaults: 0 for zero delay, the delay for fixed delay, Delta_N for the
    /// variable model; required for the random-delay models.
    std::optional<double> delta_conf;
    double calibration_tol = kDefaultCalibrationTol;
};

struct Analysis {
    CalibrationResult calibration;
    double alpha = 0.0;  ///< calibrated full honest rate
    double beta = 0.0;
    double mean_phi = 0.0;
    double delta_conf = 0.0;
    Index theta_order = 0;
    Regime regime = Regime::Stable;
    std::string model_tag;
    std::vector<DoubleSpendResult> results;  ///< k = 1..k_max
};

/// Inter-mining law of the model at full honest rate alpha.
MEDistribution build_theta(const DelayModel& model, double alpha, int cme_order);

/// Full pipeline: calibrate, build Theta and Phi once at depth k_max, then q
/// for every k. beta_fraction = 0 yields q = 0 throughout.
Analysis analyze(const AnalysisConfig& config);

}  // namespace dspend
