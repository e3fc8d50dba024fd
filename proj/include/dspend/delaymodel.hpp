#pragma once

#include "dspend/medist.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dspend {

/// Default order of the per-segment CME approximation.
inline constexpr int kDefaultCmeOrder = 27;
/// Default relative accuracy of the block-interval calibration.
inline constexpr double kDefaultCalibrationTol = 1e-4;

/// Piecewise-constant effective honest hashrate after a block is mined.
///
/// On [thresholds[i-1], thresholds[i]) the rate is fractions[i-1] * fullrate;
/// from thresholds.back() on it is fullrate. Fractions are stored relative to
/// the full rate so that calibration rescales a single scalar.
class HashrateProfile {
public:
    HashrateProfile(std::vector<double> thresholds, std::vector<double> fractions, double fullrate);

    /// Number of segments N.
    int segments() const noexcept { return static_cast<int>(fractions_.size()); }
    const std::vector<double>& thresholds() const noexcept { return thresholds_; }
    const std::vector<double>& fractions() const noexcept { return fractions_; }
    double fullrate() const noexcept { return fullrate_; }
    /// Delta_N, the time after which every honest miner has the block.
    double max_delay() const noexcept { return thresholds_.back(); }
    double segment_length(int i) const { return thresholds_.at(static_cast<std::size_t>(i) + 1) - thresholds_.at(static_cast<std::size_t>(i)); }

    /// alpha(t).
    double rate_at(double t) const noexcept;
    HashrateProfile with_fullrate(double fullrate) const;

    /// Table of (threshold_s, cum_fraction) rows: the fraction in force from
    /// each threshold on, ending with (Delta_N, 1). The full rate is carried in a
    /// "# fullrate=" comment.
    void write_table(std::ostream& out) const;
    static HashrateProfile read_table(std::istream& in);

private:
    std::vector<double> thresholds_;
    std::vector<double> fractions_;
    double fullrate_;
};

struct CalibrationResult {
    double calibrated_rate = 0.0;
    double achieved_mean = 0.0;
    int iterations = 0;
    bool converged = false;
    bool used_bisection = false;
    std::vector<double> trace;  ///< rate iterates in order
};

/// Inter-mining time of the variable-delay model, order N*K + 1.
MEDistribution assemble_theta(const HashrateProfile& profile, int cme_order = kDefaultCmeOrder);

MEDistribution zero_delay_theta(double alpha);
MEDistribution fixed_delay_theta(double delay, double alpha, int cme_order = kDefaultCmeOrder);
/// Honest mining is off for a delay ~ delay_dist, then exponential(alpha).
MEDistribution random_delay_theta(const MEDistribution& delay_dist, double alpha);

/// Solves mean_at(rate) = block_interval by the fixed point
/// rate <- rate * mean / block_interval from rate = 1 / block_interval, falling
/// back to bisection if the iteration stops contracting. Throws NonConvergence
/// after max_iterations.
CalibrationResult calibrate_rate(const std::function<double(double)>& mean_at, double block_interval,
                                 double rel_tol = kDefaultCalibrationTol, int max_iterations = 200);

CalibrationResult calibrate_alpha(const HashrateProfile& profile, double block_interval,
                                  int cme_order = kDefaultCmeOrder, double rel_tol = kDefaultCalibrationTol);

}  // namespace dspend
