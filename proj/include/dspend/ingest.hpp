#pragma once

#include "dspend/delaymodel.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dspend {

/// Delays below this are reports from the miner itself (or its pool) and are
/// assigned exactly this value.
inline constexpr double kSubMillisecond = 1e-3;

struct DelayDataset {
    std::vector<double> delays;  ///< seconds, ascending
    std::string source_tag;
};

/// One delay in seconds per line. Blank lines and lines starting with '#' are
/// skipped; a second comma-separated column (e.g. a date) is ignored; a
/// trailing '\r' is accepted. Throws ParseError with the 1-based line number.
DelayDataset load_delays(const std::filesystem::path& path);
DelayDataset parse_delays(std::istream& in, std::string source_tag);

struct CutoffResult {
    DelayDataset retained;
    double cutoff_delay = 0.0;  ///< Delta(epsilon)
};

/// Nearest-rank 100(1-epsilon) percentile, then drops every delay above it.
CutoffResult apply_cutoff(const DelayDataset& ds, double epsilon);

struct BinningResult {
    double sub_ms_fraction = 0.0;  ///< theta: share of reports below 1 ms
    /// b_0 (the sub-ms bin, always 1 ms), b_1.. the equal-count bins, and a
    /// final remainder bin when M' is not a multiple of N'.
    std::vector<double> bin_means;
    std::vector<std::size_t> counts;
    std::size_t total = 0;       ///< M
    std::size_t data_count = 0;  ///< M' = M - |B_0|
    std::size_t bin_size = 0;    ///< floor(M'/N')
    int segments = 0;            ///< N, number of bins
};

BinningResult bin_delays(const DelayDataset& ds, int data_bins);

/// Delta_i = b_{i-1}; fractions 0, theta, then + floor(M'/N')/M per segment.
HashrateProfile to_profile(const BinningResult& binning, double fullrate_seed = 1.0 / 600.0);

struct LogNormalComponent {
    double weight;
    double median;  ///< seconds
    double sigma;   ///< of the underlying normal
};

/// Value used for synthetic sub-ms reports; binning maps it to 1 ms.
inline constexpr double kSyntheticSubMs = 5e-4;

/// Mixture generator for synthetic propagation delays: an atom of sub-ms
/// reports plus log-normal components.
struct MixtureSpec {
    double atom_weight = 0.0;
    std::vector<LogNormalComponent> components;

    /// "atom=0.02;lognormal:0.97:6.5:1.15;lognormal:0.01:300:0.4"
    static MixtureSpec parse(const std::string& text);
    /// Median ~6.5 s and mean ~12.6 s with a thin tail of slow echo nodes.
    static MixtureSpec bitcoin_like();
};

struct DelayStats {
    double median = 0.0;
    double mean = 0.0;
};

DelayStats describe(const DelayDataset& ds);

/// Reproducible: std::mt19937_64 seeded with seed; identical for equal inputs.
DelayDataset synth_delays(const MixtureSpec& spec, std::size_t count, std::uint64_t seed);

}  // namespace dspend
