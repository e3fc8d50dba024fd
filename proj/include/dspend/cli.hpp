#pragma once

#include "dspend/doublespend.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dspend::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,         ///< bad flags or inconsistent configuration
    kParseFailure = 2,  ///< unreadable or malformed input file
    kNumerical = 3,     ///< numerical failure or calibration non-convergence
    kUnstable = 4,      ///< E[Phi] >= 1 with --strict
};

struct RunConfig {
    std::string command;
    std::string model = "zero";  ///< zero | fixed | expdelay | medelay | variable
    std::string data;            ///< delay dataset, one value per line
    std::string profile;         ///< threshold_s,cum_fraction table
    double epsilon = 0.01;
    int bins = 128;
    int cme_order = kDefaultCmeOrder;
    double beta_fraction = 0.2;
    double block_interval = 600.0;
    int k_max = 6;
    std::optional<double> delta_conf;
    double delay = 10.0;  ///< mean delay of the fixed, expdelay and medelay models
    int me_order = 4;     ///< Erlang order of the medelay model
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    int warmup = 10000;
    int stop_lead = 64;
    int points = 1000;
    std::optional<double> x_max;  ///< density grid end, default 5 * block_interval
    std::size_t count = 10000;    ///< synth: number of delays
    std::string mixture;          ///< synth: mixture spec, default bitcoin-like
    std::string out;              ///< output path, stdout when empty
    bool strict = false;
};

/// The delay model selected by cfg; loads the profile or dataset as needed.
DelayModel resolve_model(const RunConfig& cfg);

/// Each command writes its CSV to out and human-readable notes to info, and
/// returns an ExitCode. Library errors propagate as exceptions.
int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& info);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& info);
int cmd_density(const RunConfig& cfg, std::ostream& out, std::ostream& info);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& info);
int cmd_calibrate(const RunConfig& cfg, std::ostream& out, std::ostream& info);
int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& info);

/// Dispatches cfg.command, opening cfg.out when set, and maps exceptions to
/// exit codes with a message on err.
int run(const RunConfig& cfg, std::ostream& err);

/// Full command line entry point. A --config file of key=value lines (keys
/// are the long flag names) sets defaults that explicit flags override.
int main(int argc, char** argv);

}  // namespace dspend::cli
