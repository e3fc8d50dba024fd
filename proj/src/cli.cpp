#include "dspend/cli.hpp"

#include "dspend/errors.hpp"
#include "dspend/ingest.hpp"
#include "dspend/simulate.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <iostream>

namespace dspend::cli {

namespace {

struct Ingested {
    CutoffResult cutoff;
    BinningResult binning;
    HashrateProfile profile;
};

Ingested ingest_data(const RunConfig& cfg) {
    const DelayDataset raw = load_delays(cfg.data);
    CutoffResult cut = apply_cutoff(raw, cfg.epsilon);
    BinningResult bins = bin_delays(cut.retained, cfg.bins);
    HashrateProfile profile = to_profile(bins, 1.0 / cfg.block_interval);
    return {std::move(cut), std::move(bins), std::move(profile)};
}

HashrateProfile variable_profile(const RunConfig& cfg) {
    if (!cfg.profile.empty()) {
        std::ifstream in(cfg.profile);
        if (!in) throw ParseError("cannot open '" + cfg.profile + "'", 0);
        try {
            return HashrateProfile::read_table(in);
        } catch (const ParseError& e) {
            throw ParseError(cfg.profile + ": " + e.what(), 0);
        }
    }
    if (!cfg.data.empty()) return ingest_data(cfg).profile;
    throw InvalidArgument("--model variable needs --profile or --data");
}

AnalysisConfig analysis_config(const RunConfig& cfg) {
    AnalysisConfig a;
    a.model = resolve_model(cfg);
    a.beta_fraction = cfg.beta_fraction;
    a.block_interval = cfg.block_interval;
    a.k_max = cfg.k_max;
    a.cme_order = cfg.cme_order;
    a.delta_conf = cfg.delta_conf;
    if (!a.delta_conf && (cfg.model == "expdelay" || cfg.model == "medelay")) {
        a.delta_conf = cfg.delay;
        spdlog::info("delta_conf defaults to the mean delay {} s", cfg.delay);
    }
    return a;
}

CalibrationResult calibrate_model(const DelayModel& model, const RunConfig& cfg) {
    return calibrate_rate([&](double rate) { return build_theta(model, rate, cfg.cme_order).mean(); },
                          cfg.block_interval);
}

// The simulator needs the hashrate as a function of time, which the random
// delay models do not have.
HashrateProfile simulation_profile(const DelayModel& model, double alpha) {
    if (std::holds_alternative<ZeroDelay>(model)) return zero_delay_profile(alpha);
    if (const auto* m = std::get_if<FixedDelay>(&model))
        return m->delay > 0.0 ? HashrateProfile({0.0, m->delay}, {0.0}, alpha) : zero_delay_profile(alpha);
    if (const auto* m = std::get_if<VariableDelay>(&model)) return m->profile.with_fullrate(alpha);
    throw InvalidArgument("simulation supports the zero, fixed and variable models");
}

}  // namespace

DelayModel resolve_model(const RunConfig& cfg) {
    if (cfg.model == "zero") return ZeroDelay{};
    if (!(cfg.delay >= 0.0)) throw InvalidArgument("--delay must be nonnegative");
    if (cfg.model == "fixed") return FixedDelay{cfg.delay};
    if (cfg.model == "expdelay") {
        if (!(cfg.delay > 0.0)) throw InvalidArgument("--model expdelay needs --delay > 0");
        return ExpDelay{1.0 / cfg.delay};
    }
    if (cfg.model == "medelay") {
        if (!(cfg.delay > 0.0)) throw InvalidArgument("--model medelay needs --delay > 0");
        return MEDelay{erlang_me(cfg.me_order, cfg.delay)};
    }
    if (cfg.model == "variable") return VariableDelay{variable_profile(cfg)};
    throw InvalidArgument("unknown model '" + cfg.model + "'");
}

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& info) {
    if (cfg.data.empty()) throw InvalidArgument("ingest needs --data");
    const Ingested in = ingest_data(cfg);
    const CalibrationResult cal = calibrate_model(VariableDelay{in.profile}, cfg);
    in.profile.with_fullrate(cal.calibrated_rate).write_table(out);
    info << fmt::format("theta={:.10g}\nM={}\nM_prime={}\nbin_size={}\nsegments={}\ncutoff_delay={:.10g}\n"
                        "fullrate={:.10g}\n",
                        in.binning.sub_ms_fraction, in.binning.total, in.binning.data_count, in.binning.bin_size,
                        in.binning.segments, in.cutoff.cutoff_delay, cal.calibrated_rate);
    return kOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& info) {
    const Analysis a = analyze(analysis_config(cfg));
    out << "k,q,deficit,model\n";
    for (const auto& r : a.results) out << fmt::format("{},{:.17g},{:.17g},{}\n", r.k, r.q, r.deficit_mass, a.model_tag);
    info << fmt::format("alpha={:.10g}\nE_phi={:.10g}\ndelta_conf={:g}\n", a.alpha, a.mean_phi, a.delta_conf);
    if (a.regime == Regime::Unstable) {
        info << "regime=unstable\n";
        if (cfg.strict) return kUnstable;
    }
    return kOk;
}

int cmd_density(const RunConfig& cfg, std::ostream& out, std::ostream& info) {
    const DelayModel model = resolve_model(cfg);
    const CalibrationResult cal = calibrate_model(model, cfg);
    const MEDistribution theta = build_theta(model, cal.calibrated_rate, cfg.cme_order);
    const double x_max = cfg.x_max.value_or(5.0 * cfg.block_interval);
    out << "x,f\n";
    for (const auto& p : density_grid(theta, x_max, cfg.points)) out << fmt::format("{:.17g},{:.17g}\n", p.x, p.f);
    info << fmt::format("order={}\nmean={:.10g}\n", theta.order(), theta.mean());
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& info) {
    const AnalysisConfig acfg = analysis_config(cfg);
    const Analysis a = analyze(acfg);
    SimConfig sim;
    sim.profile = simulation_profile(acfg.model, a.alpha);
    sim.beta = a.beta;
    sim.delta_conf = a.delta_conf;
    sim.warmup_blocks = cfg.warmup;
    sim.stop_lead = cfg.stop_lead;
    sim.trials = cfg.trials;
    sim.seed = cfg.seed;
    const auto estimates = simulate_attack_sweep(sim, cfg.k_max);

    out << "k,q_hat,std_err,trials\n";
    for (const auto& e : estimates) out << fmt::format("{},{:.17g},{:.17g},{}\n", e.k, e.q_hat, e.std_err, e.trials);

    std::string notes = estimates.front().regime_notes;
    if (a.regime == Regime::Stable && a.beta > 0.0) {
        const int depth = cfg.stop_lead + 1;
        const PhiDistribution phi = phi_from_theta(build_theta(acfg.model, a.alpha, cfg.cme_order), a.beta, depth);
        notes += fmt::format(";psi(stop_lead)={:.3g}", ruin_recursive(phi, depth).psi.back());
    }
    info << "notes=" << notes << '\n';
    for (const auto& r : a.results) info << fmt::format("analytic_q[{}]={:.10g}\n", r.k, r.q);
    if (a.regime == Regime::Unstable && cfg.strict) return kUnstable;
    return kOk;
}

int cmd_calibrate(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const CalibrationResult cal = calibrate_model(resolve_model(cfg), cfg);
    out << fmt::format("fullrate={:.17g}\nachieved_mean={:.17g}\nrel_error={:.3e}\niterations={}\nbisection={}\n",
                       cal.calibrated_rate, cal.achieved_mean,
                       std::abs(cal.achieved_mean - cfg.block_interval) / cfg.block_interval, cal.iterations,
                       cal.used_bisection);
    return kOk;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out, std::ostream& info) {
    const MixtureSpec spec = cfg.mixture.empty() ? MixtureSpec::bitcoin_like() : MixtureSpec::parse(cfg.mixture);
    const DelayDataset ds = synth_delays(spec, cfg.count, cfg.seed);
    out << "# " << ds.source_tag << '\n';
    for (double d : ds.delays) out << fmt::format("{:.9g}\n", d);
    const DelayStats s = describe(ds);
    info << fmt::format("count={}\nmedian={:.6g}\nmean={:.6g}\n", ds.delays.size(), s.median, s.mean);
    return kOk;
}

int run(const RunConfig& cfg, std::ostream& err) {
    using Command = int (*)(const RunConfig&, std::ostream&, std::ostream&);
    Command command = nullptr;
    if (cfg.command == "ingest") command = cmd_ingest;
    else if (cfg.command == "sweep") command = cmd_sweep;
    else if (cfg.command == "density") command = cmd_density;
    else if (cfg.command == "simulate") command = cmd_simulate;
    else if (cfg.command == "calibrate") command = cmd_calibrate;
    else if (cfg.command == "synth") command = cmd_synth;
    if (!command) {
        err << "error: unknown command '" << cfg.command << "'\n";
        return kUsage;
    }
    try {
        if (cfg.out.empty()) return command(cfg, std::cout, err);
        std::ofstream file(cfg.out);
        if (!file) throw ParseError("cannot write '" + cfg.out + "'", 0);
        const int code = command(cfg, file, err);
        file.close();
        if (!file) throw ParseError("failed writing '" + cfg.out + "'", 0);
        return code;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseFailure;
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << "\niterates:";
        for (double x : e.trace()) err << fmt::format(" {:.10g}", x);
        err << '\n';
        return kNumerical;
    } catch (const UnstableRegime& e) {
        err << "error: " << e.what() << '\n';
        return cfg.strict ? kUnstable : kNumerical;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

int main(int argc, char** argv) {
    auto logger = spdlog::get("dspend");
    spdlog::set_default_logger(logger ? logger : spdlog::stderr_color_st("dspend"));

    RunConfig cfg;
    CLI::App app{"Double-spend probability under time-varying honest hashrate"};
    app.set_config("--config", "", "key=value file; explicit flags override it");
    app.require_subcommand(1);
    app.fallthrough();
    std::string log_level = "info";
    double delta_conf = 0.0, x_max = 0.0;

    app.add_option("--model", cfg.model, "zero | fixed | expdelay | medelay | variable")
        ->check(CLI::IsMember({"zero", "fixed", "expdelay", "medelay", "variable"}))
        ->capture_default_str();
    app.add_option("--data", cfg.data, "delay dataset, one value in seconds per line");
    app.add_option("--profile", cfg.profile, "threshold_s,cum_fraction table");
    app.add_option("--epsilon", cfg.epsilon, "cutoff: drop delays above the 100(1-eps) percentile")
        ->capture_default_str();
    app.add_option("--bins", cfg.bins, "number of equal-count data bins")->capture_default_str();
    app.add_option("--cme-order", cfg.cme_order, "odd order of the CME per delay segment")->capture_default_str();
    app.add_option("--beta-fraction", cfg.beta_fraction, "adversary rate over calibrated honest rate")
        ->capture_default_str();
    app.add_option("--block-interval", cfg.block_interval, "target mean inter-block time (s)")->capture_default_str();
    app.add_option("--k-max", cfg.k_max, "largest confirmation depth")->capture_default_str();
    auto* dc = app.add_option("--delta-conf", delta_conf, "adversary-only mining after the k-th block (s)");
    app.add_option("--delay", cfg.delay, "mean delay of fixed, expdelay and medelay (s)")->capture_default_str();
    app.add_option("--me-order", cfg.me_order, "Erlang order of the medelay model")->capture_default_str();
    app.add_option("--trials", cfg.trials, "simulation trials")->capture_default_str();
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_option("--warmup", cfg.warmup, "simulated pre-mining blocks")->capture_default_str();
    app.add_option("--stop-lead", cfg.stop_lead, "honest lead at which a simulated race counts as safe")
        ->capture_default_str();
    app.add_option("--points", cfg.points, "density grid points")->capture_default_str();
    auto* xm = app.add_option("--x-max", x_max, "density grid end (s), default 5 block intervals");
    app.add_option("--count", cfg.count, "synth: number of delays")->capture_default_str();
    app.add_option("--mixture", cfg.mixture, "synth: e.g. atom=0.02;lognormal:0.97:6.5:0.7");
    app.add_option("--out", cfg.out, "output file, stdout when omitted");
    app.add_flag("--strict", cfg.strict, "exit with a distinct code in the unstable regime");
    app.add_option("--log-level", log_level, "trace | debug | info | warn | error | off")->capture_default_str();

    app.add_subcommand("ingest", "bin a delay dataset into a hashrate profile table");
    app.add_subcommand("sweep", "double-spend probability for k = 1..k_max");
    app.add_subcommand("density", "pdf of the inter-mining time on a grid");
    app.add_subcommand("simulate", "Monte Carlo estimate for k = 1..k_max");
    app.add_subcommand("calibrate", "honest rate giving the target block interval");
    app.add_subcommand("synth", "write a synthetic delay dataset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));
    if (*dc) cfg.delta_conf = delta_conf;
    if (*xm) cfg.x_max = x_max;
    cfg.command = app.get_subcommands().front()->get_name();
    return run(cfg, std::cerr);
}

}  // namespace dspend::cli
