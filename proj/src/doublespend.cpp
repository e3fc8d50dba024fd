#include "dspend/doublespend.hpp"

#include "dspend/errors.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace dspend {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double default_delta_conf(const DelayModel& model) {
    return std::visit(Overloaded{
                          [](const ZeroDelay&) { return 0.0; },
                          [](const FixedDelay& m) { return m.delay; },
                          [](const ExpDelay&) -> double {
                              throw InvalidArgument("the exponential-delay model needs an explicit delta_conf");
                          },
                          [](const MEDelay&) -> double {
                              throw InvalidArgument("the ME-delay model needs an explicit delta_conf");
                          },
                          [](const VariableDelay& m) { return m.profile.max_delay(); },
                      },
                      model);
}

DoubleSpendResult trivial_result(int k, double q, Regime regime) {
    DoubleSpendResult r;
    r.k = k;
    r.q = q;
    r.regime = regime;
    std::vector<double> v(static_cast<std::size_t>(k), 0.0);
    if (q == 0.0) {
        v[0] = 1.0;
        r.p_v = PartialPGF(v);
        r.p_z.assign(static_cast<std::size_t>(k), 0.0);
        r.p_z.back() = 1.0;
    } else {
        r.p_v = PartialPGF(v);
        r.p_z.assign(static_cast<std::size_t>(k), 0.0);
        r.deficit_mass = 1.0;
    }
    return r;
}

}  // namespace

PartialPGF poisson_partial_pgf(double lambda, int k) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("Poisson mean must be nonnegative");
    if (k < 1) throw InvalidArgument("pgf depth must be >= 1");
    std::vector<double> c(static_cast<std::size_t>(k), 0.0);
    if (lambda == 0.0) {
        c[0] = 1.0;
        return PartialPGF(std::move(c));
    }
    const double log_lambda = std::log(lambda);
    for (int n = 0; n < k; ++n) c[static_cast<std::size_t>(n)] = std::exp(n * log_lambda - lambda - std::lgamma(n + 1.0));
    return PartialPGF(std::move(c));
}

PartialPGF adversary_lead_pmf(const LeadDistribution& lead, const PhiDistribution& phi, double delta_conf, double beta,
                              int k) {
    if (k < 1) throw InvalidArgument("depth must be >= 1");
    if (static_cast<int>(lead.masses.size()) < k || phi.depth() < k)
        throw InvalidArgument("lead or Phi distribution shorter than depth " + std::to_string(k));
    if (!(delta_conf >= 0.0)) throw InvalidArgument("delta_conf must be nonnegative");
    const PartialPGF g_q(std::vector<double>(lead.masses.begin(), lead.masses.begin() + k));
    const PartialPGF g_phi(std::vector<double>(phi.masses().begin(), phi.masses().begin() + k));
    const PartialPGF g_delta = poisson_partial_pgf(delta_conf * beta, k);
    return truncated_product(truncated_product(g_q, truncated_power(g_phi, k)), g_delta);
}

HonestLead honest_lead_pmf(const PartialPGF& p_v) {
    HonestLead z;
    z.p_z.assign(p_v.coefficients().rbegin(), p_v.coefficients().rend());
    z.deficit_mass = std::clamp(1.0 - p_v.total(), 0.0, 1.0);
    return z;
}

DoubleSpendResult compute_q(const HonestLead& z, const RuinTable& ruin) {
    if (z.p_z.size() != ruin.psi.size())
        throw InvalidArgument("p_Z has " + std::to_string(z.p_z.size()) + " entries, psi has " +
                              std::to_string(ruin.psi.size()));
    CompensatedSum safe;
    for (std::size_t u = 0; u < z.p_z.size(); ++u) {
        const double p = z.p_z[u], psi = ruin.psi[u];
        if (!(p >= 0.0 && p <= 1.0) || !(psi >= 0.0 && psi <= 1.0))
            throw InvalidArgument("p_Z or psi outside [0, 1] at u = " + std::to_string(u));
        safe += p * (1.0 - psi);
    }
    DoubleSpendResult r;
    r.k = static_cast<int>(z.p_z.size());
    r.p_z = z.p_z;
    r.deficit_mass = z.deficit_mass;
    r.q = std::clamp(1.0 - safe.value(), 0.0, 1.0);
    std::vector<double> v(z.p_z.rbegin(), z.p_z.rend());
    r.p_v = PartialPGF(std::move(v));
    return r;
}

std::string model_tag(const DelayModel& model, int cme_order) {
    return std::visit(Overloaded{
                          [](const ZeroDelay&) { return std::string("zero"); },
                          [&](const FixedDelay& m) { return fmt::format("fixed(delay={:g};K={})", m.delay, cme_order); },
                          [](const ExpDelay& m) { return fmt::format("expdelay(mu={:g})", m.rate); },
                          [](const MEDelay& m) {
                              return fmt::format("medelay(order={};mean={:g})", m.delay.order(), m.delay.mean());
                          },
                          [&](const VariableDelay& m) {
                              return fmt::format("variable(N={};K={};delta={:g})", m.profile.segments(), cme_order,
                                                 m.profile.max_delay());
                          },
                      },
                      model);
}

MEDistribution build_theta(const DelayModel& model, double alpha, int cme_order) {
    return std::visit(Overloaded{
                          [&](const ZeroDelay&) { return zero_delay_theta(alpha); },
                          [&](const FixedDelay& m) { return fixed_delay_theta(m.delay, alpha, cme_order); },
                          [&](const ExpDelay& m) { return random_delay_theta(exponential_me(m.rate), alpha); },
                          [&](const MEDelay& m) { return random_delay_theta(m.delay, alpha); },
                          [&](const VariableDelay& m) {
                              return assemble_theta(m.profile.with_fullrate(alpha), cme_order);
                          },
                      },
                      model);
}

Analysis analyze(const AnalysisConfig& config) {
    if (!(config.beta_fraction >= 0.0 && config.beta_fraction < 1.0))
        throw InvalidArgument("beta fraction must lie in [0, 1)");
    if (config.k_max < 1 || config.k_max > kMaxDepth) throw InvalidArgument("k_max out of range");

    Analysis out;
    out.model_tag = model_tag(config.model, config.cme_order);
    out.delta_conf = config.delta_conf ? *config.delta_conf : default_delta_conf(config.model);
    if (!(out.delta_conf >= 0.0)) throw InvalidArgument("delta_conf must be nonnegative");

    out.calibration = calibrate_rate(
        [&](double rate) { return build_theta(config.model, rate, config.cme_order).mean(); }, config.block_interval,
        config.calibration_tol);
    out.alpha = out.calibration.calibrated_rate;
    out.beta = config.beta_fraction * out.alpha;
    const MEDistribution theta = build_theta(config.model, out.alpha, config.cme_order);
    out.theta_order = theta.order();
    spdlog::info("{}: alpha = {:.10g} (E[Theta] = {:.10g}, {} iterations), beta = {:.10g}", out.model_tag, out.alpha,
                 out.calibration.achieved_mean, out.calibration.iterations, out.beta);

    auto finish = [&](double q, Regime regime) {
        out.regime = regime;
        for (int k = 1; k <= config.k_max; ++k) {
            out.results.push_back(trivial_result(k, q, regime));
            out.results.back().model_tag = out.model_tag;
        }
        return out;
    };
    if (out.beta == 0.0) return finish(0.0, Regime::Stable);

    const PhiDistribution phi = phi_from_theta(theta, out.beta, config.k_max);
    out.mean_phi = phi.mean();
    spdlog::info("{}: E[Phi] = {:.10g}", out.model_tag, out.mean_phi);
    if (!(phi.mean() < 1.0)) {
        spdlog::warn("{}: E[Phi] >= 1, every attack succeeds", out.model_tag);
        return finish(1.0, Regime::Unstable);
    }

    // Both recursions are prefix-stable, so depth k_max serves every k.
    const LeadDistribution lead = lead_pmf(phi, config.k_max);
    const RuinTable ruin = ruin_recursive(phi, config.k_max);
    for (int k = 1; k <= config.k_max; ++k) {
        const PartialPGF p_v = adversary_lead_pmf(lead, phi, out.delta_conf, out.beta, k);
        const RuinTable ruin_k{std::vector<double>(ruin.psi.begin(), ruin.psi.begin() + k)};
        DoubleSpendResult r = compute_q(honest_lead_pmf(p_v), ruin_k);
        r.p_v = p_v;
        r.model_tag = out.model_tag;
        out.results.push_back(std::move(r));
    }
    return out;
}

}  // namespace dspend
