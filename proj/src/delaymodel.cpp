#include "dspend/delaymodel.hpp"

#include "dspend/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace dspend {

namespace {

void require_rate(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("honest rate must be positive and finite");
}

// Segment sojourn law; order 1 is the plain exponential (no notice logged,
// assemble_theta may build hundreds of these).
MEDistribution segment_law(int cme_order, double length) {
    if (cme_order == 1) return exponential_me(1.0 / length);
    return cme(cme_order, length);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

HashrateProfile::HashrateProfile(std::vector<double> thresholds, std::vector<double> fractions, double fullrate)
    : thresholds_(std::move(thresholds)), fractions_(std::move(fractions)), fullrate_(fullrate) {
    if (fractions_.empty()) throw InvalidArgument("hashrate profile needs at least one segment");
    if (thresholds_.size() != fractions_.size() + 1)
        throw InvalidArgument("hashrate profile needs N+1 thresholds for N fractions");
    if (thresholds_.front() != 0.0) throw InvalidArgument("first threshold must be 0");
    for (std::size_t i = 1; i < thresholds_.size(); ++i)
        if (!(thresholds_[i] > thresholds_[i - 1]) || !std::isfinite(thresholds_[i]))
            throw InvalidArgument("thresholds must be finite and strictly increasing");
    for (std::size_t i = 0; i < fractions_.size(); ++i) {
        if (!(fractions_[i] >= 0.0 && fractions_[i] <= 1.0))
            throw InvalidArgument("hashrate fractions must lie in [0, 1]");
        if (i > 0 && fractions_[i] < fractions_[i - 1])
            throw InvalidArgument("hashrate fractions must be nondecreasing");
    }
    require_rate(fullrate_);
}

double HashrateProfile::rate_at(double t) const noexcept {
    if (t >= thresholds_.back()) return fullrate_;
    const auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), t);
    const auto seg = static_cast<std::size_t>(std::distance(thresholds_.begin(), it)) - 1;
    return fractions_[seg] * fullrate_;
}

HashrateProfile HashrateProfile::with_fullrate(double fullrate) const {
    return {thresholds_, fractions_, fullrate};
}

void HashrateProfile::write_table(std::ostream& out) const {
    out << "# fullrate=" << std::setprecision(17) << fullrate_ << '\n';
    out << "threshold_s,cum_fraction\n";
    for (std::size_t i = 0; i < fractions_.size(); ++i) out << thresholds_[i] << ',' << fractions_[i] << '\n';
    out << thresholds_.back() << ',' << 1 << '\n';
}

HashrateProfile HashrateProfile::read_table(std::istream& in) {
    std::vector<double> thresholds, fractions;
    double fullrate = std::numeric_limits<double>::quiet_NaN();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("fullrate=");
            if (pos != std::string::npos) {
                try {
                    fullrate = std::stod(line.substr(pos + 9));
                } catch (const std::exception&) {
                    throw ParseError("bad fullrate value", lineno);
                }
            }
            continue;
        }
        if (line.rfind("threshold", 0) == 0) continue;
        std::istringstream row(line);
        double t = 0.0, f = 0.0;
        char comma = 0;
        if (!(row >> t >> comma >> f) || comma != ',') throw ParseError("expected 'threshold_s,cum_fraction'", lineno);
        thresholds.push_back(t);
        fractions.push_back(f);
    }
    if (thresholds.size() < 2) throw ParseError("profile table needs at least two rows", 0);
    if (std::isnan(fullrate)) fullrate = 1.0 / 600.0;
    // The final row marks Delta_N; its fraction is the full rate by definition.
    fractions.pop_back();
    return {std::move(thresholds), std::move(fractions), fullrate};
}

MEDistribution assemble_theta(const HashrateProfile& profile, int cme_order) {
    if (cme_order < 1 || cme_order % 2 == 0)
        throw InvalidArgument("CME order must be odd and positive, got " + std::to_string(cme_order));
    const int n_seg = profile.segments();
    const Index k = cme_order;
    const Index m = n_seg * k + 1;
    const double full = profile.fullrate();

    std::vector<MEDistribution> laws;
    laws.reserve(static_cast<std::size_t>(n_seg));
    for (int i = 0; i < n_seg; ++i) laws.push_back(segment_law(cme_order, profile.segment_length(i)));

    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(n_seg) * static_cast<std::size_t>(k * k + 4 * k) + 1);
    for (int i = 0; i < n_seg; ++i) {
        const auto& law = laws[static_cast<std::size_t>(i)];
        const Index off = i * k;
        const double rate = profile.fractions()[static_cast<std::size_t>(i)] * full;
        const SparseMatrix& t = law.subgen();
        for (Index c = 0; c < t.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(t, c); it; ++it) entries.emplace_back(off + it.row(), off + it.col(), it.value());
        if (rate != 0.0)
            for (Index r = 0; r < k; ++r) entries.emplace_back(off + r, off + r, -rate);

        const Vector& h = law.exit();
        if (i + 1 < n_seg) {
            const RowVector& next_init = laws[static_cast<std::size_t>(i) + 1].init();
            for (Index r = 0; r < k; ++r) {
                if (h(r) == 0.0) continue;
                for (Index c = 0; c < k; ++c)
                    if (next_init(c) != 0.0) entries.emplace_back(off + r, off + k + c, h(r) * next_init(c));
            }
        } else {
            for (Index r = 0; r < k; ++r)
                if (h(r) != 0.0) entries.emplace_back(off + r, m - 1, h(r));
        }
    }
    entries.emplace_back(m - 1, m - 1, -full);

    SparseMatrix t(m, m);
    t.setFromTriplets(entries.begin(), entries.end());
    RowVector v = RowVector::Zero(m);
    v.head(k) = laws.front().init();
    return make_me(std::move(v), std::move(t));
}

MEDistribution zero_delay_theta(double alpha) {
    require_rate(alpha);
    return exponential_me(alpha);
}

MEDistribution random_delay_theta(const MEDistribution& delay_dist, double alpha) {
    require_rate(alpha);
    const Index k = delay_dist.order();
    std::vector<Triplet> entries;
    const SparseMatrix& t1 = delay_dist.subgen();
    for (Index c = 0; c < t1.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(t1, c); it; ++it) entries.emplace_back(it.row(), it.col(), it.value());
    for (Index r = 0; r < k; ++r)
        if (delay_dist.exit()(r) != 0.0) entries.emplace_back(r, k, delay_dist.exit()(r));
    entries.emplace_back(k, k, -alpha);
    SparseMatrix t(k + 1, k + 1);
    t.setFromTriplets(entries.begin(), entries.end());
    RowVector v = RowVector::Zero(k + 1);
    v.head(k) = delay_dist.init();
    return make_me(std::move(v), std::move(t));
}

MEDistribution fixed_delay_theta(double delay, double alpha, int cme_order) {
    require_rate(alpha);
    if (!(delay >= 0.0) || !std::isfinite(delay)) throw InvalidArgument("delay must be nonnegative");
    if (delay == 0.0) return zero_delay_theta(alpha);
    return random_delay_theta(segment_law(cme_order, delay), alpha);
}

CalibrationResult calibrate_rate(const std::function<double(double)>& mean_at, double block_interval, double rel_tol,
                                 int max_iterations) {
    if (!(block_interval > 0.0)) throw InvalidArgument("block interval must be positive");
    if (!(rel_tol > 0.0)) throw InvalidArgument("calibration tolerance must be positive");

    CalibrationResult res;
    const double start = 1.0 / block_interval;
    double rate = start;
    double prev_step = std::numeric_limits<double>::infinity();
    auto rel_err = [&](double mean) { return std::abs(mean - block_interval) / block_interval; };

    // Fixed-point phase. Converged once the mean is within tolerance and the
    // update moves the rate by no more than the tolerance; the update itself
    // is returned.
    bool contracting = true;
    while (res.iterations < max_iterations) {
        const double mean = mean_at(rate);
        ++res.iterations;
        res.trace.push_back(rate);
        const double next = rate * mean / block_interval;
        const double step = std::abs(next - rate) / rate;
        if (rel_err(mean) <= rel_tol && step <= rel_tol && std::isfinite(next) && next > 0.0) {
            const double next_mean = mean_at(next);
            if (rel_err(next_mean) <= rel_err(mean)) {
                res.trace.push_back(next);
                res.calibrated_rate = next;
                res.achieved_mean = next_mean;
            } else {
                res.calibrated_rate = rate;
                res.achieved_mean = mean;
            }
            res.converged = true;
            return res;
        }
        if (step > prev_step || !std::isfinite(next) || next <= 0.0) {
            contracting = false;
            break;
        }
        prev_step = step;
        rate = next;
    }
    if (contracting) throw NonConvergence("block-interval calibration did not converge", res.trace);

    // Bisection fallback; mean_at is decreasing in the rate.
    res.used_bisection = true;
    double lo = start / 10.0, hi = start * 10.0;
    while (mean_at(hi) > block_interval && res.iterations < max_iterations) {
        lo = hi;
        hi *= 10.0;
        ++res.iterations;
    }
    while (mean_at(lo) < block_interval && res.iterations < max_iterations) {
        hi = lo;
        lo /= 10.0;
        ++res.iterations;
    }
    while (res.iterations < max_iterations) {
        const double mid = 0.5 * (lo + hi);
        const double mean = mean_at(mid);
        ++res.iterations;
        res.trace.push_back(mid);
        if (rel_err(mean) <= rel_tol && (hi - lo) / mid <= rel_tol) {
            res.calibrated_rate = mid;
            res.achieved_mean = mean;
            res.converged = true;
            return res;
        }
        (mean > block_interval ? lo : hi) = mid;
    }
    throw NonConvergence("block-interval calibration did not converge", res.trace);
}

CalibrationResult calibrate_alpha(const HashrateProfile& profile, double block_interval, int cme_order,
                                  double rel_tol) {
    return calibrate_rate(
        [&](double rate) { return assemble_theta(profile.with_fullrate(rate), cme_order).mean(); }, block_interval,
        rel_tol);
}

}  // namespace dspend
