#include "dspend/ingest.hpp"

#include "dspend/errors.hpp"
#include "dspend/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace dspend {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, std::size_t lineno) {
    field = trim(field);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("not a number: '" + std::string(field) + "'", lineno);
    return value;
}

}  // namespace

DelayDataset parse_delays(std::istream& in, std::string source_tag) {
    DelayDataset ds;
    ds.source_tag = std::move(source_tag);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto comma = view.find(',');
        const double delay = parse_number(view.substr(0, comma), lineno);
        if (!std::isfinite(delay) || delay < 0.0)
            throw ParseError("delay must be a nonnegative number, got " + std::string(trim(view.substr(0, comma))),
                             lineno);
        ds.delays.push_back(delay);
    }
    if (ds.delays.empty()) throw ParseError("dataset '" + ds.source_tag + "' contains no delays", 0);
    std::sort(ds.delays.begin(), ds.delays.end());
    return ds;
}

DelayDataset load_delays(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
    return parse_delays(in, path.string());
}

CutoffResult apply_cutoff(const DelayDataset& ds, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in [0, 1)");
    if (ds.delays.empty()) throw InvalidArgument("empty dataset");
    const std::size_t n = ds.delays.size();
    // 1-based nearest rank ceil((1 - eps) n), at least 1. The small slack keeps
    // (1 - eps) * n from rounding up past an exact integer.
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - epsilon) * static_cast<double>(n) - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, n);
    CutoffResult out;
    out.cutoff_delay = ds.delays[rank - 1];
    out.retained.source_tag = ds.source_tag;
    const auto end = std::upper_bound(ds.delays.begin(), ds.delays.end(), out.cutoff_delay);
    out.retained.delays.assign(ds.delays.begin(), end);
    return out;
}

BinningResult bin_delays(const DelayDataset& ds, int data_bins) {
    if (data_bins < 1) throw InvalidArgument("number of data bins must be >= 1");
    const auto first_data = std::lower_bound(ds.delays.begin(), ds.delays.end(), kSubMillisecond);
    BinningResult out;
    out.total = ds.delays.size();
    const auto sub_ms = static_cast<std::size_t>(std::distance(ds.delays.begin(), first_data));
    out.data_count = out.total - sub_ms;
    if (out.data_count == 0) throw InvalidArgument("every delay is below 1 ms; nothing to bin");
    const auto n_bins = static_cast<std::size_t>(data_bins);
    if (n_bins > out.data_count)
        throw InvalidArgument("more data bins (" + std::to_string(data_bins) + ") than delays above 1 ms (" +
                              std::to_string(out.data_count) + ")");
    out.sub_ms_fraction = static_cast<double>(sub_ms) / static_cast<double>(out.total);
    out.bin_size = out.data_count / n_bins;

    out.bin_means.push_back(kSubMillisecond);
    out.counts.push_back(sub_ms);
    auto add_bin = [&](std::size_t begin, std::size_t end) {
        CompensatedSum acc;
        for (std::size_t i = begin; i < end; ++i) acc += ds.delays[sub_ms + i];
        out.bin_means.push_back(acc.value() / static_cast<double>(end - begin));
        out.counts.push_back(end - begin);
    };
    for (std::size_t b = 0; b < n_bins; ++b) add_bin(b * out.bin_size, (b + 1) * out.bin_size);
    if (n_bins * out.bin_size < out.data_count) add_bin(n_bins * out.bin_size, out.data_count);
    out.segments = static_cast<int>(out.bin_means.size());
    return out;
}

HashrateProfile to_profile(const BinningResult& binning, double fullrate_seed) {
    const auto n = binning.bin_means.size();
    if (n < 2) throw InvalidArgument("binning has no data bins");
    for (std::size_t i = 1; i < n; ++i)
        if (!(binning.bin_means[i] > binning.bin_means[i - 1]))
            throw InvalidArgument("bin means are not strictly increasing (bins " + std::to_string(i - 1) + " and " +
                                  std::to_string(i) + ")");
    std::vector<double> thresholds{0.0};
    thresholds.insert(thresholds.end(), binning.bin_means.begin(), binning.bin_means.end());
    std::vector<double> fractions(n, 0.0);
    const double step = static_cast<double>(binning.bin_size) / static_cast<double>(binning.total);
    if (n >= 2) fractions[1] = binning.sub_ms_fraction;
    for (std::size_t i = 2; i < n; ++i) fractions[i] = std::min(1.0, fractions[i - 1] + step);
    return {std::move(thresholds), std::move(fractions), fullrate_seed};
}

MixtureSpec MixtureSpec::parse(const std::string& text) {
    MixtureSpec spec;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
        const std::string_view view = trim(item);
        if (view.empty()) continue;
        if (view.rfind("atom=", 0) == 0) {
            spec.atom_weight = parse_number(view.substr(5), 0);
        } else if (view.rfind("lognormal:", 0) == 0) {
            std::vector<double> fields;
            std::string_view rest = view.substr(10);
            while (!rest.empty()) {
                const auto colon = rest.find(':');
                fields.push_back(parse_number(rest.substr(0, colon), 0));
                rest = colon == std::string_view::npos ? std::string_view{} : rest.substr(colon + 1);
            }
            if (fields.size() != 3) throw ParseError("lognormal component needs weight:median:sigma", 0);
            spec.components.push_back({fields[0], fields[1], fields[2]});
        } else {
            throw ParseError("unknown mixture item '" + std::string(view) + "'", 0);
        }
    }
    return spec;
}

MixtureSpec MixtureSpec::bitcoin_like() {
    return {0.02, {{0.965, 6.5, 0.7}, {0.015, 300.0, 0.3}}};
}

DelayStats describe(const DelayDataset& ds) {
    if (ds.delays.empty()) return {};
    const auto n = ds.delays.size();
    DelayStats s;
    s.median = n % 2 ? ds.delays[n / 2] : 0.5 * (ds.delays[n / 2 - 1] + ds.delays[n / 2]);
    s.mean = compensated_sum(ds.delays) / static_cast<double>(n);
    return s;
}

DelayDataset synth_delays(const MixtureSpec& spec, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw InvalidArgument("synthetic dataset needs count >= 1");
    if (!(spec.atom_weight >= 0.0)) throw InvalidArgument("atom weight must be nonnegative");
    std::vector<double> weights{spec.atom_weight};
    for (const auto& c : spec.components) {
        if (!(c.weight >= 0.0) || !(c.median > 0.0) || !(c.sigma >= 0.0))
            throw InvalidArgument("log-normal components need weight >= 0, median > 0, sigma >= 0");
        weights.push_back(c.weight);
    }
    if (!(compensated_sum(weights) > 0.0)) throw InvalidArgument("mixture weights sum to zero");

    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::normal_distribution<double> normal(0.0, 1.0);
    DelayDataset ds;
    ds.source_tag = "synthetic(seed=" + std::to_string(seed) + ")";
    ds.delays.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t which = pick(rng);
        if (which == 0) {
            ds.delays.push_back(kSyntheticSubMs);
        } else {
            const auto& c = spec.components[which - 1];
            ds.delays.push_back(c.median * std::exp(c.sigma * normal(rng)));
        }
    }
    std::sort(ds.delays.begin(), ds.delays.end());
    return ds;
}

}  // namespace dspend
