#include "oprelay/fading.hpp"

#include <cmath>

#include "oprelay/errors.hpp"

namespace oprelay {

SnrPoint SnrPoint::from_db(double db) { return SnrPoint{std::pow(10.0, db / 10.0)}; }

double SnrPoint::db() const { return 10.0 * std::log10(rho); }

std::vector<double> resolve_rates(const Topology& t, const std::optional<RateMap>& rates) {
    const auto& ls = links(t);
    std::vector<double> out(ls.size(), 1.0);
    if (!rates) return out;
    for (const auto& [id, rate] : *rates) {
        (void)link_index(t, id);  // rejects foreign links
        if (!(rate > 0.0) || !std::isfinite(rate))
            throw ConfigError("rate for " + to_string(id) + " must be positive");
    }
    for (std::size_t i = 0; i < ls.size(); ++i) {
        auto it = rates->find(ls[i]);
        if (it == rates->end()) throw ConfigError("missing rate for link " + to_string(ls[i]));
        out[i] = it->second;
    }
    return out;
}

FadingDraw draw_fading(const Topology& t, const std::optional<RateMap>& rates, const RngState& st) {
    auto lam = resolve_rates(t, rates);
    FadingDraw d{t, {}};
    TrialRng rng(st);
    draw_fading_into(d, lam, rng);
    return d;
}

double exponential_order(double gain, SnrPoint snr) {
    if (!(snr.rho > 1.0)) throw DomainError("exponential order needs rho > 1");
    if (gain < 0.0) throw DomainError("gain must be nonnegative");
    if (gain == 0.0) return kInfiniteOrder;
    return -std::log(gain) / std::log(snr.rho);
}

}  // namespace oprelay
