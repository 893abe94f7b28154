#pragma once

#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "oprelay/rng.hpp"
#include "oprelay/topology.hpp"

namespace oprelay {

// Linear transmit SNR.
struct SnrPoint {
    double rho = 1.0;

    static SnrPoint from_db(double db);
    double db() const;
};

using RateMap = std::map<LinkId, double>;

// One realization of every link power gain |h|^2 of a topology.
struct FadingDraw {
    Topology topology;
    std::vector<double> gains;  // indexed like links(topology)

    double operator[](std::size_t i) const { return gains[i]; }
    double gain(const LinkId& l) const { return gains[link_index(topology, l)]; }
};

// Per-link exponential rates in link order. Without a map every rate is 1;
// with a map every declared link must be present and positive.
std::vector<double> resolve_rates(const Topology& t, const std::optional<RateMap>& rates);

FadingDraw draw_fading(const Topology& t, const std::optional<RateMap>& rates, const RngState& st);

// Hot-loop variant: reuses draw.gains and takes already resolved rates.
inline void draw_fading_into(FadingDraw& draw, const std::vector<double>& rates, TrialRng& rng) {
    draw.gains.resize(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) draw.gains[i] = rng.exponential(rates[i]);
}

constexpr double kInfiniteOrder = std::numeric_limits<double>::infinity();

// v = -ln(gain)/ln(rho). Zero gain maps to kInfiniteOrder.
double exponential_order(double gain, SnrPoint snr);

}  // namespace oprelay
