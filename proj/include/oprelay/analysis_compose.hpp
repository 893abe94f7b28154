#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oprelay/dmt_closed.hpp"
#include "oprelay/outage_mc.hpp"

namespace oprelay {

// Pointwise sum of the curves. Throws ConfigError on an empty list and
// DomainError when the r ranges differ.
DmtCurve compose_upper_bound(const std::vector<DmtCurve>& curves);

// P(target mode out | every given mode out) for one experiment.
struct ConditionalOutageSpec {
    Experiment experiment;
    std::size_t target = 0;
    std::vector<std::size_t> given;
};

void validate(const ConditionalOutageSpec& spec);

// On/off relay: relayed mode given the direct mode.
ConditionalOutageSpec onoff_conditional_spec(Protocol p, double r);

struct ConditionalPoint {
    double snr_db = 0.0;
    ConditionalEstimate estimate;
};

struct ConditionalSlope {
    std::vector<ConditionalPoint> points;
    std::optional<SlopeFit> fit;
    std::string fit_error;
};

// Point i uses substream i. Throws InsufficientData if a point misses the floor.
ConditionalSlope estimate_conditional_slope(const ConditionalOutageSpec& spec, const std::vector<double>& snr_db,
                                            const ConditionalOptions& opt);

struct TightnessPoint {
    double snr_db = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t selected_out = 0;     // system outage under the rule
    std::uint64_t all_out = 0;          // every mode out
    std::uint64_t wrong_selection = 0;  // chosen mode out while another mode is not
    Interval wrong_ci95;
};

struct TightnessReport {
    std::string descriptor;
    std::vector<TightnessPoint> points;
    std::uint64_t wrong_total = 0;
    std::uint64_t draws_total = 0;
    std::optional<SlopeFit> system_fit;
    std::optional<SlopeFit> all_out_fit;
};

TightnessReport tightness_check(const Experiment& ex, const std::vector<double>& snr_db, std::uint64_t trials,
                                std::uint64_t seed, const ExecOptions& exec = {});

// SRC (n = 2) chain: mode 1, mode 2, then mode 3 given modes 1 and 2,
// against the sum of the unconditioned mode curves.
struct CompositionCheck {
    std::string protocol;
    DmtCurve conditional_sum;
    DmtCurve unconditional_sum;
    double max_excess = 0.0;       // max of conditional - unconditional, <= 0 expected
    double max_catalog_diff = 0.0; // |conditional sum - catalog curve|
    std::vector<double> excess_at; // r values where conditional > unconditional
};

std::vector<CompositionCheck> src_composition_checks(double step = 0.01);

}  // namespace oprelay
