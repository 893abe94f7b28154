#pragma once

#include <optional>
#include <string>

#include "oprelay/fading.hpp"

namespace oprelay {

enum class Protocol { Direct, OrthAF, OrthDF, NAF, DDF, CF, Genie, GatewayDF };

std::string protocol_name(Protocol p);
Protocol parse_protocol(const std::string& s);

// Fraction of the interval the relay spends listening.
struct TimeSplit {
    double t = 0.5;
};

enum class Cutset { None, BC, MAC, Both };

struct MiResult {
    double bits = 0.0;
    Protocol protocol = Protocol::Direct;
    std::optional<double> listen_fraction;  // DDF
    Cutset binding = Cutset::None;          // CF
};

// f(x, y) = xy / (x + y + 1)
inline double relay_combine(double x, double y) { return x * y / (x + y + 1.0); }

MiResult mi_direct(double g_sd, SnrPoint snr, bool half_interval);
MiResult mi_orth_af(double g_sd, double g_sr, double g_rd, SnrPoint snr);

// Decode threshold on g_sr is (2^{2R} - 1)/rho.
double orth_df_threshold(double target_bits, SnrPoint snr);
MiResult mi_orth_df(double g_sd, double g_sr, double g_rd, SnrPoint snr, double target_bits);

TimeSplit ddf_listen_fraction(double g_sr, SnrPoint snr, double target_bits);
MiResult mi_ddf(double g_sd, double g_sr, double g_rd, SnrPoint snr, double target_bits);

// min of the two cutset bounds; here (1 - t) weights the listening phase.
MiResult mi_cf_cutsets(double g_sd, double g_sr, double g_rd, SnrPoint snr, TimeSplit t);

// Relay knows the message for free: 2x1 MISO.
MiResult mi_genie_miso(double g_sd, double g_rd, SnrPoint snr);

MiResult mi_gateway_df(double g_sr, double g_rd, SnrPoint snr);

double naf_selection_metric(double g_ii, double g_ir, double g_ri);
double cf_selection_metric(double g_sr, double g_sd, double g_rd);

}  // namespace oprelay
