#include "oprelay/protocol_mi.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "oprelay/errors.hpp"

namespace oprelay {

std::string protocol_name(Protocol p) {
    switch (p) {
        case Protocol::Direct: return "direct";
        case Protocol::OrthAF: return "orth-af";
        case Protocol::OrthDF: return "orth-df";
        case Protocol::NAF: return "naf";
        case Protocol::DDF: return "ddf";
        case Protocol::CF: return "cf";
        case Protocol::Genie: return "genie";
        case Protocol::GatewayDF: return "gateway-df";
    }
    return "?";
}

Protocol parse_protocol(const std::string& s) {
    static const std::map<std::string, Protocol> names = {
        {"direct", Protocol::Direct}, {"orth-af", Protocol::OrthAF}, {"orth-df", Protocol::OrthDF},
        {"naf", Protocol::NAF},       {"ddf", Protocol::DDF},        {"cf", Protocol::CF},
        {"genie", Protocol::Genie},   {"gateway-df", Protocol::GatewayDF}};
    auto it = names.find(s);
    if (it == names.end()) throw ConfigError("unknown protocol: " + s);
    return it->second;
}

MiResult mi_direct(double g_sd, SnrPoint snr, bool half_interval) {
    double b = std::log2(1.0 + g_sd * snr.rho);
    return {half_interval ? 0.5 * b : b, Protocol::Direct, std::nullopt, Cutset::None};
}

MiResult mi_orth_af(double g_sd, double g_sr, double g_rd, SnrPoint snr) {
    const double rho = snr.rho;
    double b = 0.5 * std::log2(1.0 + g_sd * rho + relay_combine(g_sr * rho, g_rd * rho));
    return {b, Protocol::OrthAF, std::nullopt, Cutset::None};
}

double orth_df_threshold(double target_bits, SnrPoint snr) {
    return (std::exp2(2.0 * target_bits) - 1.0) / snr.rho;
}

MiResult mi_orth_df(double g_sd, double g_sr, double g_rd, SnrPoint snr, double target_bits) {
    double u = g_sr < orth_df_threshold(target_bits, snr) ? 2.0 * g_sd : g_sd + g_rd;
    return {0.5 * std::log2(1.0 + snr.rho * u), Protocol::OrthDF, std::nullopt, Cutset::None};
}

TimeSplit ddf_listen_fraction(double g_sr, SnrPoint snr, double target_bits) {
    double c = std::log2(1.0 + g_sr * snr.rho);
    if (c <= 0.0) return {1.0};
    return {std::min(1.0, target_bits / c)};
}

MiResult mi_ddf(double g_sd, double g_sr, double g_rd, SnrPoint snr, double target_bits) {
    const double t = ddf_listen_fraction(g_sr, snr, target_bits).t;
    const double rho = snr.rho;
    double b = t * std::log2(1.0 + g_sd * rho) + (1.0 - t) * std::log2(1.0 + (g_sd + g_rd) * rho);
    return {b, Protocol::DDF, t, Cutset::None};
}

MiResult mi_cf_cutsets(double g_sd, double g_sr, double g_rd, SnrPoint snr, TimeSplit ts) {
    const double t = ts.t;
    const double rho = snr.rho;
    const double direct = std::log2(1.0 + g_sd * rho);
    double i_bc = (1.0 - t) * std::log2(1.0 + (g_sd + g_sr) * rho) + t * direct;
    double i_mac = (1.0 - t) * direct + t * std::log2(1.0 + (g_sd + g_rd) * rho);
    MiResult res{std::min(i_bc, i_mac), Protocol::CF, std::nullopt, Cutset::None};
    if (i_bc < i_mac)
        res.binding = Cutset::BC;
    else if (i_mac < i_bc)
        res.binding = Cutset::MAC;
    else
        res.binding = Cutset::Both;
    return res;
}

MiResult mi_genie_miso(double g_sd, double g_rd, SnrPoint snr) {
    return {std::log2(1.0 + (g_sd + g_rd) * snr.rho), Protocol::Genie, std::nullopt, Cutset::None};
}

MiResult mi_gateway_df(double g_sr, double g_rd, SnrPoint snr) {
    return {0.5 * std::log2(1.0 + snr.rho * std::min(g_sr, g_rd)), Protocol::GatewayDF,
            std::nullopt, Cutset::None};
}

double naf_selection_metric(double g_ii, double g_ir, double g_ri) {
    double den = g_ri + g_ir;
    if (den <= 0.0) return 0.0;
    return g_ii * g_ii * g_ir / den;
}

double cf_selection_metric(double g_sr, double g_sd, double g_rd) {
    double a = g_sr + g_sd;
    double b = g_rd + g_sd;
    double den = a + b;
    if (den <= 0.0) return 0.0;
    return a * b * g_sd / den;
}

}  // namespace oprelay
