#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "oprelay/fading.hpp"
#include "oprelay/protocol_mi.hpp"
#include "oprelay/topology.hpp"

namespace oprelay {

struct ProtocolSpec {
    Protocol kind = Protocol::OrthDF;
    bool off_modes = false;  // extra relay-off modes (MARC/BRC/X-relay, orthogonal only)
    double cf_t = 0.5;       // CF time split at finite SNR
};

enum class RelayRole { Off, Orthogonal, NonOrthogonal };

// One message stream inside a mode; link fields index FadingDraw::gains, -1 if unused.
struct Stream {
    int source = 1;
    int dest = 1;
    bool relayed = false;
    int sd = -1;
    int sr = -1;
    int rd = -1;
};

struct AccessMode {
    std::size_t index = 0;
    std::vector<int> sources;
    std::vector<int> destinations;
    RelayRole relay_role = RelayRole::Off;
    double share = 1.0;  // each stream carries share * R
    std::vector<Stream> streams;
    std::string label;
};

// Throws UnsupportedCombination for pairs without a mode set.
std::vector<AccessMode> enumerate_modes(const Topology& topo, const ProtocolSpec& proto);

// Every receiver in the mode hears exactly one message stream.
bool is_well_formed(const AccessMode& m);

enum class RuleKind { MaxEndToEndMI, DirectLinkMax, SequentialSrc, OneBitThreshold, FixedMode };

struct SelectionRule {
    RuleKind kind = RuleKind::MaxEndToEndMI;
    std::size_t fixed_index = 0;
    std::optional<double> alpha;  // one-bit threshold override

    static SelectionRule max_e2e() { return {RuleKind::MaxEndToEndMI, 0, std::nullopt}; }
    static SelectionRule direct_link_max() { return {RuleKind::DirectLinkMax, 0, std::nullopt}; }
    static SelectionRule sequential_src() { return {RuleKind::SequentialSrc, 0, std::nullopt}; }
    static SelectionRule one_bit() { return {RuleKind::OneBitThreshold, 0, std::nullopt}; }
    static SelectionRule fixed(std::size_t i) { return {RuleKind::FixedMode, i, std::nullopt}; }
};

std::string rule_name(RuleKind k);
RuleKind parse_rule(const std::string& s);

// R = r log2(rho), or a fixed number of bits when fixed_bits is set.
struct RatePolicy {
    double r = 0.0;
    std::optional<double> fixed_bits;

    double target_bits(SnrPoint snr) const;
};

class Network {
public:
    Network(const Topology& topo, const ProtocolSpec& proto);

    const Topology& topology() const { return topo_; }
    const ProtocolSpec& protocol() const { return proto_; }
    const std::vector<AccessMode>& modes() const { return modes_; }

    double stream_bits(const FadingDraw& d, const Stream& s, SnrPoint snr, double target) const;

    // min over streams of I_k / share; the mode supports R iff this is >= R.
    double mode_rate(const FadingDraw& d, std::size_t mode, SnrPoint snr, double R) const;
    bool mode_outage(const FadingDraw& d, std::size_t mode, SnrPoint snr, double R) const;

    // nullopt means no mode was chosen (one-bit rule with no eligible pair).
    std::optional<std::size_t> select(const SelectionRule& rule, const FadingDraw& d, SnrPoint snr,
                                      double R) const;

    // Outage of the whole system under a rule.
    bool system_outage(const SelectionRule& rule, const FadingDraw& d, SnrPoint snr, double R) const;

    void check_rule(const SelectionRule& rule) const;

private:
    std::size_t select_max(const FadingDraw& d, SnrPoint snr, double R) const;
    std::size_t select_direct_link_max(const FadingDraw& d, SnrPoint snr, double R) const;
    std::size_t select_sequential_src(const FadingDraw& d, SnrPoint snr, double R) const;
    std::optional<std::size_t> select_one_bit(const FadingDraw& d, SnrPoint snr, double R,
                                              std::optional<double> alpha) const;

    Topology topo_;
    ProtocolSpec proto_;
    std::vector<AccessMode> modes_;
};

std::optional<AccessMode> select_mode(const SelectionRule& rule, const FadingDraw& d, SnrPoint snr,
                                      const RatePolicy& policy, const ProtocolSpec& proto);

bool outage_indicator(const FadingDraw& d, const AccessMode& mode, const ProtocolSpec& proto,
                      SnrPoint snr, const RatePolicy& policy);

// Destinations whose relay link clears alpha = (2^{2R}-1)/rho are eligible; the
// one with the strongest source-relay link wins.
std::optional<AccessMode> gateway_one_bit_select(const FadingDraw& d, SnrPoint snr,
                                                 const RatePolicy& policy);

}  // namespace oprelay
