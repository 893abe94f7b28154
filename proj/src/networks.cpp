#include "oprelay/networks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "oprelay/errors.hpp"

namespace oprelay {

namespace {

bool is_orth(Protocol p) { return p == Protocol::OrthAF || p == Protocol::OrthDF; }

Stream direct_stream(const Topology& t, int s, int d) {
    Stream st;
    st.source = s;
    st.dest = d;
    st.sd = static_cast<int>(link_index(t, LinkId::sd(s, d)));
    return st;
}

// sr_src / rd_dst name the relay links, which differ from (s, d) for BRC/MARC.
Stream relayed_stream(const Topology& t, int s, int d, int sr_src, int rd_dst) {
    Stream st;
    st.source = s;
    st.dest = d;
    st.relayed = true;
    st.sd = static_cast<int>(link_index(t, LinkId::sd(s, d)));
    st.sr = static_cast<int>(link_index(t, LinkId::sr(sr_src)));
    st.rd = static_cast<int>(link_index(t, LinkId::rd(rd_dst)));
    return st;
}

AccessMode single(std::size_t idx, Stream st, RelayRole role, std::string label) {
    AccessMode m;
    m.index = idx;
    m.sources = {st.source};
    m.destinations = {st.dest};
    m.relay_role = st.relayed ? role : RelayRole::Off;
    m.share = 1.0;
    m.streams = {st};
    m.label = std::move(label);
    return m;
}

std::string pair_label(const char* kind, int s, int d) {
    return std::string(kind) + ":s" + std::to_string(s) + "d" + std::to_string(d);
}

}  // namespace

std::vector<AccessMode> enumerate_modes(const Topology& topo, const ProtocolSpec& proto) {
    validate(topo);
    const Protocol p = proto.kind;
    const int n = topo.n;
    const RelayRole role = is_orth(p) ? RelayRole::Orthogonal : RelayRole::NonOrthogonal;
    auto unsupported = [&]() {
        return UnsupportedCombination("no mode set for " + to_string(topo) + " with " +
                                      protocol_name(p) + (proto.off_modes ? " (off modes)" : ""));
    };
    if (p == Protocol::GatewayDF && topo.family != TopologyFamily::Gateway) throw unsupported();
    if (proto.off_modes && !is_orth(p)) throw unsupported();
    if (proto.cf_t < 0.0 || proto.cf_t > 1.0) throw ConfigError("cf_t must lie in [0, 1]");

    std::vector<AccessMode> out;
    auto push = [&](Stream st, const char* kind) {
        out.push_back(single(out.size(), st, role, pair_label(kind, st.source, st.dest)));
    };

    switch (topo.family) {
        case TopologyFamily::OnOff:
        case TopologyFamily::Irc: {
            if (proto.off_modes) throw unsupported();
            if (p == Protocol::Direct || is_orth(p))
                for (int i = 1; i <= n; ++i) push(direct_stream(topo, i, i), "direct");
            if (p != Protocol::Direct)
                for (int i = 1; i <= n; ++i) push(relayed_stream(topo, i, i, i, i), "relayed");
            break;
        }
        case TopologyFamily::Src: {
            if (proto.off_modes || p == Protocol::Direct) throw unsupported();
            AccessMode m0;
            m0.index = 0;
            m0.relay_role = RelayRole::Off;
            m0.share = 1.0 / n;
            m0.label = "all-direct";
            for (int i = 1; i <= n; ++i) {
                m0.sources.push_back(i);
                m0.destinations.push_back(i);
                m0.streams.push_back(direct_stream(topo, i, i));
            }
            out.push_back(m0);
            for (int i = 1; i <= n; ++i) push(relayed_stream(topo, i, i, i, i), "relayed");
            break;
        }
        case TopologyFamily::Marc:
        case TopologyFamily::Brc: {
            if (p == Protocol::Direct) throw unsupported();
            const bool marc = topo.family == TopologyFamily::Marc;
            for (int i = 1; i <= n; ++i) {
                if (marc)
                    push(relayed_stream(topo, i, 1, i, 1), "relayed");
                else
                    push(relayed_stream(topo, 1, i, 1, i), "relayed");
            }
            if (proto.off_modes)
                for (int i = 1; i <= n; ++i)
                    push(marc ? direct_stream(topo, i, 1) : direct_stream(topo, 1, i), "direct");
            break;
        }
        case TopologyFamily::XRelay: {
            if (p == Protocol::Direct) throw unsupported();
            push(relayed_stream(topo, 1, 1, 1, 1), "relayed");
            push(relayed_stream(topo, 2, 2, 2, 2), "relayed");
            if (p == Protocol::Genie) {
                // genie turns the cross links into MISO links through the relay
                Stream c = direct_stream(topo, 1, 2);
                c.relayed = true;
                c.rd = static_cast<int>(link_index(topo, LinkId::rd(2)));
                Stream d = direct_stream(topo, 2, 1);
                d.relayed = true;
                d.rd = static_cast<int>(link_index(topo, LinkId::rd(1)));
                push(c, "genie");
                push(d, "genie");
            } else {
                push(direct_stream(topo, 1, 2), "direct");
                push(direct_stream(topo, 2, 1), "direct");
            }
            if (proto.off_modes) {
                push(direct_stream(topo, 1, 1), "direct");
                push(direct_stream(topo, 2, 2), "direct");
            }
            break;
        }
        case TopologyFamily::Gateway: {
            if (p != Protocol::GatewayDF || proto.off_modes) throw unsupported();
            for (int i = 1; i <= n; ++i) {
                Stream st;
                st.source = i;
                st.dest = i;
                st.relayed = true;
                st.sr = static_cast<int>(link_index(topo, LinkId::sr(i)));
                st.rd = static_cast<int>(link_index(topo, LinkId::rd(i)));
                out.push_back(single(out.size(), st, RelayRole::Orthogonal, pair_label("two-hop", i, i)));
            }
            break;
        }
    }
    return out;
}

bool is_well_formed(const AccessMode& m) {
    if (m.streams.empty() || !(m.share > 0.0)) return false;
    std::set<int> dests, srcs;
    for (const auto& s : m.streams) {
        if (!dests.insert(s.dest).second) return false;
        if (!srcs.insert(s.source).second) return false;
    }
    return true;
}

std::string rule_name(RuleKind k) {
    switch (k) {
        case RuleKind::MaxEndToEndMI: return "max-e2e";
        case RuleKind::DirectLinkMax: return "direct-link-max";
        case RuleKind::SequentialSrc: return "sequential-src";
        case RuleKind::OneBitThreshold: return "one-bit";
        case RuleKind::FixedMode: return "fixed";
    }
    return "?";
}

RuleKind parse_rule(const std::string& s) {
    static const std::map<std::string, RuleKind> names = {
        {"max-e2e", RuleKind::MaxEndToEndMI},
        {"direct-link-max", RuleKind::DirectLinkMax},
        {"sequential-src", RuleKind::SequentialSrc},
        {"one-bit", RuleKind::OneBitThreshold},
        {"fixed", RuleKind::FixedMode}};
    auto it = names.find(s);
    if (it == names.end()) throw ConfigError("unknown selection rule: " + s);
    return it->second;
}

double RatePolicy::target_bits(SnrPoint snr) const {
    if (fixed_bits) return *fixed_bits;
    return r * std::log2(snr.rho);
}

Network::Network(const Topology& topo, const ProtocolSpec& proto)
    : topo_(topo), proto_(proto), modes_(enumerate_modes(topo, proto)) {}

double Network::stream_bits(const FadingDraw& d, const Stream& s, SnrPoint snr, double target) const {
    const auto& g = d.gains;
    if (!s.relayed) return mi_direct(g[s.sd], snr, false).bits;
    switch (proto_.kind) {
        case Protocol::OrthAF: return mi_orth_af(g[s.sd], g[s.sr], g[s.rd], snr).bits;
        case Protocol::OrthDF: return mi_orth_df(g[s.sd], g[s.sr], g[s.rd], snr, target).bits;
        case Protocol::DDF: return mi_ddf(g[s.sd], g[s.sr], g[s.rd], snr, target).bits;
        case Protocol::CF: return mi_cf_cutsets(g[s.sd], g[s.sr], g[s.rd], snr, {proto_.cf_t}).bits;
        case Protocol::Genie: return mi_genie_miso(g[s.sd], g[s.rd], snr).bits;
        case Protocol::GatewayDF: return mi_gateway_df(g[s.sr], g[s.rd], snr).bits;
        case Protocol::NAF:
            throw UnsupportedCombination("non-orthogonal AF has no finite-SNR mutual information here");
        case Protocol::Direct: break;
    }
    return mi_direct(g[s.sd], snr, false).bits;
}

double Network::mode_rate(const FadingDraw& d, std::size_t mode, SnrPoint snr, double R) const {
    const AccessMode& m = modes_.at(mode);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : m.streams) best = std::min(best, stream_bits(d, s, snr, R * m.share) / m.share);
    return best;
}

bool Network::mode_outage(const FadingDraw& d, std::size_t mode, SnrPoint snr, double R) const {
    if (R <= 0.0) return false;
    return mode_rate(d, mode, snr, R) < R;
}

void Network::check_rule(const SelectionRule& rule) const {
    switch (rule.kind) {
        case RuleKind::MaxEndToEndMI: return;
        case RuleKind::FixedMode:
            if (rule.fixed_index >= modes_.size()) throw ConfigError("fixed mode index out of range");
            return;
        case RuleKind::SequentialSrc:
            if (topo_.family != TopologyFamily::Src || topo_.n != 2)
                throw UnsupportedCombination("sequential rule needs the 2-pair shared relay channel");
            return;
        case RuleKind::OneBitThreshold:
            if (topo_.family != TopologyFamily::Gateway)
                throw UnsupportedCombination("one-bit rule needs the gateway channel");
            return;
        case RuleKind::DirectLinkMax:
            if (topo_.family == TopologyFamily::Gateway)
                throw UnsupportedCombination("gateway has no direct links");
            return;
    }
}

std::size_t Network::select_max(const FadingDraw& d, SnrPoint snr, double R) const {
    std::size_t best = 0;
    double best_rate = -1.0;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        double v = mode_rate(d, i, snr, R);
        if (v > best_rate) {
            best_rate = v;
            best = i;
        }
    }
    return best;
}

std::size_t Network::select_direct_link_max(const FadingDraw& d, SnrPoint snr, double R) const {
    std::size_t best = modes_.size();
    double best_g = -1.0;
    for (const auto& m : modes_) {
        if (m.streams.size() != 1 || !m.streams[0].relayed) continue;
        double g = d.gains[m.streams[0].sd];
        if (g > best_g) {
            best_g = g;
            best = m.index;
        }
    }
    if (best == modes_.size()) throw UnsupportedCombination("no relayed single-stream modes");
    if (proto_.off_modes) {
        const Stream& s = modes_[best].streams[0];
        for (const auto& m : modes_) {
            if (m.streams.size() == 1 && !m.streams[0].relayed && m.streams[0].source == s.source &&
                m.streams[0].dest == s.dest) {
                if (!mode_outage(d, m.index, snr, R)) return m.index;
                break;
            }
        }
    }
    return best;
}

std::size_t Network::select_sequential_src(const FadingDraw& d, SnrPoint snr, double R) const {
    if (!mode_outage(d, 0, snr, R)) return 0;
    // relayed mode i + 1 serves pair i
    std::size_t second = 1;
    for (std::size_t i = 1; i < modes_.size(); ++i) {
        const Stream& s = modes_[i].streams[0];
        if (mi_direct(d.gains[s.sd], snr, false).bits >= R / 2.0) {
            second = i;
            break;
        }
    }
    if (!mode_outage(d, second, snr, R)) return second;
    return second == 1 ? 2 : 1;
}

std::optional<std::size_t> Network::select_one_bit(const FadingDraw& d, SnrPoint snr, double R,
                                                   std::optional<double> alpha) const {
    const double a = alpha ? *alpha : orth_df_threshold(R, snr);
    std::optional<std::size_t> pick;
    double best_sr = -1.0;
    for (const auto& m : modes_) {
        const Stream& s = m.streams[0];
        if (d.gains[s.rd] < a) continue;
        if (d.gains[s.sr] > best_sr) {
            best_sr = d.gains[s.sr];
            pick = m.index;
        }
    }
    return pick;
}

std::optional<std::size_t> Network::select(const SelectionRule& rule, const FadingDraw& d, SnrPoint snr,
                                           double R) const {
    switch (rule.kind) {
        case RuleKind::MaxEndToEndMI: return select_max(d, snr, R);
        case RuleKind::DirectLinkMax: return select_direct_link_max(d, snr, R);
        case RuleKind::SequentialSrc: return select_sequential_src(d, snr, R);
        case RuleKind::OneBitThreshold: return select_one_bit(d, snr, R, rule.alpha);
        case RuleKind::FixedMode: return rule.fixed_index;
    }
    return std::nullopt;
}

bool Network::system_outage(const SelectionRule& rule, const FadingDraw& d, SnrPoint snr, double R) const {
    if (R <= 0.0) return false;
    auto m = select(rule, d, snr, R);
    if (!m) return true;
    return mode_outage(d, *m, snr, R);
}

std::optional<AccessMode> select_mode(const SelectionRule& rule, const FadingDraw& d, SnrPoint snr,
                                      const RatePolicy& policy, const ProtocolSpec& proto) {
    Network net(d.topology, proto);
    net.check_rule(rule);
    auto m = net.select(rule, d, snr, policy.target_bits(snr));
    if (!m) return std::nullopt;
    return net.modes()[*m];
}

bool outage_indicator(const FadingDraw& d, const AccessMode& mode, const ProtocolSpec& proto,
                      SnrPoint snr, const RatePolicy& policy) {
    const double R = policy.target_bits(snr);
    if (R <= 0.0) return false;
    Network net(d.topology, proto);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : mode.streams)
        best = std::min(best, net.stream_bits(d, s, snr, R * mode.share) / mode.share);
    return best < R;
}

std::optional<AccessMode> gateway_one_bit_select(const FadingDraw& d, SnrPoint snr,
                                                 const RatePolicy& policy) {
    return select_mode(SelectionRule::one_bit(), d, snr, policy, ProtocolSpec{Protocol::GatewayDF});
}

}  // namespace oprelay
