#include "oprelay/topology.hpp"

#include <map>
#include <mutex>

#include "oprelay/errors.hpp"

namespace oprelay {

void validate(const Topology& t) {
    if (t.n < 1) throw ConfigError("node count must be >= 1");
    if (t.family == TopologyFamily::OnOff && t.n != 1) throw ConfigError("on/off relay has one pair");
    if (t.family == TopologyFamily::XRelay && t.n != 2) throw ConfigError("x-relay is fixed at 2x2");
}

std::string family_name(TopologyFamily f) {
    switch (f) {
        case TopologyFamily::OnOff: return "onoff";
        case TopologyFamily::Irc: return "irc";
        case TopologyFamily::Src: return "src";
        case TopologyFamily::Marc: return "marc";
        case TopologyFamily::Brc: return "brc";
        case TopologyFamily::XRelay: return "xrelay";
        case TopologyFamily::Gateway: return "gateway";
    }
    return "?";
}

TopologyFamily parse_family(const std::string& s) {
    static const std::map<std::string, TopologyFamily> names = {
        {"onoff", TopologyFamily::OnOff}, {"irc", TopologyFamily::Irc},
        {"src", TopologyFamily::Src},     {"marc", TopologyFamily::Marc},
        {"brc", TopologyFamily::Brc},     {"xrelay", TopologyFamily::XRelay},
        {"gateway", TopologyFamily::Gateway}};
    auto it = names.find(s);
    if (it == names.end()) throw ConfigError("unknown topology: " + s);
    return it->second;
}

std::string to_string(const Topology& t) {
    return family_name(t.family) + "(" + std::to_string(t.n) + ")";
}

double r_max(const Topology& t) {
    switch (t.family) {
        case TopologyFamily::Src: return static_cast<double>(t.n);
        case TopologyFamily::Gateway: return 0.5;
        default: return 1.0;
    }
}

std::string to_string(const LinkId& l) {
    switch (l.kind) {
        case LinkKind::SD: return "sd" + std::to_string(l.a) + std::to_string(l.b);
        case LinkKind::SR: return "s" + std::to_string(l.a) + "r";
        case LinkKind::RD: return "rd" + std::to_string(l.a);
    }
    return "?";
}

namespace {

std::vector<LinkId> build_links(const Topology& t) {
    std::vector<LinkId> out;
    const int n = t.n;
    switch (t.family) {
        case TopologyFamily::OnOff:
            out = {LinkId::sd(1, 1), LinkId::sr(1), LinkId::rd(1)};
            break;
        case TopologyFamily::Irc:
        case TopologyFamily::Src:
            for (int i = 1; i <= n; ++i) {
                out.push_back(LinkId::sd(i, i));
                out.push_back(LinkId::sr(i));
                out.push_back(LinkId::rd(i));
            }
            break;
        case TopologyFamily::Marc:
            for (int i = 1; i <= n; ++i) out.push_back(LinkId::sd(i, 1));
            for (int i = 1; i <= n; ++i) out.push_back(LinkId::sr(i));
            out.push_back(LinkId::rd(1));
            break;
        case TopologyFamily::Brc:
            for (int j = 1; j <= n; ++j) out.push_back(LinkId::sd(1, j));
            out.push_back(LinkId::sr(1));
            for (int j = 1; j <= n; ++j) out.push_back(LinkId::rd(j));
            break;
        case TopologyFamily::XRelay:
            out = {LinkId::sd(1, 1), LinkId::sd(1, 2), LinkId::sd(2, 1), LinkId::sd(2, 2),
                   LinkId::sr(1),    LinkId::sr(2),    LinkId::rd(1),    LinkId::rd(2)};
            break;
        case TopologyFamily::Gateway:
            for (int i = 1; i <= n; ++i) {
                out.push_back(LinkId::sr(i));
                out.push_back(LinkId::rd(i));
            }
            break;
    }
    return out;
}

}  // namespace

const std::vector<LinkId>& links(const Topology& t) {
    validate(t);
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<LinkId>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(static_cast<int>(t.family), t.n);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, build_links(t)).first;
    return it->second;
}

std::size_t link_index(const Topology& t, const LinkId& l) {
    const auto& ls = links(t);
    for (std::size_t i = 0; i < ls.size(); ++i)
        if (ls[i] == l) return i;
    throw ConfigError("link " + to_string(l) + " is not part of " + to_string(t));
}

}  // namespace oprelay
