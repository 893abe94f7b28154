#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace oprelay {

enum class TopologyFamily { OnOff, Irc, Src, Marc, Brc, XRelay, Gateway };

// n is the pair/user count (M for the gateway). OnOff and XRelay ignore it.
struct Topology {
    TopologyFamily family = TopologyFamily::OnOff;
    int n = 1;

    static Topology on_off() { return {TopologyFamily::OnOff, 1}; }
    static Topology irc(int n) { return {TopologyFamily::Irc, n}; }
    static Topology src(int n) { return {TopologyFamily::Src, n}; }
    static Topology marc(int n) { return {TopologyFamily::Marc, n}; }
    static Topology brc(int n) { return {TopologyFamily::Brc, n}; }
    static Topology xrelay() { return {TopologyFamily::XRelay, 2}; }
    static Topology gateway(int m) { return {TopologyFamily::Gateway, m}; }

    friend bool operator==(const Topology&, const Topology&) = default;
};

void validate(const Topology& t);
std::string to_string(const Topology& t);
std::string family_name(TopologyFamily f);
TopologyFamily parse_family(const std::string& s);

// Largest admissible multiplexing gain for the family.
double r_max(const Topology& t);

enum class LinkKind { SD, SR, RD };

// Node indices are 1-based. SD uses (a=source, b=destination); SR uses a=source;
// RD uses a=destination.
struct LinkId {
    LinkKind kind = LinkKind::SD;
    int a = 1;
    int b = 0;

    static LinkId sd(int i, int j) { return {LinkKind::SD, i, j}; }
    static LinkId sr(int i) { return {LinkKind::SR, i, 0}; }
    static LinkId rd(int j) { return {LinkKind::RD, j, 0}; }

    friend auto operator<=>(const LinkId&, const LinkId&) = default;
};

std::string to_string(const LinkId& l);

// Links in canonical order; gains are stored in this order.
const std::vector<LinkId>& links(const Topology& t);
// Position of l in links(t); throws ConfigError when l is not part of t.
std::size_t link_index(const Topology& t, const LinkId& l);

}  // namespace oprelay
