#include <cmath>

#include "doctest.h"
#include "oprelay/errors.hpp"
#include "oprelay/networks.hpp"

using namespace oprelay;
using doctest::Approx;

namespace {

FadingDraw filled(const Topology& t, double v = 1.0) { return FadingDraw{t, std::vector<double>(links(t).size(), v)}; }

void set(FadingDraw& d, const LinkId& l, double v) { d.gains[link_index(d.topology, l)] = v; }

ProtocolSpec proto(Protocol p, bool off = false) {
    ProtocolSpec s;
    s.kind = p;
    s.off_modes = off;
    return s;
}

const SnrPoint kRho10{10.0};

}  // namespace

TEST_SUITE("networks") {

TEST_CASE("mode counts") {
    CHECK(enumerate_modes(Topology::irc(2), proto(Protocol::OrthAF)).size() == 4);
    CHECK(enumerate_modes(Topology::irc(2), proto(Protocol::CF)).size() == 2);
    for (auto p : {Protocol::OrthAF, Protocol::OrthDF, Protocol::NAF, Protocol::DDF, Protocol::CF, Protocol::Genie})
        CHECK(enumerate_modes(Topology::src(2), proto(p)).size() == 3);
    CHECK(enumerate_modes(Topology::on_off(), proto(Protocol::OrthDF)).size() == 2);
    CHECK(enumerate_modes(Topology::marc(3), proto(Protocol::DDF)).size() == 3);
    CHECK(enumerate_modes(Topology::marc(3), proto(Protocol::OrthDF, true)).size() == 6);
    CHECK(enumerate_modes(Topology::xrelay(), proto(Protocol::OrthDF, true)).size() == 6);
    CHECK(enumerate_modes(Topology::gateway(4), proto(Protocol::GatewayDF)).size() == 4);
}

TEST_CASE("every enumerated mode is well formed") {
    const Topology tops[] = {Topology::on_off(), Topology::irc(3),  Topology::src(2),    Topology::marc(2),
                             Topology::brc(3),   Topology::xrelay()};
    for (const auto& t : tops)
        for (auto p : {Protocol::OrthAF, Protocol::OrthDF, Protocol::DDF, Protocol::CF, Protocol::Genie})
            for (const auto& m : enumerate_modes(t, proto(p))) CHECK(is_well_formed(m));
    for (const auto& m : enumerate_modes(Topology::gateway(3), proto(Protocol::GatewayDF))) CHECK(is_well_formed(m));
}

TEST_CASE("unsupported pairs") {
    CHECK_THROWS_AS(enumerate_modes(Topology::gateway(2), proto(Protocol::OrthDF)), UnsupportedCombination);
    CHECK_THROWS_AS(enumerate_modes(Topology::marc(2), proto(Protocol::GatewayDF)), UnsupportedCombination);
    CHECK_THROWS_AS(enumerate_modes(Topology::marc(2), proto(Protocol::CF, true)), UnsupportedCombination);
    CHECK_THROWS_AS(enumerate_modes(Topology::irc(2), proto(Protocol::OrthDF, true)), UnsupportedCombination);
    ProtocolSpec bad = proto(Protocol::CF);
    bad.cf_t = 1.5;
    CHECK_THROWS_AS(enumerate_modes(Topology::irc(2), bad), ConfigError);
}

TEST_CASE("outage indicator on direct and orth-af modes") {
    const Topology t = Topology::on_off();
    FadingDraw d = filled(t);
    set(d, LinkId::sd(1, 1), 0.3);
    const auto modes = enumerate_modes(t, proto(Protocol::OrthAF));
    RatePolicy pol;
    pol.fixed_bits = 2.1;
    CHECK(outage_indicator(d, modes[0], proto(Protocol::OrthAF), kRho10, pol));
    pol.fixed_bits = 0.0;
    CHECK_FALSE(outage_indicator(d, modes[0], proto(Protocol::OrthAF), kRho10, pol));

    set(d, LinkId::sd(1, 1), 0.5);
    set(d, LinkId::sr(1), 1.0);
    set(d, LinkId::rd(1), 2.0);
    pol.fixed_bits = 1.8;
    CHECK_FALSE(outage_indicator(d, modes[1], proto(Protocol::OrthAF), kRho10, pol));
    pol.fixed_bits = 1.85;
    CHECK(outage_indicator(d, modes[1], proto(Protocol::OrthAF), kRho10, pol));
}

TEST_CASE("rate policy") {
    RatePolicy p;
    p.r = 0.5;
    CHECK(p.target_bits(SnrPoint{100}) == Approx(0.5 * std::log2(100.0)));
    p.fixed_bits = 1.0;
    CHECK(p.target_bits(SnrPoint{100}) == 1.0);
}

TEST_CASE("max end-to-end selection and ties") {
    const Topology t = Topology::irc(2);
    Network net(t, proto(Protocol::Genie));
    FadingDraw d = filled(t);
    // identical links: both relayed modes tie, lowest index wins
    CHECK(net.select(SelectionRule::max_e2e(), d, kRho10, 1.0) == 0u);
    set(d, LinkId::sd(2, 2), 3.0);
    CHECK(net.select(SelectionRule::max_e2e(), d, kRho10, 1.0) == 1u);
}

TEST_CASE("direct-link-max picks the strongest direct link") {
    const Topology t = Topology::marc(2);
    Network net(t, proto(Protocol::CF));
    FadingDraw d = filled(t);
    set(d, LinkId::sd(1, 1), 0.4);
    set(d, LinkId::sd(2, 1), 0.1);
    CHECK(net.select(SelectionRule::direct_link_max(), d, kRho10, 1.0) == 0u);
    set(d, LinkId::sd(2, 1), 0.9);
    CHECK(net.select(SelectionRule::direct_link_max(), d, kRho10, 1.0) == 1u);
}

TEST_CASE("direct-link-max with off modes prefers the direct mode when it is up") {
    const Topology t = Topology::marc(2);
    Network net(t, proto(Protocol::OrthDF, true));
    FadingDraw d = filled(t, 0.01);
    set(d, LinkId::sd(1, 1), 5.0);
    // modes: relayed 0, 1 then direct 2, 3
    CHECK(net.select(SelectionRule::direct_link_max(), d, kRho10, 1.0) == 2u);
    set(d, LinkId::sd(1, 1), 0.02);
    CHECK(net.select(SelectionRule::direct_link_max(), d, kRho10, 1.0) == 0u);
}

TEST_CASE("sequential rule on the shared relay channel") {
    const Topology t = Topology::src(2);
    Network net(t, proto(Protocol::OrthDF));
    FadingDraw d = filled(t, 10.0);
    // strong direct links: the all-direct mode supports R and is chosen
    CHECK(net.select(SelectionRule::sequential_src(), d, kRho10, 2.0) == 0u);

    // pair 1 direct link too weak for R/2, pair 2 fine: relay serves pair 2 first
    set(d, LinkId::sd(1, 1), 0.01);
    auto s = net.select(SelectionRule::sequential_src(), d, kRho10, 2.0);
    CHECK(s == 2u);

    // both direct links weak: default to pair 1
    set(d, LinkId::sd(2, 2), 0.01);
    CHECK(net.select(SelectionRule::sequential_src(), d, kRho10, 2.0) == 1u);

    CHECK_THROWS_AS(Network(Topology::src(3), proto(Protocol::OrthDF)).check_rule(SelectionRule::sequential_src()),
                    UnsupportedCombination);
}

TEST_CASE("gateway one-bit selection") {
    const Topology t = Topology::gateway(2);
    RatePolicy pol;
    pol.fixed_bits = 0.5 * std::log2(2.0);  // alpha = (2^{2R} - 1)/rho = 0.1
    FadingDraw d = filled(t);
    set(d, LinkId::rd(1), 0.05);
    set(d, LinkId::rd(2), 0.3);
    set(d, LinkId::sr(1), 2.0);
    set(d, LinkId::sr(2), 0.01);
    auto m = gateway_one_bit_select(d, kRho10, pol);
    REQUIRE(m);
    CHECK(m->destinations == std::vector<int>{2});
    Network net(t, proto(Protocol::GatewayDF));
    CHECK(net.system_outage(SelectionRule::one_bit(), d, kRho10, *pol.fixed_bits));

    set(d, LinkId::rd(2), 0.05);
    CHECK_FALSE(gateway_one_bit_select(d, kRho10, pol));
    CHECK(net.system_outage(SelectionRule::one_bit(), d, kRho10, *pol.fixed_bits));
}

TEST_CASE("one-bit picks the strongest eligible source-relay link") {
    const Topology t = Topology::gateway(3);
    Network net(t, proto(Protocol::GatewayDF));
    FadingDraw d = filled(t);
    set(d, LinkId::rd(1), 0.0);
    set(d, LinkId::sr(1), 9.0);
    set(d, LinkId::sr(2), 0.5);
    set(d, LinkId::sr(3), 0.9);
    CHECK(net.select(SelectionRule::one_bit(), d, kRho10, 0.5) == 2u);
}

TEST_CASE("rule validation") {
    Network irc(Topology::irc(2), proto(Protocol::OrthDF));
    CHECK_THROWS_AS(irc.check_rule(SelectionRule::one_bit()), UnsupportedCombination);
    CHECK_THROWS_AS(irc.check_rule(SelectionRule::fixed(9)), ConfigError);
    Network gw(Topology::gateway(2), proto(Protocol::GatewayDF));
    CHECK_THROWS_AS(gw.check_rule(SelectionRule::direct_link_max()), UnsupportedCombination);
    CHECK(parse_rule(rule_name(RuleKind::SequentialSrc)) == RuleKind::SequentialSrc);
    CHECK_THROWS_AS(parse_rule("best"), ConfigError);
}

TEST_CASE("non-orthogonal AF has no finite-SNR rate") {
    Network net(Topology::irc(2), proto(Protocol::NAF));
    FadingDraw d = filled(Topology::irc(2));
    CHECK_THROWS_AS(net.mode_rate(d, 0, kRho10, 1.0), UnsupportedCombination);
}

TEST_CASE("zero rate is never in outage") {
    Network net(Topology::on_off(), proto(Protocol::OrthDF));
    FadingDraw d = filled(Topology::on_off(), 0.0);
    CHECK_FALSE(net.system_outage(SelectionRule::max_e2e(), d, kRho10, 0.0));
    CHECK(net.system_outage(SelectionRule::max_e2e(), d, kRho10, 0.1));
}

}
