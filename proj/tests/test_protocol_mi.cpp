#include <cmath>

#include "doctest.h"
#include "oprelay/errors.hpp"
#include "oprelay/protocol_mi.hpp"

using namespace oprelay;
using doctest::Approx;

namespace {
const SnrPoint kRho10{10.0};
}

TEST_SUITE("protocol_mi") {

TEST_CASE("relay combine") {
    CHECK(relay_combine(1, 1) == Approx(1.0 / 3.0));
    CHECK(relay_combine(0, 7.5) == 0.0);
    CHECK(relay_combine(10, 20) == Approx(200.0 / 31.0));
}

TEST_CASE("direct link") {
    CHECK(mi_direct(0.3, kRho10, false).bits == Approx(2.0));
    CHECK(mi_direct(0.3, kRho10, true).bits == Approx(1.0));
    CHECK(mi_direct(0.0, kRho10, false).bits == 0.0);
}

TEST_CASE("orthogonal amplify-forward") {
    CHECK(mi_orth_af(0.5, 1, 2, kRho10).bits == Approx(0.5 * std::log2(1 + 5 + 200.0 / 31.0)));
    CHECK(mi_orth_af(0.5, 1, 2, kRho10).bits == Approx(1.81915).epsilon(1e-5));
    CHECK(mi_orth_af(0, 0, 0, kRho10).bits == 0.0);
    CHECK(mi_orth_af(0.7, 0, 3, kRho10).bits == Approx(0.5 * std::log2(1 + 7.0)));
}

TEST_CASE("orthogonal decode-forward") {
    // R = 1 gives threshold (2^2 - 1)/10 = 0.3
    CHECK(orth_df_threshold(1.0, kRho10) == Approx(0.3));
    CHECK(mi_orth_df(0.3, 0.1, 0.5, kRho10, 1.0).bits == Approx(1.40368).epsilon(1e-5));
    CHECK(mi_orth_df(0.3, 1.0, 0.5, kRho10, 1.0).bits == Approx(1.58496).epsilon(1e-5));
    CHECK(mi_orth_df(0, 0.1, 0, kRho10, 1.0).bits == 0.0);
    CHECK(mi_orth_df(0, 5.0, 0, kRho10, 1.0).bits == 0.0);
}

TEST_CASE("dynamic decode-forward listening fraction") {
    CHECK(ddf_listen_fraction(1.5, kRho10, 2.0).t == Approx(0.5));
    CHECK(ddf_listen_fraction(0.0, kRho10, 2.0).t == 1.0);
    CHECK(ddf_listen_fraction(0.3, kRho10, 2.0).t == 1.0);
}

TEST_CASE("dynamic decode-forward mutual information") {
    const auto m = mi_ddf(0.1, 1.5, 0.5, kRho10, 2.0);
    CHECK(m.bits == Approx(0.5 * std::log2(2.0) + 0.5 * std::log2(7.0)));
    CHECK(m.bits == Approx(1.9037).epsilon(1e-4));
    REQUIRE(m.listen_fraction);
    CHECK(*m.listen_fraction == Approx(0.5));
    CHECK(mi_ddf(0.4, 3.0, 0.0, kRho10, 1.0).bits == Approx(std::log2(1 + 4.0)));
    // huge g_sr drives t towards 0 and the rate towards the combined link
    double prev = 0.0;
    for (double g : {1e3, 1e30, 1e300}) {
        const auto big = mi_ddf(0.0, g, 1.0, kRho10, 1.0);
        CHECK(big.bits == Approx((1 - *big.listen_fraction) * std::log2(11.0)));
        CHECK(big.bits > prev);
        prev = big.bits;
    }
    CHECK(std::abs(prev - std::log2(11.0)) < 0.01);
}

TEST_CASE("compress-forward cutsets") {
    const auto m = mi_cf_cutsets(1, 2, 3, kRho10, {0.5});
    CHECK(m.bits == Approx(0.5 * std::log2(31.0) + 0.5 * std::log2(11.0)));
    CHECK(m.bits == Approx(4.2067).epsilon(1e-4));
    CHECK(m.binding == Cutset::BC);
    const auto s = mi_cf_cutsets(0.7, 0.7, 0.7, kRho10, {0.5});
    CHECK(s.binding == Cutset::Both);
    const auto z = mi_cf_cutsets(0.4, 0.0, 2.0, kRho10, {0.5});
    CHECK(z.bits == Approx(std::log2(1 + 4.0)));
    CHECK(z.binding == Cutset::BC);
}

TEST_CASE("genie and gateway links") {
    CHECK(mi_genie_miso(0.3, 0.5, kRho10).bits == Approx(std::log2(1 + 8.0)));
    CHECK(mi_gateway_df(0.3, 0.9, kRho10).bits == Approx(1.0));
    CHECK(mi_gateway_df(5.0, 0.1, kRho10).bits == Approx(0.5));
    CHECK(mi_gateway_df(0.0, 3.0, kRho10).bits == 0.0);
}

TEST_CASE("selection metrics") {
    CHECK(naf_selection_metric(1, 1, 1) == Approx(0.5));
    CHECK(naf_selection_metric(0, 1, 1) == 0.0);
    CHECK(naf_selection_metric(2, 3, 1) == Approx(2.0 * 2.0 * 3.0 / 4.0));
    CHECK(naf_selection_metric(2, 0, 0) == 0.0);
    CHECK(cf_selection_metric(1, 1, 1) == Approx(1.0));
    CHECK(cf_selection_metric(2, 0, 5) == 0.0);
    CHECK(cf_selection_metric(3, 1, 2) == Approx(12.0 / 7.0));
}

TEST_CASE("protocol names round trip") {
    for (auto p : {Protocol::Direct, Protocol::OrthAF, Protocol::OrthDF, Protocol::NAF, Protocol::DDF, Protocol::CF,
                   Protocol::Genie, Protocol::GatewayDF})
        CHECK(parse_protocol(protocol_name(p)) == p);
    CHECK_THROWS(parse_protocol("amplify"));
}

}
