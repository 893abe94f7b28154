#include <cmath>

#include "doctest.h"
#include "oprelay/analysis_compose.hpp"
#include "oprelay/errors.hpp"

using namespace oprelay;
using doctest::Approx;

TEST_SUITE("analysis_compose") {

TEST_CASE("two on/off mode curves compose to the on/off relay curve") {
    const DmtCurve c = compose_upper_bound({ramp(1, 1, 1), ramp(1, 2, 1)});
    const DmtCurve want = dmt_curve("onoff/orth-df");
    for (double r = 0; r <= 1.0 + 1e-12; r += 0.01) CHECK(c.eval(std::min(r, 1.0)) == Approx(want.eval(std::min(r, 1.0))));
    CHECK(c.key.rfind("sum(", 0) == 0);
}

TEST_CASE("single curve composes to itself") {
    const DmtCurve a = dmt_curve("marc/naf:2");
    const DmtCurve c = compose_upper_bound({a});
    for (double r = 0; r <= 1.0; r += 0.05) CHECK(c.eval(r) == a.eval(r));
    CHECK(c.key == a.key);
    CHECK_THROWS_AS(compose_upper_bound({}), ConfigError);
}

TEST_CASE("SRC genie triple") {
    const DmtCurve c = compose_upper_bound({ramp(1, 0.5, 2), ramp(2, 1, 2), ramp(1, 1, 2)});
    const DmtCurve g = dmt_curve("src/genie:2");
    for (double r = 0; r <= 2.0 + 1e-12; r += 0.01) CHECK(c.eval(std::min(r, 2.0)) == Approx(g.eval(std::min(r, 2.0))));
}

TEST_CASE("conditional spec validation") {
    auto s = onoff_conditional_spec(Protocol::OrthDF, 0.1);
    CHECK_NOTHROW(validate(s));
    s.given = {1};
    CHECK_THROWS_AS(validate(s), ConfigError);
    s.given = {0, 0};
    CHECK_THROWS_AS(validate(s), ConfigError);
    s.given = {5};
    CHECK_THROWS_AS(validate(s), ConfigError);
    CHECK_THROWS_AS(onoff_conditional_spec(Protocol::CF, 0.1), UnsupportedCombination);
}

TEST_CASE("conditional outage is flat at r = 0.5") {
    ConditionalOptions opt;
    opt.seed = 3;
    opt.floor = 20000;
    const auto res = estimate_conditional_slope(onoff_conditional_spec(Protocol::OrthDF, 0.5), {10, 15, 20}, opt);
    REQUIRE(res.fit);
    CHECK(std::abs(res.fit->d_hat) < 0.1);
    for (const auto& p : res.points) CHECK(p.estimate.accepted >= opt.floor);
}

TEST_CASE("max end-to-end selection never picks a failing mode while another works") {
    Experiment ex;
    ex.topology = Topology::irc(2);
    ex.protocol.kind = Protocol::OrthDF;
    ex.rule = SelectionRule::max_e2e();
    ex.policy.r = 0.3;
    const auto rep = tightness_check(ex, {5, 10}, 20000, 1);
    CHECK(rep.wrong_total == 0);
    CHECK(rep.draws_total == 40000);
    for (const auto& p : rep.points) CHECK(p.selected_out == p.all_out);
}

TEST_CASE("a fixed rule does pick failing modes") {
    Experiment ex;
    ex.topology = Topology::on_off();
    ex.protocol.kind = Protocol::OrthDF;
    ex.rule = SelectionRule::fixed(0);
    ex.policy.r = 0.3;
    const auto rep = tightness_check(ex, {5}, 20000, 1);
    CHECK(rep.wrong_total > 0);
}

TEST_CASE("SRC composition chains") {
    const auto checks = src_composition_checks(0.01);
    REQUIRE(checks.size() == 4);
    for (const auto& c : checks) {
        CAPTURE(c.protocol);
        CHECK(c.max_excess <= 1e-12);
        if (c.protocol == "cf")
            CHECK(c.max_catalog_diff > 0.1);
        else
            CHECK(c.max_catalog_diff <= 1e-12);
    }
}

}
