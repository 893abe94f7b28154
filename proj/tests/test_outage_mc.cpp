#include <cmath>

#include "doctest.h"
#include "oprelay/errors.hpp"
#include "oprelay/outage_mc.hpp"

using namespace oprelay;
using doctest::Approx;

namespace {

double sigma(double p, std::uint64_t n) { return std::sqrt(p * (1 - p) / static_cast<double>(n)); }

RatePolicy fixed_bits(double b) {
    RatePolicy p;
    p.fixed_bits = b;
    return p;
}

RatePolicy mux(double r) {
    RatePolicy p;
    p.r = r;
    return p;
}

Experiment gateway(int M, RuleKind rule, double r) {
    Experiment ex;
    ex.topology = Topology::gateway(M);
    ex.protocol.kind = Protocol::GatewayDF;
    ex.rule.kind = rule;
    ex.policy = mux(r);
    return ex;
}

}  // namespace

TEST_SUITE("outage_mc") {

TEST_CASE("wilson interval") {
    auto ci = wilson_interval(0, 1000);
    CHECK(ci.lo == 0.0);
    CHECK(ci.hi == Approx(0.003));
    ci = wilson_interval(50, 100);
    CHECK(ci.lo == Approx(0.4038).epsilon(1e-3));
    CHECK(ci.hi == Approx(0.5962).epsilon(1e-3));
    ci = wilson_interval(100, 100);
    CHECK(ci.hi == 1.0);
}

TEST_CASE("direct link at 10 dB, one bit") {
    const auto ex = direct_link_experiment(fixed_bits(1.0));
    const std::uint64_t n = 1000000;
    const auto pt = estimate_outage(ex, 10.0, n, 3);
    const double p = -std::expm1(-0.1);
    CHECK(p == Approx(0.09516).epsilon(1e-4));
    CHECK(std::abs(pt.p_hat - p) < 3 * sigma(p, n));
    CHECK(pt.ci95.lo <= pt.p_hat);
    CHECK(pt.ci95.hi >= pt.p_hat);
    AnalyticParams ap;
    ap.rho = 10;
    ap.fixed_bits = 1.0;
    CHECK(analytic_outage(AnalyticFormula::DirectLink, ap) == Approx(p));
}

TEST_CASE("zero rate never fails") {
    const auto pt = estimate_outage(direct_link_experiment(mux(0.0)), 10.0, 1000, 1);
    CHECK(pt.p_hat == 0.0);
    CHECK(pt.outages == 0);
    CHECK(pt.ci95.hi == Approx(0.003));
}

TEST_CASE("too few trials") {
    CHECK_THROWS_AS(estimate_outage(direct_link_experiment(mux(0.1)), 10.0, 10, 1), ConfigError);
}

TEST_CASE("gateway with full CSI") {
    AnalyticParams ap;
    ap.rho = 10;
    ap.r = 0.25;
    ap.M = 2;
    const double x = (std::pow(10.0, 0.5) - 1) / 10;
    CHECK(x == Approx(0.21623).epsilon(1e-4));
    const double p = analytic_outage(AnalyticFormula::GatewayFullCsi, ap);
    CHECK(p == Approx(std::pow(1 - std::exp(-2 * x), 2)));
    CHECK(p == Approx(0.123264).epsilon(1e-5));
    const std::uint64_t n = 1000000;
    const auto pt = estimate_outage(gateway(2, RuleKind::MaxEndToEndMI, 0.25), 10.0, n, 11);
    CHECK(std::abs(pt.p_hat - p) < 3 * sigma(p, n));
}

TEST_CASE("gateway one-bit closed form, term by term") {
    AnalyticParams ap;
    ap.M = 2;
    ap.alpha = 0.1;
    const double q = 1 - std::exp(-0.1);
    const double m0 = q * q, m1 = 2 * std::exp(-0.1) * q * q, m2 = std::exp(-0.2) * q * q;
    CHECK(m0 == Approx(0.0090560).epsilon(1e-4));
    CHECK(m1 == Approx(0.016388).epsilon(1e-4));
    CHECK(m2 == Approx(0.0074143).epsilon(1e-4));
    CHECK(analytic_outage(AnalyticFormula::GatewayOneBit, ap) == Approx(m0 + m1 + m2));
    CHECK(analytic_outage(AnalyticFormula::GatewayOneBit, ap) == Approx(0.032858).epsilon(1e-4));
}

TEST_CASE("gateway one-bit Monte Carlo") {
    AnalyticParams ap;
    ap.rho = std::pow(10.0, 1.5);
    ap.r = 0.2;
    ap.M = 2;
    const double p = analytic_outage(AnalyticFormula::GatewayOneBit, ap);
    const std::uint64_t n = 1000000;
    const auto pt = estimate_outage(gateway(2, RuleKind::OneBitThreshold, 0.2), 15.0, n, 5);
    CHECK(std::abs(pt.p_hat - p) < 3 * sigma(p, n));
}

TEST_CASE("conditional AF expression at 20 dB, r = 0.5") {
    CHECK(cond_g1(100, 0.5) == Approx(0.09));
    CHECK(cond_g2(100, 0.5) == Approx(0.99));
    AnalyticParams ap;
    ap.rho = 100;
    ap.r = 0.5;
    const double g1 = 0.09, g2 = 0.99;
    const double oracle = (1 - std::exp(-g1) - g1 * std::exp(-g2)) / (1 - std::exp(-g1));
    CHECK(analytic_outage(AnalyticFormula::AppendixACond, ap) == Approx(oracle).epsilon(1e-12));
    CHECK(oracle == Approx(0.61145).epsilon(1e-4));

    ConditionalOptions opt;
    opt.seed = 9;
    opt.floor = 100000;
    const auto est = mc_appendix_a(100, 0.5, opt);
    CHECK(est.accepted >= opt.floor);
    CHECK(std::abs(est.p_hat - oracle) < 3 * sigma(oracle, est.accepted));
}

TEST_CASE("conditional estimator reports a rare event") {
    ConditionalOptions opt;
    opt.round_trials = 1000;
    opt.max_trials = 3000;
    opt.floor = 10;
    CHECK_THROWS_AS(estimate_conditional(opt, [](TrialRng&) { return CondOutcome::Rejected; }), InsufficientData);
}

TEST_CASE("fit recovers an exact power law") {
    OutageCurve c;
    for (double db : {10.0, 15.0, 20.0, 25.0}) {
        OutagePoint p;
        p.snr_db = db;
        p.rho = std::pow(10.0, db / 10);
        p.p_hat = std::pow(p.rho, -1.5);
        p.trials = 0;
        c.points.push_back(p);
    }
    const auto f = fit_diversity(c);
    CHECK(f.d_hat == Approx(1.5).epsilon(1e-12));
    CHECK(f.stderr_d == Approx(0.0).epsilon(1e-9));
    CHECK(f.points_used == 4);
    CHECK_THROWS_AS(fit_diversity(c, std::make_pair(10.0, 15.0)), InsufficientData);
}

TEST_CASE("fit drops points below the event floor") {
    OutageCurve c;
    for (double db : {10.0, 15.0, 20.0, 25.0}) {
        OutagePoint p;
        p.snr_db = db;
        p.rho = std::pow(10.0, db / 10);
        p.trials = 1000;
        p.p_hat = std::pow(p.rho, -1.0);
        p.outages = static_cast<std::uint64_t>(p.p_hat * 1000);
        c.points.push_back(p);
    }
    // 20 and 25 dB sit below the default floor of 20 events
    CHECK_THROWS_AS(fit_diversity(c), InsufficientData);
    CHECK(fit_diversity(c, std::nullopt, 1).points_used == 4);
}

TEST_CASE("sweep shape and determinism") {
    const auto ex = direct_link_experiment(fixed_bits(1.0));
    const std::vector<double> grid{10, 12.5, 15, 17.5, 20};
    const auto a = sweep(ex, grid, 20000, 4);
    const auto b = sweep(ex, grid, 20000, 4);
    REQUIRE(a.points.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(a.points[i].outages == b.points[i].outages);
        if (i) CHECK(a.points[i].rho > a.points[i - 1].rho);
    }
    CHECK_THROWS_AS(sweep(ex, {15, 10}, 20000, 4), ConfigError);
}

TEST_CASE("direct link, one bit, sweep against the closed form") {
    const auto ex = direct_link_experiment(fixed_bits(1.0));
    const std::uint64_t n = 1000000;
    const auto c = sweep(ex, {10, 15, 20, 25}, n, 21);
    for (const auto& pt : c.points) {
        const double p = -std::expm1(-1.0 / pt.rho);
        CHECK(std::abs(pt.p_hat - p) < 3 * sigma(p, n));
    }
}

TEST_CASE("small-gain limit constants") {
    Lemma4Params p;
    p.n = 2;
    p.lambda_u = 2;
    p.lambda_v = 3;
    p.lambda_w = 5;
    CHECK(lemma4_limit(Lemma4Case::Res1, p) == std::make_pair(2.0, 1));
    CHECK(lemma4_limit(Lemma4Case::Res2, p) == std::make_pair(4.0, 2));
    CHECK(lemma4_limit(Lemma4Case::Res3, p).first == Approx(4.0));
    CHECK(lemma4_limit(Lemma4Case::Res3, p).second == 3);
    CHECK(lemma4_limit(Lemma4Case::Result1, p).first == Approx(16.0));
    CHECK(parse_lemma4_case(lemma4_case_name(Lemma4Case::Res3)) == Lemma4Case::Res3);
    CHECK_THROWS_AS(parse_lemma4_case("res4"), UnknownKey);
}

TEST_CASE("formula names") {
    CHECK(parse_formula("gateway_one_bit") == AnalyticFormula::GatewayOneBit);
    CHECK(formula_name(AnalyticFormula::AppendixBCond) == "appendixB_cond");
    CHECK_THROWS_AS(parse_formula("nope"), UnknownKey);
    AnalyticParams bad;
    bad.rho = 0;
    CHECK_THROWS_AS(analytic_outage(AnalyticFormula::DirectLink, bad), DomainError);
}

}
