#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oprelay/errors.hpp"
#include "oprelay/fading.hpp"
#include "oprelay/networks.hpp"
#include "oprelay/parallel.hpp"

namespace oprelay {

struct Experiment {
    Topology topology;
    ProtocolSpec protocol;
    SelectionRule rule;
    RatePolicy policy;
    std::optional<RateMap> rates;

    std::string describe() const;
};

// Direct link alone: the on/off topology restricted to its direct mode.
Experiment direct_link_experiment(const RatePolicy& policy);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

struct OutagePoint {
    double snr_db = 0.0;
    double rho = 1.0;
    double p_hat = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t outages = 0;
    Interval ci95;
};

struct OutageCurve {
    std::vector<OutagePoint> points;
    RatePolicy policy;
    std::string descriptor;
};

struct SlopeFit {
    double d_hat = 0.0;
    double stderr_d = 0.0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    std::size_t points_used = 0;
};

// Wilson score interval; k = 0 uses [0, 3/n].
Interval wilson_interval(std::uint64_t k, std::uint64_t n);

OutagePoint estimate_outage(const Experiment& ex, double snr_db, std::uint64_t trials, std::uint64_t seed,
                            std::uint32_t stream = 0, const ExecOptions& exec = {});

// Point i uses substream i.
OutageCurve sweep(const Experiment& ex, const std::vector<double>& snr_db, std::uint64_t trials,
                  std::uint64_t seed, const ExecOptions& exec = {});

// Least squares of -log10 p against log10 rho. Points with fewer than
// min_events outages are dropped; db_range restricts the fit.
SlopeFit fit_diversity(const OutageCurve& curve,
                       std::optional<std::pair<double, double>> db_range = std::nullopt,
                       std::uint64_t min_events = 20);

enum class AnalyticFormula {
    DirectLink,
    GatewayFullCsi,
    GatewayOneBit,
    AppendixACond,
    AppendixBCond,
    IrcOrthAfHighSnr,
    IrcOrthDfHighSnr,
    OnOffDfCond,
};

AnalyticFormula parse_formula(const std::string& s);
std::string formula_name(AnalyticFormula f);

struct AnalyticParams {
    double rho = 10.0;
    double r = 0.0;
    std::optional<double> fixed_bits;  // overrides r log2 rho
    int M = 1;
    double lambda = 1.0;
    std::optional<double> alpha;  // one-bit threshold override
};

double analytic_outage(AnalyticFormula f, const AnalyticParams& p);

// g1 = (rho^r - 1)/rho, g2 = (rho^{2r} - 1)/rho
double cond_g1(double rho, double r);
double cond_g2(double rho, double r);

// Rejection-sampled conditional probability P(hit | accepted).
struct ConditionalEstimate {
    std::uint64_t trials_used = 0;
    std::uint64_t accepted = 0;
    std::uint64_t hits = 0;
    double p_hat = 0.0;
    Interval ci95;
};

struct ConditionalOptions {
    std::uint64_t seed = 1;
    std::uint32_t stream = 0;
    std::uint64_t round_trials = 1000000;
    std::uint64_t floor = 10000;  // minimum accepted samples
    std::uint64_t max_trials = 2000000000ULL;
    ExecOptions exec;
};

enum class CondOutcome { Rejected, Accepted, Hit };

struct CondCounts {
    std::uint64_t accepted = 0;
    std::uint64_t hits = 0;
    CondCounts& operator+=(const CondCounts& o) {
        accepted += o.accepted;
        hits += o.hits;
        return *this;
    }
};

// fn(TrialRng&) -> CondOutcome. Runs whole rounds until the floor is met.
template <class Fn>
ConditionalEstimate estimate_conditional(const ConditionalOptions& opt, Fn&& fn) {
    CondCounts total;
    std::uint64_t used = 0;
    while (total.accepted < opt.floor) {
        if (used >= opt.max_trials)
            throw InsufficientData("conditioning event too rare: " + std::to_string(total.accepted) +
                                   " accepted after " + std::to_string(used) + " trials");
        total += run_trials<CondCounts>(used, opt.round_trials, opt.exec,
                                        [&](std::uint64_t b, std::uint64_t e, CondCounts& acc) {
                                            for (std::uint64_t t = b; t < e; ++t) {
                                                TrialRng rng({opt.seed, t, opt.stream});
                                                CondOutcome o = fn(rng);
                                                if (o == CondOutcome::Rejected) continue;
                                                ++acc.accepted;
                                                if (o == CondOutcome::Hit) ++acc.hits;
                                            }
                                        });
        used += opt.round_trials;
    }
    ConditionalEstimate est;
    est.trials_used = used;
    est.accepted = total.accepted;
    est.hits = total.hits;
    est.p_hat = static_cast<double>(total.hits) / static_cast<double>(total.accepted);
    est.ci95 = wilson_interval(total.hits, total.accepted);
    return est;
}

// Relay-path term replacing the harmonic combine in the AF conditional.
enum class CombineModel { Exponential2, Harmonic, FiniteSnr };

// P(X + Y < g2 | X < g1), X, Y ~ Exp(1).
ConditionalEstimate mc_appendix_a(double rho, double r, const ConditionalOptions& opt);
// P(X + V < g2 | X < g1) with V built per CombineModel from two Exp(1) gains.
ConditionalEstimate mc_appendix_b(double rho, double r, CombineModel model, const ConditionalOptions& opt);

enum class Lemma4Case { Res1, Res2, Res3, Result1 };

Lemma4Case parse_lemma4_case(const std::string& s);
std::string lemma4_case_name(Lemma4Case c);

struct Lemma4Params {
    int n = 1;
    double lambda_u = 1.0;
    double lambda_v = 1.0;
    double lambda_w = 1.0;
    double r = 0.4;
};

struct Lemma4Point {
    double snr_db = 0.0;
    double p_hat = 0.0;
    std::uint64_t hits = 0;
    std::uint64_t trials = 0;
    double claimed = 0.0;  // limit * x^power
    double ratio = 0.0;
    double ratio_sigma = 0.0;
};

// Limit constant and power of x = (rho^{2r} - 1)/rho for a case.
std::pair<double, int> lemma4_limit(Lemma4Case c, const Lemma4Params& p);

std::vector<Lemma4Point> lemma4_limit_check(Lemma4Case c, const std::vector<double>& snr_db,
                                            const Lemma4Params& p, std::uint64_t trials,
                                            std::uint64_t seed, const ExecOptions& exec = {});

}  // namespace oprelay
