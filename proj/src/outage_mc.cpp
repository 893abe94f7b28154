#include "oprelay/outage_mc.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace oprelay {

namespace {

struct Count {
    std::uint64_t v = 0;
    Count& operator+=(const Count& o) {
        v += o.v;
        return *this;
    }
};

double target_for(const AnalyticParams& p) {
    return p.fixed_bits ? *p.fixed_bits : p.r * std::log2(p.rho);
}

double binom(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

}  // namespace

std::string Experiment::describe() const {
    std::string s = to_string(topology) + " " + protocol_name(protocol.kind);
    if (protocol.off_modes) s += "+off";
    s += " " + rule_name(rule.kind);
    if (policy.fixed_bits)
        s += " R=" + std::to_string(*policy.fixed_bits);
    else
        s += " r=" + std::to_string(policy.r);
    return s;
}

Experiment direct_link_experiment(const RatePolicy& policy) {
    return Experiment{Topology::on_off(), ProtocolSpec{Protocol::Direct}, SelectionRule::fixed(0), policy,
                      std::nullopt};
}

Interval wilson_interval(std::uint64_t k, std::uint64_t n) {
    if (n == 0) return {0.0, 1.0};
    if (k == 0) return {0.0, std::min(1.0, 3.0 / static_cast<double>(n))};
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double den = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / den;
    const double half = z / den * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {std::max(0.0, std::min(p, center - half)), std::min(1.0, std::max(p, center + half))};
}

OutagePoint estimate_outage(const Experiment& ex, double snr_db, std::uint64_t trials, std::uint64_t seed,
                            std::uint32_t stream, const ExecOptions& exec) {
    if (trials < 1000) throw ConfigError("at least 1000 trials are required");
    Network net(ex.topology, ex.protocol);
    net.check_rule(ex.rule);
    const auto lam = resolve_rates(ex.topology, ex.rates);
    const SnrPoint snr = SnrPoint::from_db(snr_db);
    const double R = ex.policy.target_bits(snr);

    OutagePoint pt;
    pt.snr_db = snr_db;
    pt.rho = snr.rho;
    pt.trials = trials;
    if (R > 0.0) {
        Count c = run_trials<Count>(0, trials, exec, [&](std::uint64_t b, std::uint64_t e, Count& acc) {
            FadingDraw d{ex.topology, {}};
            for (std::uint64_t t = b; t < e; ++t) {
                TrialRng rng({seed, t, stream});
                draw_fading_into(d, lam, rng);
                if (net.system_outage(ex.rule, d, snr, R)) ++acc.v;
            }
        });
        pt.outages = c.v;
    }
    pt.p_hat = static_cast<double>(pt.outages) / static_cast<double>(trials);
    pt.ci95 = wilson_interval(pt.outages, trials);
    return pt;
}

OutageCurve sweep(const Experiment& ex, const std::vector<double>& snr_db, std::uint64_t trials,
                  std::uint64_t seed, const ExecOptions& exec) {
    for (std::size_t i = 1; i < snr_db.size(); ++i)
        if (!(snr_db[i] > snr_db[i - 1])) throw ConfigError("SNR grid must be strictly increasing");
    OutageCurve c;
    c.policy = ex.policy;
    c.descriptor = ex.describe();
    for (std::size_t i = 0; i < snr_db.size(); ++i)
        c.points.push_back(estimate_outage(ex, snr_db[i], trials, seed, static_cast<std::uint32_t>(i), exec));
    return c;
}

SlopeFit fit_diversity(const OutageCurve& curve, std::optional<std::pair<double, double>> db_range,
                       std::uint64_t min_events) {
    std::vector<double> xs, ys;
    SlopeFit fit;
    for (const auto& p : curve.points) {
        if (db_range && (p.snr_db < db_range->first - 1e-9 || p.snr_db > db_range->second + 1e-9)) continue;
        if (!(p.p_hat > 0.0)) continue;
        if (p.trials > 0 && p.p_hat * static_cast<double>(p.trials) < static_cast<double>(min_events) - 1e-9)
            continue;
        xs.push_back(std::log10(p.rho));
        ys.push_back(-std::log10(p.p_hat));
        if (fit.points_used == 0) fit.rho_min = p.rho;
        fit.rho_max = p.rho;
        ++fit.points_used;
    }
    if (xs.size() < 3)
        throw InsufficientData("slope fit needs 3 usable points, have " + std::to_string(xs.size()));
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    fit.d_hat = sxy / sxx;
    const double a = my - fit.d_hat * mx;
    double ssr = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double e = ys[i] - (a + fit.d_hat * xs[i]);
        ssr += e * e;
    }
    fit.stderr_d = std::sqrt(ssr / (n - 2.0) / sxx);
    return fit;
}

AnalyticFormula parse_formula(const std::string& s) {
    static const std::map<std::string, AnalyticFormula> names = {
        {"direct", AnalyticFormula::DirectLink},
        {"gateway_full_csi", AnalyticFormula::GatewayFullCsi},
        {"gateway_one_bit", AnalyticFormula::GatewayOneBit},
        {"appendixA_cond", AnalyticFormula::AppendixACond},
        {"appendixB_cond", AnalyticFormula::AppendixBCond},
        {"irc_orth_af_hs", AnalyticFormula::IrcOrthAfHighSnr},
        {"irc_orth_df_hs", AnalyticFormula::IrcOrthDfHighSnr},
        {"onoff_df_cond", AnalyticFormula::OnOffDfCond}};
    auto it = names.find(s);
    if (it == names.end()) throw UnknownKey("unknown formula: " + s);
    return it->second;
}

std::string formula_name(AnalyticFormula f) {
    switch (f) {
        case AnalyticFormula::DirectLink: return "direct";
        case AnalyticFormula::GatewayFullCsi: return "gateway_full_csi";
        case AnalyticFormula::GatewayOneBit: return "gateway_one_bit";
        case AnalyticFormula::AppendixACond: return "appendixA_cond";
        case AnalyticFormula::AppendixBCond: return "appendixB_cond";
        case AnalyticFormula::IrcOrthAfHighSnr: return "irc_orth_af_hs";
        case AnalyticFormula::IrcOrthDfHighSnr: return "irc_orth_df_hs";
        case AnalyticFormula::OnOffDfCond: return "onoff_df_cond";
    }
    return "?";
}

double cond_g1(double rho, double r) { return (std::pow(rho, r) - 1.0) / rho; }
double cond_g2(double rho, double r) { return (std::pow(rho, 2.0 * r) - 1.0) / rho; }

double analytic_outage(AnalyticFormula f, const AnalyticParams& p) {
    if (!(p.rho > 0.0)) throw DomainError("rho must be positive");
    if (p.M < 1) throw DomainError("M must be >= 1");
    const double rho = p.rho;
    const double R = target_for(p);
    const double x = (std::exp2(2.0 * R) - 1.0) / rho;  // two-hop threshold
    switch (f) {
        case AnalyticFormula::DirectLink:
            return -std::expm1(-p.lambda * (std::exp2(R) - 1.0) / rho);
        case AnalyticFormula::GatewayFullCsi:
            return std::pow(-std::expm1(-2.0 * p.lambda * x), p.M);
        case AnalyticFormula::GatewayOneBit: {
            const double a = p.alpha ? *p.alpha : x;
            const double up = std::exp(-p.lambda * a);
            const double down = -std::expm1(-p.lambda * a);
            double sum = 0.0;
            for (int m = 0; m <= p.M; ++m)
                sum += binom(p.M, m) * std::pow(up, m) * std::pow(down, p.M - m) * std::pow(down, m);
            return sum;
        }
        case AnalyticFormula::AppendixACond: {
            if (p.fixed_bits) throw DomainError("conditional formulas are defined on the r line");
            const double g1 = cond_g1(rho, p.r), g2 = cond_g2(rho, p.r);
            const double den = -std::expm1(-g1);
            return (den - g1 * std::exp(-g2)) / den;
        }
        case AnalyticFormula::AppendixBCond: {
            if (p.fixed_bits) throw DomainError("conditional formulas are defined on the r line");
            const double g1 = cond_g1(rho, p.r), g2 = cond_g2(rho, p.r);
            const double den = -std::expm1(-g1);
            return (std::exp(-2.0 * g2) - std::exp(-g1) - std::exp(-2.0 * g2 + g1) + 1.0) / den;
        }
        case AnalyticFormula::IrcOrthAfHighSnr: {
            const double a = std::pow(rho, 2.0 * p.r - 1.0), b = std::pow(rho, p.r - 1.0);
            const double den = -std::expm1(-b);
            const double inner = (std::exp(-2.0 * a) - std::exp(-b) - std::exp(-2.0 * a + b) + 1.0) / den;
            return inner * inner * den * den;
        }
        case AnalyticFormula::IrcOrthDfHighSnr: {
            const double a = std::pow(rho, 2.0 * p.r - 1.0), b = std::pow(rho, p.r - 1.0);
            const double den = -std::expm1(-b);
            const double inner =
                -std::expm1(-a) + (den - b * std::exp(-a)) * std::exp(-a) / den;
            return inner * inner * den * den;
        }
        case AnalyticFormula::OnOffDfCond: {
            // relay mode out given direct mode out, exact at finite rho
            if (p.fixed_bits) throw DomainError("conditional formulas are defined on the r line");
            const double g1 = cond_g1(rho, p.r), g2 = cond_g2(rho, p.r);
            const double den = -std::expm1(-g1);
            const double p_half = -std::expm1(-std::min(g1, g2 / 2.0)) / den;
            const double p_sum = (den - g1 * std::exp(-g2)) / den;
            const double p_fail = -std::expm1(-g2);
            return p_half * p_fail + p_sum * (1.0 - p_fail);
        }
    }
    throw UnknownKey("formula");
}

ConditionalEstimate mc_appendix_a(double rho, double r, const ConditionalOptions& opt) {
    const double g1 = cond_g1(rho, r), g2 = cond_g2(rho, r);
    return estimate_conditional(opt, [g1, g2](TrialRng& rng) {
        double x = rng.exponential(1.0);
        double y = rng.exponential(1.0);
        if (!(x < g1)) return CondOutcome::Rejected;
        return x + y < g2 ? CondOutcome::Hit : CondOutcome::Accepted;
    });
}

ConditionalEstimate mc_appendix_b(double rho, double r, CombineModel model, const ConditionalOptions& opt) {
    const double g1 = cond_g1(rho, r), g2 = cond_g2(rho, r);
    return estimate_conditional(opt, [=](TrialRng& rng) {
        double x = rng.exponential(1.0);
        double a = rng.exponential(1.0);
        double b = rng.exponential(1.0);
        if (!(x < g1)) return CondOutcome::Rejected;
        double v = 0.0;
        switch (model) {
            case CombineModel::Exponential2: v = -std::log(rng.uniform()) / 2.0; break;
            case CombineModel::Harmonic: v = a * b / (a + b); break;
            case CombineModel::FiniteSnr: v = relay_combine(rho * a, rho * b) / rho; break;
        }
        return x + v < g2 ? CondOutcome::Hit : CondOutcome::Accepted;
    });
}

Lemma4Case parse_lemma4_case(const std::string& s) {
    if (s == "res1") return Lemma4Case::Res1;
    if (s == "res2") return Lemma4Case::Res2;
    if (s == "res3") return Lemma4Case::Res3;
    if (s == "result1") return Lemma4Case::Result1;
    throw UnknownKey("unknown limit case: " + s);
}

std::string lemma4_case_name(Lemma4Case c) {
    switch (c) {
        case Lemma4Case::Res1: return "res1";
        case Lemma4Case::Res2: return "res2";
        case Lemma4Case::Res3: return "res3";
        case Lemma4Case::Result1: return "result1";
    }
    return "?";
}

std::pair<double, int> lemma4_limit(Lemma4Case c, const Lemma4Params& p) {
    const double un = std::pow(p.lambda_u, p.n);
    switch (c) {
        case Lemma4Case::Res1: return {p.lambda_u, 1};
        case Lemma4Case::Res2: return {un, p.n};
        case Lemma4Case::Res3: return {p.lambda_v * un / (p.n + 1), p.n + 1};
        case Lemma4Case::Result1: return {un * (p.lambda_v + p.lambda_w) / 2.0, p.n + 1};
    }
    return {0.0, 0};
}

std::vector<Lemma4Point> lemma4_limit_check(Lemma4Case c, const std::vector<double>& snr_db,
                                            const Lemma4Params& p, std::uint64_t trials,
                                            std::uint64_t seed, const ExecOptions& exec) {
    if (p.n < 1) throw DomainError("n must be >= 1");
    const auto [limit, power] = lemma4_limit(c, p);
    const int n = (c == Lemma4Case::Res1) ? 1 : p.n;
    std::vector<Lemma4Point> out;
    for (std::size_t k = 0; k < snr_db.size(); ++k) {
        const double rho = SnrPoint::from_db(snr_db[k]).rho;
        const double x = cond_g2(rho, p.r);
        Count hits = run_trials<Count>(0, trials, exec, [&](std::uint64_t b, std::uint64_t e, Count& acc) {
            for (std::uint64_t t = b; t < e; ++t) {
                TrialRng rng({seed, t, static_cast<std::uint32_t>(k)});
                double mu = 0.0;
                for (int i = 0; i < n; ++i) mu = std::max(mu, rng.exponential(p.lambda_u));
                double s = mu;
                if (c == Lemma4Case::Res3) s += rng.exponential(p.lambda_v);
                if (c == Lemma4Case::Result1) {
                    double v = rng.exponential(p.lambda_v);
                    double w = rng.exponential(p.lambda_w);
                    // epsilon = 1/rho
                    s += relay_combine(rho * v, rho * w) / rho;
                }
                if (s < x) ++acc.v;
            }
        });
        Lemma4Point pt;
        pt.snr_db = snr_db[k];
        pt.trials = trials;
        pt.hits = hits.v;
        pt.p_hat = static_cast<double>(hits.v) / static_cast<double>(trials);
        pt.claimed = limit * std::pow(x, power);
        pt.ratio = pt.p_hat / pt.claimed;
        pt.ratio_sigma = std::sqrt(pt.p_hat * (1.0 - pt.p_hat) / static_cast<double>(trials)) / pt.claimed;
        out.push_back(pt);
    }
    return out;
}

}  // namespace oprelay
