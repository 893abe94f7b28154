#include "oprelay/analysis_compose.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "oprelay/errors.hpp"
#include "oprelay/rng.hpp"

namespace oprelay {

DmtCurve compose_upper_bound(const std::vector<DmtCurve>& curves) {
    if (curves.empty()) throw ConfigError("compose_upper_bound needs at least one curve");
    DmtCurve acc = curves.front();
    std::string key = acc.key;
    for (std::size_t i = 1; i < curves.size(); ++i) {
        acc = curve_sum(acc, curves[i]);
        key += " + " + curves[i].key;
    }
    acc.key = curves.size() == 1 ? key : "sum(" + key + ")";
    return acc;
}

void validate(const ConditionalOutageSpec& spec) {
    const auto modes = enumerate_modes(spec.experiment.topology, spec.experiment.protocol);
    std::set<std::size_t> seen;
    for (auto g : spec.given) {
        if (g >= modes.size()) throw ConfigError("conditioning mode out of range");
        if (g == spec.target) throw ConfigError("target mode also listed as a condition");
        if (!seen.insert(g).second) throw ConfigError("conditioning modes must be distinct");
    }
    if (spec.target >= modes.size()) throw ConfigError("target mode out of range");
}

ConditionalOutageSpec onoff_conditional_spec(Protocol p, double r) {
    if (p != Protocol::OrthAF && p != Protocol::OrthDF)
        throw UnsupportedCombination("on/off conditional spec needs orth-af or orth-df");
    ConditionalOutageSpec s;
    s.experiment.topology = Topology::on_off();
    s.experiment.protocol.kind = p;
    s.experiment.rule = SelectionRule::fixed(0);
    s.experiment.policy.r = r;
    s.target = 1;  // relayed
    s.given = {0}; // direct
    return s;
}

ConditionalSlope estimate_conditional_slope(const ConditionalOutageSpec& spec, const std::vector<double>& snr_db,
                                            const ConditionalOptions& opt) {
    validate(spec);
    const Experiment& ex = spec.experiment;
    Network net(ex.topology, ex.protocol);
    const auto lam = resolve_rates(ex.topology, ex.rates);

    ConditionalSlope out;
    OutageCurve curve;
    curve.policy = ex.policy;
    curve.descriptor = ex.describe();
    for (std::size_t i = 0; i < snr_db.size(); ++i) {
        const SnrPoint snr = SnrPoint::from_db(snr_db[i]);
        const double R = ex.policy.target_bits(snr);
        ConditionalOptions o = opt;
        o.stream = opt.stream + static_cast<std::uint32_t>(i);
        auto est = estimate_conditional(o, [&](TrialRng& rng) {
            thread_local FadingDraw d;
            d.topology = ex.topology;
            draw_fading_into(d, lam, rng);
            for (auto g : spec.given)
                if (!net.mode_outage(d, g, snr, R)) return CondOutcome::Rejected;
            return net.mode_outage(d, spec.target, snr, R) ? CondOutcome::Hit : CondOutcome::Accepted;
        });
        out.points.push_back({snr_db[i], est});
        OutagePoint p;
        p.snr_db = snr_db[i];
        p.rho = snr.rho;
        p.trials = est.accepted;
        p.outages = est.hits;
        p.p_hat = est.p_hat;
        p.ci95 = est.ci95;
        curve.points.push_back(p);
    }
    try {
        out.fit = fit_diversity(curve);
    } catch (const InsufficientData& e) {
        out.fit_error = e.what();
    }
    return out;
}

namespace {

struct TightCounts {
    std::uint64_t selected_out = 0;
    std::uint64_t all_out = 0;
    std::uint64_t wrong = 0;
    TightCounts& operator+=(const TightCounts& o) {
        selected_out += o.selected_out;
        all_out += o.all_out;
        wrong += o.wrong;
        return *this;
    }
};

std::optional<SlopeFit> try_fit(const OutageCurve& c) {
    try {
        return fit_diversity(c);
    } catch (const InsufficientData&) {
        return std::nullopt;
    }
}

}  // namespace

TightnessReport tightness_check(const Experiment& ex, const std::vector<double>& snr_db, std::uint64_t trials,
                                std::uint64_t seed, const ExecOptions& exec) {
    if (trials < 1000) throw ConfigError("at least 1000 trials are required");
    Network net(ex.topology, ex.protocol);
    net.check_rule(ex.rule);
    const auto lam = resolve_rates(ex.topology, ex.rates);
    const std::size_t nmodes = net.modes().size();

    TightnessReport rep;
    rep.descriptor = ex.describe();
    OutageCurve sys_curve, all_curve;
    for (std::size_t i = 0; i < snr_db.size(); ++i) {
        const SnrPoint snr = SnrPoint::from_db(snr_db[i]);
        const double R = ex.policy.target_bits(snr);
        TightCounts c;
        if (R > 0.0) {
            c = run_trials<TightCounts>(0, trials, exec, [&](std::uint64_t b, std::uint64_t e, TightCounts& acc) {
                FadingDraw d{ex.topology, {}};
                std::vector<char> out(nmodes);
                for (std::uint64_t t = b; t < e; ++t) {
                    TrialRng rng({seed, t, static_cast<std::uint32_t>(i)});
                    draw_fading_into(d, lam, rng);
                    bool all = true;
                    for (std::size_t m = 0; m < nmodes; ++m) {
                        out[m] = net.mode_outage(d, m, snr, R);
                        all = all && out[m];
                    }
                    const auto sel = net.select(ex.rule, d, snr, R);
                    const bool chosen_out = sel ? out[*sel] != 0 : true;
                    if (chosen_out) ++acc.selected_out;
                    if (all) ++acc.all_out;
                    if (chosen_out && !all) ++acc.wrong;
                }
            });
        }
        TightnessPoint p;
        p.snr_db = snr_db[i];
        p.trials = trials;
        p.selected_out = c.selected_out;
        p.all_out = c.all_out;
        p.wrong_selection = c.wrong;
        p.wrong_ci95 = wilson_interval(c.wrong, trials);
        rep.points.push_back(p);
        rep.wrong_total += c.wrong;
        rep.draws_total += trials;

        OutagePoint sp;
        sp.snr_db = snr_db[i];
        sp.rho = snr.rho;
        sp.trials = trials;
        sp.outages = c.selected_out;
        sp.p_hat = static_cast<double>(c.selected_out) / static_cast<double>(trials);
        sys_curve.points.push_back(sp);
        OutagePoint ap = sp;
        ap.outages = c.all_out;
        ap.p_hat = static_cast<double>(c.all_out) / static_cast<double>(trials);
        all_curve.points.push_back(ap);
    }
    rep.system_fit = try_fit(sys_curve);
    rep.all_out_fit = try_fit(all_curve);
    return rep;
}

std::vector<CompositionCheck> src_composition_checks(double step) {
    struct Chain {
        const char* name;
        const char* mode2;
        const char* mode3_cond;
        const char* catalog;
    };
    const Chain chains[] = {
        {"naf", "src/naf-mode2:2", "src/naf-cond:2", "src/naf:2"},
        {"ddf", "src/ddf-mode2:2", "src/ddf-cond:2", "src/ddf:2"},
        {"cf", "src/cf-mode2:2", "src/cf-cond:2", "src/cf:2"},
        {"genie", "src/genie-mode2:2", "src/genie-mode3:2", "src/genie:2"},
    };
    const DmtCurve mode1 = dmt_curve("src/mode1:2");
    std::vector<CompositionCheck> out;
    for (const auto& ch : chains) {
        CompositionCheck c;
        c.protocol = ch.name;
        const DmtCurve m2 = dmt_curve(ch.mode2);
        c.conditional_sum = compose_upper_bound({mode1, m2, dmt_curve(ch.mode3_cond)});
        c.unconditional_sum = compose_upper_bound({mode1, m2, m2});
        const DmtCurve cat = dmt_curve(ch.catalog);
        c.max_excess = -1e300;
        const int k = static_cast<int>(std::floor(cat.r_max / step + 1e-9));
        for (int i = 0; i <= k; ++i) {
            const double r = std::min(cat.r_max, i * step);
            const double excess = c.conditional_sum.eval(r) - c.unconditional_sum.eval(r);
            c.max_excess = std::max(c.max_excess, excess);
            if (excess > 1e-12) c.excess_at.push_back(r);
            c.max_catalog_diff = std::max(c.max_catalog_diff, std::abs(c.conditional_sum.eval(r) - cat.eval(r)));
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace oprelay
