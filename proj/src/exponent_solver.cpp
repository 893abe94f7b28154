#include "oprelay/exponent_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "oprelay/dmt_closed.hpp"
#include "oprelay/errors.hpp"

namespace oprelay {

namespace {

constexpr double kFeasTol = 1e-12;
constexpr int kBisect = 48;
constexpr std::size_t kKeep = 4;

double pos(double x) { return x > 0.0 ? x : 0.0; }

// Single relayed NAF mode with the m = l/2 split.
double naf_lhs(double v1, double v2, double u) { return std::max(pos(1.0 - v1), 0.5 * pos(1.0 - (v2 + u))); }

double ddf_lhs(double t, double v1, double v2) { return t * pos(1.0 - v1) + (1.0 - t) * pos(1.0 - std::min(v1, v2)); }

// sd, sr and rd exponents; min over the broadcast and multiple-access cuts.
double cf_lhs(double t, double v_sd, double v_sr, double v_rd) {
    const double bc = (1.0 - t) * pos(1.0 - v_sd) + t * pos(1.0 - std::min(v_sd, v_sr));
    const double mac = t * pos(1.0 - v_sd) + (1.0 - t) * pos(1.0 - std::min(v_sd, v_rd));
    return std::min(bc, mac);
}

struct Cand {
    double value = 0.0;
    std::uint64_t order = 0;
    std::vector<double> point;
};

bool cand_less(const Cand& a, const Cand& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.order < b.order;
}

struct TopK {
    std::vector<Cand> c;

    void offer(Cand x) {
        c.push_back(std::move(x));
        std::sort(c.begin(), c.end(), cand_less);
        if (c.size() > kKeep) c.resize(kKeep);
    }
    TopK& operator+=(const TopK& o) {
        for (const auto& x : o.c) offer(x);
        return *this;
    }
};

using Eval = std::function<std::optional<double>(const std::vector<double>&)>;

std::optional<Cand> grid_refine(const std::vector<double>& lo, double h, int passes, const Eval& f,
                                const ExecOptions* exec) {
    const std::size_t d = lo.size();
    if (d == 0) {
        auto v = f({});
        if (!v) return std::nullopt;
        return Cand{*v, 0, {}};
    }
    const std::uint64_t per = static_cast<std::uint64_t>(std::llround(kBoxWidth / h)) + 1;
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < d; ++k) total *= per;

    auto clamp = [&](std::vector<double>& p) {
        for (std::size_t k = 0; k < d; ++k) p[k] = std::clamp(p[k], lo[k], lo[k] + kBoxWidth);
    };
    auto scan = [&](std::uint64_t b, std::uint64_t e, TopK& acc) {
        std::vector<double> p(d);
        for (std::uint64_t i = b; i < e; ++i) {
            std::uint64_t idx = i;
            for (std::size_t k = 0; k < d; ++k) {
                p[k] = lo[k] + static_cast<double>(idx % per) * h;
                idx /= per;
            }
            clamp(p);
            if (auto v = f(p)) acc.offer(Cand{*v, i, p});
        }
    };
    TopK top;
    if (exec != nullptr) {
        ExecOptions opt = *exec;
        opt.chunk = 256;
        top = run_trials<TopK>(0, total, opt, scan);
    } else {
        scan(0, total, top);
    }
    if (top.c.empty()) return std::nullopt;

    std::uint64_t order = total;
    double cur = h;
    std::uint64_t offsets = 1;
    for (std::size_t k = 0; k < d; ++k) offsets *= 9;
    for (int pass = 0; pass < passes; ++pass) {
        const double half = 0.5 * cur;
        TopK next = top;
        for (const auto& c : top.c) {
            std::vector<double> p(d);
            for (std::uint64_t o = 0; o < offsets; ++o) {
                std::uint64_t idx = o;
                for (std::size_t k = 0; k < d; ++k) {
                    p[k] = c.point[k] + (static_cast<double>(idx % 9) - 4.0) * half;
                    idx /= 9;
                }
                clamp(p);
                if (auto v = f(p)) next.offer(Cand{*v, order, p});
                ++order;
            }
        }
        top = std::move(next);
        cur = half;
    }
    return top.c.front();
}

// Smallest value of x[var] in its box keeping lhs <= r; x[var] holds it on success.
bool bisect(const OutageRegion& R, const ConstraintBlock& b, std::vector<double>& x, std::size_t var) {
    const double lo0 = R.variables[var].lo;
    double lo = lo0, hi = lo0 + kBoxWidth;
    const double lim = R.r + kFeasTol;
    x[var] = hi;
    if (b.lhs(x) > lim) return false;
    x[var] = lo;
    if (b.lhs(x) <= lim) return true;
    for (int i = 0; i < kBisect; ++i) {
        const double mid = 0.5 * (lo + hi);
        x[var] = mid;
        if (b.lhs(x) <= lim)
            hi = mid;
        else
            lo = mid;
    }
    x[var] = hi;
    return true;
}

double var_cost(const OutageRegion& R, std::size_t i, double v) {
    return R.variables[i].weight * v + R.variables[i].offset;
}

struct BlockSolution {
    double cost = 0.0;
    std::vector<double> x;
};

std::optional<BlockSolution> solve_block(const OutageRegion& R, const ConstraintBlock& b,
                                         const std::vector<double>& base, double h, int passes,
                                         const ExecOptions* exec) {
    const std::size_t last = b.vars.back();
    std::vector<std::size_t> grid(b.vars.begin(), b.vars.end() - 1);
    std::vector<double> lo;
    for (auto g : grid) lo.push_back(R.variables[g].lo);

    auto fill = [&](const std::vector<double>& g, std::vector<double>& y) -> std::optional<double> {
        for (std::size_t k = 0; k < grid.size(); ++k) y[grid[k]] = g[k];
        if (!bisect(R, b, y, last)) return std::nullopt;
        double c = 0.0;
        for (auto v : b.vars) c += var_cost(R, v, y[v]);
        return c;
    };
    Eval f = [&](const std::vector<double>& g) {
        std::vector<double> y = base;
        return fill(g, y);
    };
    auto best = grid_refine(lo, h, passes, f, exec);
    if (!best) return std::nullopt;
    BlockSolution s{0.0, base};
    s.cost = *fill(best->point, s.x);
    return s;
}

std::vector<double> lower_corner(const OutageRegion& R) {
    std::vector<double> x;
    for (const auto& v : R.variables) x.push_back(v.lo);
    return x;
}

void check_r(double r, double hi) {
    if (!(r >= 0.0 && r <= hi + 1e-12))
        throw DomainError("r = " + std::to_string(r) + " outside [0, " + std::to_string(hi) + "]");
}

double resolve_t(const RegionParams& p, double fallback) {
    const double t = p.t.value_or(fallback);
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("time split must lie in [0, 1]");
    return t;
}

}  // namespace

std::string region_name(RegionId id) {
    switch (id) {
        case RegionId::NafMode: return "naf-mode";
        case RegionId::DdfMode: return "ddf-mode";
        case RegionId::SrcNafCond: return "src-naf-cond";
        case RegionId::SrcDdfCond: return "src-ddf-cond";
        case RegionId::SrcCfCond: return "src-cf-cond";
        case RegionId::MarcJoint: return "marc-joint";
        case RegionId::XrelayJoint: return "xrelay-joint";
    }
    return "?";
}

RegionId parse_region(const std::string& s) {
    static const std::map<std::string, RegionId> names = {
        {"naf-mode", RegionId::NafMode},         {"ddf-mode", RegionId::DdfMode},
        {"src-naf-cond", RegionId::SrcNafCond},  {"src-ddf-cond", RegionId::SrcDdfCond},
        {"src-cf-cond", RegionId::SrcCfCond},    {"marc-joint", RegionId::MarcJoint},
        {"xrelay-joint", RegionId::XrelayJoint}};
    auto it = names.find(s);
    if (it == names.end()) throw UnknownKey("unknown region: " + s);
    return it->second;
}

double OutageRegion::objective(const std::vector<double>& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < variables.size(); ++i) s += var_cost(*this, i, x[i]);
    return s;
}

bool OutageRegion::contains(const std::vector<double>& x, double tol) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (x[i] < variables[i].lo - tol) return false;
    for (const auto& b : blocks)
        if (b.lhs(x) > r + tol) return false;
    return true;
}

OutageRegion build_region(RegionId id, double r, const RegionParams& params) {
    OutageRegion R;
    R.id = id;
    R.r = r;
    auto add = [&](std::string name, double lo = 0.0, double offset = 0.0) {
        R.variables.push_back({std::move(name), lo, 1.0, offset});
        return R.variables.size() - 1;
    };
    switch (id) {
        case RegionId::NafMode: {
            check_r(r, 1.0);
            add("v1"), add("v2"), add("u");
            R.blocks.push_back({{0, 1, 2}, [](const std::vector<double>& x) { return naf_lhs(x[0], x[1], x[2]); }});
            break;
        }
        case RegionId::DdfMode: {
            check_r(r, 1.0);
            const double t = resolve_t(params, r);
            R.t = t;
            add("v1"), add("v2"), add("u");
            // u does not enter the constraint; it is bisected to its support.
            R.blocks.push_back({{0, 1, 2}, [t](const std::vector<double>& x) { return ddf_lhs(t, x[0], x[1]); }});
            break;
        }
        case RegionId::SrcNafCond:
        case RegionId::SrcDdfCond:
        case RegionId::SrcCfCond: {
            check_r(r, 2.0);
            // Given mode 1 in outage the sd exponent lives on [1 - r/2, inf).
            if (params.shift)
                add("v1", 1.0 - r / 2.0, r / 2.0 - 1.0);
            else
                add("v1");
            add("v2"), add("v3");
            if (id == RegionId::SrcNafCond) {
                R.blocks.push_back(
                    {{0, 1, 2}, [](const std::vector<double>& x) { return naf_lhs(x[0], x[1], x[2]); }});
            } else if (id == RegionId::SrcDdfCond) {
                const double t = resolve_t(params, std::min(r, 1.0));
                R.t = t;
                R.blocks.push_back(
                    {{0, 2, 1}, [t](const std::vector<double>& x) { return ddf_lhs(t, x[0], x[1]); }});
            } else {
                const double t = resolve_t(params, 0.5);
                R.t = t;
                R.blocks.push_back(
                    {{0, 1, 2}, [t](const std::vector<double>& x) { return cf_lhs(t, x[0], x[2], x[1]); }});
            }
            break;
        }
        case RegionId::MarcJoint: {
            check_r(r, 1.0);
            if (params.n < 1) throw ConfigError("MARC region needs n >= 1");
            const Protocol p = params.protocol;
            if (p != Protocol::NAF && p != Protocol::DDF && p != Protocol::CF)
                throw UnsupportedCombination("MARC region supports naf, ddf and cf");
            const double t = resolve_t(params, p == Protocol::DDF ? r : 0.5);
            if (p != Protocol::NAF) R.t = t;
            std::vector<std::pair<std::size_t, std::size_t>> users;
            for (int j = 1; j <= params.n; ++j) {
                const auto v1 = add("v1(" + std::to_string(j) + ")");
                const auto u = add("u(" + std::to_string(j) + ")");
                users.push_back({v1, u});
            }
            const auto v2 = add("v2");
            R.shared.push_back(v2);
            for (auto [v1, u] : users) {
                std::function<double(const std::vector<double>&)> lhs;
                if (p == Protocol::NAF)
                    lhs = [=](const std::vector<double>& x) { return naf_lhs(x[v1], x[v2], x[u]); };
                else if (p == Protocol::DDF)
                    lhs = [=](const std::vector<double>& x) { return ddf_lhs(t, x[v1], x[v2]); };
                else
                    lhs = [=](const std::vector<double>& x) { return cf_lhs(t, x[v1], x[u], x[v2]); };
                R.blocks.push_back({{v1, u}, lhs});
            }
            break;
        }
        case RegionId::XrelayJoint: {
            check_r(r, 1.0);
            const Protocol p = params.protocol;
            if (p != Protocol::NAF && p != Protocol::DDF)
                throw UnsupportedCombination("X-relay region supports naf and ddf");
            const double t = resolve_t(params, r);
            if (p == Protocol::DDF) R.t = t;
            const auto v11 = add("v1(11)"), v21 = add("v1(21)"), v12 = add("v1(12)"), v22 = add("v1(22)");
            const auto r1 = add("v2(r1)"), r2 = add("v2(r2)");
            const auto u1 = add("u(1r)"), u2 = add("u(2r)");
            auto relayed = [&](std::size_t v1, std::size_t v2, std::size_t u) {
                if (p == Protocol::NAF)
                    R.blocks.push_back(
                        {{v1, v2, u}, [=](const std::vector<double>& x) { return naf_lhs(x[v1], x[v2], x[u]); }});
                else
                    R.blocks.push_back(
                        {{v1, v2, u}, [=](const std::vector<double>& x) { return ddf_lhs(t, x[v1], x[v2]); }});
            };
            relayed(v11, r1, u1);
            relayed(v22, r2, u2);
            for (auto v : {v12, v21})
                R.blocks.push_back({{v}, [=](const std::vector<double>& x) { return pos(1.0 - x[v]); }});
            break;
        }
    }
    return R;
}

SolveResult solve_inf(const OutageRegion& R, double grid_step, int refine_passes, const ExecOptions& exec) {
    if (!(grid_step > 0.0 && grid_step <= 0.02 + 1e-15)) throw ConfigError("grid_step must lie in (0, 0.02]");
    if (refine_passes < 0) throw ConfigError("refine_passes must be >= 0");

    std::vector<double> x = lower_corner(R);
    double total = 0.0;
    bool ok = true;

    if (R.shared.empty()) {
        for (const auto& b : R.blocks) {
            auto s = solve_block(R, b, x, grid_step, refine_passes, &exec);
            if (!s) {
                ok = false;
                break;
            }
            x = s->x;
            total += s->cost;
        }
    } else {
        std::vector<double> lo;
        for (auto s : R.shared) lo.push_back(R.variables[s].lo);
        auto run_blocks = [&](const std::vector<double>& sv, std::vector<double>& y) -> std::optional<double> {
            double c = 0.0;
            for (std::size_t k = 0; k < R.shared.size(); ++k) {
                y[R.shared[k]] = sv[k];
                c += var_cost(R, R.shared[k], sv[k]);
            }
            for (const auto& b : R.blocks) {
                auto s = solve_block(R, b, y, grid_step, refine_passes, nullptr);
                if (!s) return std::nullopt;
                y = s->x;
                c += s->cost;
            }
            return c;
        };
        Eval f = [&](const std::vector<double>& sv) {
            std::vector<double> y = x;
            return run_blocks(sv, y);
        };
        auto best = grid_refine(lo, grid_step, refine_passes, f, &exec);
        if (!best) {
            ok = false;
        } else {
            total = *run_blocks(best->point, x);
        }
    }
    if (!ok) throw InfeasibleRegion("no feasible point in the search box for " + region_name(R.id));

    SolveResult res;
    res.d_value = total;
    res.argmin = x;
    for (const auto& v : R.variables) res.names.push_back(v.name);
    res.grid_step = grid_step;
    res.refine_passes = refine_passes;
    res.t = R.t;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] >= R.variables[i].lo + kBoxWidth - 1e-9) res.box_interior = false;
    return res;
}

SplitKind split_kind(RegionId id, const RegionParams& params) {
    switch (id) {
        case RegionId::DdfMode:
        case RegionId::SrcDdfCond: return SplitKind::Ddf;
        case RegionId::SrcCfCond: return SplitKind::Cf;
        case RegionId::MarcJoint:
        case RegionId::XrelayJoint:
            if (params.protocol == Protocol::DDF) return SplitKind::Ddf;
            if (params.protocol == Protocol::CF) return SplitKind::Cf;
            return SplitKind::None;
        default: return SplitKind::None;
    }
}

TimeSplitResult optimize_time_split(RegionId id, double r, const RegionParams& params, double t_grid_step,
                                    double final_grid_step, int final_passes, const ExecOptions& exec) {
    const SplitKind kind = split_kind(id, params);
    if (kind == SplitKind::None) throw UnsupportedCombination(region_name(id) + " has no time split");
    if (!(t_grid_step > 0.0 && t_grid_step < 0.5)) throw ConfigError("t_grid_step must lie in (0, 0.5)");

    const double t_lo = kind == SplitKind::Ddf ? std::min(r, 1.0) : t_grid_step;
    const double t_hi = kind == SplitKind::Ddf ? 1.0 : 1.0 - t_grid_step;

    double step = 0.02;
    int passes = 2;
    auto value_at = [&](double t) -> std::optional<double> {
        RegionParams p = params;
        p.t = t;
        try {
            return solve_inf(build_region(id, r, p), step, passes, exec).d_value;
        } catch (const InfeasibleRegion&) {
            return std::nullopt;
        }
    };

    double best_t = t_lo;
    std::optional<double> best;
    auto consider = [&](double t) {
        if (t < t_lo - 1e-12 || t > t_hi + 1e-12) return;
        t = std::clamp(t, t_lo, t_hi);
        auto v = value_at(t);
        if (v && (!best || *v > *best + 1e-9)) {
            best = v;
            best_t = t;
        }
    };
    const int steps = static_cast<int>(std::floor((t_hi - t_lo) / t_grid_step + 1e-9));
    for (int k = 0; k <= steps; ++k) consider(t_lo + k * t_grid_step);
    if (t_lo + steps * t_grid_step < t_hi - 1e-12) consider(t_hi);
    step = final_grid_step;
    passes = final_passes;
    if (best) best = value_at(best_t);
    double cur = t_grid_step;
    for (int pass = 0; pass < 3; ++pass) {
        cur *= 0.5;
        const double c = best_t;
        consider(c - cur);
        consider(c + cur);
    }
    if (!best) throw InfeasibleRegion("no feasible time split for " + region_name(id));

    RegionParams p = params;
    p.t = best_t;
    TimeSplitResult out;
    out.t_star = best_t;
    out.solve = solve_inf(build_region(id, r, p), final_grid_step, final_passes, exec);
    out.d_value = out.solve.d_value;
    return out;
}

std::vector<VerifyEntry> default_verify_map() {
    auto joint = [](Protocol p) {
        RegionParams q;
        q.n = 2;
        q.protocol = p;
        return q;
    };
    return {
        {"src-naf-cond", RegionId::SrcNafCond, {}, "src/naf-cond:2"},
        {"src-ddf-cond", RegionId::SrcDdfCond, {}, "src/ddf-cond:2"},
        {"src-cf-cond", RegionId::SrcCfCond, {}, "src/cf-cond:2"},
        {"marc-naf", RegionId::MarcJoint, joint(Protocol::NAF), "marc/naf:2"},
        {"marc-ddf", RegionId::MarcJoint, joint(Protocol::DDF), "marc/ddf:2"},
        {"marc-cf", RegionId::MarcJoint, joint(Protocol::CF), "marc/cf:2"},
        {"xrelay-naf", RegionId::XrelayJoint, joint(Protocol::NAF), "xrelay/naf:2"},
        {"xrelay-ddf", RegionId::XrelayJoint, joint(Protocol::DDF), "xrelay/ddf:2"},
    };
}

std::vector<double> default_verify_grid() {
    std::vector<double> g;
    for (int k = 0; k < 10; ++k) g.push_back(0.05 + 0.1 * k);
    return g;
}

VerifyReport verify_catalog(const std::vector<VerifyEntry>& entries, const std::vector<double>& r_grid, double tol,
                            double grid_step, int refine_passes, const ExecOptions& exec) {
    VerifyReport rep;
    rep.tol = tol;
    for (const auto& e : entries) {
        const DmtCurve curve = dmt_curve(e.curve_key);
        for (double r : r_grid) {
            VerifyRow row;
            row.label = e.label;
            row.r = r;
            if (split_kind(e.region, e.params) == SplitKind::None) {
                row.solver = solve_inf(build_region(e.region, r, e.params), grid_step, refine_passes, exec).d_value;
            } else {
                auto ts = optimize_time_split(e.region, r, e.params, 0.05, grid_step, refine_passes, exec);
                row.solver = ts.d_value;
                row.t = ts.t_star;
            }
            row.catalog = curve.eval(r);
            row.diff = std::abs(row.solver - row.catalog);
            rep.max_diff = std::max(rep.max_diff, row.diff);
            rep.rows.push_back(row);
        }
    }
    rep.pass = rep.max_diff <= tol;
    return rep;
}

}  // namespace oprelay
