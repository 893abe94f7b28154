#include "oprelay/dmt_closed.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "oprelay/errors.hpp"

namespace oprelay {

namespace {

constexpr double kTouch = 1e-13;

std::string fraction_label(double num, double den) {
    double v = num / den;
    if (std::abs(v - std::round(v)) < 1e-15) return std::to_string(static_cast<long long>(std::round(v)));
    if (std::abs(num - std::round(num)) < 1e-15 && std::abs(den - std::round(den)) < 1e-15) {
        std::ostringstream os;
        os << std::llround(num) << "/" << std::llround(den);
        return os.str();
    }
    for (int d = 2; d <= 64; ++d) {
        const double k = std::round(v * d);
        if (std::abs(k / d - v) < 1e-13) return fraction_label(k, d);
    }
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

bool same_form(const Form& x, const Form& y) {
    if (x.a != y.a || x.b != y.b || x.terms.size() != y.terms.size()) return false;
    for (std::size_t i = 0; i < x.terms.size(); ++i) {
        const auto& p = x.terms[i];
        const auto& q = y.terms[i];
        if (p.c != q.c || p.p != q.p || p.q != q.q) return false;
    }
    return true;
}

// Union of segment ends of both curves, sorted, r_max last.
std::vector<Breakpoint> merged_ends(const DmtCurve& x, const DmtCurve& y) {
    std::vector<Breakpoint> all;
    for (const auto& s : x.segments) all.push_back(s.hi);
    for (const auto& s : y.segments) all.push_back(s.hi);
    std::stable_sort(all.begin(), all.end(),
                     [](const Breakpoint& a, const Breakpoint& b) { return a.value() < b.value(); });
    std::vector<Breakpoint> out;
    for (auto& b : all) {
        if (!out.empty() && std::abs(out.back().value() - b.value()) < kTouch) {
            if (out.back().label.empty()) out.back().label = b.label;
            continue;
        }
        out.push_back(b);
    }
    return out;
}

// Appends a segment, fusing it with the previous one when the forms match.
void push_segment(DmtCurve& c, const Breakpoint& lo, const Breakpoint& hi, const Form& f) {
    if (!c.segments.empty() && same_form(c.segments.back().form, f)) {
        c.segments.back().hi = hi;
        return;
    }
    c.segments.push_back({lo, hi, f});
}

Form inv_r(double k, double a) {
    // k/r + a
    Form f = Form::linear(a, 0.0);
    f.terms.push_back({k, 0.0, 1.0});
    return f;
}

Breakpoint bp(double num, double den) { return Breakpoint::rational(num, den); }

}  // namespace

double Breakpoint::value() const { return (a + (b == 0.0 ? 0.0 : b * std::sqrt(c))) / den; }

Breakpoint Breakpoint::rational(double num, double d, std::string label) {
    if (label.empty()) label = fraction_label(num, d);
    return Breakpoint{num, 0.0, 0.0, d, std::move(label)};
}

Breakpoint Breakpoint::surd(double a, double b, double c, double den, std::string label) {
    return Breakpoint{a, b, c, den, std::move(label)};
}

double Form::eval(double r) const {
    double v = a + b * r;
    for (const auto& t : terms) v += t.c / (t.p + t.q * r);
    return v;
}

Form Form::operator+(const Form& o) const {
    Form f{a + o.a, b + o.b, terms};
    for (const auto& t : o.terms) f.terms.push_back(t);
    return f;
}

Form Form::scaled(double k) const {
    Form f{a * k, b * k, terms};
    for (auto& t : f.terms) t.c *= k;
    return f;
}

const Segment& DmtCurve::segment_at(double r) const {
    if (segments.empty()) throw DomainError("empty curve");
    for (const auto& s : segments)
        if (r <= s.hi.value()) return s;
    return segments.back();
}

double DmtCurve::eval(double r) const {
    if (!(r >= -1e-12 && r <= r_max + 1e-12))
        throw DomainError("r = " + std::to_string(r) + " outside [0, " + std::to_string(r_max) + "] for " + key);
    return std::max(0.0, segment_at(r).form.eval(r));
}

std::vector<Breakpoint> DmtCurve::interior_breakpoints() const {
    std::vector<Breakpoint> out;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) out.push_back(segments[i].hi);
    return out;
}

double eval(const DmtCurve& c, double r) { return c.eval(r); }

DmtCurve ramp(double k, double m, double r_max) {
    DmtCurve c;
    c.r_max = r_max;
    const Breakpoint zero = bp(0, 1);
    const Breakpoint end = bp(r_max, 1);
    if (m <= 0.0) {
        c.segments.push_back({zero, end, Form::linear(k, -k * m)});
        return c;
    }
    const double root = 1.0 / m;
    if (root >= r_max - kTouch) {
        c.segments.push_back({zero, end, Form::linear(k, -k * m)});
        return c;
    }
    Breakpoint rb = bp(1.0, m);
    c.segments.push_back({zero, rb, Form::linear(k, -k * m)});
    c.segments.push_back({rb, end, Form::linear(0.0, 0.0)});
    return c;
}

DmtCurve piecewise(double r_max, const std::vector<std::pair<Breakpoint, Form>>& pieces) {
    DmtCurve c;
    c.r_max = r_max;
    Breakpoint lo = bp(0, 1);
    for (const auto& [hi, f] : pieces) {
        if (lo.value() >= r_max - kTouch) break;
        Breakpoint h = hi.value() > r_max ? bp(r_max, 1) : hi;
        push_segment(c, lo, h, f);
        lo = h;
    }
    if (std::abs(lo.value() - r_max) > 1e-12) throw DomainError("pieces do not reach r_max");
    return c;
}

DmtCurve curve_sum(const DmtCurve& x, const DmtCurve& y) {
    if (std::abs(x.r_max - y.r_max) > 1e-12) throw DomainError("mismatched ranges in curve sum");
    DmtCurve c;
    c.r_max = x.r_max;
    Breakpoint lo = bp(0, 1);
    for (const auto& hi : merged_ends(x, y)) {
        const double mid = 0.5 * (lo.value() + hi.value());
        push_segment(c, lo, hi, x.segment_at(mid).form + y.segment_at(mid).form);
        lo = hi;
    }
    return c;
}

namespace {

std::string surd_label(double a, double b, double c, double den) {
    std::ostringstream os;
    os << "(" << fraction_label(a, 1) << (b > 0 ? "+" : "-") << "sqrt(" << fraction_label(c, 1) << "))/"
       << fraction_label(den, 1);
    return os.str();
}

// Zeros of fx - fy strictly inside (l, h). Rational terms must share one pole;
// clearing it leaves at most a quadratic, so every root is a surd.
std::vector<Breakpoint> crossings(const Form& fx, const Form& fy, double l, double h) {
    double da = fx.a - fy.a, db = fx.b - fy.b;
    std::optional<double> pole;
    double cs = 0.0;
    auto absorb = [&](const RationalTerm& t, double sign) {
        if (t.q == 0.0) {
            da += sign * t.c / t.p;
            return;
        }
        const double s = t.p / t.q;
        if (pole && std::abs(*pole - s) > 1e-15)
            throw DomainError("curve max: rational pieces with different poles");
        pole = s;
        cs += sign * t.c / t.q;
    };
    for (const auto& t : fx.terms) absorb(t, 1.0);
    for (const auto& t : fy.terms) absorb(t, -1.0);
    const double s = pole.value_or(0.0);
    if (!pole) cs = 0.0;
    // (da + db r)(s + r) + cs = 0, or da + db r = 0 without a pole
    const double A = pole ? db : 0.0;
    const double B = pole ? da + db * s : db;
    const double C = pole ? da * s + cs : da;

    std::vector<Breakpoint> roots;
    auto keep = [&](const Breakpoint& b) {
        const double v = b.value();
        if (v > l + kTouch && v < h - kTouch) roots.push_back(b);
    };
    if (std::abs(A) < 1e-15) {
        if (std::abs(B) > 1e-15) keep(bp(-C, B));
    } else {
        const double disc = B * B - 4 * A * C;
        if (disc < -1e-15) return roots;
        const double sq = std::sqrt(std::max(0.0, disc));
        if (std::abs(sq - std::round(sq)) < 1e-12) {
            keep(bp(-B - std::round(sq), 2 * A));
            if (sq > 0.5) keep(bp(-B + std::round(sq), 2 * A));
        } else {
            keep(Breakpoint::surd(-B, -1, disc, 2 * A, surd_label(-B, -1, disc, 2 * A)));
            keep(Breakpoint::surd(-B, 1, disc, 2 * A, surd_label(-B, 1, disc, 2 * A)));
        }
    }
    std::sort(roots.begin(), roots.end(),
              [](const Breakpoint& a, const Breakpoint& b) { return a.value() < b.value(); });
    return roots;
}

}  // namespace

DmtCurve curve_max(const DmtCurve& x, const DmtCurve& y) {
    if (std::abs(x.r_max - y.r_max) > 1e-12) throw DomainError("mismatched ranges in curve max");
    DmtCurve c;
    c.r_max = x.r_max;
    Breakpoint lo = bp(0, 1);
    for (const auto& hi : merged_ends(x, y)) {
        const double l = lo.value(), h = hi.value(), mid = 0.5 * (l + h);
        const Form& fx = x.segment_at(mid).form;
        const Form& fy = y.segment_at(mid).form;
        std::vector<Breakpoint> cuts = crossings(fx, fy, l, h);
        cuts.push_back(hi);
        Breakpoint from = lo;
        for (const auto& to : cuts) {
            const double m = 0.5 * (from.value() + to.value());
            push_segment(c, from, to, fx.eval(m) >= fy.eval(m) ? fx : fy);
            from = to;
        }
        lo = hi;
    }
    return c;
}

double max_jump(const DmtCurve& c) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < c.segments.size(); ++i) {
        const double r = c.segments[i].hi.value();
        const double left = std::max(0.0, c.segments[i].form.eval(r));
        const double right = std::max(0.0, c.segments[i + 1].form.eval(r));
        worst = std::max(worst, std::abs(left - right));
    }
    return worst;
}

bool is_nonincreasing_on_grid(const DmtCurve& c, double step, double tol) {
    const int k = static_cast<int>(std::floor(c.r_max / step + 1e-9));
    double prev = c.eval(0.0);
    for (int i = 1; i <= k + 1; ++i) {
        const double r = std::min(c.r_max, i * step);
        const double v = c.eval(r);
        if (v > prev + tol) return false;
        prev = v;
    }
    return true;
}

std::string CurveKey::str() const {
    return family_name(family) + "/" + variant + ":" + std::to_string(n);
}

CurveKey CurveKey::parse(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) throw UnknownKey("curve key needs family/variant: " + s);
    CurveKey k;
    try {
        k.family = parse_family(s.substr(0, slash));
    } catch (const ConfigError& e) {
        throw UnknownKey(e.what());
    }
    std::string rest = s.substr(slash + 1);
    const auto colon = rest.find(':');
    switch (k.family) {
        case TopologyFamily::OnOff: k.n = 1; break;
        default: k.n = 2; break;
    }
    if (colon != std::string::npos) {
        try {
            std::size_t used = 0;
            k.n = std::stoi(rest.substr(colon + 1), &used);
            if (used != rest.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw UnknownKey("bad node count in curve key: " + s);
        }
        rest = rest.substr(0, colon);
    }
    k.variant = rest;
    return k;
}

namespace {

DmtCurve build(const CurveKey& k) {
    const int n = k.n;
    const double nn = n;
    auto unknown = [&]() { return UnknownKey("no catalog curve for " + k.str()); };
    if (n < 1) throw unknown();
    const std::string& v = k.variant;
    const Breakpoint half = bp(1, 2);
    const Breakpoint one = bp(1, 1);

    switch (k.family) {
        case TopologyFamily::OnOff: {
            if (n != 1) throw unknown();
            if (v == "genie") return ramp(2, 1, 1);
            if (v == "direct") return ramp(1, 1, 1);
            if (v == "orth-af" || v == "orth-df") return curve_sum(ramp(1, 1, 1), ramp(1, 2, 1));
            break;
        }
        case TopologyFamily::Irc: {
            if (v == "genie" || v == "cf") return ramp(2 * nn, 1, 1);
            if (v == "orth-af" || v == "orth-df" || v == "naf")
                return curve_sum(ramp(nn, 1, 1), ramp(nn, 2, 1));
            if (v == "ddf") return piecewise(1, {{half, Form::linear(2 * nn, -2 * nn)}, {one, inv_r(nn, -nn)}});
            if (v == "ddf-simple")
                return piecewise(1, {{Breakpoint::rational(nn, nn + 1, "n/(n+1)"), Form::linear(nn + 1, -(nn + 1))},
                                     {one, inv_r(nn, -nn)}});
            break;
        }
        case TopologyFamily::Src: {
            const double rm = nn;
            if (v == "genie") return curve_sum(ramp(1, 1.0 / nn, rm), ramp(2 * nn - 1, 1, rm));
            if (n != 2) break;
            const Breakpoint two = bp(2, 1);
            const Breakpoint sqrt2 = Breakpoint::surd(2, -1, 2, 1, "2-sqrt2");
            const Breakpoint sqrt5 = Breakpoint::surd(3, -1, 5, 1, "3-sqrt5");
            // 1 - r(1 - r/2)/(1 - r) = 1.5 - r/2 - 0.5/(1 - r)
            Form cond_ddf_low = Form::linear(1.5, -0.5);
            cond_ddf_low.terms.push_back({-0.5, 1.0, -1.0});
            if (v == "naf") return curve_sum(curve_sum(ramp(2, 2, rm), ramp(1, 0.5, rm)), ramp(1, 1, rm));
            if (v == "ddf")
                return piecewise(rm, {{half, cond_ddf_low + Form::linear(2, -2) + Form::linear(1, -0.5)},
                                      {sqrt2, inv_r(2, -2)},
                                      {one, inv_r(1, -1) + Form::linear(1, -0.5)},
                                      {two, Form::linear(1, -0.5)}});
            if (v == "cf")
                return piecewise(rm, {{bp(6, 7), Form::linear(4, -4)}, {two, Form::linear(1, -0.5)}});
            if (v == "orth" || v == "orth-af" || v == "orth-df") return curve_sum(ramp(2, 2, rm), ramp(1, 0.5, rm));
            if (v == "hybrid-naf")
                return curve_max(curve_sum(ramp(2, 1, rm), ramp(2, 2, rm)), ramp(1, 0.5, rm));
            if (v == "hybrid-ddf")
                return piecewise(rm, {{half, Form::linear(4, -4)}, {sqrt5, inv_r(2, -2)}, {two, Form::linear(1, -0.5)}});
            if (v == "hybrid-cf") return curve_max(ramp(4, 1, rm), ramp(1, 0.5, rm));
            if (v == "naf-cond") return ramp(1, 2, rm);
            if (v == "cf-cond") return ramp(1, 1.5, rm);
            if (v == "ddf-cond")
                return piecewise(rm, {{half, cond_ddf_low},
                                      {sqrt2, inv_r(1, -1) + Form::linear(-1, 0.5)},
                                      {two, Form::linear(0, 0)}});
            if (v == "mode1") return ramp(1, 0.5, rm);
            if (v == "naf-mode2") return curve_sum(ramp(1, 1, rm), ramp(1, 2, rm));
            if (v == "ddf-mode2")
                return piecewise(rm, {{half, Form::linear(2, -2)}, {one, inv_r(1, -1)}, {two, Form::linear(0, 0)}});
            if (v == "cf-mode2" || v == "genie-mode2") return ramp(2, 1, rm);
            if (v == "genie-mode3") return ramp(1, 1, rm);
            break;
        }
        case TopologyFamily::Marc:
        case TopologyFamily::Brc: {
            if (v == "genie" || v == "cf") return ramp(nn + 1, 1, 1);
            if (v == "orth-af" || v == "orth-df") return ramp(nn + 1, 2, 1);
            if (v == "orth-off") return curve_sum(ramp(nn, 1, 1), ramp(1, 0.5, 1));
            if (v == "naf") return curve_sum(ramp(nn, 1, 1), ramp(1, 2, 1));
            if (v == "ddf")
                return piecewise(1, {{Breakpoint::rational(nn, nn + 1, "n/(n+1)"), Form::linear(nn + 1, -(nn + 1))},
                                     {one, inv_r(nn, -nn)}});
            break;
        }
        case TopologyFamily::XRelay: {
            if (n != 2) throw unknown();
            if (v == "genie" || v == "cf") return ramp(6, 1, 1);
            if (v == "naf" || v == "orth-af" || v == "orth-df") return curve_sum(ramp(4, 1, 1), ramp(2, 2, 1));
            if (v == "orth-on") return curve_sum(ramp(2, 1, 1), ramp(4, 2, 1));
            if (v == "ddf") {
                Form hi = inv_r(2, 0);
                hi.b = -2;
                return piecewise(1, {{half, Form::linear(6, -6)}, {one, hi}});
            }
            break;
        }
        case TopologyFamily::Gateway: {
            if (v == "no-csi") return ramp(1, 2, 0.5);
            if (v == "full-csi" || v == "one-bit" || v == "genie") return ramp(nn, 2, 0.5);
            if (v == "mac-tdma") {
                DmtCurve c = piecewise(1, {{Breakpoint::rational(nn, nn + 1, "M/(M+1)"), Form::linear(1, -1 / nn)},
                                           {one, Form::linear(nn, -nn)}});
                c.informational = true;
                return c;
            }
            break;
        }
    }
    throw unknown();
}

}  // namespace

DmtCurve dmt_curve(const CurveKey& key) {
    DmtCurve c = build(key);
    c.key = key.str();
    return c;
}

DmtCurve dmt_curve(const std::string& key) { return dmt_curve(CurveKey::parse(key)); }

std::vector<CurveKey> catalog_keys() {
    std::vector<CurveKey> out;
    auto add = [&](TopologyFamily f, std::initializer_list<const char*> vs, std::initializer_list<int> ns) {
        for (int n : ns)
            for (const char* v : vs) out.push_back({f, v, n});
    };
    const auto free_n = {1, 2, 3, 4};
    add(TopologyFamily::OnOff, {"genie", "direct", "orth-af", "orth-df"}, {1});
    add(TopologyFamily::Irc, {"genie", "orth-af", "orth-df", "naf", "ddf", "ddf-simple", "cf"}, free_n);
    add(TopologyFamily::Src, {"genie"}, free_n);
    add(TopologyFamily::Src,
        {"naf", "ddf", "cf", "orth", "orth-af", "orth-df", "hybrid-naf", "hybrid-ddf", "hybrid-cf", "naf-cond",
         "ddf-cond", "cf-cond", "mode1", "naf-mode2", "ddf-mode2", "cf-mode2", "genie-mode2", "genie-mode3"},
        {2});
    add(TopologyFamily::Marc, {"genie", "orth-af", "orth-df", "orth-off", "naf", "ddf", "cf"}, free_n);
    add(TopologyFamily::Brc, {"genie", "orth-af", "orth-df", "orth-off", "naf", "ddf", "cf"}, free_n);
    add(TopologyFamily::XRelay, {"genie", "cf", "naf", "orth-af", "orth-df", "orth-on", "ddf"}, {2});
    add(TopologyFamily::Gateway, {"no-csi", "full-csi", "one-bit", "genie", "mac-tdma"}, free_n);
    return out;
}

std::optional<CurveKey> genie_key_for(const CurveKey& key) {
    if (key.family == TopologyFamily::Gateway && key.variant == "mac-tdma") return std::nullopt;
    return CurveKey{key.family, "genie", key.n};
}

DmtCurve antenna_selection_dmt(int Mt, int Mr, int Lt, int Lr) {
    if (Lt < 1 || Lr < 1 || Lt > Mt || Lr > Mr) throw ConfigError("invalid antenna counts");
    const int L = std::min(Lr, Lt);
    int K = 0;
    double best = 0.0;
    for (int k = 0; k <= L - 1; ++k) {
        double v = static_cast<double>((Mr - k) * (Mt - k)) / (L - k);
        if (k == 0 || v < best) {
            best = v;
            K = k;
        }
    }
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k <= K; ++k) pts.push_back({static_cast<double>(k), static_cast<double>((Mr - k) * (Mt - k))});
    pts.push_back({static_cast<double>(L), 0.0});
    std::vector<std::pair<Breakpoint, Form>> pieces;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto [x0, y0] = pts[i];
        const auto [x1, y1] = pts[i + 1];
        const double slope = (y1 - y0) / (x1 - x0);
        pieces.push_back({bp(x1, 1), Form::linear(y0 - slope * x0, slope)});
    }
    DmtCurve c = piecewise(L, pieces);
    c.key = "antenna-selection(" + std::to_string(Mt) + "," + std::to_string(Mr) + "," + std::to_string(Lt) +
            "," + std::to_string(Lr) + ")";
    return c;
}

std::pair<DmtCurve, DmtCurve> marc_cf_cutset_curves(int n, double t) {
    if (n < 1) throw DomainError("n must be >= 1");
    if (!(t > 0.0 && t < 1.0)) throw DomainError("time split must lie in (0, 1)");
    const double nn = n;
    const Breakpoint one = bp(1, 1);
    DmtCurve bc = t >= 1.0 / (nn + 1)
                      ? ramp(nn + 1, 1, 1)
                      : piecewise(1, {{Breakpoint::rational(t, 1, "t"), Form::linear(nn + 1, -1.0 / t)},
                                      {one, Form::linear(nn / (1 - t), -nn / (1 - t))}});
    DmtCurve mac = t <= nn / (nn + 1)
                       ? ramp(nn + 1, 1, 1)
                       : piecewise(1, {{Breakpoint::rational(1 - t, 1, "1-t"), Form::linear(nn + 1, -1.0 / (1 - t))},
                                       {one, Form::linear(nn / t, -nn / t)}});
    bc.key = "marc/cf-bc:" + std::to_string(n);
    mac.key = "marc/cf-mac:" + std::to_string(n);
    return {bc, mac};
}

}  // namespace oprelay
