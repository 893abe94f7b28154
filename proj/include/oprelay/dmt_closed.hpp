#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oprelay/topology.hpp"

namespace oprelay {

// Exact breakpoint value (a + b*sqrt(c)) / den, evaluated on demand.
struct Breakpoint {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double den = 1.0;
    std::string label;

    double value() const;

    static Breakpoint rational(double num, double den, std::string label = "");
    static Breakpoint surd(double a, double b, double c, double den, std::string label);
};

// c / (p + q r)
struct RationalTerm {
    double c = 0.0;
    double p = 0.0;
    double q = 0.0;
};

// a + b r + sum of rational terms
struct Form {
    double a = 0.0;
    double b = 0.0;
    std::vector<RationalTerm> terms;

    static Form linear(double a, double b) { return Form{a, b, {}}; }
    double eval(double r) const;
    bool is_linear() const { return terms.empty(); }
    Form operator+(const Form& o) const;
    Form scaled(double k) const;
};

struct Segment {
    Breakpoint lo;
    Breakpoint hi;
    Form form;
};

// Piecewise curve on [0, r_max]; segment i covers (lo, hi], the first one includes 0.
struct DmtCurve {
    std::string key;
    double r_max = 1.0;
    std::vector<Segment> segments;
    bool informational = false;

    double eval(double r) const;
    const Segment& segment_at(double r) const;
    std::vector<Breakpoint> interior_breakpoints() const;
};

double eval(const DmtCurve& c, double r);

// k * (1 - m r)^+ on [0, r_max].
DmtCurve ramp(double k, double m, double r_max);
// Explicit pieces: each entry is (hi breakpoint, form); the last hi must equal r_max.
DmtCurve piecewise(double r_max, const std::vector<std::pair<Breakpoint, Form>>& pieces);

DmtCurve curve_sum(const DmtCurve& x, const DmtCurve& y);
// Pointwise maximum; crossings of linear pieces become exact breakpoints.
DmtCurve curve_max(const DmtCurve& x, const DmtCurve& y);

// Largest jump across interior breakpoints.
double max_jump(const DmtCurve& c);
bool is_nonincreasing_on_grid(const DmtCurve& c, double step, double tol = 1e-12);

struct CurveKey {
    TopologyFamily family = TopologyFamily::OnOff;
    std::string variant;
    int n = 1;

    std::string str() const;
    static CurveKey parse(const std::string& s);
};

DmtCurve dmt_curve(const CurveKey& key);
DmtCurve dmt_curve(const std::string& key);

// Every catalog key, for n in {1, 2, 3, 4} where n is free.
std::vector<CurveKey> catalog_keys();
// Genie curve of the key's topology; nullopt for informational curves.
std::optional<CurveKey> genie_key_for(const CurveKey& key);

// Piecewise-linear upper bound through {(k, (Mr-k)(Mt-k))}_{k<=K} and (min(Lr, Lt), 0).
DmtCurve antenna_selection_dmt(int Mt, int Mr, int Lt, int Lr);

// Broadcast and multiple-access cutset curves of the MARC compress-forward scheme.
std::pair<DmtCurve, DmtCurve> marc_cf_cutset_curves(int n, double t);

}  // namespace oprelay
