#include "oprelay/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "oprelay/analysis_compose.hpp"
#include "oprelay/dmt_closed.hpp"
#include "oprelay/errors.hpp"
#include "oprelay/exponent_solver.hpp"

#ifndef OPRELAY_VERSION
#define OPRELAY_VERSION "0.0.0"
#endif

namespace oprelay {

using nlohmann::json;

std::string tool_version() { return OPRELAY_VERSION; }

std::string kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::CurveExport: return "curve-export";
        case ExperimentKind::McSweep: return "mc-sweep";
        case ExperimentKind::Slope: return "slope";
        case ExperimentKind::SolverVerify: return "solver-verify";
        case ExperimentKind::Lemma4: return "lemma4";
        case ExperimentKind::Conditional: return "conditional";
        case ExperimentKind::Tightness: return "tightness";
    }
    return "?";
}

ExperimentKind parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::CurveExport, ExperimentKind::McSweep, ExperimentKind::Slope,
                   ExperimentKind::SolverVerify, ExperimentKind::Lemma4, ExperimentKind::Conditional,
                   ExperimentKind::Tightness})
        if (kind_name(k) == s) return k;
    throw ConfigError("unknown experiment kind: " + s);
}

ExperimentKind kind_for_command(const std::string& cmd) {
    if (cmd == "curve") return ExperimentKind::CurveExport;
    if (cmd == "sweep") return ExperimentKind::McSweep;
    if (cmd == "verify-solver") return ExperimentKind::SolverVerify;
    return parse_kind(cmd);
}

namespace {

bool is_mc_kind(ExperimentKind k) {
    return k == ExperimentKind::McSweep || k == ExperimentKind::Slope || k == ExperimentKind::Tightness ||
           k == ExperimentKind::Conditional;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double num(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
}

std::uint64_t uint(const json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError(where + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
    return v.get<int>();
}

std::string str(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + " must be a string");
    return v.get<std::string>();
}

bool boolean(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError(where + " must be a boolean");
    return v.get<bool>();
}

std::vector<double> num_list(const json& v, const std::string& where) {
    std::vector<double> out;
    if (v.is_array()) {
        for (const auto& x : v) out.push_back(num(x, where + "[]"));
        return out;
    }
    check_keys(v, {"from", "to", "step"}, where);
    if (!v.contains("from") || !v.contains("to") || !v.contains("step"))
        throw ConfigError(where + " range needs from, to and step");
    const double a = num(v["from"], where + ".from"), b = num(v["to"], where + ".to");
    const double s = num(v["step"], where + ".step");
    if (!(s > 0.0) || b < a) throw ConfigError(where + " range is empty");
    const int k = static_cast<int>(std::floor((b - a) / s + 1e-9));
    for (int i = 0; i <= k; ++i) out.push_back(a + i * s);
    return out;
}

std::vector<std::size_t> index_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + " must be an array");
    std::vector<std::size_t> out;
    for (const auto& x : v) out.push_back(static_cast<std::size_t>(uint(x, where + "[]")));
    return out;
}

std::vector<std::string> str_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + " must be an array");
    std::vector<std::string> out;
    for (const auto& x : v) out.push_back(str(x, where + "[]"));
    return out;
}

Topology make_topology(const std::string& family, int n) {
    const TopologyFamily f = parse_family(family);
    Topology t{f, n};
    if (f == TopologyFamily::OnOff) t.n = 1;
    if (f == TopologyFamily::XRelay) t.n = 2;
    validate(t);
    return t;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json opt_num(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json fit_json(const std::optional<SlopeFit>& f) {
    if (!f) return nullptr;
    return {{"d_hat", f->d_hat},
            {"stderr_d", f->stderr_d},
            {"rho_min", f->rho_min},
            {"rho_max", f->rho_max},
            {"points_used", f->points_used}};
}

std::vector<double> r_samples(double r_max, double step) {
    std::vector<double> out;
    const double inv = 1.0 / step;
    const bool exact = std::abs(inv - std::round(inv)) < 1e-9;
    const int k = static_cast<int>(std::floor(r_max / step + 1e-9));
    for (int i = 0; i <= k; ++i) out.push_back(exact ? i / std::round(inv) : i * step);
    if (r_max - out.back() > 1e-12) out.push_back(r_max);
    return out;
}

std::optional<AnalyticFormula> analytic_for(const ExperimentConfig& c) {
    const Topology& t = *c.topology;
    if (t.family == TopologyFamily::OnOff && c.protocol.kind == Protocol::Direct) return AnalyticFormula::DirectLink;
    if (t.family == TopologyFamily::Gateway && c.rule.kind == RuleKind::MaxEndToEndMI)
        return AnalyticFormula::GatewayFullCsi;
    if (t.family == TopologyFamily::Gateway && c.rule.kind == RuleKind::OneBitThreshold)
        return AnalyticFormula::GatewayOneBit;
    return std::nullopt;
}

Experiment experiment_of(const ExperimentConfig& c) {
    Experiment ex;
    ex.topology = *c.topology;
    ex.protocol = c.protocol;
    ex.rule = c.rule;
    ex.policy = c.policy;
    return ex;
}

json point_json(const OutagePoint& p, std::optional<double> analytic) {
    return {{"snr_db", p.snr_db}, {"rho", p.rho},         {"trials", p.trials},
            {"outages", p.outages}, {"p_hat", p.p_hat},   {"ci_lo", p.ci95.lo},
            {"ci_hi", p.ci95.hi},   {"analytic", opt_num(analytic)}};
}

json sweep_points(const ExperimentConfig& c, const OutageCurve& curve) {
    json pts = json::array();
    const auto formula = analytic_for(c);
    for (const auto& p : curve.points) {
        std::optional<double> a;
        if (formula) {
            AnalyticParams ap;
            ap.rho = p.rho;
            ap.r = c.policy.r;
            ap.fixed_bits = c.policy.fixed_bits;
            ap.M = c.topology->n;
            ap.alpha = c.rule.alpha;
            a = analytic_outage(*formula, ap);
        }
        pts.push_back(point_json(p, a));
    }
    return pts;
}

json compute_payload(const ExperimentConfig& c) {
    ExecOptions exec;
    exec.threads = c.threads;
    switch (c.kind) {
        case ExperimentKind::CurveExport: {
            json curves = json::array();
            for (const auto& key : c.curve_keys) {
                const DmtCurve cv = dmt_curve(key);
                json bps = json::array();
                for (const auto& b : cv.interior_breakpoints()) bps.push_back({{"label", b.label}, {"value", b.value()}});
                json samples = json::array();
                for (double r : r_samples(cv.r_max, c.r_step)) samples.push_back({r, cv.eval(r)});
                curves.push_back({{"key", key},
                                  {"r_max", cv.r_max},
                                  {"informational", cv.informational},
                                  {"breakpoints", bps},
                                  {"samples", samples}});
            }
            return {{"r_step", c.r_step}, {"curves", curves}};
        }
        case ExperimentKind::McSweep: {
            const auto curve = sweep(experiment_of(c), c.snr_db, c.trials, c.seed, exec);
            return {{"descriptor", curve.descriptor}, {"points", sweep_points(c, curve)}};
        }
        case ExperimentKind::Slope: {
            const auto curve = sweep(experiment_of(c), c.snr_db, c.trials, c.seed, exec);
            json out{{"descriptor", curve.descriptor}, {"points", sweep_points(c, curve)}};
            try {
                out["fit"] = fit_json(fit_diversity(curve, c.fit_db, c.min_events));
                out["fit_error"] = "";
            } catch (const InsufficientData& e) {
                out["fit"] = nullptr;
                out["fit_error"] = e.what();
            }
            return out;
        }
        case ExperimentKind::SolverVerify: {
            std::vector<VerifyEntry> entries;
            for (const auto& e : default_verify_map())
                if (c.solver_entries.empty() ||
                    std::find(c.solver_entries.begin(), c.solver_entries.end(), e.label) != c.solver_entries.end())
                    entries.push_back(e);
            const auto grid = c.r_grid.empty() ? default_verify_grid() : c.r_grid;
            const auto rep = verify_catalog(entries, grid, c.tol, c.grid_step, c.refine_passes, exec);
            json rows = json::array();
            for (const auto& r : rep.rows)
                rows.push_back({{"label", r.label},
                                {"r", r.r},
                                {"solver", r.solver},
                                {"catalog", r.catalog},
                                {"diff", r.diff},
                                {"t_star", opt_num(r.t)}});
            return {{"tol", rep.tol}, {"max_diff", rep.max_diff}, {"pass", rep.pass}, {"rows", rows}};
        }
        case ExperimentKind::Lemma4: {
            const auto [limit, power] = lemma4_limit(c.lemma4_case, c.lemma4);
            const auto pts = lemma4_limit_check(c.lemma4_case, c.snr_db, c.lemma4, c.trials, c.seed, exec);
            json arr = json::array();
            for (const auto& p : pts)
                arr.push_back({{"snr_db", p.snr_db},
                               {"trials", p.trials},
                               {"hits", p.hits},
                               {"p_hat", p.p_hat},
                               {"claimed", p.claimed},
                               {"ratio", p.ratio},
                               {"ratio_sigma", p.ratio_sigma}});
            return {{"case", lemma4_case_name(c.lemma4_case)}, {"limit", limit}, {"power", power}, {"points", arr}};
        }
        case ExperimentKind::Conditional: {
            ConditionalOutageSpec spec{experiment_of(c), c.cond_target, c.cond_given};
            ConditionalOptions o;
            o.seed = c.seed;
            o.floor = c.cond_floor;
            o.round_trials = c.cond_round;
            o.max_trials = std::max<std::uint64_t>(c.trials, c.cond_round);
            o.exec = exec;
            const auto res = estimate_conditional_slope(spec, c.snr_db, o);
            json arr = json::array();
            for (const auto& p : res.points)
                arr.push_back({{"snr_db", p.snr_db},
                               {"trials_used", p.estimate.trials_used},
                               {"accepted", p.estimate.accepted},
                               {"hits", p.estimate.hits},
                               {"p_hat", p.estimate.p_hat},
                               {"ci_lo", p.estimate.ci95.lo},
                               {"ci_hi", p.estimate.ci95.hi}});
            return {{"descriptor", spec.experiment.describe()},
                    {"target", c.cond_target},
                    {"given", c.cond_given},
                    {"points", arr},
                    {"fit", fit_json(res.fit)},
                    {"fit_error", res.fit_error}};
        }
        case ExperimentKind::Tightness: {
            const auto rep = tightness_check(experiment_of(c), c.snr_db, c.trials, c.seed, exec);
            json arr = json::array();
            for (const auto& p : rep.points)
                arr.push_back({{"snr_db", p.snr_db},
                               {"trials", p.trials},
                               {"selected_out", p.selected_out},
                               {"all_out", p.all_out},
                               {"wrong_selection", p.wrong_selection},
                               {"wrong_ci_lo", p.wrong_ci95.lo},
                               {"wrong_ci_hi", p.wrong_ci95.hi}});
            return {{"descriptor", rep.descriptor},
                    {"wrong_total", rep.wrong_total},
                    {"draws_total", rep.draws_total},
                    {"points", arr},
                    {"system_fit", fit_json(rep.system_fit)},
                    {"all_out_fit", fit_json(rep.all_out_fit)}};
        }
    }
    throw ConfigError("unhandled experiment kind");
}

json file_document(const ResultRecord& rec) {
    return {{"schema_version", kSchemaVersion},
            {"kind", kind_name(rec.kind)},
            {"config_hash", rec.config_hash},
            {"tool_version", rec.tool_version},
            {"config", rec.config},
            {"payload", rec.payload}};
}

std::optional<ResultRecord> load_cache(const std::filesystem::path& file, const std::string& hash) {
    std::ifstream in(file);
    if (!in) return std::nullopt;
    json doc;
    try {
        doc = json::parse(in);
        if (doc.at("schema_version").get<int>() != kSchemaVersion) return std::nullopt;
        if (doc.at("config_hash").get<std::string>() != hash) return std::nullopt;
        const json& cfg = doc.at("config");
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.dump())));
        if (hash != buf) return std::nullopt;
        ResultRecord rec;
        rec.config_hash = hash;
        rec.created_at = doc.at("created_at").get<std::string>();
        rec.tool_version = doc.at("tool_version").get<std::string>();
        rec.kind = parse_kind(doc.at("kind").get<std::string>());
        rec.config = cfg;
        rec.payload = doc.at("payload");
        if (rec.payload.is_null()) return std::nullopt;
        rec.from_cache = true;
        return rec;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << text;
        if (!out) throw IoError("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp + " to " + path.string() + ": " + ec.message());
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    check_keys(j, {"kind", "network", "rate", "snr_db", "fit", "mc", "curves", "solver", "lemma4", "conditional",
                   "output"},
               "config");
    ExperimentConfig c;
    if (!j.contains("kind")) throw ConfigError("config needs 'kind'");
    c.kind = parse_kind(str(j["kind"], "kind"));

    if (j.contains("network")) {
        const json& n = j["network"];
        check_keys(n, {"topology", "n", "protocol", "off_modes", "cf_t", "rule", "fixed_mode", "alpha"}, "network");
        if (!n.contains("topology")) throw ConfigError("network needs 'topology'");
        const int count = n.contains("n") ? integer(n["n"], "network.n") : 1;
        c.topology = make_topology(str(n["topology"], "network.topology"), count);
        if (n.contains("protocol")) c.protocol.kind = parse_protocol(str(n["protocol"], "network.protocol"));
        if (n.contains("off_modes")) c.protocol.off_modes = boolean(n["off_modes"], "network.off_modes");
        if (n.contains("cf_t")) c.protocol.cf_t = num(n["cf_t"], "network.cf_t");
        if (n.contains("rule")) c.rule.kind = parse_rule(str(n["rule"], "network.rule"));
        if (n.contains("fixed_mode")) c.rule.fixed_index = uint(n["fixed_mode"], "network.fixed_mode");
        if (n.contains("alpha")) c.rule.alpha = num(n["alpha"], "network.alpha");
    }
    if (j.contains("rate")) {
        const json& r = j["rate"];
        check_keys(r, {"r", "fixed_bits"}, "rate");
        if (r.contains("r")) c.policy.r = num(r["r"], "rate.r");
        if (r.contains("fixed_bits")) c.policy.fixed_bits = num(r["fixed_bits"], "rate.fixed_bits");
    }
    if (j.contains("snr_db")) c.snr_db = num_list(j["snr_db"], "snr_db");
    if (j.contains("fit")) {
        const json& f = j["fit"];
        check_keys(f, {"from_db", "to_db", "min_events"}, "fit");
        if (f.contains("from_db") != f.contains("to_db")) throw ConfigError("fit needs both from_db and to_db");
        if (f.contains("from_db")) c.fit_db = {num(f["from_db"], "fit.from_db"), num(f["to_db"], "fit.to_db")};
        if (f.contains("min_events")) c.min_events = uint(f["min_events"], "fit.min_events");
    }
    if (j.contains("mc")) {
        const json& m = j["mc"];
        check_keys(m, {"trials", "seed", "threads"}, "mc");
        if (m.contains("trials")) c.trials = uint(m["trials"], "mc.trials");
        if (m.contains("seed")) c.seed = uint(m["seed"], "mc.seed");
        if (m.contains("threads")) c.threads = static_cast<unsigned>(uint(m["threads"], "mc.threads"));
    }
    if (j.contains("curves")) {
        const json& cv = j["curves"];
        check_keys(cv, {"keys", "r_step"}, "curves");
        if (cv.contains("keys")) c.curve_keys = str_list(cv["keys"], "curves.keys");
        if (cv.contains("r_step")) c.r_step = num(cv["r_step"], "curves.r_step");
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        check_keys(s, {"entries", "r_grid", "tol", "grid_step", "refine_passes"}, "solver");
        if (s.contains("entries")) c.solver_entries = str_list(s["entries"], "solver.entries");
        if (s.contains("r_grid")) c.r_grid = num_list(s["r_grid"], "solver.r_grid");
        if (s.contains("tol")) c.tol = num(s["tol"], "solver.tol");
        if (s.contains("grid_step")) c.grid_step = num(s["grid_step"], "solver.grid_step");
        if (s.contains("refine_passes")) c.refine_passes = integer(s["refine_passes"], "solver.refine_passes");
    }
    if (j.contains("lemma4")) {
        const json& l = j["lemma4"];
        check_keys(l, {"case", "n", "lambda_u", "lambda_v", "lambda_w", "r"}, "lemma4");
        if (l.contains("case")) c.lemma4_case = parse_lemma4_case(str(l["case"], "lemma4.case"));
        if (l.contains("n")) c.lemma4.n = integer(l["n"], "lemma4.n");
        if (l.contains("lambda_u")) c.lemma4.lambda_u = num(l["lambda_u"], "lemma4.lambda_u");
        if (l.contains("lambda_v")) c.lemma4.lambda_v = num(l["lambda_v"], "lemma4.lambda_v");
        if (l.contains("lambda_w")) c.lemma4.lambda_w = num(l["lambda_w"], "lemma4.lambda_w");
        if (l.contains("r")) c.lemma4.r = num(l["r"], "lemma4.r");
    }
    if (j.contains("conditional")) {
        const json& k = j["conditional"];
        check_keys(k, {"target", "given", "floor", "round_trials"}, "conditional");
        if (k.contains("target")) c.cond_target = uint(k["target"], "conditional.target");
        if (k.contains("given")) c.cond_given = index_list(k["given"], "conditional.given");
        if (k.contains("floor")) c.cond_floor = uint(k["floor"], "conditional.floor");
        if (k.contains("round_trials")) c.cond_round = uint(k["round_trials"], "conditional.round_trials");
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, {"path", "format"}, "output");
        if (o.contains("path")) c.out_path = str(o["path"], "output.path");
        if (o.contains("format")) {
            const auto f = str(o["format"], "output.format");
            if (f == "csv")
                c.format = OutputFormat::Csv;
            else if (f == "json")
                c.format = OutputFormat::Json;
            else
                throw ConfigError("output.format must be csv or json");
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot read config " + p.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

void validate(const ExperimentConfig& c) {
    if (is_mc_kind(c.kind)) {
        if (!c.topology) throw ConfigError(kind_name(c.kind) + " needs a network section");
        Network net(*c.topology, c.protocol);
        net.check_rule(c.rule);
        if (c.policy.r < 0.0) throw ConfigError("rate.r must be >= 0");
    }
    if (is_mc_kind(c.kind) || c.kind == ExperimentKind::Lemma4) {
        if (c.kind != ExperimentKind::Conditional && c.trials < 1000)
            throw ConfigError("mc.trials must be at least 1000");
        if (c.snr_db.empty()) throw ConfigError("snr_db must not be empty");
        for (std::size_t i = 1; i < c.snr_db.size(); ++i)
            if (!(c.snr_db[i] > c.snr_db[i - 1])) throw ConfigError("snr_db must be strictly increasing");
    }
    switch (c.kind) {
        case ExperimentKind::CurveExport:
            if (!(c.r_step > 0.0 && c.r_step <= 0.5)) throw ConfigError("curves.r_step must lie in (0, 0.5]");
            for (const auto& k : c.curve_keys) dmt_curve(k);
            break;
        case ExperimentKind::Slope:
            if (c.snr_db.size() < 3) throw ConfigError("slope needs at least 3 SNR points");
            break;
        case ExperimentKind::SolverVerify: {
            std::set<std::string> labels;
            for (const auto& e : default_verify_map()) labels.insert(e.label);
            for (const auto& e : c.solver_entries)
                if (!labels.count(e)) throw ConfigError("unknown solver entry: " + e);
            if (!(c.tol > 0.0)) throw ConfigError("solver.tol must be positive");
            if (!(c.grid_step > 0.0 && c.grid_step <= 0.02)) throw ConfigError("solver.grid_step must lie in (0, 0.02]");
            if (c.refine_passes < 0) throw ConfigError("solver.refine_passes must be >= 0");
            break;
        }
        case ExperimentKind::Lemma4:
            if (c.lemma4.n < 1) throw ConfigError("lemma4.n must be >= 1");
            break;
        case ExperimentKind::Conditional: {
            validate(ConditionalOutageSpec{experiment_of(c), c.cond_target, c.cond_given});
            if (c.cond_round < 1000) throw ConfigError("conditional.round_trials must be at least 1000");
            if (c.cond_floor < 1) throw ConfigError("conditional.floor must be positive");
            break;
        }
        default: break;
    }
}

json canonical_json(const ExperimentConfig& c) {
    json j{{"kind", kind_name(c.kind)}};
    if (is_mc_kind(c.kind)) {
        json n{{"topology", family_name(c.topology->family)},
               {"n", c.topology->n},
               {"protocol", protocol_name(c.protocol.kind)},
               {"off_modes", c.protocol.off_modes},
               {"cf_t", c.protocol.cf_t},
               {"rule", rule_name(c.rule.kind)},
               {"fixed_mode", c.rule.fixed_index},
               {"alpha", opt_num(c.rule.alpha)}};
        j["network"] = n;
        j["rate"] = {{"r", c.policy.r}, {"fixed_bits", opt_num(c.policy.fixed_bits)}};
    }
    if (is_mc_kind(c.kind) || c.kind == ExperimentKind::Lemma4) {
        j["snr_db"] = c.snr_db;
        j["mc"] = {{"trials", c.trials}, {"seed", c.seed}};
    }
    switch (c.kind) {
        case ExperimentKind::CurveExport: j["curves"] = {{"keys", c.curve_keys}, {"r_step", c.r_step}}; break;
        case ExperimentKind::Slope:
            j["fit"] = {{"from_db", c.fit_db ? json(c.fit_db->first) : json(nullptr)},
                        {"to_db", c.fit_db ? json(c.fit_db->second) : json(nullptr)},
                        {"min_events", c.min_events}};
            break;
        case ExperimentKind::SolverVerify:
            j["solver"] = {{"entries", c.solver_entries},
                           {"r_grid", c.r_grid},
                           {"tol", c.tol},
                           {"grid_step", c.grid_step},
                           {"refine_passes", c.refine_passes}};
            break;
        case ExperimentKind::Lemma4:
            j["lemma4"] = {{"case", lemma4_case_name(c.lemma4_case)},
                           {"n", c.lemma4.n},
                           {"lambda_u", c.lemma4.lambda_u},
                           {"lambda_v", c.lemma4.lambda_v},
                           {"lambda_w", c.lemma4.lambda_w},
                           {"r", c.lemma4.r}};
            break;
        case ExperimentKind::Conditional:
            j["conditional"] = {{"target", c.cond_target},
                                {"given", c.cond_given},
                                {"floor", c.cond_floor},
                                {"round_trials", c.cond_round}};
            break;
        default: break;
    }
    return j;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_json(c).dump())));
    return buf;
}

ResultRecord run(const ExperimentConfig& cfg, const RunOptions& opt) {
    ExperimentConfig c = cfg;
    if (c.kind == ExperimentKind::CurveExport && c.curve_keys.empty())
        for (const auto& k : catalog_keys()) c.curve_keys.push_back(k.str());
    for (auto& k : c.curve_keys) k = CurveKey::parse(k).str();
    validate(c);
    const std::string hash = config_hash(c);
    const auto cache_file = opt.cache_dir / (hash + ".json");

    std::optional<ResultRecord> rec;
    if (opt.use_cache && !opt.force) rec = load_cache(cache_file, hash);
    if (!rec) {
        ResultRecord fresh;
        fresh.config_hash = hash;
        fresh.created_at = utc_now();
        fresh.tool_version = tool_version();
        fresh.kind = c.kind;
        fresh.config = canonical_json(c);
        fresh.payload = compute_payload(c);
        if (opt.use_cache) {
            json doc = file_document(fresh);
            doc["created_at"] = fresh.created_at;
            write_text(cache_file, doc.dump(2) + "\n");
        }
        rec = std::move(fresh);
    }
    if (rec->kind == ExperimentKind::SolverVerify) rec->acceptance_pass = rec->payload.at("pass").get<bool>();
    if (!c.out_path.empty()) write_output(*rec, c.out_path, c.format);
    return *rec;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

namespace {

std::string cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_number(v.get<double>());
    if (v.is_string()) return csv_escape(v.get<std::string>());
    return csv_escape(v.dump());
}

void row(std::ostringstream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << "\r\n";
}

void table(std::ostringstream& os, const json& rows, const std::vector<std::string>& cols,
           const std::vector<std::pair<std::string, json>>& extra = {}) {
    std::vector<std::string> head;
    for (const auto& c : cols) head.push_back(csv_escape(c));
    for (const auto& e : extra) head.push_back(csv_escape(e.first));
    row(os, head);
    for (const auto& r : rows) {
        std::vector<std::string> cells;
        for (const auto& c : cols) cells.push_back(cell(r.at(c)));
        for (const auto& e : extra) cells.push_back(cell(e.second));
        row(os, cells);
    }
}

json fit_field(const json& fit, const char* k) { return fit.is_null() ? json(nullptr) : fit.at(k); }

}  // namespace

std::string render_csv(const ResultRecord& rec) {
    std::ostringstream os;
    const json& p = rec.payload;
    const std::vector<std::string> point_cols{"snr_db", "rho", "trials", "outages", "p_hat", "ci_lo", "ci_hi", "analytic"};
    switch (rec.kind) {
        case ExperimentKind::CurveExport: {
            const json& curves = p.at("curves");
            std::vector<std::string> head{"r"};
            std::size_t rows = 0, longest = 0;
            for (std::size_t i = 0; i < curves.size(); ++i) {
                head.push_back(csv_escape(curves[i].at("key").get<std::string>()));
                if (curves[i].at("samples").size() > rows) {
                    rows = curves[i].at("samples").size();
                    longest = i;
                }
            }
            row(os, head);
            for (std::size_t k = 0; k < rows; ++k) {
                const double r = curves[longest].at("samples")[k][0].get<double>();
                std::vector<std::string> cells{format_number(r)};
                for (const auto& cv : curves) {
                    std::string v;
                    for (const auto& s : cv.at("samples"))
                        if (std::abs(s[0].get<double>() - r) < 1e-12) v = format_number(s[1].get<double>());
                    cells.push_back(v);
                }
                row(os, cells);
            }
            break;
        }
        case ExperimentKind::McSweep: table(os, p.at("points"), point_cols); break;
        case ExperimentKind::Slope:
            table(os, p.at("points"), point_cols,
                  {{"d_hat", fit_field(p.at("fit"), "d_hat")}, {"stderr_d", fit_field(p.at("fit"), "stderr_d")}});
            break;
        case ExperimentKind::SolverVerify:
            table(os, p.at("rows"), {"label", "r", "solver", "catalog", "diff", "t_star"});
            break;
        case ExperimentKind::Lemma4:
            table(os, p.at("points"), {"snr_db", "trials", "hits", "p_hat", "claimed", "ratio", "ratio_sigma"},
                  {{"case", p.at("case")}});
            break;
        case ExperimentKind::Conditional:
            table(os, p.at("points"), {"snr_db", "trials_used", "accepted", "hits", "p_hat", "ci_lo", "ci_hi"},
                  {{"d_hat", fit_field(p.at("fit"), "d_hat")}, {"stderr_d", fit_field(p.at("fit"), "stderr_d")}});
            break;
        case ExperimentKind::Tightness:
            table(os, p.at("points"),
                  {"snr_db", "trials", "selected_out", "all_out", "wrong_selection", "wrong_ci_lo", "wrong_ci_hi"},
                  {{"system_d_hat", fit_field(p.at("system_fit"), "d_hat")},
                   {"all_out_d_hat", fit_field(p.at("all_out_fit"), "d_hat")}});
            break;
    }
    return os.str();
}

std::string render_json(const ResultRecord& rec) { return file_document(rec).dump(2) + "\n"; }

void write_output(const ResultRecord& rec, const std::filesystem::path& path, OutputFormat fmt) {
    write_text(path, fmt == OutputFormat::Csv ? render_csv(rec) : render_json(rec));
}

std::vector<FigureSpec> figure_specs() {
    std::vector<FigureSpec> out;
    out.push_back({"DMTIRC",
                   {"irc/genie:4", "irc/orth-df:4", "irc/naf:4", "irc/ddf:4", "irc/ddf-simple:4", "irc/cf:4"}});
    out.push_back({"DMTSRC", {"src/genie:2", "src/naf:2", "src/ddf:2", "src/cf:2", "src/orth:2"}});
    FigureSpec marc{"DMT", {}};
    for (int n : {1, 2, 4})
        for (const char* v : {"genie", "orth-df", "naf", "ddf", "cf"})
            marc.keys.push_back(std::string("marc/") + v + ":" + std::to_string(n));
    out.push_back(marc);
    out.push_back({"XRCDMT", {"xrelay/orth-df:2", "xrelay/naf:2", "xrelay/ddf:2", "xrelay/cf:2", "xrelay/genie:2"}});
    return out;
}

std::vector<ResultRecord> reproduce_figures(const std::filesystem::path& out_dir, OutputFormat fmt,
                                            const RunOptions& opt) {
    std::vector<ResultRecord> out;
    for (const auto& f : figure_specs()) {
        ExperimentConfig c;
        c.kind = ExperimentKind::CurveExport;
        c.curve_keys = f.keys;
        c.r_step = 0.01;
        c.format = fmt;
        c.out_path = (out_dir / (f.name + (fmt == OutputFormat::Csv ? ".csv" : ".json"))).string();
        out.push_back(run(c, opt));
    }
    return out;
}

}  // namespace oprelay
