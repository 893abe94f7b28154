#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "oprelay/errors.hpp"
#include "oprelay/experiment.hpp"

using namespace oprelay;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("oprelay_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json sweep_config() {
    return json::parse(R"({
        "kind": "mc-sweep",
        "network": {"topology": "onoff", "protocol": "direct", "rule": "fixed", "fixed_mode": 0},
        "rate": {"fixed_bits": 1.0},
        "snr_db": [10, 15],
        "mc": {"trials": 20000, "seed": 7}
    })");
}

int cli(const std::string& args) {
    const std::string cmd = std::string(OPRELAY_CLI) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("strict config parsing") {
    CHECK_NOTHROW(parse_config(sweep_config()));
    json j = sweep_config();
    j["network"]["colour"] = "red";
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = sweep_config();
    j["extra"] = 1;
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = sweep_config();
    j["mc"]["trials"] = "many";
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = sweep_config();
    j.erase("kind");
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = sweep_config();
    j["snr_db"] = {{"from", 10}, {"to", 20}, {"step", 5}};
    CHECK(parse_config(j).snr_db == std::vector<double>{10, 15, 20});
}

TEST_CASE("validation of a parsed config") {
    json j = sweep_config();
    j["snr_db"] = {15, 10};
    CHECK_THROWS_AS(validate(parse_config(j)), ConfigError);
    j = sweep_config();
    j.erase("network");
    CHECK_THROWS_AS(validate(parse_config(j)), ConfigError);
}

TEST_CASE("hash ignores output and thread settings") {
    ExperimentConfig a = parse_config(sweep_config());
    ExperimentConfig b = a;
    b.out_path = "elsewhere.csv";
    b.threads = 3;
    b.format = OutputFormat::Json;
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 8;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("cache hit returns the fresh payload") {
    const fs::path dir = scratch("cache");
    RunOptions ro;
    ro.cache_dir = dir;
    const ExperimentConfig c = parse_config(sweep_config());
    const auto fresh = run(c, ro);
    CHECK_FALSE(fresh.from_cache);
    CHECK(fs::exists(dir / (fresh.config_hash + ".json")));
    const auto hit = run(c, ro);
    CHECK(hit.from_cache);
    CHECK(hit.payload == fresh.payload);
    ro.force = true;
    const auto again = run(c, ro);
    CHECK_FALSE(again.from_cache);
    CHECK(again.payload == fresh.payload);
}

TEST_CASE("corrupt cache entries are recomputed") {
    const fs::path dir = scratch("corrupt");
    RunOptions ro;
    ro.cache_dir = dir;
    const ExperimentConfig c = parse_config(sweep_config());
    const auto fresh = run(c, ro);
    std::ofstream(dir / (fresh.config_hash + ".json")) << "{not json";
    const auto rec = run(c, ro);
    CHECK_FALSE(rec.from_cache);
    CHECK(rec.payload == fresh.payload);
}

TEST_CASE("sweep CSV layout") {
    RunOptions ro;
    ro.use_cache = false;
    const auto rec = run(parse_config(sweep_config()), ro);
    const std::string csv = render_csv(rec);
    CHECK(csv.rfind("snr_db,rho,trials,outages,p_hat,ci_lo,ci_hi,analytic\r\n", 0) == 0);
    int lines = 0;
    for (char ch : csv) lines += ch == '\n';
    CHECK(lines == 3);
    const json doc = json::parse(render_json(rec));
    CHECK(doc.at("schema_version") == kSchemaVersion);
    CHECK(doc.at("kind") == "mc-sweep");
    CHECK(doc.at("payload").at("points").size() == 2);
    CHECK(doc.at("payload").at("points")[0].at("analytic").get<double>() == doctest::Approx(1 - std::exp(-0.1)));
}

TEST_CASE("curve export is wide with one column per key") {
    ExperimentConfig c;
    c.kind = ExperimentKind::CurveExport;
    c.curve_keys = {"onoff/orth-df", "gateway/full-csi:2"};
    c.r_step = 0.25;
    RunOptions ro;
    ro.use_cache = false;
    const std::string csv = render_csv(run(c, ro));
    CHECK(csv == "r,onoff/orth-df:1,gateway/full-csi:2\r\n"
                 "0,2,2\r\n"
                 "0.25,1.25,1\r\n"
                 "0.5,0.5,0\r\n"
                 "0.75,0.25,\r\n"
                 "1,0,\r\n");
}

TEST_CASE("number and field formatting") {
    CHECK(format_number(1.0 / 3.0) == "0.333333333");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(1e-12) == "1e-12");
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("kind names") {
    CHECK(kind_for_command("curve") == ExperimentKind::CurveExport);
    CHECK(kind_for_command("sweep") == ExperimentKind::McSweep);
    CHECK(kind_for_command("verify-solver") == ExperimentKind::SolverVerify);
    CHECK(kind_for_command("tightness") == ExperimentKind::Tightness);
    CHECK(parse_kind(kind_name(ExperimentKind::Conditional)) == ExperimentKind::Conditional);
    CHECK_THROWS(parse_kind("plot"));
}

TEST_CASE("figure data files") {
    const fs::path dir = scratch("figures");
    RunOptions ro;
    ro.use_cache = false;
    const auto recs = reproduce_figures(dir, OutputFormat::Csv, ro);
    CHECK(recs.size() == figure_specs().size());
    for (const auto& f : figure_specs()) CHECK(fs::exists(dir / (f.name + ".csv")));
    const std::string marc = slurp(dir / "DMT.csv");
    CHECK(marc.find("marc/genie:4") != std::string::npos);
    CHECK(marc.find("marc/orth-off") == std::string::npos);
}

}

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
    const fs::path dir = scratch("cli");
    const std::string cache = " --cache-dir " + (dir / "cache").string();

    CHECK(cli("curve --format json" + cache) == 0);
    CHECK(cli("curve --out " + (dir / "c.csv").string() + cache) == 0);
    CHECK(fs::exists(dir / "c.csv"));

    std::ofstream(dir / "bad.json") << R"({"kind": "mc-sweep", "network": {"topology": "onoff", "bogus": 1}})";
    CHECK(cli("sweep --config " + (dir / "bad.json").string() + cache) == 1);

    std::ofstream(dir / "mismatch.json") << R"({"kind": "curve-export"})";
    CHECK(cli("sweep --config " + (dir / "mismatch.json").string() + cache) == 1);

    CHECK(cli("teleport") == 1);

    std::ofstream(dir / "strict.json") << R"({"kind": "solver-verify",
        "solver": {"entries": ["marc-cf"], "r_grid": [0.37], "tol": 1e-12, "grid_step": 0.02, "refine_passes": 0}})";
    CHECK(cli("verify-solver --config " + (dir / "strict.json").string() + cache) == 2);

    // a regular file where a directory is needed
    CHECK(cli("curve --out " + (dir / "c.csv" / "x.csv").string() + " --no-cache") == 3);
}

TEST_CASE("seed override changes the cached entry") {
    const fs::path dir = scratch("cli_seed");
    std::ofstream(dir / "s.json") << sweep_config().dump();
    const std::string base = "sweep --config " + (dir / "s.json").string() + " --cache-dir " + (dir / "cache").string();
    CHECK(cli(base + " --out " + (dir / "a.csv").string()) == 0);
    CHECK(cli(base + " --seed 99 --out " + (dir / "b.csv").string()) == 0);
    CHECK(cli(base + " --out " + (dir / "a2.csv").string()) == 0);
    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(dir / "cache")) entries += e.path().extension() == ".json";
    CHECK(entries == 2);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "a2.csv"));
    CHECK(slurp(dir / "a.csv") != slurp(dir / "b.csv"));
}

}
