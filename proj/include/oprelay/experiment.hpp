#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "oprelay/networks.hpp"
#include "oprelay/outage_mc.hpp"

namespace oprelay {

inline constexpr int kSchemaVersion = 1;
std::string tool_version();

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { CurveExport, McSweep, Slope, SolverVerify, Lemma4, Conditional, Tightness };

std::string kind_name(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);
// CLI subcommand to kind: curve, sweep, slope, verify-solver, lemma4, conditional, tightness.
ExperimentKind kind_for_command(const std::string& cmd);

enum class OutputFormat { Csv, Json };

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::CurveExport;

    // network section
    std::optional<Topology> topology;
    ProtocolSpec protocol;
    SelectionRule rule;

    // rate section
    RatePolicy policy;

    std::vector<double> snr_db;
    std::optional<std::pair<double, double>> fit_db;
    std::uint64_t min_events = 20;

    std::uint64_t trials = 1000000;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    // curves section
    std::vector<std::string> curve_keys;
    double r_step = 0.01;

    // solver section
    std::vector<std::string> solver_entries;  // labels from the default map; empty = all
    std::vector<double> r_grid;
    double tol = 0.03;
    double grid_step = 0.01;
    int refine_passes = 3;

    // lemma4 section
    Lemma4Case lemma4_case = Lemma4Case::Res1;
    Lemma4Params lemma4;

    // conditional section
    std::size_t cond_target = 1;
    std::vector<std::size_t> cond_given{0};
    std::uint64_t cond_floor = 10000;
    std::uint64_t cond_round = 1000000;

    // output section
    std::string out_path;
    OutputFormat format = OutputFormat::Csv;
};

// Strict: unknown keys, wrong types and missing required fields throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& p);
void validate(const ExperimentConfig& c);

// Canonical form of everything that affects the payload (no output or thread settings).
nlohmann::json canonical_json(const ExperimentConfig& c);
std::uint64_t fnv1a64(const std::string& s);
std::string config_hash(const ExperimentConfig& c);

struct ResultRecord {
    std::string config_hash;
    std::string created_at;
    std::string tool_version;
    ExperimentKind kind = ExperimentKind::CurveExport;
    nlohmann::json config;
    nlohmann::json payload;
    bool from_cache = false;
    // solver-verify only
    std::optional<bool> acceptance_pass;
};

struct RunOptions {
    std::filesystem::path cache_dir = "cache";
    bool force = false;
    bool use_cache = true;
};

// Computes or loads the payload and writes c.out_path when it is set.
ResultRecord run(const ExperimentConfig& c, const RunOptions& opt = {});

std::string render_csv(const ResultRecord& rec);
std::string render_json(const ResultRecord& rec);
std::string csv_escape(const std::string& field);
std::string format_number(double v);

void write_output(const ResultRecord& rec, const std::filesystem::path& path, OutputFormat fmt);

struct FigureSpec {
    std::string name;
    std::vector<std::string> keys;
};

std::vector<FigureSpec> figure_specs();
std::vector<ResultRecord> reproduce_figures(const std::filesystem::path& out_dir, OutputFormat fmt,
                                            const RunOptions& opt = {});

}  // namespace oprelay
