#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "oprelay/errors.hpp"
#include "oprelay/experiment.hpp"

using namespace oprelay;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kTolerance = 2;
constexpr int kIo = 3;

int execute(const std::string& cmd, const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::uint64_t> trials, const std::string& out, const std::string& format,
            const RunOptions& ro, std::optional<unsigned> threads) {
    const std::optional<OutputFormat> fmt =
        format.empty() ? std::nullopt
                       : std::optional<OutputFormat>(format == "json" ? OutputFormat::Json : OutputFormat::Csv);

    if (cmd == "figures") {
        const std::string dir = out.empty() ? "figures" : out;
        for (const auto& rec : reproduce_figures(dir, fmt.value_or(OutputFormat::Csv), ro))
            std::cerr << rec.config_hash << (rec.from_cache ? " cached" : " computed") << "\n";
        std::cerr << "figures written to " << dir << "\n";
        return kOk;
    }

    ExperimentConfig c;
    const ExperimentKind want = kind_for_command(cmd);
    if (config_path.empty()) {
        c.kind = want;
    } else {
        c = load_config(config_path);
        if (c.kind != want)
            throw ConfigError("config kind '" + kind_name(c.kind) + "' does not match command '" + cmd + "'");
    }
    if (seed) c.seed = *seed;
    if (trials) c.trials = *trials;
    if (threads) c.threads = *threads;
    if (!out.empty()) c.out_path = out;
    if (fmt) c.format = *fmt;

    const ResultRecord rec = run(c, ro);
    std::cerr << kind_name(rec.kind) << " " << rec.config_hash << (rec.from_cache ? " (cache hit)" : "") << "\n";
    if (c.out_path.empty())
        std::cout << (c.format == OutputFormat::Csv ? render_csv(rec) : render_json(rec));
    else
        std::cerr << "wrote " << c.out_path << "\n";

    if (rec.acceptance_pass && !*rec.acceptance_pass) {
        std::cerr << "solver verification outside tolerance: max diff "
                  << rec.payload.at("max_diff").get<double>() << " > " << rec.payload.at("tol").get<double>() << "\n";
        return kTolerance;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Outage and diversity-multiplexing tools for opportunistic relay networks"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out, format;
    std::optional<std::uint64_t> seed, trials;
    std::optional<unsigned> threads;
    bool force = false, no_cache = false;
    std::string cache_dir = "cache";

    app.add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--trials", trials, "Monte Carlo trials per point");
    app.add_option("--out", out, "output file (directory for figures)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--force", force, "ignore cached results");
    app.add_option("--cache-dir", cache_dir, "result cache directory");
    app.add_flag("--no-cache", no_cache, "neither read nor write the cache");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    const char* commands[][2] = {
        {"curve", "export catalog DMT curves"},
        {"sweep", "Monte Carlo outage sweep"},
        {"slope", "outage sweep with a diversity fit"},
        {"verify-solver", "compare the exponent solver with the curve catalog"},
        {"lemma4", "small-outage limit ratios"},
        {"conditional", "conditional outage slope by rejection sampling"},
        {"tightness", "wrong-selection mass of a selection rule"},
        {"figures", "write the data behind every DMT figure"},
    };
    for (const auto& c : commands) app.add_subcommand(c[0], c[1]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInvalid;
    }

    RunOptions ro;
    ro.cache_dir = cache_dir;
    ro.force = force;
    ro.use_cache = !no_cache;

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return execute(cmd, config_path, seed, trials, out, format, ro, threads);
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
}
