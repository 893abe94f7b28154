#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oprelay/parallel.hpp"
#include "oprelay/protocol_mi.hpp"

namespace oprelay {

enum class RegionId { NafMode, DdfMode, SrcNafCond, SrcDdfCond, SrcCfCond, MarcJoint, XrelayJoint };

std::string region_name(RegionId id);
RegionId parse_region(const std::string& s);

struct RegionParams {
    int n = 2;
    // Listening / time-split fraction. Defaults: t = r for DDF forms, 0.5 for CF.
    std::optional<double> t;
    // NAF, DDF or CF; only read by the joint regions.
    Protocol protocol = Protocol::NAF;
    // SRC conditional regions: apply the shifted support v1 >= 1 - r/2 with offset r/2 - 1.
    bool shift = true;
};

struct Variable {
    std::string name;
    double lo = 0.0;
    double weight = 1.0;
    double offset = 0.0;
};

// One group of private variables tied by a single inequality lhs(x) <= r.
// lhs takes the full variable vector and is nonincreasing in every variable.
struct ConstraintBlock {
    std::vector<std::size_t> vars;
    std::function<double(const std::vector<double>&)> lhs;
};

struct OutageRegion {
    RegionId id = RegionId::NafMode;
    double r = 0.0;
    std::optional<double> t;
    std::vector<Variable> variables;
    std::vector<std::size_t> shared;
    std::vector<ConstraintBlock> blocks;

    double objective(const std::vector<double>& x) const;
    bool contains(const std::vector<double>& x, double tol = 1e-12) const;
};

// Width of the search box above each support lower bound.
inline constexpr double kBoxWidth = 2.0;

OutageRegion build_region(RegionId id, double r, const RegionParams& params = {});

struct SolveResult {
    double d_value = 0.0;
    std::vector<double> argmin;
    std::vector<std::string> names;
    double grid_step = 0.0;
    int refine_passes = 0;
    std::optional<double> t;
    // False when some coordinate of the argmin sits on the upper box face.
    bool box_interior = true;
};

// Coarse grid then refine_passes local passes, each halving the step.
// Throws InfeasibleRegion when no box point satisfies the constraints.
SolveResult solve_inf(const OutageRegion& region, double grid_step = 0.01, int refine_passes = 3,
                      const ExecOptions& exec = {});

enum class SplitKind { None, Ddf, Cf };
SplitKind split_kind(RegionId id, const RegionParams& params);

struct TimeSplitResult {
    double t_star = 0.0;
    double d_value = 0.0;
    SolveResult solve;
};

// Max over t of the per-t infimum. DDF scans t in [r, 1], CF scans (0, 1).
// The t scan uses cheap solves; the winning t is re-solved at final_grid_step.
TimeSplitResult optimize_time_split(RegionId id, double r, const RegionParams& params = {},
                                    double t_grid_step = 0.05, double final_grid_step = 0.01,
                                    int final_passes = 3, const ExecOptions& exec = {});

struct VerifyEntry {
    std::string label;
    RegionId region = RegionId::NafMode;
    RegionParams params;
    std::string curve_key;
};

struct VerifyRow {
    std::string label;
    double r = 0.0;
    double solver = 0.0;
    double catalog = 0.0;
    double diff = 0.0;
    std::optional<double> t;
};

struct VerifyReport {
    std::vector<VerifyRow> rows;
    double max_diff = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// SRC conditional NAF/DDF/CF, MARC NAF/DDF/CF (n = 2), X-relay NAF/DDF.
std::vector<VerifyEntry> default_verify_map();
std::vector<double> default_verify_grid();

VerifyReport verify_catalog(const std::vector<VerifyEntry>& entries, const std::vector<double>& r_grid, double tol,
                            double grid_step = 0.01, int refine_passes = 3, const ExecOptions& exec = {});

}  // namespace oprelay
