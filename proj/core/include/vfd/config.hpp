#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "vfd/experiments.hpp"

namespace vfd {

enum class Subcommand { Profile, GreenCheck, Solve, Converge, Compare, Extinction };

const char* subcommand_name(Subcommand sub);
std::optional<Subcommand> subcommand_from_name(const std::string& name);

struct ProfileParams {
    double m = -0.5;
    double mu = 1.0;
    bool use_eta = false; ///< integrate at the given eta instead of calibrating
    double eta = 1.0;
    double dr = -1.0;     ///< <= 0: default spacing
    double r_max = -1.0;  ///< <= 0: adaptive
};

struct GreenCheckParams {
    double half_width = 2.0;
    std::size_t nodes = 201;
    std::size_t refine_levels = 3;
};

struct SolveParams {
    double half_width = 10.0;
    bool neumann = false;
    std::vector<double> snapshots;
};

/// One parsed and validated batch-run configuration. The experiment block is
/// shared by the solve/converge/compare/extinction subcommands.
struct RunConfig {
    Subcommand subcommand = Subcommand::Converge;
    ExperimentConfig exp;
    ProfileParams profile;
    GreenCheckParams green;
    SolveParams solve;
};

/// Parse a flat key = value document (numbers, strings, [arrays], # comments).
/// Unknown keys are hard errors. A `subcommand` key, when present, must agree
/// with the subcommand given by the caller.
/// Throws ParseError (with line/column) or ValidationError (naming the key).
RunConfig parse_config(const std::string& text,
                       std::optional<Subcommand> cli_subcommand = std::nullopt);

/// FNV-1a hash of the raw config text, as a fixed-width hex string.
std::string config_hash(const std::string& text);

} // namespace vfd
