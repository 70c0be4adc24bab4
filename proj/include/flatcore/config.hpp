#pragma once

// JSON run configuration: strict parsing (unknown keys rejected, every
// violation reported with its key path) into validated module inputs.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flatcore/errors.hpp"
#include "flatcore/grid.hpp"
#include "flatcore/parabolic.hpp"
#include "flatcore/scalar.hpp"
#include "flatcore/varsolve.hpp"

namespace flatcore::cli {

struct ParseError : Error {
    using Error::Error;
};

/// Carries every violation found, not just the first.
struct ValidationError : Error {
    std::vector<std::string> violations;
    explicit ValidationError(std::vector<std::string> v);
};

struct LambdaGrid {
    double min = 0.0;
    double max = 0.0;
    int count = 0;
    std::vector<double> values() const;
};

struct RadialConfig {
    double lambda = 1.0;
    double target_radius = 0.0; // > 0: also report the lambda that fits B_R
};

struct ParabolicBlock {
    parabolic::ParabolicConfig config;
    std::string initial = "bump"; // "bump" | "ground-state"
    double bump_amplitude = 1.0;
};

struct RunConfig {
    scalar::Exponents exponents{0.5, 0.9, 3};
    std::optional<grid::DomainSpec> domain;
    double h = 0.1;
    varsolve::SolveParams solver;
    std::string out_dir = "out";

    std::optional<scalar::IntegralTriple> triple; // fibering
    std::optional<double> lambda;                 // fibering, ground-state
    std::optional<LambdaGrid> lambda_grid;        // branch
    std::optional<RadialConfig> radial;           // radial
    std::optional<ParabolicBlock> parabolic;      // parabolic
    std::string extremal_which = "both";          // extremal
    int seed_family = 16;                         // multiplicity

    nlohmann::json echo; // the exact JSON text parsed, for report round-trips
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);

} // namespace flatcore::cli
