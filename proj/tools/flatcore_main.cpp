// flatcore: ground states with flat and compact-support profiles of
//   -Lap u + |u|^{a-1}u = lambda |u|^{b-1}u,  0 < a < b < 1,
// on star-shaped domains, and the associated parabolic dynamics.

#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatcore/run.hpp"

namespace {

void print_error(const char* kind, const std::string& message,
                 const std::vector<std::string>& violations = {}) {
    nlohmann::json err;
    err["error"] = kind;
    err["message"] = message;
    if (!violations.empty()) err["violations"] = violations;
    std::fprintf(stderr, "%s\n", err.dump(2).c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flat / compact-support / usual ground states of the sublinear "
                 "double-power equation, and their parabolic dynamics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", flatcore::cli::version());

    std::string config_path;
    std::string out_dir;
    bool h_study = false;

    const std::vector<std::string> names = {"fibering",    "radial",       "ground-state",
                                            "lambda-star", "extremal",     "branch",
                                            "multiplicity", "parabolic"};
    for (const std::string& name : names) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides config out_dir)");
        if (name == "ground-state" || name == "lambda-star")
            sub->add_flag("--h-study", h_study, "repeat at h, h/2, h/4 and emit a convergence table");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        const flatcore::cli::RunConfig cfg = flatcore::cli::parse_config(config_path);
        flatcore::cli::RunOptions opt;
        opt.h_study = h_study;
        opt.out_override = out_dir;
        flatcore::cli::run(sub, cfg, opt);
        return 0;
    } catch (const flatcore::cli::ValidationError& e) {
        print_error("validation", e.what(), e.violations);
        return 2;
    } catch (const flatcore::cli::ParseError& e) {
        print_error("parse", e.what());
        return 2;
    } catch (const flatcore::Error& e) {
        print_error("numerical", e.what());
        return 3;
    }
}
