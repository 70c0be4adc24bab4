#include "flatcore/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>

#include "flatcore/field_io.hpp"
#include "flatcore/parabolic.hpp"
#include "flatcore/radial.hpp"
#include "flatcore/varsolve.hpp"

namespace flatcore::cli {

using nlohmann::json;

const char* version() { return "1.0.0"; }

namespace {

int thread_cap() {
    const char* env = std::getenv("FLATCORE_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return n > 0 ? n : 1;
}

std::string classification_name(varsolve::Classification c) {
    switch (c) {
        case varsolve::Classification::Usual: return "usual";
        case varsolve::Classification::FlatOrCompact: return "flat_or_compact";
        default: return "indeterminate";
    }
}

struct Writer {
    std::filesystem::path dir;

    explicit Writer(const std::string& out) : dir(out) {
        std::filesystem::create_directories(dir);
    }

    void json_file(const std::string& name, const json& j) const {
        grid::write_text_atomic((dir / name).string(), j.dump(2) + "\n");
    }
    void text(const std::string& name, const std::string& content) const {
        grid::write_text_atomic((dir / name).string(), content);
    }
    void field(const std::string& stem, const grid::Grid& g, const grid::Field& u) const {
        grid::write_field_binary((dir / (stem + ".bin")).string(), g, u);
        grid::write_field_csv((dir / (stem + ".csv")).string(), g, u);
    }
};

json report_skeleton(const std::string& subcommand, const RunConfig& cfg) {
    json rep;
    rep["subcommand"] = subcommand;
    rep["version"] = version();
    rep["threads"] = thread_cap();
    rep["config"] = cfg.echo;
    rep["tolerances"] = {{"tol_res", cfg.solver.tol_res},
                         {"max_outer", cfg.solver.max_outer},
                         {"precond_iters", cfg.solver.precond_iters},
                         {"c_cls", cfg.solver.c_cls},
                         {"bisect_rel", cfg.solver.bisect_rel}};
    return rep;
}

json ground_state_json(const varsolve::GroundStateResult& r) {
    return {{"lambda", r.lambda},
            {"energy", r.energy},
            {"pohozaev", r.pohozaev},
            {"energy_second", r.energy_second},
            {"residual", r.residual},
            {"boundary_flux", r.boundary_flux},
            {"support_fraction", r.support_fraction},
            {"classification", classification_name(r.classification)},
            {"iterations", r.iterations},
            {"converged", r.converged}};
}

const grid::DomainSpec& need_domain(const RunConfig& cfg) {
    if (!cfg.domain)
        throw ValidationError({"domain: required by this subcommand"});
    return *cfg.domain;
}

void run_fibering(const RunConfig& cfg, const Writer& w) {
    if (!cfg.triple) throw ValidationError({"triple: required by the fibering subcommand"});
    const auto& tr = *cfg.triple;
    const auto& exp = cfg.exponents;
    const scalar::RayleighReport rr = scalar::rayleigh_report(tr, exp);

    json rep = report_skeleton("fibering", cfg);
    rep["results"] = {{"t_0", rr.t_0},
                      {"t_1", rr.t_1},
                      {"t_P", rr.t_P},
                      {"t_1P", rr.t_1P},
                      {"lambda_u", rr.lambda_u},
                      {"lambda_0", rr.lambda_0},
                      {"lambda_1P", rr.lambda_1P},
                      {"lambda_1_min", rr.lambda_1_min},
                      {"c0_constant", scalar::c0_constant(exp)},
                      {"c1p_constant", scalar::c1p_constant_derived(exp)},
                      {"es_margin", scalar::es_margin(exp)}};
    if (cfg.lambda) {
        const scalar::FiberingRoots roots = scalar::fibering_roots(tr, exp, *cfg.lambda);
        json r;
        r["kind"] = roots.kind == scalar::RootKind::NoRoot   ? "no_root"
                    : roots.kind == scalar::RootKind::Tangent ? "tangent"
                                                              : "pair";
        if (roots.t_max) r["t_max"] = *roots.t_max;
        if (roots.t_min) r["t_min"] = *roots.t_min;
        rep["results"]["fibering_roots"] = r;
    }
    w.json_file("report.json", rep);
}

void run_radial(const RunConfig& cfg, const Writer& w) {
    const RadialConfig rc = cfg.radial.value_or(RadialConfig{});
    const auto& exp = cfg.exponents;
    radial::ShootOptions opt;
    const radial::RadialProfile flat = radial::find_flat(exp, opt);

    const double sigma = std::pow(rc.lambda, -(1.0 - exp.alpha) / (2.0 * (exp.beta - exp.alpha)));
    const radial::RadialProfile prof = radial::rescale(flat, sigma, exp);

    std::ostringstream csv;
    csv << "r,u,du\n";
    for (size_t k = 0; k < prof.r.size(); ++k)
        csv << prof.r[k] << "," << prof.u[k] << "," << prof.du[k] << "\n";
    w.text("profile.csv", csv.str());

    json rep = report_skeleton("radial", cfg);
    rep["results"] = {{"lambda", prof.lambda},
                      {"support_radius", prof.support_radius},
                      {"center_height", prof.u.empty() ? 0.0 : prof.u.front()},
                      {"support_radius_at_unit_lambda", flat.support_radius}};
    if (rc.target_radius > 0.0)
        rep["results"]["lambda_star_radial"] =
            radial::lambda_star_from_profile(flat, exp, rc.target_radius);
    w.json_file("report.json", rep);
}

json ground_state_at(const RunConfig& cfg, double h, const Writer* w_fields) {
    const grid::Grid g(need_domain(cfg), h);
    const grid::Field seed = varsolve::default_seed(g, need_domain(cfg));
    const varsolve::GroundStateResult r =
        varsolve::minimize_ground_state(g, cfg.exponents, *cfg.lambda, seed, cfg.solver);
    if (w_fields) w_fields->field("solution", g, r.field);
    json out = ground_state_json(r);
    out["h"] = h;
    out["pohozaev_defect"] = varsolve::pohozaev_check(g, r.field, cfg.exponents, *cfg.lambda,
                                                     need_domain(cfg));
    return out;
}

void run_ground_state(const RunConfig& cfg, const Writer& w, bool h_study) {
    if (!cfg.lambda) throw ValidationError({"lambda: required by the ground-state subcommand"});
    json rep = report_skeleton("ground-state", cfg);
    rep["results"] = ground_state_at(cfg, cfg.h, &w);
    if (h_study) {
        json study = json::array();
        std::ostringstream csv;
        csv << "h,energy,pohozaev,boundary_flux,residual,classification\n";
        for (const double h : {cfg.h, cfg.h / 2.0, cfg.h / 4.0}) {
            const json row = ground_state_at(cfg, h, nullptr);
            study.push_back(row);
            csv << h << "," << row["energy"].get<double>() << ","
                << row["pohozaev"].get<double>() << "," << row["boundary_flux"].get<double>()
                << "," << row["residual"].get<double>() << ","
                << row["classification"].get<std::string>() << "\n";
        }
        rep["h_study"] = study;
        w.text("h_study.csv", csv.str());
    }
    w.json_file("report.json", rep);
}

json lambda_star_at(const RunConfig& cfg, double h, const Writer* w_fields) {
    const grid::Grid g(need_domain(cfg), h);
    const varsolve::LambdaStarResult ls =
        varsolve::lambda_star(g, cfg.exponents, need_domain(cfg), cfg.solver);
    if (w_fields) w_fields->field("flat_point", g, ls.flat_point.field);
    json out;
    out["h"] = h;
    out["lambda_star"] = ls.lambda_star;
    out["flat_point"] = ground_state_json(ls.flat_point);
    out["es_warning"] = ls.es_warning;
    if (ls.lambda_star_radial > 0.0) {
        out["lambda_star_radial"] = ls.lambda_star_radial;
        out["radial_gap"] = ls.radial_gap;
    }
    return out;
}

void run_lambda_star(const RunConfig& cfg, const Writer& w, bool h_study) {
    json rep = report_skeleton("lambda-star", cfg);
    rep["results"] = lambda_star_at(cfg, cfg.h, &w);
    if (h_study) {
        json study = json::array();
        std::ostringstream csv;
        csv << "h,lambda_star,radial_gap\n";
        for (const double h : {cfg.h, cfg.h / 2.0, cfg.h / 4.0}) {
            const json row = lambda_star_at(cfg, h, nullptr);
            study.push_back(row);
            csv << h << "," << row["lambda_star"].get<double>() << ","
                << (row.contains("radial_gap") ? row["radial_gap"].get<double>() : 0.0) << "\n";
        }
        rep["h_study"] = study;
        w.text("h_study.csv", csv.str());
    }
    w.json_file("report.json", rep);
}

void run_extremal(const RunConfig& cfg, const Writer& w) {
    const grid::Grid g(need_domain(cfg), cfg.h);
    const grid::Field seed = varsolve::default_seed(g, need_domain(cfg));
    json rep = report_skeleton("extremal", cfg);
    if (cfg.extremal_which != "lambda1P") {
        const varsolve::ExtremalReport r = varsolve::extremal_lambda0(g, cfg.exponents, seed, cfg.solver);
        rep["results"]["lambda_0"] = {{"value", r.value},
                                      {"iterations", r.iterations},
                                      {"certificate", r.certificate}};
        w.field("minimizer_lambda0", g, r.minimizer);
    }
    if (cfg.extremal_which != "lambda0") {
        const varsolve::ExtremalReport r = varsolve::extremal_lambda1P(g, cfg.exponents, seed, cfg.solver);
        rep["results"]["lambda_1P"] = {{"value", r.value},
                                       {"iterations", r.iterations},
                                       {"certificate", r.certificate}};
        w.field("minimizer_lambda1P", g, r.minimizer);
    }
    w.json_file("report.json", rep);
}

void run_branch(const RunConfig& cfg, const Writer& w) {
    if (!cfg.lambda_grid) throw ValidationError({"lambda_grid: required by the branch subcommand"});
    const grid::Grid g(need_domain(cfg), cfg.h);
    const grid::Field seed = varsolve::default_seed(g, need_domain(cfg));

    // Continue from large lambda (robust solutions) down toward the fold.
    std::vector<double> lams = cfg.lambda_grid->values();
    std::sort(lams.begin(), lams.end(), std::greater<>());
    const varsolve::BifurcationDiagram diagram =
        varsolve::branch_continuation(g, cfg.exponents, lams, seed, cfg.solver);

    std::ostringstream csv;
    csv << "lambda,energy,pohozaev,boundary_flux,support_fraction\n";
    for (const auto& p : diagram.points)
        csv << p.lambda << "," << p.energy << "," << p.pohozaev << "," << p.boundary_flux << ","
            << p.support_fraction << "\n";
    w.text("branch.csv", csv.str());
    w.field("endpoint", g, diagram.flat_point.field);

    json rep = report_skeleton("branch", cfg);
    rep["results"] = {{"points", diagram.points.size()},
                      {"lambda_min", diagram.points.front().lambda},
                      {"lambda_max", diagram.points.back().lambda},
                      {"endpoint", ground_state_json(diagram.flat_point)}};
    w.json_file("report.json", rep);
}

void run_multiplicity(const RunConfig& cfg, const Writer& w) {
    const grid::Grid g(need_domain(cfg), cfg.h);
    const std::vector<varsolve::GroundStateResult> sols =
        varsolve::multiplicity_scan(g, cfg.exponents, need_domain(cfg), cfg.solver, cfg.seed_family);

    json rep = report_skeleton("multiplicity", cfg);
    rep["results"]["count"] = sols.size();
    json list = json::array();
    for (size_t k = 0; k < sols.size(); ++k) {
        w.field("solution_" + std::to_string(k), g, sols[k].field);
        list.push_back(ground_state_json(sols[k]));
    }
    rep["results"]["solutions"] = list;
    json dists = json::array();
    for (size_t a = 0; a < sols.size(); ++a)
        for (size_t b = a + 1; b < sols.size(); ++b) {
            grid::Field diff = sols[a].field;
            for (const std::int64_t i : g.interior_cells()) diff[i] -= sols[b].field[i];
            dists.push_back({{"i", a}, {"j", b}, {"l2_distance", grid::norm_l2(g, diff)}});
        }
    rep["results"]["pairwise_distances"] = dists;
    w.json_file("report.json", rep);
}

void run_parabolic(const RunConfig& cfg, const Writer& w) {
    if (!cfg.parabolic) throw ValidationError({"parabolic: required by the parabolic subcommand"});
    const ParabolicBlock& pb = *cfg.parabolic;
    const grid::Grid g(need_domain(cfg), cfg.h);

    grid::Field v0;
    if (pb.initial == "ground-state") {
        const grid::Field seed = varsolve::default_seed(g, need_domain(cfg));
        v0 = varsolve::minimize_ground_state(g, cfg.exponents, pb.config.lambda, seed, cfg.solver)
                 .field;
    } else {
        v0 = varsolve::default_seed(g, need_domain(cfg));
        for (const std::int64_t i : g.interior_cells()) v0[i] *= pb.bump_amplitude;
    }

    const parabolic::SupportTrack track = parabolic::evolve(g, v0, cfg.exponents, pb.config);

    std::ostringstream csv;
    csv << "t,support_measure";
    for (size_t p = 0; p < pb.config.probes.size(); ++p) csv << ",empty_ball_" << p;
    csv << "\n";
    for (size_t k = 0; k < track.times.size(); ++k) {
        csv << track.times[k] << "," << track.support_measure[k];
        for (const double r : track.empty_ball_radius[k]) csv << "," << r;
        csv << "\n";
    }
    w.text("track.csv", csv.str());
    w.field("initial", g, v0);
    w.field("final", g, track.final_state);

    json rep = report_skeleton("parabolic", cfg);
    rep["results"] = {{"records", track.times.size()},
                      {"final_support_measure", track.support_measure.back()},
                      {"initial_support_measure", track.support_measure.front()},
                      {"min_support_drift", track.min_support_drift},
                      {"clamped_mass", track.clamped_mass},
                      {"clamp_flag", track.clamp_flag}};
    w.json_file("report.json", rep);
}

} // namespace

void run(const std::string& subcommand, const RunConfig& cfg, const RunOptions& opt) {
    const Writer w(opt.out_override.empty() ? cfg.out_dir : opt.out_override);
    if (subcommand == "fibering")
        run_fibering(cfg, w);
    else if (subcommand == "radial")
        run_radial(cfg, w);
    else if (subcommand == "ground-state")
        run_ground_state(cfg, w, opt.h_study);
    else if (subcommand == "lambda-star")
        run_lambda_star(cfg, w, opt.h_study);
    else if (subcommand == "extremal")
        run_extremal(cfg, w);
    else if (subcommand == "branch")
        run_branch(cfg, w);
    else if (subcommand == "multiplicity")
        run_multiplicity(cfg, w);
    else if (subcommand == "parabolic")
        run_parabolic(cfg, w);
    else
        throw ValidationError({"subcommand: unknown \"" + subcommand + "\""});
}

} // namespace flatcore::cli
