#include "flatcore/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace flatcore::cli {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "; " : "") << v[i];
    return os.str();
}

struct Validator {
    std::vector<std::string> errs;

    void fail(const std::string& path, const std::string& what) { errs.push_back(path + ": " + what); }

    bool object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        fail(path, "expected an object");
        return false;
    }

    void known_keys(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* k : allowed)
                if (it.key() == k) ok = true;
            if (!ok) fail(path + "." + it.key(), "unknown key");
        }
    }

    bool num(const json& j, const char* key, const std::string& path, double& out,
             bool required = true) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing required number");
            return false;
        }
        const json& v = j.at(key);
        if (!v.is_number()) {
            fail(path + "." + key, "expected a number");
            return false;
        }
        out = v.get<double>();
        return true;
    }

    bool integer(const json& j, const char* key, const std::string& path, int& out,
                 bool required = true) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing required integer");
            return false;
        }
        const json& v = j.at(key);
        if (!v.is_number_integer()) {
            fail(path + "." + key, "expected an integer");
            return false;
        }
        out = v.get<int>();
        return true;
    }

    bool text(const json& j, const char* key, const std::string& path, std::string& out,
              bool required = false) {
        if (!j.contains(key)) {
            if (required) fail(path + "." + key, "missing required string");
            return false;
        }
        const json& v = j.at(key);
        if (!v.is_string()) {
            fail(path + "." + key, "expected a string");
            return false;
        }
        out = v.get<std::string>();
        return true;
    }

    bool point(const json& v, const std::string& path, int dim, grid::Point& out) {
        if (!v.is_array() || static_cast<int>(v.size()) != dim) {
            fail(path, "expected an array of " + std::to_string(dim) + " numbers");
            return false;
        }
        out = grid::Point{};
        for (int d = 0; d < dim; ++d) {
            if (!v[static_cast<size_t>(d)].is_number()) {
                fail(path, "expected an array of numbers");
                return false;
            }
            out[static_cast<size_t>(d)] = v[static_cast<size_t>(d)].get<double>();
        }
        return true;
    }
};

void parse_exponents(Validator& v, const json& j, RunConfig& cfg) {
    if (!j.contains("exponents")) {
        v.fail("exponents", "missing required object");
        return;
    }
    const json& e = j.at("exponents");
    if (!v.object(e, "exponents")) return;
    v.known_keys(e, "exponents", {"alpha", "beta", "dim"});
    double alpha = 0, beta = 0;
    int dim = 0;
    bool ok = v.num(e, "alpha", "exponents", alpha);
    ok &= v.num(e, "beta", "exponents", beta);
    ok &= v.integer(e, "dim", "exponents", dim);
    if (!ok) return;
    bool good = true;
    if (!(alpha > 0.0 && alpha < 1.0)) v.fail("exponents.alpha", "must lie in (0, 1)"), good = false;
    if (!(beta > 0.0 && beta < 1.0)) v.fail("exponents.beta", "must lie in (0, 1)"), good = false;
    if (!(alpha < beta)) v.fail("exponents.alpha, exponents.beta", "alpha must be < beta"), good = false;
    if (dim < 1) v.fail("exponents.dim", "must be >= 1"), good = false;
    if (good) cfg.exponents = scalar::Exponents(alpha, beta, dim);
}

void parse_domain(Validator& v, const json& j, RunConfig& cfg) {
    if (!j.contains("domain")) return;
    const json& d = j.at("domain");
    if (!v.object(d, "domain")) return;
    v.known_keys(d, "domain", {"kind", "center", "radius", "balls", "semi_axes", "star_center"});
    std::string kind;
    if (!v.text(d, "kind", "domain", kind, true)) return;
    const int dim = cfg.exponents.dim;
    if (dim > grid::kMaxDim) {
        v.fail("domain", "grids support dim <= " + std::to_string(grid::kMaxDim));
        return;
    }
    try {
        if (kind == "ball") {
            grid::Point c{};
            double r = 0.0;
            if (d.contains("center") && !v.point(d.at("center"), "domain.center", dim, c)) return;
            if (!v.num(d, "radius", "domain", r)) return;
            if (r <= 0.0) {
                v.fail("domain.radius", "must be > 0");
                return;
            }
            cfg.domain = grid::DomainSpec::ball(dim, c, r);
        } else if (kind == "union_of_balls") {
            if (!d.contains("balls") || !d.at("balls").is_array() || d.at("balls").empty()) {
                v.fail("domain.balls", "expected a non-empty array");
                return;
            }
            std::vector<grid::BallSpec> balls;
            size_t k = 0;
            for (const json& b : d.at("balls")) {
                const std::string path = "domain.balls[" + std::to_string(k++) + "]";
                if (!v.object(b, path)) return;
                v.known_keys(b, path, {"center", "radius"});
                grid::BallSpec bs;
                if (!b.contains("center") || !v.point(b.at("center"), path + ".center", dim, bs.center)) return;
                if (!v.num(b, "radius", path, bs.radius)) return;
                if (bs.radius <= 0.0) {
                    v.fail(path + ".radius", "must be > 0");
                    return;
                }
                balls.push_back(bs);
            }
            grid::Point star{};
            if (!d.contains("star_center")) {
                v.fail("domain.star_center", "required for union_of_balls");
                return;
            }
            if (!v.point(d.at("star_center"), "domain.star_center", dim, star)) return;
            cfg.domain = grid::DomainSpec::union_of_balls(dim, std::move(balls), star);
        } else if (kind == "ellipsoid") {
            grid::Point c{}, ax{};
            if (d.contains("center") && !v.point(d.at("center"), "domain.center", dim, c)) return;
            if (!d.contains("semi_axes") ||
                !v.point(d.at("semi_axes"), "domain.semi_axes", dim, ax))
                return;
            for (int k2 = 0; k2 < dim; ++k2)
                if (ax[static_cast<size_t>(k2)] <= 0.0) {
                    v.fail("domain.semi_axes", "entries must be > 0");
                    return;
                }
            cfg.domain = grid::DomainSpec::ellipsoid(dim, c, ax);
        } else {
            v.fail("domain.kind", "expected \"ball\", \"union_of_balls\" or \"ellipsoid\"");
        }
    } catch (const Error& e) {
        v.fail("domain", e.what());
    }
}

void parse_solver(Validator& v, const json& j, RunConfig& cfg) {
    if (!j.contains("solver")) return;
    const json& s = j.at("solver");
    if (!v.object(s, "solver")) return;
    v.known_keys(s, "solver", {"tol_res", "max_outer", "precond_iters", "c_cls", "bisect_rel"});
    v.num(s, "tol_res", "solver", cfg.solver.tol_res, false);
    v.integer(s, "max_outer", "solver", cfg.solver.max_outer, false);
    v.integer(s, "precond_iters", "solver", cfg.solver.precond_iters, false);
    v.num(s, "c_cls", "solver", cfg.solver.c_cls, false);
    v.num(s, "bisect_rel", "solver", cfg.solver.bisect_rel, false);
    if (cfg.solver.tol_res <= 0.0) v.fail("solver.tol_res", "must be > 0");
    if (cfg.solver.max_outer < 1) v.fail("solver.max_outer", "must be >= 1");
    if (cfg.solver.bisect_rel <= 0.0) v.fail("solver.bisect_rel", "must be > 0");
}

void parse_blocks(Validator& v, const json& j, RunConfig& cfg) {
    if (j.contains("triple")) {
        const json& t = j.at("triple");
        if (v.object(t, "triple")) {
            v.known_keys(t, "triple", {"grad2", "pow_alpha", "pow_beta"});
            double a = 0, b = 0, c = 0;
            bool ok = v.num(t, "grad2", "triple", a);
            ok &= v.num(t, "pow_alpha", "triple", b);
            ok &= v.num(t, "pow_beta", "triple", c);
            if (ok) {
                if (a <= 0 || b <= 0 || c <= 0)
                    v.fail("triple", "all entries must be > 0");
                else
                    cfg.triple = scalar::IntegralTriple{a, b, c};
            }
        }
    }
    if (j.contains("lambda")) {
        double l = 0;
        if (v.num(j, "lambda", "", l)) {
            if (l <= 0.0)
                v.fail("lambda", "must be > 0");
            else
                cfg.lambda = l;
        }
    }
    if (j.contains("lambda_grid")) {
        const json& g = j.at("lambda_grid");
        if (v.object(g, "lambda_grid")) {
            v.known_keys(g, "lambda_grid", {"min", "max", "count"});
            LambdaGrid lg;
            bool ok = v.num(g, "min", "lambda_grid", lg.min);
            ok &= v.num(g, "max", "lambda_grid", lg.max);
            ok &= v.integer(g, "count", "lambda_grid", lg.count);
            if (ok) {
                if (!(lg.min > 0.0 && lg.max > lg.min))
                    v.fail("lambda_grid", "requires 0 < min < max");
                else if (lg.count < 2)
                    v.fail("lambda_grid.count", "must be >= 2");
                else
                    cfg.lambda_grid = lg;
            }
        }
    }
    if (j.contains("radial")) {
        const json& r = j.at("radial");
        if (v.object(r, "radial")) {
            v.known_keys(r, "radial", {"lambda", "target_radius"});
            RadialConfig rc;
            v.num(r, "lambda", "radial", rc.lambda, false);
            v.num(r, "target_radius", "radial", rc.target_radius, false);
            if (rc.lambda <= 0.0) v.fail("radial.lambda", "must be > 0");
            if (rc.target_radius < 0.0) v.fail("radial.target_radius", "must be >= 0");
            cfg.radial = rc;
        }
    }
    if (j.contains("parabolic")) {
        const json& p = j.at("parabolic");
        if (v.object(p, "parabolic")) {
            v.known_keys(p, "parabolic",
                         {"lambda", "dt", "t_end", "record_every", "supp_delta", "theta",
                          "probes", "initial", "bump_amplitude"});
            ParabolicBlock pb;
            v.num(p, "lambda", "parabolic", pb.config.lambda, false);
            v.num(p, "dt", "parabolic", pb.config.dt, false);
            v.num(p, "t_end", "parabolic", pb.config.t_end, false);
            v.integer(p, "record_every", "parabolic", pb.config.record_every, false);
            v.num(p, "supp_delta", "parabolic", pb.config.supp_delta, false);
            v.num(p, "theta", "parabolic", pb.config.theta, false);
            v.num(p, "bump_amplitude", "parabolic", pb.bump_amplitude, false);
            v.text(p, "initial", "parabolic", pb.initial, false);
            if (pb.config.lambda <= 0.0) v.fail("parabolic.lambda", "must be > 0");
            if (pb.config.t_end <= 0.0) v.fail("parabolic.t_end", "must be > 0");
            if (pb.config.dt < 0.0) v.fail("parabolic.dt", "must be >= 0");
            if (pb.initial != "bump" && pb.initial != "ground-state")
                v.fail("parabolic.initial", "expected \"bump\" or \"ground-state\"");
            if (p.contains("probes")) {
                const json& probes = p.at("probes");
                if (!probes.is_array()) {
                    v.fail("parabolic.probes", "expected an array of points");
                } else {
                    size_t k = 0;
                    for (const json& q : probes) {
                        grid::Point pt{};
                        if (v.point(q, "parabolic.probes[" + std::to_string(k++) + "]",
                                    cfg.exponents.dim, pt))
                            pb.config.probes.push_back(pt);
                    }
                }
            }
            cfg.parabolic = pb;
        }
    }
    if (j.contains("extremal")) {
        std::string which;
        if (v.text(j, "extremal", "", which, false)) {
            if (which != "lambda0" && which != "lambda1P" && which != "both")
                v.fail("extremal", "expected \"lambda0\", \"lambda1P\" or \"both\"");
            else
                cfg.extremal_which = which;
        }
    }
    if (j.contains("seed_family")) {
        v.integer(j, "seed_family", "", cfg.seed_family, false);
        if (cfg.seed_family < 1) v.fail("seed_family", "must be >= 1");
    }
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> v)
    : Error("invalid configuration: " + join(v)), violations(std::move(v)) {}

std::vector<double> LambdaGrid::values() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k)
        out.push_back(min + (max - min) * static_cast<double>(k) / (count - 1));
    return out;
}

RunConfig parse_config_json(const json& j) {
    Validator v;
    RunConfig cfg;
    cfg.echo = j;
    if (!v.object(j, "$")) throw ValidationError(std::move(v.errs));
    v.known_keys(j, "$",
                 {"exponents", "domain", "h", "solver", "out_dir", "triple", "lambda",
                  "lambda_grid", "radial", "parabolic", "extremal", "seed_family"});
    parse_exponents(v, j, cfg);
    if (j.contains("h")) {
        v.num(j, "h", "", cfg.h, false);
        if (!(cfg.h > 0.0)) v.fail("h", "must be > 0");
    }
    v.text(j, "out_dir", "", cfg.out_dir, false);
    parse_domain(v, j, cfg);
    parse_solver(v, j, cfg);
    parse_blocks(v, j, cfg);
    if (!v.errs.empty()) throw ValidationError(std::move(v.errs));
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config_json(j);
}

} // namespace flatcore::cli
