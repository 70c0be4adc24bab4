#include "flatcore/varsolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace flatcore::varsolve {

using grid::Field;
using grid::Grid;
using scalar::Exponents;
using scalar::IntegralTriple;

double energy_of(const IntegralTriple& tr, const Exponents& exp, double lambda) {
    return scalar::energy(tr, exp, lambda, 1.0);
}

double pohozaev_of(const IntegralTriple& tr, const Exponents& exp, double lambda) {
    // Inverse-critical-exponent form: the gradient coefficient
    // (N-2)/(2N) vanishes in dim 2, where the scalar-layer pohozaev
    // (which divides by 2*) is undefined but the functional itself is
    // finite; the parabolic runs build dim-2 ground states.
    const double inv_two_star = (exp.dim - 2.0) / (2.0 * exp.dim);
    return inv_two_star * tr.grad2 + tr.pow_alpha / (exp.alpha + 1.0) -
           lambda * tr.pow_beta / (exp.beta + 1.0);
}

double energy_second_of(const IntegralTriple& tr, const Exponents& exp, double lambda) {
    return scalar::energy_second(tr, exp, lambda, 1.0);
}

namespace {

void scale_field(const Grid& g, Field& u, double t) {
    for (const std::int64_t i : g.interior_cells()) u[i] *= t;
}

void abs_field(const Grid& g, Field& u) {
    for (const std::int64_t i : g.interior_cells()) u[i] = std::abs(u[i]);
}

/// L2 representative of grad E_lambda (the pde residual field).
Field energy_gradient(const Grid& g, const Field& u, const Exponents& exp, double lambda) {
    Field r = grid::apply_laplacian(g, u);
    for (const std::int64_t i : g.interior_cells())
        r[i] += grid::signed_power(u[i], exp.alpha) - lambda * grid::signed_power(u[i], exp.beta);
    return r;
}

/// Smallest-bracket solve of the one-cell equation
///   c0 v - rhs + v^a - lambda v^b = 0,  v >= 0,
/// by geometric bisection: near a free boundary the root scales like
/// rhs^{1/a}, which for small a is far below any additive step size.
double cell_equation_root(double c0, double rhs, const Exponents& exp, double lambda,
                          double v_hint) {
    if (rhs <= 0.0) return 0.0;
    const auto f = [&](double v) {
        return c0 * v + std::pow(v, exp.alpha) - lambda * std::pow(v, exp.beta) - rhs;
    };
    double hi = std::max({v_hint, rhs / c0, 1e-12});
    int guard = 0;
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (++guard > 200) return hi;
    }
    double lo = 1e-300;
    if (f(lo) >= 0.0) return 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

/// Pointwise nonlinear Gauss-Seidel restricted to contact-layer cells
/// (u below threshold).  Additive descent cannot place those values --
/// the cell equilibria scale like rhs^{1/a} -- while exact local solves
/// settle them in a few sweeps.  Smooth modes stay with the descent.
void contact_layer_polish(const Grid& g, Field& u, const Exponents& exp, double lambda,
                          double threshold, int max_sweeps) {
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const double c0 = 2.0 * g.dim() * inv_h2;
    const auto& stride = g.stride();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double moved = 0.0;
        for (const std::int64_t i : g.interior_cells()) {
            if (u[i] > threshold) continue;
            double nb = 0.0;
            for (int d = 0; d < g.dim(); ++d) nb += u[i - stride[d]] + u[i + stride[d]];
            const double rhs = nb * inv_h2;
            const double v = cell_equation_root(c0, rhs, exp, lambda, u[i]);
            moved = std::max(moved, std::abs(v - u[i]));
            u[i] = v;
        }
        if (moved <= 1e-16 * threshold) break;
    }
}

} // namespace

Field nehari_project(const Grid& g, const Field& u, const Exponents& exp, double lambda) {
    const IntegralTriple tr = grid::integral_triple(g, u, exp);
    const scalar::FiberingRoots roots = scalar::fibering_roots(tr, exp, lambda);
    if (roots.kind == scalar::RootKind::NoRoot)
        throw NoRoot("nehari_project: lambda below the fiber minimum along this ray");
    Field out = u;
    scale_field(g, out, *roots.t_min);
    return out;
}

GroundStateResult minimize_ground_state(const Grid& g, const Exponents& exp, double lambda,
                                        const Field& seed, const SolveParams& params) {
    Field u = seed;
    abs_field(g, u);
    u = nehari_project(g, u, exp, lambda); // may throw NoRoot

    IntegralTriple tr = grid::integral_triple(g, u, exp);
    double energy = energy_of(tr, exp, lambda);

    double step = 1.0;
    int it = 0;
    bool converged = false;
    double res_norm = 0.0;

    const auto run_descent = [&] {
        for (; it < params.max_outer; ++it) {
            const Field grad = energy_gradient(g, u, exp, lambda);
            res_norm = grid::norm_l2(g, grad);
            const double scale = std::max(1.0, std::sqrt(tr.grad2));
            if (res_norm <= params.tol_res * scale) {
                converged = true;
                return;
            }

            Field dir = grid::linear_solve_approx(g, 1.0, grad, params.precond_iters);

            // Freeze contact-layer cells out of the additive step: their
            // equilibria (~rhs^{1/a}) sit far below any step size, so a
            // nonzero update only re-breaks what the polish settled.
            double umax = 0.0;
            for (const std::int64_t i : g.interior_cells()) umax = std::max(umax, u[i]);
            const double contact_th = umax * g.h() * g.h();
            for (const std::int64_t i : g.interior_cells())
                if (u[i] <= contact_th) dir[i] = 0.0;

            bool accepted = false;
            while (step > 1e-14) {
                Field w = u;
                for (const std::int64_t i : g.interior_cells())
                    w[i] = std::abs(u[i] - step * dir[i]);
                double norm_w = 0.0;
                for (const std::int64_t i : g.interior_cells()) norm_w += std::abs(w[i]);
                if (norm_w == 0.0) {
                    step *= 0.5;
                    continue;
                }
                try {
                    w = nehari_project(g, w, exp, lambda);
                } catch (const NoRoot&) {
                    step *= 0.5;
                    continue;
                }
                const IntegralTriple tw = grid::integral_triple(g, w, exp);
                const double ew = energy_of(tw, exp, lambda);
                if (ew < energy + 1e-13 * std::abs(energy)) {
                    u = std::move(w);
                    contact_layer_polish(g, u, exp, lambda, contact_th, 2);
                    tr = grid::integral_triple(g, u, exp);
                    energy = energy_of(tr, exp, lambda);
                    accepted = true;
                    step = std::min(step * 1.5, 16.0);
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) return; // step collapsed; let the caller decide
        }
    };

    run_descent();
    // A collapsed line search usually means the contact layer of a free
    // boundary is pinning the gradient: those cell equilibria scale like
    // rhs^{1/a} and no additive step can reach them.  Settle the layer
    // by exact pointwise solves, then resume the descent.
    for (int round = 0; round < 4 && !converged && it < params.max_outer; ++round) {
        double umax = 0.0;
        for (const std::int64_t i : g.interior_cells()) umax = std::max(umax, u[i]);
        if (umax == 0.0) break;
        contact_layer_polish(g, u, exp, lambda, umax * g.h() * g.h(), 30);
        tr = grid::integral_triple(g, u, exp);
        energy = energy_of(tr, exp, lambda);
        step = 1.0;
        run_descent();
    }

    GroundStateResult out;
    out.field = std::move(u);
    out.lambda = lambda;
    out.energy = energy;
    out.pohozaev = pohozaev_of(tr, exp, lambda);
    out.energy_second = energy_second_of(tr, exp, lambda);
    out.residual = grid::pde_residual(g, out.field, exp, lambda);
    out.boundary_flux = grid::boundary_flux_integral(g, out.field, g.spec());
    out.support_fraction = support_fraction(g, out.field);
    out.iterations = it;
    out.converged = converged || out.residual <= params.tol_res * std::max(1.0, std::sqrt(tr.grad2));
    out.classification = out.converged ? classify_solution(out, g.h(), params.c_cls)
                                       : Classification::Indeterminate;
    return out;
}

Classification classify_solution(const GroundStateResult& r, double h, double c_cls) {
    const double scale_e = std::max(1.0, std::abs(r.energy));
    const double th_p = c_cls * h * scale_e;
    const double th_f = c_cls * h;
    if (std::abs(r.pohozaev) <= th_p && r.boundary_flux <= th_f)
        return Classification::FlatOrCompact;
    if (r.pohozaev < -th_p && r.boundary_flux > th_f) return Classification::Usual;
    return Classification::Indeterminate;
}

namespace {

// Scale-invariant quotient evaluated directly at its critical scaling.
enum class Quotient { Lambda0, Lambda1P };

double quotient_value(const IntegralTriple& tr, const Exponents& exp, Quotient which) {
    const scalar::RayleighReport rep = scalar::rayleigh_report(tr, exp);
    return which == Quotient::Lambda0 ? rep.lambda_0 : rep.lambda_1P;
}

ExtremalReport minimize_quotient(const Grid& g, const Exponents& exp, const Field& seed,
                                 const SolveParams& params, Quotient which) {
    Field u = seed;
    abs_field(g, u);
    IntegralTriple tr = grid::integral_triple(g, u, exp);
    // Normalize A = 1; harmless by zero-homogeneity.
    scale_field(g, u, 1.0 / std::sqrt(tr.grad2));
    tr = grid::integral_triple(g, u, exp);
    double value = quotient_value(tr, exp, which);

    double step = 0.5;
    int it = 0;
    int stall = 0;
    for (; it < params.max_outer; ++it) {
        // Finite-difference derivative of the quotient in the triple,
        // chained with the L2 gradients of (A, B, C).
        const double eps = 1e-6;
        auto fd = [&](double IntegralTriple::*member) {
            IntegralTriple lo = tr, hi = tr;
            hi.*member *= 1.0 + eps;
            lo.*member *= 1.0 - eps;
            return (quotient_value(hi, exp, which) - quotient_value(lo, exp, which)) /
                   (2.0 * eps * (tr.*member));
        };
        const double dA = fd(&IntegralTriple::grad2);
        const double dB = fd(&IntegralTriple::pow_alpha);
        const double dC = fd(&IntegralTriple::pow_beta);

        Field dir = grid::apply_laplacian(g, u);
        for (const std::int64_t i : g.interior_cells()) {
            dir[i] = dA * 2.0 * dir[i] +
                     dB * (exp.alpha + 1.0) * grid::signed_power(u[i], exp.alpha) +
                     dC * (exp.beta + 1.0) * grid::signed_power(u[i], exp.beta);
        }
        dir = grid::linear_solve_approx(g, 1.0, dir, params.precond_iters);

        bool accepted = false;
        while (step > 1e-13) {
            Field w = u;
            for (const std::int64_t i : g.interior_cells())
                w[i] = std::abs(u[i] - step * dir[i]);
            double any = 0.0;
            for (const std::int64_t i : g.interior_cells()) any += std::abs(w[i]);
            if (any == 0.0) {
                step *= 0.5;
                continue;
            }
            IntegralTriple tw = grid::integral_triple(g, w, exp);
            const double vw = quotient_value(tw, exp, which);
            if (vw < value) {
                scale_field(g, w, 1.0 / std::sqrt(tw.grad2));
                u = std::move(w);
                tr = grid::integral_triple(g, u, exp);
                stall = (value - vw < 1e-11 * std::abs(value)) ? stall + 1 : 0;
                value = vw;
                accepted = true;
                step = std::min(step * 1.5, 8.0);
                break;
            }
            step *= 0.5;
        }
        if (!accepted || stall > 4) break;
    }

    ExtremalReport rep;
    rep.value = value;
    rep.minimizer = std::move(u);
    rep.iterations = it;

    // Certificate: the reported value is a lower bound at random probes.
    std::mt19937_64 rng(0xFACADEull);
    std::uniform_real_distribution<double> unif(0.2, 0.9);
    rep.certificate = true;
    const auto balls = grid::inscribed_balls(g.spec(), g);
    const double R = balls.front().radius;
    for (int k = 0; k < 8; ++k) {
        grid::Point c = balls.front().center;
        for (int d = 0; d < g.dim(); ++d)
            c[d] += (unif(rng) - 0.55) * 0.5 * R;
        Field probe = bump_seed(g, c, unif(rng) * R, 1.0);
        double any = 0.0;
        for (const std::int64_t i : g.interior_cells()) any += std::abs(probe[i]);
        if (any == 0.0) continue;
        const IntegralTriple tp = grid::integral_triple(g, probe, exp);
        if (quotient_value(tp, exp, which) < rep.value - 1e-9 * rep.value)
            rep.certificate = false;
    }
    return rep;
}

} // namespace

ExtremalReport extremal_lambda0(const Grid& g, const Exponents& exp, const Field& seed,
                                const SolveParams& params) {
    return minimize_quotient(g, exp, seed, params, Quotient::Lambda0);
}

ExtremalReport extremal_lambda1P(const Grid& g, const Exponents& exp, const Field& seed,
                                 const SolveParams& params) {
    return minimize_quotient(g, exp, seed, params, Quotient::Lambda1P);
}

LambdaStarResult lambda_star(const Grid& g, const Exponents& exp, const grid::DomainSpec& spec,
                             const SolveParams& params) {
    LambdaStarResult out;
    out.es_warning = scalar::es_margin(exp) >= 0.0;

    const Field seed = default_seed(g, spec);
    // Bracket pivots: the extremal values for dim >= 3; in dim 2 the
    // Pohozaev quotient degenerates (2* = infinity), so pivot on the
    // radial lambda* of the largest inscribed ball instead.
    double pivot_lo, pivot_hi;
    if (exp.dim >= 3) {
        const ExtremalReport rep_1p = extremal_lambda1P(g, exp, seed, params);
        const ExtremalReport rep_0 = extremal_lambda0(g, exp, seed, params);
        pivot_lo = std::min(rep_0.value, rep_1p.value);
        pivot_hi = std::max(rep_0.value, rep_1p.value);
    } else {
        const auto balls = grid::inscribed_balls(spec, g);
        pivot_lo = pivot_hi = radial::lambda_star_radial(exp, balls.front().radius);
    }

    Field warm = seed;
    // Near the fold the ground state is small and its Pohozaev value tiny,
    // so the membership threshold must stay well below the classification
    // scale c_cls*h or lambda* is biased upward far beyond the
    // discretization error.
    auto in_z = [&](double lambda) {
        const double th = params.c_fold * g.h();
        try {
            GroundStateResult r = minimize_ground_state(g, exp, lambda, warm, params);
            if (r.converged && r.pohozaev < -th) {
                warm = r.field;
                return true;
            }
        } catch (const NoRoot&) {
            return false;
        }
        // A stalled line search from a warm start is not evidence of
        // nonexistence; retry once from the cold seed.
        try {
            GroundStateResult r = minimize_ground_state(g, exp, lambda, seed, params);
            if (r.converged && r.pohozaev < -th) {
                warm = r.field;
                return true;
            }
        } catch (const NoRoot&) {
        }
        return false;
    };

    // lambda* sits near both extremal values (for a ball, the flat state
    // makes lambda_1P(u*) = lambda* exactly), so the bracket is grown
    // outward from them rather than assumed.
    double hi = pivot_hi * 1.05;
    int guard = 0;
    while (!in_z(hi)) {
        hi *= 1.4;
        if (++guard > 12) throw BracketFailure("lambda_star: no solvable lambda found");
    }
    double lo = pivot_lo * 0.9;
    guard = 0;
    while (in_z(lo)) {
        hi = lo;
        lo *= 0.7;
        if (++guard > 12) throw BracketFailure("lambda_star: predicate never fails");
    }

    while (hi - lo > params.bisect_rel * hi) {
        const double mid = 0.5 * (lo + hi);
        if (in_z(mid))
            hi = mid;
        else
            lo = mid;
    }
    out.lambda_star = 0.5 * (lo + hi);

    // Exactly at lambda* the discrete problem is marginal; re-solve at a
    // small offset for the flat endpoint.
    out.flat_point =
        minimize_ground_state(g, exp, out.lambda_star * (1.0 + 1e-3), warm, params);

    if (spec.kind == grid::DomainKind::Ball) {
        out.lambda_star_radial = radial::lambda_star_radial(exp, spec.balls.front().radius);
        out.radial_gap = std::abs(out.lambda_star - out.lambda_star_radial) / out.lambda_star;
    }
    return out;
}

BifurcationDiagram branch_continuation(const Grid& g, const Exponents& exp,
                                       const std::vector<double>& lambda_grid,
                                       const Field& seed, const SolveParams& params) {
    BifurcationDiagram diagram;
    Field warm = seed;
    GroundStateResult last;
    for (const double lambda : lambda_grid) {
        GroundStateResult r = minimize_ground_state(g, exp, lambda, warm, params);
        warm = r.field;
        diagram.points.push_back(
            {lambda, r.energy, r.pohozaev, r.boundary_flux, r.support_fraction});
        last = std::move(r);
    }
    std::reverse(diagram.points.begin(), diagram.points.end()); // sorted by lambda
    diagram.lambda_star = lambda_grid.empty() ? 0.0 : lambda_grid.back();
    diagram.flat_point = std::move(last);
    return diagram;
}

std::vector<GroundStateResult> multiplicity_scan(const Grid& g, const Exponents& exp,
                                                 const grid::DomainSpec& spec,
                                                 const SolveParams& params, int seed_family) {
    const auto balls = grid::inscribed_balls(spec, g);
    const double R = balls.front().radius;
    // Reference lambda* from the radial problem at the exact inscribed
    // radius: the grid bisection estimate carries an O(h) band, which is
    // wider than the offset needed to keep the inscribed-ball states both
    // existent (lambda > lambda*) and localized (for larger offsets a
    // lower-energy state spanning the whole domain appears and the
    // localized basins leak into it through translation slack).
    const double lam_star = radial::lambda_star_radial(exp, R);
    const double lambda = lam_star * (1.0 + 1e-3);

    // Seed each inscribed ball with the scaled compact radial profile
    // that solves the PDE at this lambda; a generic bump has no Nehari
    // root this close to lambda*.
    const radial::RadialProfile flat = radial::find_flat(exp);
    const double support =
        R * std::pow(lam_star / lambda, (1.0 - exp.alpha) / (2.0 * (exp.beta - exp.alpha)));
    const radial::RadialProfile prof =
        radial::rescale(flat, support / flat.support_radius, exp);

    std::vector<Field> seeds;
    for (const auto& b : balls) seeds.push_back(radial::embed(prof, g, b.center));

    std::mt19937_64 rng(0xBEEFull);
    std::uniform_int_distribution<size_t> pick(0, g.interior_cells().size() - 1);
    while (static_cast<int>(seeds.size()) < seed_family) {
        const grid::Point c = g.cell_center(g.interior_cells()[pick(rng)]);
        seeds.push_back(bump_seed(g, c, 0.7 * R, 1.0));
    }

    std::vector<GroundStateResult> distinct;
    for (const Field& s : seeds) {
        double any = 0.0;
        for (const std::int64_t i : g.interior_cells()) any += std::abs(s[i]);
        if (any == 0.0) continue;
        GroundStateResult r;
        try {
            r = minimize_ground_state(g, exp, lambda, s, params);
        } catch (const NoRoot&) {
            continue;
        }
        if (!r.converged) continue;
        bool duplicate = false;
        for (const auto& d : distinct) {
            Field diff = r.field;
            for (const std::int64_t i : g.interior_cells()) diff[i] -= d.field[i];
            const double dist = grid::norm_l2(g, diff);
            if (dist <= 10.0 * g.h() * grid::norm_l2(g, r.field)) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) distinct.push_back(std::move(r));
    }
    return distinct;
}

double pohozaev_check(const Grid& g, const Field& u, const Exponents& exp, double lambda,
                      const grid::DomainSpec& spec) {
    const IntegralTriple tr = grid::integral_triple(g, u, exp);
    const double flux = grid::boundary_flux_integral(g, u, spec);
    return std::abs(pohozaev_of(tr, exp, lambda) + flux / (2.0 * exp.dim));
}

Field bump_seed(const Grid& g, const grid::Point& center, double radius, double amplitude) {
    Field out(g);
    for (const std::int64_t i : g.interior_cells()) {
        const grid::Point x = g.cell_center(i);
        double rho2 = 0.0;
        for (int d = 0; d < g.dim(); ++d) rho2 += (x[d] - center[d]) * (x[d] - center[d]);
        const double rho = std::sqrt(rho2);
        if (rho < radius) {
            const double c = std::cos(0.5 * M_PI * rho / radius);
            out[i] = amplitude * c * c;
        }
    }
    return out;
}

Field default_seed(const Grid& g, const grid::DomainSpec& spec) {
    const auto balls = grid::inscribed_balls(spec, g);
    return bump_seed(g, balls.front().center, balls.front().radius, 1.0);
}

double support_fraction(const Grid& g, const Field& u) {
    double umax = 0.0;
    for (const std::int64_t i : g.interior_cells()) umax = std::max(umax, std::abs(u[i]));
    if (umax == 0.0) return 0.0;
    const double th = 1e-10 * umax;
    std::int64_t cnt = 0;
    for (const std::int64_t i : g.interior_cells())
        if (std::abs(u[i]) > th) ++cnt;
    return static_cast<double>(cnt) / static_cast<double>(g.interior_count());
}

} // namespace flatcore::varsolve
