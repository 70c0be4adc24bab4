#include "flatcore/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace flatcore::radial {

namespace {

// The integration and the height bisection run in extended precision:
// near the double zero the achievable defect scales like the square root
// of the bracket width, so 64-bit mantissas are needed for a 1e-8 defect.
using real = long double;

struct State {
    real u;
    real w; // u'
};

real spow(real u, real p) {
    if (u <= 0.0L) return 0.0L;
    return std::pow(u, p);
}

struct Rhs {
    real alpha, beta, lambda, u_floor;
    int dim;

    real reaction(real u) const {
        if (std::abs(u) < u_floor) return 0.0L;
        return spow(u, alpha) - lambda * spow(u, beta);
    }

    State operator()(real r, const State& y) const {
        return {y.w, reaction(y.u) - (dim - 1) / r * y.w};
    }
};

struct LongTrajectory {
    std::vector<real> r;
    std::vector<real> u;
    std::vector<real> du;
};

State axpy(const State& y, real h, const State& d) {
    return {y.u + h * d.u, y.w + h * d.w};
}

// Dormand-Prince 5(4) single step; returns the 5th-order solution and an
// embedded error estimate.
State dopri5_step(const Rhs& f, real r, const State& y, real h, real& err) {
    const State k1 = f(r, y);
    const State k2 = f(r + h / 5.0L, axpy(y, h / 5.0L, k1));
    const State k3 = f(r + 3.0L * h / 10.0L,
                       {y.u + h * (3.0L / 40.0L * k1.u + 9.0L / 40.0L * k2.u),
                        y.w + h * (3.0L / 40.0L * k1.w + 9.0L / 40.0L * k2.w)});
    const State k4 =
        f(r + 4.0L * h / 5.0L,
          {y.u + h * (44.0L / 45.0L * k1.u - 56.0L / 15.0L * k2.u + 32.0L / 9.0L * k3.u),
           y.w + h * (44.0L / 45.0L * k1.w - 56.0L / 15.0L * k2.w + 32.0L / 9.0L * k3.w)});
    const State k5 =
        f(r + 8.0L * h / 9.0L,
          {y.u + h * (19372.0L / 6561.0L * k1.u - 25360.0L / 2187.0L * k2.u +
                      64448.0L / 6561.0L * k3.u - 212.0L / 729.0L * k4.u),
           y.w + h * (19372.0L / 6561.0L * k1.w - 25360.0L / 2187.0L * k2.w +
                      64448.0L / 6561.0L * k3.w - 212.0L / 729.0L * k4.w)});
    const State k6 =
        f(r + h,
          {y.u + h * (9017.0L / 3168.0L * k1.u - 355.0L / 33.0L * k2.u +
                      46732.0L / 5247.0L * k3.u + 49.0L / 176.0L * k4.u -
                      5103.0L / 18656.0L * k5.u),
           y.w + h * (9017.0L / 3168.0L * k1.w - 355.0L / 33.0L * k2.w +
                      46732.0L / 5247.0L * k3.w + 49.0L / 176.0L * k4.w -
                      5103.0L / 18656.0L * k5.w)});
    const State y5 = {
        y.u + h * (35.0L / 384.0L * k1.u + 500.0L / 1113.0L * k3.u + 125.0L / 192.0L * k4.u -
                   2187.0L / 6784.0L * k5.u + 11.0L / 84.0L * k6.u),
        y.w + h * (35.0L / 384.0L * k1.w + 500.0L / 1113.0L * k3.w + 125.0L / 192.0L * k4.w -
                   2187.0L / 6784.0L * k5.w + 11.0L / 84.0L * k6.w)};
    const State k7 = f(r + h, y5);
    const real e_u = h * (71.0L / 57600.0L * k1.u - 71.0L / 16695.0L * k3.u +
                          71.0L / 1920.0L * k4.u - 17253.0L / 339200.0L * k5.u +
                          22.0L / 525.0L * k6.u - 1.0L / 40.0L * k7.u);
    const real e_w = h * (71.0L / 57600.0L * k1.w - 71.0L / 16695.0L * k3.w +
                          71.0L / 1920.0L * k4.w - 17253.0L / 339200.0L * k5.w +
                          22.0L / 525.0L * k6.w - 1.0L / 40.0L * k7.w);
    err = std::sqrt(e_u * e_u + e_w * e_w);
    return y5;
}

State rk4_step(const Rhs& f, real r, const State& y, real h) {
    const State k1 = f(r, y);
    const State k2 = f(r + h / 2.0L, axpy(y, h / 2.0L, k1));
    const State k3 = f(r + h / 2.0L, axpy(y, h / 2.0L, k2));
    const State k4 = f(r + h, axpy(y, h, k3));
    return {y.u + h / 6.0L * (k1.u + 2.0L * k2.u + 2.0L * k3.u + k4.u),
            y.w + h / 6.0L * (k1.w + 2.0L * k2.w + 2.0L * k3.w + k4.w)};
}

std::pair<LongTrajectory, ShootOutcome> shoot_impl(const scalar::Exponents& exp, real a,
                                                   real r_max, const ShootOptions& opt) {
    if (a <= 0.0L) throw InvalidArgument("shoot: initial height must be positive");
    const Rhs f{static_cast<real>(exp.alpha), static_cast<real>(exp.beta),
                static_cast<real>(opt.lambda), static_cast<real>(opt.u_floor), exp.dim};

    LongTrajectory traj;
    ShootOutcome outcome;

    if (f.reaction(a) == 0.0L && std::abs(a - 1.0L) < 1e-13L && opt.lambda == 1.0) {
        outcome.kind = OutcomeKind::Equilibrium;
        outcome.event_radius = 0.0;
        traj.r = {0.0L, r_max};
        traj.u = {a, a};
        traj.du = {0.0L, 0.0L};
        return {traj, outcome};
    }

    // Series start past the r = 0 coordinate singularity.
    const real c = f.reaction(a) / (2.0L * exp.dim);
    real r = std::min<real>(opt.dr, 1e-3L);
    State y{a + c * r * r, 2.0L * c * r};
    traj.r = {0.0L, r};
    traj.u = {a, y.u};
    traj.du = {0.0L, y.w};

    real h = opt.dr;
    const real atol = 1e-19L, rtol = 1e-16L;
    int rejects = 0;

    while (r < r_max) {
        real r_new;
        State y_new;
        if (opt.integrator == Integrator::AdaptiveRK45) {
            real err;
            y_new = dopri5_step(f, r, y, h, err);
            const real scale =
                atol + rtol * std::max({std::abs(y.u), std::abs(y_new.u), 1.0L});
            if (err > scale) {
                h *= std::max<real>(0.2L, 0.9L * std::pow(scale / err, 0.2L));
                if (++rejects > 100000) throw StepFailure("shoot: step control stalled");
                continue;
            }
            r_new = r + h;
            h *= std::min<real>(5.0L,
                                std::max<real>(0.2L, 0.9L * std::pow(scale / (err + 1e-300L), 0.2L)));
            h = std::min(h, r_max - r_new + 1e-30L);
        } else {
            y_new = rk4_step(f, r, y, opt.dr);
            r_new = r + opt.dr;
        }

        traj.r.push_back(r_new);
        traj.u.push_back(y_new.u);
        traj.du.push_back(y_new.w);

        // Event detection on the accepted step.  Flat fires only on a
        // genuinely tight double zero so near-critical shots still
        // classify as Crossing/Turning and keep the bisection informative.
        if (y_new.u <= 0.01L * opt.flat_tol && std::abs(y_new.w) <= 0.01L * opt.flat_tol) {
            outcome.kind = OutcomeKind::Flat;
            outcome.event_radius = static_cast<double>(r_new);
            return {traj, outcome};
        }
        if (y_new.u <= opt.u_floor && y_new.w < 0.0L) {
            // Interpolate the crossing radius u = u_floor inside the step.
            const real frac = (y.u - opt.u_floor) / std::max<real>(y.u - y_new.u, 1e-300L);
            outcome.kind = OutcomeKind::Crossing;
            outcome.event_radius = static_cast<double>(r + frac * (r_new - r));
            return {traj, outcome};
        }
        if (y_new.w > 0.0L && y_new.u > opt.flat_tol) {
            const real frac = (-y.w) / std::max<real>(y_new.w - y.w, 1e-300L);
            outcome.kind = OutcomeKind::Turning;
            outcome.event_radius =
                static_cast<double>(r + std::clamp<real>(frac, 0.0L, 1.0L) * (r_new - r));
            return {traj, outcome};
        }

        r = r_new;
        y = y_new;
    }
    throw NoEventBeforeRmax("shoot: no event before r_max");
}

Trajectory narrow(const LongTrajectory& t) {
    Trajectory out;
    out.r.assign(t.r.begin(), t.r.end());
    out.u.assign(t.u.begin(), t.u.end());
    out.du.assign(t.du.begin(), t.du.end());
    return out;
}

double hermite(double r, double r0, double r1, double u0, double u1, double m0, double m1) {
    const double dh = r1 - r0;
    const double t = (r - r0) / dh;
    const double t2 = t * t, t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * u0 + (t3 - 2.0 * t2 + t) * dh * m0 +
           (-2.0 * t3 + 3.0 * t2) * u1 + (t3 - t2) * dh * m1;
}

} // namespace

double RadialProfile::eval(double radius) const {
    if (radius >= support_radius || r.empty()) return 0.0;
    if (radius <= r.front()) return u.front();
    const auto it = std::upper_bound(r.begin(), r.end(), radius);
    const size_t k = static_cast<size_t>(it - r.begin());
    const double v = hermite(radius, r[k - 1], r[k], u[k - 1], u[k], du[k - 1], du[k]);
    return std::max(v, 0.0);
}

std::pair<Trajectory, ShootOutcome> shoot(const scalar::Exponents& exp, double a,
                                          double r_max, const ShootOptions& opt) {
    auto [traj, outcome] = shoot_impl(exp, a, r_max, opt);
    return {narrow(traj), outcome};
}

RadialProfile find_flat(const scalar::Exponents& exp, const ShootOptions& opt) {
    if (exp.dim < 2) throw InvalidArgument("find_flat: need dim >= 2");

    const real r_max = 1000.0L;

    // The whole search runs with a deep u_floor: for small alpha the
    // reaction u^alpha is still order-one at tiny u, so cutting it off
    // early changes which heights cross versus turn and biases a* far
    // beyond the bisection resolution.
    ShootOptions fine = opt;
    fine.u_floor = std::min(opt.u_floor, 1e-25);
    auto classify = [&](real a) { return shoot_impl(exp, a, r_max, fine).second.kind; };

    // Bracket in a: the classification switches exactly once between the
    // near-equilibrium side and large heights (orientation detected).
    real a_lo = 1.0L + 1e-6L;
    const OutcomeKind low_kind = classify(a_lo);
    real a_hi = 10.0L;
    while (classify(a_hi) == low_kind) {
        a_hi *= 2.0L;
        if (a_hi > 1e6L) throw NoSignChange("find_flat: no classification switch up to 1e6");
    }

    // Bisect down to the last representable long double: the defect of
    // the best shot scales like a root of the bracket width, so the full
    // extended mantissa is needed.
    while (true) {
        const real mid = 0.5L * (a_lo + a_hi);
        if (mid == a_lo || mid == a_hi) break;
        if (classify(mid) == low_kind)
            a_lo = mid;
        else
            a_hi = mid;
    }

    // Support radius: the point of smallest double-zero defect |u|+|u'|,
    // over both endpoint trajectories.
    LongTrajectory traj;
    real best = std::numeric_limits<real>::max();
    size_t best_k = 0;
    for (const real a_star : {a_lo, a_hi}) {
        auto [tr, outcome] = shoot_impl(exp, a_star, r_max, fine);
        (void)outcome;
        bool improved = false;
        for (size_t k = 0; k < tr.r.size(); ++k) {
            const real defect = std::abs(tr.u[k]) + std::abs(tr.du[k]);
            if (tr.r[k] > 0.0L && tr.u[k] < 0.5L && defect < best) {
                best = defect;
                best_k = k;
                improved = true;
            }
        }
        if (improved) traj = std::move(tr);
    }
    if (static_cast<double>(best) > opt.flat_tol) {
        std::ostringstream os;
        os << "find_flat: double-zero defect " << static_cast<double>(best) << " exceeds "
           << opt.flat_tol;
        throw ToleranceNotMet(os.str());
    }

    RadialProfile p;
    p.lambda = opt.lambda;
    p.support_radius = static_cast<double>(traj.r[best_k]);
    p.r.assign(traj.r.begin(), traj.r.begin() + static_cast<std::ptrdiff_t>(best_k + 1));
    p.u.assign(traj.u.begin(), traj.u.begin() + static_cast<std::ptrdiff_t>(best_k + 1));
    p.du.assign(traj.du.begin(), traj.du.begin() + static_cast<std::ptrdiff_t>(best_k + 1));
    p.u.back() = 0.0;
    p.du.back() = 0.0;
    return p;
}

double support_radius_fixed_step(const scalar::Exponents& exp, double center_height,
                                 double dr, double lambda) {
    ShootOptions o;
    o.integrator = Integrator::FixedRK4;
    o.dr = dr;
    o.u_floor = 1e-25;
    o.lambda = lambda;
    auto [tr, outcome] = shoot_impl(exp, static_cast<real>(center_height), 1000.0L, o);
    (void)outcome;

    real best = std::numeric_limits<real>::max();
    size_t bk = 0;
    for (size_t k = 0; k < tr.r.size(); ++k) {
        const real d = std::abs(tr.u[k]) + std::abs(tr.du[k]);
        if (tr.r[k] > 0.0L && tr.u[k] > 0.0L && tr.u[k] < 0.5L && d < best) {
            best = d;
            bk = k;
        }
    }
    const double u0 = static_cast<double>(tr.u[bk]);

    // Remaining distance to the contact point from the energy relation of
    // the contact layer, w^2/2 = u^{1+a}/(1+a) - lambda u^{1+b}/(1+b)
    // (friction is negligible at this depth):
    //   s(u0) = int_0^{u0} dt / sqrt(2 F(t)),
    // regularized by t = u0 z^{2/(1-a)} and evaluated by Simpson's rule.
    const double a = exp.alpha, b = exp.beta;
    const double q = 2.0 / (1.0 - a);
    const double mix = lambda * (1.0 + a) / (1.0 + b) * std::pow(u0, b - a);
    if (mix >= 1.0)
        throw InvalidArgument("support_radius_fixed_step: contact layer not reached");
    const auto g = [&](double z) {
        const double m = mix * std::pow(z, q * (b - a));
        return 1.0 / std::sqrt(1.0 - m);
    };
    const int n = 400;
    double sum = g(0.0) + g(1.0);
    for (int k = 1; k < n; ++k) sum += (k % 2 ? 4.0 : 2.0) * g(static_cast<double>(k) / n);
    const double integral = sum / (3.0 * n);
    const double tail =
        q * std::sqrt((1.0 + a) / 2.0) * std::pow(u0, (1.0 - a) / 2.0) * integral;
    return static_cast<double>(tr.r[bk]) + tail;
}

RadialProfile rescale(const RadialProfile& p, double sigma, const scalar::Exponents& exp) {
    if (sigma <= 0.0) throw InvalidArgument("rescale: sigma must be positive");
    if (sigma == 1.0) return p;
    // Matching the sigma^{-2} factor of the Laplacian against the u^alpha
    // term forces the amplitude factor sigma^{+2/(1-alpha)}: shrinking the
    // support shrinks the amplitude.  (Checked by the PDE-residual
    // invariance of the rescaled profile.)
    const double amp = std::pow(sigma, 2.0 / (1.0 - exp.alpha));
    RadialProfile q;
    q.r.resize(p.r.size());
    q.u.resize(p.u.size());
    q.du.resize(p.du.size());
    for (size_t k = 0; k < p.r.size(); ++k) {
        q.r[k] = sigma * p.r[k];
        q.u[k] = amp * p.u[k];
        q.du[k] = amp / sigma * p.du[k];
    }
    q.support_radius = sigma * p.support_radius;
    q.lambda = p.lambda * std::pow(sigma, -2.0 * (exp.beta - exp.alpha) / (1.0 - exp.alpha));
    return q;
}

grid::Field embed(const RadialProfile& p, const grid::Grid& g, const grid::Point& center) {
    const int dim = g.dim();
    grid::Field out(g);
    const double R = p.support_radius;
    for (std::int64_t i = 0; i < g.cell_count(); ++i) {
        const grid::Point x = g.cell_center(i);
        double rho2 = 0.0;
        for (int d = 0; d < dim; ++d) rho2 += (x[d] - center[d]) * (x[d] - center[d]);
        const double rho = std::sqrt(rho2);
        if (g.is_interior(i)) {
            out[i] = p.eval(rho);
        } else if (rho < R - 0.51 * g.h()) {
            throw SupportExceedsDomain("embed: support ball leaves the domain");
        }
    }
    return out;
}

scalar::IntegralTriple radial_triple(const RadialProfile& p, const scalar::Exponents& exp) {
    const double area = unit_sphere_area(exp.dim);
    double A = 0.0, B = 0.0, C = 0.0;
    for (size_t k = 0; k + 1 < p.r.size(); ++k) {
        const double dr = p.r[k + 1] - p.r[k];
        auto seg = [&](double fa, double fb) { return 0.5 * (fa + fb) * dr; };
        auto wgt = [&](size_t j) { return std::pow(p.r[j], exp.dim - 1); };
        A += seg(p.du[k] * p.du[k] * wgt(k), p.du[k + 1] * p.du[k + 1] * wgt(k + 1));
        B += seg(std::pow(std::abs(p.u[k]), exp.alpha + 1.0) * wgt(k),
                 std::pow(std::abs(p.u[k + 1]), exp.alpha + 1.0) * wgt(k + 1));
        C += seg(std::pow(std::abs(p.u[k]), exp.beta + 1.0) * wgt(k),
                 std::pow(std::abs(p.u[k + 1]), exp.beta + 1.0) * wgt(k + 1));
    }
    return {A * area, B * area, C * area};
}

double unit_sphere_area(int dim) {
    return 2.0 * std::pow(M_PI, dim / 2.0) / std::tgamma(dim / 2.0);
}

double lambda_star_radial(const scalar::Exponents& exp, double R_target,
                          const ShootOptions& opt) {
    const RadialProfile flat = find_flat(exp, opt);
    return lambda_star_from_profile(flat, exp, R_target);
}

double lambda_star_from_profile(const RadialProfile& flat, const scalar::Exponents& exp,
                                double R_target) {
    if (R_target <= 0.0) throw InvalidArgument("lambda_star_radial: R_target must be positive");
    return std::pow(flat.support_radius / R_target,
                    2.0 * (exp.beta - exp.alpha) / (1.0 - exp.alpha));
}

} // namespace flatcore::radial
