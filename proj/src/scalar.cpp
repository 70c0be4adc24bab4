#include "flatcore/scalar.hpp"

#include <cmath>
#include <limits>

namespace flatcore::scalar {

namespace {

bool finite(double x) { return std::isfinite(x); }

// Bisection to relative width 1e-13 on a bracketed sign change.
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

Exponents::Exponents(double alpha_, double beta_, int dim_)
    : alpha(alpha_), beta(beta_), dim(dim_) {
    if (!(finite(alpha) && finite(beta)) || !(0.0 < alpha && alpha < beta && beta < 1.0))
        throw InvalidArgument("Exponents: need 0 < alpha < beta < 1");
    if (dim < 1) throw InvalidArgument("Exponents: need dim >= 1");
}

IntegralTriple::IntegralTriple(double grad2_, double pow_alpha_, double pow_beta_)
    : grad2(grad2_), pow_alpha(pow_alpha_), pow_beta(pow_beta_) {
    if (!(finite(grad2) && finite(pow_alpha) && finite(pow_beta)))
        throw InvalidArgument("IntegralTriple: non-finite component");
    if (grad2 <= 0.0 || pow_alpha <= 0.0 || pow_beta <= 0.0)
        throw InvalidArgument("IntegralTriple: components must be strictly positive");
}

double critical_exponent(const Exponents& exp) {
    if (exp.dim < 3) throw DimensionTooSmall("critical_exponent: need dim >= 3");
    return 2.0 * exp.dim / (exp.dim - 2.0);
}

double es_margin(const Exponents& exp) {
    return 2.0 * (1.0 + exp.alpha) * (1.0 + exp.beta)
         - exp.dim * (1.0 - exp.alpha) * (1.0 - exp.beta);
}

double energy(const IntegralTriple& tr, const Exponents& exp, double lambda, double t) {
    const double a = exp.alpha, b = exp.beta;
    return 0.5 * t * t * tr.grad2
         + std::pow(t, a + 1.0) / (a + 1.0) * tr.pow_alpha
         - lambda * std::pow(t, b + 1.0) / (b + 1.0) * tr.pow_beta;
}

double energy_prime(const IntegralTriple& tr, const Exponents& exp, double lambda, double t) {
    return t * tr.grad2 + std::pow(t, exp.alpha) * tr.pow_alpha
         - lambda * std::pow(t, exp.beta) * tr.pow_beta;
}

double energy_second(const IntegralTriple& tr, const Exponents& exp, double lambda, double t) {
    return tr.grad2 + exp.alpha * std::pow(t, exp.alpha - 1.0) * tr.pow_alpha
         - lambda * exp.beta * std::pow(t, exp.beta - 1.0) * tr.pow_beta;
}

double pohozaev(const IntegralTriple& tr, const Exponents& exp, double lambda, double t) {
    const double two_star = critical_exponent(exp);
    const double a = exp.alpha, b = exp.beta;
    return t * t / two_star * tr.grad2
         + std::pow(t, a + 1.0) / (a + 1.0) * tr.pow_alpha
         - lambda * std::pow(t, b + 1.0) / (b + 1.0) * tr.pow_beta;
}

double pohozaev_prime(const IntegralTriple& tr, const Exponents& exp, double lambda, double t) {
    const double two_star = critical_exponent(exp);
    return 2.0 * t / two_star * tr.grad2 + std::pow(t, exp.alpha) * tr.pow_alpha
         - lambda * std::pow(t, exp.beta) * tr.pow_beta;
}

double rayleigh0(const IntegralTriple& tr, const Exponents& exp, double t) {
    const double a = exp.alpha, b = exp.beta;
    return (b + 1.0)
         * (0.5 * std::pow(t, 1.0 - b) * tr.grad2
            + std::pow(t, a - b) / (a + 1.0) * tr.pow_alpha)
         / tr.pow_beta;
}

double rayleigh1(const IntegralTriple& tr, const Exponents& exp, double t) {
    const double a = exp.alpha, b = exp.beta;
    return (std::pow(t, 1.0 - b) * tr.grad2 + std::pow(t, a - b) * tr.pow_alpha) / tr.pow_beta;
}

double rayleighP(const IntegralTriple& tr, const Exponents& exp, double t) {
    const double two_star = critical_exponent(exp);
    const double a = exp.alpha, b = exp.beta;
    return (b + 1.0)
         * (std::pow(t, 1.0 - b) / two_star * tr.grad2
            + std::pow(t, a - b) / (a + 1.0) * tr.pow_alpha)
         / tr.pow_beta;
}

double lambda_u(const IntegralTriple& tr, const Exponents& exp) {
    const double a = exp.alpha, b = exp.beta;
    return std::pow(tr.pow_alpha, (1.0 - b) / (1.0 - a))
         * std::pow(tr.grad2, (b - a) / (1.0 - a)) / tr.pow_beta;
}

double c0_constant(const Exponents& exp) {
    const double a = exp.alpha, b = exp.beta;
    return (1.0 - a) * (b + 1.0) / ((1.0 - b) * (1.0 + a))
         * std::pow((1.0 - b) * (a + 1.0) / (2.0 * (b - a)), (b - a) / (1.0 - a));
}

double c1p_constant_published(const Exponents& exp) {
    const double a = exp.alpha, b = exp.beta;
    const double two_star = critical_exponent(exp);
    return (b + 1.0) * (two_star - a + 1.0) / ((b - a) * two_star)
         * std::pow(two_star * (b - a) / ((two_star - b - 1.0) * (a + 1.0)),
                    (b - a) / (1.0 - a));
}

double c1p_constant_derived(const Exponents& exp) {
    const double a = exp.alpha, b = exp.beta;
    const double two_star = critical_exponent(exp);
    const double kappa = two_star * (b - a) / ((two_star - b - 1.0) * (a + 1.0));
    return std::pow(kappa, (1.0 - b) / (1.0 - a)) + std::pow(kappa, (a - b) / (1.0 - a));
}

namespace {

// t^{1-a} = kappa * B / A.
double scaling_from_kappa(const IntegralTriple& tr, const Exponents& exp, double kappa) {
    return std::pow(kappa * tr.pow_alpha / tr.grad2, 1.0 / (1.0 - exp.alpha));
}

} // namespace

RayleighReport rayleigh_report(const IntegralTriple& tr, const Exponents& exp) {
    const double a = exp.alpha, b = exp.beta;
    const double two_star = critical_exponent(exp);

    const double kappa0 = 2.0 * (b - a) / ((a + 1.0) * (1.0 - b));
    const double kappa1 = (b - a) / (1.0 - b);
    const double kappaP = two_star * (b - a) / ((a + 1.0) * (1.0 - b));
    const double kappa1P = two_star * (b - a) / ((two_star - b - 1.0) * (a + 1.0));

    RayleighReport rep;
    rep.t_0 = scaling_from_kappa(tr, exp, kappa0);
    rep.t_1 = scaling_from_kappa(tr, exp, kappa1);
    rep.t_P = scaling_from_kappa(tr, exp, kappaP);
    rep.t_1P = scaling_from_kappa(tr, exp, kappa1P);
    rep.lambda_u = lambda_u(tr, exp);
    // Quotient values evaluated directly from the definitions, not from
    // the closed-form constants.
    rep.lambda_0 = rayleigh0(tr, exp, rep.t_0);
    rep.lambda_1P = rayleighP(tr, exp, rep.t_1P);
    rep.lambda_1_min = rayleigh1(tr, exp, rep.t_1);
    return rep;
}

FiberingRoots fibering_roots(const IntegralTriple& tr, const Exponents& exp, double lambda) {
    // R1(tu) is strictly decreasing on (0, t1) and strictly increasing on
    // (t1, inf); roots of E'_lambda(tu) = 0 are the solutions of
    // R1(tu) = lambda on the two branches.
    const double kappa1 = (exp.beta - exp.alpha) / (1.0 - exp.beta);
    const double t1 = scaling_from_kappa(tr, exp, kappa1);
    const double lambda_min = rayleigh1(tr, exp, t1);

    FiberingRoots out;
    if (lambda < lambda_min - 1e-9 * std::max(1.0, lambda)) {
        out.kind = RootKind::NoRoot;
        return out;
    }
    if (std::abs(lambda - lambda_min) <= 1e-9 * std::max(1.0, lambda)) {
        out.kind = RootKind::Tangent;
        out.t_max = t1;
        out.t_min = t1;
        return out;
    }

    // Left branch: R1 decreases toward lambda_min, so R1 - lambda changes
    // sign from + to - on (t_lo, t1).
    double t_lo = t1;
    while (rayleigh1(tr, exp, t_lo) < lambda) {
        t_lo *= 0.5;
        if (t_lo < 1e-300) throw NoRoot("fibering_roots: left bracket collapsed");
    }
    const double t_max =
        bisect([&](double t) { return rayleigh1(tr, exp, t) - lambda; }, t_lo, t1);

    // Right branch: R1 increases through lambda on (t1, t_hi).
    double t_hi = t1;
    while (rayleigh1(tr, exp, t_hi) < lambda) {
        t_hi *= 2.0;
        if (t_hi > 1e300) throw NoRoot("fibering_roots: right bracket overflow");
    }
    const double t_min =
        bisect([&](double t) { return lambda - rayleigh1(tr, exp, t); }, t1, t_hi);

    out.kind = RootKind::Pair;
    out.t_max = t_max;
    out.t_min = t_min;
    return out;
}

} // namespace flatcore::scalar
