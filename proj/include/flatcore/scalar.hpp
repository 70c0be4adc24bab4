#pragma once

// Scalar algebra of the fibering maps t -> E_lambda(tu) and of the
// nonlinear generalized Rayleigh quotients.  Everything here is a pure
// function of the exponent pair (alpha, beta), the spatial dimension N,
// and the three integrals (A, B, C) = (|grad u|_2^2, |u|_{a+1}^{a+1},
// |u|_{b+1}^{b+1}); no discretization enters.

#include <optional>

#include "flatcore/errors.hpp"

namespace flatcore::scalar {

struct Exponents {
    double alpha;
    double beta;
    int dim;

    Exponents(double alpha_, double beta_, int dim_);
};

/// The three integrals through which every fibering formula factors.
/// All strictly positive for a nonzero function.
struct IntegralTriple {
    double grad2;     // A
    double pow_alpha; // B
    double pow_beta;  // C

    IntegralTriple(double grad2_, double pow_alpha_, double pow_beta_);
};

enum class RootKind { NoRoot, Tangent, Pair };

/// Nonzero roots of d/dt E_lambda(tu) = 0.  For a Pair, t_max < t_min,
/// with the fibering map having a local max at t_max and a local min at
/// t_min.
struct FiberingRoots {
    RootKind kind = RootKind::NoRoot;
    std::optional<double> t_max;
    std::optional<double> t_min;
};

/// Critical scalings of the three Rayleigh quotients along a ray, plus
/// the scale-invariant quotient values evaluated there.
struct RayleighReport {
    double t_0;          // argmin of R0(tu)
    double t_1;          // argmin of R1(tu)
    double t_P;          // argmin of RP(tu)
    double t_1P;         // unique solution of RP(tu) = R1(tu)
    double lambda_u;     // lambda(u), the zero-homogeneous quotient
    double lambda_0;     // R0(t_0 u)
    double lambda_1P;    // RP(t_1P u) = R1(t_1P u)
    double lambda_1_min; // min_t R1(tu)
};

double critical_exponent(const Exponents& exp);

/// m = 2(1+a)(1+b) - N(1-a)(1-b); membership in E_s(N) iff m < 0.
double es_margin(const Exponents& exp);

double energy(const IntegralTriple& tr, const Exponents& exp, double lambda, double t);
double energy_prime(const IntegralTriple& tr, const Exponents& exp, double lambda, double t);
double energy_second(const IntegralTriple& tr, const Exponents& exp, double lambda, double t);

double pohozaev(const IntegralTriple& tr, const Exponents& exp, double lambda, double t);
double pohozaev_prime(const IntegralTriple& tr, const Exponents& exp, double lambda, double t);

// The three quotients along the ray through u, as functions of t.
double rayleigh0(const IntegralTriple& tr, const Exponents& exp, double t);
double rayleigh1(const IntegralTriple& tr, const Exponents& exp, double t);
double rayleighP(const IntegralTriple& tr, const Exponents& exp, double t);

/// lambda(u) = B^{(1-b)/(1-a)} A^{(b-a)/(1-a)} / C.  Zero-homogeneous.
double lambda_u(const IntegralTriple& tr, const Exponents& exp);

/// Closed-form constant with lambda_0(u) = c0 * lambda(u).
double c0_constant(const Exponents& exp);

/// The published closed-form constant for lambda_1P(u) / lambda(u).
/// Known not to match direct quotient evaluation; kept for the
/// erratum diagnostic only.
double c1p_constant_published(const Exponents& exp);

/// Corrected constant: lambda_1P(u) = c1p * lambda(u) with
/// c1p = kappa^{(1-b)/(1-a)} + kappa^{(a-b)/(1-a)},
/// kappa = 2*(b-a)/((2*-b-1)(a+1)).  Matches direct evaluation.
double c1p_constant_derived(const Exponents& exp);

RayleighReport rayleigh_report(const IntegralTriple& tr, const Exponents& exp);

FiberingRoots fibering_roots(const IntegralTriple& tr, const Exponents& exp, double lambda);

} // namespace flatcore::scalar
