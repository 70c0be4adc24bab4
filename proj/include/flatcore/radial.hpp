#pragma once

// Shooting solver for the radial profile of the compactly supported
// solution of -u'' - (N-1)/r u' + u^a = lambda u^b, u(0)=a0, u'(0)=0,
// plus the scaling group connecting lambda values and support radii.

#include <utility>
#include <vector>

#include "flatcore/grid.hpp"
#include "flatcore/scalar.hpp"

namespace flatcore::radial {

struct RadialProfile {
    std::vector<double> r;  // increasing from 0
    std::vector<double> u;
    std::vector<double> du;
    double support_radius = 0.0;
    double lambda = 1.0; // the lambda at which the profile solves the equation

    /// Cubic-Hermite evaluation; 0 beyond the support radius.
    double eval(double radius) const;
};

enum class OutcomeKind { Crossing, Turning, Equilibrium, Flat };

struct ShootOutcome {
    OutcomeKind kind = OutcomeKind::Turning;
    double event_radius = 0.0;
};

struct Trajectory {
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> du;
};

enum class Integrator { AdaptiveRK45, FixedRK4 };

struct ShootOptions {
    double u_floor = 1e-12;   // below this, power terms evaluate to 0
    double flat_tol = 1e-8;   // double-zero defect tolerance
    double dr = 1e-3;         // initial (adaptive) or fixed step
    double lambda = 1.0;
    Integrator integrator = Integrator::AdaptiveRK45;
};

std::pair<Trajectory, ShootOutcome> shoot(const scalar::Exponents& exp, double a,
                                          double r_max, const ShootOptions& opt = {});

RadialProfile find_flat(const scalar::Exponents& exp, const ShootOptions& opt = {});

/// Support radius recomputed from a single fixed-step RK4 shot at the
/// given center height, with the sub-sample tail past the last reliable
/// point recovered by quadrature of the contact-layer energy relation.
/// Independent cross-check for find_flat's support_radius.
double support_radius_fixed_step(const scalar::Exponents& exp, double center_height,
                                 double dr, double lambda = 1.0);

/// u_sigma(r) = sigma^{2/(1-a)} u(r/sigma); support scales by sigma and
/// lambda by sigma^{-2(b-a)/(1-a)}.
RadialProfile rescale(const RadialProfile& p, double sigma, const scalar::Exponents& exp);

/// lambda at which the rescaled flat solution exactly fills B_{R_target}.
double lambda_star_radial(const scalar::Exponents& exp, double R_target,
                          const ShootOptions& opt = {});

/// Same, reusing an already computed flat profile (lambda == 1).
double lambda_star_from_profile(const RadialProfile& flat, const scalar::Exponents& exp,
                                double R_target);

grid::Field embed(const RadialProfile& p, const grid::Grid& g, const grid::Point& center);

/// (A, B, C) by radial quadrature with surface measure w_{N-1} r^{N-1} dr.
scalar::IntegralTriple radial_triple(const RadialProfile& p, const scalar::Exponents& exp);

/// Surface area of the unit sphere in R^N.
double unit_sphere_area(int dim);

} // namespace flatcore::radial
