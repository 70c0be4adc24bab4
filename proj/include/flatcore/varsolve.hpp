#pragma once

// Ground states via constrained minimization over the Nehari-Pohozaev
// set, the extremal values Lambda_0 and Lambda_1P, the fold value
// lambda*, branch continuation, classification, and multiplicity scans.

#include <vector>

#include "flatcore/grid.hpp"
#include "flatcore/radial.hpp"
#include "flatcore/scalar.hpp"

namespace flatcore::varsolve {

enum class Classification { Usual, FlatOrCompact, Indeterminate };

struct GroundStateResult {
    grid::Field field;
    double lambda = 0.0;
    double energy = 0.0;
    double pohozaev = 0.0;
    double energy_second = 0.0;
    double residual = 0.0;
    double boundary_flux = 0.0;
    double support_fraction = 0.0;
    Classification classification = Classification::Indeterminate;
    int iterations = 0;
    bool converged = false;
};

struct SolveParams {
    double tol_res = 2e-6;  // pde-residual target, relative to sqrt(A)
    int max_outer = 600;
    int precond_iters = 80; // CG budget of the (I - Lap) preconditioner
    double c_cls = 1.0;     // classification constant (thresholds c_cls * h)
    double c_fold = 0.01;   // lambda* detection: pohozaev < -c_fold * h counts as inside Z
    double bisect_rel = 2e-3; // lambda* bisection width, relative
};

struct ExtremalReport {
    double value = 0.0;
    grid::Field minimizer;
    int iterations = 0;
    bool certificate = false; // value <= quotient at every random probe
};

struct BifurcationPoint {
    double lambda = 0.0;
    double energy = 0.0;
    double pohozaev = 0.0;
    double boundary_flux = 0.0;
    double support_fraction = 0.0;
};

struct BifurcationDiagram {
    std::vector<BifurcationPoint> points;
    double lambda_star = 0.0;
    GroundStateResult flat_point;
};

struct LambdaStarResult {
    double lambda_star = 0.0;
    GroundStateResult flat_point;
    double lambda_star_radial = 0.0; // 0 when the domain is not a ball
    double radial_gap = 0.0;         // |grid - radial| / lambda*, balls only
    bool es_warning = false;         // es_margin >= 0
};

// Discrete energy functionals through the integral triple.
double energy_of(const scalar::IntegralTriple& tr, const scalar::Exponents& exp, double lambda);
double pohozaev_of(const scalar::IntegralTriple& tr, const scalar::Exponents& exp, double lambda);
double energy_second_of(const scalar::IntegralTriple& tr, const scalar::Exponents& exp,
                        double lambda);

/// Scale u onto the t_min branch of the Nehari set; throws NoRoot when
/// lambda lies below the fiber minimum along this ray.
grid::Field nehari_project(const grid::Grid& g, const grid::Field& u,
                           const scalar::Exponents& exp, double lambda);

GroundStateResult minimize_ground_state(const grid::Grid& g, const scalar::Exponents& exp,
                                        double lambda, const grid::Field& seed,
                                        const SolveParams& params = {});

Classification classify_solution(const GroundStateResult& r, double h, double c_cls = 1.0);

ExtremalReport extremal_lambda0(const grid::Grid& g, const scalar::Exponents& exp,
                                const grid::Field& seed, const SolveParams& params = {});
ExtremalReport extremal_lambda1P(const grid::Grid& g, const scalar::Exponents& exp,
                                 const grid::Field& seed, const SolveParams& params = {});

LambdaStarResult lambda_star(const grid::Grid& g, const scalar::Exponents& exp,
                             const grid::DomainSpec& spec, const SolveParams& params = {});

BifurcationDiagram branch_continuation(const grid::Grid& g, const scalar::Exponents& exp,
                                       const std::vector<double>& lambda_grid,
                                       const grid::Field& seed,
                                       const SolveParams& params = {});

std::vector<GroundStateResult> multiplicity_scan(const grid::Grid& g,
                                                 const scalar::Exponents& exp,
                                                 const grid::DomainSpec& spec,
                                                 const SolveParams& params = {},
                                                 int seed_family = 16);

/// |P_lambda(u) + (1/2N) boundary flux integral|; vanishes for solutions.
double pohozaev_check(const grid::Grid& g, const grid::Field& u, const scalar::Exponents& exp,
                      double lambda, const grid::DomainSpec& spec);

/// cos^2 bump supported on the ball (center, radius).
grid::Field bump_seed(const grid::Grid& g, const grid::Point& center, double radius,
                      double amplitude = 1.0);

/// Default seed: bump on the largest inscribed ball.
grid::Field default_seed(const grid::Grid& g, const grid::DomainSpec& spec);

double support_fraction(const grid::Grid& g, const grid::Field& u);

} // namespace flatcore::varsolve
