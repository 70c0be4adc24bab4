#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <flatcore/varsolve.hpp>

#include <cmath>

using namespace flatcore;
using grid::DomainSpec;
using grid::Field;
using grid::Grid;
using scalar::Exponents;
using scalar::IntegralTriple;

namespace {
const Exponents kE(0.05, 0.1, 3);
} // namespace

TEST_CASE("discrete energy layer matches the scalar layer at t = 1") {
    const IntegralTriple tr{2.0, 0.7, 1.1};
    const double lam = 1.3;
    CHECK(varsolve::energy_of(tr, kE, lam) ==
          doctest::Approx(scalar::energy(tr, kE, lam, 1.0)).epsilon(1e-14));
    CHECK(varsolve::energy_second_of(tr, kE, lam) ==
          doctest::Approx(scalar::energy_second(tr, kE, lam, 1.0)).epsilon(1e-14));
    // The Pohozaev layer agrees with the scalar form whenever dim >= 3.
    CHECK(varsolve::pohozaev_of(tr, kE, lam) ==
          doctest::Approx(scalar::pohozaev(tr, kE, lam)).epsilon(1e-12));
    // E = P + (1/N) A.
    CHECK(varsolve::energy_of(tr, kE, lam) ==
          doctest::Approx(varsolve::pohozaev_of(tr, kE, lam) + tr.grad2 / kE.dim)
              .epsilon(1e-12));
    // In dim 2 the gradient term drops out of P and E - P = A/2.
    const Exponents e2(0.05, 0.1, 2);
    CHECK(varsolve::energy_of(tr, e2, lam) ==
          doctest::Approx(varsolve::pohozaev_of(tr, e2, lam) + tr.grad2 / 2.0)
              .epsilon(1e-12));
}

TEST_CASE("nehari projection lands on the constraint") {
    const auto dom = DomainSpec::ball(3, {0.0, 0.0, 0.0}, 1.0);
    const Grid g(dom, 1.0 / 10.0);
    const Field seed = varsolve::default_seed(g, dom);
    const double lam = 3.0;
    const Field v = varsolve::nehari_project(g, seed, kE, lam);
    const auto tr = grid::integral_triple(g, v, kE);
    // E'(1) = 0 along the ray through v.
    CHECK(std::abs(scalar::energy_prime(tr, kE, lam, 1.0)) <
          1e-8 * (tr.grad2 + tr.pow_alpha + lam * tr.pow_beta));
    // t_min branch: second derivative along the ray is positive.
    CHECK(scalar::energy_second(tr, kE, lam, 1.0) > 0.0);
    // Below the fiber minimum there is no root.
    CHECK_THROWS_AS(varsolve::nehari_project(g, seed, kE, 1e-6), NoRoot);
    Field zero(g);
    CHECK_THROWS_AS(varsolve::nehari_project(g, zero, kE, lam), ZeroField);
}

TEST_CASE("ground state solves the discrete equation with negative energy") {
    const auto dom = DomainSpec::ball(3, {0.0, 0.0, 0.0}, 1.0);
    const Grid g(dom, 1.0 / 12.0);
    const double lam = 2.0; // well above lambda* ~ 1.40: usual regime
    const auto r =
        varsolve::minimize_ground_state(g, kE, lam, varsolve::default_seed(g, dom));
    CHECK(r.converged);
    CHECK(r.energy < 0.0);
    CHECK(r.energy_second > 0.0);
    CHECK(r.pohozaev < 0.0);
    const double scale = std::sqrt(grid::integral_triple(g, r.field, kE).grad2);
    CHECK(r.residual < 2e-6 * scale + 1e-14);
    for (auto idx : g.interior_cells()) CHECK(r.field[idx] >= 0.0);
    // Usual regime: full support and positive boundary flux.
    CHECK(r.support_fraction > 0.99);
    CHECK(r.boundary_flux > 0.0);
    CHECK(varsolve::classify_solution(r, g.h()) == varsolve::Classification::Usual);
    // Scaled Pohozaev balance against the boundary flux (Corollary 2.1):
    // P_lambda(u) = -(1/2N) * flux integral.
    const double balance = varsolve::pohozaev_check(g, r.field, kE, lam, dom);
    CHECK(balance < 0.05 * std::abs(r.pohozaev));
}

TEST_CASE("compact regime produces a strict interior support") {
    const auto dom = DomainSpec::ball(3, {0.0, 0.0, 0.0}, 1.0);
    const Grid g(dom, 1.0 / 12.0);
    // Far above lambda*: support radius ~ (lambda*/lambda)^{(1-a)/2(b-a)} << 1.
    const double lam = 2.8;
    const auto r =
        varsolve::minimize_ground_state(g, kE, lam, varsolve::default_seed(g, dom));
    CHECK(r.converged);
    CHECK(r.support_fraction < 0.5);
    const double h = g.h();
    CHECK(std::abs(r.boundary_flux) < h * h);
    CHECK(varsolve::classify_solution(r, h) == varsolve::Classification::FlatOrCompact);
}

TEST_CASE("classification thresholds respond to c_cls") {
    varsolve::GroundStateResult r;
    r.support_fraction = 0.9;
    r.boundary_flux = 0.05;
    const double h = 0.1;
    CHECK(varsolve::classify_solution(r, h, 1.0) == varsolve::Classification::Usual);
    // Indeterminate band: flux small but support not clearly interior.
    r.boundary_flux = 1e-12;
    CHECK(varsolve::classify_solution(r, h, 1.0) !=
          varsolve::Classification::Usual);
}

TEST_CASE("extremal quotients are certified minima over probes") {
    const auto dom = DomainSpec::ball(3, {0.0, 0.0, 0.0}, 1.0);
    const Grid g(dom, 1.0 / 8.0);
    const Field seed = varsolve::default_seed(g, dom);
    const auto l0 = varsolve::extremal_lambda0(g, kE, seed);
    const auto l1p = varsolve::extremal_lambda1P(g, kE, seed);
    CHECK(l0.value > 0.0);
    CHECK(l1p.value > 0.0);
    CHECK(l0.certificate);
    CHECK(l1p.certificate);
    // Ordering Lambda_0 <= Lambda_1P <= lambda* (here against the radial
    // oracle for the unit ball, within discretization slack).
    const double ls = radial::lambda_star_radial(kE, 1.0);
    CHECK(l0.value <= l1p.value * (1.0 + 1e-6));
    CHECK(l1p.value <= ls * 1.05);
}

TEST_CASE("bump seeds are admissible and respect their support ball") {
    const auto dom = DomainSpec::ball(3, {0.0, 0.0, 0.0}, 1.0);
    const Grid g(dom, 1.0 / 10.0);
    const Field b = varsolve::bump_seed(g, {0.3, 0.0, 0.0}, 0.4, 2.0);
    double mx = 0.0;
    for (auto idx : g.interior_cells()) {
        CHECK(b[idx] >= 0.0);
        mx = std::max(mx, b[idx]);
        if (b[idx] > 0.0) {
            const auto x = g.cell_center(idx);
            const double d = std::sqrt((x[0] - 0.3) * (x[0] - 0.3) + x[1] * x[1] +
                                       x[2] * x[2]);
            CHECK(d < 0.4 + 1e-12);
        }
    }
    CHECK(mx == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(varsolve::support_fraction(g, b) < 0.2);
    CHECK(varsolve::support_fraction(g, varsolve::default_seed(g, dom)) > 0.5);
}

TEST_CASE("branch continuation carries energies monotone in lambda") {
    const auto dom = DomainSpec::ball(3, {0.0, 0.0, 0.0}, 1.0);
    const Grid g(dom, 1.0 / 10.0);
    const std::vector<double> lams = {2.4, 2.2, 2.0, 1.8};
    const auto d = varsolve::branch_continuation(g, kE, lams, varsolve::default_seed(g, dom));
    REQUIRE(d.points.size() == lams.size());
    for (size_t k = 0; k < d.points.size(); ++k) {
        CHECK(d.points[k].lambda == lams[k]);
        CHECK(d.points[k].pohozaev < 0.0);
    }
    // E_lambda(u_lambda) decreases as lambda increases (ground-state level
    // is nonincreasing in lambda), so along this decreasing grid it rises.
    for (size_t k = 1; k < d.points.size(); ++k)
        CHECK(d.points[k].energy > d.points[k - 1].energy);
}

TEST_CASE("multiplicity scan on a two-ball union finds a mirror pair") {
    // Coarse engineering check; the acceptance run uses a finer grid.
    const auto uni = DomainSpec::union_of_balls(
        3, {{{-0.75, 0.0, 0.0}, 1.0}, {{0.75, 0.0, 0.0}, 1.0}}, {0.0, 0.0, 0.0});
    const Grid g(uni, 1.0 / 8.0);
    const Exponents e = kE;
    const auto sols = varsolve::multiplicity_scan(g, e, uni, {}, 4);
    REQUIRE(sols.size() >= 2);
    // Distinct states, localized in different balls.
    double m0 = 0.0, m1 = 0.0; // first moments along x
    double mass0 = 0.0, mass1 = 0.0;
    for (auto idx : g.interior_cells()) {
        const auto x = g.cell_center(idx);
        m0 += sols[0].field[idx] * x[0];
        mass0 += sols[0].field[idx];
        m1 += sols[1].field[idx] * x[0];
        mass1 += sols[1].field[idx];
    }
    CHECK(m0 / mass0 * (m1 / mass1) < 0.0); // opposite sides
    CHECK(std::abs(sols[0].energy - sols[1].energy) <
          0.05 * std::abs(sols[0].energy));
}
