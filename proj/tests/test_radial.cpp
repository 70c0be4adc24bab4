#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <flatcore/radial.hpp>

#include <cmath>

using namespace flatcore;
using radial::OutcomeKind;
using radial::RadialProfile;
using radial::ShootOptions;
using scalar::Exponents;

namespace {
const Exponents kE(0.05, 0.1, 3);

double profile_residual(const RadialProfile& p, const Exponents& e, double lambda) {
    // ODE check -u'' - (N-1)/r u' + u^a - lambda u^b = 0 with u'' taken
    // from centered differences of the stored derivative samples; the
    // forcing terms are O(1), so the residual is reported relative to 1.
    double worst = 0.0;
    for (size_t i = 1; i + 1 < p.r.size(); ++i) {
        const double hp = p.r[i + 1] - p.r[i];
        const double hm = p.r[i] - p.r[i - 1];
        if (hp < 1e-9 || hm < 1e-9) continue;
        if (p.u[i] < 1e-4 * p.u.front()) continue; // contact-layer floor
        const double upp = (p.du[i + 1] - p.du[i - 1]) / (hp + hm);
        const double res = -upp - (e.dim - 1) / p.r[i] * p.du[i] +
                           std::pow(p.u[i], e.alpha) - lambda * std::pow(p.u[i], e.beta);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}
} // namespace

TEST_CASE("shooting outcomes are monotone in the center height") {
    // Below the flat height the trajectory turns back up; above it, u
    // crosses zero with negative slope.
    const double a_flat = radial::find_flat(kE).u.front();
    auto lo = radial::shoot(kE, 0.5 * a_flat, 100.0);
    CHECK(lo.second.kind == OutcomeKind::Turning);
    auto hi = radial::shoot(kE, 2.0 * a_flat, 100.0);
    CHECK(hi.second.kind == OutcomeKind::Crossing);
    // The equilibrium height a* = lambda^{1/(a-b)} sits on a constant solution.
    const double a_star = 1.0; // lambda = 1
    auto eq = radial::shoot(kE, a_star, 10.0);
    CHECK(eq.second.kind == OutcomeKind::Equilibrium);
}

TEST_CASE("flat profile satisfies the radial equation and contact conditions") {
    const RadialProfile p = radial::find_flat(kE);
    CHECK(p.lambda == doctest::Approx(1.0));
    CHECK(p.support_radius > 0.0);
    CHECK(p.u.front() > 0.0);
    // Profile decreasing, vanishing with zero slope at the support radius.
    for (size_t i = 1; i < p.u.size(); ++i) CHECK(p.u[i] <= p.u[i - 1] + 1e-15);
    CHECK(p.u.back() < 1e-8 * p.u.front());
    CHECK(std::abs(p.du.back()) < 1e-8 * p.u.front());
    CHECK(profile_residual(p, kE, 1.0) < 1e-5 * p.u.front());
}

TEST_CASE("interpolated evaluation matches samples and vanishes outside") {
    const RadialProfile p = radial::find_flat(kE);
    for (size_t i = 0; i < p.r.size(); i += 7)
        CHECK(p.eval(p.r[i]) == doctest::Approx(p.u[i]).epsilon(1e-12));
    CHECK(p.eval(p.support_radius * 1.01) == 0.0);
    CHECK(p.eval(p.support_radius * 10.0) == 0.0);
    // Between samples the cubic stays within the bracketing values' range
    // up to interpolation error.
    const double rm = 0.5 * (p.r[10] + p.r[11]);
    const double v = p.eval(rm);
    CHECK(v <= std::max(p.u[10], p.u[11]) * (1.0 + 1e-9));
    CHECK(v >= std::min(p.u[10], p.u[11]) * (1.0 - 1e-9));
}

TEST_CASE("fixed-step support radius agrees with the adaptive shot") {
    const RadialProfile p = radial::find_flat(kE);
    const double r_fixed = radial::support_radius_fixed_step(kE, p.u.front(), 1e-3);
    CHECK(std::abs(r_fixed - p.support_radius) / p.support_radius < 1e-3);
}

TEST_CASE("rescale applies the scaling group exactly") {
    const RadialProfile p = radial::find_flat(kE);
    const double sigma = 0.83;
    const RadialProfile q = radial::rescale(p, sigma, kE);
    const double amp = std::pow(sigma, 2.0 / (1.0 - kE.alpha));
    CHECK(q.support_radius == doctest::Approx(sigma * p.support_radius).epsilon(1e-12));
    CHECK(q.lambda ==
          doctest::Approx(std::pow(sigma, -2.0 * (kE.beta - kE.alpha) / (1.0 - kE.alpha)))
              .epsilon(1e-12));
    CHECK(q.u.front() == doctest::Approx(amp * p.u.front()).epsilon(1e-12));
    // The rescaled profile solves the equation at its own lambda.
    CHECK(profile_residual(q, kE, q.lambda) < 1e-5 * q.u.front());
    // Group law: rescaling by sigma then 1/sigma is the identity.
    const RadialProfile back = radial::rescale(q, 1.0 / sigma, kE);
    CHECK(back.lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(back.u.front() == doctest::Approx(p.u.front()).epsilon(1e-12));
}

TEST_CASE("lambda_star_radial matches the closed-form scaling relation") {
    const RadialProfile p = radial::find_flat(kE);
    const double R = 1.0;
    const double ls = radial::lambda_star_radial(kE, R);
    const double expected =
        std::pow(p.support_radius / R, 2.0 * (kE.beta - kE.alpha) / (1.0 - kE.alpha));
    CHECK(ls == doctest::Approx(expected).epsilon(1e-10));
    CHECK(radial::lambda_star_from_profile(p, kE, R) == doctest::Approx(ls).epsilon(1e-12));
    // Monotone decreasing in the target radius.
    CHECK(radial::lambda_star_radial(kE, 2.0) < ls);
    // Scaling covariance: lambda*(R) = lambda*(1) * R^{-2(b-a)/(1-a)}.
    const double exp2 = -2.0 * (kE.beta - kE.alpha) / (1.0 - kE.alpha);
    CHECK(radial::lambda_star_radial(kE, 2.0) ==
          doctest::Approx(ls * std::pow(2.0, exp2)).epsilon(1e-10));
}

TEST_CASE("radial quadrature agrees with grid integration of the embedding") {
    const RadialProfile p = radial::find_flat(kE);
    const RadialProfile q = radial::rescale(p, 0.995 / p.support_radius, kE);
    const auto tr = radial::radial_triple(q, kE);
    const auto dom = grid::DomainSpec::ball(3, {0.0, 0.0, 0.0}, 1.0);
    const grid::Grid g(dom, 1.0 / 24.0);
    const grid::Field u = radial::embed(q, g, {0.0, 0.0, 0.0});
    const auto tg = grid::integral_triple(g, u, kE);
    CHECK(std::abs(tg.pow_beta - tr.pow_beta) / tr.pow_beta < 0.02);
    CHECK(std::abs(tg.pow_alpha - tr.pow_alpha) / tr.pow_alpha < 0.02);
    // The gradient term carries the contact-layer truncation error O(h^{~1}).
    CHECK(std::abs(tg.grad2 - tr.grad2) / tr.grad2 < 0.06);
}

TEST_CASE("embedding rejects supports that leave the domain") {
    const RadialProfile p = radial::find_flat(kE);
    const RadialProfile q = radial::rescale(p, 1.2 / p.support_radius, kE);
    const auto dom = grid::DomainSpec::ball(3, {0.0, 0.0, 0.0}, 1.0);
    const grid::Grid g(dom, 1.0 / 8.0);
    CHECK_THROWS_AS(radial::embed(q, g, {0.0, 0.0, 0.0}), SupportExceedsDomain);
}

TEST_CASE("unit sphere areas") {
    CHECK(radial::unit_sphere_area(2) == doctest::Approx(2.0 * M_PI));
    CHECK(radial::unit_sphere_area(3) == doctest::Approx(4.0 * M_PI));
}

TEST_CASE("dimension-two flat profile behaves the same way") {
    const Exponents e2(0.05, 0.1, 2);
    const RadialProfile p = radial::find_flat(e2);
    CHECK(p.u.front() > 0.0);
    CHECK(p.u.back() < 1e-8 * p.u.front());
    CHECK(profile_residual(p, e2, 1.0) < 1e-5 * p.u.front());
}
