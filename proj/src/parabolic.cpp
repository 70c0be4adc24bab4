#include "flatcore/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flatcore::parabolic {

using grid::Field;
using grid::Grid;
using scalar::Exponents;

Field step(const Grid& g, const Field& v, const Exponents& exp, double lambda, double dt,
           double& clamped_mass) {
    const double c0 = 1.0 / dt;
    Field rhs(g);
    for (const std::int64_t i : g.interior_cells()) {
        rhs[i] = v[i] * c0 + lambda * grid::signed_power(v[i], exp.beta) -
                 grid::signed_power(v[i], exp.alpha);
    }
    Field next = grid::linear_solve(g, c0, rhs);
    const double cell = std::pow(g.h(), g.dim());
    for (const std::int64_t i : g.interior_cells()) {
        if (next[i] < 0.0) {
            clamped_mass += -next[i] * cell;
            next[i] = 0.0;
        }
    }
    return next;
}

SupportTrack evolve(const Grid& g, const Field& v0, const Exponents& exp,
                    const ParabolicConfig& cfg) {
    double vmax = 0.0, v0_l1 = 0.0;
    const double cell = std::pow(g.h(), g.dim());
    for (const std::int64_t i : g.interior_cells()) {
        vmax = std::max(vmax, std::abs(v0[i]));
        v0_l1 += std::abs(v0[i]) * cell;
    }

    const double dt = cfg.dt > 0.0 ? cfg.dt : 0.1 * std::min(1.0, 1.0 / cfg.lambda);
    const double delta = cfg.supp_delta > 0.0 ? cfg.supp_delta : 1e-10 * vmax;

    SupportTrack track;
    Field v = v0;
    double t = 0.0;

    const std::vector<double> dist = grid::distance_to_exterior(g);
    auto probe_radius = [&](const grid::Point& p) {
        const std::int64_t at = g.locate(p);
        if (at < 0 || !g.is_interior(at))
            throw ProbeOutsideDomain("evolve: probe point lies outside the domain");
        double best = dist[static_cast<size_t>(at)];
        for (const std::int64_t i : g.interior_cells()) {
            if (v[i] <= delta) continue;
            const grid::Point c = g.cell_center(i);
            double d2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) d2 += (c[d] - p[d]) * (c[d] - p[d]);
            best = std::min(best, std::sqrt(d2));
        }
        return best;
    };

    auto record = [&] {
        track.times.push_back(t);
        std::int64_t cnt = 0;
        for (const std::int64_t i : g.interior_cells())
            if (v[i] > delta) ++cnt;
        track.support_measure.push_back(static_cast<double>(cnt) * cell);
        std::vector<double> radii;
        radii.reserve(cfg.probes.size());
        for (const auto& p : cfg.probes) radii.push_back(probe_radius(p));
        track.empty_ball_radius.push_back(std::move(radii));
    };

    record();
    const int record_every = std::max(1, cfg.record_every);
    int n = 0;
    while (t < cfg.t_end - 1e-12 * cfg.t_end) {
        const double dtn = std::min(dt, cfg.t_end - t);
        v = step(g, v, exp, cfg.lambda, dtn, track.clamped_mass);
        t += dtn;
        if (++n % record_every == 0 || t >= cfg.t_end - 1e-12 * cfg.t_end) record();
    }

    track.clamp_flag = track.clamped_mass > 1e-3 * v0_l1;
    track.min_support_drift = 0.0;
    for (size_t k = 1; k < track.times.size(); ++k) {
        const double dts = track.times[k] - track.times[k - 1];
        if (dts <= 0.0) continue;
        const double drift = (track.support_measure[k] - track.support_measure[k - 1]) / dts;
        track.min_support_drift = std::min(track.min_support_drift, drift);
    }
    track.final_state = std::move(v);
    return track;
}

std::vector<std::int64_t> sublevel_region(const Grid& g, const Field& v, double theta) {
    std::vector<std::int64_t> out;
    for (const std::int64_t i : g.interior_cells())
        if (v[i] < theta) out.push_back(i);
    return out;
}

double empty_ball_radius(const Grid& g, const Field& v, const grid::Point& x, double delta) {
    const std::int64_t at = g.locate(x);
    if (at < 0 || !g.is_interior(at))
        throw ProbeOutsideDomain("empty_ball_radius: probe point lies outside the domain");

    double best = std::numeric_limits<double>::infinity();
    auto dist_to = [&](std::int64_t idx) {
        const grid::Point c = g.cell_center(idx);
        double d2 = 0.0;
        for (int d = 0; d < g.dim(); ++d) d2 += (c[d] - x[d]) * (c[d] - x[d]);
        return std::sqrt(d2);
    };
    for (const std::int64_t i : g.interior_cells())
        if (v[i] > delta) best = std::min(best, dist_to(i));

    // Distance to the domain complement caps the empty ball.
    const std::vector<double> dist = grid::distance_to_exterior(g);
    best = std::min(best, dist[static_cast<size_t>(at)]);
    return std::isfinite(best) ? best : dist[static_cast<size_t>(at)];
}

} // namespace flatcore::parabolic
