#pragma once

// Semi-implicit time stepping for v_t - Lap v + |v|^{a-1}v = lambda |v|^{b-1}v
// with homogeneous Dirichlet data, plus the support diagnostics used to
// observe finite-time flattening and dead-core formation.

#include <vector>

#include "flatcore/grid.hpp"
#include "flatcore/scalar.hpp"

namespace flatcore::parabolic {

struct ParabolicConfig {
    double lambda = 1.0;
    double dt = 0.0;         // 0: pick 0.1 * min(1, 1/lambda)
    double t_end = 1.0;
    int record_every = 1;    // record diagnostics every k steps
    double supp_delta = 0.0; // support threshold; 0: 1e-10 * max v0
    double theta = 0.0;      // sublevel height; 0: 0.5 * lambda^{-1/(beta-alpha)}
    std::vector<grid::Point> probes; // empty-ball probe points
};

struct SupportTrack {
    std::vector<double> times;
    std::vector<double> support_measure; // |{v > supp_delta}|
    std::vector<std::vector<double>> empty_ball_radius; // per probe, per record
    double clamped_mass = 0.0; // total negative mass removed by clamping
    bool clamp_flag = false;   // clamped_mass exceeded 1e-3 * |v0|_{L1}
    double min_support_drift = 0.0; // min over records of d(support)/dt
    grid::Field final_state;
};

/// One backward-Euler step in the linear part: (I/dt - Lap) v1 = v0/dt + f(v0).
/// Negative values are clamped to 0; the removed mass accumulates in
/// clamped_mass.
grid::Field step(const grid::Grid& g, const grid::Field& v, const scalar::Exponents& exp,
                 double lambda, double dt, double& clamped_mass);

SupportTrack evolve(const grid::Grid& g, const grid::Field& v0, const scalar::Exponents& exp,
                    const ParabolicConfig& cfg);

/// Indicator of {v < theta} restricted to the domain.
std::vector<std::int64_t> sublevel_region(const grid::Grid& g, const grid::Field& v,
                                          double theta);

/// Radius of the largest ball around x containing no cell with v > delta
/// and no exterior cell; throws ProbeOutsideDomain when x is outside.
double empty_ball_radius(const grid::Grid& g, const grid::Field& v, const grid::Point& x,
                         double delta);

} // namespace flatcore::parabolic
