#include "flatcore/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <random>

namespace flatcore::grid {

namespace {

double dist2(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
    return s;
}

} // namespace

namespace {
void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim) throw InvalidArgument("DomainSpec: dim out of range");
}
} // namespace

DomainSpec DomainSpec::ball(int dim, const Point& center, double radius) {
    check_dim(dim);
    if (radius <= 0.0) throw InvalidArgument("DomainSpec::ball: radius must be positive");
    DomainSpec s;
    s.kind = DomainKind::Ball;
    s.dim = dim;
    s.balls.push_back({center, radius});
    s.star_center = center;
    return s;
}

DomainSpec DomainSpec::union_of_balls(int dim, std::vector<BallSpec> balls,
                                      const Point& star_center) {
    check_dim(dim);
    if (balls.empty()) throw InvalidArgument("DomainSpec::union_of_balls: no balls");
    for (const auto& b : balls)
        if (b.radius <= 0.0) throw InvalidArgument("DomainSpec: radius must be positive");
    DomainSpec s;
    s.kind = DomainKind::UnionOfBalls;
    s.dim = dim;
    s.balls = std::move(balls);
    s.star_center = star_center;
    return s;
}

DomainSpec DomainSpec::ellipsoid(int dim, const Point& center, const Point& semi_axes) {
    check_dim(dim);
    for (int d = 0; d < dim; ++d)
        if (semi_axes[d] <= 0.0) throw InvalidArgument("DomainSpec: semi-axes must be positive");
    DomainSpec s;
    s.kind = DomainKind::Ellipsoid;
    s.dim = dim;
    s.center = center;
    s.semi_axes = semi_axes;
    s.star_center = center;
    return s;
}

bool DomainSpec::inside(const Point& x) const {
    switch (kind) {
        case DomainKind::Ball:
        case DomainKind::UnionOfBalls:
            for (const auto& b : balls)
                if (dist2(x, b.center, dim) < b.radius * b.radius) return true;
            return false;
        case DomainKind::Ellipsoid: {
            double s = 0.0;
            for (int d = 0; d < dim; ++d) {
                const double r = (x[d] - center[d]) / semi_axes[d];
                s += r * r;
            }
            return s < 1.0;
        }
    }
    return false;
}

Point DomainSpec::normal(const Point& x) const {
    Point n{};
    if (kind == DomainKind::Ellipsoid) {
        for (int d = 0; d < dim; ++d)
            n[d] = (x[d] - center[d]) / (semi_axes[d] * semi_axes[d]);
    } else {
        // Normal of the ball whose boundary sphere is nearest to x.
        double best = std::numeric_limits<double>::max();
        const BallSpec* pick = &balls.front();
        for (const auto& b : balls) {
            const double gap = std::abs(std::sqrt(dist2(x, b.center, dim)) - b.radius);
            if (gap < best) {
                best = gap;
                pick = &b;
            }
        }
        for (int d = 0; d < dim; ++d) n[d] = x[d] - pick->center[d];
    }
    double len = 0.0;
    for (int d = 0; d < dim; ++d) len += n[d] * n[d];
    len = std::sqrt(len);
    if (len > 0.0)
        for (int d = 0; d < dim; ++d) n[d] /= len;
    return n;
}

void DomainSpec::bounding_box(Point& lo, Point& hi) const {
    lo.fill(0.0);
    hi.fill(0.0);
    if (kind == DomainKind::Ellipsoid) {
        for (int d = 0; d < dim; ++d) {
            lo[d] = center[d] - semi_axes[d];
            hi[d] = center[d] + semi_axes[d];
        }
        return;
    }
    for (int d = 0; d < dim; ++d) {
        lo[d] = balls.front().center[d] - balls.front().radius;
        hi[d] = balls.front().center[d] + balls.front().radius;
    }
    for (const auto& b : balls)
        for (int d = 0; d < dim; ++d) {
            lo[d] = std::min(lo[d], b.center[d] - b.radius);
            hi[d] = std::max(hi[d], b.center[d] + b.radius);
        }
}

Grid::Grid(const DomainSpec& spec, double h) : spec_(spec), dim_(spec.dim), h_(h) {
    if (h <= 0.0) throw InvalidArgument("Grid: h must be positive");
    if (dim_ < 1 || dim_ > kMaxDim) throw InvalidArgument("Grid: dim out of range");

    Point lo, hi;
    spec_.bounding_box(lo, hi);

    // Two exterior padding cells on each side so every interior cell has
    // all 2N neighbors present.
    shape_.fill(1);
    for (int d = 0; d < dim_; ++d) {
        origin_[d] = lo[d] - 2.0 * h_;
        shape_[d] = static_cast<std::int64_t>(std::ceil((hi[d] - lo[d]) / h_)) + 4;
    }
    stride_.fill(0);
    total_ = 1;
    for (int d = 0; d < dim_; ++d) {
        stride_[d] = total_;
        total_ *= shape_[d];
    }

    mask_.assign(static_cast<size_t>(total_), 0);
    for (std::int64_t i = 0; i < total_; ++i) {
        if (spec_.inside(cell_center(i))) mask_[static_cast<size_t>(i)] = 1;
    }
    // Guard: never mark a padding-ring cell interior.
    for (std::int64_t i = 0; i < total_; ++i) {
        std::int64_t rem = i;
        for (int d = dim_ - 1; d >= 0; --d) {
            const std::int64_t c = rem / stride_[d];
            rem -= c * stride_[d];
            if (c == 0 || c == shape_[d] - 1) mask_[static_cast<size_t>(i)] = 0;
        }
    }

    for (std::int64_t i = 0; i < total_; ++i) {
        if (!mask_[static_cast<size_t>(i)]) continue;
        interior_.push_back(i);
        bool band = false;
        for (int d = 0; d < dim_; ++d)
            if (!mask_[static_cast<size_t>(i - stride_[d])] ||
                !mask_[static_cast<size_t>(i + stride_[d])])
                band = true;
        if (band) band_.push_back(i);
    }
    interior_count_ = static_cast<std::int64_t>(interior_.size());
    if (interior_count_ == 0) throw InvalidArgument("Grid: empty interior; h too coarse?");

    check_connected();
    check_star_shaped();
}

Point Grid::cell_center(std::int64_t idx) const {
    Point x{};
    std::int64_t rem = idx;
    for (int d = dim_ - 1; d >= 0; --d) {
        const std::int64_t c = rem / stride_[d];
        rem -= c * stride_[d];
        x[d] = origin_[d] + (static_cast<double>(c) + 0.5) * h_;
    }
    return x;
}

std::int64_t Grid::locate(const Point& x) const {
    std::int64_t idx = 0;
    for (int d = 0; d < dim_; ++d) {
        const auto c = static_cast<std::int64_t>(std::floor((x[d] - origin_[d]) / h_));
        if (c < 0 || c >= shape_[d]) return -1;
        idx += c * stride_[d];
    }
    return idx;
}

void Grid::check_connected() const {
    std::vector<std::uint8_t> seen(static_cast<size_t>(total_), 0);
    std::deque<std::int64_t> queue;
    queue.push_back(interior_.front());
    seen[static_cast<size_t>(interior_.front())] = 1;
    std::int64_t reached = 0;
    while (!queue.empty()) {
        const std::int64_t i = queue.front();
        queue.pop_front();
        ++reached;
        for (int d = 0; d < dim_; ++d) {
            for (const std::int64_t j : {i - stride_[d], i + stride_[d]}) {
                if (mask_[static_cast<size_t>(j)] && !seen[static_cast<size_t>(j)]) {
                    seen[static_cast<size_t>(j)] = 1;
                    queue.push_back(j);
                }
            }
        }
    }
    if (reached != interior_count_)
        throw DisconnectedDomain("Grid: interior mask is not connected");
}

void Grid::check_star_shaped() const {
    std::mt19937_64 rng(0x51a7C0DEull);
    std::uniform_int_distribution<size_t> pick(0, band_.size() - 1);
    const size_t samples = std::min<size_t>(std::max<size_t>(band_.size() / 4, 32), 256);
    for (size_t s = 0; s < samples; ++s) {
        const Point target = cell_center(band_[pick(rng)]);
        // Every point of [star_center, target] must lie inside.
        double len = std::sqrt(dist2(target, spec_.star_center, dim_));
        const int steps = std::max(8, static_cast<int>(3.0 * len / h_));
        for (int k = 1; k < steps; ++k) {
            const double t = static_cast<double>(k) / steps;
            Point x{};
            for (int d = 0; d < dim_; ++d)
                x[d] = spec_.star_center[d] + t * (target[d] - spec_.star_center[d]);
            if (!spec_.inside(x))
                throw NotStarShaped("Grid: sampled segment leaves the domain");
        }
    }
}

Field apply_laplacian(const Grid& g, const Field& u) {
    Field out(g);
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const int dim = g.dim();
    const auto& stride = g.stride();
    const double diag = 2.0 * dim;
    for (const std::int64_t i : g.interior_cells()) {
        double s = diag * u[i];
        for (int d = 0; d < dim; ++d) s -= u[i - stride[d]] + u[i + stride[d]];
        out[i] = s * inv_h2;
    }
    return out;
}

double integrate_power(const Grid& g, const Field& u, double p) {
    if (p <= 0.0) throw InvalidArgument("integrate_power: p must be positive");
    const double cell = std::pow(g.h(), g.dim());
    double s = 0.0;
    for (const std::int64_t i : g.interior_cells()) s += std::pow(std::abs(u[i]), p);
    return s * cell;
}

double integrate_grad_sq(const Grid& g, const Field& u) {
    // Forward differences on faces; faces crossing the boundary see the
    // Dirichlet 0 on the exterior side.  This form satisfies
    // sum |grad u|^2 h^N == <-Lap_h u, u> h^N exactly.
    const int dim = g.dim();
    const auto& stride = g.stride();
    const double cell = std::pow(g.h(), g.dim());
    const double inv_h2 = 1.0 / (g.h() * g.h());
    double s = 0.0;
    for (const std::int64_t i : g.interior_cells()) {
        for (int d = 0; d < dim; ++d) {
            const double dplus = u[i + stride[d]] - u[i];
            s += dplus * dplus;
            // Faces to exterior cells on the minus side are visited by no
            // interior owner, so count them here.
            if (!g.is_interior(i - stride[d])) {
                const double dminus = u[i] - u[i - stride[d]];
                s += dminus * dminus;
            }
        }
    }
    return s * inv_h2 * cell;
}

scalar::IntegralTriple integral_triple(const Grid& g, const Field& u,
                                       const scalar::Exponents& exp) {
    const double A = integrate_grad_sq(g, u);
    const double B = integrate_power(g, u, exp.alpha + 1.0);
    const double C = integrate_power(g, u, exp.beta + 1.0);
    if (A <= 0.0 || B <= 0.0 || C <= 0.0)
        throw ZeroField("integral_triple: zero field");
    return {A, B, C};
}

double boundary_flux_integral(const Grid& g, const Field& u, const DomainSpec& spec,
                              bool unit_flux) {
    const int dim = g.dim();
    const auto& stride = g.stride();
    const double h = g.h();
    const double face = std::pow(h, dim - 1);
    double total = 0.0;
    for (const std::int64_t i : g.boundary_band()) {
        const Point xc = g.cell_center(i);
        // |grad u|^2 at the wall cell from one-sided differences into the
        // domain; near the wall the gradient is normal, so this
        // approximates |du/dnu|^2.
        double grad2 = 0.0;
        if (!unit_flux) {
            for (int d = 0; d < dim; ++d) {
                const bool plus_in = g.is_interior(i + stride[d]);
                const bool minus_in = g.is_interior(i - stride[d]);
                double du;
                if (plus_in && minus_in)
                    du = (u[i + stride[d]] - u[i - stride[d]]) / (2.0 * h);
                else if (plus_in)
                    du = (u[i + stride[d]] - u[i]) / h;
                else if (minus_in)
                    du = (u[i] - u[i - stride[d]]) / h;
                else
                    du = 0.0;
                grad2 += du * du;
            }
        }
        for (int d = 0; d < dim; ++d) {
            for (const int sgn : {-1, +1}) {
                const std::int64_t j = i + sgn * stride[d];
                if (g.is_interior(j)) continue;
                Point xf = xc;
                xf[d] += 0.5 * sgn * h;
                const Point nu = spec.normal(xf);
                // Projected face weight (nu . e) converts the staircase
                // face measure into surface measure.
                const double w = std::max(0.0, sgn * nu[d]) * face;
                double xdotnu = 0.0;
                for (int k = 0; k < dim; ++k)
                    xdotnu += (xf[k] - spec.star_center[k]) * nu[k];
                total += (unit_flux ? 1.0 : grad2) * xdotnu * w;
            }
        }
    }
    return total;
}

std::vector<double> distance_to_exterior(const Grid& g) {
    // Felzenszwalb-Huttenlocher exact squared Euclidean distance
    // transform, one separable pass per axis (in units of cells).
    const std::int64_t total = g.cell_count();
    const double INF = 1e18;
    std::vector<double> f(static_cast<size_t>(total));
    for (std::int64_t i = 0; i < total; ++i)
        f[static_cast<size_t>(i)] = g.is_interior(i) ? INF : 0.0;

    const int dim = g.dim();
    const auto& shape = g.shape();
    const auto& stride = g.stride();

    std::vector<double> line, out, zx;
    std::vector<std::int64_t> v;
    for (int d = 0; d < dim; ++d) {
        const std::int64_t n = shape[d];
        line.resize(static_cast<size_t>(n));
        out.resize(static_cast<size_t>(n));
        v.resize(static_cast<size_t>(n));
        zx.resize(static_cast<size_t>(n) + 1);
        // Iterate over all 1-D lines along axis d.
        const std::int64_t num_lines = total / n;
        for (std::int64_t li = 0; li < num_lines; ++li) {
            // Decompose li into the coordinates of the other axes.
            std::int64_t base = 0, rem = li;
            for (int e = 0; e < dim; ++e) {
                if (e == d) continue;
                const std::int64_t c = rem % shape[e];
                rem /= shape[e];
                base += c * stride[e];
            }
            for (std::int64_t q = 0; q < n; ++q)
                line[static_cast<size_t>(q)] = f[static_cast<size_t>(base + q * stride[d])];

            // Lower envelope of parabolas.
            int k = 0;
            v[0] = 0;
            zx[0] = -INF;
            zx[1] = INF;
            auto cross = [&](std::int64_t p, std::int64_t q) {
                return ((line[static_cast<size_t>(q)] + static_cast<double>(q) * q) -
                        (line[static_cast<size_t>(p)] + static_cast<double>(p) * p)) /
                       (2.0 * (q - p));
            };
            for (std::int64_t q = 1; q < n; ++q) {
                double s = cross(v[static_cast<size_t>(k)], q);
                while (k > 0 && s <= zx[static_cast<size_t>(k)]) {
                    --k;
                    s = cross(v[static_cast<size_t>(k)], q);
                }
                ++k;
                v[static_cast<size_t>(k)] = q;
                zx[static_cast<size_t>(k)] = s;
                zx[static_cast<size_t>(k) + 1] = INF;
            }
            k = 0;
            for (std::int64_t q = 0; q < n; ++q) {
                while (zx[static_cast<size_t>(k) + 1] < static_cast<double>(q)) ++k;
                const std::int64_t p = v[static_cast<size_t>(k)];
                out[static_cast<size_t>(q)] =
                    static_cast<double>((q - p) * (q - p)) + line[static_cast<size_t>(p)];
            }
            for (std::int64_t q = 0; q < n; ++q)
                f[static_cast<size_t>(base + q * stride[d])] = out[static_cast<size_t>(q)];
        }
    }

    std::vector<double> dist(static_cast<size_t>(total));
    for (std::int64_t i = 0; i < total; ++i)
        dist[static_cast<size_t>(i)] = std::sqrt(f[static_cast<size_t>(i)]) * g.h();
    return dist;
}

std::vector<InscribedBall> inscribed_balls(const DomainSpec& spec, const Grid& g) {
    // Exact geometry per domain kind; the grid only supplies a tolerance
    // for radius ties.  (A distance-transform argmax would be off by
    // O(h), which matters because the scaled compact profiles seeded at
    // these balls must fit the domain exactly.)
    const double tie = 0.5 * g.h();
    std::vector<InscribedBall> balls;
    switch (spec.kind) {
        case DomainKind::Ball:
            balls.push_back({spec.balls.front().center, spec.balls.front().radius});
            break;
        case DomainKind::UnionOfBalls: {
            double rmax = 0.0;
            for (const auto& b : spec.balls) rmax = std::max(rmax, b.radius);
            for (const auto& b : spec.balls) {
                if (b.radius < rmax - tie) continue;
                // Skip balls swallowed by a larger member.
                bool contained = false;
                for (const auto& o : spec.balls) {
                    if (&o == &b) continue;
                    const double d = std::sqrt(dist2(b.center, o.center, spec.dim));
                    if (d + b.radius <= o.radius + 1e-12) contained = true;
                }
                if (!contained) balls.push_back({b.center, b.radius});
            }
            break;
        }
        case DomainKind::Ellipsoid: {
            double rmin = spec.semi_axes[0];
            for (int d = 1; d < spec.dim; ++d) rmin = std::min(rmin, spec.semi_axes[d]);
            balls.push_back({spec.center, rmin});
            break;
        }
    }
    return balls;
}

namespace {

Field cg_solve(const Grid& g, double c0, const Field& rhs, const SolveOptions& opt,
               bool require_converged) {
    if (c0 < 0.0) throw InvalidArgument("linear_solve: c0 must be nonnegative");
    const int dim = g.dim();
    const auto& stride = g.stride();
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const double diag = c0 + 2.0 * dim * inv_h2;
    const auto& cells = g.interior_cells();

    auto apply = [&](const Field& x, Field& y) {
        for (const std::int64_t i : cells) {
            double s = diag * x[i];
            for (int d = 0; d < dim; ++d)
                s -= (x[i - stride[d]] + x[i + stride[d]]) * inv_h2;
            y[i] = s;
        }
    };

    Field x(g), r(g), p(g), ap(g);
    double rr = 0.0;
    for (const std::int64_t i : cells) {
        r[i] = rhs[i];
        p[i] = rhs[i];
        rr += r[i] * r[i];
    }
    const double rr0 = rr;
    if (rr0 == 0.0) return x;
    const double target = opt.rel_tol * opt.rel_tol * rr0;

    for (int it = 0; it < opt.max_iter; ++it) {
        apply(p, ap);
        double pap = 0.0;
        for (const std::int64_t i : cells) pap += p[i] * ap[i];
        const double alpha = rr / pap;
        double rr_new = 0.0;
        for (const std::int64_t i : cells) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rr_new += r[i] * r[i];
        }
        if (rr_new <= target) return x;
        const double beta = rr_new / rr;
        rr = rr_new;
        for (const std::int64_t i : cells) p[i] = r[i] + beta * p[i];
    }
    if (require_converged) throw NoConvergence("linear_solve: CG did not reach tolerance");
    return x;
}

} // namespace

Field linear_solve(const Grid& g, double c0, const Field& rhs, const SolveOptions& opt) {
    return cg_solve(g, c0, rhs, opt, true);
}

Field linear_solve_approx(const Grid& g, double c0, const Field& rhs, int iters) {
    SolveOptions opt;
    opt.rel_tol = 1e-8;
    opt.max_iter = iters;
    return cg_solve(g, c0, rhs, opt, false);
}

double signed_power(double u, double p) {
    if (u == 0.0) return 0.0;
    return u > 0.0 ? std::pow(u, p) : -std::pow(-u, p);
}

double pde_residual(const Grid& g, const Field& u, const scalar::Exponents& exp, double lambda) {
    const Field lap = apply_laplacian(g, u);
    const double cell = std::pow(g.h(), g.dim());
    double s = 0.0;
    for (const std::int64_t i : g.interior_cells()) {
        const double r = lap[i] + signed_power(u[i], exp.alpha) - lambda * signed_power(u[i], exp.beta);
        s += r * r;
    }
    return std::sqrt(s * cell);
}

double inner(const Grid& g, const Field& a, const Field& b) {
    double s = 0.0;
    for (const std::int64_t i : g.interior_cells()) s += a[i] * b[i];
    return s * std::pow(g.h(), g.dim());
}

double norm_l2(const Grid& g, const Field& a) { return std::sqrt(inner(g, a, a)); }

} // namespace flatcore::grid
