#pragma once

// Masked structured-grid discretization of star-shaped domains.
// Cells are axis-aligned cubes of side h; a cell belongs to the domain
// when its center lies inside (cut cells ignored).  Fields are defined
// on the full box and held at 0 on exterior cells, realizing the
// homogeneous Dirichlet extension.

#include <array>
#include <cstdint>
#include <vector>

#include "flatcore/errors.hpp"
#include "flatcore/scalar.hpp"

namespace flatcore::grid {

constexpr int kMaxDim = 3;

using Point = std::array<double, kMaxDim>;

struct BallSpec {
    Point center{};
    double radius = 0.0;
};

enum class DomainKind { Ball, UnionOfBalls, Ellipsoid };

struct DomainSpec {
    DomainKind kind = DomainKind::Ball;
    int dim = 0;
    std::vector<BallSpec> balls;  // one entry for Ball, several for UnionOfBalls
    Point center{};               // Ellipsoid center
    Point semi_axes{};            // Ellipsoid semi-axes
    Point star_center{};          // claimed strict star center

    static DomainSpec ball(int dim, const Point& center, double radius);
    static DomainSpec union_of_balls(int dim, std::vector<BallSpec> balls, const Point& star_center);
    static DomainSpec ellipsoid(int dim, const Point& center, const Point& semi_axes);

    bool inside(const Point& x) const;
    /// Outward unit normal from the implicit description; meaningful for
    /// points at or near the boundary.
    Point normal(const Point& x) const;
    /// Bounding box of the domain.
    void bounding_box(Point& lo, Point& hi) const;
};

class Grid {
  public:
    Grid(const DomainSpec& spec, double h);

    int dim() const { return dim_; }
    double h() const { return h_; }
    std::int64_t cell_count() const { return total_; }
    std::int64_t interior_count() const { return interior_count_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    const std::vector<std::int64_t>& interior_cells() const { return interior_; }
    const std::vector<std::int64_t>& boundary_band() const { return band_; }
    const std::array<std::int64_t, kMaxDim>& shape() const { return shape_; }
    const std::array<std::int64_t, kMaxDim>& stride() const { return stride_; }
    const Point& origin() const { return origin_; }
    const DomainSpec& spec() const { return spec_; }

    bool is_interior(std::int64_t idx) const { return mask_[static_cast<size_t>(idx)] != 0; }
    Point cell_center(std::int64_t idx) const;
    /// Linear index of the cell containing x, or -1 when outside the box.
    std::int64_t locate(const Point& x) const;

  private:
    DomainSpec spec_;
    int dim_;
    double h_;
    Point origin_{};
    std::array<std::int64_t, kMaxDim> shape_{};
    std::array<std::int64_t, kMaxDim> stride_{};
    std::int64_t total_ = 0;
    std::int64_t interior_count_ = 0;
    std::vector<std::uint8_t> mask_;
    std::vector<std::int64_t> interior_;
    std::vector<std::int64_t> band_; // interior cells adjacent to exterior

    void check_connected() const;
    void check_star_shaped() const;
};

struct Field {
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g) : values(static_cast<size_t>(g.cell_count()), 0.0) {}

    double& operator[](std::int64_t i) { return values[static_cast<size_t>(i)]; }
    double operator[](std::int64_t i) const { return values[static_cast<size_t>(i)]; }
    size_t size() const { return values.size(); }
};

/// (-Laplacian) via the 2N+1-point stencil; Dirichlet-0 exterior.
Field apply_laplacian(const Grid& g, const Field& u);

double integrate_power(const Grid& g, const Field& u, double p);
double integrate_grad_sq(const Grid& g, const Field& u);

scalar::IntegralTriple integral_triple(const Grid& g, const Field& u, const scalar::Exponents& exp);

/// Surface quadrature of |du/dnu|^2 (x . nu) over the boundary faces,
/// with x measured from the domain's star center.  With unit_flux the
/// squared normal derivative is replaced by 1 (divergence-theorem
/// diagnostic).
double boundary_flux_integral(const Grid& g, const Field& u, const DomainSpec& spec,
                              bool unit_flux = false);

struct InscribedBall {
    Point center{};
    double radius = 0.0;
};

std::vector<InscribedBall> inscribed_balls(const DomainSpec& spec, const Grid& g);

/// Distance from every cell to the nearest exterior cell center
/// (exact Euclidean distance transform).
std::vector<double> distance_to_exterior(const Grid& g);

struct SolveOptions {
    double rel_tol = 1e-10;
    int max_iter = 100000;
};

/// Conjugate gradients for (c0 I - Lap_h) w = rhs, Dirichlet-0.
Field linear_solve(const Grid& g, double c0, const Field& rhs,
                   const SolveOptions& opt = {});

/// Like linear_solve but runs a fixed iteration budget without a
/// convergence requirement; used as a smoother/preconditioner.
Field linear_solve_approx(const Grid& g, double c0, const Field& rhs, int iters);

/// sign(u) |u|^p with the 0 -> 0 convention.
double signed_power(double u, double p);

/// Discrete L2 norm of -Lap u + |u|^{a-1}u - lambda |u|^{b-1}u.
double pde_residual(const Grid& g, const Field& u, const scalar::Exponents& exp, double lambda);

double inner(const Grid& g, const Field& a, const Field& b); // L2 inner product, h^N weighted
double norm_l2(const Grid& g, const Field& a);

} // namespace flatcore::grid
