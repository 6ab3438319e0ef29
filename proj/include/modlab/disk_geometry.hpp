#pragma once

// Poincare disk primitives: points, disk automorphisms, hyperbolic
// distance/length/area and geodesics. Metric normalization is curvature -1,
// line element 2|dz|/(1-|z|^2).

#include <complex>
#include <functional>
#include <vector>

namespace modlab {

using Complex = std::complex<double>;

inline constexpr double kBoundaryMargin = 1e-9;

/// A point of the open unit disk kept away from the boundary by kBoundaryMargin.
class DiskPoint {
  public:
    DiskPoint() = default;
    DiskPoint(double re, double im);
    explicit DiskPoint(Complex z);

    /// True when z would be accepted by the constructor.
    static bool admissible(Complex z) noexcept;

    Complex z() const noexcept { return z_; }
    double re() const noexcept { return z_.real(); }
    double im() const noexcept { return z_.imag(); }
    double abs() const noexcept { return std::abs(z_); }

    friend bool operator==(const DiskPoint&, const DiskPoint&) = default;

  private:
    Complex z_{0.0, 0.0};
};

/// g(z) = (a z + c) / (conj(c) z + conj(a)) with |a|^2 - |c|^2 = 1.
class MobiusAutomorphism {
  public:
    MobiusAutomorphism() = default; // identity

    /// Throws PreconditionError when |a|^2 - |c|^2 <= 0; otherwise rescales
    /// the pair onto the unit-determinant constraint.
    MobiusAutomorphism(Complex a, Complex c);

    static MobiusAutomorphism identity() { return {}; }
    static MobiusAutomorphism rotation(double angle);
    /// Hyperbolic translation along the diameter through e^{i angle}, moving
    /// 0 to a point at hyperbolic distance `length`.
    static MobiusAutomorphism translation(double length, double angle = 0.0);

    Complex a() const noexcept { return a_; }
    Complex c() const noexcept { return c_; }

    /// Raw evaluation; no disk check on the result.
    Complex eval(Complex z) const noexcept { return (a_ * z + c_) / (std::conj(c_) * z + std::conj(a_)); }
    /// Complex derivative g'(z).
    Complex derivative(Complex z) const noexcept;

    /// Half the trace of the SU(1,1) matrix; |Re a| < 1 means elliptic.
    double half_trace() const noexcept { return a_.real(); }

    /// Distance between coefficient pairs, modulo the overall sign (g and -g
    /// act identically).
    double coefficient_distance(const MobiusAutomorphism& other) const noexcept;
    bool is_identity(double tol = 1e-9) const noexcept;

  private:
    void normalize();

    Complex a_{1.0, 0.0};
    Complex c_{0.0, 0.0};
};

DiskPoint mobius_apply(const MobiusAutomorphism& g, const DiskPoint& z);
MobiusAutomorphism mobius_compose(const MobiusAutomorphism& outer, const MobiusAutomorphism& inner);
MobiusAutomorphism mobius_invert(const MobiusAutomorphism& g);
/// z -> (z - z0)/(1 - conj(z0) z).
MobiusAutomorphism mobius_to_zero(const DiskPoint& z0);

inline MobiusAutomorphism operator*(const MobiusAutomorphism& outer, const MobiusAutomorphism& inner) {
    return mobius_compose(outer, inner);
}

/// Ordered vertex list with consecutive duplicates collapsed.
class Polyline {
  public:
    explicit Polyline(std::vector<DiskPoint> vertices, bool closed = false);

    const std::vector<DiskPoint>& vertices() const noexcept { return vertices_; }
    bool closed() const noexcept { return closed_; }
    std::size_t size() const noexcept { return vertices_.size(); }

    /// Segment endpoints in traversal order, including the closing segment.
    std::size_t segment_count() const noexcept;
    std::pair<Complex, Complex> segment(std::size_t i) const;

    Polyline reversed() const;
    Polyline mapped(const MobiusAutomorphism& g) const;

  private:
    std::vector<DiskPoint> vertices_;
    bool closed_ = false;
};

struct HyperbolicCircle {
    DiskPoint center;
    double radius = 0.0;

    HyperbolicCircle(DiskPoint c, double r);
    /// Euclidean radius of the circle after moving its center to 0.
    double euclid_image_radius() const;
    bool contains(const DiskPoint& z) const;
};

double hyp_distance(const DiskPoint& z1, const DiskPoint& z2);
double hyp_distance(Complex z1, Complex z2);

/// Sum over segments of the adaptive-Simpson integral of 2/(1-|z|^2) |dz|.
double hyp_length(const Polyline& curve);

struct AreaResult {
    double value = 0.0;
    double refined = 0.0; // the same sum at twice the resolution
    bool converged = true;
};

struct Window {
    double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
};

/// Midpoint-rule hyperbolic area of {z : indicator(z)} inside `window`.
AreaResult hyp_area(const std::function<bool(const DiskPoint&)>& indicator, const Window& window, int resolution);

/// (e^r - 1)/(e^r + 1) = tanh(r/2).
double euclid_radius(double r);
/// Inverse of euclid_radius, 2 atanh(R).
double hyp_radius(double R);

/// n vertices along the geodesic z1 -> z2, uniformly spaced in hyperbolic arclength.
Polyline geodesic(const DiskPoint& z1, const DiskPoint& z2, int n);

} // namespace modlab
