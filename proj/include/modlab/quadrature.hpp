#pragma once

// Integration in a normal chart centered at 0: hyperbolic circle and ball
// integrals, the polar (Fubini) reduction and radial profiles of ||Q||(r).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "modlab/disk_geometry.hpp"

namespace modlab {

/// Non-negative field on the chart, optionally singular at one point.
struct ScalarField {
    std::function<double(const DiskPoint&)> evaluator;
    std::string label;
    std::optional<Complex> singular;

    double operator()(const DiskPoint& z) const { return evaluator(z); }

    static ScalarField constant(double c);
    ScalarField scaled(double c) const;
    /// The same field seen from a chart centered at `center`: w -> Q(g^{-1} w)
    /// with g = mobius_to_zero(center).
    ScalarField recentered(const DiskPoint& center) const;
};

struct RingSpec {
    DiskPoint center{0.0, 0.0};
    double r_inner = 0.0;
    double r_outer = 0.0;

    RingSpec() = default;
    RingSpec(double inner, double outer, DiskPoint c = DiskPoint(0.0, 0.0));
    void validate() const;
};

struct RadialProfile {
    std::vector<double> radii;
    std::vector<double> values;
    int quadrature_n = 0;
    std::vector<std::string> warnings;

    std::string to_csv() const;
    std::string to_json() const;
};

using Warnings = std::vector<std::string>;

/// Integral of Q over the hyperbolic circle of radius r about 0: trapezoid
/// rule on n equispaced angles with line element 2R/(1-R^2), R = tanh(r/2).
double circle_integral(const ScalarField& Q, double r, int n, Warnings* warnings = nullptr);

/// Integral over the ring a < h(0, z) < b as the iterated integral of
/// circle_integral in r (composite Simpson, n_r nodes rounded up to odd).
double ring_integral(const ScalarField& Q, double a, double b, int n_r, int n_theta, Warnings* warnings = nullptr);

/// Integral of Q over the hyperbolic ball of radius r0 about 0. Fields
/// singular at the center start at r = 1e-6.
double ball_integral(const ScalarField& Q, double r0, int n_r, int n_theta, Warnings* warnings = nullptr);

struct FubiniResidual {
    double cartesian = 0.0; // direct 2-D quadrature of Q 4/(1-|z|^2)^2 dm
    double iterated = 0.0;  // ball_integral
    double residual = 0.0;  // |cartesian - iterated|
    double relative = 0.0;  // residual / max(|iterated|, tiny)
};

/// Compares a Cartesian quadrature of the ball integral (n_cart rows, each
/// integrated over its exact chord with n_cart midpoint nodes) with
/// ball_integral(Q, r0, n_radial, n_theta).
FubiniResidual fubini_residual(const ScalarField& Q, double r0, int n_cart = 400, int n_radial = 256,
                               int n_theta = 2048);

/// ||Q||(r) sampled on geometric radii from max(r_inner, 1e-6) to r_outer
/// inclusive.
RadialProfile qnorm_profile(const ScalarField& Q, const RingSpec& ring, int n_samples, int n_angular);

/// Trapezoid integral of 1/||Q||(r) over the sampled radii.
double ring_reciprocal_integral(const RadialProfile& profile);

/// Composite Simpson on a uniform grid, n rounded up to odd.
double simpson(const std::function<double(double)>& f, double a, double b, int n);

} // namespace modlab
