#pragma once

// Discrete conformal modulus of curve families.
//
// A family is rasterized onto a grid of cells; each curve becomes a sparse
// row of (cell, length) incidences and the modulus is the convex QP
//
//     minimize   sum_c A_c w_c rho_c^2
//     subject to m_g * sum_{c in g} rho_c l_{c,g} >= 1   for every curve g,
//                rho >= 0,
//
// solved by projected dual ascent on the curve multipliers.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "modlab/disk_geometry.hpp"
#include "modlab/quadrature.hpp"

namespace modlab {

enum class Metric { hyperbolic, euclidean };

std::string to_string(Metric m);

struct Cell {
    DiskPoint center;
    double area_euclid = 0.0;
    double area_hyp = 0.0;
};

/// Annular sectors about 0; rows bounded by Euclidean radii.
struct PolarGrid {
    std::vector<double> radial_edges;
    int n_theta = 0;
};

struct CartesianGrid {
    Window window;
    int nx = 0;
    int ny = 0;
};

class DiscretizedDomain {
  public:
    /// n_r rows uniform in hyperbolic radius over the ring, n_theta sectors.
    static DiscretizedDomain polar(const RingSpec& ring, int n_r, int n_theta);
    /// Rows given by increasing Euclidean radii (n_r + 1 edges).
    static DiscretizedDomain polar_edges(std::vector<double> radial_edges, int n_theta);
    static DiscretizedDomain cartesian(const Window& window, int nx, int ny);

    const std::vector<Cell>& cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return cells_.size(); }
    const std::variant<PolarGrid, CartesianGrid>& geometry() const noexcept { return geometry_; }

    /// Cell containing z, if any.
    std::optional<std::size_t> locate(Complex z) const;
    /// Parameters t in (0, 1) where p + t (q - p) crosses a cell edge, sorted.
    std::vector<double> crossings(Complex p, Complex q) const;
    /// Corner points of a cell, for plotting.
    std::vector<Complex> outline(std::size_t cell) const;

  private:
    std::variant<PolarGrid, CartesianGrid> geometry_;
    std::vector<Cell> cells_;
};

struct Incidence {
    std::size_t cell = 0;
    double length_euclid = 0.0;
    double length_hyp = 0.0;
};

struct Curve {
    std::vector<Incidence> incidences;
    int multiplicity = 1;
};

enum class FamilyKind { connecting, circle_family };

struct CurveFamily {
    std::vector<Curve> curves;
    FamilyKind kind = FamilyKind::connecting;

    /// Throws PreconditionError on invalid cell references, negative lengths
    /// or empty curves.
    void validate(const DiscretizedDomain& dom) const;
};

/// Exact clipping of every segment against the grid; the hyperbolic length
/// of a clipped piece uses the factor 2/(1-|m|^2) at the piece midpoint m.
/// Pieces outside the grid are dropped. Incidences are merged per cell.
Curve rasterize(const Polyline& curve, const DiscretizedDomain& dom, int multiplicity = 1);
CurveFamily rasterize_family(const std::vector<Polyline>& curves, const DiscretizedDomain& dom,
                             FamilyKind kind = FamilyKind::connecting);

/// Radial segments from the inner to the outer edge of a polar ring at the
/// sector-center angles (j + 1/2) 2 pi / n.
std::vector<Polyline> radial_segments(double R_inner, double R_outer, int n);
/// Closed polylines on circles |z| = R about 0, n_vertices each.
std::vector<Polyline> concentric_circles(const std::vector<double>& radii, int n_vertices);
/// Horizontal segments across the window at row-center heights.
std::vector<Polyline> horizontal_segments(const Window& window, int n);

struct DensityField {
    std::vector<double> rho;
};

struct SolverOptions {
    double tol = 1e-4;
    int max_iterations = 200'000;
    int stall_window = 50;
};

struct ModulusResult {
    double value = 0.0; // objective of the feasible (rescaled) density
    DensityField extremal;
    int iterations = 0;
    double max_constraint_violation = 0.0; // of the returned density
    double raw_violation = 0.0;            // of the dual iterate before rescaling
    double dual_bound = 0.0;               // lower bound from the dual objective
    double duality_gap = 0.0;              // value - dual_bound
    bool converged = true;
    Metric metric = Metric::hyperbolic;

    std::string to_json() const;
};

/// Optional per-cell weights multiply the cell areas in the objective.
ModulusResult modulus_discrete(const CurveFamily& family, const DiscretizedDomain& dom, Metric metric,
                               const SolverOptions& options = {}, std::span<const double> cell_weights = {});

/// Objective of a density for a family's metric areas and weights; used by
/// certificates and tests.
double density_energy(const DensityField& density, const DiscretizedDomain& dom, Metric metric,
                      std::span<const double> cell_weights = {});
/// min over curves of m * sum rho l.
double min_curve_integral(const DensityField& density, const CurveFamily& family, Metric metric);

/// 2 pi / log(R2/R1), R_i = euclid_radius(r_i).
double ring_modulus_exact(const RingSpec& ring);

struct CircleFamilyModulus {
    double value = 0.0;     // discrete weighted modulus of the circle family
    double reference = 0.0; // ring_reciprocal_integral of ||Q||
    ModulusResult solve;
};

/// Modulus of n_circles hyperbolic circles filling the ring, with the area
/// element weighted by 1/Q, against the reciprocal profile integral.
CircleFamilyModulus circle_family_modulus(const RingSpec& ring, const ScalarField& Q, int n_circles,
                                          int n_angular = 64, const SolverOptions& options = {});

struct Atom {
    double value = 0.0;
    double mass = 0.0;
};

struct WeightedInfimum {
    double I = 0.0;
    std::vector<double> alpha;
};

/// inf sum phi alpha^q m over alpha >= 0 with sum alpha m = 1, in closed form.
WeightedInfimum weighted_infimum(std::span<const Atom> phi, double q);

std::string density_csv(const DiscretizedDomain& dom, const DensityField& density);

} // namespace modlab
