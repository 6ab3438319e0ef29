#pragma once

// Closed-form sample mappings of the disk with Wirtinger derivatives,
// dilatation, multiplicity and pushforward of curve families.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modlab/disk_geometry.hpp"
#include "modlab/modulus.hpp"

namespace modlab {

struct Wirtinger {
    Complex f_z;
    Complex f_zbar;

    double norm() const { return std::abs(f_z) + std::abs(f_zbar); }
    double jacobian() const { return std::norm(f_z) - std::norm(f_zbar); }
};

class SampleMap {
  public:
    enum class Kind { mobius, radial_stretch, winding, fold, spiral, composition };

    static SampleMap identity();
    static SampleMap mobius(const MobiusAutomorphism& g);
    /// z |z|^(k-1), k >= 1.
    static SampleMap radial_stretch(double k);
    /// r e^{i theta} -> r e^{i k theta}, k >= 1.
    static SampleMap winding(int k);
    /// x + iy -> |x| + iy.
    static SampleMap fold();
    /// z e^{i s(|z|)}, s(r) = log(1 + log(1/(1-r))); dilatation unbounded
    /// towards the boundary.
    static SampleMap spiral();
    /// Applies maps[0] first.
    static SampleMap compose(std::vector<SampleMap> maps);

    /// {kind: "winding", k: 3}, {kind: "mobius", a_re, a_im, c_re, c_im}, ...
    static SampleMap from_json(const nlohmann::json& j);
    /// Compact CLI form: identity, winding:3, radial:2, fold, spiral,
    /// rotation:<angle>, mobius:<a_re>,<a_im>,<c_re>,<c_im>; '|' composes.
    static SampleMap from_spec(const std::string& spec);

    Kind kind() const noexcept { return kind_; }
    std::string describe() const;
    nlohmann::json to_json() const;

    /// Raw evaluation, no disk check.
    Complex eval(Complex z) const;
    DiskPoint apply(const DiskPoint& z) const;

    /// Closed-form derivatives where the kind provides them.
    std::optional<Wirtinger> analytic(Complex z) const;

    /// True when circles about 0 go to circles about 0.
    bool preserves_centered_circles() const;

  private:
    Kind kind_ = Kind::mobius;
    MobiusAutomorphism g_;
    double k_ = 1.0;
    std::vector<SampleMap> parts_;
};

/// Central-difference Wirtinger derivatives.
Wirtinger finite_difference_wirtinger(const SampleMap& f, Complex z, double step);
double default_step(Complex z);

struct WirtingerReport {
    Wirtinger value;                  // analytic when available, otherwise finite differences
    Wirtinger finite_difference;
    bool analytic = false;
};

WirtingerReport wirtinger(const SampleMap& f, const DiskPoint& z, double step);
WirtingerReport wirtinger(const SampleMap& f, const DiskPoint& z);

/// K in [1, inf]; `infinite` is the distinguished sentinel for J = 0 < norm.
struct Dilatation {
    double K = 1.0;
    bool infinite = false;
};

Dilatation dilatation_from(const Wirtinger& w);
Dilatation dilatation(const SampleMap& f, const DiskPoint& z);

struct DistortionSample {
    DiskPoint z;
    Wirtinger w;
    Dilatation K;
};

DistortionSample distortion_at(const SampleMap& f, const DiskPoint& z);

struct MultiplicityReport {
    std::vector<DiskPoint> targets;
    std::vector<int> counts;
    int supremum = 0;
    bool incomplete_search = false;
};

/// Preimage counts by damped Newton refinement from a seed grid; a second
/// pass at a denser grid flags IncompleteSearch when counts disagree.
MultiplicityReport multiplicity(const SampleMap& f, const std::vector<DiskPoint>& targets, int seed_grid = 24,
                                double newton_tol = 1e-12);

struct FiniteDistortionReport {
    int grid = 0;
    std::size_t points = 0;
    std::vector<DiskPoint> violations;
    bool pass = true;
};

/// Points x_i = -1 + 2i/grid inside the disk: flags J = 0 (1e-10) with
/// norm > 1e-8.
FiniteDistortionReport finite_distortion_check(const SampleMap& f, int grid);

/// CSV columns x,y,abs_fz,abs_fzbar,K,J over the same sample points.
std::string distortion_csv(const SampleMap& f, int grid);

/// Maps each polyline pointwise and rasterizes into dom_image. A closed
/// image curve winding m times as often about 0 as its source is stored once
/// with multiplicity m. Throws ChartOverflow if an image point leaves the disk.
CurveFamily pushforward_family(const SampleMap& f, const std::vector<Polyline>& family,
                               const DiscretizedDomain& dom_image, FamilyKind kind = FamilyKind::circle_family);

std::vector<Polyline> map_polylines(const SampleMap& f, const std::vector<Polyline>& family);

/// Winding number about 0 of a closed polyline.
int winding_number(const Polyline& curve);

} // namespace modlab
