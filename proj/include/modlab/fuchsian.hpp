#pragma once

// Finitely generated Fuchsian groups: truncated word enumeration, quotient
// distance, Dirichlet domains and normal neighborhoods.

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "modlab/disk_geometry.hpp"

namespace modlab {

struct GroupElement {
    MobiusAutomorphism g;
    std::vector<int> word; // letters: 2k is generator k, 2k+1 its inverse
};

class FuchsianGroup {
  public:
    static constexpr std::size_t kDefaultCap = 1'000'000;

    FuchsianGroup(std::vector<MobiusAutomorphism> generators, int max_word_length,
                  std::size_t element_cap = kDefaultCap);

    /// Reads {generators: [{a_re, a_im, c_re, c_im}], max_word_length, element_cap}.
    static FuchsianGroup from_json_file(const std::string& path);
    static FuchsianGroup from_json_text(const std::string& text);

    const std::vector<MobiusAutomorphism>& generators() const noexcept { return generators_; }
    int max_word_length() const noexcept { return max_word_length_; }
    std::size_t element_cap() const noexcept { return element_cap_; }

    FuchsianGroup with_word_length(int max_word_length) const;

    /// Non-identity elements in canonical order (word length, then
    /// lexicographic). Enumerated lazily once; throws EllipticElement or
    /// GrowthOverflow.
    const std::vector<GroupElement>& elements() const;

  private:
    std::vector<MobiusAutomorphism> generators_;
    int max_word_length_;
    std::size_t element_cap_;
    mutable std::shared_ptr<const std::vector<GroupElement>> cache_;
};

/// All reduced words up to the group's word-length bound, deduplicated at
/// coefficient distance 1e-9, identity excluded.
std::vector<GroupElement> enumerate(const FuchsianGroup& group);

/// min over enumerated g (and the identity) of h(z1, g z2). An upper bound for
/// the true quotient distance.
double quotient_distance(const DiskPoint& z1, const DiskPoint& z2, const FuchsianGroup& group);

enum class Membership { inside, boundary, outside };

std::string to_string(Membership m);

class DirichletDomain {
  public:
    static constexpr double kTau = 1e-9;

    DirichletDomain(const DiskPoint& center, const FuchsianGroup& group);

    const DiskPoint& center() const noexcept { return center_; }
    const std::vector<MobiusAutomorphism>& constraints() const noexcept { return constraints_; }
    const std::vector<Complex>& translates() const noexcept { return translates_; }

  private:
    DiskPoint center_;
    std::vector<MobiusAutomorphism> constraints_;
    std::vector<Complex> translates_; // g(center) per constraint
};

Membership dirichlet_membership(const DiskPoint& z, const DirichletDomain& dom);

struct Projection {
    DiskPoint representative;
    MobiusAutomorphism word; // representative = word(z)
    int steps = 0;
};

/// Greedy reduction into the domain; each step strictly decreases the
/// distance to the center. Throws NotReduced when the step budget is spent.
Projection project_to_fundamental(const DiskPoint& z, const FuchsianGroup& group, const DirichletDomain& dom);

/// Half the minimal displacement of z0 over enumerated elements, +infinity
/// for the trivial group.
double injectivity_radius(const DiskPoint& z0, const FuchsianGroup& group);

struct IsometryCheck {
    std::size_t samples = 0;
    double max_deviation = 0.0;
};

class NormalNeighborhood {
  public:
    /// radius must be positive and below injectivity_radius(center)/2, which
    /// is where the quotient distance provably equals the disk distance.
    NormalNeighborhood(const DiskPoint& center, double radius, const FuchsianGroup& group);

    const DiskPoint& center() const noexcept { return center_; }
    double radius() const noexcept { return radius_; }
    double injectivity() const noexcept { return injectivity_; }

    /// Samples random pairs inside the ball and compares quotient_distance
    /// against hyp_distance.
    IsometryCheck sample_isometry(std::size_t pairs, unsigned seed) const;

  private:
    DiskPoint center_;
    double radius_;
    double injectivity_;
    FuchsianGroup group_;
};

/// Built-in groups: hyperbolic cyclic group of the given translation length,
/// and the regular-octagon genus-2 surface group.
FuchsianGroup cyclic_group(double translation_length, int max_word_length);
FuchsianGroup genus2_group(int max_word_length);

} // namespace modlab
