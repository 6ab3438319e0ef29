#include "modlab/fuchsian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "modlab/error.hpp"

namespace modlab {

namespace {

constexpr double kDedupTol = 1e-9;
constexpr double kEllipticMargin = 1e-12;
constexpr double kBucket = 1e-6;

// Sign-canonical coefficients: (a, c) and (-a, -c) are the same map.
std::array<double, 4> canonical(const MobiusAutomorphism& g) {
    Complex a = g.a(), c = g.c();
    if (a.real() < 0.0 || (a.real() == 0.0 && a.imag() < 0.0)) {
        a = -a;
        c = -c;
    }
    return {a.real(), a.imag(), c.real(), c.imag()};
}

struct KeyHash {
    std::size_t operator()(const std::array<long long, 4>& k) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
        return h;
    }
};

// Spatial hash over canonical coefficients; a query inspects the 3^4
// neighboring buckets so near-bucket-boundary duplicates are still found.
class ElementIndex {
  public:
    bool contains(const MobiusAutomorphism& g, const std::vector<MobiusAutomorphism>& stored) const {
        const auto key = key_of(g);
        std::array<long long, 4> probe{};
        for (int n = 0; n < 81; ++n) {
            int m = n;
            for (int d = 0; d < 4; ++d) {
                probe[d] = key[d] + (m % 3) - 1;
                m /= 3;
            }
            const auto it = buckets_.find(probe);
            if (it == buckets_.end()) continue;
            for (std::size_t idx : it->second)
                if (stored[idx].coefficient_distance(g) < kDedupTol) return true;
        }
        return false;
    }

    void insert(const MobiusAutomorphism& g, std::size_t idx) { buckets_[key_of(g)].push_back(idx); }

  private:
    static std::array<long long, 4> key_of(const MobiusAutomorphism& g) {
        const auto c = canonical(g);
        std::array<long long, 4> k{};
        for (int d = 0; d < 4; ++d) k[d] = static_cast<long long>(std::floor(c[d] / kBucket));
        return k;
    }

    std::unordered_map<std::array<long long, 4>, std::vector<std::size_t>, KeyHash> buckets_;
};

double parse_double(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError(std::string("group file: missing number '") + key + "'");
    return j.at(key).get<double>();
}

} // namespace

FuchsianGroup::FuchsianGroup(std::vector<MobiusAutomorphism> generators, int max_word_length, std::size_t element_cap)
    : generators_(std::move(generators)), max_word_length_(max_word_length), element_cap_(element_cap) {
    require(max_word_length_ >= 1, "max_word_length must be >= 1");
    require(element_cap_ >= 1, "element_cap must be >= 1");
}

FuchsianGroup FuchsianGroup::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("group file: ") + e.what());
    }
    if (!j.is_object() || !j.contains("generators") || !j.at("generators").is_array())
        throw ConfigError("group file: 'generators' array required");
    std::vector<MobiusAutomorphism> gens;
    for (const auto& g : j.at("generators")) {
        const Complex a(parse_double(g, "a_re"), parse_double(g, "a_im"));
        const Complex c(parse_double(g, "c_re"), parse_double(g, "c_im"));
        try {
            gens.emplace_back(a, c);
        } catch (const PreconditionError& e) {
            throw ConfigError(std::string("group file: ") + e.what());
        }
    }
    const int len = j.value("max_word_length", 4);
    const std::size_t cap = j.value("element_cap", kDefaultCap);
    if (len < 1 || cap < 1) throw ConfigError("group file: max_word_length and element_cap must be >= 1");
    return FuchsianGroup(std::move(gens), len, cap);
}

FuchsianGroup FuchsianGroup::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open group file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

FuchsianGroup FuchsianGroup::with_word_length(int max_word_length) const {
    return FuchsianGroup(generators_, max_word_length, element_cap_);
}

const std::vector<GroupElement>& FuchsianGroup::elements() const {
    if (!cache_) cache_ = std::make_shared<const std::vector<GroupElement>>(enumerate(*this));
    return *cache_;
}

std::vector<GroupElement> enumerate(const FuchsianGroup& group) {
    const auto& gens = group.generators();
    std::vector<MobiusAutomorphism> letters;
    for (const auto& g : gens) {
        letters.push_back(g);
        letters.push_back(mobius_invert(g));
    }

    std::vector<GroupElement> out;
    std::vector<MobiusAutomorphism> stored{MobiusAutomorphism::identity()};
    ElementIndex index;
    index.insert(stored.front(), 0);

    // Words whose element was new; duplicates are pruned since every
    // extension of a duplicate is reachable from its earlier twin.
    std::vector<GroupElement> frontier{GroupElement{MobiusAutomorphism::identity(), {}}};
    for (int len = 1; len <= group.max_word_length() && !frontier.empty(); ++len) {
        std::vector<GroupElement> next;
        for (const auto& w : frontier) {
            for (int l = 0; l < static_cast<int>(letters.size()); ++l) {
                if (!w.word.empty() && (w.word.back() ^ 1) == l) continue;
                GroupElement e{w.g * letters[static_cast<std::size_t>(l)], w.word};
                e.word.push_back(l);
                if (index.contains(e.g, stored)) continue;
                if (std::abs(e.g.half_trace()) < 1.0 + kEllipticMargin) {
                    std::ostringstream os;
                    os << "enumerated element of word length " << e.word.size()
                       << " is elliptic or parabolic (|Re a| = " << std::abs(e.g.half_trace()) << ")";
                    throw EllipticElement(os.str());
                }
                index.insert(e.g, stored.size());
                stored.push_back(e.g);
                out.push_back(e);
                next.push_back(std::move(e));
                if (out.size() > group.element_cap())
                    throw GrowthOverflow("enumeration exceeded element cap " + std::to_string(group.element_cap()));
            }
        }
        frontier = std::move(next);
    }
    return out;
}

double quotient_distance(const DiskPoint& z1, const DiskPoint& z2, const FuchsianGroup& group) {
    double best = hyp_distance(z1, z2);
    for (const auto& e : group.elements()) best = std::min(best, hyp_distance(z1.z(), e.g.eval(z2.z())));
    return best;
}

std::string to_string(Membership m) {
    switch (m) {
    case Membership::inside: return "inside";
    case Membership::boundary: return "boundary";
    case Membership::outside: return "outside";
    }
    return "unknown";
}

DirichletDomain::DirichletDomain(const DiskPoint& center, const FuchsianGroup& group) : center_(center) {
    for (const auto& e : group.elements()) {
        // Elements are already distinct and the action is free, so the
        // translates are distinct as well.
        const Complex t = e.g.eval(center.z());
        if (hyp_distance(center.z(), t) <= kTau)
            throw PreconditionError("Dirichlet center is fixed by a non-identity element");
        constraints_.push_back(e.g);
        translates_.push_back(t);
    }
}

Membership dirichlet_membership(const DiskPoint& z, const DirichletDomain& dom) {
    const double self = hyp_distance(z, dom.center());
    bool on_boundary = false;
    for (const Complex t : dom.translates()) {
        const double other = hyp_distance(z.z(), t);
        if (self > other + DirichletDomain::kTau) return Membership::outside;
        if (self >= other - DirichletDomain::kTau) on_boundary = true;
    }
    return on_boundary ? Membership::boundary : Membership::inside;
}

Projection project_to_fundamental(const DiskPoint& z, const FuchsianGroup& group, const DirichletDomain& dom) {
    Projection p{z, MobiusAutomorphism::identity(), 0};
    const std::size_t budget = std::max<std::size_t>(dom.constraints().size(), 1);
    const auto& cons = dom.constraints();
    while (true) {
        const double self = hyp_distance(p.representative, dom.center());
        std::size_t best = cons.size();
        double best_d = self - DirichletDomain::kTau;
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const double d = hyp_distance(p.representative.z(), dom.translates()[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (best == cons.size()) return p;
        if (static_cast<std::size_t>(p.steps) >= budget)
            throw NotReduced("point not reduced into the Dirichlet domain within " + std::to_string(budget) +
                             " steps (word length bound " + std::to_string(group.max_word_length()) + ")");
        // h(g^{-1} z, center) = h(z, g center) < h(z, center).
        const MobiusAutomorphism step = mobius_invert(cons[best]);
        p.representative = mobius_apply(step, p.representative);
        p.word = step * p.word;
        ++p.steps;
    }
}

double injectivity_radius(const DiskPoint& z0, const FuchsianGroup& group) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : group.elements()) best = std::min(best, 0.5 * hyp_distance(z0.z(), e.g.eval(z0.z())));
    return best;
}

NormalNeighborhood::NormalNeighborhood(const DiskPoint& center, double radius, const FuchsianGroup& group)
    : center_(center), radius_(radius), injectivity_(injectivity_radius(center, group)), group_(group) {
    require(radius > 0.0 && std::isfinite(radius), "normal neighborhood radius must be positive and finite");
    require(radius < 0.5 * injectivity_, "normal neighborhood radius must be below half the injectivity radius");
}

IsometryCheck NormalNeighborhood::sample_isometry(std::size_t pairs, unsigned seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> rad(0.0, radius_);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
    const MobiusAutomorphism back = mobius_invert(mobius_to_zero(center_));
    auto sample = [&] { return mobius_apply(back, DiskPoint(std::polar(euclid_radius(rad(rng)), ang(rng)))); };
    IsometryCheck out;
    for (std::size_t i = 0; i < pairs; ++i) {
        const DiskPoint a = sample();
        const DiskPoint b = sample();
        out.max_deviation = std::max(out.max_deviation, std::abs(quotient_distance(a, b, group_) - hyp_distance(a, b)));
        ++out.samples;
    }
    return out;
}

FuchsianGroup cyclic_group(double translation_length, int max_word_length) {
    return FuchsianGroup({MobiusAutomorphism::translation(translation_length)}, max_word_length);
}

FuchsianGroup genus2_group(int max_word_length) {
    // Side pairings of the regular octagon with interior angles pi/4:
    // cosh(l/2) = cot(pi/8) = 1 + sqrt 2, generators rotated by k pi/4.
    const double ch = 1.0 + std::numbers::sqrt2;
    const double sh = std::sqrt(ch * ch - 1.0);
    std::vector<MobiusAutomorphism> gens;
    for (int k = 0; k < 4; ++k) gens.emplace_back(Complex(ch, 0.0), std::polar(sh, k * std::numbers::pi / 4.0));
    return FuchsianGroup(std::move(gens), max_word_length);
}

} // namespace modlab
