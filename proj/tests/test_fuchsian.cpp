#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "modlab/error.hpp"
#include "modlab/fuchsian.hpp"

using namespace modlab;

namespace {

// Every word of length <= n over generators and inverses, multiplied out
// letter by letter, deduplicated by brute force; identity dropped.
std::vector<MobiusAutomorphism> brute_force_elements(const std::vector<MobiusAutomorphism>& gens, int n) {
    std::vector<MobiusAutomorphism> letters;
    for (const auto& g : gens) {
        letters.push_back(g);
        letters.push_back(mobius_invert(g));
    }
    std::vector<MobiusAutomorphism> frontier{MobiusAutomorphism::identity()}, all;
    for (int len = 1; len <= n; ++len) {
        std::vector<MobiusAutomorphism> next;
        for (const auto& w : frontier)
            for (const auto& l : letters) next.push_back(w * l);
        for (const auto& g : next) {
            if (g.is_identity(1e-9)) continue;
            bool dup = false;
            for (const auto& h : all) dup = dup || g.coefficient_distance(h) < 1e-9;
            if (!dup) all.push_back(g);
        }
        frontier = std::move(next);
    }
    return all;
}

Complex on_axis(double r) { return {euclid_radius(std::abs(r)) * (r < 0 ? -1.0 : 1.0), 0.0}; }

} // namespace

TEST_CASE("cyclic enumeration") {
    const double L = 1.0;
    const FuchsianGroup G = cyclic_group(L, 3);
    const auto& el = G.elements();
    REQUIRE(el.size() == 6);
    std::vector<double> shifts;
    for (const auto& e : el) shifts.push_back(hyp_distance(Complex(0.0, 0.0), e.g.eval(0.0)));
    std::sort(shifts.begin(), shifts.end());
    for (int k = 0; k < 3; ++k) {
        CHECK(shifts[2 * k] == doctest::Approx(L * (k + 1)).epsilon(1e-12));
        CHECK(shifts[2 * k + 1] == doctest::Approx(L * (k + 1)).epsilon(1e-12));
    }
    CHECK(el.front().word.size() == 1);
    CHECK(el.back().word.size() == 3);
}

TEST_CASE("empty generator list") {
    const FuchsianGroup G({}, 4);
    CHECK(G.elements().empty());
    const DiskPoint a(0.1, 0.2), b(-0.3, 0.4);
    CHECK(quotient_distance(a, b, G) == hyp_distance(a, b));
    CHECK(std::isinf(injectivity_radius(a, G)));
}

TEST_CASE("two free generators agree with brute force") {
    const std::vector<MobiusAutomorphism> gens{MobiusAutomorphism::translation(2.0, 0.0),
                                              MobiusAutomorphism::translation(2.0, std::numbers::pi / 2)};
    const FuchsianGroup G(gens, 2);
    const auto oracle = brute_force_elements(gens, 2);
    REQUIRE(G.elements().size() == oracle.size());
    CHECK(G.elements().size() == 16);
    std::size_t len2 = 0;
    for (const auto& e : G.elements()) {
        len2 += e.word.size() == 2;
        bool found = false;
        for (const auto& o : oracle) found = found || e.g.coefficient_distance(o) < 1e-9;
        CHECK(found);
    }
    CHECK(len2 == 12);
}

TEST_CASE("genus two group") {
    const FuchsianGroup G = genus2_group(3);
    const auto& b = G.generators();
    REQUIRE(b.size() == 4);
    const auto rel = b[0] * mobius_invert(b[1]) * b[2] * mobius_invert(b[3]) * mobius_invert(b[0]) * b[1] *
                     mobius_invert(b[2]) * b[3];
    CHECK(rel.is_identity(1e-9));
    CHECK(G.elements().size() == brute_force_elements(b, 3).size());
    for (const auto& e : G.elements()) CHECK(std::abs(e.g.half_trace()) >= 1.0 + 1e-12);
}

TEST_CASE("enumeration errors") {
    CHECK_THROWS_AS(FuchsianGroup({MobiusAutomorphism::rotation(0.5)}, 2).elements(), EllipticElement);
    CHECK_THROWS_AS(FuchsianGroup(genus2_group(4).generators(), 4, 100).elements(), GrowthOverflow);
    CHECK_THROWS_AS(FuchsianGroup::from_json_text("{\"generators\": 3}"), ConfigError);
    CHECK_THROWS_AS(FuchsianGroup::from_json_text("not json"), ConfigError);
    const auto G = FuchsianGroup::from_json_text(
        R"({"generators": [{"a_re": 1.5, "a_im": 0, "c_re": 1.118033988749895, "c_im": 0}], "max_word_length": 2})");
    CHECK(G.elements().size() == 4);
}

TEST_CASE("quotient distance") {
    const double L = 1.0;
    const FuchsianGroup G = cyclic_group(L, 4);
    const DiskPoint z1(on_axis(0.45)), z2(on_axis(-0.45));
    CHECK(hyp_distance(z1, z2) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(quotient_distance(z1, z2, G) == doctest::Approx(0.1).epsilon(1e-10));

    const auto& g = G.elements()[0].g;
    const DiskPoint w(0.2, 0.3);
    CHECK(quotient_distance(w, mobius_apply(g, w), G) < 1e-10);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    const FuchsianGroup H = genus2_group(2);
    for (int i = 0; i < 40; ++i) {
        const DiskPoint a(u(rng), u(rng)), b(u(rng), u(rng)), c(u(rng), u(rng));
        const double ab = quotient_distance(a, b, H);
        CHECK(ab <= hyp_distance(a, b) + 1e-12);
        CHECK(std::abs(ab - quotient_distance(b, a, H)) < 1e-10);
        CHECK(quotient_distance(a, c, H) <= ab + quotient_distance(b, c, H) + 1e-10);
    }
}

TEST_CASE("quotient distance stabilizes as words grow") {
    const DiskPoint a(0.5, 0.1), b(-0.55, -0.2);
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 8; ++n) {
        const double d = quotient_distance(a, b, cyclic_group(0.8, n));
        CHECK(d <= prev + 1e-15);
        prev = d;
    }
    CHECK(prev < hyp_distance(a, b));
}

TEST_CASE("dirichlet membership") {
    const FuchsianGroup G = cyclic_group(1.0, 4);
    const DiskPoint zeta(0.0, 0.0);
    const DirichletDomain dom(zeta, G);
    CHECK(dirichlet_membership(zeta, dom) == Membership::inside);
    const auto& g = G.elements()[0].g;
    const Complex gz = g.eval(zeta.z());
    // midpoint of the geodesic from zeta to g zeta
    const Polyline geo = geodesic(zeta, DiskPoint(gz), 3);
    CHECK(dirichlet_membership(geo.vertices()[1], dom) == Membership::boundary);
    const DiskPoint inner(0.05, 0.1);
    CHECK(dirichlet_membership(mobius_apply(g, inner), dom) == Membership::outside);
    CHECK(to_string(Membership::boundary) == "boundary");
}

TEST_CASE("projection into the fundamental domain") {
    const FuchsianGroup G = cyclic_group(1.0, 6);
    const DirichletDomain dom(DiskPoint(0.0, 0.0), G);
    const DiskPoint w(0.05, 0.2);

    const auto same = project_to_fundamental(w, G, dom);
    CHECK(same.representative == w);
    CHECK(same.steps == 0);

    const auto g = MobiusAutomorphism::translation(1.0);
    MobiusAutomorphism deep;
    for (int i = 0; i < 5; ++i) deep = deep * g;
    const DiskPoint z = mobius_apply(deep, w);
    const auto p = project_to_fundamental(z, G, dom);
    CHECK(std::abs(p.representative.z() - w.z()) < 1e-9);
    CHECK(p.steps <= 5);
    CHECK(dirichlet_membership(p.representative, dom) != Membership::outside);
    CHECK(quotient_distance(p.representative, z, G) < 1e-10);

    const FuchsianGroup short_group = cyclic_group(1.0, 1);
    const DirichletDomain small(DiskPoint(0.0, 0.0), short_group);
    CHECK_THROWS_AS(project_to_fundamental(z, short_group, small), NotReduced);
}

TEST_CASE("injectivity radius and normal neighborhoods") {
    const double L = 1.2;
    const FuchsianGroup G = cyclic_group(L, 4);
    CHECK(injectivity_radius(DiskPoint(0.0, 0.0), G) == doctest::Approx(L / 2).epsilon(1e-12));
    CHECK(injectivity_radius(DiskPoint(0.3, 0.0), G) == doctest::Approx(L / 2).epsilon(1e-12));
    CHECK(injectivity_radius(DiskPoint(0.0, 0.4), G) >= L / 2);

    const FuchsianGroup H = genus2_group(3);
    const DiskPoint c(0.1, -0.05);
    const double inj = injectivity_radius(c, H);
    CHECK_THROWS_AS(NormalNeighborhood(c, inj, H), PreconditionError);
    const NormalNeighborhood nb(c, 0.95 * inj / 2, H);
    const auto check = nb.sample_isometry(300, 17);
    CHECK(check.samples == 300);
    CHECK(check.max_deviation < 1e-10);
}
