#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "modlab/error.hpp"
#include "modlab/mappings.hpp"

using namespace modlab;

namespace {

constexpr double kPi = std::numbers::pi;

Complex random_point(std::mt19937_64& rng, double rmin, double rmax) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return std::polar(rmin + (rmax - rmin) * u(rng), 2.0 * kPi * u(rng));
}

double wirtinger_error(const Wirtinger& a, const Wirtinger& b) {
    return std::abs(a.f_z - b.f_z) + std::abs(a.f_zbar - b.f_zbar);
}

} // namespace

TEST_CASE("evaluation of the sample maps") {
    const Complex z = std::polar(0.6, 0.7);
    CHECK(std::abs(SampleMap::winding(3).eval(z) - std::polar(0.6, 2.1)) < 1e-15);
    CHECK(std::abs(SampleMap::radial_stretch(2.0).eval(z) - std::polar(0.36, 0.7)) < 1e-15);
    CHECK(SampleMap::fold().eval(Complex(-0.3, 0.2)) == Complex(0.3, 0.2));
    CHECK(SampleMap::identity().eval(z) == z);
    CHECK(std::abs(std::abs(SampleMap::spiral().eval(z)) - 0.6) < 1e-15);
    CHECK(SampleMap::winding(4).eval(Complex(0.0, 0.0)) == Complex(0.0, 0.0));
    const auto comp = SampleMap::compose({SampleMap::winding(2), SampleMap::radial_stretch(2.0)});
    CHECK(std::abs(comp.eval(z) - std::polar(0.36, 1.4)) < 1e-15);
    CHECK_THROWS_AS(SampleMap::winding(0), PreconditionError);
    CHECK_THROWS_AS(SampleMap::radial_stretch(0.5), PreconditionError);
}

TEST_CASE("closed-form Wirtinger derivatives") {
    std::mt19937_64 rng(1);
    for (int k : {2, 3, 5}) {
        for (int i = 0; i < 20; ++i) {
            const Complex z = random_point(rng, 0.1, 0.9);
            const Complex u = z / std::abs(z);
            const auto w = SampleMap::winding(k).analytic(z);
            REQUIRE(w);
            CHECK(std::abs(w->f_z - 0.5 * (k + 1.0) * std::pow(u, k - 1)) < 1e-14);
            CHECK(std::abs(w->f_zbar - 0.5 * (1.0 - k) * std::pow(u, k + 1)) < 1e-14);
            CHECK(w->jacobian() == doctest::Approx(double(k)).epsilon(1e-13));
        }
    }
    const auto m = MobiusAutomorphism::translation(0.8, 0.3);
    const Complex z(0.2, -0.1);
    const auto w = SampleMap::mobius(m).analytic(z);
    REQUIRE(w);
    CHECK(std::abs(w->f_z - 1.0 / std::pow(std::conj(m.c()) * z + std::conj(m.a()), 2)) < 1e-14);
    CHECK(w->f_zbar == Complex(0.0, 0.0));
}

TEST_CASE("finite differences converge at second order") {
    const DiskPoint z(0.35, -0.4);
    for (const auto& f : {SampleMap::mobius(MobiusAutomorphism::translation(0.7, 1.0)), SampleMap::radial_stretch(2.5),
                          SampleMap::winding(3), SampleMap::spiral()}) {
        const Wirtinger exact = *f.analytic(z.z());
        const double e1 = wirtinger_error(finite_difference_wirtinger(f, z.z(), 1e-3), exact);
        const double e2 = wirtinger_error(finite_difference_wirtinger(f, z.z(), 5e-4), exact);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
        const auto rep = wirtinger(f, z);
        CHECK(rep.analytic);
        CHECK(wirtinger_error(rep.value, rep.finite_difference) < 1e-8);
    }
    CHECK(default_step(Complex(0.0, 0.0)) == 1e-5);
    CHECK(default_step(Complex(0.9, 0.0)) == doctest::Approx(1e-6));
}

TEST_CASE("dilatation of the branched models") {
    std::mt19937_64 rng(2);
    for (int k : {2, 3, 5}) {
        for (int i = 0; i < 10; ++i) {
            const DiskPoint z(random_point(rng, 0.05, 0.9));
            const auto wk = SampleMap::winding(k), rk = SampleMap::radial_stretch(k);
            CHECK(dilatation(wk, z).K == doctest::Approx(double(k)).epsilon(1e-6));
            CHECK(dilatation(rk, z).K == doctest::Approx(double(k)).epsilon(1e-6));
            CHECK(dilatation_from(wirtinger(wk, z).finite_difference).K == doctest::Approx(double(k)).epsilon(1e-4));
            CHECK(dilatation_from(wirtinger(rk, z).finite_difference).K == doctest::Approx(double(k)).epsilon(1e-4));
        }
    }
    CHECK(dilatation(SampleMap::identity(), DiskPoint(0.3, 0.3)).K == 1.0);
    // norm 0: K = 1 by convention
    CHECK(dilatation(SampleMap::radial_stretch(2.0), DiskPoint(0.0, 0.0)).K == 1.0);
    // fold on x = 0: J = 0 < norm
    const auto fold0 = dilatation(SampleMap::fold(), DiskPoint(0.0, 0.3));
    CHECK(fold0.infinite);
    CHECK(dilatation(SampleMap::fold(), DiskPoint(-0.2, 0.3)).K == 1.0);
    // spiral: dilatation grows towards the boundary
    CHECK(dilatation(SampleMap::spiral(), DiskPoint(0.999, 0.0)).K > dilatation(SampleMap::spiral(), DiskPoint(0.5, 0.0)).K);
}

TEST_CASE("dilatation is invariant under Mobius pre- and post-composition") {
    std::mt19937_64 rng(3);
    const auto g1 = MobiusAutomorphism::translation(0.3, 0.4), g2 = MobiusAutomorphism::translation(0.5, 2.0);
    for (const auto& f : {SampleMap::winding(3), SampleMap::radial_stretch(2.0), SampleMap::spiral()}) {
        const auto h = SampleMap::compose({SampleMap::mobius(g1), f, SampleMap::mobius(g2)});
        for (int i = 0; i < 10; ++i) {
            const Complex z = random_point(rng, 0.1, 0.6);
            const Complex w = g1.eval(z);
            if (std::abs(w) < 0.05) continue;
            const double Kh = dilatation_from(finite_difference_wirtinger(h, z, default_step(z))).K;
            const double Kf = dilatation_from(finite_difference_wirtinger(f, w, default_step(w))).K;
            CHECK(std::abs(Kh - Kf) < 1e-6);
        }
    }
}

TEST_CASE("Jacobian composition law") {
    std::mt19937_64 rng(4);
    const auto f = SampleMap::radial_stretch(1.7);
    const auto g = SampleMap::compose({SampleMap::spiral(), SampleMap::mobius(MobiusAutomorphism::translation(0.4, 1.0))});
    const auto gf = SampleMap::compose({f, g});
    for (int i = 0; i < 50; ++i) {
        const Complex z = random_point(rng, 0.05, 0.9);
        const double J = gf.analytic(z)->jacobian();
        const double Jg = g.analytic(f.eval(z))->jacobian(), Jf = f.analytic(z)->jacobian();
        CHECK(std::abs(J - Jg * Jf) < 1e-8 * std::max(1.0, std::abs(J)));
    }
}

TEST_CASE("multiplicity") {
    std::mt19937_64 rng(5);
    std::vector<DiskPoint> targets;
    for (int i = 0; i < 10; ++i) targets.emplace_back(random_point(rng, 0.1, 0.8));
    const auto mob = multiplicity(SampleMap::mobius(MobiusAutomorphism::translation(0.5, 0.2)), targets);
    CHECK(mob.supremum == 1);
    CHECK_FALSE(mob.incomplete_search);

    const auto w3 = multiplicity(SampleMap::winding(3), targets);
    CHECK(w3.supremum == 3);
    for (const int c : w3.counts) CHECK(c == 3);
    CHECK_FALSE(w3.incomplete_search);

    // closed-form preimages of 0.5: radius 0.5, angles 2 pi j / 3
    const auto f = SampleMap::winding(3);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(f.eval(std::polar(0.5, 2.0 * kPi * j / 3.0)) - 0.5) < 1e-15);
    CHECK(multiplicity(f, {DiskPoint(0.5, 0.0)}).counts[0] == 3);
    CHECK(multiplicity(f, {DiskPoint(0.0, 0.0)}).counts[0] == 1);
    CHECK(multiplicity(SampleMap::winding(2), targets).supremum == 2);
}

TEST_CASE("finite distortion") {
    const auto mob = finite_distortion_check(SampleMap::mobius(MobiusAutomorphism::translation(0.5)), 32);
    CHECK(mob.pass);
    CHECK(mob.violations.empty());
    CHECK(mob.points > 0);
    CHECK(finite_distortion_check(SampleMap::winding(3), 32).pass);
    const auto fold = finite_distortion_check(SampleMap::fold(), 32);
    CHECK_FALSE(fold.pass);
    for (const auto& z : fold.violations) CHECK(z.re() == 0.0);
    CHECK(finite_distortion_check(SampleMap::fold(), 64).violations.size() > fold.violations.size());
    CHECK_THROWS_AS(finite_distortion_check(SampleMap::fold(), 8), PreconditionError);

    const std::string csv = distortion_csv(SampleMap::fold(), 16);
    CHECK(csv.rfind("x,y,abs_fz,abs_fzbar,K,J\n", 0) == 0);
    CHECK(csv.find(",inf,") != std::string::npos);
}

TEST_CASE("map specifications") {
    CHECK(SampleMap::from_spec("winding:3").kind() == SampleMap::Kind::winding);
    CHECK(SampleMap::from_spec("radial:2").kind() == SampleMap::Kind::radial_stretch);
    CHECK(SampleMap::from_spec("fold").kind() == SampleMap::Kind::fold);
    CHECK(SampleMap::from_spec("winding:2|rotation:0.5").kind() == SampleMap::Kind::composition);
    const auto m = SampleMap::from_spec("mobius:1.5,0,1.118033988749895,0");
    CHECK(m.kind() == SampleMap::Kind::mobius);
    const auto j = SampleMap::from_json(nlohmann::json{{"kind", "winding"}, {"k", 3}});
    CHECK(j.to_json() == nlohmann::json{{"kind", "winding"}, {"k", 3}});
    const auto round = SampleMap::from_json(SampleMap::from_spec("spiral|radial:2").to_json());
    CHECK(std::abs(round.eval(Complex(0.3, 0.2)) - SampleMap::from_spec("spiral|radial:2").eval(Complex(0.3, 0.2))) < 1e-15);

    CHECK_THROWS_AS(SampleMap::from_spec("winding"), ConfigError);
    CHECK_THROWS_AS(SampleMap::from_spec("winding:2.5"), ConfigError);
    CHECK_THROWS_AS(SampleMap::from_spec("warp:2"), ConfigError);
    CHECK_THROWS_AS(SampleMap::from_spec("mobius:1,0"), ConfigError);
    CHECK_THROWS_AS(SampleMap::from_json(nlohmann::json{{"kind", "radial_stretch"}, {"k", 0.5}}), ConfigError);
    CHECK(SampleMap::winding(2).preserves_centered_circles());
    CHECK_FALSE(SampleMap::fold().preserves_centered_circles());
    CHECK_FALSE(SampleMap::mobius(MobiusAutomorphism::translation(0.3)).preserves_centered_circles());
}

TEST_CASE("pushforward of circle families") {
    const RingSpec ring(0.5, 1.5);
    const auto dom = DiscretizedDomain::polar(ring, 8, 32);
    const auto& e = std::get<PolarGrid>(dom.geometry()).radial_edges;
    std::vector<double> radii;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) radii.push_back(0.5 * (e[i] + e[i + 1]));
    const auto circles = concentric_circles(radii, 256);
    for (const auto& c : circles) CHECK(winding_number(c) == 1);

    const auto base = rasterize_family(circles, dom, FamilyKind::circle_family);
    const auto id = pushforward_family(SampleMap::identity(), circles, dom);
    REQUIRE(id.curves.size() == base.curves.size());
    for (std::size_t i = 0; i < id.curves.size(); ++i) {
        CHECK(id.curves[i].multiplicity == 1);
        REQUIRE(id.curves[i].incidences.size() == base.curves[i].incidences.size());
        for (std::size_t k = 0; k < id.curves[i].incidences.size(); ++k)
            CHECK(id.curves[i].incidences[k].length_hyp ==
                  doctest::Approx(base.curves[i].incidences[k].length_hyp).epsilon(1e-12));
    }

    const auto w2 = pushforward_family(SampleMap::winding(2), circles, dom);
    for (std::size_t i = 0; i < w2.curves.size(); ++i) {
        CHECK(w2.curves[i].multiplicity == 2);
        double a = 0.0, b = 0.0;
        for (const auto& inc : w2.curves[i].incidences) a += inc.length_euclid;
        for (const auto& inc : base.curves[i].incidences) b += inc.length_euclid;
        // the doubled circle is stored once with multiplicity 2
        CHECK(a == doctest::Approx(b * std::sin(kPi / 128) /
                                   (2.0 * std::sin(kPi / 256))).epsilon(1e-9));
    }

    const auto images = map_polylines(SampleMap::radial_stretch(2.0), circles);
    for (std::size_t i = 0; i < images.size(); ++i)
        for (const auto& v : images[i].vertices())
            CHECK(hyp_radius(v.abs()) == doctest::Approx(hyp_radius(radii[i] * radii[i])).epsilon(1e-12));

    const Polyline edge({DiskPoint(1.0 - 1e-8, 0.0), DiskPoint(0.0, 1.0 - 1e-8)});
    CHECK_THROWS_AS(map_polylines(SampleMap::mobius(MobiusAutomorphism::translation(5.0)), {edge}), ChartOverflow);
}
