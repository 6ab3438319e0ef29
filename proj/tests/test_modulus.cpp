#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "modlab/error.hpp"
#include "modlab/modulus.hpp"

using namespace modlab;

namespace {

constexpr double kPi = std::numbers::pi;

double sum_lengths(const Curve& c, bool hyp) {
    double s = 0.0;
    for (const auto& inc : c.incidences) s += hyp ? inc.length_hyp : inc.length_euclid;
    return s;
}

// Minimum of sum phi_i a_i^q m_i subject to sum a_i m_i = 1 by coordinate
// descent on pairs (each pair update is a 1-D convex golden-section search).
double direct_minimum(const std::vector<Atom>& phi, double q) {
    const std::size_t n = phi.size();
    double total = 0.0;
    for (const auto& a : phi) total += a.mass;
    std::vector<double> alpha(n, 1.0 / total);
    auto objective = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += phi[i].value * std::pow(alpha[i], q) * phi[i].mass;
        return s;
    };
    for (int sweep = 0; sweep < 200; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double budget = alpha[i] * phi[i].mass + alpha[j] * phi[j].mass;
                auto f = [&](double ai) {
                    const double aj = (budget - ai * phi[i].mass) / phi[j].mass;
                    return phi[i].value * std::pow(ai, q) * phi[i].mass + phi[j].value * std::pow(aj, q) * phi[j].mass;
                };
                double lo = 0.0, hi = budget / phi[i].mass;
                const double g = (std::sqrt(5.0) - 1.0) / 2.0;
                for (int it = 0; it < 200; ++it) {
                    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
                    if (f(x1) < f(x2))
                        hi = x2;
                    else
                        lo = x1;
                }
                alpha[i] = 0.5 * (lo + hi);
                alpha[j] = (budget - alpha[i] * phi[i].mass) / phi[j].mass;
            }
        }
    }
    return objective();
}

} // namespace

TEST_CASE("domain construction") {
    const RingSpec ring(0.5, 1.5);
    const auto dom = DiscretizedDomain::polar(ring, 10, 24);
    CHECK(dom.size() == 240);
    const auto& g = std::get<PolarGrid>(dom.geometry());
    CHECK(g.radial_edges.front() == doctest::Approx(euclid_radius(0.5)).epsilon(1e-15));
    CHECK(g.radial_edges.back() == doctest::Approx(euclid_radius(1.5)).epsilon(1e-15));
    // rows uniform in hyperbolic radius
    for (std::size_t i = 0; i < g.radial_edges.size(); ++i)
        CHECK(hyp_radius(g.radial_edges[i]) == doctest::Approx(0.5 + 0.1 * i).epsilon(1e-12));
    double total = 0.0;
    for (const auto& c : dom.cells()) {
        CHECK(c.area_euclid > 0.0);
        const double s = 1.0 - std::norm(c.center.z());
        CHECK(c.area_hyp == doctest::Approx(c.area_euclid * 4.0 / (s * s)).epsilon(1e-13));
        total += c.area_euclid;
    }
    CHECK(total == doctest::Approx(kPi * (std::pow(g.radial_edges.back(), 2) - std::pow(g.radial_edges.front(), 2))));
    CHECK(dom.locate(Complex(0.0, 0.0)) == std::nullopt);
    REQUIRE(dom.locate(dom.cells()[17].center.z()).has_value());
    CHECK(*dom.locate(dom.cells()[17].center.z()) == 17);

    CHECK_THROWS_AS(DiscretizedDomain::cartesian(Window{-0.9, 0.9, -0.9, 0.9}, 8, 8), PreconditionError);
    CHECK(DiscretizedDomain::cartesian(Window{-0.5, 0.5, -0.5, 0.5}, 8, 4).size() == 32);
}

TEST_CASE("rasterization lengths") {
    const RingSpec ring(0.5, 1.5);
    const auto dom = DiscretizedDomain::polar(ring, 20, 36);
    const auto& e = std::get<PolarGrid>(dom.geometry()).radial_edges;
    const auto radial = radial_segments(e.front(), e.back(), 36);
    REQUIRE(radial.size() == 36);
    const Curve c = rasterize(radial[3], dom);
    CHECK(c.incidences.size() == 20);
    CHECK(sum_lengths(c, false) == doctest::Approx(e.back() - e.front()).epsilon(1e-12));
    // midpoint rule per cell on 2/(1-r^2): close to the exact 1.0
    CHECK(sum_lengths(c, true) == doctest::Approx(1.0).epsilon(1e-3));

    const auto cart = DiscretizedDomain::cartesian(Window{-0.5, 0.5, -0.5, 0.5}, 16, 16);
    const double R = 0.3;
    const auto circ = concentric_circles({R}, 512);
    const Curve cc = rasterize(circ[0], cart);
    CHECK(sum_lengths(cc, false) == doctest::Approx(2.0 * 512 * R * std::sin(kPi / 512)).epsilon(1e-12));

    // pieces outside the grid are dropped
    const Polyline out({DiskPoint(0.8, 0.0), DiskPoint(0.9, 0.0)});
    CHECK(rasterize(out, cart).incidences.empty());
}

TEST_CASE("family validation") {
    const auto dom = DiscretizedDomain::cartesian(Window{-0.5, 0.5, -0.5, 0.5}, 4, 4);
    CurveFamily bad;
    bad.curves.push_back(Curve{{Incidence{99, 1.0, 1.0}}, 1});
    CHECK_THROWS_AS(bad.validate(dom), PreconditionError);
    CurveFamily empty_curve;
    empty_curve.curves.push_back(Curve{});
    CHECK_THROWS_AS(empty_curve.validate(dom), PreconditionError);
}

TEST_CASE("empty family") {
    const auto dom = DiscretizedDomain::cartesian(Window{-0.5, 0.5, -0.5, 0.5}, 4, 4);
    const auto r = modulus_discrete(CurveFamily{}, dom, Metric::euclidean);
    CHECK(r.value == 0.0);
    CHECK(r.extremal.rho == std::vector<double>(16, 0.0));
}

TEST_CASE("square modulus") {
    const Window w{-0.5, 0.5, -0.5, 0.5};
    const auto dom = DiscretizedDomain::cartesian(w, 128, 128);
    const auto fam = rasterize_family(horizontal_segments(w, 128), dom);
    const auto r = modulus_discrete(fam, dom, Metric::euclidean);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(r.max_constraint_violation <= 1e-4);
    CHECK(r.dual_bound <= r.value + 1e-12);
}

TEST_CASE("ring modulus and metric equivalence") {
    const RingSpec ring(0.5, 1.5);
    const double exact = ring_modulus_exact(ring);
    CHECK(exact == doctest::Approx(2.0 * kPi / std::log(std::tanh(0.75) / std::tanh(0.25))).epsilon(1e-14));
    CHECK(exact == doctest::Approx(6.59352003).epsilon(1e-8));

    const auto dom = DiscretizedDomain::polar(ring, 50, 150);
    const auto& e = std::get<PolarGrid>(dom.geometry()).radial_edges;
    const auto fam = rasterize_family(radial_segments(e.front(), e.back(), 150), dom);
    const auto h = modulus_discrete(fam, dom, Metric::hyperbolic);
    const auto eu = modulus_discrete(fam, dom, Metric::euclidean);
    CHECK(h.value == doctest::Approx(exact).epsilon(5e-2));
    CHECK(eu.value == doctest::Approx(h.value).epsilon(2e-2));
    CHECK(min_curve_integral(h.extremal, fam, Metric::hyperbolic) >= 1.0 - 1e-4);
    CHECK(density_energy(h.extremal, dom, Metric::hyperbolic) == doctest::Approx(h.value).epsilon(1e-12));

    const auto j = nlohmann::json::parse(h.to_json());
    CHECK(j.at("metric") == "hyperbolic");
    CHECK(j.at("value").get<double>() == h.value);
    CHECK(ring_modulus_exact(RingSpec(0.5, 0.5001)) > 1e4);
}

TEST_CASE("monotonicity, multiplicity and certificates") {
    const RingSpec ring(0.5, 1.5);
    const auto dom = DiscretizedDomain::polar(ring, 16, 48);
    const auto& e = std::get<PolarGrid>(dom.geometry()).radial_edges;
    std::vector<double> radii;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) radii.push_back(0.5 * (e[i] + e[i + 1]));
    const auto circles = concentric_circles(radii, 384);
    const auto fam = rasterize_family(circles, dom, FamilyKind::circle_family);
    const auto base = modulus_discrete(fam, dom, Metric::hyperbolic);

    CurveFamily sub = fam;
    sub.curves.resize(fam.curves.size() / 2);
    CHECK(modulus_discrete(sub, dom, Metric::hyperbolic).value <= base.value + 1e-9);

    CurveFamily triple = fam;
    for (auto& c : triple.curves) c.multiplicity = 3;
    CHECK(modulus_discrete(triple, dom, Metric::hyperbolic).value == doctest::Approx(base.value / 9.0).epsilon(1e-3));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    for (int trial = 0; trial < 20; ++trial) {
        DensityField p = base.extremal;
        for (auto& v : p.rho) v = std::max(0.0, v * (1.0 + u(rng)));
        const double m = min_curve_integral(p, fam, Metric::hyperbolic);
        for (auto& v : p.rho) v /= m;
        CHECK(density_energy(p, dom, Metric::hyperbolic) >= base.value - base.duality_gap - 1e-9);
    }
}

TEST_CASE("weighted circle family") {
    const RingSpec ring(0.5, 1.5);
    const auto one = circle_family_modulus(ring, ScalarField::constant(1.0), 32, 64);
    CHECK(one.value == doctest::Approx(one.reference).epsilon(2e-2));
    CHECK(one.reference == doctest::Approx(0.15166406).epsilon(1e-5));
    const auto two = circle_family_modulus(ring, ScalarField::constant(2.0), 32, 64);
    CHECK(two.value == doctest::Approx(one.value / 2.0).epsilon(1e-6));
    CHECK(two.reference == doctest::Approx(one.reference / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(circle_family_modulus(ring, ScalarField::constant(1.0), 1, 64), PreconditionError);
}

TEST_CASE("weighted infimum") {
    const std::vector<Atom> two{{1.0, 0.5}, {4.0, 0.5}};
    const auto r = weighted_infimum(two, 2.0);
    CHECK(std::abs(r.I - 1.6) < 1e-12);
    CHECK(r.alpha[0] == doctest::Approx(1.6).epsilon(1e-14));
    CHECK(r.alpha[1] == doctest::Approx(0.4).epsilon(1e-14));

    const std::vector<Atom> flat{{1.0, 0.25}, {1.0, 0.75}};
    CHECK(weighted_infimum(flat, 3.0).I == doctest::Approx(1.0).epsilon(1e-14));
    const std::vector<Atom> scaled{{5.0, 0.5}, {20.0, 0.5}};
    CHECK(weighted_infimum(scaled, 2.0).I == doctest::Approx(8.0).epsilon(1e-14));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Atom> phi(6);
        for (auto& a : phi) a = {u(rng), u(rng)};
        const double q = 1.5 + 0.5 * trial / 10.0;
        CHECK(weighted_infimum(phi, q).I == doctest::Approx(direct_minimum(phi, q)).epsilon(1e-6));
    }
    CHECK_THROWS_AS(weighted_infimum(two, 1.0), PreconditionError);
    const std::vector<Atom> bad{{0.0, 1.0}};
    CHECK_THROWS_AS(weighted_infimum(bad, 2.0), PreconditionError);
}

TEST_CASE("density csv") {
    const auto dom = DiscretizedDomain::cartesian(Window{-0.5, 0.5, -0.5, 0.5}, 2, 2);
    const std::string csv = density_csv(dom, DensityField{{1, 2, 3, 4}});
    CHECK(csv.rfind("x,y,rho\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
