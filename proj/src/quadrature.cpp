#include "modlab/quadrature.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "modlab/error.hpp"

namespace modlab {

namespace {

constexpr double kSingularFloor = 1e-6;
constexpr double kSingularHit = 1e-9;

bool singular_at_center(const ScalarField& Q) { return Q.singular && std::abs(*Q.singular) < kSingularHit; }

} // namespace

ScalarField ScalarField::constant(double c) {
    require(c >= 0.0, "constant field must be non-negative");
    std::ostringstream os;
    os << "const:" << c;
    return {[c](const DiskPoint&) { return c; }, os.str(), std::nullopt};
}

ScalarField ScalarField::scaled(double c) const {
    require(c >= 0.0, "field scale must be non-negative");
    auto f = evaluator;
    std::ostringstream os;
    os << c << "*" << label;
    return {[f, c](const DiskPoint& z) { return c * f(z); }, os.str(), singular};
}

ScalarField ScalarField::recentered(const DiskPoint& center) const {
    if (center.z() == Complex(0.0, 0.0)) return *this;
    const MobiusAutomorphism to_zero = mobius_to_zero(center);
    const MobiusAutomorphism back = mobius_invert(to_zero);
    auto f = evaluator;
    std::optional<Complex> s;
    if (singular) s = to_zero.eval(*singular);
    return {[f, back](const DiskPoint& w) { return f(mobius_apply(back, w)); }, label, s};
}

RingSpec::RingSpec(double inner, double outer, DiskPoint c) : center(c), r_inner(inner), r_outer(outer) { validate(); }

void RingSpec::validate() const {
    require(r_inner >= 0.0 && r_inner < r_outer, "ring needs 0 <= r_inner < r_outer");
    require(euclid_radius(r_outer) < 1.0 - 1e-6, "ring outer radius leaves the chart");
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    require(n >= 3, "simpson needs at least 3 nodes");
    if (n % 2 == 0) ++n;
    const double h = (b - a) / (n - 1);
    double sum = f(a) + f(b);
    for (int i = 1; i + 1 < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

double circle_integral(const ScalarField& Q, double r, int n, Warnings* warnings) {
    require(r > 0.0 && std::isfinite(r), "circle_integral needs r > 0");
    require(n >= 16, "circle_integral needs n >= 16");
    const double R = euclid_radius(r);
    if (Q.singular && std::abs(std::abs(*Q.singular) - R) < kSingularHit && warnings)
        warnings->push_back("SingularitySkipped: singular point on circle r=" + std::to_string(r));
    const double dtheta = 2.0 * std::numbers::pi / n;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const Complex z = std::polar(R, k * dtheta);
        if (Q.singular && std::abs(z - *Q.singular) < kSingularHit) continue;
        sum += Q(DiskPoint(z));
    }
    return sum * dtheta * 2.0 * R / ((1.0 - R) * (1.0 + R));
}

double ring_integral(const ScalarField& Q, double a, double b, int n_r, int n_theta, Warnings* warnings) {
    require(0.0 <= a && a < b, "ring_integral needs 0 <= a < b");
    if (singular_at_center(Q)) a = std::max(a, kSingularFloor);
    auto f = [&](double r) { return r <= 0.0 ? 0.0 : circle_integral(Q, r, n_theta, warnings); };
    return simpson(f, a, b, n_r);
}

double ball_integral(const ScalarField& Q, double r0, int n_r, int n_theta, Warnings* warnings) {
    require(r0 > 0.0, "ball_integral needs r0 > 0");
    return ring_integral(Q, 0.0, r0, n_r, n_theta, warnings);
}

FubiniResidual fubini_residual(const ScalarField& Q, double r0, int n_cart, int n_radial, int n_theta) {
    require(r0 > 0.0 && n_cart >= 2, "fubini_residual needs r0 > 0 and n_cart >= 2");
    const double R0 = euclid_radius(r0);
    const double hy = 2.0 * R0 / n_cart;
    double cart = 0.0;
    for (int j = 0; j < n_cart; ++j) {
        const double y = -R0 + (j + 0.5) * hy;
        const double half = std::sqrt(std::max(0.0, R0 * R0 - y * y));
        const double hx = 2.0 * half / n_cart;
        double row = 0.0;
        for (int i = 0; i < n_cart; ++i) {
            const Complex z(-half + (i + 0.5) * hx, y);
            if (Q.singular && std::abs(z - *Q.singular) < kSingularHit) continue;
            const double s = (1.0 - std::abs(z)) * (1.0 + std::abs(z));
            row += Q(DiskPoint(z)) * 4.0 / (s * s);
        }
        cart += row * hx;
    }
    cart *= hy;

    FubiniResidual out;
    out.cartesian = cart;
    out.iterated = ball_integral(Q, r0, n_radial, n_theta);
    out.residual = std::abs(out.cartesian - out.iterated);
    out.relative = out.residual / std::max(std::abs(out.iterated), 1e-300);
    if (out.residual == 0.0) out.relative = 0.0;
    return out;
}

RadialProfile qnorm_profile(const ScalarField& Q, const RingSpec& ring, int n_samples, int n_angular) {
    ring.validate();
    require(n_samples >= 8, "qnorm_profile needs n_samples >= 8");
    const ScalarField field = Q.recentered(ring.center);
    const double lo = std::max(ring.r_inner, kSingularFloor);
    require(lo < ring.r_outer, "qnorm_profile ring too thin");
    RadialProfile p;
    p.quadrature_n = n_angular;
    p.radii.resize(static_cast<std::size_t>(n_samples));
    p.values.resize(p.radii.size());
    const double ratio = std::log(ring.r_outer / lo);
    for (int k = 0; k < n_samples; ++k) {
        double r = lo * std::exp(ratio * k / (n_samples - 1));
        if (k == n_samples - 1) r = ring.r_outer;
        if (k == 0) r = lo;
        p.radii[static_cast<std::size_t>(k)] = r;
        p.values[static_cast<std::size_t>(k)] = circle_integral(field, r, n_angular, &p.warnings);
    }
    return p;
}

double ring_reciprocal_integral(const RadialProfile& profile) {
    require(profile.radii.size() >= 2, "ring_reciprocal_integral needs at least 2 radii");
    require(profile.radii.size() == profile.values.size(), "profile radii/values length mismatch");
    for (std::size_t i = 0; i < profile.values.size(); ++i) {
        if (!(profile.values[i] > 0.0))
            throw ZeroNorm("||Q||(r) vanishes at r=" + std::to_string(profile.radii[i]));
    }
    double sum = 0.0;
    for (std::size_t i = 1; i < profile.radii.size(); ++i)
        sum += 0.5 * (profile.radii[i] - profile.radii[i - 1]) * (1.0 / profile.values[i] + 1.0 / profile.values[i - 1]);
    return sum;
}

std::string RadialProfile::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(17) << "r,qnorm\n";
    for (std::size_t i = 0; i < radii.size(); ++i) os << radii[i] << ',' << values[i] << '\n';
    return os.str();
}

std::string RadialProfile::to_json() const {
    nlohmann::json j;
    j["radii"] = radii;
    j["qnorm"] = values;
    j["quadrature_n"] = quadrature_n;
    j["warnings"] = warnings;
    return j.dump(2);
}

} // namespace modlab
