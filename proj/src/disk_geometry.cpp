#include "modlab/disk_geometry.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "modlab/error.hpp"

namespace modlab {

namespace {

// 1 - |z|^2 without the cancellation of the naive form near the boundary.
double one_minus_abs2(Complex z) {
    const double r = std::abs(z);
    return (1.0 - r) * (1.0 + r);
}

double segment_density(Complex p, Complex q, double t) {
    const Complex z = p + t * (q - p);
    return 2.0 / one_minus_abs2(z);
}

double simpson(double fa, double fm, double fb, double h) { return h / 6.0 * (fa + 4.0 * fm + fb); }

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(fa, flm, fm, m - a);
    const double right = simpson(fm, frm, fb, b - m);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

bool DiskPoint::admissible(Complex z) noexcept {
    return std::isfinite(z.real()) && std::isfinite(z.imag()) && std::abs(z) <= 1.0 - kBoundaryMargin;
}

DiskPoint::DiskPoint(double re, double im) : DiskPoint(Complex(re, im)) {}

DiskPoint::DiskPoint(Complex z) : z_(z) {
    if (!admissible(z)) {
        std::ostringstream os;
        os << "point " << z << " is not strictly inside the unit disk";
        throw PreconditionError(os.str());
    }
}

MobiusAutomorphism::MobiusAutomorphism(Complex a, Complex c) : a_(a), c_(c) {
    const double det = std::norm(a) - std::norm(c);
    if (!(det > 0.0) || !std::isfinite(det)) throw PreconditionError("Mobius coefficients need |a|^2 - |c|^2 > 0");
    normalize();
}

void MobiusAutomorphism::normalize() {
    const double s = std::sqrt(std::norm(a_) - std::norm(c_));
    a_ /= s;
    c_ /= s;
}

MobiusAutomorphism MobiusAutomorphism::rotation(double angle) {
    return {std::polar(1.0, 0.5 * angle), Complex(0.0, 0.0)};
}

MobiusAutomorphism MobiusAutomorphism::translation(double length, double angle) {
    return {Complex(std::cosh(0.5 * length), 0.0), std::polar(std::sinh(0.5 * length), angle)};
}

Complex MobiusAutomorphism::derivative(Complex z) const noexcept {
    const Complex d = std::conj(c_) * z + std::conj(a_);
    return 1.0 / (d * d);
}

double MobiusAutomorphism::coefficient_distance(const MobiusAutomorphism& other) const noexcept {
    const double plus = std::abs(a_ - other.a_) + std::abs(c_ - other.c_);
    const double minus = std::abs(a_ + other.a_) + std::abs(c_ + other.c_);
    return std::min(plus, minus);
}

bool MobiusAutomorphism::is_identity(double tol) const noexcept {
    return coefficient_distance(MobiusAutomorphism{}) < tol;
}

DiskPoint mobius_apply(const MobiusAutomorphism& g, const DiskPoint& z) { return DiskPoint(g.eval(z.z())); }

MobiusAutomorphism mobius_compose(const MobiusAutomorphism& outer, const MobiusAutomorphism& inner) {
    const Complex a1 = outer.a(), c1 = outer.c();
    const Complex a2 = inner.a(), c2 = inner.c();
    return {a1 * a2 + c1 * std::conj(c2), a1 * c2 + c1 * std::conj(a2)};
}

MobiusAutomorphism mobius_invert(const MobiusAutomorphism& g) { return {std::conj(g.a()), -g.c()}; }

MobiusAutomorphism mobius_to_zero(const DiskPoint& z0) {
    const double s = std::sqrt(one_minus_abs2(z0.z()));
    return {Complex(1.0 / s, 0.0), -z0.z() / s};
}

Polyline::Polyline(std::vector<DiskPoint> vertices, bool closed) : closed_(closed) {
    require(!vertices.empty(), "polyline needs at least one vertex");
    vertices_.reserve(vertices.size());
    for (const auto& v : vertices) {
        if (vertices_.empty() || !(vertices_.back() == v)) vertices_.push_back(v);
    }
    if (closed_ && vertices_.size() > 1 && vertices_.front() == vertices_.back()) vertices_.pop_back();
}

std::size_t Polyline::segment_count() const noexcept {
    if (vertices_.size() < 2) return 0;
    return closed_ ? vertices_.size() : vertices_.size() - 1;
}

std::pair<Complex, Complex> Polyline::segment(std::size_t i) const {
    const std::size_t j = (i + 1) % vertices_.size();
    return {vertices_[i].z(), vertices_[j].z()};
}

Polyline Polyline::reversed() const {
    return Polyline(std::vector<DiskPoint>(vertices_.rbegin(), vertices_.rend()), closed_);
}

Polyline Polyline::mapped(const MobiusAutomorphism& g) const {
    std::vector<DiskPoint> out;
    out.reserve(vertices_.size());
    for (const auto& v : vertices_) out.push_back(mobius_apply(g, v));
    return Polyline(std::move(out), closed_);
}

HyperbolicCircle::HyperbolicCircle(DiskPoint c, double r) : center(c), radius(r) {
    require(std::isfinite(r) && r >= 0.0, "hyperbolic radius must be finite and non-negative");
}

double HyperbolicCircle::euclid_image_radius() const { return euclid_radius(radius); }

bool HyperbolicCircle::contains(const DiskPoint& z) const { return hyp_distance(center, z) < radius; }

double hyp_distance(Complex z1, Complex z2) {
    const double denom = std::sqrt(one_minus_abs2(z1) * one_minus_abs2(z2));
    return 2.0 * std::asinh(std::abs(z1 - z2) / denom);
}

double hyp_distance(const DiskPoint& z1, const DiskPoint& z2) { return hyp_distance(z1.z(), z2.z()); }

double hyp_length(const Polyline& curve) {
    constexpr double kTol = 1e-10;
    double total = 0.0;
    for (std::size_t i = 0; i < curve.segment_count(); ++i) {
        const auto [p, q] = curve.segment(i);
        const double len = std::abs(q - p);
        auto f = [&](double t) { return segment_density(p, q, t); };
        const double fa = f(0.0), fm = f(0.5), fb = f(1.0);
        const double whole = simpson(fa, fm, fb, 1.0);
        // Tolerance is on the length, the parameter integral is scaled by |q - p|.
        total += len * adaptive_simpson(f, 0.0, 1.0, fa, fm, fb, whole, kTol / std::max(len, 1e-300), 40);
    }
    return total;
}

namespace {

double midpoint_area(const std::function<bool(const DiskPoint&)>& indicator, const Window& w, int n) {
    const double hx = (w.x1 - w.x0) / n;
    const double hy = (w.y1 - w.y0) / n;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        const double y = w.y0 + (j + 0.5) * hy;
        double row = 0.0;
        for (int i = 0; i < n; ++i) {
            const Complex z(w.x0 + (i + 0.5) * hx, y);
            if (!DiskPoint::admissible(z)) continue;
            const DiskPoint p(z);
            if (!indicator(p)) continue;
            const double s = one_minus_abs2(z);
            row += 4.0 / (s * s);
        }
        sum += row;
    }
    return sum * hx * hy;
}

} // namespace

AreaResult hyp_area(const std::function<bool(const DiskPoint&)>& indicator, const Window& window, int resolution) {
    require(resolution >= 2, "hyp_area resolution must be >= 2");
    require(window.x0 >= -1.0 && window.x1 <= 1.0 && window.y0 >= -1.0 && window.y1 <= 1.0 &&
                window.x0 < window.x1 && window.y0 < window.y1,
            "hyp_area window must lie inside [-1,1]^2");
    AreaResult out;
    out.value = midpoint_area(indicator, window, resolution);
    out.refined = midpoint_area(indicator, window, 2 * resolution);
    const double scale = std::max(std::abs(out.value), std::abs(out.refined));
    out.converged = scale == 0.0 || std::abs(out.value - out.refined) <= 0.01 * scale;
    return out;
}

double euclid_radius(double r) {
    require(r >= 0.0, "euclid_radius needs r >= 0");
    return std::tanh(0.5 * r);
}

double hyp_radius(double R) {
    require(R >= 0.0 && R < 1.0, "hyp_radius needs 0 <= R < 1");
    return 2.0 * std::atanh(R);
}

Polyline geodesic(const DiskPoint& z1, const DiskPoint& z2, int n) {
    require(n >= 2, "geodesic needs n >= 2");
    if (z1 == z2) return Polyline(std::vector<DiskPoint>(static_cast<std::size_t>(n), z1));
    const MobiusAutomorphism to_zero = mobius_to_zero(z1);
    const MobiusAutomorphism back = mobius_invert(to_zero);
    const Complex w = to_zero.eval(z2.z());
    const Complex dir = w / std::abs(w);
    const double d = hyp_distance(z1, z2);
    std::vector<DiskPoint> pts;
    pts.reserve(static_cast<std::size_t>(n));
    pts.push_back(z1);
    for (int j = 1; j + 1 < n; ++j) {
        const double s = d * j / (n - 1);
        pts.emplace_back(back.eval(std::tanh(0.5 * s) * dir));
    }
    pts.push_back(z2);
    return Polyline(std::move(pts));
}

} // namespace modlab
