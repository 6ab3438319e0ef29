#include "modlab/mappings.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "modlab/error.hpp"

namespace modlab {

namespace {

constexpr Complex kI(0.0, 1.0);

// Unit direction of z, 1 at the origin.
Complex direction(Complex z) {
    const double r = std::abs(z);
    return r == 0.0 ? Complex(1.0, 0.0) : z / r;
}

double spiral_phase(double r) { return std::log1p(-std::log1p(-r)); }
double spiral_phase_derivative(double r) { return 1.0 / ((1.0 - r) * (1.0 - std::log1p(-r))); }

// Chain rule for h = outer o inner at z, with outer derivatives taken at inner(z).
Wirtinger chain(const Wirtinger& outer, const Wirtinger& inner) {
    return {outer.f_z * inner.f_z + outer.f_zbar * std::conj(inner.f_zbar),
            outer.f_z * inner.f_zbar + outer.f_zbar * std::conj(inner.f_z)};
}

double json_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError(std::string("map spec: missing number '") + key + "'");
    return j.at(key).get<double>();
}

std::vector<double> split_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("map spec: bad number '" + tok + "'");
        }
    }
    return out;
}

} // namespace

SampleMap SampleMap::identity() { return mobius(MobiusAutomorphism::identity()); }

SampleMap SampleMap::mobius(const MobiusAutomorphism& g) {
    SampleMap m;
    m.kind_ = Kind::mobius;
    m.g_ = g;
    return m;
}

SampleMap SampleMap::radial_stretch(double k) {
    require(k >= 1.0 && std::isfinite(k), "radial_stretch needs k >= 1");
    SampleMap m;
    m.kind_ = Kind::radial_stretch;
    m.k_ = k;
    return m;
}

SampleMap SampleMap::winding(int k) {
    require(k >= 1, "winding needs k >= 1");
    SampleMap m;
    m.kind_ = Kind::winding;
    m.k_ = k;
    return m;
}

SampleMap SampleMap::fold() {
    SampleMap m;
    m.kind_ = Kind::fold;
    return m;
}

SampleMap SampleMap::spiral() {
    SampleMap m;
    m.kind_ = Kind::spiral;
    return m;
}

SampleMap SampleMap::compose(std::vector<SampleMap> maps) {
    require(!maps.empty(), "composition needs at least one map");
    if (maps.size() == 1) return maps.front();
    SampleMap m;
    m.kind_ = Kind::composition;
    m.parts_ = std::move(maps);
    return m;
}

SampleMap SampleMap::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("map spec: object with string 'kind' required");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "identity") return identity();
        if (kind == "mobius")
            return mobius(MobiusAutomorphism(Complex(json_number(j, "a_re"), json_number(j, "a_im")),
                                             Complex(json_number(j, "c_re"), json_number(j, "c_im"))));
        if (kind == "rotation") return mobius(MobiusAutomorphism::rotation(json_number(j, "angle")));
        if (kind == "radial_stretch") return radial_stretch(json_number(j, "k"));
        if (kind == "winding") {
            const double k = json_number(j, "k");
            if (k != std::floor(k)) throw ConfigError("map spec: winding k must be an integer");
            return winding(static_cast<int>(k));
        }
        if (kind == "fold") return fold();
        if (kind == "spiral") return spiral();
        if (kind == "composition") {
            if (!j.contains("maps") || !j.at("maps").is_array()) throw ConfigError("map spec: composition needs 'maps'");
            std::vector<SampleMap> parts;
            for (const auto& p : j.at("maps")) parts.push_back(from_json(p));
            return compose(std::move(parts));
        }
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("map spec: ") + e.what());
    }
    throw ConfigError("map spec: unknown kind '" + kind + "'");
}

SampleMap SampleMap::from_spec(const std::string& spec) {
    if (spec.find('|') != std::string::npos) {
        std::vector<SampleMap> parts;
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, '|')) parts.push_back(from_spec(tok));
        return compose(std::move(parts));
    }
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    nlohmann::json j;
    j["kind"] = name;
    if (name == "winding" || name == "radial" || name == "radial_stretch") {
        const auto v = split_numbers(arg);
        if (v.size() != 1) throw ConfigError("map spec: " + name + " needs one parameter");
        j["kind"] = name == "winding" ? "winding" : "radial_stretch";
        j["k"] = v[0];
    } else if (name == "rotation") {
        const auto v = split_numbers(arg);
        if (v.size() != 1) throw ConfigError("map spec: rotation needs an angle");
        j["angle"] = v[0];
    } else if (name == "mobius") {
        const auto v = split_numbers(arg);
        if (v.size() != 4) throw ConfigError("map spec: mobius needs a_re,a_im,c_re,c_im");
        j["a_re"] = v[0];
        j["a_im"] = v[1];
        j["c_re"] = v[2];
        j["c_im"] = v[3];
    }
    return from_json(j);
}

nlohmann::json SampleMap::to_json() const {
    nlohmann::json j;
    switch (kind_) {
    case Kind::mobius:
        j = {{"kind", "mobius"}, {"a_re", g_.a().real()}, {"a_im", g_.a().imag()}, {"c_re", g_.c().real()},
             {"c_im", g_.c().imag()}};
        break;
    case Kind::radial_stretch: j = {{"kind", "radial_stretch"}, {"k", k_}}; break;
    case Kind::winding: j = {{"kind", "winding"}, {"k", static_cast<int>(k_)}}; break;
    case Kind::fold: j = {{"kind", "fold"}}; break;
    case Kind::spiral: j = {{"kind", "spiral"}}; break;
    case Kind::composition: {
        j["kind"] = "composition";
        j["maps"] = nlohmann::json::array();
        for (const auto& p : parts_) j["maps"].push_back(p.to_json());
        break;
    }
    }
    return j;
}

std::string SampleMap::describe() const { return to_json().dump(); }

Complex SampleMap::eval(Complex z) const {
    const double r = std::abs(z);
    switch (kind_) {
    case Kind::mobius: return g_.eval(z);
    case Kind::radial_stretch: return z * std::pow(r, k_ - 1.0);
    case Kind::winding: {
        if (r == 0.0) return z;
        return r * std::pow(z / r, static_cast<int>(k_));
    }
    case Kind::fold: return {std::abs(z.real()), z.imag()};
    case Kind::spiral: return z * std::polar(1.0, spiral_phase(r));
    case Kind::composition: {
        Complex w = z;
        for (const auto& p : parts_) w = p.eval(w);
        return w;
    }
    }
    return z;
}

DiskPoint SampleMap::apply(const DiskPoint& z) const { return DiskPoint(eval(z.z())); }

std::optional<Wirtinger> SampleMap::analytic(Complex z) const {
    const double r = std::abs(z);
    const Complex u = direction(z);
    switch (kind_) {
    case Kind::mobius: return Wirtinger{g_.derivative(z), Complex(0.0, 0.0)};
    case Kind::radial_stretch: {
        const double s = std::pow(r, k_ - 1.0);
        return Wirtinger{0.5 * (k_ + 1.0) * s, 0.5 * (k_ - 1.0) * s * u * u};
    }
    case Kind::winding: {
        const int k = static_cast<int>(k_);
        return Wirtinger{0.5 * (k + 1.0) * std::pow(u, k - 1), 0.5 * (1.0 - k) * std::pow(u, k + 1)};
    }
    case Kind::fold: {
        const double sx = z.real() > 0.0 ? 1.0 : (z.real() < 0.0 ? -1.0 : 0.0);
        return Wirtinger{0.5 * (sx + 1.0), 0.5 * (sx - 1.0)};
    }
    case Kind::spiral: {
        const Complex rot = std::polar(1.0, spiral_phase(r));
        const double sp = spiral_phase_derivative(r);
        return Wirtinger{rot * (1.0 + kI * sp * r / 2.0), rot * kI * sp * r * u * u / 2.0};
    }
    case Kind::composition: {
        Complex w = z;
        Wirtinger acc{1.0, 0.0};
        for (const auto& p : parts_) {
            const auto d = p.analytic(w);
            if (!d) return std::nullopt;
            acc = chain(*d, acc);
            w = p.eval(w);
        }
        return acc;
    }
    }
    return std::nullopt;
}

bool SampleMap::preserves_centered_circles() const {
    switch (kind_) {
    case Kind::mobius: return std::abs(g_.c()) < 1e-15;
    case Kind::radial_stretch:
    case Kind::winding:
    case Kind::spiral: return true;
    case Kind::fold: return false;
    case Kind::composition:
        return std::all_of(parts_.begin(), parts_.end(), [](const SampleMap& p) { return p.preserves_centered_circles(); });
    }
    return false;
}

double default_step(Complex z) { return 1e-5 * (1.0 - std::abs(z)); }

Wirtinger finite_difference_wirtinger(const SampleMap& f, Complex z, double step) {
    require(step > 0.0, "finite-difference step must be positive");
    const Complex fx = (f.eval(z + step) - f.eval(z - step)) / (2.0 * step);
    const Complex fy = (f.eval(z + kI * step) - f.eval(z - kI * step)) / (2.0 * step);
    return {0.5 * (fx - kI * fy), 0.5 * (fx + kI * fy)};
}

WirtingerReport wirtinger(const SampleMap& f, const DiskPoint& z, double step) {
    require(std::abs(z.z()) + step < 1.0, "finite-difference stencil leaves the disk");
    WirtingerReport out;
    out.finite_difference = finite_difference_wirtinger(f, z.z(), step);
    if (const auto a = f.analytic(z.z())) {
        out.value = *a;
        out.analytic = true;
    } else {
        out.value = out.finite_difference;
    }
    return out;
}

WirtingerReport wirtinger(const SampleMap& f, const DiskPoint& z) { return wirtinger(f, z, default_step(z.z())); }

Dilatation dilatation_from(const Wirtinger& w) {
    const double a = std::abs(w.f_z), b = std::abs(w.f_zbar);
    const double norm = a + b;
    if (norm <= 1e-14) return {1.0, false};
    if (std::abs(w.jacobian()) <= 1e-12 * norm * norm) return {1.0, true};
    return {norm / std::abs(a - b), false};
}

Dilatation dilatation(const SampleMap& f, const DiskPoint& z) { return dilatation_from(wirtinger(f, z).value); }

DistortionSample distortion_at(const SampleMap& f, const DiskPoint& z) {
    const auto w = wirtinger(f, z).value;
    return {z, w, dilatation_from(w)};
}

MultiplicityReport multiplicity(const SampleMap& f, const std::vector<DiskPoint>& targets, int seed_grid,
                                double newton_tol) {
    require(seed_grid >= 2, "multiplicity needs seed_grid >= 2");
    require(newton_tol > 0.0, "newton tolerance must be positive");

    auto solve = [&](const DiskPoint& y, int grid) {
        std::vector<Complex> roots;
        for (int j = 0; j < grid; ++j) {
            for (int i = 0; i < grid; ++i) {
                Complex z(-1.0 + (2.0 * i + 1.0) / grid, -1.0 + (2.0 * j + 1.0) / grid);
                if (std::abs(z) >= 1.0 - 1e-3) continue;
                bool ok = false;
                for (int it = 0; it < 60; ++it) {
                    const Complex res = f.eval(z) - y.z();
                    if (std::abs(res) < newton_tol) {
                        ok = true;
                        break;
                    }
                    const auto an = f.analytic(z);
                    const Wirtinger w = an ? *an : finite_difference_wirtinger(f, z, std::max(default_step(z), 1e-9));
                    // Real Jacobian columns f_x = f_z + f_zbar, f_y = i (f_z - f_zbar).
                    const Complex fx = w.f_z + w.f_zbar, fy = kI * (w.f_z - w.f_zbar);
                    const double det = fx.real() * fy.imag() - fy.real() * fx.imag();
                    if (std::abs(det) < 1e-300) break;
                    const double dx = (fy.imag() * res.real() - fy.real() * res.imag()) / det;
                    const double dy = (-fx.imag() * res.real() + fx.real() * res.imag()) / det;
                    Complex delta(dx, dy);
                    int damp = 0;
                    while (!DiskPoint::admissible(z - delta) && damp < 40) {
                        delta *= 0.5;
                        ++damp;
                    }
                    if (damp == 40) break;
                    z -= delta;
                }
                if (!ok || !DiskPoint::admissible(z)) continue;
                const bool dup = std::any_of(roots.begin(), roots.end(), [&](Complex w) { return std::abs(w - z) < 1e-6; });
                if (!dup) roots.push_back(z);
            }
        }
        return static_cast<int>(roots.size());
    };

    MultiplicityReport out;
    out.targets = targets;
    for (const auto& y : targets) {
        const int coarse = solve(y, seed_grid);
        const int fine = solve(y, 2 * seed_grid + 1);
        if (coarse != fine) out.incomplete_search = true;
        out.counts.push_back(std::max(coarse, fine));
        out.supremum = std::max(out.supremum, out.counts.back());
    }
    return out;
}

namespace {

template <class F>
void for_each_grid_point(int grid, F&& visit) {
    for (int j = 0; j <= grid; ++j) {
        for (int i = 0; i <= grid; ++i) {
            const Complex z(-1.0 + 2.0 * i / grid, -1.0 + 2.0 * j / grid);
            if (std::abs(z) >= 1.0 - 1e-3) continue;
            visit(DiskPoint(z));
        }
    }
}

} // namespace

FiniteDistortionReport finite_distortion_check(const SampleMap& f, int grid) {
    require(grid >= 16, "finite_distortion_check needs grid >= 16");
    FiniteDistortionReport out;
    out.grid = grid;
    for_each_grid_point(grid, [&](const DiskPoint& z) {
        ++out.points;
        const Wirtinger w = wirtinger(f, z).value;
        if (std::abs(w.jacobian()) <= 1e-10 && w.norm() > 1e-8) out.violations.push_back(z);
    });
    out.pass = out.violations.empty();
    return out;
}

std::string distortion_csv(const SampleMap& f, int grid) {
    require(grid >= 2, "distortion grid must be >= 2");
    std::ostringstream os;
    os << std::setprecision(12) << "x,y,abs_fz,abs_fzbar,K,J\n";
    for_each_grid_point(grid, [&](const DiskPoint& z) {
        const auto s = distortion_at(f, z);
        os << z.re() << ',' << z.im() << ',' << std::abs(s.w.f_z) << ',' << std::abs(s.w.f_zbar) << ',';
        if (s.K.infinite)
            os << "inf";
        else
            os << s.K.K;
        os << ',' << s.w.jacobian() << '\n';
    });
    return os.str();
}

int winding_number(const Polyline& curve) {
    require(curve.closed(), "winding number needs a closed curve");
    double total = 0.0;
    for (std::size_t i = 0; i < curve.segment_count(); ++i) {
        const auto [p, q] = curve.segment(i);
        require(std::abs(p) > 0.0 && std::abs(q) > 0.0, "curve passes through the origin");
        total += std::arg(q / p);
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

std::vector<Polyline> map_polylines(const SampleMap& f, const std::vector<Polyline>& family) {
    std::vector<Polyline> out;
    out.reserve(family.size());
    for (const auto& pl : family) {
        std::vector<DiskPoint> v;
        v.reserve(pl.size());
        for (const auto& p : pl.vertices()) {
            const Complex w = f.eval(p.z());
            if (!DiskPoint::admissible(w)) {
                std::ostringstream os;
                os << "image point " << w << " of " << p.z() << " leaves the chart";
                throw ChartOverflow(os.str());
            }
            v.emplace_back(w);
        }
        out.emplace_back(std::move(v), pl.closed());
    }
    return out;
}

CurveFamily pushforward_family(const SampleMap& f, const std::vector<Polyline>& family,
                               const DiscretizedDomain& dom_image, FamilyKind kind) {
    const auto images = map_polylines(f, family);
    CurveFamily out;
    out.kind = kind;
    for (std::size_t i = 0; i < images.size(); ++i) {
        int mult = 1;
        if (family[i].closed() && images[i].size() > 2) {
            const int w_src = winding_number(family[i]);
            const int w_img = winding_number(images[i]);
            if (w_src != 0 && w_img % w_src == 0 && std::abs(w_img / w_src) > 1) mult = std::abs(w_img / w_src);
        }
        Curve c = rasterize(images[i], dom_image, mult);
        for (auto& inc : c.incidences) {
            inc.length_euclid /= mult;
            inc.length_hyp /= mult;
        }
        if (!c.incidences.empty()) out.curves.push_back(std::move(c));
    }
    return out;
}

} // namespace modlab
