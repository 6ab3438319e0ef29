#include "modlab/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "modlab/error.hpp"

namespace modlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double conformal_factor(Complex z) {
    const double r = std::abs(z);
    return 2.0 / ((1.0 - r) * (1.0 + r));
}

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

} // namespace

std::string to_string(Metric m) { return m == Metric::hyperbolic ? "hyperbolic" : "euclidean"; }

DiscretizedDomain DiscretizedDomain::polar(const RingSpec& ring, int n_r, int n_theta) {
    ring.validate();
    require(n_r >= 1, "polar grid needs n_r >= 1");
    std::vector<double> edges(static_cast<std::size_t>(n_r) + 1);
    for (int i = 0; i <= n_r; ++i)
        edges[static_cast<std::size_t>(i)] = euclid_radius(ring.r_inner + (ring.r_outer - ring.r_inner) * i / n_r);
    return polar_edges(std::move(edges), n_theta);
}

DiscretizedDomain DiscretizedDomain::polar_edges(std::vector<double> radial_edges, int n_theta) {
    require(radial_edges.size() >= 2, "polar grid needs at least two radial edges");
    require(n_theta >= 1, "polar grid needs n_theta >= 1");
    require(radial_edges.front() >= 0.0 && radial_edges.back() < 1.0 - kBoundaryMargin, "polar grid must lie in the disk");
    for (std::size_t i = 1; i < radial_edges.size(); ++i)
        require(radial_edges[i] > radial_edges[i - 1], "polar grid edges must increase");

    DiscretizedDomain d;
    const double dtheta = kTwoPi / n_theta;
    for (std::size_t i = 0; i + 1 < radial_edges.size(); ++i) {
        const double r0 = radial_edges[i], r1 = radial_edges[i + 1];
        const double rc = 0.5 * (r0 + r1);
        const double area = 0.5 * dtheta * (r1 * r1 - r0 * r0);
        for (int j = 0; j < n_theta; ++j) {
            const Complex c = std::polar(rc, (j + 0.5) * dtheta);
            const double f = conformal_factor(c);
            d.cells_.push_back(Cell{DiskPoint(c), area, area * f * f});
        }
    }
    d.geometry_ = PolarGrid{std::move(radial_edges), n_theta};
    return d;
}

DiscretizedDomain DiscretizedDomain::cartesian(const Window& w, int nx, int ny) {
    require(nx >= 1 && ny >= 1, "cartesian grid needs nx, ny >= 1");
    require(w.x0 < w.x1 && w.y0 < w.y1, "cartesian window is empty");
    for (Complex corner : {Complex(w.x0, w.y0), Complex(w.x1, w.y0), Complex(w.x0, w.y1), Complex(w.x1, w.y1)})
        require(DiskPoint::admissible(corner), "cartesian window must lie inside the disk");
    DiscretizedDomain d;
    const double hx = (w.x1 - w.x0) / nx, hy = (w.y1 - w.y0) / ny;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Complex c(w.x0 + (i + 0.5) * hx, w.y0 + (j + 0.5) * hy);
            const double f = conformal_factor(c);
            d.cells_.push_back(Cell{DiskPoint(c), hx * hy, hx * hy * f * f});
        }
    }
    d.geometry_ = CartesianGrid{w, nx, ny};
    return d;
}

std::optional<std::size_t> DiscretizedDomain::locate(Complex z) const {
    if (const auto* p = std::get_if<PolarGrid>(&geometry_)) {
        const double r = std::abs(z);
        const auto& e = p->radial_edges;
        if (r < e.front() || r >= e.back()) return std::nullopt;
        const auto row = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), r) - e.begin()) - 1;
        auto col = static_cast<std::size_t>(std::floor(wrap_angle(std::arg(z)) / (kTwoPi / p->n_theta)));
        col = std::min(col, static_cast<std::size_t>(p->n_theta) - 1);
        return row * static_cast<std::size_t>(p->n_theta) + col;
    }
    const auto& g = std::get<CartesianGrid>(geometry_);
    const double fx = (z.real() - g.window.x0) / (g.window.x1 - g.window.x0);
    const double fy = (z.imag() - g.window.y0) / (g.window.y1 - g.window.y0);
    if (fx < 0.0 || fx >= 1.0 || fy < 0.0 || fy >= 1.0) return std::nullopt;
    const auto i = std::min(static_cast<std::size_t>(fx * g.nx), static_cast<std::size_t>(g.nx) - 1);
    const auto j = std::min(static_cast<std::size_t>(fy * g.ny), static_cast<std::size_t>(g.ny) - 1);
    return j * static_cast<std::size_t>(g.nx) + i;
}

std::vector<double> DiscretizedDomain::crossings(Complex p, Complex q) const {
    std::vector<double> ts;
    const Complex d = q - p;
    auto keep = [&](double t) {
        if (t > 0.0 && t < 1.0) ts.push_back(t);
    };
    if (const auto* pg = std::get_if<PolarGrid>(&geometry_)) {
        // Circles |p + t d| = R.
        const double a = std::norm(d);
        const double b = 2.0 * (p.real() * d.real() + p.imag() * d.imag());
        const double c0 = std::norm(p);
        const double tmin = std::clamp(-b / (2.0 * a), 0.0, 1.0);
        const double rmin = std::abs(p + tmin * d);
        const double rmax = std::max(std::abs(p), std::abs(q));
        const auto& e = pg->radial_edges;
        auto lo = std::lower_bound(e.begin(), e.end(), rmin);
        auto hi = std::upper_bound(e.begin(), e.end(), rmax);
        for (auto it = lo; it != hi; ++it) {
            const double disc = b * b - 4.0 * a * (c0 - (*it) * (*it));
            if (disc < 0.0) continue;
            const double sq = std::sqrt(disc);
            // Stable roots of a t^2 + b t + c = 0.
            const double qq = -0.5 * (b + std::copysign(sq, b));
            if (qq != 0.0) {
                keep(qq / a);
                keep((c0 - (*it) * (*it)) / qq);
            } else {
                keep(0.0);
            }
        }
        // Sector rays at angles k * dtheta, within the angle swept by the segment.
        if (std::abs(p) > 0.0 && std::abs(q) > 0.0) {
            const double dtheta = kTwoPi / pg->n_theta;
            const double th0 = wrap_angle(std::arg(p));
            const double sweep = std::arg(q / p);
            const double lo_a = std::min(th0, th0 + sweep), hi_a = std::max(th0, th0 + sweep);
            for (long long k = static_cast<long long>(std::ceil(lo_a / dtheta));
                 k <= static_cast<long long>(std::floor(hi_a / dtheta)); ++k) {
                const Complex u = std::polar(1.0, k * dtheta);
                const double den = cross(d, u);
                if (den == 0.0) continue;
                keep(-cross(p, u) / den);
            }
        }
    } else {
        const auto& g = std::get<CartesianGrid>(geometry_);
        const double hx = (g.window.x1 - g.window.x0) / g.nx, hy = (g.window.y1 - g.window.y0) / g.ny;
        if (d.real() != 0.0) {
            const double a = std::min(p.real(), q.real()), b = std::max(p.real(), q.real());
            for (long long i = static_cast<long long>(std::ceil((a - g.window.x0) / hx));
                 i <= static_cast<long long>(std::floor((b - g.window.x0) / hx)); ++i)
                keep((g.window.x0 + i * hx - p.real()) / d.real());
        }
        if (d.imag() != 0.0) {
            const double a = std::min(p.imag(), q.imag()), b = std::max(p.imag(), q.imag());
            for (long long j = static_cast<long long>(std::ceil((a - g.window.y0) / hy));
                 j <= static_cast<long long>(std::floor((b - g.window.y0) / hy)); ++j)
                keep((g.window.y0 + j * hy - p.imag()) / d.imag());
        }
    }
    std::sort(ts.begin(), ts.end());
    return ts;
}

std::vector<Complex> DiscretizedDomain::outline(std::size_t cell) const {
    if (const auto* p = std::get_if<PolarGrid>(&geometry_)) {
        const auto n = static_cast<std::size_t>(p->n_theta);
        const std::size_t row = cell / n, col = cell % n;
        const double dtheta = kTwoPi / p->n_theta;
        const double r0 = p->radial_edges[row], r1 = p->radial_edges[row + 1];
        const double a0 = col * dtheta, a1 = (col + 1) * dtheta;
        return {std::polar(r0, a0), std::polar(r1, a0), std::polar(r1, a1), std::polar(r0, a1)};
    }
    const auto& g = std::get<CartesianGrid>(geometry_);
    const auto nx = static_cast<std::size_t>(g.nx);
    const double hx = (g.window.x1 - g.window.x0) / g.nx, hy = (g.window.y1 - g.window.y0) / g.ny;
    const double x0 = g.window.x0 + static_cast<double>(cell % nx) * hx;
    const double y0 = g.window.y0 + static_cast<double>(cell / nx) * hy;
    return {Complex(x0, y0), Complex(x0 + hx, y0), Complex(x0 + hx, y0 + hy), Complex(x0, y0 + hy)};
}

void CurveFamily::validate(const DiscretizedDomain& dom) const {
    for (const auto& c : curves) {
        require(!c.incidences.empty(), "curve without incidences");
        require(c.multiplicity >= 1, "curve multiplicity must be >= 1");
        for (const auto& inc : c.incidences) {
            require(inc.cell < dom.size(), "incidence references an invalid cell");
            require(inc.length_euclid >= 0.0 && inc.length_hyp >= 0.0, "negative incidence length");
        }
    }
}

Curve rasterize(const Polyline& curve, const DiscretizedDomain& dom, int multiplicity) {
    std::map<std::size_t, Incidence> acc;
    for (std::size_t s = 0; s < curve.segment_count(); ++s) {
        const auto [p, q] = curve.segment(s);
        const Complex d = q - p;
        const double len = std::abs(d);
        std::vector<double> ts = dom.crossings(p, q);
        ts.insert(ts.begin(), 0.0);
        ts.push_back(1.0);
        for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
            const double dt = ts[k + 1] - ts[k];
            if (dt <= 0.0) continue;
            const Complex mid = p + 0.5 * (ts[k] + ts[k + 1]) * d;
            const auto cell = dom.locate(mid);
            if (!cell) continue;
            auto& inc = acc[*cell];
            inc.cell = *cell;
            inc.length_euclid += len * dt;
            inc.length_hyp += len * dt * conformal_factor(mid);
        }
    }
    Curve c;
    c.multiplicity = multiplicity;
    for (const auto& [cell, inc] : acc)
        if (inc.length_euclid > 0.0) c.incidences.push_back(inc);
    return c;
}

CurveFamily rasterize_family(const std::vector<Polyline>& curves, const DiscretizedDomain& dom, FamilyKind kind) {
    CurveFamily f;
    f.kind = kind;
    for (const auto& pl : curves) {
        Curve c = rasterize(pl, dom);
        if (!c.incidences.empty()) f.curves.push_back(std::move(c));
    }
    return f;
}

std::vector<Polyline> radial_segments(double R_inner, double R_outer, int n) {
    require(n >= 1 && 0.0 <= R_inner && R_inner < R_outer, "radial_segments needs n >= 1 and R_inner < R_outer");
    std::vector<Polyline> out;
    for (int j = 0; j < n; ++j) {
        const double a = (j + 0.5) * kTwoPi / n;
        out.emplace_back(std::vector<DiskPoint>{DiskPoint(std::polar(R_inner, a)), DiskPoint(std::polar(R_outer, a))});
    }
    return out;
}

std::vector<Polyline> concentric_circles(const std::vector<double>& radii, int n_vertices) {
    require(n_vertices >= 3, "circles need at least 3 vertices");
    std::vector<Polyline> out;
    for (double R : radii) {
        std::vector<DiskPoint> v;
        v.reserve(static_cast<std::size_t>(n_vertices));
        for (int k = 0; k < n_vertices; ++k) v.emplace_back(std::polar(R, k * kTwoPi / n_vertices));
        out.emplace_back(std::move(v), true);
    }
    return out;
}

std::vector<Polyline> horizontal_segments(const Window& w, int n) {
    require(n >= 1, "horizontal_segments needs n >= 1");
    std::vector<Polyline> out;
    const double hy = (w.y1 - w.y0) / n;
    for (int j = 0; j < n; ++j) {
        const double y = w.y0 + (j + 0.5) * hy;
        out.emplace_back(std::vector<DiskPoint>{DiskPoint(w.x0, y), DiskPoint(w.x1, y)});
    }
    return out;
}

namespace {

// Sparse constraint rows b_{g,c} = m_g l_{c,g} in the chosen metric.
struct Problem {
    std::vector<double> area; // metric area times weight
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;
    std::vector<double> diag; // sum_c b^2 / (2 A_c)
};

Problem build_problem(const CurveFamily& family, const DiscretizedDomain& dom, Metric metric,
                      std::span<const double> weights) {
    Problem pb;
    pb.area.resize(dom.size());
    for (std::size_t c = 0; c < dom.size(); ++c) {
        const Cell& cell = dom.cells()[c];
        const double w = weights.empty() ? 1.0 : weights[c];
        require(w > 0.0 && std::isfinite(w), "cell weights must be positive and finite");
        pb.area[c] = (metric == Metric::hyperbolic ? cell.area_hyp : cell.area_euclid) * w;
    }
    for (const auto& curve : family.curves) {
        std::vector<std::pair<std::size_t, double>> row;
        double diag = 0.0;
        for (const auto& inc : curve.incidences) {
            const double b = curve.multiplicity * (metric == Metric::hyperbolic ? inc.length_hyp : inc.length_euclid);
            if (b <= 0.0) continue;
            row.emplace_back(inc.cell, b);
            diag += b * b / (2.0 * pb.area[inc.cell]);
        }
        require(!row.empty(), "curve has zero length in the grid");
        pb.rows.push_back(std::move(row));
        pb.diag.push_back(diag);
    }
    return pb;
}

struct DualState {
    std::vector<double> rho;
    std::vector<double> integrals; // (B rho)_g
    double objective = 0.0;        // dual objective g(lambda)
};

void evaluate(const Problem& pb, const std::vector<double>& lambda, DualState& st) {
    st.rho.assign(pb.area.size(), 0.0);
    for (std::size_t g = 0; g < pb.rows.size(); ++g) {
        if (lambda[g] == 0.0) continue;
        for (const auto& [c, b] : pb.rows[g]) st.rho[c] += lambda[g] * b;
    }
    double energy = 0.0;
    for (std::size_t c = 0; c < st.rho.size(); ++c) {
        if (st.rho[c] == 0.0) continue;
        st.rho[c] /= 2.0 * pb.area[c];
        energy += pb.area[c] * st.rho[c] * st.rho[c];
    }
    st.integrals.assign(pb.rows.size(), 0.0);
    double lsum = 0.0;
    for (std::size_t g = 0; g < pb.rows.size(); ++g) {
        double s = 0.0;
        for (const auto& [c, b] : pb.rows[g]) s += b * st.rho[c];
        st.integrals[g] = s;
        lsum += lambda[g];
    }
    st.objective = lsum - energy;
}

} // namespace

ModulusResult modulus_discrete(const CurveFamily& family, const DiscretizedDomain& dom, Metric metric,
                               const SolverOptions& options, std::span<const double> cell_weights) {
    require(options.tol > 0.0, "solver tolerance must be positive");
    require(cell_weights.empty() || cell_weights.size() == dom.size(), "cell weight count must match the grid");
    family.validate(dom);

    ModulusResult res;
    res.metric = metric;
    res.extremal.rho.assign(dom.size(), 0.0);
    if (family.curves.empty()) return res;

    const Problem pb = build_problem(family, dom, metric, cell_weights);
    const std::size_t n = pb.rows.size();

    // Start from each curve's isolated optimum, then Jacobi-preconditioned
    // projected gradient ascent with Armijo backtracking.
    std::vector<double> lambda(n), trial(n);
    for (std::size_t g = 0; g < n; ++g) lambda[g] = 1.0 / pb.diag[g];

    DualState st, tst;
    evaluate(pb, lambda, st);
    std::deque<double> history{st.objective};
    double step = 1.0;
    res.converged = false;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        double violation = 0.0;
        for (double s : st.integrals) violation = std::max(violation, 1.0 - s);
        if (violation < options.tol && static_cast<int>(history.size()) > options.stall_window) {
            const double old = history.front();
            if (std::abs(st.objective - old) <= options.tol * std::abs(st.objective)) {
                res.converged = true;
                break;
            }
        }

        step = std::min(1.0, 2.0 * step);
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            double ascent = 0.0;
            for (std::size_t g = 0; g < n; ++g) {
                const double grad = 1.0 - st.integrals[g];
                trial[g] = std::max(0.0, lambda[g] + step * grad / pb.diag[g]);
                ascent += grad * (trial[g] - lambda[g]);
            }
            evaluate(pb, trial, tst);
            if (tst.objective >= st.objective + 1e-4 * ascent) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // no ascent direction left at machine precision
        lambda.swap(trial);
        std::swap(st, tst);
        history.push_back(st.objective);
        if (static_cast<int>(history.size()) > options.stall_window + 1) history.pop_front();
    }
    if (!res.converged) {
        // A stalled line search at a feasible point is still an optimum to
        // working precision.
        double violation = 0.0;
        for (double s : st.integrals) violation = std::max(violation, 1.0 - s);
        res.converged = violation < options.tol && it < options.max_iterations;
    }
    res.iterations = it;

    double min_integral = std::numeric_limits<double>::infinity();
    for (double s : st.integrals) min_integral = std::min(min_integral, s);
    res.raw_violation = std::max(0.0, 1.0 - min_integral);
    const double scale = min_integral < 1.0 ? 1.0 / min_integral : 1.0;
    double energy = 0.0;
    for (std::size_t c = 0; c < dom.size(); ++c) {
        res.extremal.rho[c] = st.rho[c] * scale;
        energy += pb.area[c] * res.extremal.rho[c] * res.extremal.rho[c];
    }
    double post_min = std::numeric_limits<double>::infinity();
    for (double s : st.integrals) post_min = std::min(post_min, s * scale);
    res.max_constraint_violation = std::max(0.0, 1.0 - post_min);
    res.value = energy;
    res.dual_bound = st.objective;
    res.duality_gap = std::max(0.0, energy - st.objective);
    return res;
}

double density_energy(const DensityField& density, const DiscretizedDomain& dom, Metric metric,
                      std::span<const double> cell_weights) {
    require(density.rho.size() == dom.size(), "density size must match the grid");
    double e = 0.0;
    for (std::size_t c = 0; c < dom.size(); ++c) {
        const Cell& cell = dom.cells()[c];
        const double w = cell_weights.empty() ? 1.0 : cell_weights[c];
        e += (metric == Metric::hyperbolic ? cell.area_hyp : cell.area_euclid) * w * density.rho[c] * density.rho[c];
    }
    return e;
}

double min_curve_integral(const DensityField& density, const CurveFamily& family, Metric metric) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& curve : family.curves) {
        double s = 0.0;
        for (const auto& inc : curve.incidences)
            s += density.rho.at(inc.cell) * (metric == Metric::hyperbolic ? inc.length_hyp : inc.length_euclid);
        best = std::min(best, curve.multiplicity * s);
    }
    return best;
}

std::string ModulusResult::to_json() const {
    nlohmann::json j;
    j["value"] = value;
    j["iterations"] = iterations;
    j["max_constraint_violation"] = max_constraint_violation;
    j["raw_violation"] = raw_violation;
    j["dual_bound"] = dual_bound;
    j["duality_gap"] = duality_gap;
    j["converged"] = converged;
    j["metric"] = to_string(metric);
    j["cells"] = extremal.rho.size();
    return j.dump(2);
}

double ring_modulus_exact(const RingSpec& ring) {
    ring.validate();
    require(ring.r_inner > 0.0, "ring_modulus_exact needs r_inner > 0");
    return kTwoPi / std::log(euclid_radius(ring.r_outer) / euclid_radius(ring.r_inner));
}

CircleFamilyModulus circle_family_modulus(const RingSpec& ring, const ScalarField& Q, int n_circles, int n_angular,
                                          const SolverOptions& options) {
    require(n_circles >= 4, "circle_family_modulus needs n_circles >= 4");
    require(n_angular >= 16, "circle_family_modulus needs n_angular >= 16");
    ring.validate();
    require(ring.r_inner > 0.0, "circle family ring needs r_inner > 0");
    const ScalarField field = Q.recentered(ring.center);

    const DiscretizedDomain dom = DiscretizedDomain::polar(ring, n_circles, n_angular);
    const auto& edges = std::get<PolarGrid>(dom.geometry()).radial_edges;
    std::vector<double> radii;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) radii.push_back(0.5 * (edges[i] + edges[i + 1]));
    const CurveFamily family =
        rasterize_family(concentric_circles(radii, 8 * n_angular), dom, FamilyKind::circle_family);

    std::vector<double> weights(dom.size());
    for (std::size_t c = 0; c < dom.size(); ++c) {
        const double q = field(dom.cells()[c].center);
        require(q > 0.0 && std::isfinite(q), "Q must be positive and finite on the ring");
        weights[c] = 1.0 / q;
    }

    CircleFamilyModulus out;
    out.solve = modulus_discrete(family, dom, Metric::hyperbolic, options, weights);
    out.value = out.solve.value;
    out.reference = ring_reciprocal_integral(qnorm_profile(Q, ring, 513, 256));
    return out;
}

WeightedInfimum weighted_infimum(std::span<const Atom> phi, double q) {
    require(q > 1.0, "weighted_infimum needs q > 1");
    require(!phi.empty(), "weighted_infimum needs at least one atom");
    for (const auto& a : phi) require(a.value > 0.0 && a.mass > 0.0, "weighted_infimum needs positive values and masses");
    const double lambda = 1.0 / (q - 1.0);
    double s = 0.0;
    for (const auto& a : phi) s += std::pow(a.value, -lambda) * a.mass;
    WeightedInfimum out;
    out.I = std::pow(s, -1.0 / lambda);
    for (const auto& a : phi) out.alpha.push_back(std::pow(a.value, -lambda) / s);
    return out;
}

std::string density_csv(const DiscretizedDomain& dom, const DensityField& density) {
    require(density.rho.size() == dom.size(), "density size must match the grid");
    std::ostringstream os;
    os << std::setprecision(17) << "x,y,rho\n";
    for (std::size_t c = 0; c < dom.size(); ++c)
        os << dom.cells()[c].center.re() << ',' << dom.cells()[c].center.im() << ',' << density.rho[c] << '\n';
    return os.str();
}

} // namespace modlab
