#include "modlab/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "modlab/error.hpp"

namespace modlab {

namespace {

constexpr double kEpsFloor = 1e-4;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ScalarField with_singularity(std::function<double(const DiskPoint&)> f, std::string label,
                             const std::optional<Complex>& singular) {
    return {std::move(f), std::move(label), singular};
}

// Simpson weights for n (odd) uniform nodes with spacing h.
std::vector<double> simpson_weights(std::size_t n, double h) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    for (auto& x : w) x *= h / 3.0;
    return w;
}

// Integral of g over [a, b] (0 < a < b) in the variable u = log t.
double log_simpson(const std::function<double(double)>& g, double a, double b, int n) {
    return simpson([&](double u) {
        const double t = std::exp(u);
        return g(t) * t;
    }, std::log(a), std::log(b), n);
}

double checked_qnorm(const ScalarField& Q, double t, int n_theta) {
    const double q = circle_integral(Q, t, n_theta);
    if (!(q > 0.0)) throw ZeroNorm("||Q||(r) vanishes at r=" + std::to_string(t));
    return q;
}

void require_decreasing(const std::vector<double>& eps) {
    require(!eps.empty(), "epsilon list is empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        require(eps[i] > 0.0, "epsilons must be positive");
        if (i) require(eps[i] < eps[i - 1], "epsilons must be strictly decreasing");
    }
}

} // namespace

ScalarField field_from_spec(const std::string& spec) {
    const Complex origin(0.0, 0.0);
    if (spec.rfind("const:", 0) == 0) {
        double c = 0.0;
        try {
            std::size_t used = 0;
            c = std::stod(spec.substr(6), &used);
            if (used != spec.size() - 6) throw std::invalid_argument(spec);
        } catch (const std::exception&) {
            throw ConfigError("field spec: bad constant in '" + spec + "'");
        }
        if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("field spec: constant must be finite and >= 0");
        return ScalarField::constant(c);
    }
    if (spec == "log-inv-r")
        return with_singularity([](const DiskPoint& z) { return -std::log(z.abs()); }, spec, origin);
    if (spec == "inv-r") return with_singularity([](const DiskPoint& z) { return 1.0 / z.abs(); }, spec, origin);
    if (spec == "inv-r2")
        return with_singularity([](const DiskPoint& z) { return 1.0 / std::norm(z.z()); }, spec, origin);
    if (spec == "radial:hyp")
        return with_singularity([](const DiskPoint& z) { return hyp_radius(z.abs()); }, spec, std::nullopt);
    if (spec == "radial:inv-hyp")
        return with_singularity([](const DiskPoint& z) { return 1.0 / hyp_radius(z.abs()); }, spec, origin);
    if (spec == "radial:log-inv-hyp")
        return with_singularity([](const DiskPoint& z) { return std::abs(std::log(hyp_radius(z.abs()))); }, spec,
                                origin);
    throw ConfigError("field spec: unknown field '" + spec + "'");
}

std::vector<double> default_epsilons(double eps0, int count) {
    require(eps0 > 0.0 && count >= 1, "default_epsilons needs eps0 > 0 and count >= 1");
    std::vector<double> out;
    for (int k = 1; k <= count; ++k) {
        const double e = std::ldexp(eps0, -k);
        if (e < kEpsFloor) break;
        out.push_back(e);
    }
    return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "fit_line needs two or more aligned points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.b = sxx > 0.0 ? sxy / sxx : 0.0;
    f.a = my - f.b * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.a - f.b * x[i];
        ss += r * r;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

std::string to_string(FmoVerdict v) {
    switch (v) {
    case FmoVerdict::fmo: return "fmo";
    case FmoVerdict::not_fmo: return "not_fmo";
    case FmoVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::string to_string(Growth g) {
    switch (g) {
    case Growth::bounded: return "bounded";
    case Growth::log: return "log";
    case Growth::loglog: return "loglog";
    case Growth::other: return "other";
    }
    return "other";
}

std::string to_string(DivergenceVerdict v) {
    switch (v) {
    case DivergenceVerdict::diverges: return "diverges";
    case DivergenceVerdict::converges: return "converges";
    case DivergenceVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

FMOReport fmo_check(const ScalarField& Q, const DiskPoint& center, const std::vector<double>& epsilons,
                    const QuadratureParams& params) {
    require_decreasing(epsilons);
    require(epsilons.back() >= kEpsFloor * (1.0 - 1e-12), "smallest epsilon is below the quadrature floor 1e-4");
    const ScalarField Qc = Q.recentered(center);
    const ScalarField one = with_singularity([](const DiskPoint&) { return 1.0; }, "1", Qc.singular);

    FMOReport rep;
    rep.epsilons = epsilons;
    for (const double eps : epsilons) {
        const double area = ball_integral(one, eps, params.n_r, params.n_theta);
        const double mean = ball_integral(Qc, eps, params.n_r, params.n_theta, &rep.warnings) / area;
        const auto f = Qc.evaluator;
        const ScalarField dev =
            with_singularity([f, mean](const DiskPoint& z) { return std::abs(f(z) - mean); }, "dev", Qc.singular);
        rep.means.push_back(mean);
        rep.oscillations.push_back(ball_integral(dev, eps, params.n_r, params.n_theta) / area);
    }

    const double max_osc = *std::max_element(rep.oscillations.begin(), rep.oscillations.end());
    double scale = 0.0;
    for (const double m : rep.means) scale = std::max(scale, std::abs(m));
    if (max_osc <= 1e-10 * std::max(scale, std::numeric_limits<double>::min())) {
        rep.trend_slope = 0.0;
        rep.verdict = FmoVerdict::fmo;
        return rep;
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (rep.oscillations[i] <= 0.0) continue;
        lx.push_back(-std::log(epsilons[i]));
        ly.push_back(std::log(rep.oscillations[i]));
    }
    rep.trend_slope = lx.size() >= 2 ? fit_line(lx, ly).b : 0.0;
    if (rep.trend_slope > 0.2)
        rep.verdict = FmoVerdict::not_fmo;
    else if (max_osc <= 3.0 * median(rep.oscillations))
        rep.verdict = FmoVerdict::fmo;
    else
        rep.verdict = FmoVerdict::inconclusive;
    return rep;
}

nlohmann::json FMOReport::to_json() const {
    return {{"epsilons", epsilons}, {"means", means},   {"oscillations", oscillations},
            {"trend_slope", trend_slope}, {"verdict", to_string(verdict)}, {"warnings", warnings}};
}

std::string FMOReport::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(17) << "eps,mean,oscillation\n";
    for (std::size_t i = 0; i < epsilons.size(); ++i)
        os << epsilons[i] << ',' << means[i] << ',' << oscillations[i] << '\n';
    return os.str();
}

DivergenceReport divergence_check(const ScalarField& Q, const RingSpec& ring, int n_eps, int n_theta) {
    ring.validate();
    require(n_eps >= 4, "divergence_check needs n_eps >= 4");
    const ScalarField Qc = Q.recentered(ring.center);
    DivergenceReport rep;
    rep.eps0 = ring.r_outer;
    const double floor = std::max(ring.r_inner, kEpsFloor);
    require(floor < rep.eps0 / 2.0, "divergence_check ring too thin");
    for (int k = 1; k <= n_eps; ++k) rep.epsilons.push_back(rep.eps0 * std::pow(floor / rep.eps0, double(k) / n_eps));

    auto g = [&](double t) { return 1.0 / checked_qnorm(Qc, t, n_theta); };
    double acc = 0.0, upper = rep.eps0;
    for (const double e : rep.epsilons) {
        acc += log_simpson(g, e, upper, 17);
        rep.partial_integrals.push_back(acc);
        upper = e;
    }

    const auto& y = rep.partial_integrals;
    const double inf = std::numeric_limits<double>::infinity();
    rep.bounded_residual = inf;
    for (int i = 0; i <= 150; ++i) {
        const double s = 0.5 + 0.01 * i;
        std::vector<double> x;
        for (const double e : rep.epsilons) x.push_back(std::pow(e, s));
        const double r = fit_line(x, y).rms;
        if (r < rep.bounded_residual) {
            rep.bounded_residual = r;
            rep.bounded_exponent = s;
        }
    }
    std::vector<double> xl, xll;
    bool loglog_ok = true;
    for (const double e : rep.epsilons) {
        xl.push_back(-std::log(e));
        if (e >= 1.0) loglog_ok = false;
        xll.push_back(loglog_ok ? std::log(-std::log(e)) : 0.0);
    }
    const LineFit fl = fit_line(xl, y);
    rep.log_residual = fl.b > 0.0 ? fl.rms : inf;
    rep.loglog_residual = inf;
    if (loglog_ok) {
        const LineFit fll = fit_line(xll, y);
        if (fll.b > 0.0) rep.loglog_residual = fll.rms;
    }

    const double unbounded = std::min(rep.log_residual, rep.loglog_residual);
    const double best = std::min(rep.bounded_residual, unbounded);
    const double range = y.back() - y.front();
    if (best > 1e-2 * std::max(std::abs(range), std::abs(y.back())))
        rep.fitted_growth = Growth::other;
    else if (best == rep.bounded_residual)
        rep.fitted_growth = Growth::bounded;
    else if (best == rep.log_residual)
        rep.fitted_growth = Growth::log;
    else
        rep.fitted_growth = Growth::loglog;

    if (unbounded * 10.0 <= rep.bounded_residual)
        rep.verdict = DivergenceVerdict::diverges;
    else if (rep.bounded_residual * 10.0 <= unbounded)
        rep.verdict = DivergenceVerdict::converges;
    else
        rep.verdict = DivergenceVerdict::inconclusive;
    return rep;
}

nlohmann::json DivergenceReport::to_json() const {
    auto finite = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"eps0", eps0},
            {"epsilons", epsilons},
            {"partial_integrals", partial_integrals},
            {"bounded_residual", finite(bounded_residual)},
            {"bounded_exponent", bounded_exponent},
            {"log_residual", finite(log_residual)},
            {"loglog_residual", finite(loglog_residual)},
            {"fitted_growth", to_string(fitted_growth)},
            {"verdict", to_string(verdict)}};
}

std::string DivergenceReport::to_csv() const {
    std::ostringstream os;
    os << std::setprecision(17) << "eps,partial_integral\n";
    for (std::size_t i = 0; i < epsilons.size(); ++i) os << epsilons[i] << ',' << partial_integrals[i] << '\n';
    return os.str();
}

EtaProfile eta_profile(const ScalarField& Q, const RingSpec& ring, int intervals, int n_angular) {
    ring.validate();
    require(ring.r_inner > 0.0, "eta_profile needs r_inner > 0");
    require(intervals >= 2 && intervals % 2 == 0, "eta_profile needs an even number of intervals");
    const ScalarField Qc = Q.recentered(ring.center);
    EtaProfile p;
    p.ring = ring;
    const double h = (ring.r_outer - ring.r_inner) / intervals;
    for (int i = 0; i <= intervals; ++i) {
        const double r = i == intervals ? ring.r_outer : ring.r_inner + i * h;
        p.radii.push_back(r);
        p.qnorm.push_back(checked_qnorm(Qc, r, n_angular));
    }
    const auto w = simpson_weights(p.radii.size(), h);
    for (std::size_t i = 0; i < w.size(); ++i) p.J += w[i] / p.qnorm[i];
    for (const double q : p.qnorm) p.eta0.push_back(1.0 / (p.J * q));
    return p;
}

double EtaProfile::normalization() const {
    const double h = (ring.r_outer - ring.r_inner) / static_cast<double>(radii.size() - 1);
    const auto w = simpson_weights(radii.size(), h);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * eta0[i];
    return s;
}

double eta_weighted_integral(const EtaProfile& profile, std::vector<double> heights) {
    const std::size_t bins = heights.size();
    const std::size_t intervals = profile.radii.size() - 1;
    require(bins >= 1 && intervals % (2 * bins) == 0, "bins must split the profile into even sub-intervals");
    const double width = (profile.ring.r_outer - profile.ring.r_inner) / static_cast<double>(bins);
    double mass = 0.0;
    for (const double v : heights) {
        require(v >= 0.0, "eta heights must be non-negative");
        mass += v * width;
    }
    require(mass > 0.0, "eta has zero mass");
    const std::size_t per = intervals / bins;
    const auto w = simpson_weights(per + 1, width / static_cast<double>(per));
    double total = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        double qb = 0.0;
        for (std::size_t i = 0; i <= per; ++i) qb += w[i] * profile.qnorm[b * per + i];
        const double eta = heights[b] / mass;
        total += eta * eta * qb;
    }
    return total;
}

EtaInequalityReport eta_inequality_check(const ScalarField& Q, const RingSpec& ring, std::size_t n_random,
                                         std::uint64_t seed, int bins) {
    require(bins >= 1, "eta_inequality_check needs bins >= 1");
    const int intervals = 64 * bins;
    const int n_angular = 256;
    const EtaProfile p = eta_profile(Q, ring, intervals, n_angular);

    EtaInequalityReport rep;
    rep.J = p.J;
    rep.inv_J = 1.0 / p.J;
    rep.normalization = p.normalization();

    // Q(z) eta0(h(c, z))^2 over the ring as a genuine 2-D quadrature.
    const ScalarField Qc = Q.recentered(ring.center);
    const double h = (ring.r_outer - ring.r_inner) / intervals;
    const auto f = Qc.evaluator;
    const auto& eta0 = p.eta0;
    const double r0 = ring.r_inner;
    const ScalarField weighted{[f, &eta0, r0, h](const DiskPoint& z) {
                                   const double t = (hyp_radius(z.abs()) - r0) / h;
                                   const auto i = static_cast<std::size_t>(
                                       std::clamp(std::floor(t), 0.0, static_cast<double>(eta0.size() - 2)));
                                   const double s = t - static_cast<double>(i);
                                   const double e = (1.0 - s) * eta0[i] + s * eta0[i + 1];
                                   return f(z) * e * e;
                               },
                               "Q*eta0^2", Qc.singular};
    rep.equality_integral = ring_integral(weighted, ring.r_inner, ring.r_outer, intervals + 1, n_angular);
    rep.equality_rel_error = std::abs(rep.equality_integral - rep.inv_J) / rep.inv_J;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    rep.n_random = n_random;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n_random; ++k) {
        std::vector<double> heights(static_cast<std::size_t>(bins));
        for (auto& v : heights) v = unif(rng);
        const double I = eta_weighted_integral(p, heights);
        rep.min_margin = std::min(rep.min_margin, (I - rep.inv_J) / rep.inv_J);
    }
    if (n_random == 0) rep.min_margin = 0.0;
    rep.uniform_margin =
        (eta_weighted_integral(p, std::vector<double>(static_cast<std::size_t>(bins), 1.0)) - rep.inv_J) / rep.inv_J;

    const auto w = simpson_weights(p.radii.size(), h);
    std::vector<double> eta(p.eta0.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        eta[i] = p.eta0[i] * (1.0 + 0.2 * (unif(rng) - 0.5));
        mass += w[i] * eta[i];
    }
    double I = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) I += w[i] * (eta[i] / mass) * (eta[i] / mass) * p.qnorm[i];
    rep.perturbed_margin = (I - rep.inv_J) / rep.inv_J;

    rep.pass = rep.equality_rel_error <= 1e-6 && std::abs(rep.normalization - 1.0) <= 1e-8 && rep.min_margin >= -1e-9;
    return rep;
}

nlohmann::json EtaInequalityReport::to_json() const {
    return {{"J", J},
            {"inv_J", inv_J},
            {"normalization", normalization},
            {"equality_integral", equality_integral},
            {"equality_rel_error", equality_rel_error},
            {"n_random", n_random},
            {"min_margin", min_margin},
            {"uniform_margin", uniform_margin},
            {"perturbed_margin", perturbed_margin},
            {"pass", pass}};
}

FmoIntegralReport fmo_integral_estimate(const ScalarField& Q, const DiskPoint& center,
                                        const std::vector<double>& epsilons, double eps0, int n_theta) {
    require(eps0 > 0.0 && eps0 < 1.0, "fmo_integral_estimate needs 0 < eps0 < 1");
    require_decreasing(epsilons);
    require(epsilons.front() < eps0, "epsilons must lie below eps0");
    const ScalarField Qc = Q.recentered(center);
    FmoIntegralReport rep;
    rep.eps0 = eps0;
    rep.epsilons = epsilons;
    auto g = [&](double t) {
        const double l = t * std::log(1.0 / t);
        return circle_integral(Qc, t, n_theta) / (l * l);
    };
    double acc = 0.0, upper = eps0;
    for (const double e : epsilons) {
        acc += log_simpson(g, e, upper, 33);
        rep.integrals.push_back(acc);
        upper = e;
    }
    if (epsilons.size() >= 2) {
        std::vector<double> x;
        for (const double e : epsilons) x.push_back(std::log(std::log(1.0 / e)));
        rep.slope = fit_line(x, rep.integrals).b;
    }
    return rep;
}

nlohmann::json FmoIntegralReport::to_json() const {
    return {{"eps0", eps0}, {"epsilons", epsilons}, {"integrals", integrals}, {"slope", slope}};
}

} // namespace modlab
