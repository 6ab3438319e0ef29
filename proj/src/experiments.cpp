#include "modlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "modlab/error.hpp"
#include "modlab/fuchsian.hpp"
#include "modlab/svg.hpp"

namespace modlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "id",      "kind",          "seed",           "map",          "ring",       "n_circles",         "n_angular",
    "profile_samples", "profile_angular", "multiplicity_targets", "ratio_tolerance", "boundary_angle",
    "approach_angles", "k_max",   "residual_tolerance", "expect", "group", "center", "radius_fraction", "pairs",
    "isometry_tolerance", "description"};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void check_range(const char* key, double v, double lo, double hi) {
    if (!(v >= lo && v <= hi)) {
        std::ostringstream os;
        os << "config key '" << key << "' = " << v << " outside [" << lo << ", " << hi << "]";
        throw ConfigError(os.str());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

json ring_json(const RingSpec& r) {
    return {{"r_inner", r.r_inner}, {"r_outer", r.r_outer}, {"center", {r.center.re(), r.center.im()}}};
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!kKnownKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
    ExperimentConfig c;
    c.id = get_or<std::string>(j, "id", "");
    c.kind = get_or<std::string>(j, "kind", "");
    if (c.id.empty()) throw ConfigError("config needs a non-empty 'id'");
    if (c.id.find_first_of("/\\") != std::string::npos || c.id == "." || c.id == "..")
        throw ConfigError("config id must be a plain name");
    if (c.kind != "lower_q" && c.kind != "boundary_ext" && c.kind != "local_isometry")
        throw ConfigError("unknown experiment kind '" + c.kind + "'");
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);

    if (c.kind != "local_isometry") {
        if (!j.contains("map")) throw ConfigError("experiment '" + c.id + "' needs a 'map'");
        c.map_json = j.at("map");
        SampleMap::from_json(c.map_json);
    }
    if (j.contains("ring")) {
        const json& r = j.at("ring");
        try {
            c.ring = RingSpec(get_or<double>(r, "r_inner", 0.5), get_or<double>(r, "r_outer", 1.5));
        } catch (const PreconditionError& e) {
            throw ConfigError(std::string("ring: ") + e.what());
        }
    }
    c.n_circles = get_or(j, "n_circles", c.n_circles);
    c.n_angular = get_or(j, "n_angular", c.n_angular);
    c.profile_samples = get_or(j, "profile_samples", c.profile_samples);
    c.profile_angular = get_or(j, "profile_angular", c.profile_angular);
    c.multiplicity_targets = get_or(j, "multiplicity_targets", c.multiplicity_targets);
    c.ratio_tolerance = get_or(j, "ratio_tolerance", c.ratio_tolerance);
    check_range("n_circles", c.n_circles, 4, 512);
    check_range("n_angular", c.n_angular, 16, 1024);
    check_range("profile_samples", c.profile_samples, 8, 8193);
    check_range("profile_angular", c.profile_angular, 16, 8192);
    check_range("multiplicity_targets", c.multiplicity_targets, 1, 1000);
    check_range("ratio_tolerance", c.ratio_tolerance, 0.0, 1.0);

    c.boundary_angle = get_or(j, "boundary_angle", c.boundary_angle);
    c.approach_angles = get_or(j, "approach_angles", c.approach_angles);
    c.k_max = get_or(j, "k_max", c.k_max);
    c.residual_tolerance = get_or(j, "residual_tolerance", c.residual_tolerance);
    c.expect = get_or(j, "expect", c.expect);
    check_range("k_max", c.k_max, 4, 28);
    check_range("residual_tolerance", c.residual_tolerance, 0.0, 1.0);
    if (c.approach_angles.empty()) throw ConfigError("approach_angles must not be empty");
    for (const double a : c.approach_angles) check_range("approach_angles", a, -1.5, 1.5);
    if (c.expect != "pass" && c.expect != "fail") throw ConfigError("expect must be 'pass' or 'fail'");

    if (c.kind == "local_isometry") {
        const std::string g = get_or<std::string>(j, "group", "");
        if (g.empty()) throw ConfigError("local_isometry needs a 'group' file");
        fs::path p(g);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        if (!fs::exists(p)) throw ConfigError("group file not found: " + p.string());
        c.group_file = p.string();
    }
    if (j.contains("center")) {
        const auto v = get_or<std::vector<double>>(j, "center", {});
        if (v.size() != 2) throw ConfigError("center must be [re, im]");
        c.center = {v[0], v[1]};
        if (!DiskPoint::admissible(c.center)) throw ConfigError("center must lie inside the disk");
    }
    c.radius_fraction = get_or(j, "radius_fraction", c.radius_fraction);
    c.pairs = get_or(j, "pairs", c.pairs);
    c.isometry_tolerance = get_or(j, "isometry_tolerance", c.isometry_tolerance);
    check_range("radius_fraction", c.radius_fraction, 1e-6, 0.999999);
    check_range("pairs", c.pairs, 1, 100000);
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
}

json VerdictRecord::to_json(bool with_runtime) const {
    json prov = json::array();
    for (const auto& p : provenance) prov.push_back({{"quantity", p.quantity}, {"op", p.op}, {"params", p.params}});
    json j = {{"id", id},
              {"kind", kind},
              {"lhs", lhs},
              {"rhs", rhs},
              {"ratio", ratio},
              {"tolerance", tolerance},
              {"pass", pass},
              {"provenance", prov},
              {"details", details}};
    if (with_runtime) j["runtime_s"] = runtime_s;
    if (error) j["error"] = *error;
    return j;
}

VerdictRecord run_lower_q_verification(const ExperimentConfig& cfg) {
    const SampleMap f = SampleMap::from_json(cfg.map_json);
    require(f.preserves_centered_circles(), "lower_q needs a map sending circles about 0 to circles about 0");
    const RingSpec& ring = cfg.ring;
    require(ring.center.z() == Complex(0.0, 0.0) && ring.r_inner > 0.0, "lower_q needs a ring about 0 with r_inner > 0");

    const DiscretizedDomain src = DiscretizedDomain::polar(ring, cfg.n_circles, cfg.n_angular);
    const auto& edges = std::get<PolarGrid>(src.geometry()).radial_edges;
    std::vector<double> radii, image_edges;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) radii.push_back(0.5 * (edges[i] + edges[i + 1]));
    for (const double e : edges) image_edges.push_back(std::abs(f.eval(Complex(e, 0.0))));
    for (std::size_t i = 1; i < image_edges.size(); ++i)
        require(image_edges[i] > image_edges[i - 1], "map must increase |z| on the ring");
    const DiscretizedDomain img = DiscretizedDomain::polar_edges(image_edges, cfg.n_angular);
    const int n_vertices = 8 * cfg.n_angular;
    const CurveFamily family =
        pushforward_family(f, concentric_circles(radii, n_vertices), img, FamilyKind::circle_family);
    const ModulusResult lhs = modulus_discrete(family, img, Metric::hyperbolic);

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<DiskPoint> targets;
    for (int k = 0; k < cfg.multiplicity_targets; ++k) {
        const double R = image_edges.front() + u(rng) * (image_edges.back() - image_edges.front());
        targets.emplace_back(std::polar(R, 2.0 * std::numbers::pi * u(rng)));
    }
    const MultiplicityReport mult = multiplicity(f, targets);
    const double N = mult.supremum;
    require(N >= 1.0, "no preimages found for the multiplicity targets");

    const ScalarField Q{[f, N](const DiskPoint& z) {
                            const Dilatation K = dilatation(f, z);
                            if (K.infinite) throw PreconditionError("dilatation is infinite inside the ring");
                            return N * K.K;
                        },
                        "N*K_f", std::nullopt};
    const RadialProfile profile = qnorm_profile(Q, ring, cfg.profile_samples, cfg.profile_angular);
    const double rhs = ring_reciprocal_integral(profile);

    VerdictRecord rec;
    rec.id = cfg.id;
    rec.kind = cfg.kind;
    rec.lhs = lhs.value;
    rec.rhs = rhs;
    rec.ratio = lhs.value / rhs;
    rec.tolerance = cfg.ratio_tolerance;
    rec.pass = rec.ratio >= 1.0 - cfg.ratio_tolerance;
    rec.provenance = {
        {"lhs", "modulus::modulus_discrete",
         {{"family", "mappings::pushforward_family of concentric circles"},
          {"n_circles", cfg.n_circles},
          {"n_vertices", n_vertices},
          {"grid", "polar_edges"},
          {"n_theta", cfg.n_angular},
          {"metric", "hyperbolic"},
          {"map", f.to_json()}}},
        {"N", "mappings::multiplicity",
         {{"targets", cfg.multiplicity_targets}, {"seed", cfg.seed}, {"seed_grid", 24}}},
        {"rhs", "quadrature::ring_reciprocal_integral",
         {{"field", "N*K_f"},
          {"ring", ring_json(ring)},
          {"profile_samples", cfg.profile_samples},
          {"profile_angular", cfg.profile_angular}}}};
    rec.details = {{"multiplicity", mult.supremum},
                   {"incomplete_search", mult.incomplete_search},
                   {"solver_iterations", lhs.iterations},
                   {"solver_converged", lhs.converged},
                   {"duality_gap", lhs.duality_gap},
                   {"curves", family.curves.size()},
                   {"image_radius_inner", image_edges.front()},
                   {"image_radius_outer", image_edges.back()},
                   {"calibration_c", rec.ratio}};

    if (!cfg.output_dir.empty()) {
        const fs::path out(cfg.output_dir);
        write_text(out / "extremal_density.csv", density_csv(img, lhs.extremal));
        write_text(out / "extremal_density.svg", svg_heatmap(img, lhs.extremal.rho, cfg.id + ": extremal density"));
        write_text(out / "qnorm_profile.csv", profile.to_csv());
    }
    return rec;
}

VerdictRecord run_boundary_extension_probe(const ExperimentConfig& cfg) {
    const SampleMap f = SampleMap::from_json(cfg.map_json);
    const Complex b = std::polar(1.0, cfg.boundary_angle);
    const int K = cfg.k_max;
    const std::size_t P = cfg.approach_angles.size();

    std::vector<std::vector<Complex>> w(P, std::vector<Complex>(static_cast<std::size_t>(K)));
    std::vector<double> ts;
    for (int k = 1; k <= K; ++k) ts.push_back(std::ldexp(1.0, -k));
    for (std::size_t j = 0; j < P; ++j) {
        for (int k = 0; k < K; ++k) {
            const Complex p = b * (1.0 - ts[static_cast<std::size_t>(k)] * std::polar(1.0, cfg.approach_angles[j]));
            if (!DiskPoint::admissible(p)) throw ConfigError("approach path leaves the disk");
            w[j][static_cast<std::size_t>(k)] = f.eval(p);
        }
    }

    std::vector<double> residual(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) {
        double r = 0.0;
        const auto kk = static_cast<std::size_t>(k);
        for (std::size_t a = 0; a < P; ++a) {
            for (std::size_t c = a + 1; c < P; ++c) r = std::max(r, std::abs(w[a][kk] - w[c][kk]));
            // indices are 0-based for k = 1..K, so the window [k, 2k] is [kk, 2kk + 1]
            for (int m = k; m <= std::min(2 * k + 1, K - 1); ++m)
                r = std::max(r, std::abs(w[a][static_cast<std::size_t>(m)] - w[a][kk]));
        }
        residual[kk] = r;
    }
    std::vector<double> envelope(residual.size());
    double run = 0.0;
    for (std::size_t i = residual.size(); i-- > 0;) {
        run = std::max(run, residual[i]);
        envelope[i] = run;
    }
    const std::size_t half = static_cast<std::size_t>(K / 2);
    const double tail = envelope[half];
    const bool contracts = tail <= cfg.residual_tolerance;

    VerdictRecord rec;
    rec.id = cfg.id;
    rec.kind = cfg.kind;
    rec.lhs = tail;
    rec.rhs = cfg.residual_tolerance;
    rec.ratio = cfg.residual_tolerance > 0.0 ? tail / cfg.residual_tolerance : 0.0;
    rec.tolerance = cfg.residual_tolerance;
    rec.pass = contracts == (cfg.expect == "pass");
    rec.provenance = {{"lhs", "experiments::boundary_residual",
                       {{"map", f.to_json()},
                        {"boundary_angle", cfg.boundary_angle},
                        {"approach_angles", cfg.approach_angles},
                        {"k_max", K},
                        {"distance", "euclidean chart"},
                        {"window", "max over paths and m in [k, 2k]"}}}};
    json limits = json::array();
    for (std::size_t j = 0; j < P; ++j) limits.push_back({w[j].back().real(), w[j].back().imag()});
    rec.details = {{"t", ts},
                   {"residual", residual},
                   {"envelope", envelope},
                   {"contracts", contracts},
                   {"expect", cfg.expect},
                   {"final_images", limits}};

    if (!cfg.output_dir.empty()) {
        const fs::path out(cfg.output_dir);
        std::ostringstream csv;
        csv.precision(17);
        csv << "k,t,residual,envelope\n";
        for (int k = 0; k < K; ++k)
            csv << k + 1 << ',' << ts[static_cast<std::size_t>(k)] << ',' << residual[static_cast<std::size_t>(k)] << ','
                << envelope[static_cast<std::size_t>(k)] << '\n';
        write_text(out / "residuals.csv", csv.str());
        write_text(out / "residuals.svg", svg_loglog({{"residual", ts, residual}, {"envelope", ts, envelope}},
                                                     cfg.id + ": boundary Cauchy residual", "t", "residual"));
    }
    return rec;
}

VerdictRecord run_local_isometry(const ExperimentConfig& cfg) {
    const FuchsianGroup group = FuchsianGroup::from_json_file(cfg.group_file);
    const DiskPoint center(cfg.center);
    const double inj = injectivity_radius(center, group);
    require(std::isfinite(inj), "local_isometry needs a non-trivial group");
    const double radius = cfg.radius_fraction * inj / 2.0;
    const NormalNeighborhood nb(center, radius, group);
    const IsometryCheck check = nb.sample_isometry(static_cast<std::size_t>(cfg.pairs), static_cast<unsigned>(cfg.seed));

    VerdictRecord rec;
    rec.id = cfg.id;
    rec.kind = cfg.kind;
    rec.lhs = check.max_deviation;
    rec.rhs = cfg.isometry_tolerance;
    rec.ratio = cfg.isometry_tolerance > 0.0 ? check.max_deviation / cfg.isometry_tolerance : 0.0;
    rec.tolerance = cfg.isometry_tolerance;
    rec.pass = check.max_deviation <= cfg.isometry_tolerance;
    rec.provenance = {{"lhs", "fuchsian::NormalNeighborhood::sample_isometry",
                       {{"group", fs::path(cfg.group_file).filename().string()},
                        {"center", {center.re(), center.im()}},
                        {"radius", radius},
                        {"pairs", cfg.pairs},
                        {"seed", cfg.seed}}},
                      {"injectivity_radius", "fuchsian::injectivity_radius", {{"elements", group.elements().size()}}}};
    rec.details = {{"injectivity_radius", inj}, {"radius", radius}, {"samples", check.samples}};

    if (!cfg.output_dir.empty()) {
        const DirichletDomain dom(center, group);
        write_text(fs::path(cfg.output_dir) / "dirichlet.svg", svg_dirichlet(dom, 160));
    }
    return rec;
}

VerdictRecord run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    VerdictRecord rec;
    if (cfg.kind == "lower_q")
        rec = run_lower_q_verification(cfg);
    else if (cfg.kind == "boundary_ext")
        rec = run_boundary_extension_probe(cfg);
    else if (cfg.kind == "local_isometry")
        rec = run_local_isometry(cfg);
    else
        throw ConfigError("unknown experiment kind '" + cfg.kind + "'");
    rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.output_dir.empty()) write_text(fs::path(cfg.output_dir) / "verdict.json", rec.to_json().dump(2) + "\n");
    return rec;
}

json SuiteResult::report(bool with_runtime) const {
    json recs = json::array();
    bool all = true;
    for (const auto& r : records) {
        recs.push_back(r.to_json(with_runtime));
        all = all && r.pass;
    }
    return {{"schema", kReportSchema}, {"records", recs}, {"all_pass", all}, {"exit_code", exit_code}};
}

SuiteResult run_suite(const fs::path& dir, const fs::path& out_dir) {
    if (!fs::is_directory(dir)) throw ConfigError("suite directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    SuiteResult result;
    std::set<std::string> seen;
    for (const auto& file : files) {
        const auto t0 = std::chrono::steady_clock::now();
        VerdictRecord rec;
        try {
            ExperimentConfig cfg = ExperimentConfig::from_file(file);
            if (!seen.insert(cfg.id).second) throw ConfigError("duplicate experiment id '" + cfg.id + "'");
            cfg.output_dir = (out_dir / cfg.id).string();
            rec = run_experiment(cfg);
        } catch (const std::exception& e) {
            rec = VerdictRecord{};
            rec.id = file.stem().string();
            rec.kind = "error";
            rec.pass = false;
            rec.error = e.what();
            rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        result.records.push_back(std::move(rec));
    }
    result.exit_code = std::all_of(result.records.begin(), result.records.end(),
                                   [](const VerdictRecord& r) { return r.pass; })
                           ? 0
                           : 1;
    write_text(out_dir / "report.json", result.report().dump(2) + "\n");
    return result;
}

} // namespace modlab
