// modlab: command-line front end for the modulus library.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "modlab/criteria.hpp"
#include "modlab/error.hpp"
#include "modlab/experiments.hpp"
#include "modlab/fuchsian.hpp"
#include "modlab/mappings.hpp"
#include "modlab/modulus.hpp"
#include "modlab/quadrature.hpp"
#include "modlab/svg.hpp"

using namespace modlab;
using nlohmann::json;

namespace {

struct Output {
    std::string format = "json";
    std::string path;
};

void add_output(CLI::App* cmd, Output& out, std::vector<std::string> formats) {
    cmd->add_option("--out", out.format, "output format")->check(CLI::IsMember(formats));
    cmd->add_option("-o,--output", out.path, "write to file instead of stdout");
}

void emit(const Output& out, const std::string& text) {
    if (out.path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(out.path, std::ios::binary);
    if (!f) throw Error("cannot write " + out.path);
    f << text;
}

Complex parse_point(const std::string& s) {
    std::stringstream ss(s);
    double x = 0.0, y = 0.0;
    char comma = 0;
    if (!(ss >> x >> comma >> y) || comma != ',') throw ConfigError("point must be given as x,y: '" + s + "'");
    return {x, y};
}

std::pair<int, int> parse_grid(const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos) throw ConfigError("grid must be NRxNT: '" + s + "'");
    try {
        return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
    } catch (const std::exception&) {
        throw ConfigError("grid must be NRxNT: '" + s + "'");
    }
}

RingSpec make_ring(double r1, double r2) {
    try {
        return RingSpec(r1, r2);
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"modlab: moduli of curve families on hyperbolic surfaces"};
    app.require_subcommand(1);

    Output out;
    double r1 = 0.5, r2 = 1.5, tol = 1e-4;
    std::string grid = "200x600", metric = "hyperbolic", qspec = "const:1", center = "0,0", map_spec, group_file,
                config, suite_dir, out_dir = "modlab-out";
    int n_circles = 64, n_angular = 64, samples = 129, angular = 256, eps_count = 16, n_eps = 20, resolution = 240,
        dgrid = 32;
    double eps_start = 0.2;

    auto* ring_cmd = app.add_subcommand("ring-modulus", "discrete modulus of the radial family of a ring");
    ring_cmd->add_option("--r1", r1, "inner hyperbolic radius")->required();
    ring_cmd->add_option("--r2", r2, "outer hyperbolic radius")->required();
    ring_cmd->add_option("--grid", grid, "polar grid NRxNT");
    ring_cmd->add_option("--tol", tol, "solver tolerance");
    ring_cmd->add_option("--metric", metric)->check(CLI::IsMember({"hyperbolic", "euclidean"}));
    add_output(ring_cmd, out, {"json", "csv", "svg"});

    auto* circle_cmd = app.add_subcommand("circle-family", "weighted circle-family modulus against its profile bound");
    circle_cmd->add_option("--r1", r1)->required();
    circle_cmd->add_option("--r2", r2)->required();
    circle_cmd->add_option("--q", qspec, "field spec");
    circle_cmd->add_option("--n-circles", n_circles);
    circle_cmd->add_option("--n-angular", n_angular);
    add_output(circle_cmd, out, {"json"});

    auto* qnorm_cmd = app.add_subcommand("qnorm", "radial profile ||Q||(r)");
    qnorm_cmd->add_option("--q", qspec)->required();
    qnorm_cmd->add_option("--r1", r1)->required();
    qnorm_cmd->add_option("--r2", r2)->required();
    qnorm_cmd->add_option("--samples", samples);
    qnorm_cmd->add_option("--angular", angular);
    add_output(qnorm_cmd, out, {"json", "csv"});

    auto* fmo_cmd = app.add_subcommand("fmo", "finite mean oscillation verdict at a point");
    fmo_cmd->add_option("--q", qspec)->required();
    fmo_cmd->add_option("--center", center, "x,y");
    fmo_cmd->add_option("--eps-start", eps_start);
    fmo_cmd->add_option("--eps-count", eps_count);
    add_output(fmo_cmd, out, {"json", "csv", "svg"});

    auto* div_cmd = app.add_subcommand("divergence", "growth of the reciprocal profile integral");
    div_cmd->add_option("--q", qspec)->required();
    div_cmd->add_option("--r1", r1, "smallest epsilon")->required();
    div_cmd->add_option("--r2", r2, "eps0")->required();
    div_cmd->add_option("--n-eps", n_eps);
    add_output(div_cmd, out, {"json", "csv", "svg"});

    auto* dir_cmd = app.add_subcommand("dirichlet", "Dirichlet domain of a group");
    dir_cmd->add_option("--group", group_file)->required()->check(CLI::ExistingFile);
    dir_cmd->add_option("--center", center, "x,y");
    dir_cmd->add_option("--resolution", resolution);
    add_output(dir_cmd, out, {"svg", "json"});

    auto* dist_cmd = app.add_subcommand("distortion", "Wirtinger derivatives and dilatation on a grid");
    dist_cmd->add_option("--map", map_spec)->required();
    dist_cmd->add_option("--grid", dgrid);
    add_output(dist_cmd, out, {"csv", "json"});

    auto* verify_cmd = app.add_subcommand("verify", "run one experiment config");
    std::string verify_kind;
    verify_cmd->add_option("kind", verify_kind)->required()->check(CLI::IsMember({"lower-q", "boundary-ext"}));
    verify_cmd->add_option("--config", config)->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("--out-dir", out_dir, "artifact directory");

    auto* suite_cmd = app.add_subcommand("suite", "run every config in a directory");
    suite_cmd->add_option("dir", suite_dir)->required();
    suite_cmd->add_option("--out-dir", out_dir, "report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ring_cmd) {
            const auto [nr, nt] = parse_grid(grid);
            const RingSpec ring = make_ring(r1, r2);
            const auto dom = DiscretizedDomain::polar(ring, nr, nt);
            const auto& edges = std::get<PolarGrid>(dom.geometry()).radial_edges;
            const auto family = rasterize_family(radial_segments(edges.front(), edges.back(), nt), dom);
            SolverOptions opts;
            opts.tol = tol;
            const auto res = modulus_discrete(family, dom, metric == "euclidean" ? Metric::euclidean : Metric::hyperbolic, opts);
            if (out.format == "csv") {
                emit(out, density_csv(dom, res.extremal));
            } else if (out.format == "svg") {
                emit(out, svg_heatmap(dom, res.extremal.rho, "extremal density"));
            } else {
                json j = json::parse(res.to_json());
                const double exact = ring_modulus_exact(ring);
                j["exact"] = exact;
                j["relative_error"] = std::abs(res.value - exact) / exact;
                j["grid"] = {nr, nt};
                emit(out, j.dump(2));
            }
            return res.converged ? 0 : 1;
        }
        if (*circle_cmd) {
            const auto r = circle_family_modulus(make_ring(r1, r2), field_from_spec(qspec), n_circles, n_angular);
            emit(out, json{{"value", r.value},
                           {"reference", r.reference},
                           {"relative_difference", std::abs(r.value - r.reference) / r.reference},
                           {"solve", json::parse(r.solve.to_json())}}
                          .dump(2));
            return 0;
        }
        if (*qnorm_cmd) {
            const auto p = qnorm_profile(field_from_spec(qspec), make_ring(r1, r2), samples, angular);
            emit(out, out.format == "csv" ? p.to_csv() : p.to_json());
            return 0;
        }
        if (*fmo_cmd) {
            const auto eps = default_epsilons(eps_start, eps_count);
            if (eps.size() < 2) throw ConfigError("need at least two epsilons above 1e-4");
            const auto r = fmo_check(field_from_spec(qspec), DiskPoint(parse_point(center)), eps);
            if (out.format == "csv")
                emit(out, r.to_csv());
            else if (out.format == "svg")
                emit(out, svg_loglog({{"oscillation", r.epsilons, r.oscillations}}, "mean oscillation", "eps", "oscillation"));
            else
                emit(out, r.to_json().dump(2));
            return 0;
        }
        if (*div_cmd) {
            const auto r = divergence_check(field_from_spec(qspec), make_ring(r1, r2), n_eps);
            if (out.format == "csv")
                emit(out, r.to_csv());
            else if (out.format == "svg")
                emit(out, svg_loglog({{"partial integral", r.epsilons, r.partial_integrals}}, "partial integrals", "eps",
                                     "integral"));
            else
                emit(out, r.to_json().dump(2));
            return 0;
        }
        if (*dir_cmd) {
            const auto group = FuchsianGroup::from_json_file(group_file);
            const DiskPoint c(parse_point(center));
            const DirichletDomain dom(c, group);
            if (out.format == "json") {
                emit(out, json{{"center", {c.re(), c.im()}},
                               {"constraints", dom.constraints().size()},
                               {"elements", group.elements().size()},
                               {"injectivity_radius", injectivity_radius(c, group)}}
                              .dump(2));
            } else {
                emit(out, svg_dirichlet(dom, resolution));
            }
            return 0;
        }
        if (*dist_cmd) {
            const SampleMap f = SampleMap::from_spec(map_spec);
            if (out.format == "json") {
                const auto r = finite_distortion_check(f, dgrid);
                json v = json::array();
                for (const auto& z : r.violations) v.push_back({z.re(), z.im()});
                emit(out, json{{"map", f.to_json()}, {"grid", r.grid}, {"points", r.points}, {"violations", v},
                               {"pass", r.pass}}
                              .dump(2));
            } else {
                emit(out, distortion_csv(f, dgrid));
            }
            return 0;
        }
        if (*verify_cmd) {
            ExperimentConfig cfg = ExperimentConfig::from_file(config);
            const std::string expected = verify_kind == "lower-q" ? "lower_q" : "boundary_ext";
            if (cfg.kind != expected) throw ConfigError("config kind '" + cfg.kind + "' does not match '" + verify_kind + "'");
            cfg.output_dir = (std::filesystem::path(out_dir) / cfg.id).string();
            const auto rec = run_experiment(cfg);
            std::cout << rec.to_json().dump(2) << '\n';
            return rec.pass ? 0 : 1;
        }
        if (*suite_cmd) {
            const auto res = run_suite(suite_dir, out_dir);
            for (const auto& r : res.records)
                std::cout << (r.pass ? "PASS " : "FAIL ") << r.id << "  ratio=" << r.ratio
                          << (r.error ? "  error: " + *r.error : std::string()) << '\n';
            std::cout << "report: " << (std::filesystem::path(out_dir) / "report.json").string() << '\n';
            return res.exit_code;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
