#pragma once

// Numeric verdicts for the analytic hypotheses on Q: finite mean
// oscillation at a point, divergence of the reciprocal profile integral,
// extremality of the weight eta_0 and the FMO log-log integral estimate.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "modlab/quadrature.hpp"

namespace modlab {

/// Fixed catalog of fields about the origin: const:<c>, log-inv-r,
/// inv-r, inv-r2 (Euclidean |z|), radial:hyp, radial:inv-hyp,
/// radial:log-inv-hyp (hyperbolic h(0, z)). Throws ConfigError.
ScalarField field_from_spec(const std::string& spec);

/// eps0 * 2^-k for k = 1..count, stopping at the quadrature floor 1e-4.
std::vector<double> default_epsilons(double eps0, int count);

struct QuadratureParams {
    int n_r = 129;
    int n_theta = 256;
};

enum class FmoVerdict { fmo, not_fmo, inconclusive };
std::string to_string(FmoVerdict v);

struct FMOReport {
    std::vector<double> epsilons;
    std::vector<double> means;
    std::vector<double> oscillations;
    double trend_slope = 0.0; // d log(osc) / d log(1/eps)
    FmoVerdict verdict = FmoVerdict::inconclusive;
    Warnings warnings;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

FMOReport fmo_check(const ScalarField& Q, const DiskPoint& center, const std::vector<double>& epsilons,
                    const QuadratureParams& params = {});

enum class Growth { bounded, log, loglog, other };
enum class DivergenceVerdict { diverges, converges, inconclusive };
std::string to_string(Growth g);
std::string to_string(DivergenceVerdict v);

struct DivergenceReport {
    double eps0 = 0.0;
    std::vector<double> epsilons;
    std::vector<double> partial_integrals;
    double bounded_residual = 0.0;
    double log_residual = 0.0;
    double loglog_residual = 0.0;
    double bounded_exponent = 0.0;
    Growth fitted_growth = Growth::other;
    DivergenceVerdict verdict = DivergenceVerdict::inconclusive;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// Partial integrals of dt/||Q||(t) from eps_k up to eps0 = ring.r_outer,
/// eps_k geometric from eps0/2 down to max(ring.r_inner, 1e-4). Fits
/// a + b eps^s (s in [0.5, 2]) against a + b log(1/eps) and
/// a + b loglog(1/eps); a factor 10 in RMS residual decides.
DivergenceReport divergence_check(const ScalarField& Q, const RingSpec& ring, int n_eps = 20, int n_theta = 256);

struct EtaProfile {
    RingSpec ring;
    double J = 0.0;
    std::vector<double> radii; // uniform nodes over [r_inner, r_outer]
    std::vector<double> qnorm;
    std::vector<double> eta0;

    /// Composite Simpson of eta0 over the nodes.
    double normalization() const;
};

/// 2048 intervals by default (64 per random-weight bin).
EtaProfile eta_profile(const ScalarField& Q, const RingSpec& ring, int intervals = 2048, int n_angular = 256);

struct EtaInequalityReport {
    double J = 0.0;
    double inv_J = 0.0;
    double normalization = 0.0;
    double equality_integral = 0.0; // 2-D quadrature of Q eta0(h)^2
    double equality_rel_error = 0.0;
    std::size_t n_random = 0;
    double min_margin = 0.0;    // min over random eta of (I - 1/J) / (1/J)
    double uniform_margin = 0.0;
    double perturbed_margin = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

EtaInequalityReport eta_inequality_check(const ScalarField& Q, const RingSpec& ring, std::size_t n_random,
                                         std::uint64_t seed, int bins = 32);

/// Weighted integral of a piecewise-constant eta (equal bins) against the
/// profile, with eta renormalized to unit mass.
double eta_weighted_integral(const EtaProfile& profile, std::vector<double> heights);

struct FmoIntegralReport {
    double eps0 = 0.0;
    std::vector<double> epsilons;
    std::vector<double> integrals;
    double slope = 0.0; // against loglog(1/eps)

    nlohmann::json to_json() const;
};

/// Integral of Q (h log(1/h))^-2 over eps < h < eps0 about the center.
FmoIntegralReport fmo_integral_estimate(const ScalarField& Q, const DiskPoint& center,
                                        const std::vector<double>& epsilons, double eps0 = 0.5, int n_theta = 256);

/// Least-squares line y = a + b x; returns {a, b, rms residual}.
struct LineFit {
    double a = 0.0;
    double b = 0.0;
    double rms = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace modlab
