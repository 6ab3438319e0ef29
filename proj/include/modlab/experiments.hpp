#pragma once

// End-to-end experiments driven by JSON configs, producing VerdictRecords.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modlab/mappings.hpp"
#include "modlab/quadrature.hpp"

namespace modlab {

inline constexpr const char* kReportSchema = "modlab.report/1";

/// Parsed experiment description. `kind` is one of lower_q, boundary_ext,
/// local_isometry.
struct ExperimentConfig {
    std::string id;
    std::string kind;
    std::uint64_t seed = 1;
    std::string output_dir;
    nlohmann::json map_json;

    // lower_q
    RingSpec ring{0.5, 1.5};
    int n_circles = 64;
    int n_angular = 64;
    int profile_samples = 513;
    int profile_angular = 256;
    int multiplicity_targets = 16;
    double ratio_tolerance = 0.05;

    // boundary_ext
    double boundary_angle = 0.0;
    std::vector<double> approach_angles{-1.0471975511965976, 0.0, 1.0471975511965976};
    int k_max = 26;
    double residual_tolerance = 1e-3;
    std::string expect = "pass";

    // local_isometry
    std::string group_file;
    Complex center{0.0, 0.0};
    double radius_fraction = 0.9;
    int pairs = 500;
    double isometry_tolerance = 1e-9;

    /// Throws ConfigError on unknown kinds, bad values or resolutions above
    /// the caps. Relative group paths resolve against base_dir.
    static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static ExperimentConfig from_file(const std::filesystem::path& path);
};

struct Provenance {
    std::string quantity;
    std::string op; // module::operation
    nlohmann::json params;
};

struct VerdictRecord {
    std::string id;
    std::string kind;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double runtime_s = 0.0;
    std::vector<Provenance> provenance;
    nlohmann::json details = nlohmann::json::object();
    std::optional<std::string> error;

    nlohmann::json to_json(bool with_runtime = true) const;
};

VerdictRecord run_lower_q_verification(const ExperimentConfig& cfg);
VerdictRecord run_boundary_extension_probe(const ExperimentConfig& cfg);
VerdictRecord run_local_isometry(const ExperimentConfig& cfg);
/// Dispatches on cfg.kind and fills runtime_s; writes artifacts when
/// output_dir is set.
VerdictRecord run_experiment(const ExperimentConfig& cfg);

struct SuiteResult {
    std::vector<VerdictRecord> records;
    int exit_code = 0;

    nlohmann::json report(bool with_runtime = true) const;
};

/// Runs every *.json in dir (sorted by name), each isolated: a failing or
/// malformed config yields an errored record and the rest still run.
/// Writes <out_dir>/<id>/ artifacts and <out_dir>/report.json.
SuiteResult run_suite(const std::filesystem::path& dir, const std::filesystem::path& out_dir);

} // namespace modlab
