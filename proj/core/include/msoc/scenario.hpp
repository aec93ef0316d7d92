#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace msoc {

enum class FastDiffusionStructure { diagonal, rank_one };

/// Thrown by load_scenario on malformed text or invariant violations.
/// message carries the offending line number or field name.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Every scalar parameter of a run: model constants, grid sizes,
/// Monte Carlo controls, seeds and tolerances.
struct ScenarioConfig {
    // [model]
    int example_id = 1;
    double theta_a = 0.0;
    double theta_b = 0.0;
    double theta_c = 0.0;
    double theta_d = 0.0;
    double theta_e = 0.0;
    double sigma_x = 1.0;
    double sigma_y = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double u_lo = 0.0;
    double u_hi = 1.0;
    std::vector<double> epsilon_list;
    FastDiffusionStructure fast_diffusion_structure = FastDiffusionStructure::diagonal;

    // [grids]
    int n_slow = 65;
    int n_torus = 32;
    int d_y = 2;

    // [mc]
    long mc_paths = 10000;
    double mc_dt = 1e-3;
    double mc_horizon = 20.0;
    std::uint64_t seed = 0;

    // [tolerances]
    double tol_pde = 1e-8;
    double tol_policy = 1e-10;
    double tol_density = 1e-10;

    /// Checks all field invariants; throws ScenarioError naming the field.
    void validate() const;
};

/// Parses the flat `key = value` scenario format with `#` comments and
/// sections [model], [grids], [mc], [tolerances]. Unknown keys are errors.
ScenarioConfig load_scenario(const std::string& text);

/// Convenience: reads the file and calls load_scenario.
ScenarioConfig load_scenario_file(const std::string& path);

/// FNV-1a hash of the canonical serialized form, used to stamp outputs.
std::uint64_t scenario_hash(const ScenarioConfig& cfg);

/// Canonical key=value serialization (stable ordering).
std::string scenario_canonical_text(const ScenarioConfig& cfg);

}  // namespace msoc
