#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msoc/scenario.hpp"

namespace msoc {

struct StageRecord {
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_clock_s = 0.0;
};

/// What a pipeline run produced; re-running with the same scenario and seed
/// reproduces identical output files byte for byte.
struct RunManifest {
    std::uint64_t scenario_hash = 0;
    std::string tool_version;
    std::vector<StageRecord> stages;
};

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Known stage names in dependency order.
extern const std::vector<std::string> kAllStages;

/// Executes the requested stages in dependency order, writing CSVs under
/// out_dir.  With auto_deps, missing prerequisite stages are run too;
/// otherwise a missing dependency output is an error.
RunManifest run_pipeline(const ScenarioConfig& cfg, const std::vector<std::string>& stages,
                         const std::string& out_dir, bool auto_deps, int threads = 1);

/// Human-readable summary plus one plottable data file per figure.
/// Returns the summary text (also written to out_dir/summary.txt).
std::string emit_report(const RunManifest& manifest, const std::string& out_dir);

void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest read_manifest(const std::string& path);

}  // namespace msoc
