#pragma once

#include <string>

#include "vpy/config.hpp"
#include "vpy/io.hpp"

namespace vpy {

// Experiment names: growth_report, certify, saturation, field_check,
// simulate, stability.
//
// Each experiment writes its artifacts plus manifest.json (config echo,
// version, seed, wall time) into out_dir.  The returned status follows the
// CLI contract: 0 success, 2 validation error, 3 numeric failure,
// 4 property violation.
int run_experiment(const std::string& experiment, const Config& cfg, const std::string& out_dir);

// Throwing single-experiment entry points (summaries feed the manifest).
Json run_growth_report(const Config& cfg, const std::string& out_dir);
Json run_certify(const Config& cfg, const std::string& out_dir);
Json run_saturation(const Config& cfg, const std::string& out_dir);
Json run_field_check(const Config& cfg, const std::string& out_dir);
Json run_simulate(const Config& cfg, const std::string& out_dir);
Json run_stability(const Config& cfg, const std::string& out_dir);

}  // namespace vpy
