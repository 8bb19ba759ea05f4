#pragma once

#include "turbkit/cutoff.hpp"
#include "turbkit/diagnostics.hpp"
#include "turbkit/integrator.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace turbkit {

// Everything a run needs, read from a plain `key = value` file. Unknown or
// repeated keys are errors; every value is range checked before any compute.
struct RunConfig {
    SimConfig sim;
    CutoffKind psi_kind = CutoffKind::bump;
    Vec3 psi_center = Vec3::Constant(3.141592653589793);
    double psi_radius = 2.0;
    int n_dirs = 128;
    double ell_min = 0.05;
    double ell_max = 1.1;
    int ell_n = 24;
    Spacing ell_spacing = Spacing::log;
    int gauss_points = 8;
    std::string out_dir = "turbkit_out";

    void validate() const;
    // pi - radius for a bump, pi when uniform
    double cutoff_margin() const;
    CutoffField cutoff() const;
    LengthGrid length_grid() const;
};

// keys in the order they are echoed
const std::vector<std::string>& config_keys();

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// TURBKIT_SEED, when set, replaces the seed
void apply_environment(RunConfig& cfg);

// effective configuration, one `key = value` per line; parse_config reads it back
std::string to_text(const RunConfig& cfg);
nlohmann::ordered_json to_json(const RunConfig& cfg);

// 17 significant digits, so values read back bit for bit
std::string format_double(double x);

}  // namespace turbkit
