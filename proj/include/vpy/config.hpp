#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vpy/dynamics.hpp"
#include "vpy/field.hpp"
#include "vpy/growth.hpp"
#include "vpy/yudovich.hpp"

namespace vpy {

// Flat key-value configuration with dotted keys; one `key = value` pair per
// line, '#' starts a comment.  Unknown keys are preserved (they end up in the
// manifest echo), missing required keys raise InvalidInput naming the key.
class Config {
  public:
    Config() = default;
    static Config from_file(const std::string& path);
    static Config from_text(const std::string& text);

    // Command-line overrides: alternating "--key" "value" tokens.
    void apply_overrides(const std::vector<std::string>& args);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string require(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    void set_double(const std::string& key, double value);
    void set_int(const std::string& key, std::int64_t value);

    const std::map<std::string, std::string>& entries() const { return kv_; }
    std::string serialize() const;  // sorted, diff-friendly

  private:
    std::map<std::string, std::string> kv_;
};

// Growth-function fragment: <prefix>kind = constant | power | iterated_log |
// tabulated, with <prefix>value / <prefix>alpha / <prefix>m / <prefix>knots
// ("p:v,p:v,...").
GrowthFunction growth_from_config(const Config& cfg, const std::string& prefix);
void growth_to_config(const GrowthFunction& g, Config& cfg, const std::string& prefix);

// Density fragment: <prefix>kind = theta_m | ell | power_log | uniform_ball,
// with <prefix>m / <prefix>alpha / <prefix>R; <prefix>support_radius
// overrides the default cutoff.
RadialProfile profile_from_config(const Config& cfg, const std::string& prefix, int dim);

// kernel.kappa; kernel.regularization = "auto" | <float> (auto scales with
// the particle count).
KernelSpec kernel_from_config(const Config& cfg, int dim, std::size_t n_particles);

// dynamics.force = classical | relativistic.
ForceLaw force_from_config(const Config& cfg);

}  // namespace vpy
