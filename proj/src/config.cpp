#include "vpy/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace vpy {

namespace {
std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

Config Config::from_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config: missing '=' on line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw InvalidInput("config: empty key on line " + std::to_string(lineno));
        cfg.kv_[key] = value;
    }
    return cfg;
}

void Config::apply_overrides(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); i += 2) {
        const std::string& key = args[i];
        if (key.size() < 3 || key.substr(0, 2) != "--")
            throw InvalidInput("config: expected --key, got '" + key + "'");
        if (i + 1 >= args.size())
            throw InvalidInput("config: missing value for " + key);
        kv_[key.substr(2)] = args[i + 1];
    }
}

std::string Config::require(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw InvalidInput("config: missing required key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string v = require(key);
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidInput("config: key '" + key + "' is not a number: '" + v + "'");
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
    const std::string v = require(key);
    std::int64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw InvalidInput("config: key '" + key + "' is not an integer: '" + v + "'");
    return out;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = require(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InvalidInput("config: key '" + key + "' is not a boolean: '" + v + "'");
}

void Config::set_double(const std::string& key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    kv_[key] = os.str();
}

void Config::set_int(const std::string& key, std::int64_t value) {
    kv_[key] = std::to_string(value);
}

std::string Config::serialize() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv_) os << k << " = " << v << "\n";
    return os.str();
}

GrowthFunction growth_from_config(const Config& cfg, const std::string& prefix) {
    const std::string kind = cfg.require(prefix + "kind");
    if (kind == "constant") return GrowthFunction::constant(cfg.get_double(prefix + "value", 1.0));
    if (kind == "power") return GrowthFunction::power(cfg.get_double(prefix + "alpha"));
    if (kind == "iterated_log")
        return GrowthFunction::iterated_log(static_cast<int>(cfg.get_int(prefix + "m")));
    if (kind == "tabulated") {
        const std::string knot_text = cfg.require(prefix + "knots");
        std::vector<std::pair<double, double>> knots;
        std::istringstream in(knot_text);
        std::string item;
        while (std::getline(in, item, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw InvalidInput("config: knot '" + item + "' is not p:value");
            knots.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        }
        return GrowthFunction::tabulated(std::move(knots));
    }
    throw InvalidInput("config: unknown growth kind '" + kind + "' for " + prefix + "kind");
}

void growth_to_config(const GrowthFunction& g, Config& cfg, const std::string& prefix) {
    switch (g.kind()) {
        case GrowthKind::Constant:
            cfg.set(prefix + "kind", "constant");
            cfg.set_double(prefix + "value", g.parameter());
            break;
        case GrowthKind::Power:
            cfg.set(prefix + "kind", "power");
            cfg.set_double(prefix + "alpha", g.parameter());
            break;
        case GrowthKind::IteratedLog:
            cfg.set(prefix + "kind", "iterated_log");
            cfg.set_int(prefix + "m", g.log_depth());
            break;
        case GrowthKind::Tabulated: {
            cfg.set(prefix + "kind", "tabulated");
            std::ostringstream os;
            os.precision(17);
            for (std::size_t i = 0; i < g.knots().size(); ++i) {
                if (i) os << ',';
                os << g.knots()[i].first << ':' << g.knots()[i].second;
            }
            cfg.set(prefix + "knots", os.str());
            break;
        }
    }
}

RadialProfile profile_from_config(const Config& cfg, const std::string& prefix, int dim) {
    const std::string kind = cfg.require(prefix + "kind");
    RadialProfile p;
    if (kind == "theta_m") {
        p = theta_m_profile(dim, static_cast<int>(cfg.get_int(prefix + "m")));
    } else if (kind == "ell") {
        p = ell_profile(dim, static_cast<int>(cfg.get_int(prefix + "m")),
                        cfg.get_double(prefix + "support_radius", -1.0));
        return p;
    } else if (kind == "power_log") {
        p = power_log_profile(dim, cfg.get_double(prefix + "alpha"));
    } else if (kind == "uniform_ball") {
        p = uniform_ball_profile(dim, cfg.get_double(prefix + "R", 1.0),
                                 cfg.get_double(prefix + "height", 1.0));
    } else {
        throw InvalidInput("config: unknown density kind '" + kind + "' for " + prefix + "kind");
    }
    if (cfg.has(prefix + "support_radius"))
        p.support_radius = cfg.get_double(prefix + "support_radius");
    return p;
}

KernelSpec kernel_from_config(const Config& cfg, int dim, std::size_t n_particles) {
    KernelSpec spec;
    spec.dim = dim;
    spec.kappa = cfg.get_double("kernel.kappa", 1.0);
    const std::string reg = cfg.get_string("kernel.regularization", "auto");
    spec.regularization =
        reg == "auto" ? default_regularization(dim, n_particles) : std::stod(reg);
    return spec;
}

ForceLaw force_from_config(const Config& cfg) {
    const std::string force = cfg.get_string("dynamics.force", "classical");
    if (force == "classical") return ForceLaw::classical();
    if (force == "relativistic") return ForceLaw::relativistic();
    throw InvalidInput("config: unknown dynamics.force '" + force + "'");
}

}  // namespace vpy
