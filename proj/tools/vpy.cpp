#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "vpy/experiments.hpp"

namespace {

using AliasMap = std::map<std::string, std::string>;

AliasMap aliases_for(const std::string& experiment) {
    AliasMap a{{"--theta", "--theta.kind"},   {"--m", "--theta.m"},
               {"--alpha", "--theta.alpha"},  {"--value", "--theta.value"},
               {"--force", "--dynamics.force"}};
    if (experiment == "certify") {
        a["--d"] = "--cert.d";
        a["--L"] = "--cert.L";
        a["--T"] = "--cert.T";
        a["--w1"] = "--cert.w1_0";
    } else if (experiment == "growth_report") {
        a["--d"] = "--growth.d";
    } else if (experiment == "saturation") {
        a["--d"] = "--sat.d";
        a["--m"] = "--sat.m";
    } else if (experiment == "field_check") {
        a["--d"] = "--field.d";
        a["--seed"] = "--field.seed";
        a["--trials"] = "--field.trials";
    } else if (experiment == "simulate" || experiment == "stability") {
        a["--N"] = "--sim.N";
        a["--seed"] = "--sim.seed";
        a["--d"] = "--sim.d";
        a["--T"] = "--sim.T";
        a["--dt"] = "--sim.dt";
        a["--kappa"] = "--sim.kappa";
        a["--theta"] = "--sim.theta.kind";
        a["--m"] = "--sim.theta.m";
        a["--perturb"] = "--stability.perturb";
    }
    return a;
}

void usage() {
    std::fprintf(stderr,
                 "usage: vpy <experiment> [--config FILE] [--out DIR] [--key value ...]\n"
                 "experiments: growth_report certify saturation field_check simulate "
                 "stability\n");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        usage();
        return 2;
    }
    const std::string experiment = argv[1];
    std::string config_path, out_dir = "vpy_out/" + experiment;
    std::vector<std::string> overrides;
    const AliasMap aliases = aliases_for(experiment);
    for (int i = 2; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--config" || arg == "--out") {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "vpy: missing value for %s\n", arg.c_str());
                return 2;
            }
            (arg == "--config" ? config_path : out_dir) = argv[++i];
            continue;
        }
        const auto alias = aliases.find(arg);
        overrides.push_back(alias != aliases.end() ? alias->second : arg);
    }

    try {
        vpy::Config cfg =
            config_path.empty() ? vpy::Config() : vpy::Config::from_file(config_path);
        cfg.apply_overrides(overrides);
        return vpy::run_experiment(experiment, cfg, out_dir);
    } catch (const vpy::InvalidInput& e) {
        std::fprintf(stderr, "vpy: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "vpy: %s\n", e.what());
        return 3;
    }
}
