#include "vpy/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "vpy/certificates.hpp"
#include "vpy/rng.hpp"
#include "vpy/transport.hpp"
#include "vpy/vlasov.hpp"

namespace vpy {

namespace {

Json vec_json(const Vec& v, int dim) {
    Json out = Json::array();
    for (int k = 0; k < dim; ++k) out.push_back(v[k]);
    return out;
}

Json diag_json(const DiagnosticsRecord& rec, int dim) {
    Json row;
    row["t"] = rec.t;
    row["mass"] = rec.mass;
    row["first_moment"] = rec.first_moment;
    row["min_weight"] = rec.min_weight;
    row["coverage"] = rec.coverage;
    row["kinetic_energy"] = rec.kinetic_energy;
    row["momentum"] = vec_json(rec.momentum, dim);
    row["p_set"] = rec.p_set;
    row["velocity_moments"] = rec.velocity_moments;
    row["rho_lp"] = rec.rho_lp;
    row["rho_lp_ul"] = rec.rho_lp_ul;
    row["yudovich_ratio"] = rec.yudovich_ratio;
    return row;
}

// Growth function for the Yudovich diagnostic, derived from the density kind
// when no explicit fragment is present.
GrowthFunction growth_for(const Config& cfg, const std::string& explicit_prefix,
                          const RadialProfile& profile) {
    if (cfg.has(explicit_prefix + "kind")) return growth_from_config(cfg, explicit_prefix);
    switch (profile.kind) {
        case ProfileKind::IteratedLogProfile:
            return GrowthFunction::iterated_log(std::max(profile.m, 0));
        case ProfileKind::PowerLogProfile: return GrowthFunction::power(profile.alpha);
        default: return GrowthFunction::constant(1.0);
    }
}

struct SimSetup {
    int dim;
    double kappa;
    double dt, T;
    int steps, diag_every, grid_cells;
    bool corrector;
    RadialProfile theta;
    GrowthFunction growth;
    ForceLaw force;
    std::uint64_t seed;
    std::size_t N;
};

SimSetup sim_setup(const Config& cfg) {
    SimSetup s{.dim = static_cast<int>(cfg.get_int("sim.d", 2)),
               .kappa = cfg.get_double("sim.kappa", cfg.get_double("kernel.kappa", 1.0)),
               .dt = cfg.get_double("sim.dt", cfg.get_double("dynamics.dt", 1e-2)),
               .T = cfg.get_double("sim.T", cfg.get_double("dynamics.T", 1.0)),
               .steps = 0,
               .diag_every = 0,
               .grid_cells = static_cast<int>(cfg.get_int("sim.grid_cells", 64)),
               .corrector = cfg.get_bool("dynamics.corrector", true),
               .theta = {},
               .growth = GrowthFunction::constant(1.0),
               .force = force_from_config(cfg),
               .seed = static_cast<std::uint64_t>(cfg.get_int("sim.seed", 1)),
               .N = static_cast<std::size_t>(cfg.get_int("sim.N", 1000))};
    s.theta = profile_from_config(cfg, "sim.theta.", s.dim);
    s.growth = growth_for(cfg, "sim.growth.", s.theta);
    s.steps = std::max(1, static_cast<int>(std::lround(s.T / s.dt)));
    s.dt = s.T / s.steps;
    s.diag_every =
        static_cast<int>(cfg.get_int("sim.diag_every", std::max(1, s.steps / 8)));
    return s;
}

// Empirical oscillation constant of the regularized particle field against
// the base modulus, sampled over pair separations.
double empirical_kernel_ratio(const KernelSpec& spec, const ParticleEnsemble& ens,
                              const Modulus& modulus, Rng& rng, int samples) {
    double worst = 0;
    const KernelSpec exact{spec.dim, 1.0, spec.regularization};
    for (int s = 0; s < samples; ++s) {
        const std::size_t i = static_cast<std::size_t>(rng.uniform() * ens.size());
        const double sep = std::pow(10.0, rng.uniform(-6.0, -1.0));
        const Vec x = ens.x[i] + rng.direction(spec.dim) * (0.3 * sep);
        const Vec y = x + rng.direction(spec.dim) * sep;
        const double osc = deterministic_sum(ens.size(), [&](std::size_t j) {
            return ens.w[j] *
                   norm(eval_kernel(exact, x - ens.x[j]) - eval_kernel(exact, y - ens.x[j]));
        });
        worst = std::max(worst, osc / modulus.phi(sep));
    }
    return worst;
}

}  // namespace

Json run_growth_report(const Config& cfg, const std::string& out_dir) {
    const GrowthFunction theta = growth_from_config(cfg, "theta.");
    const int d = static_cast<int>(cfg.get_int("growth.d", 2));
    const Modulus modulus(theta, d);

    JsonlWriter jsonl(out_dir + "/diagnostics.jsonl");
    for (double r = 1e-12; r <= 10.0; r *= std::pow(10.0, 0.25)) {
        Json row;
        row["r"] = r;
        row["phi"] = modulus.phi(r);
        row["Phi"] = modulus.Phi(r);
        jsonl.write(row);
    }

    const OsgoodReport rep = modulus.osgood_verdict(
        cfg.get_double("osgood.r0", -1.0), cfg.get_double("osgood.eps_min", 1e-300));
    Json summary;
    summary["theta"] = theta.describe();
    summary["dim"] = d;
    summary["junction"] = modulus.junction();
    summary["plateau"] = modulus.plateau_value();
    summary["osgood_verdict"] = rep.describe();
    summary["osgood"] = {{"fit_s", rep.fit_s},   {"fit_q", rep.fit_q},
                         {"fit_r", rep.fit_r},   {"tol_s", rep.tol_s},
                         {"tol_q", rep.tol_q},   {"tol_r", rep.tol_r},
                         {"slope_estimate", rep.slope_estimate}};
    summary["artifacts"] = {"diagnostics.jsonl"};
    return summary;
}

Json run_certify(const Config& cfg, const std::string& out_dir) {
    const GrowthFunction theta = growth_from_config(cfg, "theta.");
    const int d = static_cast<int>(cfg.get_int("cert.d", 2));
    const Modulus modulus(theta, d);
    const double L = cfg.get_double("cert.L", 1.0);
    const double T = cfg.get_double("cert.T", 1.0);
    const double w1_0 = cfg.get_double("cert.w1_0", 0.0);
    const double f_gap = cfg.get_double("cert.f_gap", 0.0);
    const int points = static_cast<int>(cfg.get_int("cert.points", 256));
    const double floor = cfg.get_double("cert.delta_floor", 1e-12);

    const StabilityCertificate cert =
        lagrangian_w1_bound(L, modulus, w1_0, f_gap, T, uniform_time_grid(T, points), floor);
    std::ofstream csv(out_dir + "/certificate.csv");
    cert.write_csv(csv);

    Json summary;
    summary["theta"] = theta.describe();
    summary["L"] = cert.L;
    summary["delta"] = cert.delta;
    summary["w1_0"] = w1_0;
    summary["final_bound"] = cert.w1_bound.back();
    summary["artifacts"] = {"certificate.csv"};
    return summary;
}

Json run_saturation(const Config& cfg, const std::string& out_dir) {
    const int d = static_cast<int>(cfg.get_int("sat.d", 2));
    const int m = static_cast<int>(cfg.get_int("sat.m", 1));
    RadialProfile profile = cfg.has("density.kind") ? profile_from_config(cfg, "density.", d)
                                                    : theta_m_profile(d, std::max(m - 1, 0));
    const GrowthFunction growth = growth_for(cfg, "theta.", profile);

    const NormReport rep = yudovich_report(profile, growth);
    JsonlWriter jsonl(out_dir + "/diagnostics.jsonl");
    for (std::size_t i = 0; i < rep.p_grid.size(); ++i) {
        Json row;
        row["p"] = rep.p_grid[i];
        row["lp"] = rep.lp_values[i];
        row["lp_ul"] = rep.lp_ul_values[i];
        row["ratio"] = rep.lp_values[i] / growth(rep.p_grid[i]);
        jsonl.write(row);
    }

    Json summary;
    summary["profile"] = profile.describe();
    summary["theta"] = growth.describe();
    summary["yudovich_norm"] = rep.yudovich_norm;
    summary["saturation_ratio"] = rep.saturation_ratio;
    summary["top_ratio"] = rep.top_ratio;
    summary["inverse_top_ratio"] = rep.inverse_top_ratio;
    summary["artifacts"] = {"diagnostics.jsonl"};

    // Envelope fit of ||ell_m||_{L^p} against log_{m-1} p; a wrong denominator
    // depth (negative control) raises PropertyViolation after the artifacts
    // above are on disk.
    const int denom = static_cast<int>(cfg.get_int("sat.denominator_depth", m - 1));
    const SaturationFit fit = saturation_check(m, d, {}, denom);
    summary["envelope_a"] = fit.a;
    summary["envelope_b"] = fit.b;
    summary["envelope_p_min"] = fit.p_min;
    return summary;
}

Json run_field_check(const Config& cfg, const std::string& out_dir) {
    const int d = static_cast<int>(cfg.get_int("field.d", 2));
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("field.seed", 1));
    const KernelSpec exact{d, cfg.get_double("kernel.kappa", 1.0), 0.0};
    JsonlWriter jsonl(out_dir + "/diagnostics.jsonl");
    Json summary;

    const auto osc = oscillation_bound_check(
        exact, static_cast<std::size_t>(cfg.get_int("field.trials", 100000)), seed);
    jsonl.write({{"check", "oscillation"}, {"max_ratio", osc.max_ratio},
                 {"trials", osc.trials}});
    summary["oscillation_max_ratio"] = osc.max_ratio;

    // Monte-Carlo particle field against the closed-form uniform ball.
    {
        const std::size_t N = static_cast<std::size_t>(cfg.get_int("field.N", 10000));
        Rng rng(seed);
        std::vector<Vec> src(N);
        std::vector<double> w(N, 1.0 / static_cast<double>(N));
        for (auto& s : src) s = rng.in_ball(d, 1.0);
        std::vector<Vec> targets;
        for (double rad : {1.5, 2.0, 3.0}) {
            Vec t;
            t[0] = rad;
            targets.push_back(t);
        }
        const auto got = field_at_points(exact, src, w, targets);
        double worst = 0;
        for (std::size_t k = 0; k < targets.size(); ++k) {
            const Vec expect = field_uniform_ball(exact, 1.0, 1.0, targets[k]);
            worst = std::max(worst, norm(got[k] - expect) / norm(expect));
        }
        jsonl.write({{"check", "newton"}, {"N", N}, {"max_rel_error", worst},
                     {"tolerance", 3.0 / std::sqrt(static_cast<double>(N))}});
        summary["newton_max_rel_error"] = worst;
    }

    // Morrey continuity ratio for the configured density.
    {
        RadialProfile rho = cfg.has("density.kind")
                                ? profile_from_config(cfg, "density.", d)
                                : uniform_ball_profile(d, 1.0, 1.0 / unit_ball_volume(d));
        const GrowthFunction growth = growth_for(cfg, "theta.", rho);
        const Modulus modulus(growth, d);
        const auto pairs = morrey_pair_sample(exact, rho,
                                              static_cast<int>(cfg.get_int("field.pairs", 32)),
                                              seed + 1, cfg.get_double("field.min_sep", 1e-6),
                                              cfg.get_double("field.max_sep", 1e-2));
        const auto rep = morrey_continuity_check(exact, rho, modulus, pairs);
        const auto rep2x = morrey_continuity_check(exact, rho.scaled(2.0), modulus, pairs);
        for (const auto& pr : rep.pairs)
            jsonl.write({{"check", "morrey"}, {"separation", pr.separation},
                         {"integral", pr.integral}, {"ratio", pr.ratio}});
        summary["morrey_sup_ratio"] = rep.sup_ratio;
        summary["morrey_sup_field"] = rep.sup_field;
        const double homogeneity =
            std::abs(rep2x.sup_ratio - 2.0 * rep.sup_ratio) / (2.0 * rep.sup_ratio);
        summary["morrey_scaling_error"] = homogeneity;
        if (homogeneity > 1e-12)
            throw PropertyViolation("field_check: morrey suprema are not 1-homogeneous");
    }
    summary["artifacts"] = {"diagnostics.jsonl"};
    return summary;
}

Json run_simulate(const Config& cfg, const std::string& out_dir) {
    const SimSetup s = sim_setup(cfg);
    SimulationState st{0.0, sample_initial_datum(s.theta, s.N, s.seed, s.kappa), {}};
    const KernelSpec spec = kernel_from_config(cfg, s.dim, s.N);
    refresh_field(st, spec);
    // Box sized for the whole run: initial support plus ballistic transport
    // plus the kick from the initial field strength.
    double v_max = 0, e_max = 0;
    for (std::size_t i = 0; i < st.ens.size(); ++i) {
        v_max = std::max(v_max, norm(st.ens.v[i]));
        e_max = std::max(e_max, norm(st.field[i]));
    }
    const double box = cfg.get_double("sim.box_half", -1.0) > 0
                           ? cfg.get_double("sim.box_half")
                           : auto_box_half(st.ens) +
                                 1.1 * (v_max * s.T + 0.75 * e_max * s.T * s.T);

    JsonlWriter jsonl(out_dir + "/diagnostics.jsonl");
    refresh_field(st, spec);
    jsonl.write(diag_json(diagnostics(st, s.growth, {1.0, 2.0, 4.0}, s.grid_cells, box), s.dim));
    for (int k = 0; k < s.steps; ++k) {
        step(st, spec, s.force, s.dt, s.corrector);
        if ((k + 1) % s.diag_every == 0 || k + 1 == s.steps)
            jsonl.write(
                diag_json(diagnostics(st, s.growth, {1.0, 2.0, 4.0}, s.grid_cells, box), s.dim));
    }
    write_ensemble_binary(out_dir + "/ensemble_final.bin", st.ens);

    Json summary;
    summary["N"] = s.N;
    summary["steps"] = s.steps;
    summary["dt"] = s.dt;
    summary["box_half"] = box;
    summary["regularization"] = spec.regularization;
    summary["corrector"] = s.corrector;
    summary["artifacts"] = {"diagnostics.jsonl", "ensemble_final.bin"};
    return summary;
}

Json run_stability(const Config& cfg, const std::string& out_dir) {
    const SimSetup s = sim_setup(cfg);
    const double eta = cfg.get_double("stability.perturb", 1e-4);
    const KernelSpec spec = kernel_from_config(cfg, s.dim, s.N);
    const Modulus base_modulus(s.growth, s.dim);

    SimulationState base{0.0, sample_initial_datum(s.theta, s.N, s.seed, s.kappa), {}};
    SimulationState pert{0.0, base.ens, {}};
    Vec shift;
    shift[0] = eta;
    for (auto& p : pert.ens.x) p += shift;

    const bool lp_ok = s.N * s.N <= 4000000;
    const Coupling pi0 = identity_coupling(base.ens, pert.ens);
    const double w1_0 = lp_ok ? w1_exact(base.ens, pert.ens).distance
                              : w1_coupled_bound(pi0, base.ens, pert.ens).sum;

    Rng cal_rng(s.seed ^ 0x9e3779b97f4a7c15ull);
    double c_emp = empirical_kernel_ratio(spec, base.ens, base_modulus, cal_rng, 48);

    struct Row {
        double t, w1, coupled;
    };
    std::vector<Row> rows;
    std::vector<double> diag_times;
    const auto record = [&]() {
        const double w1 = lp_ok ? w1_exact(base.ens, pert.ens).distance
                                : w1_coupled_bound(pi0, base.ens, pert.ens).sum;
        rows.push_back({base.t, w1, w1_coupled_bound(pi0, base.ens, pert.ens).sum});
        diag_times.push_back(base.t);
    };
    refresh_field(base, spec);
    refresh_field(pert, spec);
    record();
    for (int k = 0; k < s.steps; ++k) {
        step(base, spec, s.force, s.dt, s.corrector);
        step(pert, spec, s.force, s.dt, s.corrector);
        if ((k + 1) % s.diag_every == 0 || k + 1 == s.steps) {
            c_emp = std::max(c_emp,
                             empirical_kernel_ratio(spec, base.ens, base_modulus, cal_rng, 16));
            record();
        }
    }

    // Certificate from the measured initial distance and the empirically
    // calibrated field modulus.
    const double modulus_scale = cfg.get_double("stability.modulus_scale", 1.25 * c_emp);
    const Modulus cert_modulus = base_modulus.scaled(std::max(modulus_scale, 1e-6));
    const StabilityCertificate cert = lagrangian_w1_bound(
        std::max(s.force.lipschitz, 1.0), cert_modulus, w1_0, 0.0, s.T, diag_times);
    {
        std::ofstream csv(out_dir + "/certificate.csv");
        cert.write_csv(csv);
    }

    // Discretization slack: three times the dt-refinement delta of the final
    // 1-Wasserstein distance.
    double slack = cfg.get_double("stability.slack", 0.0);
    double w1_refined = -1.0;
    if (cfg.get_bool("stability.slack_refine", true)) {
        SimulationState b2{0.0, sample_initial_datum(s.theta, s.N, s.seed, s.kappa), {}};
        SimulationState p2{0.0, b2.ens, {}};
        for (auto& p : p2.ens.x) p += shift;
        refresh_field(b2, spec);
        refresh_field(p2, spec);
        const double dt2 = s.dt / 2.0;
        for (int k = 0; k < 2 * s.steps; ++k) {
            step(b2, spec, s.force, dt2, s.corrector);
            step(p2, spec, s.force, dt2, s.corrector);
        }
        w1_refined = lp_ok ? w1_exact(b2.ens, p2.ens).distance
                           : w1_coupled_bound(pi0, b2.ens, p2.ens).sum;
        slack += 3.0 * std::abs(rows.back().w1 - w1_refined);
    }

    JsonlWriter jsonl(out_dir + "/diagnostics.jsonl");
    bool violated = false;
    double sup_w1 = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double bound = cert.w1_bound[k];
        sup_w1 = std::max(sup_w1, rows[k].w1);
        const bool ok = rows[k].w1 <= bound + slack;
        violated = violated || !ok;
        jsonl.write({{"t", rows[k].t}, {"w1_exact", rows[k].w1},
                     {"coupled_bound", rows[k].coupled}, {"certificate_bound", bound},
                     {"slack", slack}, {"within_bound", ok}});
    }
    write_ensemble_binary(out_dir + "/ensemble_final.bin", base.ens);

    Json summary;
    summary["eta"] = eta;
    summary["w1_initial"] = w1_0;
    summary["w1_sup"] = sup_w1;
    summary["w1_final"] = rows.back().w1;
    summary["w1_final_refined_dt"] = w1_refined;
    summary["slack"] = slack;
    summary["c_emp"] = c_emp;
    summary["modulus_scale"] = modulus_scale;
    summary["delta"] = cert.delta;
    summary["exact_lp"] = lp_ok;
    summary["regularization"] = spec.regularization;
    summary["corrector"] = s.corrector;
    summary["artifacts"] = {"diagnostics.jsonl", "certificate.csv", "ensemble_final.bin"};
    if (violated)
        throw PropertyViolation("stability: measured W1 exceeds the certificate plus slack");
    return summary;
}

int run_experiment(const std::string& experiment, const Config& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    Json manifest;
    manifest["experiment"] = experiment;
    manifest["version"] = kVersion;
    Json echo;
    for (const auto& [k, v] : cfg.entries()) echo[k] = v;
    manifest["config"] = echo;
    manifest["seed"] = cfg.get_int("sim.seed", cfg.get_int("field.seed", 1));

    int status = 0;
    try {
        Json summary;
        if (experiment == "growth_report")
            summary = run_growth_report(cfg, out_dir);
        else if (experiment == "certify")
            summary = run_certify(cfg, out_dir);
        else if (experiment == "saturation")
            summary = run_saturation(cfg, out_dir);
        else if (experiment == "field_check")
            summary = run_field_check(cfg, out_dir);
        else if (experiment == "simulate")
            summary = run_simulate(cfg, out_dir);
        else if (experiment == "stability")
            summary = run_stability(cfg, out_dir);
        else
            throw InvalidInput("unknown experiment '" + experiment + "'");
        manifest["summary"] = summary;
    } catch (const InvalidInput& e) {
        manifest["error"] = e.what();
        status = 2;
    } catch (const PropertyViolation& e) {
        manifest["error"] = e.what();
        status = 4;
    } catch (const Error& e) {
        manifest["error"] = e.what();
        status = 3;
    }
    manifest["exit_status"] = status;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
    if (status != 0) std::cerr << "vpy " << experiment << ": " << manifest["error"] << "\n";
    return status;
}

}  // namespace vpy
