#include <doctest.h>

#include <cstdio>
#include <filesystem>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vpy/experiments.hpp"
#include "vpy/rng.hpp"
#include "vpy/dynamics.hpp"
#include "vpy/transport.hpp"

#include <sstream>

using namespace vpy;
using doctest::Approx;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("experiments");

namespace {
std::string scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "vpy_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}
}  // namespace

TEST_CASE("config parsing, overrides, fragments") {
    const Config cfg = Config::from_text(
        "# comment\n"
        "theta.kind = iterated_log\n"
        "theta.m = 1\n"
        "sim.N = 2000  # trailing comment\n"
        "sim.dt = 1e-2\n");
    CHECK(cfg.get_int("sim.N") == 2000);
    CHECK(cfg.get_double("sim.dt") == Approx(0.01));
    CHECK(cfg.require("theta.kind") == "iterated_log");
    CHECK_THROWS_WITH_AS(static_cast<void>(cfg.require("sim.theta.kind")),
                         "config: missing required key 'sim.theta.kind'", InvalidInput);
    CHECK_THROWS_AS(static_cast<void>(cfg.get_double("theta.kind")), InvalidInput);

    Config over = cfg;
    over.apply_overrides({"--sim.N", "500", "--stability.perturb", "1e-4"});
    CHECK(over.get_int("sim.N") == 500);
    CHECK(over.get_double("stability.perturb") == Approx(1e-4));
    CHECK_THROWS_AS(over.apply_overrides({"sim.N", "5"}), InvalidInput);

    const GrowthFunction g = growth_from_config(cfg, "theta.");
    CHECK(g.kind() == GrowthKind::IteratedLog);
    CHECK(g.log_depth() == 1);
    Config round;
    growth_to_config(GrowthFunction::power(2.0), round, "theta.");
    CHECK(growth_from_config(round, "theta.")(16.0) == Approx(4.0));
    growth_to_config(GrowthFunction::tabulated({{1, 1}, {2, 4}}), round, "tab.");
    CHECK(growth_from_config(round, "tab.")(1.5) == Approx(2.5));

    Config dens = Config::from_text("density.kind = theta_m\ndensity.m = 1\n");
    const RadialProfile p = profile_from_config(dens, "density.", 2);
    CHECK(p.m == 1);
    CHECK(p.support_radius == Approx(eps_cutoff(2)));
    Config ball = Config::from_text("density.kind = uniform_ball\ndensity.R = 2.5\n");
    CHECK(profile_from_config(ball, "density.", 3).support_radius == Approx(2.5));
}

TEST_CASE("binary round trips preserve every bit") {
    Rng rng(5);
    ParticleEnsemble e;
    e.dim = 3;
    e.rng_seed = 987654321;
    const std::size_t n = 257;
    e.x.resize(n);
    e.v.resize(n);
    e.w.assign(n, 1.0 / n);
    for (auto& p : e.x) p = rng.in_ball(3, 2.0);
    for (auto& q : e.v) q = rng.in_ball(3, 0.7);
    const std::string dir = scratch_dir("io");
    write_ensemble_binary(dir + "/ens.bin", e);
    const ParticleEnsemble back = read_ensemble_binary(dir + "/ens.bin");
    CHECK(back.dim == e.dim);
    CHECK(back.rng_seed == e.rng_seed);
    REQUIRE(back.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(back.x[i] == e.x[i]);
        CHECK(back.v[i] == e.v[i]);
        CHECK(back.w[i] == e.w[i]);
    }

    GridDensity g;
    g.dim = 2;
    g.cells_per_axis = 8;
    g.box_half = 1.5;
    g.values.resize(64);
    for (std::size_t i = 0; i < 64; ++i) g.values[i] = std::sin(0.1 * static_cast<double>(i));
    write_grid_binary(dir + "/grid.bin", g);
    const GridDensity gb = read_grid_binary(dir + "/grid.bin");
    CHECK(gb.box_half == g.box_half);
    CHECK(gb.values == g.values);
}

TEST_CASE("csv dump formats") {
    Trajectory traj;
    traj.times = {0.0, 0.5};
    traj.positions = {Vec(1, 2), Vec(3, 4)};
    traj.velocities = {Vec(0.1, 0.2), Vec(0.3, 0.4)};
    std::ostringstream ts;
    write_trajectory_csv(ts, traj, 2);
    CHECK(ts.str().substr(0, 14) == "t,x1,x2,v1,v2\n");
    CHECK(ts.str().find("0.5,3,4,0.29999999999999999,0.40000000000000002") != std::string::npos);

    Coupling plan;
    plan.entries = {{0, 1, 0.25}, {2, 0, 0.75}};
    std::ostringstream cs;
    write_coupling_csv(cs, plan);
    CHECK(cs.str() == "i,j,mass\n0,1,0.25\n2,0,0.75\n");
}

TEST_CASE("growth_report and certify experiments") {
    const std::string dir = scratch_dir("growth");
    Config cfg = Config::from_text("theta.kind = iterated_log\ntheta.m = 0\n");
    CHECK(run_experiment("growth_report", cfg, dir) == 0);
    const Json manifest = Json::parse(read_text_file(dir + "/manifest.json"));
    CHECK(manifest["experiment"] == "growth_report");
    CHECK(manifest["summary"]["osgood_verdict"].get<std::string>().substr(0, 8) == "diverges");
    CHECK(manifest["config"]["theta.m"] == "0");
    CHECK(fs::exists(dir + "/diagnostics.jsonl"));

    const std::string cdir = scratch_dir("certify");
    Config ccfg = Config::from_text(
        "theta.kind = iterated_log\ntheta.m = 0\ncert.d = 2\ncert.L = 1\ncert.T = 1\n"
        "cert.w1_0 = 1e-4\ncert.points = 16\n");
    CHECK(run_experiment("certify", ccfg, cdir) == 0);
    const std::string csv = read_text_file(cdir + "/certificate.csv");
    CHECK(csv.find("t,position_bound,velocity_bound,w1_bound") != std::string::npos);

    // Unattainable bracket: the position bound blows past the ceiling.
    Config blow = Config::from_text(
        "theta.kind = constant\ntheta.value = 1\ncert.T = 400\ncert.w1_0 = 0.5\n"
        "cert.points = 8\n");
    CHECK(run_experiment("certify", blow, scratch_dir("blow")) == 3);
}

TEST_CASE("exit statuses follow the contract") {
    // Missing fragment key -> 2, naming the key in the manifest error.
    const std::string dir = scratch_dir("badcfg");
    CHECK(run_experiment("certify", Config(), dir) == 2);
    const Json manifest = Json::parse(read_text_file(dir + "/manifest.json"));
    const std::string err = manifest["error"].get<std::string>();
    CHECK(err.find("theta.kind") != std::string::npos);

    CHECK(run_experiment("nonsense", Config(), scratch_dir("unknown")) == 2);

    // Saturation negative control: wrong denominator exponent -> 4.
    Config bad = Config::from_text("sat.m = 1\nsat.denominator_depth = 1\n");
    CHECK(run_experiment("saturation", bad, scratch_dir("satneg")) == 4);
}

TEST_CASE("saturation and field_check experiments") {
    Config cfg = Config::from_text("sat.m = 1\nsat.d = 2\n");
    const std::string dir = scratch_dir("sat");
    CHECK(run_experiment("saturation", cfg, dir) == 0);
    const Json manifest = Json::parse(read_text_file(dir + "/manifest.json"));
    CHECK(manifest["summary"]["envelope_a"].get<double>() > 0.15);
    CHECK(manifest["summary"]["envelope_b"].get<double>() < 0.45);

    Config fcfg = Config::from_text("field.trials = 20000\nfield.pairs = 6\nfield.N = 4000\n");
    const std::string fdir = scratch_dir("field");
    CHECK(run_experiment("field_check", fcfg, fdir) == 0);
    const Json fman = Json::parse(read_text_file(fdir + "/manifest.json"));
    CHECK(fman["summary"]["oscillation_max_ratio"].get<double>() < 10.0);
    CHECK(fman["summary"]["newton_max_rel_error"].get<double>() <
          3.0 / std::sqrt(4000.0));
    CHECK(fman["summary"]["morrey_scaling_error"].get<double>() <= 1e-12);
}

TEST_CASE("simulate experiment writes parseable diagnostics") {
    Config cfg = Config::from_text(
        "sim.N = 300\nsim.seed = 5\nsim.d = 2\nsim.T = 0.2\nsim.dt = 0.02\n"
        "sim.theta.kind = theta_m\nsim.theta.m = 0\nsim.grid_cells = 64\n");
    const std::string dir = scratch_dir("sim");
    CHECK(run_experiment("simulate", cfg, dir) == 0);
    std::ifstream in(dir + "/diagnostics.jsonl");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        const Json row = Json::parse(line);
        CHECK(row["mass"].get<double>() == Approx(1.0).epsilon(1e-12));
        CHECK(row["min_weight"].get<double>() > 0);
        ++rows;
    }
    CHECK(rows >= 3);
    const ParticleEnsemble final_ens = read_ensemble_binary(dir + "/ensemble_final.bin");
    CHECK(final_ens.size() == 300);
}

TEST_CASE("stability experiment stays below its certificate") {
    Config cfg = Config::from_text(
        "sim.N = 128\nsim.seed = 11\nsim.d = 2\nsim.T = 0.2\nsim.dt = 0.02\n"
        "sim.theta.kind = theta_m\nsim.theta.m = 0\nstability.perturb = 1e-4\n"
        "sim.grid_cells = 64\n");
    const std::string dir = scratch_dir("stab");
    CHECK(run_experiment("stability", cfg, dir) == 0);
    const Json manifest = Json::parse(read_text_file(dir + "/manifest.json"));
    CHECK(manifest["summary"]["w1_initial"].get<double>() == Approx(1e-4).epsilon(1e-6));
    CHECK(manifest["summary"]["w1_sup"].get<double>() > 0);
    CHECK(fs::exists(dir + "/certificate.csv"));
}

TEST_CASE("reruns are bitwise identical at any thread count") {
    Config cfg = Config::from_text(
        "sim.N = 96\nsim.seed = 3\nsim.d = 2\nsim.T = 0.1\nsim.dt = 0.02\n"
        "sim.theta.kind = theta_m\nsim.theta.m = 0\nstability.perturb = 1e-3\n"
        "sim.grid_cells = 64\n");
    const std::string dir1 = scratch_dir("repro1");
    const std::string dir2 = scratch_dir("repro2");
#ifdef _OPENMP
    omp_set_num_threads(1);
#endif
    CHECK(run_experiment("stability", cfg, dir1) == 0);
#ifdef _OPENMP
    omp_set_num_threads(5);
#endif
    CHECK(run_experiment("stability", cfg, dir2) == 0);
#ifdef _OPENMP
    omp_set_num_threads(omp_get_num_procs());
#endif
    for (const char* artifact : {"diagnostics.jsonl", "certificate.csv", "ensemble_final.bin"}) {
        const std::string a = read_text_file(dir1 + "/" + artifact);
        const std::string b = read_text_file(dir2 + "/" + artifact);
        INFO(artifact);
        CHECK(a == b);
    }
}

TEST_SUITE_END();
