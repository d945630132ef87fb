#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vpy/rng.hpp"
#include "vpy/transport.hpp"

using namespace vpy;
using doctest::Approx;

TEST_SUITE_BEGIN("transport");

namespace {

ParticleEnsemble random_ensemble(int dim, std::size_t n, std::uint64_t seed,
                                 bool uniform_weights = true) {
    Rng rng(seed);
    ParticleEnsemble e;
    e.dim = dim;
    e.rng_seed = seed;
    e.x.resize(n);
    e.v.resize(n);
    e.w.resize(n);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        e.x[i] = rng.in_ball(dim, 1.0);
        e.v[i] = rng.in_ball(dim, 0.5);
        e.w[i] = uniform_weights ? 1.0 : 0.1 + rng.uniform();
        total += e.w[i];
    }
    for (auto& w : e.w) w /= total;
    // Renormalize the tail weight so the sum is exactly representable-close.
    double acc = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) acc += e.w[i];
    e.w[n - 1] = 1.0 - acc;
    return e;
}

double brute_force_w1(const ParticleEnsemble& a, const ParticleEnsemble& b) {
    const std::size_t n = a.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = HUGE_VAL;
    do {
        double c = 0;
        for (std::size_t i = 0; i < n; ++i) c += a.w[i] * phase_distance(a, i, b, perm[i]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("identical ensembles and single atoms") {
    const auto e = random_ensemble(2, 12, 5);
    const auto r = w1_exact(e, e);
    CHECK(r.distance == 0.0);
    for (const auto& entry : r.plan.entries) CHECK(entry.i == entry.j);

    ParticleEnsemble a, b;
    a.dim = b.dim = 2;
    a.x = {Vec(0, 0)};
    a.v = {Vec(0, 0)};
    a.w = {1.0};
    b.x = {Vec(3, 0)};
    b.v = {Vec(0, 4)};
    b.w = {1.0};
    CHECK(w1_exact(a, b).distance == Approx(5.0).epsilon(1e-14));
}

TEST_CASE("small ensembles match permutation brute force") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto a = random_ensemble(2, 3, seed);
        const auto b = random_ensemble(2, 3, seed + 1000);
        CHECK(w1_exact(a, b).distance == Approx(brute_force_w1(a, b)).epsilon(1e-12));
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto a = random_ensemble(3, 6, seed);
        const auto b = random_ensemble(3, 6, seed + 77);
        CHECK(w1_exact(a, b).distance == Approx(brute_force_w1(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("jv agrees with the reference solver on random matrices") {
    Rng rng(31);
    for (int n : {2, 5, 17, 64}) {
        for (int rep = 0; rep < 4; ++rep) {
            std::vector<double> cost(static_cast<std::size_t>(n) * n);
            for (auto& c : cost) c = rng.uniform(0.0, 10.0);
            const auto jv = assignment_jv(n, cost);
            const auto ref = assignment_reference(n, cost);
            CHECK(verify_assignment(n, cost, jv) <= 1e-9);
            CHECK(verify_assignment(n, cost, ref) <= 1e-9);
            double cjv = 0, cref = 0;
            for (int i = 0; i < n; ++i) {
                cjv += cost[static_cast<std::size_t>(i) * n + jv.rowsol[static_cast<std::size_t>(i)]];
                cref += cost[static_cast<std::size_t>(i) * n + ref.rowsol[static_cast<std::size_t>(i)]];
            }
            CHECK(cjv == Approx(cref).epsilon(1e-12));
        }
    }
}

TEST_CASE("unequal weights: 1-D quantile oracle") {
    // Positions on a line with zero velocities: W1 equals the area between
    // the two CDFs.
    Rng rng(8);
    for (int rep = 0; rep < 6; ++rep) {
        ParticleEnsemble a = random_ensemble(2, 9, 100 + static_cast<std::uint64_t>(rep), false);
        ParticleEnsemble b = random_ensemble(2, 7, 200 + static_cast<std::uint64_t>(rep), false);
        for (auto& p : a.x) p = Vec(p.c[0], 0);
        for (auto& p : b.x) p = Vec(p.c[0], 0);
        for (auto& q : a.v) q = Vec();
        for (auto& q : b.v) q = Vec();

        struct Pt {
            double x, wa, wb;
        };
        std::vector<Pt> pts;
        for (std::size_t i = 0; i < a.size(); ++i) pts.push_back({a.x[i].c[0], a.w[i], 0});
        for (std::size_t j = 0; j < b.size(); ++j) pts.push_back({b.x[j].c[0], 0, b.w[j]});
        std::sort(pts.begin(), pts.end(), [](const Pt& p, const Pt& q) { return p.x < q.x; });
        double Fa = 0, Fb = 0, oracle = 0;
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            Fa += pts[k].wa;
            Fb += pts[k].wb;
            oracle += std::abs(Fa - Fb) * (pts[k + 1].x - pts[k].x);
        }
        const auto r = w1_exact(a, b);
        CHECK(r.distance == Approx(oracle).epsilon(1e-10));
        CHECK(r.dual_gap <= 1e-9);
        r.plan.validate_marginals(a, b);
    }
}

TEST_CASE("metric axioms and duality gap") {
    Rng rng(77);
    for (int rep = 0; rep < 25; ++rep) {
        const auto a = random_ensemble(2, 6, 300 + static_cast<std::uint64_t>(rep), rep % 2 == 0);
        const auto b = random_ensemble(2, 8, 400 + static_cast<std::uint64_t>(rep), false);
        const auto c = random_ensemble(2, 5, 500 + static_cast<std::uint64_t>(rep), false);
        const auto dab = w1_exact(a, b), dba = w1_exact(b, a);
        CHECK(dab.distance == dba.distance);  // canonical orientation: bitwise
        const auto dac = w1_exact(a, c), dbc = w1_exact(b, c);
        CHECK(dac.distance <= dab.distance + dbc.distance + 1e-9);
        CHECK(dab.dual_gap <= 1e-9);
        dab.plan.validate_marginals(a, b);
    }
}

TEST_CASE("moderate equal-weight instance: jv against the reference") {
    const auto a = random_ensemble(2, 300, 1);
    const auto b = random_ensemble(2, 300, 2);
    const int n = 300;
    std::vector<double> cost(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost[static_cast<std::size_t>(i) * n + j] =
                phase_distance(a, static_cast<std::size_t>(i), b, static_cast<std::size_t>(j));
    const auto jv = assignment_jv(n, cost);
    const auto ref = assignment_reference(n, cost);
    double cjv = 0, cref = 0;
    for (int i = 0; i < n; ++i) {
        cjv += cost[static_cast<std::size_t>(i) * n + jv.rowsol[static_cast<std::size_t>(i)]];
        cref += cost[static_cast<std::size_t>(i) * n + ref.rowsol[static_cast<std::size_t>(i)]];
    }
    CHECK(cjv == Approx(cref).epsilon(1e-11));
    CHECK(verify_assignment(n, cost, jv) <= 1e-9);
}

TEST_CASE("coupled functionals bound the exact distance") {
    const auto a = random_ensemble(2, 40, 11);
    auto b = random_ensemble(2, 40, 12);
    const auto w1 = w1_exact(a, b);

    // At t = 0 with the optimal plan the split functionals bracket W1 within
    // the l1/l2 norm equivalence on phase space.
    const auto cb = w1_coupled_bound(w1.plan, a, b);
    CHECK(cb.sum >= w1.distance * (1.0 - 1e-12));
    CHECK(cb.sum <= std::sqrt(2.0) * w1.distance * (1.0 + 1e-12));

    // Identity coupling on identical states vanishes.
    const auto id = identity_coupling(a, a);
    const auto zero = w1_coupled_bound(id, a, a);
    CHECK(zero.position == 0.0);
    CHECK(zero.velocity == 0.0);

    // Dominance after evolving the states (frozen plan is suboptimal).
    EnsembleTrajectory ta, tb;
    ta.times = {0.0, 1.0};
    tb.times = {0.0, 1.0};
    ta.states = {a, a};
    tb.states = {b, b};
    for (std::size_t i = 0; i < ta.states[1].size(); ++i)
        ta.states[1].x[i] += ta.states[1].v[i];
    for (std::size_t i = 0; i < tb.states[1].size(); ++i)
        tb.states[1].x[i] += tb.states[1].v[i];
    const auto later = w1_coupled_bound(w1.plan, ta, tb, 1.0);
    const auto exact_later = w1_exact(ta.states[1], tb.states[1]);
    CHECK(exact_later.distance <= later.sum + 1e-9);

    const auto pushed = pushforward_coupling(w1.plan, ta, tb, 1.0);
    CHECK(coupling_cost(pushed, ta.states[1], tb.states[1]) >=
          exact_later.distance * (1.0 - 1e-12));
    CHECK_THROWS_AS(w1_coupled_bound(w1.plan, ta, tb, 0.5), InvalidInput);
}

TEST_CASE("size cap rejects oversized instances") {
    ParticleEnsemble a, b;
    a.dim = b.dim = 2;
    const std::size_t big = 2001;
    a.x.assign(big, Vec());
    a.v.assign(big, Vec());
    a.w.assign(big, 1.0 / big);
    b.x.assign(2000, Vec());
    b.v.assign(2000, Vec());
    b.w.assign(2000, 1.0 / 2000);
    CHECK_THROWS_AS(w1_exact(a, b), InvalidInput);
}

TEST_SUITE_END();
