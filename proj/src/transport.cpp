#include "vpy/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>

namespace vpy {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void Coupling::validate_marginals(const ParticleEnsemble& left, const ParticleEnsemble& right,
                                  double tol) const {
    std::vector<double> row(left.size(), 0.0), col(right.size(), 0.0);
    for (const auto& e : entries) {
        if (e.i < 0 || static_cast<std::size_t>(e.i) >= left.size() || e.j < 0 ||
            static_cast<std::size_t>(e.j) >= right.size() || !(e.mass >= 0))
            throw InvalidInput("Coupling: entry out of range");
        row[static_cast<std::size_t>(e.i)] += e.mass;
        col[static_cast<std::size_t>(e.j)] += e.mass;
    }
    for (std::size_t i = 0; i < row.size(); ++i)
        if (std::abs(row[i] - left.w[i]) > tol)
            throw InvalidInput("Coupling: left marginal mismatch");
    for (std::size_t j = 0; j < col.size(); ++j)
        if (std::abs(col[j] - right.w[j]) > tol)
            throw InvalidInput("Coupling: right marginal mismatch");
}

// Jonker-Volgenant dense assignment: column reduction, reduction transfer,
// two augmenting-row-reduction sweeps, then shortest augmenting paths.
AssignmentSolution assignment_jv(int n, const std::vector<double>& cost) {
    auto C = [&](int i, int j) { return cost[static_cast<std::size_t>(i) * n + j]; };
    std::vector<int> rowsol(n, -1), colsol(n, -1), matches(n, 0);
    std::vector<double> v(n);

    for (int j = n - 1; j >= 0; --j) {
        double minv = C(0, j);
        int imin = 0;
        for (int i = 1; i < n; ++i)
            if (C(i, j) < minv) {
                minv = C(i, j);
                imin = i;
            }
        v[j] = minv;
        if (++matches[imin] == 1) {
            rowsol[imin] = j;
            colsol[j] = imin;
        } else {
            colsol[j] = -1;
        }
    }

    std::vector<int> free_rows;
    free_rows.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (matches[i] == 0) {
            free_rows.push_back(i);
        } else if (matches[i] == 1) {
            const int j1 = rowsol[i];
            double minv = kInf;
            for (int j = 0; j < n; ++j)
                if (j != j1) minv = std::min(minv, C(i, j) - v[j]);
            v[j1] -= minv;
        }
    }

    for (int pass = 0; pass < 2 && !free_rows.empty(); ++pass) {
        std::vector<int> next_free;
        int k = 0;
        const int nfree = static_cast<int>(free_rows.size());
        while (k < nfree) {
            const int i = free_rows[static_cast<std::size_t>(k++)];
            double umin = C(i, 0) - v[0], usubmin = kInf;
            int j1 = 0, j2 = -1;
            for (int j = 1; j < n; ++j) {
                const double h = C(i, j) - v[j];
                if (h < usubmin) {
                    if (h >= umin) {
                        usubmin = h;
                        j2 = j;
                    } else {
                        usubmin = umin;
                        j2 = j1;
                        umin = h;
                        j1 = j;
                    }
                }
            }
            int i0 = colsol[j1];
            if (umin < usubmin) {
                v[j1] -= usubmin - umin;
            } else if (i0 >= 0) {
                j1 = j2;
                i0 = colsol[j1];
            }
            rowsol[i] = j1;
            colsol[j1] = i;
            if (i0 >= 0) {
                if (umin < usubmin)
                    free_rows[static_cast<std::size_t>(--k)] = i0;
                else
                    next_free.push_back(i0);
            }
        }
        free_rows = std::move(next_free);
    }

    std::vector<double> d(static_cast<std::size_t>(n));
    std::vector<int> pred(static_cast<std::size_t>(n)), collist(static_cast<std::size_t>(n));
    for (const int f : free_rows) {
        int endofpath = -1;
        for (int j = 0; j < n; ++j) {
            d[static_cast<std::size_t>(j)] = C(f, j) - v[j];
            pred[static_cast<std::size_t>(j)] = f;
            collist[static_cast<std::size_t>(j)] = j;
        }
        int low = 0, up = 0;
        double mind = 0;
        bool found = false;
        while (!found) {
            if (up == low) {
                mind = d[static_cast<std::size_t>(collist[static_cast<std::size_t>(up)])];
                ++up;
                for (int k = up; k < n; ++k) {
                    const int j = collist[static_cast<std::size_t>(k)];
                    const double h = d[static_cast<std::size_t>(j)];
                    if (h <= mind) {
                        if (h < mind) {
                            up = low;
                            mind = h;
                        }
                        collist[static_cast<std::size_t>(k)] =
                            collist[static_cast<std::size_t>(up)];
                        collist[static_cast<std::size_t>(up++)] = j;
                    }
                }
                for (int k = low; k < up && !found; ++k) {
                    const int j = collist[static_cast<std::size_t>(k)];
                    if (colsol[j] < 0) {
                        endofpath = j;
                        found = true;
                    }
                }
            }
            if (!found) {
                const int j1 = collist[static_cast<std::size_t>(low++)];
                const int i = colsol[j1];
                const double h = C(i, j1) - v[j1] - mind;
                for (int k = up; k < n; ++k) {
                    const int j = collist[static_cast<std::size_t>(k)];
                    const double dnew = C(i, j) - v[j] - h;
                    if (dnew < d[static_cast<std::size_t>(j)]) {
                        d[static_cast<std::size_t>(j)] = dnew;
                        pred[static_cast<std::size_t>(j)] = i;
                        if (dnew == mind) {
                            if (colsol[j] < 0) {
                                endofpath = j;
                                found = true;
                                break;
                            }
                            collist[static_cast<std::size_t>(k)] =
                                collist[static_cast<std::size_t>(up)];
                            collist[static_cast<std::size_t>(up++)] = j;
                        }
                    }
                }
            }
        }
        for (int k = 0; k < low; ++k) {
            const int j = collist[static_cast<std::size_t>(k)];
            v[j] += d[static_cast<std::size_t>(j)] - mind;
        }
        int j = endofpath;
        int i;
        do {
            i = pred[static_cast<std::size_t>(j)];
            colsol[j] = i;
            std::swap(j, rowsol[i]);
        } while (i != f);
    }
    AssignmentSolution sol;
    sol.rowsol = std::move(rowsol);
    sol.v = std::move(v);
    sol.u.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        sol.u[static_cast<std::size_t>(i)] =
            C(i, sol.rowsol[static_cast<std::size_t>(i)]) -
            sol.v[static_cast<std::size_t>(sol.rowsol[static_cast<std::size_t>(i)])];
    return sol;
}

// O(n^3) shortest-augmenting-path assignment; the slow, independently coded
// reference (and fallback when the JV duals fail verification).
AssignmentSolution assignment_reference(int n, const std::vector<double>& cost) {
    auto C = [&](int i, int j) { return cost[static_cast<std::size_t>(i) * n + j]; };
    std::vector<double> u(static_cast<std::size_t>(n + 1)), v(static_cast<std::size_t>(n + 1));
    std::vector<int> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n + 1), kInf);
        std::vector<char> used(static_cast<std::size_t>(n + 1), false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = p[static_cast<std::size_t>(j0)];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = C(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    AssignmentSolution sol;
    sol.rowsol.resize(static_cast<std::size_t>(n));
    sol.u.resize(static_cast<std::size_t>(n));
    sol.v.resize(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<std::size_t>(j)] > 0)
            sol.rowsol[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    for (int i = 0; i < n; ++i) sol.u[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i + 1)];
    for (int j = 0; j < n; ++j) sol.v[static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(j + 1)];
    return sol;
}

double verify_assignment(int n, const std::vector<double>& cost, const AssignmentSolution& sol) {
    auto C = [&](int i, int j) { return cost[static_cast<std::size_t>(i) * n + j]; };
    std::vector<char> seen(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        const int j = sol.rowsol[static_cast<std::size_t>(i)];
        if (j < 0 || j >= n || seen[static_cast<std::size_t>(j)]) return kInf;
        seen[static_cast<std::size_t>(j)] = true;
    }
    double scale = 1.0;
    for (double c : cost) scale = std::max(scale, std::abs(c));
    const double tol = 1e-9 * scale;
    double primal = 0, dual = 0;
    for (int i = 0; i < n; ++i) {
        primal += C(i, sol.rowsol[static_cast<std::size_t>(i)]);
        dual += sol.u[static_cast<std::size_t>(i)] + sol.v[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j)
            if (sol.u[static_cast<std::size_t>(i)] + sol.v[static_cast<std::size_t>(j)] >
                C(i, j) + tol)
                return kInf;
    }
    return std::abs(primal - dual) / std::max(primal, 1e-300);
}

namespace {

struct FlowResult {
    Coupling plan;
    double cost = 0;
    double dual_gap = 0;
};

// Successive shortest paths on the dense bipartite transportation graph with
// real-valued supplies.  Shortest paths by Bellman-Ford over true residual
// costs (instance sizes on this route are small; the equal-weight route is
// the assignment solver).  The final duals come from an all-roots relaxation
// of the final residual graph, which certifies optimality.
FlowResult transport_ssp(const std::vector<double>& supply, const std::vector<double>& demand,
                         const std::vector<double>& cost) {
    const int n1 = static_cast<int>(supply.size());
    const int n2 = static_cast<int>(demand.size());
    auto C = [&](int i, int j) { return cost[static_cast<std::size_t>(i) * n2 + j]; };
    std::vector<double> flow(static_cast<std::size_t>(n1) * n2, 0.0);
    std::vector<double> a = supply, b = demand;
    const int V = n1 + n2;  // sources then sinks

    std::vector<double> dist(static_cast<std::size_t>(V));
    std::vector<int> par(static_cast<std::size_t>(V));

    // Strict-improvement guard well above rounding noise; zero-cost residual
    // two-cycles (a forward arc and its reverse) would otherwise let ulp-level
    // "improvements" braid the predecessor pointers into a loop.
    double cost_scale = 1.0;
    for (double c : cost) cost_scale = std::max(cost_scale, std::abs(c));
    const double kImprove = 1e-12 * cost_scale;

    // Bellman-Ford over the residual graph; roots given by seed_sources or,
    // for the dual certificate, every node.
    const auto relax_all = [&](bool seed_sources_only) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(par.begin(), par.end(), -1);
        if (seed_sources_only) {
            for (int i = 0; i < n1; ++i)
                if (a[static_cast<std::size_t>(i)] > 1e-15) dist[static_cast<std::size_t>(i)] = 0;
        } else {
            std::fill(dist.begin(), dist.end(), 0.0);
        }
        for (int round = 0; round < V + 1; ++round) {
            bool changed = false;
            for (int i = 0; i < n1; ++i) {
                const double di = dist[static_cast<std::size_t>(i)];
                if (di == kInf) continue;
                for (int j = 0; j < n2; ++j) {
                    if (di + C(i, j) < dist[static_cast<std::size_t>(n1 + j)] - kImprove) {
                        dist[static_cast<std::size_t>(n1 + j)] = di + C(i, j);
                        par[static_cast<std::size_t>(n1 + j)] = i;
                        changed = true;
                    }
                }
            }
            for (int j = 0; j < n2; ++j) {
                const double dj = dist[static_cast<std::size_t>(n1 + j)];
                if (dj == kInf) continue;
                for (int i = 0; i < n1; ++i) {
                    if (flow[static_cast<std::size_t>(i) * n2 + j] <= 0) continue;
                    if (dj - C(i, j) < dist[static_cast<std::size_t>(i)] - kImprove) {
                        dist[static_cast<std::size_t>(i)] = dj - C(i, j);
                        par[static_cast<std::size_t>(i)] = n1 + j;
                        changed = true;
                    }
                }
            }
            if (!changed) return true;
        }
        return false;  // relaxation still changing after V rounds
    };

    long iterations = 0;
    const long iteration_cap = 64L * V + 64;
    while (true) {
        double remaining = 0;
        for (double s : a) remaining += s;
        if (remaining <= 1e-14) break;
        if (++iterations > iteration_cap)
            throw NumericFailure("transport_ssp: augmentation did not terminate", remaining);

        if (!relax_all(true))
            throw NumericFailure("transport_ssp: negative-cost cycle detected", 0);
        int sink = -1;
        double best = kInf;
        for (int j = 0; j < n2; ++j)
            if (b[static_cast<std::size_t>(j)] > 1e-15 &&
                dist[static_cast<std::size_t>(n1 + j)] < best) {
                best = dist[static_cast<std::size_t>(n1 + j)];
                sink = n1 + j;
            }
        if (sink < 0) throw NumericFailure("transport_ssp: no augmenting path", remaining);

        double push = b[static_cast<std::size_t>(sink - n1)];
        int root = sink;
        int hops = 0;
        for (int k = sink; par[static_cast<std::size_t>(k)] >= 0;
             k = par[static_cast<std::size_t>(k)]) {
            if (++hops > V) throw NumericFailure("transport_ssp: predecessor cycle", 0);
            const int q = par[static_cast<std::size_t>(k)];
            if (k < n1 && q >= n1)
                push = std::min(push, flow[static_cast<std::size_t>(k) * n2 + (q - n1)]);
            root = q;
        }
        push = std::min(push, a[static_cast<std::size_t>(root)]);

        for (int k = sink; par[static_cast<std::size_t>(k)] >= 0;
             k = par[static_cast<std::size_t>(k)]) {
            const int q = par[static_cast<std::size_t>(k)];
            if (k >= n1 && q < n1) {
                flow[static_cast<std::size_t>(q) * n2 + (k - n1)] += push;
            } else if (k < n1 && q >= n1) {
                double& f = flow[static_cast<std::size_t>(k) * n2 + (q - n1)];
                f -= push;
                if (f < 1e-18) f = 0.0;
            }
        }
        double& asrc = a[static_cast<std::size_t>(root)];
        double& bsnk = b[static_cast<std::size_t>(sink - n1)];
        asrc -= push;
        bsnk -= push;
        if (asrc < 1e-18) asrc = 0.0;
        if (bsnk < 1e-18) bsnk = 0.0;
    }

    FlowResult out;
    double primal = 0;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const double f = flow[static_cast<std::size_t>(i) * n2 + j];
            if (f > 0) {
                out.plan.entries.push_back({i, j, f});
                primal += f * C(i, j);
            }
        }
    out.cost = primal;

    // Dual certificate: distances from every node at 0 in the final residual
    // graph satisfy d_{n1+j} - d_i <= c_ij with equality on flow arcs, so
    // u_i = -d_i, v_j = d_{n1+j} is a feasible dual pair.
    if (!relax_all(false))
        throw NumericFailure("transport_ssp: final residual graph has a negative cycle", 0);
    double dual = 0;
    for (int i = 0; i < n1; ++i)
        dual -= supply[static_cast<std::size_t>(i)] * dist[static_cast<std::size_t>(i)];
    for (int j = 0; j < n2; ++j)
        dual += demand[static_cast<std::size_t>(j)] * dist[static_cast<std::size_t>(n1 + j)];
    out.dual_gap = std::abs(primal - dual) / std::max(std::abs(primal), 1e-300);
    return out;
}

std::uint64_t ensemble_hash(const ParticleEnsemble& e) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t nbytes) {
        const unsigned char* b = static_cast<const unsigned char*>(p);
        for (std::size_t k = 0; k < nbytes; ++k) {
            h ^= b[k];
            h *= 1099511628211ull;
        }
    };
    mix(e.x.data(), e.x.size() * sizeof(Vec));
    mix(e.v.data(), e.v.size() * sizeof(Vec));
    mix(e.w.data(), e.w.size() * sizeof(double));
    return h;
}

bool uniform_weights(const ParticleEnsemble& e) {
    const double wref = 1.0 / static_cast<double>(e.size());
    for (double wi : e.w)
        if (std::abs(wi - wref) > 1e-12 * wref) return false;
    return true;
}

}  // namespace

W1Result w1_exact(const ParticleEnsemble& a, const ParticleEnsemble& b) {
    a.validate();
    b.validate();
    if (a.dim != b.dim) throw InvalidInput("w1_exact: dimension mismatch");
    if (a.size() * b.size() > 4000000)
        throw InvalidInput(
            "w1_exact: N1*N2 exceeds the LP tractability cap; use w1_coupled_bound");

    // Canonical orientation makes w1(a, b) and w1(b, a) the same computation.
    if (ensemble_hash(b) < ensemble_hash(a)) {
        W1Result swapped = w1_exact(b, a);
        for (auto& e : swapped.plan.entries) std::swap(e.i, e.j);
        return swapped;
    }

    W1Result out;
    if (a.size() == b.size() && uniform_weights(a) && uniform_weights(b)) {
        const int n = static_cast<int>(a.size());
        std::vector<double> cost(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                cost[static_cast<std::size_t>(i) * n + j] =
                    phase_distance(a, static_cast<std::size_t>(i), b, static_cast<std::size_t>(j));
        AssignmentSolution sol = assignment_jv(n, cost);
        double gap = verify_assignment(n, cost, sol);
        if (!(gap <= 1e-9)) {
            sol = assignment_reference(n, cost);
            gap = verify_assignment(n, cost, sol);
        }
        out.dual_gap = gap;
        const double wi = 1.0 / n;
        for (int i = 0; i < n; ++i)
            out.plan.entries.push_back({i, sol.rowsol[static_cast<std::size_t>(i)], wi});
    } else {
        const int n1 = static_cast<int>(a.size()), n2 = static_cast<int>(b.size());
        std::vector<double> cost(static_cast<std::size_t>(n1) * n2);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j)
                cost[static_cast<std::size_t>(i) * n2 + j] =
                    phase_distance(a, static_cast<std::size_t>(i), b, static_cast<std::size_t>(j));
        auto flow = transport_ssp(a.w, b.w, cost);
        out.plan = std::move(flow.plan);
        out.dual_gap = flow.dual_gap;
    }
    out.distance = coupling_cost(out.plan, a, b);
    return out;
}

double coupling_cost(const Coupling& plan, const ParticleEnsemble& a,
                     const ParticleEnsemble& b) {
    return deterministic_sum(plan.entries.size(), [&](std::size_t k) {
        const auto& e = plan.entries[k];
        return e.mass * phase_distance(a, static_cast<std::size_t>(e.i), b,
                                       static_cast<std::size_t>(e.j));
    });
}

CoupledBound w1_coupled_bound(const Coupling& pi0, const ParticleEnsemble& state1,
                              const ParticleEnsemble& state2) {
    CoupledBound out;
    out.position = deterministic_sum(pi0.entries.size(), [&](std::size_t k) {
        const auto& e = pi0.entries[k];
        return e.mass * norm(state1.x[static_cast<std::size_t>(e.i)] -
                             state2.x[static_cast<std::size_t>(e.j)]);
    });
    out.velocity = deterministic_sum(pi0.entries.size(), [&](std::size_t k) {
        const auto& e = pi0.entries[k];
        return e.mass * norm(state1.v[static_cast<std::size_t>(e.i)] -
                             state2.v[static_cast<std::size_t>(e.j)]);
    });
    out.sum = out.position + out.velocity;
    return out;
}

namespace {
std::size_t locate_time(const EnsembleTrajectory& traj, double t) {
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        if (traj.times[k] == t) return k;
    throw InvalidInput("trajectory does not contain the requested time");
}
}  // namespace

CoupledBound w1_coupled_bound(const Coupling& pi0, const EnsembleTrajectory& traj1,
                              const EnsembleTrajectory& traj2, double t) {
    return w1_coupled_bound(pi0, traj1.states[locate_time(traj1, t)],
                            traj2.states[locate_time(traj2, t)]);
}

Coupling pushforward_coupling(const Coupling& pi0, const EnsembleTrajectory& traj1,
                              const EnsembleTrajectory& traj2, double t) {
    const auto& s1 = traj1.states[locate_time(traj1, t)];
    const auto& s2 = traj2.states[locate_time(traj2, t)];
    Coupling out = pi0;
    out.validate_marginals(s1, s2);
    return out;
}

Coupling identity_coupling(const ParticleEnsemble& a, const ParticleEnsemble& b) {
    if (a.size() != b.size()) throw InvalidInput("identity_coupling: size mismatch");
    Coupling c;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a.w[i] - b.w[i]) > 1e-12)
            throw InvalidInput("identity_coupling: weight mismatch");
        c.entries.push_back({static_cast<int>(i), static_cast<int>(i), a.w[i]});
    }
    return c;
}

}  // namespace vpy
