#pragma once

#include <vector>

#include "vpy/common.hpp"
#include "vpy/ensemble.hpp"

namespace vpy {

// Discrete coupling between two ensembles; marginals match the weights.
struct Coupling {
    struct Entry {
        int i = 0, j = 0;
        double mass = 0;
    };
    std::vector<Entry> entries;

    void validate_marginals(const ParticleEnsemble& left, const ParticleEnsemble& right,
                            double tol = 1e-12) const;
};

struct W1Result {
    double distance = 0;
    Coupling plan;
    double dual_gap = 0;  // relative LP duality gap
};

// Exact 1-Wasserstein distance on the R^{2d} Euclidean ground cost.  Equal
// sizes with uniform weights route through the assignment solver; anything
// else through successive shortest paths.  Requires N1*N2 <= 4e6.
W1Result w1_exact(const ParticleEnsemble& a, const ParticleEnsemble& b);

// Transport cost of a given coupling at the current states.
double coupling_cost(const Coupling& plan, const ParticleEnsemble& a, const ParticleEnsemble& b);

struct CoupledBound {
    double position = 0;  // int |X_1 - X_2| dpi_0
    double velocity = 0;  // int |V_1 - V_2| dpi_0
    double sum = 0;       // upper bound for W1 at this time
};

// The coupled functionals along two trajectories, evaluated on the frozen
// initial plan.
CoupledBound w1_coupled_bound(const Coupling& pi0, const ParticleEnsemble& state1,
                              const ParticleEnsemble& state2);
// Looks up time t (exact match) in both trajectories.
CoupledBound w1_coupled_bound(const Coupling& pi0, const EnsembleTrajectory& traj1,
                              const EnsembleTrajectory& traj2, double t);

// The frozen plan reinterpreted over the time-t states (indices are carried
// by the flow, weights never change).
Coupling pushforward_coupling(const Coupling& pi0, const EnsembleTrajectory& traj1,
                              const EnsembleTrajectory& traj2, double t);

// Identity coupling for common-seed ensembles (same size, matching weights).
Coupling identity_coupling(const ParticleEnsemble& a, const ParticleEnsemble& b);

// Dense assignment solvers, exposed for cross-checking.  Both return the
// optimal column per row together with the dual prices they maintained.
struct AssignmentSolution {
    std::vector<int> rowsol;
    std::vector<double> u, v;
};
AssignmentSolution assignment_jv(int n, const std::vector<double>& cost);
AssignmentSolution assignment_reference(int n, const std::vector<double>& cost);
// Relative duality gap of a solution, infinity when the duals are infeasible
// or rowsol is not a permutation.
double verify_assignment(int n, const std::vector<double>& cost, const AssignmentSolution& sol);

}  // namespace vpy
