#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpqkd/hilbert.hpp"
#include "tpqkd/sdp.hpp"
#include "tpqkd/types.hpp"

namespace tpqkd::secbound {

// Which phase-basis statistics constrain the state: the single monitoring
// state f_0 actually transmitted, or the full set of d phase states.
enum class MonitoringPolicy { OneState, AllStates };

MonitoringPolicy policy_from_string(const std::string& s);
const char* to_string(MonitoringPolicy p);

// Measured joint-outcome probabilities overriding the ideal uniform-error
// calibration model. time(i, j) spans all pairs; phase rows follow the
// monitoring policy (row 0 only for OneState).
struct MeasuredTargets {
    RMatrix time;   // d x d
    RMatrix phase;  // d x d (rows beyond the policy's set are ignored)
};

struct SdpProblem {
    int d = 0;
    int dim = 0;  // D = d^2
    CMatrix objective;  // E_F
    std::vector<std::pair<CMatrix, double>> equality_constraints;
};

struct SecurityBound {
    double ef_upper = 0.0;
    sdp::Status status = sdp::Status::MaxIterations;
    double duality_gap = 0.0;
    int iterations = 0;
    CMatrix rho;  // recovered primal state (empty for short-circuited bounds)
    double max_constraint_residual = 0.0;
    double min_eigenvalue = 0.0;
};

// Maximize tr(E_F rho) over bipartite states consistent with the time-basis
// statistics, the phase-basis monitoring statistics, and tr(E_T rho) = e_t.
// Supported d: 2, 4, 8. d = 16 and above exceed the solver ceiling and raise
// CapabilityError.
SdpProblem build_problem(int d, double e_t, double e_f, MonitoringPolicy policy,
                         const std::optional<MeasuredTargets>& measured = std::nullopt);

SecurityBound solve(const SdpProblem& problem, double tolerance = 1e-8, int max_iterations = 200);

// build_problem + solve. For the all-states policy at d = 2 the bound equals
// e_f exactly and is returned without a solve.
SecurityBound ef_bound(int d, double e_t, double e_f, MonitoringPolicy policy,
                       double tolerance = 1e-8, int max_iterations = 200);

std::string problem_to_json(const SdpProblem& problem);
std::string bound_to_json(const SecurityBound& bound);

}  // namespace tpqkd::secbound
