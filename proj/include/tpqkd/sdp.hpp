#pragma once

#include <vector>

#include "tpqkd/types.hpp"

namespace tpqkd::sdp {

// Dense equality-constrained semidefinite program over real symmetric
// matrices:
//
//   maximize   tr(C X)
//   subject to tr(A_k X) = b_k,  k = 0..m-1
//              X >= 0  (positive semidefinite)
//
// Sized for the problems in this project (n <= 128, m <= 150); everything is
// dense and factored directly.
struct Problem {
    RMatrix objective;               // C, symmetric n x n
    std::vector<RMatrix> constraints;  // A_k, symmetric n x n
    RVector targets;                 // b
};

enum class Status { Optimal, Infeasible, MaxIterations };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        default: return "max-iterations";
    }
}

struct Options {
    double tolerance = 1e-8;
    int max_iterations = 200;
};

struct Solution {
    Status status = Status::MaxIterations;
    double objective_value = 0.0;
    RMatrix x;       // primal matrix
    RVector y;       // dual multipliers (for the deduplicated constraint set)
    double duality_gap = 0.0;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

// Primal-dual path-following (HKM direction, Mehrotra predictor-corrector).
// Linearly dependent constraints are removed up front; a dependent row whose
// target disagrees with the implied value makes the problem Infeasible.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace tpqkd::sdp
