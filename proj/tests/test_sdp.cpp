#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tpqkd/rng.hpp"
#include "tpqkd/sdp.hpp"

using namespace tpqkd;
using namespace tpqkd::sdp;

namespace {

// Diagonal SDPs reduce to linear programs; brute-force the optimum over the
// basic feasible solutions of {a.x = b, x >= 0}.
double lp_oracle_one_constraint(const RVector& c, const RVector& a, double b) {
    double best = -1e300;
    for (int i = 0; i < c.size(); ++i) {
        if (a(i) <= 1e-12) continue;
        const double x = b / a(i);
        if (x < 0) continue;
        best = std::max(best, c(i) * x);
    }
    return best;
}

RMatrix diag(const RVector& v) {
    RMatrix m = RMatrix::Zero(v.size(), v.size());
    m.diagonal() = v;
    return m;
}

}  // namespace

TEST_CASE("trace-one maximization picks the largest objective eigenvalue") {
    Problem p;
    p.objective = diag((RVector(3) << 1.0, 2.0, 0.5).finished());
    p.constraints.push_back(RMatrix::Identity(3, 3));
    p.targets = RVector::Constant(1, 1.0);
    const auto s = solve(p);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.objective_value == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(s.duality_gap < 1e-7);
}

TEST_CASE("random diagonal SDPs match the LP vertex oracle") {
    CounterRng rng(808);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 4;
        RVector c(n), a(n);
        for (int i = 0; i < n; ++i) {
            c(i) = rng.uniform(-1.0, 1.0);
            a(i) = rng.uniform(0.2, 2.0);
        }
        const double b = rng.uniform(0.5, 2.0);

        Problem p;
        p.objective = diag(c);
        p.constraints.push_back(diag(a));
        p.targets = RVector::Constant(1, b);
        const auto s = solve(p);
        REQUIRE(s.status == Status::Optimal);
        CHECK(s.objective_value ==
              doctest::Approx(lp_oracle_one_constraint(c, a, b)).epsilon(1e-6));
    }
}

TEST_CASE("redundant consistent constraints are deduplicated") {
    Problem p;
    p.objective = diag((RVector(2) << 1.0, 0.0).finished());
    p.constraints.push_back(RMatrix::Identity(2, 2));
    p.constraints.push_back(RMatrix::Identity(2, 2) * 2.0);  // implied
    p.targets = (RVector(2) << 1.0, 2.0).finished();
    const auto s = solve(p);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("contradictory dependent constraints are infeasible") {
    Problem p;
    p.objective = RMatrix::Identity(2, 2);
    p.constraints.push_back(RMatrix::Identity(2, 2));
    p.constraints.push_back(RMatrix::Identity(2, 2) * 2.0);
    p.targets = (RVector(2) << 1.0, 3.0).finished();  // 2*tr != 3
    CHECK(solve(p).status == Status::Infeasible);
}

TEST_CASE("primal solution satisfies constraints and stays PSD") {
    CounterRng rng(909);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 6;
        RMatrix c(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) c(i, j) = rng.normal();
        c = (0.5 * (c + c.transpose())).eval();

        Problem p;
        p.objective = c;
        p.constraints.push_back(RMatrix::Identity(n, n));
        RMatrix a2 = RMatrix::Zero(n, n);
        a2(0, 0) = 1.0;
        p.constraints.push_back(a2);
        p.targets = (RVector(2) << 1.0, 0.3).finished();

        const auto s = solve(p);
        REQUIRE(s.status == Status::Optimal);
        CHECK(std::abs(s.x.trace() - 1.0) < 1e-6);
        CHECK(std::abs(s.x(0, 0) - 0.3) < 1e-6);
        Eigen::SelfAdjointEigenSolver<RMatrix> es(s.x, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > -1e-7);
    }
}
