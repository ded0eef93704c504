#pragma once

#include "tpqkd/errors.hpp"
#include "tpqkd/types.hpp"

namespace tpqkd::hilbert {

// Tolerances sized for double accumulation over d^2 <= 1024 terms.
inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kIdempotentTol = 1e-10;

// Normalized pure state on a d-dimensional space. Immutable.
class KetVector {
public:
    static KetVector from_amplitudes(CVector amps);

    int dim() const { return static_cast<int>(amps_.size()); }
    const CVector& amplitudes() const { return amps_; }
    Complex amplitude(int i) const { return amps_(i); }

    // <this|other>
    Complex inner(const KetVector& other) const;

    // Entrywise complex conjugate. Bob-side kets enter bipartite operators
    // through their conjugate (entanglement-based reduction of the protocol).
    KetVector conjugated() const;

private:
    explicit KetVector(CVector a) : amps_(std::move(a)) {}
    CVector amps_;
};

// Hermitian idempotent operator. Immutable.
class Projector {
public:
    static Projector from_matrix(CMatrix m);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const CMatrix& matrix() const { return mat_; }
    double trace() const { return mat_.trace().real(); }

private:
    explicit Projector(CMatrix m) : mat_(std::move(m)) {}
    CMatrix mat_;
};

// Hermitian operator, optionally validated as a quantum state
// (unit trace, positive semidefinite).
class DensityOperator {
public:
    static DensityOperator from_matrix(CMatrix m);        // Hermitian only
    static DensityOperator state_from_matrix(CMatrix m);  // + trace 1, PSD

    int dim() const { return static_cast<int>(mat_.rows()); }
    const CMatrix& matrix() const { return mat_; }
    double trace() const { return mat_.trace().real(); }
    bool is_state() const { return is_state_; }
    double min_eigenvalue() const;

private:
    DensityOperator(CMatrix m, bool is_state) : mat_(std::move(m)), is_state_(is_state) {}
    CMatrix mat_;
    bool is_state_;
};

// |t_m>: standard-basis time-bin ket.
KetVector time_state(int d, int m);

// |f_n>: amplitude e^{2*pi*i*n*m/d}/sqrt(d) at bin m. Mutually unbiased with
// the time basis.
KetVector phase_state(int d, int n);

// Rank-1 projector |v><v|.
Projector projector(const KetVector& v);

// Basis ket by index: time_state or phase_state.
KetVector basis_state(int d, Basis basis, int index);

// Bipartite error operator E_X = sum_{i != j} |x_i><x_i| (x) |x_j*><x_j*| on
// the d^2-dimensional space, Alice-major index ordering ((i,j) -> i*d + j).
// The Bob factor is conjugated so the ideal correlated state carries no error
// weight in either basis; time kets are real so only the phase basis notices.
Projector error_operator(int d, Basis basis);

// Kronecker products, Alice-major ordering.
Projector kron(const Projector& a, const Projector& b);
DensityOperator kron(const DensityOperator& a, const DensityOperator& b);

}  // namespace tpqkd::hilbert
