#include "tpqkd/hilbert.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace tpqkd::hilbert {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_hermitian(const CMatrix& m, const char* what) {
    if (m.rows() != m.cols()) throw ValidationError(std::string(what) + ": matrix not square");
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > kHermitianTol)
        throw ValidationError(std::string(what) + ": matrix not Hermitian");
}

CMatrix kron_raw(const CMatrix& a, const CMatrix& b) {
    const int na = static_cast<int>(a.rows()), nb = static_cast<int>(b.rows());
    CMatrix out(na * nb, na * nb);
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < na; ++j)
            out.block(i * nb, j * nb, nb, nb) = a(i, j) * b;
    return out;
}

}  // namespace

KetVector KetVector::from_amplitudes(CVector amps) {
    if (amps.size() < 2) throw ValidationError("KetVector: dim must be >= 2");
    const double norm2 = amps.squaredNorm();
    if (std::abs(norm2 - 1.0) > kNormTol)
        throw ValidationError("KetVector: amplitudes not normalized");
    return KetVector(std::move(amps));
}

Complex KetVector::inner(const KetVector& other) const {
    if (dim() != other.dim()) throw ValidationError("KetVector::inner: dimension mismatch");
    return amps_.dot(other.amps_);
}

KetVector KetVector::conjugated() const { return KetVector(amps_.conjugate()); }

Projector Projector::from_matrix(CMatrix m) {
    require_hermitian(m, "Projector");
    const double dev = (m * m - m).cwiseAbs().maxCoeff();
    if (dev > kIdempotentTol) throw ValidationError("Projector: matrix not idempotent");
    return Projector(std::move(m));
}

DensityOperator DensityOperator::from_matrix(CMatrix m) {
    require_hermitian(m, "DensityOperator");
    return DensityOperator(std::move(m), false);
}

DensityOperator DensityOperator::state_from_matrix(CMatrix m) {
    require_hermitian(m, "DensityOperator");
    if (std::abs(m.trace().real() - 1.0) > 1e-10 || std::abs(m.trace().imag()) > 1e-10)
        throw ValidationError("DensityOperator: state trace != 1");
    DensityOperator op(std::move(m), true);
    if (op.min_eigenvalue() < -1e-9)
        throw ValidationError("DensityOperator: state not positive semidefinite");
    return op;
}

double DensityOperator::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(mat_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

KetVector time_state(int d, int m) {
    if (d < 2) throw ValidationError("time_state: d must be >= 2");
    if (m < 0 || m >= d) throw ValidationError("time_state: index out of range");
    CVector amps = CVector::Zero(d);
    amps(m) = Complex(1.0, 0.0);
    return KetVector::from_amplitudes(std::move(amps));
}

KetVector phase_state(int d, int n) {
    if (d < 2) throw ValidationError("phase_state: d must be >= 2");
    if (n < 0 || n >= d) throw ValidationError("phase_state: index out of range");
    CVector amps(d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    for (int m = 0; m < d; ++m) {
        const double theta = 2.0 * kPi * n * m / d;
        amps(m) = norm * Complex(std::cos(theta), std::sin(theta));
    }
    return KetVector::from_amplitudes(std::move(amps));
}

KetVector basis_state(int d, Basis basis, int index) {
    return basis == Basis::Time ? time_state(d, index) : phase_state(d, index);
}

Projector projector(const KetVector& v) {
    CMatrix m = v.amplitudes() * v.amplitudes().adjoint();
    return Projector::from_matrix(std::move(m));
}

Projector error_operator(int d, Basis basis) {
    if (d < 2) throw ValidationError("error_operator: d must be >= 2");
    const int dim2 = d * d;
    CMatrix sum = CMatrix::Zero(dim2, dim2);
    std::vector<CMatrix> alice(d), bob(d);
    for (int i = 0; i < d; ++i) {
        const KetVector ket = basis_state(d, basis, i);
        alice[i] = ket.amplitudes() * ket.amplitudes().adjoint();
        const KetVector conj = ket.conjugated();
        bob[i] = conj.amplitudes() * conj.amplitudes().adjoint();
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) sum += kron_raw(alice[i], bob[j]);
    return Projector::from_matrix(std::move(sum));
}

Projector kron(const Projector& a, const Projector& b) {
    return Projector::from_matrix(kron_raw(a.matrix(), b.matrix()));
}

DensityOperator kron(const DensityOperator& a, const DensityOperator& b) {
    return DensityOperator::from_matrix(kron_raw(a.matrix(), b.matrix()));
}

}  // namespace tpqkd::hilbert
