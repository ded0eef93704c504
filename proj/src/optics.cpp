#include "tpqkd/optics.hpp"

#include <cmath>

namespace tpqkd::optics {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double reduce_phase(double phi) {
    double r = std::fmod(phi, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}
}  // namespace

PerturbedPhaseState PerturbedPhaseState::make(int dim, double global_phase,
                                              std::vector<double> local_phases) {
    if (dim < 1) throw ValidationError("PerturbedPhaseState: dim must be positive");
    if (static_cast<int>(local_phases.size()) != dim)
        throw ValidationError("PerturbedPhaseState: need exactly dim local phases");
    for (double& l : local_phases) l = reduce_phase(l);
    return {dim, reduce_phase(global_phase), std::move(local_phases)};
}

CoherentWavepacket CoherentWavepacket::make(int dim, CVector bin_amplitudes,
                                            double global_phase) {
    if (dim < 1) throw ValidationError("CoherentWavepacket: dim must be positive");
    if (bin_amplitudes.size() != dim)
        throw ValidationError("CoherentWavepacket: amplitude count != dim");
    const double mu = bin_amplitudes.squaredNorm();
    return {dim, mu, std::move(bin_amplitudes), reduce_phase(global_phase)};
}

CoherentWavepacket CoherentWavepacket::vacuum(int dim) {
    return make(dim, CVector::Zero(dim), 0.0);
}

double TwoPhotonOutput::total_probability() const {
    return pair_amplitudes.squaredNorm();
}

double TwoPhotonOutput::coincidence_probability() const {
    // Cross-port pairs live in the upper-right block (p in c-modes, q in
    // d-modes); with p <= q storage that block is exactly rows [0, dim) by
    // columns [dim, 2*dim).
    return pair_amplitudes.block(0, dim, dim, dim).squaredNorm();
}

TwoPhotonOutput bs_transform_two_photon(const CVector& alice_amps,
                                        const CVector& bob_amps) {
    if (alice_amps.size() != bob_amps.size())
        throw ValidationError("bs_transform_two_photon: dimension mismatch");
    const int d = static_cast<int>(alice_amps.size());
    if (d < 1) throw ValidationError("bs_transform_two_photon: empty inputs");
    if (std::abs(alice_amps.squaredNorm() - 1.0) > 1e-9 ||
        std::abs(bob_amps.squaredNorm() - 1.0) > 1e-9)
        throw ValidationError("bs_transform_two_photon: inputs must be normalized");

    // Accumulate coefficients of ordered mode monomials m_p^dag m_q^dag.
    // Mode indexing: p in [0, d) is output c_p, p in [d, 2d) is output d_{p-d}.
    const int n = 2 * d;
    CMatrix coeff = CMatrix::Zero(n, n);
    const double half = 0.5;
    for (int i = 0; i < d; ++i) {
        const Complex a = alice_amps(i);
        if (a == Complex(0.0, 0.0)) continue;
        for (int j = 0; j < d; ++j) {
            const Complex b = bob_amps(j);
            if (b == Complex(0.0, 0.0)) continue;
            const Complex w = half * a * b;
            coeff(i, j) += w;          // c_i c_j
            coeff(i, d + j) -= w;      // c_i d_j
            coeff(d + i, j) += w;      // d_i c_j
            coeff(d + i, d + j) -= w;  // d_i d_j
        }
    }

    // Collapse to the unordered bosonic basis: |p,q> with p < q has unit
    // normalization, |p,p> = (m_p^dag)^2 |vac> / sqrt(2).
    TwoPhotonOutput out;
    out.dim = d;
    out.pair_amplitudes = CMatrix::Zero(n, n);
    const double sqrt2 = std::sqrt(2.0);
    for (int p = 0; p < n; ++p) {
        out.pair_amplitudes(p, p) = sqrt2 * coeff(p, p);
        for (int q = p + 1; q < n; ++q)
            out.pair_amplitudes(p, q) = coeff(p, q) + coeff(q, p);
    }
    return out;
}

double coincidence_probability(const PerturbedPhaseState& alice, int bob_ideal_dim) {
    if (alice.dim != bob_ideal_dim)
        throw ValidationError("coincidence_probability: dimension mismatch");
    const int d = alice.dim;
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            // |e^{i*l_i} - e^{i*l_j}|^2 = 2 - 2 cos(l_i - l_j)
            sum += 2.0 - 2.0 * std::cos(alice.local_phases[i] - alice.local_phases[j]);
        }
    }
    // Ordered pairs carry amplitude (e^{i*l_q} - e^{i*l_p})/(2d); doubling the
    // i<j sum accounts for both orderings.
    return 2.0 * sum / (4.0 * d * d);
}

void coherent_click_means_into(const CoherentWavepacket& alice,
                               const CoherentWavepacket& bob, double relative_phase,
                               double overlap, std::vector<double>& d0,
                               std::vector<double>& d1) {
    if (alice.dim != bob.dim)
        throw ValidationError("coherent_click_means: dimension mismatch");
    if (overlap < 0.0 || overlap > 1.0)
        throw ValidationError("coherent_click_means: overlap must lie in [0, 1]");
    const int d = alice.dim;
    d0.resize(d);
    d1.resize(d);
    const Complex phase(std::cos(relative_phase), std::sin(relative_phase));
    for (int i = 0; i < d; ++i) {
        const Complex a = alice.bin_amplitudes(i);
        const Complex b = bob.bin_amplitudes(i) * phase;
        const double direct = 0.5 * (std::norm(a) + std::norm(b));
        const double cross = overlap * (a * std::conj(b)).real();
        d0[i] = direct + cross;
        d1[i] = direct - cross;
    }
}

ClickMeans coherent_click_means(const CoherentWavepacket& alice,
                                const CoherentWavepacket& bob, double relative_phase,
                                double overlap) {
    ClickMeans out;
    coherent_click_means_into(alice, bob, relative_phase, overlap, out.d0, out.d1);
    return out;
}

G2Point g2_estimate(double coincidences, double singles_d0, double singles_d1,
                    double frames) {
    if (frames <= 0.0) throw ValidationError("g2_estimate: frames must be positive");
    if (coincidences < 0.0 || singles_d0 < 0.0 || singles_d1 < 0.0)
        throw ValidationError("g2_estimate: counts must be >= 0");
    if (singles_d0 > frames || singles_d1 > frames)
        throw ValidationError("g2_estimate: singles exceed frames");
    if (singles_d0 == 0.0 || singles_d1 == 0.0)
        throw EstimatorUndefined("g2_estimate: zero singles on one port");

    const double f = frames;
    const double pc = coincidences / f;
    const double p0 = singles_d0 / f;
    const double p1 = singles_d1 / f;

    G2Point out;
    out.g2 = pc / (p0 * p1);
    // Binomial error propagation; with zero coincidences fall back to the
    // one-count scale so the error bar stays meaningful.
    const double var_c = pc * (1.0 - pc) / f;
    const double var_0 = p0 * (1.0 - p0) / f;
    const double var_1 = p1 * (1.0 - p1) / f;
    if (coincidences > 0.0) {
        const double rel2 = var_c / (pc * pc) + var_0 / (p0 * p0) + var_1 / (p1 * p1);
        out.stderr_ = out.g2 * std::sqrt(rel2);
    } else {
        out.stderr_ = (1.0 / f) / (p0 * p1);
    }
    return out;
}

}  // namespace tpqkd::optics
