#pragma once

#include <cstdint>
#include <vector>

#include "tpqkd/errors.hpp"
#include "tpqkd/types.hpp"

namespace tpqkd::optics {

// Single-photon phase state with per-bin perturbation phases: amplitude
// e^{i(global + local_i)}/sqrt(d) in bin i.
struct PerturbedPhaseState {
    int dim = 0;
    double global_phase = 0.0;          // radians
    std::vector<double> local_phases;   // one per bin, reduced to [0, 2*pi)

    static PerturbedPhaseState make(int dim, double global_phase,
                                    std::vector<double> local_phases);
};

// Weak coherent wavepacket spanning d contiguous bins. bin_amplitudes carry
// the per-bin field (sum |a_i|^2 = mu); the overall randomized phase is kept
// separately.
struct CoherentWavepacket {
    int dim = 0;
    double mean_photons = 0.0;
    CVector bin_amplitudes;
    double global_phase = 0.0;

    static CoherentWavepacket make(int dim, CVector bin_amplitudes, double global_phase);
    static CoherentWavepacket vacuum(int dim);
};

struct G2Point {
    double delay_ps = 0.0;
    double g2 = 0.0;
    double stderr_ = 0.0;
};

// Two-photon state after the beamsplitter, over the 2d output modes
// (c_0..c_{d-1}, d_0..d_{d-1}). pair_amplitudes(p, q) for p <= q is the
// amplitude of the normalized two-photon basis state with photons in modes
// p and q; entries below the diagonal are zero.
struct TwoPhotonOutput {
    int dim = 0;   // bins per port
    CMatrix pair_amplitudes;

    double total_probability() const;
    // Probability mass on cross-port pairs (one photon in each output port).
    double coincidence_probability() const;
};

// Propagates one photon from each input port through the 50/50 beamsplitter
// (a_i -> (c_i + d_i)/sqrt(2), b_i -> (c_i - d_i)/sqrt(2)) and assembles the
// bosonic two-photon output state. Inputs must be unit-norm amplitude vectors
// of equal length.
TwoPhotonOutput bs_transform_two_photon(const CVector& alice_amps, const CVector& bob_amps);

// Closed form for the coincidence probability when Alice's perturbed |f_0>
// meets Bob's ideal |f_0>: sum_{i<j} |e^{i*l_i} - e^{i*l_j}|^2 / (2 d^2).
// Independent of the global phase.
double coincidence_probability(const PerturbedPhaseState& alice, int bob_ideal_dim);

// Classical-field interference of two wavepackets on the 50/50 beamsplitter:
// per-bin mean photon numbers at the two output ports. `relative_phase` is
// the phase of Bob's field relative to Alice's; `overlap` in [0, 1] scales
// the interference cross-term (1 = indistinguishable wavepackets).
struct ClickMeans {
    std::vector<double> d0;
    std::vector<double> d1;
};
ClickMeans coherent_click_means(const CoherentWavepacket& alice,
                                const CoherentWavepacket& bob, double relative_phase,
                                double overlap = 1.0);

// In-place variant used by the per-frame simulation loop.
void coherent_click_means_into(const CoherentWavepacket& alice,
                               const CoherentWavepacket& bob, double relative_phase,
                               double overlap, std::vector<double>& d0,
                               std::vector<double>& d1);

// g2 = (C/F) / ((S1/F)(S2/F)) with a binomially propagated standard error.
// Counts may be fractional (accumulated conditional probabilities behave like
// long-integration counts).
G2Point g2_estimate(double coincidences, double singles_d0, double singles_d1,
                    double frames);

}  // namespace tpqkd::optics
