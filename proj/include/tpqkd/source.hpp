#pragma once

#include <cstdint>

#include "tpqkd/errors.hpp"
#include "tpqkd/optics.hpp"
#include "tpqkd/rng.hpp"
#include "tpqkd/types.hpp"

namespace tpqkd::source {

// Three decoy mean photon numbers with their selection probabilities.
// mu3 may be exactly zero (vacuum decoy), which makes the vacuum rows of the
// coincidence statistics directly measurable.
struct DecoyIntensities {
    double mu1 = 0.0, mu2 = 0.0, mu3 = 0.0;
    double p_mu1 = 0.0, p_mu2 = 0.0, p_mu3 = 0.0;

    static DecoyIntensities make(double mu1, double mu2, double mu3, double p_mu1,
                                 double p_mu2, double p_mu3);

    double value(IntensityLabel l) const {
        switch (l) {
            case IntensityLabel::Mu1: return mu1;
            case IntensityLabel::Mu2: return mu2;
            default: return mu3;
        }
    }
    double prob(IntensityLabel l) const {
        switch (l) {
            case IntensityLabel::Mu1: return p_mu1;
            case IntensityLabel::Mu2: return p_mu2;
            default: return p_mu3;
        }
    }

    bool operator==(const DecoyIntensities&) const = default;
};

struct TransmitterConfig {
    int dim = 2;
    double p_time = 0.5;  // p_phase = 1 - p_time
    DecoyIntensities intensities;
    double bin_width_s = 400e-12;

    // Frames are contiguous: one wavepacket of d bins back to back.
    double rep_rate_hz() const { return 1.0 / (dim * bin_width_s); }
    double frame_duration_s() const { return dim * bin_width_s; }
    double p_phase() const { return 1.0 - p_time; }

    void validate() const;

    bool operator==(const TransmitterConfig&) const = default;
};

struct Emission {
    std::uint64_t frame_index = 0;
    Basis basis = Basis::Time;
    int state_index = 0;  // time-bin index; always 0 in the phase basis
    IntensityLabel intensity = IntensityLabel::Mu1;
    optics::CoherentWavepacket wavepacket;
};

// Alice's per-frame draw: basis ~ Bernoulli(p_time), time state uniform,
// intensity per the decoy probabilities, global phase uniform in [0, 2*pi).
Emission draw_emission(const TransmitterConfig& cfg, std::uint64_t frame_index,
                       CounterRng& rng);

// Bob's local-oscillator emission: always |f_0> at the requested intensity,
// fresh uniform global phase.
Emission bob_lo_emission(const TransmitterConfig& cfg, IntensityLabel intensity,
                         std::uint64_t frame_index, CounterRng& rng);

IntensityLabel draw_intensity(const DecoyIntensities& in, CounterRng& rng);

}  // namespace tpqkd::source
