#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tpqkd/optics.hpp"
#include "tpqkd/rng.hpp"
#include "tpqkd/source.hpp"
#include "tpqkd/types.hpp"

namespace tpqkd::protocol {

struct ChannelModel {
    double loss_db = 4.0;
    double phase_noise_sigma = 0.0;      // radians, per-bin Gaussian
    double detector_efficiency = 0.80;
    double dark_rate_cps = 100.0;
    double dead_time_s = 30e-9;
    double saturation_knee_cps = 1.5e6;  // efficiency roll-off onset
    double extinction_db = 18.0;         // adjacent-bin leakage of the modulator
    double basis_split = 0.5;            // Bob's passive routing to the time arm
    double hom_overlap = 1.0;            // wavepacket indistinguishability
    bool match_lo_attenuation = true;    // Bob attenuates his LO to the channel level

    double transmittance() const;
    void validate() const;

    bool operator==(const ChannelModel&) const = default;
};

// Detector efficiency multiplier: 1 below the knee, linear decay above it,
// floored at 0.2 (reached at 5x knee).
double saturation_rolloff(double rate_cps, double knee_cps);

// Per-detector dead-time window and photon-load estimate (EMA over ~10 us).
// The saturation roll-off is driven by the incident photon flux: the current
// depletion that suppresses the registered efficiency is caused by absorption
// events whether or not they produce counts.
class DetectorState {
public:
    void reset();
    bool in_dead_time(double t_s) const { return t_s < dead_until_s_; }
    void record_click(double t_s, double dead_time_s);
    void update_rate(double incident_photons, double frame_duration_s);
    double rate_cps() const { return rate_cps_; }

private:
    double dead_until_s_ = -1.0;
    double rate_cps_ = 0.0;
};

struct CellCounts {
    std::uint64_t sent = 0;          // Alice emitted this cell
    std::uint64_t frames = 0;        // ... and Bob measured in the matching basis
    std::uint64_t clicked = 0;       // frames with >= 1 click (either port, phase)
    std::uint64_t errors = 0;        // wrong-bin symbol (time) / coincidence (phase)
    std::uint64_t coincidences = 0;
    std::uint64_t singles_d0 = 0;
    std::uint64_t singles_d1 = 0;

    // Accumulated conditional probabilities for the same events, given the
    // drawn phases and the detector state at frame start. Unbiased for the
    // counters above with far smaller variance; the decoy estimators consume
    // these so the vacuum-subtracted yields survive desk-scale statistics.
    double exp_clicked = 0.0;
    double exp_coincidences = 0.0;
    double exp_singles_d0 = 0.0;
    double exp_singles_d1 = 0.0;

    void merge(const CellCounts& o);
};

struct TallyCounts {
    std::uint64_t total_frames = 0;
    std::array<CellCounts, kIntensityCount> time;  // by Alice's intensity
    std::array<std::array<CellCounts, kIntensityCount>, kIntensityCount>
        phase;  // [alice][bob]

    void merge(const TallyCounts& o);
    void check_invariants() const;  // throws ValidationError on violation

    std::string to_csv(const source::TransmitterConfig& cfg) const;
    std::string to_json(const source::TransmitterConfig& cfg,
                        std::uint64_t seed) const;
};

// Scales amplitudes by sqrt(channel transmittance) and applies independent
// Gaussian per-bin phases.
optics::CoherentWavepacket transmit_through_channel(const source::Emission& e,
                                                    const ChannelModel& ch,
                                                    CounterRng& rng);

// Threshold detection of a time-basis frame. Appends clicked bin indices to
// `clicks` (cleared on entry). Modulator extinction leaks a fraction of each
// bin's light into its neighbors before detection.
void detect_time_basis(const optics::CoherentWavepacket& wp, const ChannelModel& ch,
                       DetectorState& det, double frame_start_s, double bin_width_s,
                       CounterRng& rng, std::vector<int>& clicks);

struct PhaseDetection {
    bool d0 = false;
    bool d1 = false;
    // Frame-level click probabilities conditioned on the interference means
    // and the dead-time state at frame start.
    double p0 = 0.0;
    double p1 = 0.0;
    bool coincidence() const { return d0 && d1; }
};

// Interference of Alice's (post-channel) wavepacket with Bob's local
// oscillator, then threshold detection on both output ports. The relative
// phase is the difference of the wavepackets' global phases.
PhaseDetection detect_phase_basis(const optics::CoherentWavepacket& alice,
                                  const optics::CoherentWavepacket& bob,
                                  const ChannelModel& ch, DetectorState& det0,
                                  DetectorState& det1, double frame_start_s,
                                  double bin_width_s, CounterRng& rng);

// Full Monte Carlo session. Frames are processed in fixed-size chunks with
// independent RNG streams and per-chunk detector state, so the result is
// bit-identical for any worker count; the chunk-boundary error is bounded by
// dead_time / chunk_duration (~4e-5 at the defaults). workers = 0 uses the
// hardware concurrency.
TallyCounts run_session(const source::TransmitterConfig& cfg, const ChannelModel& ch,
                        std::uint64_t frames, std::uint64_t seed, int workers = 0);

// HOM characterization run: single-peaked wavepackets of mean photon number
// mu from both sources, detected without channel loss. Accumulates the
// conditional click/coincidence probabilities given the drawn phases (the
// detector sampling is integrated out), which matches long hardware
// integration at a fraction of the variance.
struct G2RunResult {
    double coincidences = 0.0;
    double singles_d0 = 0.0;
    double singles_d1 = 0.0;
    std::uint64_t frames = 0;
};
G2RunResult run_g2_frames(double mu, double overlap, std::uint64_t frames,
                          const ChannelModel& ch, std::uint64_t seed, int workers = 0);

}  // namespace tpqkd::protocol
