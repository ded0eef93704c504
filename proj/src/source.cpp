#include "tpqkd/source.hpp"

#include <cmath>

namespace tpqkd::source {

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
}

DecoyIntensities DecoyIntensities::make(double mu1, double mu2, double mu3,
                                        double p_mu1, double p_mu2, double p_mu3) {
    if (mu3 < 0.0) throw ValidationError("DecoyIntensities: mu3 must be >= 0");
    if (!(mu2 + mu3 < mu1))
        throw ValidationError("DecoyIntensities: require mu2 + mu3 < mu1");
    if (!(mu2 > mu3)) throw ValidationError("DecoyIntensities: require mu2 > mu3");
    if (p_mu1 < 0.0 || p_mu2 < 0.0 || p_mu3 < 0.0)
        throw ValidationError("DecoyIntensities: probabilities must be >= 0");
    if (std::abs(p_mu1 + p_mu2 + p_mu3 - 1.0) > 1e-12)
        throw ValidationError("DecoyIntensities: probabilities must sum to 1");
    return {mu1, mu2, mu3, p_mu1, p_mu2, p_mu3};
}

void TransmitterConfig::validate() const {
    if (dim < 2) throw ValidationError("TransmitterConfig: dim must be >= 2");
    if (p_time < 0.0 || p_time > 1.0)
        throw ValidationError("TransmitterConfig: p_time must lie in [0, 1]");
    if (bin_width_s <= 0.0)
        throw ValidationError("TransmitterConfig: bin width must be positive");
    DecoyIntensities::make(intensities.mu1, intensities.mu2, intensities.mu3,
                           intensities.p_mu1, intensities.p_mu2, intensities.p_mu3);
}

IntensityLabel draw_intensity(const DecoyIntensities& in, CounterRng& rng) {
    const double u = rng.uniform();
    if (u < in.p_mu1) return IntensityLabel::Mu1;
    if (u < in.p_mu1 + in.p_mu2) return IntensityLabel::Mu2;
    return IntensityLabel::Mu3;
}

namespace {

optics::CoherentWavepacket time_wavepacket(int d, int bin, double mu, double phase) {
    CVector amps = CVector::Zero(d);
    amps(bin) = Complex(std::sqrt(mu), 0.0);
    return optics::CoherentWavepacket::make(d, std::move(amps), phase);
}

optics::CoherentWavepacket f0_wavepacket(int d, double mu, double phase) {
    CVector amps = CVector::Constant(d, Complex(std::sqrt(mu / d), 0.0));
    return optics::CoherentWavepacket::make(d, std::move(amps), phase);
}

}  // namespace

Emission draw_emission(const TransmitterConfig& cfg, std::uint64_t frame_index,
                       CounterRng& rng) {
    const bool time_basis = rng.bernoulli(cfg.p_time);
    const IntensityLabel label = draw_intensity(cfg.intensities, rng);
    const double mu = cfg.intensities.value(label);
    const double phase = rng.uniform(0.0, kTwoPi);

    Emission e;
    e.frame_index = frame_index;
    e.intensity = label;
    if (time_basis) {
        e.basis = Basis::Time;
        e.state_index = static_cast<int>(rng.uniform_int(cfg.dim));
        e.wavepacket = time_wavepacket(cfg.dim, e.state_index, mu, phase);
    } else {
        e.basis = Basis::Phase;
        e.state_index = 0;  // only |f_0> is ever transmitted for monitoring
        e.wavepacket = f0_wavepacket(cfg.dim, mu, phase);
    }
    return e;
}

Emission bob_lo_emission(const TransmitterConfig& cfg, IntensityLabel intensity,
                         std::uint64_t frame_index, CounterRng& rng) {
    const double mu = cfg.intensities.value(intensity);
    Emission e;
    e.frame_index = frame_index;
    e.basis = Basis::Phase;
    e.state_index = 0;
    e.intensity = intensity;
    e.wavepacket = f0_wavepacket(cfg.dim, mu, rng.uniform(0.0, kTwoPi));
    return e;
}

}  // namespace tpqkd::source
