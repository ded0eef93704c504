#include "tpqkd/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tpqkd/errors.hpp"

namespace tpqkd::protocol {

namespace {

constexpr std::uint64_t kChunkFrames = 1ull << 20;
constexpr double kRateEmaTau = 10e-6;  // seconds
constexpr double kRolloffFloor = 0.2;

double dark_click_probability(const ChannelModel& ch, double window_s) {
    return -std::expm1(-ch.dark_rate_cps * window_s);
}

}  // namespace

double ChannelModel::transmittance() const { return std::pow(10.0, -loss_db / 10.0); }

void ChannelModel::validate() const {
    if (loss_db < 0.0) throw ValidationError("ChannelModel: loss_db must be >= 0");
    if (detector_efficiency < 0.0 || detector_efficiency > 1.0)
        throw ValidationError("ChannelModel: detector efficiency must lie in [0, 1]");
    if (phase_noise_sigma < 0.0)
        throw ValidationError("ChannelModel: phase noise sigma must be >= 0");
    if (dark_rate_cps < 0.0 || dead_time_s < 0.0 || saturation_knee_cps <= 0.0)
        throw ValidationError("ChannelModel: rates and dead time must be >= 0");
    if (extinction_db < 0.0)
        throw ValidationError("ChannelModel: extinction must be >= 0 dB");
    if (basis_split < 0.0 || basis_split > 1.0)
        throw ValidationError("ChannelModel: basis split must lie in [0, 1]");
    if (hom_overlap < 0.0 || hom_overlap > 1.0)
        throw ValidationError("ChannelModel: HOM overlap must lie in [0, 1]");
}

double saturation_rolloff(double rate_cps, double knee_cps) {
    if (rate_cps <= knee_cps) return 1.0;
    const double decay = 1.0 - 0.2 * (rate_cps / knee_cps - 1.0);
    return std::max(kRolloffFloor, decay);
}

void DetectorState::reset() {
    dead_until_s_ = -1.0;
    rate_cps_ = 0.0;
}

void DetectorState::record_click(double t_s, double dead_time_s) {
    dead_until_s_ = t_s + dead_time_s;
}

void DetectorState::update_rate(double incident_photons, double frame_duration_s) {
    const double beta = std::min(1.0, frame_duration_s / kRateEmaTau);
    rate_cps_ += beta * (incident_photons / frame_duration_s - rate_cps_);
}

void CellCounts::merge(const CellCounts& o) {
    sent += o.sent;
    frames += o.frames;
    clicked += o.clicked;
    errors += o.errors;
    coincidences += o.coincidences;
    singles_d0 += o.singles_d0;
    singles_d1 += o.singles_d1;
    exp_clicked += o.exp_clicked;
    exp_coincidences += o.exp_coincidences;
    exp_singles_d0 += o.exp_singles_d0;
    exp_singles_d1 += o.exp_singles_d1;
}

void TallyCounts::merge(const TallyCounts& o) {
    total_frames += o.total_frames;
    for (int i = 0; i < kIntensityCount; ++i) time[i].merge(o.time[i]);
    for (int i = 0; i < kIntensityCount; ++i)
        for (int j = 0; j < kIntensityCount; ++j) phase[i][j].merge(o.phase[i][j]);
}

void TallyCounts::check_invariants() const {
    auto check = [](const CellCounts& c, const char* what) {
        if (c.frames > c.sent || c.clicked > c.frames || c.errors > c.clicked)
            throw ValidationError(std::string("TallyCounts: counter ordering violated in ") +
                                  what);
        if (c.coincidences > std::min(c.singles_d0, c.singles_d1))
            throw ValidationError(
                std::string("TallyCounts: coincidences exceed singles in ") + what);
    };
    for (int i = 0; i < kIntensityCount; ++i) check(time[i], "time cell");
    for (int i = 0; i < kIntensityCount; ++i)
        for (int j = 0; j < kIntensityCount; ++j) check(phase[i][j], "phase cell");
}

optics::CoherentWavepacket transmit_through_channel(const source::Emission& e,
                                                    const ChannelModel& ch,
                                                    CounterRng& rng) {
    const double scale = std::sqrt(ch.transmittance());
    CVector amps = e.wavepacket.bin_amplitudes;
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
        if (ch.phase_noise_sigma > 0.0) {
            const double lambda = rng.normal(0.0, ch.phase_noise_sigma);
            amps(i) *= Complex(std::cos(lambda), std::sin(lambda));
        }
        amps(i) *= scale;
    }
    return optics::CoherentWavepacket::make(e.wavepacket.dim, std::move(amps),
                                            e.wavepacket.global_phase);
}

namespace {

// Redistribute per-bin means for finite modulator extinction: each bin leaks
// the fraction r = 10^(-ext/10) into each adjacent bin.
void apply_extinction(const ChannelModel& ch, std::vector<double>& means) {
    const double r = std::pow(10.0, -ch.extinction_db / 10.0);
    if (r <= 0.0) return;
    const int d = static_cast<int>(means.size());
    thread_local std::vector<double> leaked;
    leaked.assign(d, 0.0);
    for (int i = 0; i < d; ++i) {
        const int neighbors = (i > 0 ? 1 : 0) + (i + 1 < d ? 1 : 0);
        leaked[i] += means[i] * (1.0 - neighbors * r);
        if (i > 0) leaked[i - 1] += means[i] * r;
        if (i + 1 < d) leaked[i + 1] += means[i] * r;
    }
    means.swap(leaked);
}

}  // namespace

void detect_time_basis(const optics::CoherentWavepacket& wp, const ChannelModel& ch,
                       DetectorState& det, double frame_start_s, double bin_width_s,
                       CounterRng& rng, std::vector<int>& clicks) {
    clicks.clear();
    const int d = wp.dim;
    thread_local std::vector<double> means;
    means.resize(d);
    for (int i = 0; i < d; ++i) means[i] = std::norm(wp.bin_amplitudes(i));
    apply_extinction(ch, means);

    const double eff =
        ch.detector_efficiency * saturation_rolloff(det.rate_cps(), ch.saturation_knee_cps);
    const double p_dark = dark_click_probability(ch, bin_width_s);
    double incident = 0.0;
    for (int i = 0; i < d; ++i) {
        incident += means[i];
        const double p = 1.0 - std::exp(-eff * means[i]) * (1.0 - p_dark);
        if (p > 0.0 && rng.uniform() < p) {
            const double t = frame_start_s + i * bin_width_s;
            if (!det.in_dead_time(t)) {
                det.record_click(t, ch.dead_time_s);
                clicks.push_back(i);
            }
        }
    }
    det.update_rate(incident, d * bin_width_s);
}

PhaseDetection detect_phase_basis(const optics::CoherentWavepacket& alice,
                                  const optics::CoherentWavepacket& bob,
                                  const ChannelModel& ch, DetectorState& det0,
                                  DetectorState& det1, double frame_start_s,
                                  double bin_width_s, CounterRng& rng) {
    if (alice.dim != bob.dim)
        throw ValidationError("detect_phase_basis: dimension mismatch");
    thread_local std::vector<double> m0, m1;
    const double delta = alice.global_phase - bob.global_phase;
    optics::coherent_click_means_into(alice, bob, delta, ch.hom_overlap, m0, m1);

    const double p_dark = dark_click_probability(ch, bin_width_s);
    PhaseDetection out;
    const double eff0 =
        ch.detector_efficiency * saturation_rolloff(det0.rate_cps(), ch.saturation_knee_cps);
    const double eff1 =
        ch.detector_efficiency * saturation_rolloff(det1.rate_cps(), ch.saturation_knee_cps);

    // Whether a frame produces any click depends only on the dead-time state
    // at frame start (within-frame suppression cannot remove the first
    // click), so the conditional no-click probability is a product over the
    // bins live at entry. Computed before sampling mutates the state.
    thread_local std::vector<double> p0v, p1v;
    p0v.resize(alice.dim);
    p1v.resize(alice.dim);
    double noclick0 = 1.0, noclick1 = 1.0;
    for (int i = 0; i < alice.dim; ++i) {
        const double t = frame_start_s + i * bin_width_s;
        p0v[i] = 1.0 - std::exp(-eff0 * m0[i]) * (1.0 - p_dark);
        p1v[i] = 1.0 - std::exp(-eff1 * m1[i]) * (1.0 - p_dark);
        if (!det0.in_dead_time(t)) noclick0 *= 1.0 - p0v[i];
        if (!det1.in_dead_time(t)) noclick1 *= 1.0 - p1v[i];
    }
    out.p0 = 1.0 - noclick0;
    out.p1 = 1.0 - noclick1;

    double incident0 = 0.0, incident1 = 0.0;
    for (int i = 0; i < alice.dim; ++i) {
        incident0 += m0[i];
        incident1 += m1[i];
        const double t = frame_start_s + i * bin_width_s;
        if (p0v[i] > 0.0 && rng.uniform() < p0v[i] && !det0.in_dead_time(t)) {
            det0.record_click(t, ch.dead_time_s);
            out.d0 = true;
        }
        if (p1v[i] > 0.0 && rng.uniform() < p1v[i] && !det1.in_dead_time(t)) {
            det1.record_click(t, ch.dead_time_s);
            out.d1 = true;
        }
    }
    det0.update_rate(incident0, alice.dim * bin_width_s);
    det1.update_rate(incident1, alice.dim * bin_width_s);
    return out;
}

namespace {

struct ChunkState {
    DetectorState time_det;
    DetectorState phase_det0;
    DetectorState phase_det1;
    std::vector<int> clicks;
};

TallyCounts run_chunk(const source::TransmitterConfig& cfg, const ChannelModel& ch,
                      std::uint64_t first, std::uint64_t count, std::uint64_t seed,
                      std::uint64_t chunk_index) {
    TallyCounts tally;
    tally.total_frames = count;
    CounterRng rng(seed, chunk_index);
    ChunkState st;

    const double bin = cfg.bin_width_s;
    const double frame_dur = cfg.frame_duration_s();
    const double lo_scale =
        ch.match_lo_attenuation ? std::sqrt(ch.transmittance()) : 1.0;

    for (std::uint64_t k = 0; k < count; ++k) {
        const std::uint64_t frame = first + k;
        const double t0 = static_cast<double>(frame) * frame_dur;

        source::Emission e = source::draw_emission(cfg, frame, rng);
        const optics::CoherentWavepacket received = transmit_through_channel(e, ch, rng);
        const int a_label = static_cast<int>(e.intensity);

        if (e.basis == Basis::Time)
            tally.time[a_label].sent++;

        const bool route_time = rng.bernoulli(ch.basis_split);
        if (route_time) {
            detect_time_basis(received, ch, st.time_det, t0, bin, rng, st.clicks);
            // The phase detectors see vacuum this frame; keep their rate
            // estimates on wall-clock time.
            st.phase_det0.update_rate(0, frame_dur);
            st.phase_det1.update_rate(0, frame_dur);
            if (e.basis == Basis::Time) {
                CellCounts& cell = tally.time[a_label];
                cell.frames++;
                if (!st.clicks.empty()) {
                    cell.clicked++;
                    // First click in the frame defines the symbol.
                    if (st.clicks.front() != e.state_index) cell.errors++;
                }
            }
        } else {
            const IntensityLabel b_label =
                static_cast<IntensityLabel>(rng.uniform_int(kIntensityCount));
            source::Emission lo = source::bob_lo_emission(cfg, b_label, frame, rng);
            optics::CoherentWavepacket lo_wp = lo.wavepacket;
            if (lo_scale != 1.0)
                lo_wp = optics::CoherentWavepacket::make(
                    lo_wp.dim, lo_wp.bin_amplitudes * lo_scale, lo_wp.global_phase);

            const PhaseDetection det = detect_phase_basis(
                received, lo_wp, ch, st.phase_det0, st.phase_det1, t0, bin, rng);
            st.time_det.update_rate(0, frame_dur);
            if (e.basis == Basis::Phase) {
                CellCounts& cell = tally.phase[a_label][static_cast<int>(b_label)];
                cell.sent++;
                cell.frames++;
                if (det.d0) cell.singles_d0++;
                if (det.d1) cell.singles_d1++;
                if (det.d0 || det.d1) cell.clicked++;
                if (det.coincidence()) {
                    cell.coincidences++;
                    cell.errors++;
                }
                cell.exp_singles_d0 += det.p0;
                cell.exp_singles_d1 += det.p1;
                cell.exp_clicked += 1.0 - (1.0 - det.p0) * (1.0 - det.p1);
                cell.exp_coincidences += det.p0 * det.p1;
            }
        }
    }
    return tally;
}

}  // namespace

TallyCounts run_session(const source::TransmitterConfig& cfg, const ChannelModel& ch,
                        std::uint64_t frames, std::uint64_t seed, int workers) {
    cfg.validate();
    ch.validate();

    TallyCounts total;
    if (frames == 0) return total;

    const std::uint64_t chunks = (frames + kChunkFrames - 1) / kChunkFrames;
    int n_workers = workers > 0 ? workers
                                : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(chunks)));

    if (n_workers == 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) {
            const std::uint64_t first = c * kChunkFrames;
            const std::uint64_t count = std::min(kChunkFrames, frames - first);
            total.merge(run_chunk(cfg, ch, first, count, seed, c));
        }
    } else {
        std::vector<std::future<TallyCounts>> results(chunks);
        std::atomic<std::uint64_t> next{0};
        // Static result slots, dynamic scheduling: merge order stays fixed.
        std::vector<std::promise<TallyCounts>> promises(chunks);
        for (std::uint64_t c = 0; c < chunks; ++c) results[c] = promises[c].get_future();
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::uint64_t c = next.fetch_add(1);
                    if (c >= chunks) return;
                    const std::uint64_t first = c * kChunkFrames;
                    const std::uint64_t count = std::min(kChunkFrames, frames - first);
                    try {
                        promises[c].set_value(run_chunk(cfg, ch, first, count, seed, c));
                    } catch (...) {
                        promises[c].set_exception(std::current_exception());
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        for (std::uint64_t c = 0; c < chunks; ++c) total.merge(results[c].get());
    }

    total.total_frames = frames;
    total.check_invariants();
    return total;
}

G2RunResult run_g2_frames(double mu, double overlap, std::uint64_t frames,
                          const ChannelModel& ch, std::uint64_t seed, int workers) {
    if (mu < 0.0) throw ValidationError("run_g2_frames: mu must be >= 0");
    if (overlap < 0.0 || overlap > 1.0)
        throw ValidationError("run_g2_frames: overlap must lie in [0, 1]");
    ch.validate();

    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
    const double eff = ch.detector_efficiency;
    // Single-peaked characterization pulses at low rate: the detectors stay
    // far below both the dead-time and saturation regimes.
    const double p_dark = dark_click_probability(ch, 400e-12);

    auto chunk = [&](std::uint64_t first, std::uint64_t count,
                     std::uint64_t chunk_index) {
        (void)first;
        CounterRng rng(seed, 0x67320000u + chunk_index);
        G2RunResult r;
        r.frames = count;
        for (std::uint64_t k = 0; k < count; ++k) {
            const double delta = rng.uniform(0.0, kTwoPi);
            const double cross = overlap * mu * std::cos(delta);
            const double n0 = mu + cross;
            const double n1 = mu - cross;
            const double p0 = 1.0 - std::exp(-eff * n0) * (1.0 - p_dark);
            const double p1 = 1.0 - std::exp(-eff * n1) * (1.0 - p_dark);
            r.singles_d0 += p0;
            r.singles_d1 += p1;
            r.coincidences += p0 * p1;
        }
        return r;
    };

    const std::uint64_t chunks = (frames + kChunkFrames - 1) / kChunkFrames;
    int n_workers = workers > 0 ? workers
                                : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(chunks)));

    G2RunResult total;
    std::vector<G2RunResult> parts(chunks);
    if (n_workers == 1) {
        for (std::uint64_t c = 0; c < chunks; ++c) {
            const std::uint64_t first = c * kChunkFrames;
            parts[c] = chunk(first, std::min(kChunkFrames, frames - first), c);
        }
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back([&]() {
                for (;;) {
                    const std::uint64_t c = next.fetch_add(1);
                    if (c >= chunks) return;
                    const std::uint64_t first = c * kChunkFrames;
                    parts[c] = chunk(first, std::min(kChunkFrames, frames - first), c);
                }
            });
        for (auto& t : pool) t.join();
    }
    for (const auto& p : parts) {
        total.coincidences += p.coincidences;
        total.singles_d0 += p.singles_d0;
        total.singles_d1 += p.singles_d1;
        total.frames += p.frames;
    }
    return total;
}

std::string TallyCounts::to_csv(const source::TransmitterConfig& cfg) const {
    std::ostringstream os;
    os << "basis,mu_alice_label,mu_bob_label,mu_alice,mu_bob,sent,frames,clicked,"
          "errors,coincidences,singles_d0,singles_d1,exp_clicked,exp_coincidences,"
          "exp_singles_d0,exp_singles_d1\r\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    auto counters = [&](const CellCounts& c) {
        std::ostringstream row;
        row << c.sent << "," << c.frames << "," << c.clicked << "," << c.errors << ","
            << c.coincidences << "," << c.singles_d0 << "," << c.singles_d1 << ","
            << num(c.exp_clicked) << "," << num(c.exp_coincidences) << ","
            << num(c.exp_singles_d0) << "," << num(c.exp_singles_d1);
        return row.str();
    };
    for (int i = 0; i < kIntensityCount; ++i) {
        const auto label = static_cast<IntensityLabel>(i);
        os << "time," << to_string(label) << ",,"
           << num(cfg.intensities.value(label)) << ",," << counters(time[i]) << "\r\n";
    }
    for (int i = 0; i < kIntensityCount; ++i) {
        for (int j = 0; j < kIntensityCount; ++j) {
            const auto la = static_cast<IntensityLabel>(i);
            const auto lb = static_cast<IntensityLabel>(j);
            os << "phase," << to_string(la) << "," << to_string(lb) << ","
               << num(cfg.intensities.value(la)) << "," << num(cfg.intensities.value(lb))
               << "," << counters(phase[i][j]) << "\r\n";
        }
    }
    return os.str();
}

std::string TallyCounts::to_json(const source::TransmitterConfig& cfg,
                                 std::uint64_t seed) const {
    nlohmann::json j;
    j["total_frames"] = total_frames;
    j["seed"] = seed;
    auto cell_json = [](const CellCounts& c) {
        return nlohmann::json{{"sent", c.sent},
                              {"frames", c.frames},
                              {"clicked", c.clicked},
                              {"errors", c.errors},
                              {"coincidences", c.coincidences},
                              {"singles_d0", c.singles_d0},
                              {"singles_d1", c.singles_d1},
                              {"exp_clicked", c.exp_clicked},
                              {"exp_coincidences", c.exp_coincidences},
                              {"exp_singles_d0", c.exp_singles_d0},
                              {"exp_singles_d1", c.exp_singles_d1}};
    };
    for (int i = 0; i < kIntensityCount; ++i) {
        const auto label = static_cast<IntensityLabel>(i);
        nlohmann::json cell = cell_json(time[i]);
        cell["mu"] = cfg.intensities.value(label);
        j["time"][to_string(label)] = std::move(cell);
    }
    for (int i = 0; i < kIntensityCount; ++i)
        for (int jb = 0; jb < kIntensityCount; ++jb) {
            const auto la = static_cast<IntensityLabel>(i);
            const auto lb = static_cast<IntensityLabel>(jb);
            nlohmann::json cell = cell_json(phase[i][jb]);
            cell["mu_alice"] = cfg.intensities.value(la);
            cell["mu_bob"] = cfg.intensities.value(lb);
            j["phase"][std::string(to_string(la)) + "_" + to_string(lb)] = std::move(cell);
        }
    return j.dump(2);
}

}  // namespace tpqkd::protocol
