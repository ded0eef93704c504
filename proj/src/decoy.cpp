#include "tpqkd/decoy.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "tpqkd/errors.hpp"

namespace tpqkd::decoy {

namespace {

double rate(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double rate(double num, std::uint64_t den) {
    return den == 0 ? 0.0 : num / static_cast<double>(den);
}

double clamp01(double v, const char* what, ClampLog* log) {
    if (v < 0.0 || v > 1.0) {
        if (log) log->record(what);
        return std::clamp(v, 0.0, 1.0);
    }
    return v;
}

}  // namespace

void DecoyObservables::validate() const {
    auto check = [](double v, const char* what) {
        if (v < 0.0 || v > 1.0)
            throw ValidationError(std::string("DecoyObservables: ") + what +
                                  " outside [0, 1]");
    };
    for (double v : r_time) check(v, "time rate");
    for (const auto& row : c)
        for (double v : row) check(v, "coincidence probability");
    for (double v : r_phase_alice) check(v, "single-arm rate");
    for (double v : r_phase_bob) check(v, "single-arm rate");
    check(y00, "y00");
}

DecoyObservables observables_from_tallies(const protocol::TallyCounts& tallies,
                                          const source::DecoyIntensities& intensities) {
    DecoyObservables obs;
    obs.mu = {intensities.mu1, intensities.mu2, intensities.mu3, 0.0};
    for (int i = 0; i < kIntensityCount; ++i)
        obs.r_time[i] = rate(tallies.time[i].clicked, tallies.time[i].frames);

    // Locate a true-vacuum label for the C(mu, 0) columns; fall back to the
    // weakest decoy when the configuration keeps mu3 > 0.
    int vac = -1;
    for (int i = 0; i < kIntensityCount; ++i)
        if (obs.mu[i] == 0.0) vac = i;
    obs.vacuum_exact = vac >= 0;
    if (vac < 0) vac = 2;  // mu3 is the weakest by construction

    // Phase-arm statistics come from the accumulated conditional
    // probabilities; the vacuum-subtracted yield bounds need far more
    // precision than the raw coincidence counts carry at desk scale.
    for (int i = 0; i < kIntensityCount; ++i)
        for (int j = 0; j < kIntensityCount; ++j)
            obs.c[i][j] =
                rate(tallies.phase[i][j].exp_coincidences, tallies.phase[i][j].frames);
    for (int i = 0; i < kIntensityCount; ++i) {
        obs.c[i][3] = obs.c[i][vac];
        obs.c[3][i] = obs.c[vac][i];
    }
    obs.c[3][3] = obs.c[vac][vac];

    for (int i = 0; i < kIntensityCount; ++i) {
        obs.r_phase_alice[i] =
            rate(tallies.phase[i][vac].exp_clicked, tallies.phase[i][vac].frames);
        obs.r_phase_bob[i] =
            rate(tallies.phase[vac][i].exp_clicked, tallies.phase[vac][i].frames);
    }
    obs.r_phase_alice[3] = obs.r_phase_alice[vac];
    obs.r_phase_bob[3] = obs.r_phase_bob[vac];
    obs.y00 = obs.c[3][3];
    obs.validate();
    return obs;
}

double y11_upper(const DecoyObservables& obs, IntensityLabel i, IntensityLabel j,
                 ClampLog* log) {
    const double mi = obs.mu[static_cast<int>(i)];
    const double mj = obs.mu[static_cast<int>(j)];
    if (mi <= 0.0 || mj <= 0.0)
        throw ValidationError("y11_upper: intensities must be positive");
    const double cij = obs.c[static_cast<int>(i)][static_cast<int>(j)];
    const double ci0 = obs.c[static_cast<int>(i)][3];
    const double c0j = obs.c[3][static_cast<int>(j)];
    const double raw = (cij * std::exp(mi + mj) - ci0 * std::exp(mi) -
                        c0j * std::exp(mj) + obs.y00) /
                       (mi * mj);
    return clamp01(raw, "y11_upper", log);
}

double y11_upper_best(const DecoyObservables& obs, ClampLog* log) {
    double best = 1.0;
    bool any = false;
    for (int i = 0; i < kIntensityCount; ++i) {
        for (int j = 0; j < kIntensityCount; ++j) {
            if (obs.mu[i] <= 0.0 || obs.mu[j] <= 0.0) continue;
            best = std::min(best, y11_upper(obs, static_cast<IntensityLabel>(i),
                                            static_cast<IntensityLabel>(j), log));
            any = true;
        }
    }
    if (!any) throw ValidationError("y11_upper_best: no positive intensity pair");
    return best;
}

namespace {

// Shared form of the zero- and one-photon decoy bounds over an arbitrary
// triple of per-intensity rates (time basis or a single interferometer arm).
double zero_photon_bound(const std::array<double, 3>& r, const std::array<double, 4>& mu) {
    const double mu2 = mu[1], mu3 = mu[2];
    if (!(mu2 > mu3)) throw ValidationError("zero-photon bound: need mu2 > mu3");
    const double raw =
        (mu2 * r[2] * std::exp(mu3) - mu3 * r[1] * std::exp(mu2)) / (mu2 - mu3);
    return std::max(0.0, raw);
}

double one_photon_bound(const std::array<double, 3>& r, const std::array<double, 4>& mu,
                        const char* what, ClampLog* log) {
    const double mu1 = mu[0], mu2 = mu[1], mu3 = mu[2];
    if (!(mu1 > mu2 + mu3))
        throw ValidationError(std::string(what) + ": requires mu1 > mu2 + mu3");
    const double y0 = zero_photon_bound(r, mu);
    const double denom = mu1 * mu2 - mu1 * mu3 - mu2 * mu2 + mu3 * mu3;
    const double raw =
        (mu1 / denom) * (r[1] * std::exp(mu2) - r[2] * std::exp(mu3) -
                         ((mu2 * mu2 - mu3 * mu3) / (mu1 * mu1)) *
                             (r[0] * std::exp(mu1) - y0));
    return clamp01(raw, what, log);
}

}  // namespace

double y_t0(const DecoyObservables& obs) { return zero_photon_bound(obs.r_time, obs.mu); }

double y_t1_lower(const DecoyObservables& obs, ClampLog* log) {
    return one_photon_bound(obs.r_time, obs.mu, "y_t1_lower", log);
}

double single_photon_gain(double y_t1, const source::DecoyIntensities& in) {
    const double weight = in.p_mu1 * in.mu1 * std::exp(-in.mu1) +
                          in.p_mu2 * in.mu2 * std::exp(-in.mu2) +
                          in.p_mu3 * in.mu3 * std::exp(-in.mu3);
    return weight * y_t1;
}

double y_f1_lower(const DecoyObservables& obs, Arm arm, ClampLog* log) {
    const auto& r4 = arm == Arm::Alice ? obs.r_phase_alice : obs.r_phase_bob;
    const std::array<double, 3> r{r4[0], r4[1], r4[2]};
    return one_photon_bound(r, obs.mu, arm == Arm::Alice ? "y_fa1_lower" : "y_fb1_lower",
                            log);
}

double phase_qber(double y11, double y_fa1, double y_fb1, bool* valid, ClampLog* log) {
    const double denom = y_fa1 * y_fb1;
    if (denom <= 0.0)
        throw EstimatorUndefined("phase_qber: zero single-photon arm yield");
    if (valid) *valid = denom >= 1e-6;
    return clamp01(y11 / denom, "phase_qber", log);
}

YieldBounds estimate_bounds(const DecoyObservables& obs,
                            const source::DecoyIntensities& intensities) {
    obs.validate();
    ClampLog log;
    YieldBounds b;
    b.y_t0 = y_t0(obs);
    b.y_t1_lower = y_t1_lower(obs, &log);
    b.r_t1 = single_photon_gain(b.y_t1_lower, intensities);
    b.y11_upper = y11_upper_best(obs, &log);
    b.y_fa1_lower = y_f1_lower(obs, Arm::Alice, &log);
    b.y_fb1_lower = y_f1_lower(obs, Arm::Bob, &log);
    if (b.y_fa1_lower * b.y_fb1_lower <= 0.0) {
        b.ef = 1.0;
        b.ef_valid = false;
        log.record("phase_qber denominator vanished; pinned e_F to 1");
    } else {
        b.ef = phase_qber(b.y11_upper, b.y_fa1_lower, b.y_fb1_lower, &b.ef_valid, &log);
    }
    b.clamp_events = log.events;
    b.clamp_notes = std::move(log.notes);
    return b;
}

std::string YieldBounds::to_json() const {
    nlohmann::json j;
    j["y11_upper"] = y11_upper;
    j["y_t0"] = y_t0;
    j["y_t1_lower"] = y_t1_lower;
    j["y_fa1_lower"] = y_fa1_lower;
    j["y_fb1_lower"] = y_fb1_lower;
    j["ef"] = ef;
    j["r_t1"] = r_t1;
    j["ef_valid"] = ef_valid;
    j["clamp_events"] = clamp_events;
    j["clamp_notes"] = clamp_notes;
    return j.dump(2);
}

}  // namespace tpqkd::decoy
