#pragma once

#include <array>
#include <string>
#include <vector>

#include "tpqkd/protocol.hpp"
#include "tpqkd/source.hpp"
#include "tpqkd/types.hpp"

namespace tpqkd::decoy {

// Per-frame conditional rates extracted from a session's tallies. Intensity
// indices 0..2 are the decoy labels; index 3 is true vacuum. The vacuum slots
// are measured directly when one configured intensity is exactly zero;
// otherwise the weakest decoy substitutes and `vacuum_exact` is false.
struct DecoyObservables {
    std::array<double, 4> mu{};               // intensity values, mu[3] = 0
    std::array<double, 3> r_time{};           // R_T(mu_i), clicked/frames
    std::array<std::array<double, 4>, 4> c{};  // C(mu_a, mu_b), coincidences/frames
    std::array<double, 4> r_phase_alice{};    // Alice mu_i, Bob vacuum
    std::array<double, 4> r_phase_bob{};      // Alice vacuum, Bob mu_j
    double y00 = 0.0;                         // coincidences with both arms dark
    bool vacuum_exact = false;

    void validate() const;  // every entry must be a probability
};

DecoyObservables observables_from_tallies(const protocol::TallyCounts& tallies,
                                          const source::DecoyIntensities& intensities);

// Tracks [0,1] clamping of estimator outputs; clamped results should be
// treated as low-confidence cells.
struct ClampLog {
    int events = 0;
    std::vector<std::string> notes;
    void record(const std::string& what) {
        ++events;
        notes.push_back(what);
    }
};

struct YieldBounds {
    double y11_upper = 0.0;
    double y_t0 = 0.0;
    double y_t1_lower = 0.0;
    double y_fa1_lower = 0.0;
    double y_fb1_lower = 0.0;
    double ef = 0.0;       // phase-basis QBER bound
    double r_t1 = 0.0;     // single-photon gain, per sifted time frame
    bool ef_valid = true;
    int clamp_events = 0;
    std::vector<std::string> clamp_notes;

    std::string to_json() const;
};

// Upper bound on the joint single-photon coincidence yield from the (i, j)
// intensity pair: (C_ij e^{mu_i+mu_j} - C_i0 e^{mu_i} - C_0j e^{mu_j} + Y00)
// / (mu_i mu_j), clamped to [0, 1].
double y11_upper(const DecoyObservables& obs, IntensityLabel i, IntensityLabel j,
                 ClampLog* log = nullptr);

// Tightest y11_upper over all pairs with both intensities positive.
double y11_upper_best(const DecoyObservables& obs, ClampLog* log = nullptr);

// Zero-photon yield from the two weak intensities.
double y_t0(const DecoyObservables& obs);

// Lower bound on the single-photon yield in the time basis (three-intensity
// decoy bound). Requires mu1 > mu2 + mu3.
double y_t1_lower(const DecoyObservables& obs, ClampLog* log = nullptr);

// Single-photon gain per sifted time frame: sum_i p_i mu_i e^{-mu_i} * Y1.
double single_photon_gain(double y_t1, const source::DecoyIntensities& intensities);

enum class Arm { Alice, Bob };

// Lower bound on the one-photon yield of a single interferometer arm, from
// the rates measured with the opposite arm at vacuum. Same algebraic form as
// the time-basis bound.
double y_f1_lower(const DecoyObservables& obs, Arm arm, ClampLog* log = nullptr);

// e_F <= Y11U / (Y_FA1 * Y_FB1). Throws EstimatorUndefined when the
// denominator vanishes; results from denominators below 1e-6 are flagged.
double phase_qber(double y11, double y_fa1, double y_fb1, bool* valid = nullptr,
                  ClampLog* log = nullptr);

// Full estimator chain over a set of observables.
YieldBounds estimate_bounds(const DecoyObservables& obs,
                            const source::DecoyIntensities& intensities);

}  // namespace tpqkd::decoy
