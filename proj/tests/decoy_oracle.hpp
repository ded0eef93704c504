#pragma once

// Photon-number-expansion oracle: synthesizes decoy observables exactly from
// a chosen yield table, independent of the estimators under test.

#include <array>
#include <cmath>

#include "tpqkd/decoy.hpp"
#include "tpqkd/source.hpp"

namespace tpqkd::test_oracle {

inline constexpr int kMaxPhotons = 40;

struct YieldModel {
    std::array<double, kMaxPhotons + 1> single{};  // Y_n
    std::array<std::array<double, kMaxPhotons + 1>, kMaxPhotons + 1> joint{};  // Y_nm
};

inline std::array<double, kMaxPhotons + 1> poisson_weights(double mu) {
    std::array<double, kMaxPhotons + 1> w{};
    double p = std::exp(-mu);
    for (int n = 0; n <= kMaxPhotons; ++n) {
        w[n] = p;
        p *= mu / (n + 1);
    }
    return w;
}

inline double mix_single(double mu, const YieldModel& m) {
    const auto w = poisson_weights(mu);
    double r = 0.0;
    for (int n = 0; n <= kMaxPhotons; ++n) r += w[n] * m.single[n];
    return r;
}

inline double mix_joint(double mu_a, double mu_b, const YieldModel& m) {
    const auto wa = poisson_weights(mu_a);
    const auto wb = poisson_weights(mu_b);
    double r = 0.0;
    for (int n = 0; n <= kMaxPhotons; ++n)
        for (int k = 0; k <= kMaxPhotons; ++k) r += wa[n] * wb[k] * m.joint[n][k];
    return r;
}

inline decoy::DecoyObservables synthesize(const source::DecoyIntensities& in,
                                          const YieldModel& time_m,
                                          const YieldModel& arm_a,
                                          const YieldModel& arm_b,
                                          const YieldModel& joint_m) {
    decoy::DecoyObservables obs;
    obs.mu = {in.mu1, in.mu2, in.mu3, 0.0};
    obs.vacuum_exact = true;
    for (int i = 0; i < 3; ++i) obs.r_time[i] = mix_single(obs.mu[i], time_m);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) obs.c[i][j] = mix_joint(obs.mu[i], obs.mu[j], joint_m);
    for (int i = 0; i < 4; ++i) {
        obs.r_phase_alice[i] = mix_single(obs.mu[i], arm_a);
        obs.r_phase_bob[i] = mix_single(obs.mu[i], arm_b);
    }
    obs.y00 = joint_m.joint[0][0];
    return obs;
}

// Threshold detector behind a transmittance-eta channel with an optional dark
// click probability.
inline YieldModel loss_model(double eta, double dark = 0.0) {
    YieldModel m;
    for (int n = 0; n <= kMaxPhotons; ++n) {
        m.single[n] = 1.0 - (1.0 - dark) * std::pow(1.0 - eta, n);
        for (int k = 0; k <= kMaxPhotons; ++k) {
            const double pa = 1.0 - (1.0 - dark) * std::pow(1.0 - eta, n);
            const double pb = 1.0 - (1.0 - dark) * std::pow(1.0 - eta, k);
            m.joint[n][k] = pa * pb;
        }
    }
    return m;
}

}  // namespace tpqkd::test_oracle
