#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "tpqkd/hilbert.hpp"
#include "tpqkd/optics.hpp"
#include "tpqkd/rng.hpp"
#include "two_photon_oracle.hpp"

using namespace tpqkd;
using namespace tpqkd::optics;

namespace {

constexpr double kPi = 3.14159265358979323846;

PerturbedPhaseState random_state(int d, CounterRng& rng) {
    std::vector<double> lambdas(d);
    for (double& l : lambdas) l = rng.uniform(0.0, 2.0 * kPi);
    return PerturbedPhaseState::make(d, rng.uniform(0.0, 2.0 * kPi), std::move(lambdas));
}

CVector perturbed_f0(const PerturbedPhaseState& s) {
    CVector v(s.dim);
    const double norm = 1.0 / std::sqrt(static_cast<double>(s.dim));
    for (int i = 0; i < s.dim; ++i) {
        const double phi = s.global_phase + s.local_phases[i];
        v(i) = norm * Complex(std::cos(phi), std::sin(phi));
    }
    return v;
}

CVector ideal_f0(int d) {
    return CVector::Constant(d, Complex(1.0 / std::sqrt(static_cast<double>(d)), 0.0));
}

}  // namespace

TEST_CASE("ideal states never produce coincidences") {
    for (int d : {2, 4, 8, 16}) {
        const auto s = PerturbedPhaseState::make(d, 0.7, std::vector<double>(d, 0.0));
        CHECK(coincidence_probability(s, d) == 0.0);
    }
}

TEST_CASE("d=2 opposite phases maximize the coincidence probability") {
    const auto s = PerturbedPhaseState::make(2, 0.0, {0.0, kPi});
    const double p = coincidence_probability(s, 2);
    CHECK(p == doctest::Approx(0.5).epsilon(1e-12));

    // Brute-force cross-check plus maximality over random states.
    const auto dist = test_oracle::propagate_two_photon(perturbed_f0(s), ideal_f0(2));
    CHECK(dist.coincidence() == doctest::Approx(p).epsilon(1e-12));

    CounterRng rng(99);
    for (int trial = 0; trial < 200; ++trial)
        CHECK(coincidence_probability(random_state(2, rng), 2) <= p + 1e-12);
}

TEST_CASE("analytic coincidence matches brute-force propagation") {
    CounterRng rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        const int d = 4;
        const auto s = random_state(d, rng);
        const double analytic = coincidence_probability(s, d);
        const auto dist = test_oracle::propagate_two_photon(perturbed_f0(s), ideal_f0(d));
        CHECK(std::abs(analytic - dist.coincidence()) < 1e-10);
        CHECK(std::abs(dist.total() - 1.0) < 1e-10);
    }
}

TEST_CASE("global phase invariance") {
    CounterRng rng(555);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + static_cast<int>(rng.uniform_int(7));
        auto s = random_state(d, rng);
        const double base = coincidence_probability(s, d);

        auto shifted_global = s;
        shifted_global.global_phase += rng.uniform(0.0, 10.0);
        CHECK(coincidence_probability(
                  PerturbedPhaseState::make(d, shifted_global.global_phase,
                                            shifted_global.local_phases),
                  d) == doctest::Approx(base).epsilon(1e-12));

        const double c = rng.uniform(0.0, 2.0 * kPi);
        auto locals = s.local_phases;
        for (double& l : locals) l += c;
        CHECK(coincidence_probability(PerturbedPhaseState::make(d, s.global_phase, locals),
                                      d) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("beamsplitter transform bunches indistinguishable photons") {
    // Single occupied bin on both ports: perfect HOM, no cross-port pairs.
    CVector a = CVector::Zero(3), b = CVector::Zero(3);
    a(1) = 1.0;
    b(1) = 1.0;
    const auto out = bs_transform_two_photon(a, b);
    CHECK(out.coincidence_probability() < 1e-15);
    CHECK(out.total_probability() == doctest::Approx(1.0).epsilon(1e-12));

    const auto f0_out = bs_transform_two_photon(ideal_f0(2), ideal_f0(2));
    CHECK(f0_out.coincidence_probability() < 1e-15);
}

TEST_CASE("beamsplitter transform agrees with the analytic coincidence") {
    const auto s = PerturbedPhaseState::make(2, 0.0, {0.0, kPi});
    const auto out = bs_transform_two_photon(perturbed_f0(s), ideal_f0(2));
    CHECK(out.coincidence_probability() ==
          doctest::Approx(coincidence_probability(s, 2)).epsilon(1e-12));
}

TEST_CASE("beamsplitter transform is unitary on random inputs") {
    CounterRng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform_int(8));
        CVector a(d), b(d);
        for (int i = 0; i < d; ++i) {
            a(i) = Complex(rng.normal(), rng.normal());
            b(i) = Complex(rng.normal(), rng.normal());
        }
        a /= a.norm();
        b /= b.norm();
        const auto out = bs_transform_two_photon(a, b);
        CHECK(std::abs(out.total_probability() - 1.0) < 1e-10);
        const auto oracle = test_oracle::propagate_two_photon(a, b);
        CHECK(std::abs(out.coincidence_probability() - oracle.coincidence()) < 1e-10);
    }

    CVector bad = CVector::Constant(2, Complex(1.0, 0.0));
    CHECK_THROWS_AS(bs_transform_two_photon(bad, bad), ValidationError);
}

TEST_CASE("coherent click means: lone beamsplitter splits 50/50") {
    auto a = CoherentWavepacket::make(2, CVector::Constant(2, Complex(0.3, 0.0)), 0.0);
    auto vac = CoherentWavepacket::vacuum(2);
    const auto means = coherent_click_means(a, vac, 1.23);
    for (int i = 0; i < 2; ++i) {
        CHECK(means.d0[i] == doctest::Approx(0.045).epsilon(1e-12));
        CHECK(means.d1[i] == doctest::Approx(0.045).epsilon(1e-12));
    }
}

TEST_CASE("coherent click means: constructive interference routes to one port") {
    auto a = CoherentWavepacket::make(2, CVector::Constant(2, Complex(0.5, 0.0)), 0.0);
    const auto means = coherent_click_means(a, a, 0.0);
    for (int i = 0; i < 2; ++i) {
        CHECK(means.d0[i] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(means.d1[i] < 1e-15);
    }
}

TEST_CASE("coherent click means conserve energy") {
    CounterRng rng(4242);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 1 + static_cast<int>(rng.uniform_int(8));
        CVector a(d), b(d);
        for (int i = 0; i < d; ++i) {
            a(i) = Complex(rng.normal(), rng.normal()) * 0.2;
            b(i) = Complex(rng.normal(), rng.normal()) * 0.2;
        }
        const auto wa = CoherentWavepacket::make(d, a, rng.uniform(0.0, 2 * kPi));
        const auto wb = CoherentWavepacket::make(d, b, rng.uniform(0.0, 2 * kPi));
        const double xi = rng.uniform();
        const auto means = coherent_click_means(wa, wb, rng.uniform(0.0, 2 * kPi), xi);
        double total = 0.0;
        for (int i = 0; i < d; ++i) total += means.d0[i] + means.d1[i];
        CHECK(total ==
              doctest::Approx(wa.mean_photons + wb.mean_photons).epsilon(1e-9));
        for (int i = 0; i < d; ++i) {
            CHECK(means.d0[i] >= -1e-12);
            CHECK(means.d1[i] >= -1e-12);
        }
    }
}

TEST_CASE("g2 estimator") {
    CHECK(g2_estimate(0, 100, 100, 10000).g2 == 0.0);
    CHECK_THROWS_AS(g2_estimate(1, 0, 10, 100), EstimatorUndefined);
    CHECK_THROWS_AS(g2_estimate(1, 10, 10, 0), ValidationError);

    // Independent Bernoulli ports: g2 -> 1.
    CounterRng rng(2020);
    const std::uint64_t frames = 200000;
    const double p = 0.05;
    std::uint64_t c = 0, s0 = 0, s1 = 0;
    for (std::uint64_t f = 0; f < frames; ++f) {
        const bool a = rng.bernoulli(p);
        const bool b = rng.bernoulli(p);
        s0 += a;
        s1 += b;
        c += a && b;
    }
    const auto point = g2_estimate(static_cast<double>(c), static_cast<double>(s0),
                                   static_cast<double>(s1), static_cast<double>(frames));
    CHECK(std::abs(point.g2 - 1.0) < 3.0 * point.stderr_);
}

TEST_CASE("wavepacket validation") {
    CHECK_THROWS_AS(
        PerturbedPhaseState::make(3, 0.0, std::vector<double>{0.0, 0.0}),
        ValidationError);
    CHECK_THROWS_AS(CoherentWavepacket::make(2, CVector::Zero(3), 0.0), ValidationError);
    const auto s = PerturbedPhaseState::make(2, -1.0, {7.0, -0.5});
    for (double l : s.local_phases) {
        CHECK(l >= 0.0);
        CHECK(l < 2.0 * kPi);
    }
    CHECK_THROWS_AS(coincidence_probability(s, 3), ValidationError);
}
