#pragma once

// Brute-force two-photon propagation oracle, independent of the production
// path: builds the full 2d-mode single-photon unitary of the beamsplitter and
// assembles the bosonic two-photon transfer amplitudes from 2x2 permanents.

#include <cmath>
#include <complex>

#include "tpqkd/types.hpp"

namespace tpqkd::test_oracle {

// Mode layout: inputs a_0..a_{d-1}, b_0..b_{d-1}; outputs c_0..c_{d-1},
// d_0..d_{d-1} (same index space, 0..2d-1).
inline CMatrix beamsplitter_unitary(int d) {
    const double s = 1.0 / std::sqrt(2.0);
    CMatrix u = CMatrix::Zero(2 * d, 2 * d);
    for (int i = 0; i < d; ++i) {
        u(i, i) = s;          // c_i <- a_i
        u(d + i, i) = s;      // d_i <- a_i
        u(i, d + i) = s;      // c_i <- b_i
        u(d + i, d + i) = -s; // d_i <- b_i
    }
    return u;
}

struct TwoPhotonDistribution {
    int d = 0;
    CMatrix amplitude;  // (p <= q) entries over 2d modes

    double total() const { return amplitude.squaredNorm(); }
    double coincidence() const { return amplitude.block(0, d, d, d).squaredNorm(); }
};

// Input state: one photon from port a with bin amplitudes `alice`, one from
// port b with `bob`. Output amplitude for the unordered mode pair (p, q):
//   A(p,q) = sum_{ij} alpha_i beta_j [U(p,a_i)U(q,b_j) + U(q,a_i)U(p,b_j)]
//            / sqrt(1 + delta_pq)
inline TwoPhotonDistribution propagate_two_photon(const CVector& alice,
                                                  const CVector& bob) {
    const int d = static_cast<int>(alice.size());
    const CMatrix u = beamsplitter_unitary(d);
    TwoPhotonDistribution out;
    out.d = d;
    out.amplitude = CMatrix::Zero(2 * d, 2 * d);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int p = 0; p < 2 * d; ++p) {
        for (int q = p; q < 2 * d; ++q) {
            Complex amp(0.0, 0.0);
            for (int i = 0; i < d; ++i) {
                if (alice(i) == Complex(0.0, 0.0)) continue;
                for (int j = 0; j < d; ++j) {
                    if (bob(j) == Complex(0.0, 0.0)) continue;
                    const Complex perm =
                        u(p, i) * u(q, d + j) + u(q, i) * u(p, d + j);
                    amp += alice(i) * bob(j) * perm;
                }
            }
            out.amplitude(p, q) = p == q ? amp * inv_sqrt2 : amp;
        }
    }
    return out;
}

}  // namespace tpqkd::test_oracle
