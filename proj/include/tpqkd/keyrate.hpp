#pragma once

#include <string>

#include "tpqkd/decoy.hpp"
#include "tpqkd/protocol.hpp"
#include "tpqkd/secbound.hpp"
#include "tpqkd/source.hpp"

namespace tpqkd::keyrate {

// High-dimensional binary-entropy-like cost term. The default variant divides
// the error term by d as in the reference analysis; XOverDMinus1 is the
// textbook form, selectable at compile time for sensitivity studies.
enum class EntropyVariant { XOverD, XOverDMinus1 };

template <EntropyVariant V = EntropyVariant::XOverD>
double entropy_d(double x, int d);

extern template double entropy_d<EntropyVariant::XOverD>(double, int);
extern template double entropy_d<EntropyVariant::XOverDMinus1>(double, int);

struct RatePoint {
    int dim = 0;
    double loss_db = 0.0;
    double p_time = 0.0;
    double r_per_frame = 0.0;  // bits per transmitted frame
    double r_bps = 0.0;        // r_per_frame * rep_rate
    double e_t = 0.0;
    double e_f = 0.0;
    double ef_upper = 0.0;
    double r_t1 = 0.0;         // single-photon gain per frame
    double r_t = 0.0;          // time-basis detection rate per frame
    double delta_ec = 0.0;     // error-correction cost, bits per frame
    bool negative_rate = false;
};

struct KeyRateInputs {
    int dim = 2;
    double loss_db = 0.0;
    double p_time = 0.5;
    double rep_rate_hz = 0.0;
    double r_t1 = 0.0;       // per frame
    double r_t = 0.0;        // per frame
    double e_t = 0.0;
    double e_f = 0.0;
    double ef_upper = 0.0;
};

// r = R_T1 [log2 d - H(e_F^U)] - R_T H(e_T), floored at zero with the
// negative_rate flag set.
RatePoint secret_key_rate(const KeyRateInputs& in);

// Assembles per-frame inputs from a session: the decoy yields are conditional
// on a basis-matched frame, so they are scaled by the observed sift fraction
// before entering the per-frame rate.
RatePoint secret_key_rate(const decoy::YieldBounds& bounds,
                          const secbound::SecurityBound& sdp_bound,
                          const protocol::TallyCounts& tallies,
                          const source::TransmitterConfig& cfg,
                          const protocol::ChannelModel& ch);

std::string rate_point_to_json(const RatePoint& p);

}  // namespace tpqkd::keyrate
