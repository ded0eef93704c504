#include "tpqkd/keyrate.hpp"

#include <cmath>

#include <json.hpp>

#include "tpqkd/errors.hpp"

namespace tpqkd::keyrate {

template <EntropyVariant V>
double entropy_d(double x, int d) {
    if (d < 2) throw ValidationError("entropy_d: d must be >= 2");
    if (x < 0.0 || x > 1.0) throw ValidationError("entropy_d: x must lie in [0, 1]");
    const double den = V == EntropyVariant::XOverD ? static_cast<double>(d)
                                                   : static_cast<double>(d - 1);
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x / den);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

template double entropy_d<EntropyVariant::XOverD>(double, int);
template double entropy_d<EntropyVariant::XOverDMinus1>(double, int);

RatePoint secret_key_rate(const KeyRateInputs& in) {
    if (in.dim < 2) throw ValidationError("secret_key_rate: dim must be >= 2");
    if (in.rep_rate_hz <= 0.0)
        throw ValidationError("secret_key_rate: rep rate must be positive");

    RatePoint p;
    p.dim = in.dim;
    p.loss_db = in.loss_db;
    p.p_time = in.p_time;
    p.e_t = in.e_t;
    p.e_f = in.e_f;
    p.ef_upper = in.ef_upper;
    p.r_t1 = in.r_t1;
    p.r_t = in.r_t;
    p.delta_ec = in.r_t * entropy_d(in.e_t, in.dim);

    const double log2d = std::log2(static_cast<double>(in.dim));
    const double r = in.r_t1 * (log2d - entropy_d(in.ef_upper, in.dim)) - p.delta_ec;
    p.negative_rate = r < 0.0;
    p.r_per_frame = std::max(0.0, r);
    p.r_bps = p.r_per_frame * in.rep_rate_hz;
    return p;
}

RatePoint secret_key_rate(const decoy::YieldBounds& bounds,
                          const secbound::SecurityBound& sdp_bound,
                          const protocol::TallyCounts& tallies,
                          const source::TransmitterConfig& cfg,
                          const protocol::ChannelModel& ch) {
    if (tallies.total_frames == 0)
        throw ValidationError("secret_key_rate: empty session");

    std::uint64_t sifted = 0, clicked = 0, errors = 0;
    for (const auto& cell : tallies.time) {
        sifted += cell.frames;
        clicked += cell.clicked;
        errors += cell.errors;
    }
    const double frames = static_cast<double>(tallies.total_frames);
    const double sift_fraction = static_cast<double>(sifted) / frames;

    KeyRateInputs in;
    in.dim = cfg.dim;
    in.loss_db = ch.loss_db;
    in.p_time = cfg.p_time;
    in.rep_rate_hz = cfg.rep_rate_hz();
    in.r_t1 = sift_fraction * bounds.r_t1;
    in.r_t = static_cast<double>(clicked) / frames;
    in.e_t = clicked == 0 ? 0.0
                          : static_cast<double>(errors) / static_cast<double>(clicked);
    in.e_f = bounds.ef;
    in.ef_upper = sdp_bound.ef_upper;
    return secret_key_rate(in);
}

std::string rate_point_to_json(const RatePoint& p) {
    nlohmann::json j;
    j["dim"] = p.dim;
    j["loss_db"] = p.loss_db;
    j["p_time"] = p.p_time;
    j["r_per_frame"] = p.r_per_frame;
    j["r_bps"] = p.r_bps;
    j["e_t"] = p.e_t;
    j["e_f"] = p.e_f;
    j["ef_upper"] = p.ef_upper;
    j["r_t1"] = p.r_t1;
    j["r_t"] = p.r_t;
    j["delta_ec"] = p.delta_ec;
    j["negative_rate"] = p.negative_rate;
    return j.dump(2);
}

}  // namespace tpqkd::keyrate
