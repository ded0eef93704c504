#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tpqkd/protocol.hpp"
#include "tpqkd/secbound.hpp"
#include "tpqkd/source.hpp"

namespace tpqkd::config {

// Declarative experiment description. One file carries every physics and run
// parameter; serialization is canonical so parse -> serialize -> parse is the
// identity.
struct ExperimentConfig {
    source::TransmitterConfig transmitter;
    protocol::ChannelModel channel;

    std::uint64_t frames = 10'000'000;
    std::uint64_t seed = 1;
    int workers = 0;  // 0 = hardware concurrency

    secbound::MonitoringPolicy policy = secbound::MonitoringPolicy::OneState;
    double sdp_tolerance = 1e-8;
    int sdp_max_iterations = 200;

    std::vector<int> sweep_dims;
    std::vector<double> sweep_losses_db;

    double g2_mu = 0.016;
    std::uint64_t g2_frames = 1'000'000;
    double g2_delay_min_ps = -160.0;
    double g2_delay_max_ps = 160.0;
    double g2_delay_step_ps = 20.0;
    double g2_pulse_width_ps = 80.0;

    std::string output_dir = "out";
    std::string output_prefix = "run";
    bool write_csv = true;
    bool write_json = true;

    void validate() const;
    std::string to_toml() const;

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse(const std::string& toml_text);
ExperimentConfig load(const std::string& path);
void save(const ExperimentConfig& cfg, const std::string& path);

}  // namespace tpqkd::config
