#include "tpqkd/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tpqkd/errors.hpp"
#include "tpqkd/rng.hpp"

namespace tpqkd::pipeline {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    CounterRng rng(seed ^ (a * 0x9e3779b97f4a7c15ull), b + 1);
    return rng.next_u64();
}

}  // namespace

CellResult run_cell(const config::ExperimentConfig& cfg, int dim, double loss_db,
                    std::uint64_t cell_seed) {
    CellResult cell;
    cell.dim = dim;
    cell.loss_db = loss_db;

    source::TransmitterConfig tx = cfg.transmitter;
    tx.dim = dim;
    protocol::ChannelModel ch = cfg.channel;
    ch.loss_db = loss_db;
    tx.validate();
    ch.validate();

    cell.tallies = protocol::run_session(tx, ch, cfg.frames, cell_seed, cfg.workers);
    cell.observables = decoy::observables_from_tallies(cell.tallies, tx.intensities);
    cell.bounds = decoy::estimate_bounds(cell.observables, tx.intensities);

    std::uint64_t t_clicked = 0, t_errors = 0;
    for (const auto& c : cell.tallies.time) {
        t_clicked += c.clicked;
        t_errors += c.errors;
    }
    const double e_t =
        t_clicked == 0 ? 0.0 : static_cast<double>(t_errors) / t_clicked;

    try {
        cell.sdp_bound = secbound::ef_bound(dim, e_t, cell.bounds.ef, cfg.policy,
                                            cfg.sdp_tolerance, cfg.sdp_max_iterations);
    } catch (const CapabilityError&) {
        cell.sdp_supported = false;
        cell.sdp_bound = secbound::SecurityBound{};
        cell.sdp_bound.status = sdp::Status::Infeasible;
    }

    // Theoretical ceiling: all monitoring states transmitted, e_F^U = e_F.
    secbound::SecurityBound theory;
    theory.ef_upper = cell.bounds.ef;
    theory.status = sdp::Status::Optimal;
    cell.theory_point = keyrate::secret_key_rate(cell.bounds, theory, cell.tallies, tx, ch);
    if (cell.sdp_supported)
        cell.sdp_point = keyrate::secret_key_rate(cell.bounds, cell.sdp_bound,
                                                  cell.tallies, tx, ch);
    else
        cell.sdp_point = keyrate::RatePoint{};
    return cell;
}

std::vector<CellResult> run_sweep(const config::ExperimentConfig& cfg) {
    std::vector<int> dims = cfg.sweep_dims;
    if (dims.empty()) dims.push_back(cfg.transmitter.dim);
    std::vector<double> losses = cfg.sweep_losses_db;
    if (losses.empty()) losses.push_back(cfg.channel.loss_db);

    struct Job {
        int dim;
        double loss;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (size_t li = 0; li < losses.size(); ++li)
        for (size_t di = 0; di < dims.size(); ++di)
            jobs.push_back({dims[di], losses[li],
                            mix_seed(cfg.seed, static_cast<std::uint64_t>(dims[di]),
                                     li + 1)});

    std::vector<CellResult> cells(jobs.size());
    // run_session parallelizes internally; a small outer pool overlaps the
    // (serial) SDP solves with neighbouring simulations.
    const int outer = std::min<int>(2, static_cast<int>(jobs.size()));
    if (outer <= 1) {
        for (size_t k = 0; k < jobs.size(); ++k)
            cells[k] = run_cell(cfg, jobs[k].dim, jobs[k].loss, jobs[k].seed);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mutex;
        for (int w = 0; w < outer; ++w)
            pool.emplace_back([&]() {
                for (;;) {
                    const size_t k = next.fetch_add(1);
                    if (k >= jobs.size()) return;
                    try {
                        cells[k] = run_cell(cfg, jobs[k].dim, jobs[k].loss, jobs[k].seed);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error) error = std::current_exception();
                        return;
                    }
                }
            });
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }
    return cells;
}

std::vector<G2ScanPoint> run_g2scan(const config::ExperimentConfig& cfg) {
    std::vector<G2ScanPoint> out;
    const double w = cfg.g2_pulse_width_ps;
    int index = 0;
    for (double tau = cfg.g2_delay_min_ps; tau <= cfg.g2_delay_max_ps + 1e-9;
         tau += cfg.g2_delay_step_ps, ++index) {
        const double xi = std::exp(-0.5 * (tau / w) * (tau / w));
        const auto run = protocol::run_g2_frames(
            cfg.g2_mu, xi, cfg.g2_frames, cfg.channel,
            mix_seed(cfg.seed, 0x672u, static_cast<std::uint64_t>(index)), cfg.workers);
        G2ScanPoint p;
        p.overlap = xi;
        p.coincidences = run.coincidences;
        p.singles_d0 = run.singles_d0;
        p.singles_d1 = run.singles_d1;
        p.frames = run.frames;
        p.point = optics::g2_estimate(run.coincidences, run.singles_d0, run.singles_d1,
                                      static_cast<double>(run.frames));
        p.point.delay_ps = tau;
        out.push_back(std::move(p));
    }
    return out;
}

std::string rate_points_to_csv(const std::vector<CellResult>& cells) {
    std::ostringstream os;
    os << "dim,loss_db,p_time,curve,r_per_frame,r_bps,e_t,e_f,ef_upper,r_t1,r_t,"
          "delta_ec,negative_rate,ef_valid,clamp_events,sdp_status\r\n";
    auto row = [&](const CellResult& c, const keyrate::RatePoint& p, const char* curve,
                   const char* status) {
        os << p.dim << "," << num(p.loss_db) << "," << num(p.p_time) << "," << curve
           << "," << num(p.r_per_frame) << "," << num(p.r_bps) << "," << num(p.e_t)
           << "," << num(p.e_f) << "," << num(p.ef_upper) << "," << num(p.r_t1) << ","
           << num(p.r_t) << "," << num(p.delta_ec) << "," << (p.negative_rate ? 1 : 0)
           << "," << (c.bounds.ef_valid ? 1 : 0) << "," << c.bounds.clamp_events << ","
           << status << "\r\n";
    };
    for (const auto& c : cells) {
        row(c, c.theory_point, "theory", "closed-form");
        if (c.sdp_supported)
            row(c, c.sdp_point, "sdp", sdp::to_string(c.sdp_bound.status));
    }
    return os.str();
}

std::string g2_scan_to_csv(const std::vector<G2ScanPoint>& points) {
    std::ostringstream os;
    os << "delay_ps,overlap,g2,stderr,coincidences,singles_d0,singles_d1,frames\r\n";
    for (const auto& p : points) {
        os << num(p.point.delay_ps) << "," << num(p.overlap) << "," << num(p.point.g2)
           << "," << num(p.point.stderr_) << "," << num(p.coincidences) << ","
           << num(p.singles_d0) << "," << num(p.singles_d1) << "," << p.frames
           << "\r\n";
    }
    return os.str();
}

std::string cell_to_json(const CellResult& cell, const config::ExperimentConfig& cfg) {
    nlohmann::json j;
    j["dim"] = cell.dim;
    j["loss_db"] = cell.loss_db;
    j["tallies"] = nlohmann::json::parse(
        cell.tallies.to_json(cfg.transmitter, cfg.seed));
    j["yield_bounds"] = nlohmann::json::parse(cell.bounds.to_json());
    if (cell.sdp_supported)
        j["security_bound"] = nlohmann::json::parse(secbound::bound_to_json(cell.sdp_bound));
    else
        j["security_bound"] = nullptr;
    j["rate_sdp"] = nlohmann::json::parse(keyrate::rate_point_to_json(cell.sdp_point));
    j["rate_theory"] =
        nlohmann::json::parse(keyrate::rate_point_to_json(cell.theory_point));
    return j.dump(2);
}

std::string summary_table(const std::vector<CellResult>& cells) {
    std::ostringstream os;
    os << "loss_db  d   mu1     mu2     mu3     e_T_mu1  e_T_mu2  e_F      efU      "
          "r_sdp_bps      r_theory_bps\n";
    char buf[256];
    auto cell_qber = [](const protocol::CellCounts& c) {
        return c.clicked == 0 ? 0.0
                              : static_cast<double>(c.errors) /
                                    static_cast<double>(c.clicked);
    };
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof(buf),
                      "%-8.3g %-3d %-7.4g %-7.4g %-7.4g %-8.4f %-8.4f %-8.4f %-8.4f "
                      "%-14.6g %-14.6g\n",
                      c.loss_db, c.dim, c.observables.mu[0], c.observables.mu[1],
                      c.observables.mu[2], cell_qber(c.tallies.time[0]),
                      cell_qber(c.tallies.time[1]), c.bounds.ef,
                      c.sdp_supported ? c.sdp_bound.ef_upper : std::nan(""),
                      c.sdp_supported ? c.sdp_point.r_bps : std::nan(""),
                      c.theory_point.r_bps);
        os << buf;
    }
    return os.str();
}

std::vector<std::string> write_outputs(const config::ExperimentConfig& cfg,
                                       const std::vector<CellResult>& cells) {
    namespace fs = std::filesystem;
    std::vector<std::string> paths;
    fs::create_directories(cfg.output_dir);
    auto emit = [&](const std::string& name, const std::string& content) {
        const fs::path p = fs::path(cfg.output_dir) / (cfg.output_prefix + "_" + name);
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write output file: " + p.string());
        out << content;
        paths.push_back(p.string());
    };
    if (cfg.write_csv) {
        emit("rates.csv", rate_points_to_csv(cells));
        std::string tallies;
        for (const auto& c : cells) {
            source::TransmitterConfig tx = cfg.transmitter;
            tx.dim = c.dim;
            tallies += "# dim=" + std::to_string(c.dim) +
                       " loss_db=" + num(c.loss_db) + "\r\n";
            tallies += c.tallies.to_csv(tx);
        }
        emit("tallies.csv", tallies);
    }
    if (cfg.write_json) {
        std::string json = "[\n";
        for (size_t i = 0; i < cells.size(); ++i) {
            json += cell_to_json(cells[i], cfg);
            if (i + 1 < cells.size()) json += ",";
            json += "\n";
        }
        json += "]\n";
        emit("cells.json", json);
    }
    return paths;
}

}  // namespace tpqkd::pipeline
