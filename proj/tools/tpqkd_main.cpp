// Command-line front end: `bounds`, `simulate`, `g2scan`, `sweep`.
// Exit codes: 0 ok, 2 validation error, 3 infeasible/capability, 4 I/O error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tpqkd/config.hpp"
#include "tpqkd/errors.hpp"
#include "tpqkd/pipeline.hpp"
#include "tpqkd/secbound.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

tpqkd::config::ExperimentConfig load_config(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw std::ios_base::failure("config file not found: " + path);
    return tpqkd::config::load(path);
}

int cmd_bounds(int d, double e_t, double e_f, const std::string& policy_name,
               double tolerance, int max_iterations) {
    const auto policy = tpqkd::secbound::policy_from_string(policy_name);
    const auto bound =
        tpqkd::secbound::ef_bound(d, e_t, e_f, policy, tolerance, max_iterations);
    std::cout << tpqkd::secbound::bound_to_json(bound) << "\n";
    return bound.status == tpqkd::sdp::Status::Optimal ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const std::string& config_path) {
    const auto cfg = load_config(config_path);
    const auto cells = tpqkd::pipeline::run_sweep(cfg);
    const auto paths = tpqkd::pipeline::write_outputs(cfg, cells);
    std::cout << tpqkd::pipeline::summary_table(cells);
    for (const auto& p : paths) std::cout << "wrote " << p << "\n";
    return kExitOk;
}

int cmd_g2scan(const std::string& config_path, const std::string& out_override) {
    auto cfg = load_config(config_path);
    const auto points = tpqkd::pipeline::run_g2scan(cfg);
    const std::string csv = tpqkd::pipeline::g2_scan_to_csv(points);

    namespace fs = std::filesystem;
    fs::path out = out_override.empty()
                       ? fs::path(cfg.output_dir) / (cfg.output_prefix + "_g2scan.csv")
                       : fs::path(out_override);
    fs::create_directories(out.parent_path().empty() ? "." : out.parent_path());
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::ios_base::failure("cannot write " + out.string());
    f << csv;

    // Visibility is defined at the maximum-overlap point of the scan.
    const tpqkd::pipeline::G2ScanPoint* best = nullptr;
    for (const auto& p : points)
        if (!best || p.overlap > best->overlap) best = &p;
    if (best)
        std::printf("g2(0) = %.4f +- %.4f, visibility V = %.4f\n", best->point.g2,
                    best->point.stderr_, 1.0 - best->point.g2);
    std::cout << "wrote " << out.string() << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& config_path) { return cmd_simulate(config_path); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"d-dimensional time-phase QKD simulator with two-photon "
                 "interference phase measurement"};
    app.require_subcommand(1);

    // bounds
    auto* bounds = app.add_subcommand(
        "bounds", "Solve the phase-error-rate SDP for given error rates");
    int d = 2;
    double e_t = 0.0, e_f = 0.0, tolerance = 1e-8;
    int max_iterations = 200;
    std::string policy = "one-state";
    bounds->add_option("--d", d, "encoding dimension")->required();
    bounds->add_option("--et", e_t, "time-basis QBER")->required();
    bounds->add_option("--ef", e_f, "phase-basis QBER")->required();
    bounds->add_option("--policy", policy, "one-state | all-states");
    bounds->add_option("--tol", tolerance, "solver tolerance");
    bounds->add_option("--max-iter", max_iterations, "iteration cap");

    // simulate / sweep / g2scan
    auto* simulate = app.add_subcommand(
        "simulate", "Run the Monte Carlo pipeline from a config file");
    std::string sim_config;
    simulate->add_option("config", sim_config, "experiment config (TOML)")->required();

    auto* sweep = app.add_subcommand(
        "sweep", "Run the pipeline over the configured dimension/loss grid");
    std::string sweep_config;
    sweep->add_option("config", sweep_config, "experiment config (TOML)")->required();

    auto* g2scan =
        app.add_subcommand("g2scan", "Scan the HOM dip over wavepacket delay");
    std::string g2_config, g2_out;
    g2scan->add_option("config", g2_config, "experiment config (TOML)")->required();
    g2scan->add_option("--out", g2_out, "override output CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bounds->parsed())
            return cmd_bounds(d, e_t, e_f, policy, tolerance, max_iterations);
        if (simulate->parsed()) return cmd_simulate(sim_config);
        if (sweep->parsed()) return cmd_sweep(sweep_config);
        if (g2scan->parsed()) return cmd_g2scan(g2_config, g2_out);
    } catch (const tpqkd::CapabilityError& e) {
        std::cerr << "capability error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const tpqkd::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const tpqkd::EstimatorUndefined& e) {
        std::cerr << "estimator undefined: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
