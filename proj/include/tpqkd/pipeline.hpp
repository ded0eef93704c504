#pragma once

#include <string>
#include <vector>

#include "tpqkd/config.hpp"
#include "tpqkd/decoy.hpp"
#include "tpqkd/keyrate.hpp"
#include "tpqkd/optics.hpp"
#include "tpqkd/protocol.hpp"
#include "tpqkd/secbound.hpp"

namespace tpqkd::pipeline {

// One grid cell of the experiment: simulate, estimate decoy bounds, solve the
// SDP, assemble rates. Carries both the SDP-bounded rate point and the
// theoretical one (e_F^U := e_F).
struct CellResult {
    int dim = 0;
    double loss_db = 0.0;
    protocol::TallyCounts tallies;
    decoy::DecoyObservables observables;
    decoy::YieldBounds bounds;
    secbound::SecurityBound sdp_bound;
    keyrate::RatePoint sdp_point;
    keyrate::RatePoint theory_point;
    bool sdp_supported = true;  // false when d exceeds the solver ceiling
};

// Runs the full pipeline for the configured (dim, loss). The cell seed is
// derived from (config seed, dim, loss index) so sweep results are stable
// under any scheduling.
CellResult run_cell(const config::ExperimentConfig& cfg, int dim, double loss_db,
                    std::uint64_t cell_seed);

// Sweep over sweep_dims x sweep_losses_db (falling back to the configured
// point when a list is empty); cells are dispatched to a worker pool.
std::vector<CellResult> run_sweep(const config::ExperimentConfig& cfg);

struct G2ScanPoint {
    optics::G2Point point;
    double overlap = 0.0;
    double coincidences = 0.0;
    double singles_d0 = 0.0;
    double singles_d1 = 0.0;
    std::uint64_t frames = 0;
};

// HOM dip scan over the configured delay schedule. The overlap parameter is
// the Gaussian envelope exp(-(tau/w)^2 / 2) of the pulse-shape mismatch.
std::vector<G2ScanPoint> run_g2scan(const config::ExperimentConfig& cfg);

// RFC 4180 CSV writers (CRLF terminators, stable %.12g number formatting).
std::string rate_points_to_csv(const std::vector<CellResult>& cells);
std::string g2_scan_to_csv(const std::vector<G2ScanPoint>& points);
std::string cell_to_json(const CellResult& cell, const config::ExperimentConfig& cfg);

// Pretty summary table, one row per cell.
std::string summary_table(const std::vector<CellResult>& cells);

// Writes the configured output files for a finished sweep; returns the paths.
std::vector<std::string> write_outputs(const config::ExperimentConfig& cfg,
                                       const std::vector<CellResult>& cells);

}  // namespace tpqkd::pipeline
