#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace tpqkd {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

enum class Basis { Time, Phase };

// Decoy intensity slots. Mu3 may be configured as exact vacuum (mu = 0).
enum class IntensityLabel : int { Mu1 = 0, Mu2 = 1, Mu3 = 2 };

inline constexpr int kIntensityCount = 3;

inline const char* to_string(Basis b) { return b == Basis::Time ? "time" : "phase"; }

inline const char* to_string(IntensityLabel l) {
    switch (l) {
        case IntensityLabel::Mu1: return "mu1";
        case IntensityLabel::Mu2: return "mu2";
        default: return "mu3";
    }
}

}  // namespace tpqkd
