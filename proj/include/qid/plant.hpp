#pragma once

// The simulated truth: interaction-frame dynamics of the 3-level projector
// under the two-phase drive, the single population output, and band-limited
// Gaussian noise on output and inputs.

#include <cstdint>

#include "qid/qmat.hpp"

namespace qid::plant {

struct PlantParams {
    double omega12 = 1.0;
    double omega23 = 0.8;

    PlantParams() = default;
    PlantParams(double w12, double w23);
};

enum class Phase { Phase1, Phase2 };

struct ControlLaw {
    Phase phase = Phase::Phase1;
    double eta = 1.0 / 3.0;
    double omega12_for_theta = 1.0; // rate driving theta in phase 2
    double t_phase_start = 0.0;
    double theta0 = 0.0;
};

struct ControlSignals {
    double u12 = 1.0;
    double u23 = 0.0;
    double theta = 0.0;
};

ControlSignals control_signals(const ControlLaw& law, double t);

// u12*Omega12*[sigma12, rho] + u23*Omega23*[sigma23, rho]; traceless.
qmat::RealSym3 plant_rhs(const qmat::RealSym3& rho, double u12, double u23,
                         const PlantParams& p);

// Tr(P1 rho), clamped to [0,1].
double output(const qmat::RealSym3& rho);

struct NoiseSpec {
    double output_std = 0.0;
    double input_std = 0.0;
    double hold_interval = 0.05;
    std::uint64_t seed = 0;

    NoiseSpec() = default;
    NoiseSpec(double y_std, double u_std, double hold, std::uint64_t s);
};

struct NoisySignals {
    double y_meas = 0;
    double u12_actual = 0;
    double u23_actual = 0;
};

// Adds independent Gaussian draws held constant over each hold window;
// deterministic given (seed, window index, channel).
NoisySignals apply_noise(const NoiseSpec& spec, double t, double y,
                         double u12, double u23);

}  // namespace qid::plant
