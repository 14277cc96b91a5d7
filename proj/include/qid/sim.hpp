#pragma once

// Fixed-step RK4 integration of the coupled plant/observer system, the
// two-step estimation pipeline, convergence metrics, and Monte Carlo sweeps.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qid/observers.hpp"
#include "qid/plant.hpp"
#include "qid/qmat.hpp"

namespace qid::sim {

using Rhs = std::function<void(double t, const std::vector<double>& x,
                               std::vector<double>& dx)>;

// Classical RK4 update; throws NonFiniteState if the result is not finite.
std::vector<double> rk4_step(const Rhs& rhs, const std::vector<double>& x,
                             double t, double dt);

struct SimConfig {
    double dt = 1e-3;
    double t1_end = 50.0;
    double t2_end = 200.0;
    int sample_stride = 100;
    int reproject_stride = 100;

    void validate() const;
};

struct Sample {
    double t = 0;
    double y_true = 0;
    double y_meas = 0;
    qmat::RealSym3 rho;
    qmat::RealSym3 rho_hat;
    double omega12_hat = 0;
    double omega23_hat = 0;
    double fidelity = 0; // Tr(rho rho_hat)
};

using Trajectory = std::vector<Sample>;

struct InitConditions {
    qmat::RealSym3 rho0 = qmat::proj(1);
    qmat::RealSym3 rho_hat0 = qmat::proj(1);
    double omega12_hat0 = 1.0 / 1.5;
    double omega23_hat0 = 1.5 * 0.8;
    double theta0 = 0.0;
};

struct EstimationResult {
    double omega12_hat_final = 0;
    double omega23_hat_final = 0;
    double rel_err12 = 0;
    double rel_err23 = 0;
    std::optional<double> tconv12; // band 5%, from t=0
    std::optional<double> tconv23; // band 10%, elapsed since phase-2 start
    std::uint64_t seed = 0;
};

// Convergence-time bands used for the reported metrics.
inline constexpr double kConvBand12 = 0.05;
inline constexpr double kConvBand23 = 0.10;

// Rotating-frame level-2 population requested at the phase-1 -> phase-2
// handoff; the slow stage contracts at a rate proportional to this value.
inline constexpr double kHandoffLevel2Target = 0.65;

struct PhaseResult {
    Trajectory trajectory;
    double omega_hat_final = 0;
    qmat::RealSym3 rho_final;
    qmat::RealSym3 rho_hat_final;
};

PhaseResult run_phase1(const plant::PlantParams& p, const observers::Gains12& g,
                       const std::optional<plant::NoiseSpec>& noise,
                       const SimConfig& cfg,
                       const InitConditions& init = InitConditions{});

PhaseResult run_phase2(const plant::PlantParams& p, const observers::Gains23& g,
                       const std::optional<plant::NoiseSpec>& noise,
                       const SimConfig& cfg, const qmat::RealSym3& rho_init,
                       const qmat::RealSym3& rho_hat_init,
                       double omega23_hat0, double theta0 = 0.0);

struct TwoStepOutput {
    Trajectory trajectory;
    EstimationResult result;
};

TwoStepOutput run_two_step(const plant::PlantParams& p,
                           const observers::Gains12& g12, observers::Gains23 g23,
                           const std::optional<plant::NoiseSpec>& noise,
                           const SimConfig& cfg,
                           const InitConditions& init = InitConditions{});

// Earliest t* such that |value(t)-target|/|target| <= band for all t >= t*.
std::optional<double> convergence_time(
    const std::vector<std::pair<double, double>>& series, double target,
    double band);

struct RunRecord {
    std::uint64_t seed = 0;
    std::string status = "ok";
    EstimationResult result;
};

struct SummaryStats {
    double median = 0;
    double iqr = 0;
    int count = 0;
};

struct MonteCarloOutput {
    std::vector<RunRecord> runs; // seed order
    SummaryStats rel_err12;
    SummaryStats rel_err23;
    SummaryStats tconv12;
    SummaryStats tconv23;
};

struct MonteCarloConfig {
    plant::PlantParams params;
    observers::Gains12 gains12;
    observers::Gains23 gains23;
    plant::NoiseSpec noise; // per-run seed is overridden
    SimConfig sim;
    InitConditions init;
};

MonteCarloOutput monte_carlo(const MonteCarloConfig& base, int n_runs,
                             std::uint64_t seed0, int jobs = 1);

SummaryStats summarize(std::vector<double> values);

}  // namespace qid::sim
