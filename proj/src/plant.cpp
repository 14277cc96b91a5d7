#include "qid/plant.hpp"

#include <cmath>
#include <random>

namespace qid::plant {

PlantParams::PlantParams(double w12, double w23) : omega12(w12), omega23(w23) {
    if (!std::isfinite(w12) || !std::isfinite(w23) || w12 == 0 || w23 == 0)
        throw ValidationError("PlantParams: Rabi amplitudes must be nonzero and finite");
}

ControlSignals control_signals(const ControlLaw& law, double t) {
    ControlSignals s;
    if (law.phase == Phase::Phase1) return s;
    const double theta = law.omega12_for_theta * (t - law.t_phase_start) + law.theta0;
    s.u23 = law.eta * std::cos(theta);
    s.theta = theta;
    return s;
}

qmat::RealSym3 plant_rhs(const qmat::RealSym3& rho, double u12, double u23,
                         const PlantParams& p) {
    static const qmat::RealSkew3 s12 = qmat::sigma(1, 2);
    static const qmat::RealSkew3 s23 = qmat::sigma(2, 3);
    qmat::RealSym3 d = (u12 * p.omega12) * qmat::commutator(s12, rho);
    if (u23 != 0) d += (u23 * p.omega23) * qmat::commutator(s23, rho);
    return d;
}

double output(const qmat::RealSym3& rho) {
    const double y = rho.d1;
    return y < 0 ? 0.0 : (y > 1 ? 1.0 : y);
}

NoiseSpec::NoiseSpec(double y_std, double u_std, double hold, std::uint64_t s)
    : output_std(y_std), input_std(u_std), hold_interval(hold), seed(s) {
    if (y_std < 0 || u_std < 0 || !(hold > 0))
        throw ValidationError("NoiseSpec: stds must be >= 0 and hold_interval > 0");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double held_gaussian(std::uint64_t seed, std::int64_t window, int channel, double std_dev) {
    if (std_dev == 0) return 0;
    const std::uint64_t s =
        splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(window)) +
                   static_cast<std::uint64_t>(channel));
    std::mt19937_64 eng(s);
    std::normal_distribution<double> n(0.0, std_dev);
    return n(eng);
}

}  // namespace

NoisySignals apply_noise(const NoiseSpec& spec, double t, double y,
                         double u12, double u23) {
    const auto w = static_cast<std::int64_t>(std::floor(t / spec.hold_interval + 1e-9));
    NoisySignals out;
    out.y_meas = y + held_gaussian(spec.seed, w, 0, spec.output_std);
    out.u12_actual = u12 + held_gaussian(spec.seed, w, 1, spec.input_std);
    out.u23_actual = u23 + held_gaussian(spec.seed, w, 2, spec.input_std);
    return out;
}

}  // namespace qid::plant
