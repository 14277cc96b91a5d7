#include "qid/analysis.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "qid/sim.hpp"

namespace qid::analysis {

using qmat::RealSym3;

namespace {

const qmat::RealSkew3 kSigma12 = qmat::sigma(1, 2);
const qmat::RealSkew3 kSigma23 = qmat::sigma(2, 3);
const RealSym3 kSigmaX12 = qmat::sigma_x(1, 2);
const RealSym3 kSigmaZ12 = qmat::sigma_z(1, 2);
const RealSym3 kSigmaZ23 = qmat::sigma_z(2, 3);
const RealSym3 kP1 = qmat::proj(1);
const RealSym3 kP2 = qmat::proj(2);

}  // namespace

AveragedDerivative averaged_obs12_rhs(const RealSym3& xi_hat, double omega_tilde,
                                      const RealSym3& xi,
                                      const observers::Gains12& g) {
    const RealSym3 diff = xi - xi_hat;
    const double dz = qmat::trace_prod(kSigmaZ12, diff);
    const double dx = qmat::trace_prod(kSigmaX12, diff);
    const double hz = qmat::trace_prod(kSigmaZ12, xi_hat);
    const double hx = qmat::trace_prod(kSigmaX12, xi_hat);

    AveragedDerivative d;
    d.d_xi_hat = (g.epsilon * omega_tilde) * qmat::commutator(kSigma12, xi_hat) +
                 (g.epsilon * g.gamma_big / 4 * dz) *
                     observers::gain_tangent(kSigmaZ12, xi_hat) +
                 (g.epsilon * g.gamma_big / 4 * dx) *
                     observers::gain_tangent(kSigmaX12, xi_hat);
    d.d_omega = g.epsilon * g.gamma_small / 2 * (-hz * dx + hx * dz);
    return d;
}

AveragedDerivative full_obs12_xi_rhs(const RealSym3& xi_hat, double omega_tilde,
                                     const RealSym3& xi, double theta,
                                     double omega12_true,
                                     const observers::Gains12& g) {
    const qmat::Rotation12 u = qmat::rot12(theta);
    const qmat::Rotation12 u_inv = qmat::rot12(-theta);

    const RealSym3 rho = u.conjugate(xi);
    const RealSym3 rho_hat = u.conjugate(xi_hat);
    const double y = rho.d1;

    observers::Observer12State s{rho_hat, omega12_true + g.epsilon * omega_tilde};
    const observers::ObserverDerivative d_lab = observers::obs12_rhs(s, y, g);

    AveragedDerivative d;
    d.d_xi_hat = u_inv.conjugate(d_lab.d_rho_hat) -
                 omega12_true * qmat::commutator(kSigma12, xi_hat);
    d.d_omega = d_lab.d_omega_hat / g.epsilon;
    return d;
}

RealSym3 averaged23_xi_rhs(const RealSym3& xi, double omega23, double eta) {
    return (eta * omega23 / 2) * qmat::commutator(kSigma23, xi);
}

AveragedDerivative averaged_obs23_rhs(const RealSym3& xi_hat, double omega23_hat,
                                      const RealSym3& xi,
                                      const observers::Gains23& g) {
    const double innov = qmat::trace_prod(kP2, xi - xi_hat);
    AveragedDerivative d;
    d.d_xi_hat = (g.eta * omega23_hat / 2) * qmat::commutator(kSigma23, xi_hat) +
                 (g.epsilon * g.eta * g.gamma_big / 2 * innov) *
                     observers::gain_tangent(kSigmaZ23, xi_hat);
    d.d_omega = g.epsilon * g.epsilon * g.eta * g.gamma_small / 2 * innov *
                qmat::trace_prod(kSigmaZ23, qmat::commutator(kSigma23, xi_hat));
    return d;
}

RealSym3 permute_231(const RealSym3& m) {
    // old levels (1,2,3) land on new levels (3,1,2)
    RealSym3 r;
    r.d1 = m.d2;
    r.d2 = m.d3;
    r.d3 = m.d1;
    r.o12 = m.o23;
    r.o13 = m.o12;
    r.o23 = m.o13;
    return r;
}

void LinearizedParams::validate() const {
    if (!(a > 0) || !(a < 1))
        throw ValidationError("LinearizedParams: a must lie strictly in (0,1)");
    if (!(epsilon > 0) || !(gamma_big > 0) || !(gamma_small > 0))
        throw ValidationError("LinearizedParams: gains must be positive");
}

Mat3 linearized12(const LinearizedParams& p) {
    p.validate();
    const double e = p.epsilon, a = p.a;
    Mat3 m{};
    m[0][0] = -e * a * p.gamma_big / 2;
    m[0][2] = -2 * e * a;
    m[1][1] = -e * a * (1 - a) * p.gamma_big / 2;
    m[2][0] = e * a * p.gamma_small / 2;
    return m;
}

std::array<std::complex<double>, 3> linearized12_spectrum(const LinearizedParams& p) {
    p.validate();
    const double e = p.epsilon, a = p.a;
    // Decoupled z-block plus the (x, Omega) block with characteristic
    // polynomial l^2 + (e*a*Gamma/2) l + e^2 a^2 gamma.
    const double b = e * a * p.gamma_big / 2;
    const double c = e * e * a * a * p.gamma_small;
    const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4 * c));
    return {(-b + disc) / 2.0, (-b - disc) / 2.0,
            std::complex<double>(-e * a * (1 - a) * p.gamma_big / 2, 0)};
}

double lyapunov12(const RealSym3& xi_hat, double omega_tilde, const RealSym3& xi,
                  double gamma_small) {
    if (!(gamma_small > 0))
        throw ValidationError("lyapunov12: gamma must be positive");
    const RealSym3 diff = xi_hat - xi;
    const double ex = qmat::trace_prod(kSigmaX12, diff);
    const double ez = qmat::trace_prod(kSigmaZ12, diff);
    return 4 / gamma_small * omega_tilde * omega_tilde + ex * ex + ez * ez;
}

PredictedTimes predicted_times(const observers::Gains12& g12,
                               const observers::Gains23& g23, double omega12,
                               double omega23) {
    if (!(omega12 > 0) || !(omega23 > 0))
        throw ValidationError("predicted_times: Rabi amplitudes must be positive");
    g12.validate();
    g23.validate();
    PredictedTimes t;
    t.t12 = 2 * M_PI / (g12.epsilon * omega12);
    t.t23 = 4 * M_PI / (g23.epsilon * g23.eta * omega23);
    return t;
}

DemodulatedPopulations demodulate_populations(const Series& y_series,
                                              const Series& theta_series,
                                              double window) {
    if (y_series.empty() || theta_series.empty())
        throw EmptySeries("demodulate_populations: empty input series");
    if (y_series.size() != theta_series.size())
        throw ValidationError("demodulate_populations: series must be aligned");
    if (y_series.size() < 2)
        throw ValidationError("demodulate_populations: need at least two samples");

    const double theta_rate = (theta_series[1].second - theta_series[0].second) /
                              (theta_series[1].first - theta_series[0].first);
    if (!(theta_rate != 0) ||
        window < 2 * M_PI / std::abs(theta_rate))
        throw WindowTooShort("demodulate_populations: window shorter than one theta period");

    const std::size_t n = y_series.size();
    std::vector<double> c1(n + 1, 0), c2(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = y_series[i].second;
        const double m = 2 * std::cos(2 * theta_series[i].second);
        c1[i + 1] = c1[i] + y * (1 + m);
        c2[i + 1] = c2[i] + y * (1 - m);
    }

    DemodulatedPopulations out;
    const double t0 = y_series.front().first;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = y_series[i].first;
        if (t < t0 + window) continue;
        while (y_series[lo].first < t - window) ++lo;
        const double count = static_cast<double>(i - lo + 1);
        out.p1.emplace_back(t, (c1[i + 1] - c1[lo]) / count);
        out.p2.emplace_back(t, (c2[i + 1] - c2[lo]) / count);
    }
    return out;
}

double averaging_gap(double epsilon, double omega12_true, double gamma_big,
                     double gamma_small, double dt) {
    observers::Gains12 g{gamma_big, gamma_small, epsilon};
    g.validate();

    // Frozen true state and a fixed off-equilibrium start for the estimate.
    const RealSym3 xi =
        qmat::PureState::from_vector({std::sqrt(0.7), 0.0, std::sqrt(0.3)}).matrix;
    const RealSym3 xi_hat0 =
        qmat::PureState::from_vector({0.8, 0.25, std::sqrt(1 - 0.64 - 0.0625)}).matrix;
    const double omega_tilde0 = 0.4;

    auto pack = [](const RealSym3& m, double w, std::vector<double>& x) {
        x = {m.d1, m.d2, m.d3, m.o12, m.o13, m.o23, w};
    };
    auto unpack = [](const std::vector<double>& x) {
        RealSym3 m;
        m.d1 = x[0]; m.d2 = x[1]; m.d3 = x[2];
        m.o12 = x[3]; m.o13 = x[4]; m.o23 = x[5];
        return m;
    };

    sim::Rhs full = [&](double t, const std::vector<double>& x,
                        std::vector<double>& dx) {
        const AveragedDerivative d = full_obs12_xi_rhs(
            unpack(x), x[6], xi, omega12_true * t, omega12_true, g);
        dx = {d.d_xi_hat.d1, d.d_xi_hat.d2, d.d_xi_hat.d3,
              d.d_xi_hat.o12, d.d_xi_hat.o13, d.d_xi_hat.o23, d.d_omega};
    };
    sim::Rhs avg = [&](double, const std::vector<double>& x,
                       std::vector<double>& dx) {
        const AveragedDerivative d = averaged_obs12_rhs(unpack(x), x[6], xi, g);
        dx = {d.d_xi_hat.d1, d.d_xi_hat.d2, d.d_xi_hat.d3,
              d.d_xi_hat.o12, d.d_xi_hat.o13, d.d_xi_hat.o23, d.d_omega};
    };

    std::vector<double> xf, xa;
    pack(xi_hat0, omega_tilde0, xf);
    xa = xf;

    const double horizon = 2 * M_PI / omega12_true;
    const long n = std::lround(horizon / dt);
    double gap = 0;
    for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        xf = sim::rk4_step(full, xf, t, dt);
        xa = sim::rk4_step(avg, xa, t, dt);
        const RealSym3 diff = unpack(xf) - unpack(xa);
        gap = std::max(gap, diff.frobenius_norm() + std::abs(xf[6] - xa[6]));
    }
    return gap;
}

double averaging_order_slope(const std::vector<double>& epsilons,
                             double omega12_true, double gamma_big,
                             double gamma_small) {
    if (epsilons.size() < 2)
        throw ValidationError("averaging_order_slope: need at least two epsilons");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(epsilons.size());
    for (double eps : epsilons) {
        const double x = std::log(eps);
        const double y = std::log(averaging_gap(eps, omega12_true, gamma_big,
                                                gamma_small));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double lyapunov_max_step_increase(const observers::Gains12& g, int n_starts,
                                  double perturb_scale, double horizon,
                                  double dt, std::uint64_t seed) {
    g.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ua(0.15, 0.85);
    std::normal_distribution<double> gauss(0.0, perturb_scale);

    double worst = -std::numeric_limits<double>::infinity();
    for (int run = 0; run < n_starts; ++run) {
        const double a = ua(rng);
        const std::array<double, 3> v0 = {std::sqrt(a), 0.0, std::sqrt(1 - a)};
        const RealSym3 xi = qmat::PureState::from_vector(v0).matrix;
        std::array<double, 3> v = v0;
        for (double& c : v) c += gauss(rng);
        const RealSym3 xi_hat0 = qmat::PureState::from_vector(v).matrix;
        const double omega_tilde0 = gauss(rng);

        sim::Rhs rhs = [&](double, const std::vector<double>& x,
                           std::vector<double>& dx) {
            RealSym3 m;
            m.d1 = x[0]; m.d2 = x[1]; m.d3 = x[2];
            m.o12 = x[3]; m.o13 = x[4]; m.o23 = x[5];
            const AveragedDerivative d = averaged_obs12_rhs(m, x[6], xi, g);
            dx = {d.d_xi_hat.d1, d.d_xi_hat.d2, d.d_xi_hat.d3,
                  d.d_xi_hat.o12, d.d_xi_hat.o13, d.d_xi_hat.o23, d.d_omega};
        };

        std::vector<double> x = {xi_hat0.d1, xi_hat0.d2, xi_hat0.d3,
                                 xi_hat0.o12, xi_hat0.o13, xi_hat0.o23,
                                 omega_tilde0};
        auto value = [&](const std::vector<double>& s) {
            RealSym3 m;
            m.d1 = s[0]; m.d2 = s[1]; m.d3 = s[2];
            m.o12 = s[3]; m.o13 = s[4]; m.o23 = s[5];
            return lyapunov12(m, s[6], xi, g.gamma_small);
        };

        double v_prev = value(x);
        const long n = std::lround(horizon / dt);
        for (long i = 0; i < n; ++i) {
            x = sim::rk4_step(rhs, x, static_cast<double>(i) * dt, dt);
            const double v_now = value(x);
            worst = std::max(worst, v_now - v_prev);
            v_prev = v_now;
        }
    }
    return worst;
}

DemodFrozenResult demodulation_frozen_error(double omega12, double window,
                                            double dt, double horizon,
                                            std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::array<double, 3> v = {gauss(rng), gauss(rng), gauss(rng)};
    const RealSym3 xi = qmat::PureState::from_vector(v).matrix;

    const double i12 = xi.d1 + xi.d2;
    const double z = qmat::trace_prod(kSigmaZ12, xi);
    const double x = qmat::trace_prod(kSigmaX12, xi);

    Series ys, ths;
    const long n = std::lround(horizon / dt);
    ys.reserve(n + 1);
    ths.reserve(n + 1);
    for (long i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double theta = omega12 * t;
        const double y = (i12 + std::cos(2 * theta) * z + std::sin(2 * theta) * x) / 2;
        ys.emplace_back(t, y);
        ths.emplace_back(t, theta);
    }

    const DemodulatedPopulations demod = demodulate_populations(ys, ths, window);
    DemodFrozenResult r;
    r.err_p1 = std::abs(demod.p1.back().second - xi.d1);
    r.err_p2 = std::abs(demod.p2.back().second - xi.d2);
    return r;
}

void LabFrameParams::validate() const {
    const double g12 = std::abs(energies[1] - energies[0]);
    const double g23 = std::abs(energies[2] - energies[1]);
    if (g12 == g23)
        throw ValidationError("LabFrameParams: transition gaps must differ");
    const double max_rabi = std::max(std::abs(rabi12()), std::abs(rabi23()));
    if (max_rabi > 0 && std::min(g12, g23) / max_rabi < 20)
        throw RegimeViolation("LabFrameParams: drive too strong for the weak-coupling regime");
}

double labframe_compare(const LabFrameParams& lp, double u12, double u23,
                        double horizon) {
    lp.validate();
    const double g12 = std::abs(lp.energies[1] - lp.energies[0]);
    const double g23 = std::abs(lp.energies[2] - lp.energies[1]);
    const double dt = 1.0 / std::min(g12, g23) / 100.0;

    const double w12 = lp.energies[1] - lp.energies[0];
    const double w23 = lp.energies[2] - lp.energies[1];

    // Lab frame: psi as 6 reals (re1, im1, re2, im2, re3, im3).
    sim::Rhs lab = [&](double t, const std::vector<double>& x,
                       std::vector<double>& dx) {
        const double amp = u12 * lp.a_bar12 * std::sin(w12 * t) +
                           u23 * lp.a_bar23 * std::sin(w23 * t);
        ComplexState3 psi = {std::complex<double>(x[0], x[1]),
                             std::complex<double>(x[2], x[3]),
                             std::complex<double>(x[4], x[5])};
        ComplexState3 h;
        h[0] = lp.energies[0] * psi[0] + amp * lp.mu12 * psi[1];
        h[1] = lp.energies[1] * psi[1] + amp * (lp.mu12 * psi[0] + lp.mu23 * psi[2]);
        h[2] = lp.energies[2] * psi[2] + amp * lp.mu23 * psi[1];
        for (int k = 0; k < 3; ++k) {
            const std::complex<double> d = std::complex<double>(0, -1) * h[k];
            dx[2 * k] = d.real();
            dx[2 * k + 1] = d.imag();
        }
    };

    // Rotating-wave model: commutator flow from P1 with the effective Rabi
    // amplitudes (either may be zero here).
    const double omega12 = lp.rabi12(), omega23 = lp.rabi23();
    sim::Rhs rwa = [&](double, const std::vector<double>& x,
                       std::vector<double>& dx) {
        RealSym3 rho;
        rho.d1 = x[0]; rho.d2 = x[1]; rho.d3 = x[2];
        rho.o12 = x[3]; rho.o13 = x[4]; rho.o23 = x[5];
        RealSym3 d = (u12 * omega12) * qmat::commutator(kSigma12, rho);
        d += (u23 * omega23) * qmat::commutator(kSigma23, rho);
        dx = {d.d1, d.d2, d.d3, d.o12, d.o13, d.o23};
    };

    std::vector<double> xl = {1, 0, 0, 0, 0, 0};
    std::vector<double> xm = {1, 0, 0, 0, 0, 0};
    const long n = std::lround(horizon / dt);
    double gap = 0;
    for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        xl = sim::rk4_step(lab, xl, t, dt);
        xm = sim::rk4_step(rwa, xm, t, dt);
        const double pop_lab = xl[0] * xl[0] + xl[1] * xl[1];
        gap = std::max(gap, std::abs(pop_lab - xm[0]));
    }
    return gap;
}

}  // namespace qid::analysis
