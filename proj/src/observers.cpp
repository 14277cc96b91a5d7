#include "qid/observers.hpp"

#include <cmath>

namespace qid::observers {

void Gains12::validate() const {
    if (!(gamma_big > 0) || !(gamma_small >= 0))
        throw ValidationError("Gains12: Gamma12 must be positive, gamma12 nonnegative");
    if (!(epsilon > 0) || !(epsilon < 1))
        throw ValidationError("Gains12: epsilon must lie in (0,1)");
}

void Gains23::validate() const {
    if (!(gamma_big > 0) || !(gamma_small >= 0))
        throw ValidationError("Gains23: Gamma23 must be positive, gamma23 nonnegative");
    if (!(epsilon > 0) || !(epsilon < 1))
        throw ValidationError("Gains23: epsilon must lie in (0,1)");
    if (!(eta >= 0) || !(eta <= 1))
        throw ValidationError("Gains23: eta must lie in [0,1]");
    if (!(omega12_known != 0) || !std::isfinite(omega12_known))
        throw ValidationError("Gains23: omega12_known must be nonzero and finite");
}

double innovation(double y_meas, const qmat::RealSym3& rho_hat) {
    return y_meas - rho_hat.d1;
}

qmat::RealSym3 gain_tangent(const qmat::RealSym3& m, const qmat::RealSym3& rho) {
    return qmat::anticommutator(m, rho) - (2 * qmat::trace_prod(m, rho)) * rho;
}

ObserverDerivative obs12_rhs(const Observer12State& s, double y_meas,
                             const Gains12& g) {
    static const qmat::RealSkew3 s12 = qmat::sigma(1, 2);
    static const qmat::RealSym3 sz12 = qmat::sigma_z(1, 2);

    const double innov = innovation(y_meas, s.rho_hat);
    const qmat::RealSym3 bracket = qmat::commutator(s12, s.rho_hat);

    ObserverDerivative d;
    d.d_rho_hat = s.omega12_hat * bracket +
                  (g.epsilon * g.gamma_big * innov) * gain_tangent(sz12, s.rho_hat);
    d.d_omega_hat = g.epsilon * g.epsilon * g.gamma_small *
                    qmat::trace_prod(sz12, bracket) * innov;
    return d;
}

FrameOps frame_ops(double theta) {
    const qmat::Rotation12 u = qmat::rot12(theta);
    static const qmat::RealSkew3 s23 = qmat::sigma(2, 3);
    static const qmat::RealSym3 sz23 = qmat::sigma_z(2, 3);
    return FrameOps{u.conjugate(s23), u.conjugate(sz23)};
}

ObserverDerivative obs23_rhs(const Observer23State& s, double y_meas,
                             double theta, const Gains23& g) {
    static const qmat::RealSkew3 s12 = qmat::sigma(1, 2);
    static const qmat::RealSkew3 s23 = qmat::sigma(2, 3);

    const FrameOps ops = frame_ops(theta);
    const double innov = innovation(y_meas, s.rho_hat);
    const double demod = 1 - 2 * std::cos(2 * theta);
    const double u23 = g.eta * std::cos(theta);

    ObserverDerivative d;
    d.d_rho_hat = g.omega12_known * qmat::commutator(s12, s.rho_hat) +
                  (u23 * s.omega23_hat) * qmat::commutator(s23, s.rho_hat) +
                  (g.epsilon * g.eta * g.gamma_big * innov * demod) *
                      gain_tangent(ops.sigmaz23, s.rho_hat);
    d.d_omega_hat = g.epsilon * g.epsilon * g.eta * g.gamma_small * innov * demod *
                    qmat::trace_prod(ops.sigmaz23, qmat::commutator(ops.sigma23, s.rho_hat));
    return d;
}

}  // namespace qid::observers
