#pragma once

// The two invariant nonlinear observers: (rho_hat, Omega12_hat) driven by the
// measured ground population during phase 1, and (rho_hat, Omega23_hat) with
// the rotating-frame operators Sigma^{23}, Sigma_z^{23} during phase 2. Both
// correction terms are tangent to the projector manifold, so a pure estimate
// stays pure under the continuous flow.

#include "qid/qmat.hpp"

namespace qid::observers {

struct Gains12 {
    double gamma_big = 4.0;   // Gamma12
    double gamma_small = 1.0; // gamma12
    double epsilon = 1.0 / 3.0;

    void validate() const;
};

struct Gains23 {
    double gamma_big = 4.0;   // Gamma23
    double gamma_small = 1.0; // gamma23
    double epsilon = 1.0 / 3.0;
    double eta = 1.0 / 3.0;
    double omega12_known = 1.0; // phase-1 estimate, used in drift and theta

    void validate() const;
};

struct Observer12State {
    qmat::RealSym3 rho_hat;
    double omega12_hat = 0;
};

struct Observer23State {
    qmat::RealSym3 rho_hat;
    double omega23_hat = 0;
};

struct ObserverDerivative {
    qmat::RealSym3 d_rho_hat;
    double d_omega_hat = 0;
};

double innovation(double y_meas, const qmat::RealSym3& rho_hat);

// M rho + rho M - 2 Tr(M rho) rho; tangent to the projector manifold at pure rho.
qmat::RealSym3 gain_tangent(const qmat::RealSym3& m, const qmat::RealSym3& rho);

ObserverDerivative obs12_rhs(const Observer12State& s, double y_meas,
                             const Gains12& g);

struct FrameOps {
    qmat::RealSkew3 sigma23;  // Sigma^{23} = U sigma^{23} U^T
    qmat::RealSym3 sigmaz23;  // Sigma_z^{23} = U sigma_z^{23} U^T
};

FrameOps frame_ops(double theta);

ObserverDerivative obs23_rhs(const Observer23State& s, double y_meas,
                             double theta, const Gains23& g);

}  // namespace qid::observers
