#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "qid/observers.hpp"
#include "qid/plant.hpp"

using namespace qid;
using namespace qid::observers;

namespace {

qmat::RealSym3 half_mix_x12() {
    // (P1 + P2 + sigma_x12)/2, a pure state in the 1-2 plane
    return 0.5 * (qmat::proj(1) + qmat::proj(2) + qmat::sigma_x(1, 2));
}

}  // namespace

TEST_CASE("innovation") {
    CHECK(innovation(1.0, qmat::proj(1)) == 0);
    CHECK(innovation(1.0, qmat::proj(2)) == 1);
    CHECK(innovation(0.75, half_mix_x12()) == doctest::Approx(0.25));
}

TEST_CASE("gain validation") {
    Gains12 g12;
    g12.epsilon = -1;
    CHECK_THROWS_AS(g12.validate(), ValidationError);
    Gains23 g23;
    g23.eta = 1.5;
    CHECK_THROWS_AS(g23.validate(), ValidationError);
}

TEST_CASE("obs12_rhs") {
    Gains12 g{4.0, 1.0, 1.0 / 3.0};

    SUBCASE("truth is an equilibrium of the error system") {
        std::mt19937_64 rng(8);
        const plant::PlantParams p(1.0, 0.8);
        for (int it = 0; it < 20; ++it) {
            const qmat::RealSym3 rho = oracle::random_pure(rng).matrix;
            const double y = plant::output(rho);
            const ObserverDerivative d = obs12_rhs({rho, p.omega12}, y, g);
            CHECK(d.d_omega_hat == doctest::Approx(0).epsilon(1e-14));
            const qmat::RealSym3 plant_d = plant::plant_rhs(rho, 1.0, 0.0, p);
            CHECK((d.d_rho_hat - plant_d).frobenius_norm() < 1e-12);
        }
    }

    SUBCASE("parameter update on the in-plane state") {
        // Tr(sigma_z[sigma, rho_hat]) = 2 Tr(sigma_x rho_hat) = 2 here,
        // innovation = 1 - 1/2, so d_omega = (1/9)*1*2*(1/2) = 1/9.
        const ObserverDerivative d = obs12_rhs({half_mix_x12(), 0.9}, 1.0, g);
        CHECK(d.d_omega_hat == doctest::Approx(1.0 / 9.0).epsilon(1e-13));
    }

    SUBCASE("gain term is tangent to the projector manifold") {
        std::mt19937_64 rng(21);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int it = 0; it < 50; ++it) {
            const qmat::RealSym3 rho_hat = oracle::random_pure(rng).matrix;
            const ObserverDerivative d = obs12_rhs({rho_hat, u(rng)}, u(rng), g);
            CHECK(std::abs(d.d_rho_hat.trace()) < 1e-13);
            // d/dt Tr(rho^2) = 2 Tr(rho drho) = 0 at a pure point
            CHECK(std::abs(qmat::trace_prod(rho_hat, d.d_rho_hat)) < 1e-12);
            // first-order purity preservation by finite differences
            const double h = 1e-6;
            const qmat::RealSym3 moved = rho_hat + h * d.d_rho_hat;
            CHECK(qmat::purity_defect(moved) / h < 1e-5);
        }
    }

    SUBCASE("trace identities behind the averaging computation") {
        std::mt19937_64 rng(33);
        const qmat::RealSkew3 s12 = qmat::sigma(1, 2);
        const qmat::RealSym3 sx = qmat::sigma_x(1, 2);
        const qmat::RealSym3 sz = qmat::sigma_z(1, 2);
        for (int it = 0; it < 1000; ++it) {
            const qmat::RealSym3 rho = oracle::random_pure(rng).matrix;
            const qmat::RealSym3 br = qmat::commutator(s12, rho);
            CHECK(std::abs(qmat::trace_prod(sz, br) - 2 * qmat::trace_prod(sx, rho)) <
                  1e-12);
            CHECK(std::abs(qmat::trace_prod(sx, br) + 2 * qmat::trace_prod(sz, rho)) <
                  1e-12);
        }
    }
}

TEST_CASE("frame_ops") {
    SUBCASE("theta = 0 returns the bare operators") {
        const FrameOps ops = frame_ops(0);
        CHECK((ops.sigmaz23 - qmat::sigma_z(2, 3)).frobenius_norm() < 1e-15);
        CHECK(ops.sigma23.s23 == doctest::Approx(1));
        CHECK(ops.sigma23.s12 == doctest::Approx(0));
    }

    SUBCASE("closed form U sigma23 U^T = cos(theta) sigma23 + sin(theta) sigma13") {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> u(-6, 6);
        for (int it = 0; it < 40; ++it) {
            const double theta = it == 0 ? M_PI / 2 : u(rng);
            const FrameOps ops = frame_ops(theta);
            const double c = std::cos(theta), s = std::sin(theta);
            CHECK(ops.sigma23.s23 == doctest::Approx(c).epsilon(1e-12));
            CHECK(ops.sigma23.s13 == doctest::Approx(s).epsilon(1e-12));
            CHECK(ops.sigma23.s12 == doctest::Approx(0).epsilon(1e-12));
            CHECK(std::abs(ops.sigmaz23.trace()) < 1e-12);

            // dense conjugation oracle
            oracle::M3 um = {{{c, s, 0}, {-s, c, 0}, {0, 0, 1}}};
            oracle::M3 ut = {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
            const oracle::M3 expected =
                oracle::mul(oracle::mul(um, oracle::from_sym(qmat::sigma_z(2, 3))), ut);
            CHECK(oracle::max_abs_diff(oracle::from_sym(ops.sigmaz23), expected) <
                  1e-14);
        }
    }
}

TEST_CASE("obs23_rhs") {
    Gains23 g{4.0, 1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0};

    SUBCASE("zero innovation freezes the estimate") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-6, 6);
        for (int it = 0; it < 20; ++it) {
            const qmat::RealSym3 rho_hat = oracle::random_pure(rng).matrix;
            const double theta = u(rng);
            const double y = rho_hat.d1;
            const ObserverDerivative d = obs23_rhs({rho_hat, 0.8}, y, theta, g);
            CHECK(d.d_omega_hat == doctest::Approx(0).epsilon(1e-14));
        }
    }

    SUBCASE("drift sign at rho_hat = P2, theta = 0") {
        const ObserverDerivative d = obs23_rhs({qmat::proj(2), 0.8}, 0.0, 0.0, g);
        CHECK(d.d_omega_hat == 0); // innovation Tr(P1 P2) = 0
        // d_rho_hat = Omega12 [sigma12, P2] + eta*0.8 [sigma23, P2]
        const oracle::M3 expected = oracle::comm(oracle::from_skew(qmat::sigma(1, 2)),
                                                 oracle::from_sym(qmat::proj(2)));
        CHECK(d.d_rho_hat.o12 == doctest::Approx(g.omega12_known * expected[0][1]));
        CHECK(d.d_rho_hat.o12 == doctest::Approx(1.0)); // +sigma_x12 component
        CHECK(d.d_rho_hat.o23 == doctest::Approx(-g.eta * 0.8));
    }

    SUBCASE("demodulation factor vanishes the gain at theta = pi/4 only via cos(2theta)") {
        // at theta = pi/4 the factor (1 - 2cos 2theta) equals exactly 1
        std::mt19937_64 rng(2);
        const qmat::RealSym3 rho_hat = oracle::random_pure(rng).matrix;
        const double y = 0.9;
        const ObserverDerivative d = obs23_rhs({rho_hat, 0.8}, y, M_PI / 4, g);
        const FrameOps ops = frame_ops(M_PI / 4);
        const double innov = innovation(y, rho_hat);
        const double expected =
            g.epsilon * g.epsilon * g.eta * g.gamma_small * innov *
            qmat::trace_prod(ops.sigmaz23, qmat::commutator(ops.sigma23, rho_hat));
        CHECK(d.d_omega_hat == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("gain tangency holds for the rotating-frame correction") {
        std::mt19937_64 rng(14);
        std::uniform_real_distribution<double> u(-6, 6);
        for (int it = 0; it < 50; ++it) {
            const qmat::RealSym3 rho_hat = oracle::random_pure(rng).matrix;
            const ObserverDerivative d = obs23_rhs({rho_hat, 0.8}, 0.3, u(rng), g);
            CHECK(std::abs(d.d_rho_hat.trace()) < 1e-12);
            CHECK(std::abs(qmat::trace_prod(rho_hat, d.d_rho_hat)) < 1e-12);
        }
    }
}
