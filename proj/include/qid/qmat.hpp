#pragma once

// Exact 3x3 real operator algebra for the interaction-frame model: the
// generators sigma^{lk}, sigma_x^{lk}, sigma_z^{lk}, the level projectors
// P_k, the closed-form rotation exp(theta*sigma^{12}), and repair of
// nearly-pure density matrices back onto the projector manifold.

#include <array>
#include <variant>

#include "qid/errors.hpp"

namespace qid::qmat {

// Dense row-major 3x3, used only transiently inside products.
using Dense3 = std::array<double, 9>;

Dense3 dense_mul(const Dense3& a, const Dense3& b);

// 3x3 real symmetric matrix stored as its upper triangle.
struct RealSym3 {
    double d1 = 0, d2 = 0, d3 = 0;    // diagonal
    double o12 = 0, o13 = 0, o23 = 0; // off-diagonal

    double operator()(int i, int j) const;
    Dense3 dense() const;
    double trace() const { return d1 + d2 + d3; }
    double frobenius_norm() const;
    bool finite() const;

    RealSym3& operator+=(const RealSym3& r);
    RealSym3& operator-=(const RealSym3& r);
    RealSym3& operator*=(double s);

    friend RealSym3 operator+(RealSym3 a, const RealSym3& b) { return a += b; }
    friend RealSym3 operator-(RealSym3 a, const RealSym3& b) { return a -= b; }
    friend RealSym3 operator*(double s, RealSym3 a) { return a *= s; }
    friend RealSym3 operator*(RealSym3 a, double s) { return a *= s; }
};

// 3x3 real antisymmetric matrix stored as its strict upper triangle.
struct RealSkew3 {
    double s12 = 0, s13 = 0, s23 = 0; // entries (1,2), (1,3), (2,3)

    double operator()(int i, int j) const;
    Dense3 dense() const;
    double frobenius_norm() const;

    RealSkew3& operator*=(double s);
    friend RealSkew3 operator*(double s, RealSkew3 a) { return a *= s; }
};

RealSym3 identity_sym();

// Operator constructors; indices are physical levels 1..3.
RealSkew3 sigma(int l, int k);    // |l><k| - |k><l|
RealSym3 sigma_x(int l, int k);   // |l><k| + |k><l|
RealSym3 sigma_z(int l, int k);   // |l><l| - |k><k|
RealSym3 proj(int k);             // |k><k|

enum class OperatorKind { sigma, sigma_x, sigma_z, proj };

std::variant<RealSym3, RealSkew3> build_operator(OperatorKind kind, int l, int k = 0);

// Commutators. The symmetry class of the result is fixed by the classes of
// the arguments (skew x sym -> sym, sym x sym -> skew).
RealSym3 commutator(const RealSkew3& a, const RealSym3& b);
RealSym3 commutator(const RealSym3& a, const RealSkew3& b);
RealSkew3 commutator(const RealSym3& a, const RealSym3& b);
RealSkew3 commutator(const RealSkew3& a, const RealSkew3& b);

// ab + ba, symmetric for symmetric arguments.
RealSym3 anticommutator(const RealSym3& a, const RealSym3& b);

double trace_prod(const RealSym3& a, const RealSym3& b); // Tr(ab)

// Rank-1 trace-1 symmetric matrix (point of RP^2).
struct PureState {
    RealSym3 matrix;

    static constexpr double kTraceTol = 1e-9;
    static constexpr double kIdemTol = 1e-8;

    static PureState from_vector(const std::array<double, 3>& v);
    static PureState from_matrix(const RealSym3& m); // validates invariants

    double population(int k) const; // Tr(P_k rho)
};

// Frobenius norm of m^2 - m.
double purity_defect(const RealSym3& m);

// U(theta) = exp(theta*sigma^{12}) = P3 + cos(theta)(P1+P2) + sin(theta)sigma^{12}.
struct Rotation12 {
    double theta = 0;

    Dense3 dense() const;
    RealSym3 conjugate(const RealSym3& m) const;   // U m U^T
    RealSkew3 conjugate(const RealSkew3& m) const; // U m U^T
};

Rotation12 rot12(double theta);

inline constexpr double kTolDegenerate = 1e-6;

// Projects a nearly rank-1 symmetric matrix onto the closest projector
// (vv^T with v the unit dominant eigenvector). Throws DegenerateState when
// the two largest eigenvalues are within kTolDegenerate.
PureState nearest_projector(const RealSym3& m);

// Ascending eigenvalues of a symmetric 3x3 via cyclic Jacobi sweeps.
std::array<double, 3> sym_eigenvalues(const RealSym3& m);

}  // namespace qid::qmat
