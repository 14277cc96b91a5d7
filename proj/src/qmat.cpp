#include "qid/qmat.hpp"

#include <cmath>
#include <cstdlib>

namespace qid::qmat {

namespace {

void check_level(int k) {
    if (k < 1 || k > 3) throw IndexOutOfRange("level index must be in 1..3");
}

void check_pair(int l, int k) {
    check_level(l);
    check_level(k);
    if (l == k) throw InvalidPair("sigma operators need two distinct levels");
}

RealSym3 sym_from_dense(const Dense3& m) {
    RealSym3 s;
    s.d1 = m[0];
    s.d2 = m[4];
    s.d3 = m[8];
    s.o12 = 0.5 * (m[1] + m[3]);
    s.o13 = 0.5 * (m[2] + m[6]);
    s.o23 = 0.5 * (m[5] + m[7]);
    return s;
}

RealSkew3 skew_from_dense(const Dense3& m) {
    RealSkew3 s;
    s.s12 = 0.5 * (m[1] - m[3]);
    s.s13 = 0.5 * (m[2] - m[6]);
    s.s23 = 0.5 * (m[5] - m[7]);
    return s;
}

Dense3 dense_commutator(const Dense3& a, const Dense3& b) {
    Dense3 ab = dense_mul(a, b);
    Dense3 ba = dense_mul(b, a);
    Dense3 c;
    for (int i = 0; i < 9; ++i) c[i] = ab[i] - ba[i];
    return c;
}

}  // namespace

Dense3 dense_mul(const Dense3& a, const Dense3& b) {
    Dense3 c{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            const double aik = a[3 * i + k];
            for (int j = 0; j < 3; ++j) c[3 * i + j] += aik * b[3 * k + j];
        }
    return c;
}

double RealSym3::operator()(int i, int j) const {
    if (i == j) return i == 0 ? d1 : (i == 1 ? d2 : d3);
    const int a = i < j ? i : j;
    const int b = i < j ? j : i;
    if (a == 0) return b == 1 ? o12 : o13;
    return o23;
}

Dense3 RealSym3::dense() const {
    return {d1, o12, o13, o12, d2, o23, o13, o23, d3};
}

double RealSym3::frobenius_norm() const {
    return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3 +
                     2 * (o12 * o12 + o13 * o13 + o23 * o23));
}

bool RealSym3::finite() const {
    return std::isfinite(d1) && std::isfinite(d2) && std::isfinite(d3) &&
           std::isfinite(o12) && std::isfinite(o13) && std::isfinite(o23);
}

RealSym3& RealSym3::operator+=(const RealSym3& r) {
    d1 += r.d1; d2 += r.d2; d3 += r.d3;
    o12 += r.o12; o13 += r.o13; o23 += r.o23;
    return *this;
}

RealSym3& RealSym3::operator-=(const RealSym3& r) {
    d1 -= r.d1; d2 -= r.d2; d3 -= r.d3;
    o12 -= r.o12; o13 -= r.o13; o23 -= r.o23;
    return *this;
}

RealSym3& RealSym3::operator*=(double s) {
    d1 *= s; d2 *= s; d3 *= s;
    o12 *= s; o13 *= s; o23 *= s;
    return *this;
}

double RealSkew3::operator()(int i, int j) const {
    if (i == j) return 0;
    double v;
    const int a = i < j ? i : j;
    const int b = i < j ? j : i;
    if (a == 0) v = b == 1 ? s12 : s13;
    else v = s23;
    return i < j ? v : -v;
}

Dense3 RealSkew3::dense() const {
    return {0, s12, s13, -s12, 0, s23, -s13, -s23, 0};
}

double RealSkew3::frobenius_norm() const {
    return std::sqrt(2 * (s12 * s12 + s13 * s13 + s23 * s23));
}

RealSkew3& RealSkew3::operator*=(double s) {
    s12 *= s; s13 *= s; s23 *= s;
    return *this;
}

RealSym3 identity_sym() {
    RealSym3 m;
    m.d1 = m.d2 = m.d3 = 1;
    return m;
}

RealSkew3 sigma(int l, int k) {
    check_pair(l, k);
    RealSkew3 m;
    // entry (l,k) = +1, (k,l) = -1
    const int i = l - 1, j = k - 1;
    const int a = i < j ? i : j;
    const int b = i < j ? j : i;
    const double v = i < j ? 1.0 : -1.0;
    if (a == 0 && b == 1) m.s12 = v;
    else if (a == 0 && b == 2) m.s13 = v;
    else m.s23 = v;
    return m;
}

RealSym3 sigma_x(int l, int k) {
    check_pair(l, k);
    RealSym3 m;
    const int a = std::min(l, k), b = std::max(l, k);
    if (a == 1 && b == 2) m.o12 = 1;
    else if (a == 1 && b == 3) m.o13 = 1;
    else m.o23 = 1;
    return m;
}

RealSym3 sigma_z(int l, int k) {
    check_pair(l, k);
    RealSym3 m;
    double* d[3] = {&m.d1, &m.d2, &m.d3};
    *d[l - 1] = 1;
    *d[k - 1] = -1;
    return m;
}

RealSym3 proj(int k) {
    check_level(k);
    RealSym3 m;
    if (k == 1) m.d1 = 1;
    else if (k == 2) m.d2 = 1;
    else m.d3 = 1;
    return m;
}

std::variant<RealSym3, RealSkew3> build_operator(OperatorKind kind, int l, int k) {
    switch (kind) {
        case OperatorKind::sigma: return sigma(l, k);
        case OperatorKind::sigma_x: return sigma_x(l, k);
        case OperatorKind::sigma_z: return sigma_z(l, k);
        case OperatorKind::proj: return proj(l);
    }
    throw InvalidPair("unknown operator kind");
}

RealSym3 commutator(const RealSkew3& a, const RealSym3& b) {
    return sym_from_dense(dense_commutator(a.dense(), b.dense()));
}

RealSym3 commutator(const RealSym3& a, const RealSkew3& b) {
    return sym_from_dense(dense_commutator(a.dense(), b.dense()));
}

RealSkew3 commutator(const RealSym3& a, const RealSym3& b) {
    return skew_from_dense(dense_commutator(a.dense(), b.dense()));
}

RealSkew3 commutator(const RealSkew3& a, const RealSkew3& b) {
    return skew_from_dense(dense_commutator(a.dense(), b.dense()));
}

RealSym3 anticommutator(const RealSym3& a, const RealSym3& b) {
    Dense3 ab = dense_mul(a.dense(), b.dense());
    Dense3 ba = dense_mul(b.dense(), a.dense());
    Dense3 c;
    for (int i = 0; i < 9; ++i) c[i] = ab[i] + ba[i];
    return sym_from_dense(c);
}

double trace_prod(const RealSym3& a, const RealSym3& b) {
    return a.d1 * b.d1 + a.d2 * b.d2 + a.d3 * b.d3 +
           2 * (a.o12 * b.o12 + a.o13 * b.o13 + a.o23 * b.o23);
}

PureState PureState::from_vector(const std::array<double, 3>& v) {
    const double n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if (!(n2 > 0) || !std::isfinite(n2))
        throw ValidationError("pure state vector must be nonzero and finite");
    const double inv = 1.0 / n2;
    PureState p;
    p.matrix.d1 = v[0] * v[0] * inv;
    p.matrix.d2 = v[1] * v[1] * inv;
    p.matrix.d3 = v[2] * v[2] * inv;
    p.matrix.o12 = v[0] * v[1] * inv;
    p.matrix.o13 = v[0] * v[2] * inv;
    p.matrix.o23 = v[1] * v[2] * inv;
    return p;
}

PureState PureState::from_matrix(const RealSym3& m) {
    if (!m.finite()) throw ValidationError("pure state entries must be finite");
    if (std::abs(m.trace() - 1.0) > kTraceTol)
        throw ValidationError("pure state must have unit trace");
    if (purity_defect(m) > kIdemTol)
        throw ValidationError("pure state must be idempotent");
    auto ev = sym_eigenvalues(m);
    if (ev[0] < -kTraceTol)
        throw ValidationError("pure state must be positive semidefinite");
    PureState p;
    p.matrix = m;
    return p;
}

double PureState::population(int k) const {
    check_level(k);
    return k == 1 ? matrix.d1 : (k == 2 ? matrix.d2 : matrix.d3);
}

double purity_defect(const RealSym3& m) {
    Dense3 d = m.dense();
    Dense3 sq = dense_mul(d, d);
    double acc = 0;
    for (int i = 0; i < 9; ++i) {
        const double e = sq[i] - d[i];
        acc += e * e;
    }
    return std::sqrt(acc);
}

Dense3 Rotation12::dense() const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c, s, 0, -s, c, 0, 0, 0, 1};
}

RealSym3 Rotation12::conjugate(const RealSym3& m) const {
    const double c = std::cos(theta), s = std::sin(theta);
    Dense3 u = {c, s, 0, -s, c, 0, 0, 0, 1};
    Dense3 ut = {c, -s, 0, s, c, 0, 0, 0, 1};
    return sym_from_dense(dense_mul(dense_mul(u, m.dense()), ut));
}

RealSkew3 Rotation12::conjugate(const RealSkew3& m) const {
    const double c = std::cos(theta), s = std::sin(theta);
    Dense3 u = {c, s, 0, -s, c, 0, 0, 0, 1};
    Dense3 ut = {c, -s, 0, s, c, 0, 0, 0, 1};
    return skew_from_dense(dense_mul(dense_mul(u, m.dense()), ut));
}

Rotation12 rot12(double theta) {
    if (!std::isfinite(theta)) throw ValidationError("rotation angle must be finite");
    return Rotation12{theta};
}

std::array<double, 3> sym_eigenvalues(const RealSym3& m) {
    // Cyclic Jacobi on the dense matrix; converges in a handful of sweeps
    // at this size.
    Dense3 a = m.dense();
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = std::abs(a[1]) + std::abs(a[2]) + std::abs(a[5]);
        if (off < 1e-15) break;
        static const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (auto& pq : pairs) {
            const int p = pq[0], q = pq[1];
            const double apq = a[3 * p + q];
            if (apq == 0) continue;
            const double app = a[3 * p + p], aqq = a[3 * q + q];
            const double tau = (aqq - app) / (2 * apq);
            const double t = (tau >= 0 ? 1.0 : -1.0) /
                             (std::abs(tau) + std::sqrt(1 + tau * tau));
            const double c = 1.0 / std::sqrt(1 + t * t);
            const double s = t * c;
            // Apply G^T A G for the (p,q) Givens rotation.
            Dense3 b = a;
            for (int k = 0; k < 3; ++k) {
                b[3 * k + p] = c * a[3 * k + p] - s * a[3 * k + q];
                b[3 * k + q] = s * a[3 * k + p] + c * a[3 * k + q];
            }
            a = b;
            Dense3 d = a;
            for (int k = 0; k < 3; ++k) {
                d[3 * p + k] = c * a[3 * p + k] - s * a[3 * q + k];
                d[3 * q + k] = s * a[3 * p + k] + c * a[3 * q + k];
            }
            a = d;
        }
    }
    std::array<double, 3> ev = {a[0], a[4], a[8]};
    if (ev[0] > ev[1]) std::swap(ev[0], ev[1]);
    if (ev[1] > ev[2]) std::swap(ev[1], ev[2]);
    if (ev[0] > ev[1]) std::swap(ev[0], ev[1]);
    return ev;
}

PureState nearest_projector(const RealSym3& m) {
    if (!m.finite()) throw NonFiniteState("nearest_projector: non-finite input");
    auto ev = sym_eigenvalues(m);
    if (ev[2] - ev[1] <= kTolDegenerate)
        throw DegenerateState("nearest_projector: top eigenvalues too close");
    // Dominant eigenvector by inverse-free deflation: (A - l2 I)(A - l1 I)
    // applied to a generic vector lies in the dominant eigenspace.
    Dense3 a = m.dense();
    Dense3 a1 = a, a2 = a;
    for (int i = 0; i < 3; ++i) {
        a1[4 * i] -= ev[0];
        a2[4 * i] -= ev[1];
    }
    Dense3 pdom = dense_mul(a2, a1);
    std::array<double, 3> v{};
    double best = -1;
    for (int col = 0; col < 3; ++col) {
        std::array<double, 3> w = {pdom[col], pdom[3 + col], pdom[6 + col]};
        const double n2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        if (n2 > best) {
            best = n2;
            v = w;
        }
    }
    if (!(best > 0)) throw DegenerateState("nearest_projector: null dominant space");
    return PureState::from_vector(v);
}

}  // namespace qid::qmat
