#ifndef ELASTODN_BOUNDARY_SYMBOL_HPP
#define ELASTODN_BOUNDARY_SYMBOL_HPP

// Elastic symbol at a boundary point, its spectral factorization
//
//     M(q) = D q^2 + (R + R^T) q + Q + rho I = (q - S0^*) D (q - S0),
//     spectrum of S0 in the open upper half plane,
//
// and the surface impedance tensor Z = -i (D S0 + R^T).

#include "errors.hpp"
#include "tensor_core.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace elastodn {

using Impedance = CMat3;

class DirectionPair {
public:
    /// n: unit outward normal; m: nonzero tangential covector (m . n = 0).
    DirectionPair(const Vec3 &n, const Vec3 &m) : m_n(n), m_m(m) {
        if (std::abs(n.norm() - 1.0) > 1e-12)
            throw Error(ErrorKind::InvalidDirection, "normal must have unit length");
        if (!(m.norm() > 0.0)) throw Error(ErrorKind::InvalidDirection, "tangent covector must be nonzero");
        if (std::abs(m.dot(n)) > 1e-12 * m.norm())
            throw Error(ErrorKind::InvalidDirection, "tangent covector is not orthogonal to the normal");
    }

    const Vec3 &n() const { return m_n; }
    const Vec3 &m() const { return m_m; }

private:
    Vec3 m_n;
    Vec3 m_m;
};

struct SymbolTriple {
    Mat3 d = Mat3::Zero();
    Mat3 r = Mat3::Zero();
    Mat3 q = Mat3::Zero();
};

struct Factorization {
    CMat3 s0 = CMat3::Zero();
    std::array<Complex, 6> roots{};
    double residual = 0.0;
    double conditioning = 1.0; ///< condition number of the subspace basis used for S0
};

struct Contour {
    Complex center;
    double radius = 1.0;
};

// ---------------------------------------------------------------------------
// Symbol assembly

inline SymbolTriple build_symbol(const StiffnessTensor &c, const DirectionPair &dir) {
    const Vec3 &n = dir.n();
    const Vec3 &m = dir.m();
    SymbolTriple st;
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            double d = 0, r = 0, q = 0;
            for (int j = 0; j < 3; ++j)
                for (int l = 0; l < 3; ++l) {
                    const double cijkl = c(i, j, k, l);
                    d += cijkl * n(j) * n(l);
                    r += cijkl * m(j) * n(l);
                    q += cijkl * m(j) * m(l);
                }
            st.d(i, k) = d;
            st.r(i, k) = r;
            st.q(i, k) = q;
        }
    return st;
}

inline CMat3 full_symbol(const SymbolTriple &st, double rho, Complex q3) {
    const Mat3 k1 = st.r + st.r.transpose();
    const Mat3 k0 = st.q + rho * Mat3::Identity();
    return q3 * q3 * st.d.cast<Complex>() + q3 * k1.cast<Complex>() + k0.cast<Complex>();
}

namespace detail {

inline Mat3 spd_power(const Mat3 &a, double power) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(a);
    if (es.eigenvalues()(0) <= 0.0)
        throw Error(ErrorKind::ConvexityViolation, "normal block D is not positive definite");
    const Vec3 p = es.eigenvalues().array().pow(power);
    return es.eigenvectors() * p.asDiagonal() * es.eigenvectors().transpose();
}

using CMat6 = Eigen::Matrix<Complex, 6, 6>;

/// Companion form of the monic pencil D^{-1/2} M(q) D^{-1/2}.
inline CMat6 companion(const SymbolTriple &st, double rho, const Mat3 &d_inv_half) {
    const Mat3 k1 = d_inv_half * (st.r + st.r.transpose()) * d_inv_half;
    const Mat3 k0 = d_inv_half * (st.q + rho * Mat3::Identity()) * d_inv_half;
    Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
    a.topRightCorner<3, 3>().setIdentity();
    a.bottomLeftCorner<3, 3>() = -k0;
    a.bottomRightCorner<3, 3>() = -k1;
    return a.cast<Complex>();
}

/// Swap adjacent diagonal entries k, k+1 of an upper-triangular T by a
/// unitary rotation, updating the Schur vectors U accordingly.
inline void swap_schur(CMat6 &t, CMat6 &u, int k) {
    const Complex a = t(k, k), b = t(k + 1, k + 1), off = t(k, k + 1);
    Eigen::Vector2cd x(off, b - a);
    const double nx = x.norm();
    if (nx == 0.0) return; // equal eigenvalues, nothing to swap
    x /= nx;
    Eigen::Matrix2cd q;
    q.col(0) = x;
    q.col(1) = Eigen::Vector2cd(-std::conj(x(1)), std::conj(x(0)));
    CMat6 w = CMat6::Identity();
    w.block<2, 2>(k, k) = q;
    t = w.adjoint() * t * w;
    u = u * w;
    t(k + 1, k) = 0.0;
}

struct OrderedSchur {
    CMat6 t;
    CMat6 u;
    std::array<Complex, 6> eig{};
};

/// Complex Schur form with the upper-half-plane eigenvalues moved to the
/// leading diagonal positions.
inline OrderedSchur ordered_schur(const CMat6 &a) {
    Eigen::ComplexSchur<CMat6> schur(a);
    OrderedSchur s{schur.matrixT(), schur.matrixU(), {}};
    for (int pass = 0; pass < 6; ++pass)
        for (int k = 0; k + 1 < 6; ++k)
            if (s.t(k, k).imag() <= 0.0 && s.t(k + 1, k + 1).imag() > 0.0) swap_schur(s.t, s.u, k);
    for (int k = 0; k < 6; ++k) s.eig[k] = s.t(k, k);
    return s;
}

inline bool upper_first(Complex a, Complex b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
}

inline std::array<Complex, 6> sort_roots(const std::array<Complex, 6> &raw) {
    double scale = 0.0;
    for (const auto &z : raw) scale = std::max(scale, std::abs(z));
    std::vector<Complex> upper, lower;
    for (const auto &z : raw) {
        if (std::abs(z.imag()) <= 1e-10 * std::max(scale, 1e-300))
            throw Error(ErrorKind::RealRootDetected, "symbol determinant has a real root");
        (z.imag() > 0 ? upper : lower).push_back(z);
    }
    if (upper.size() != 3)
        throw Error(ErrorKind::RealRootDetected, "expected three roots in each half plane");
    std::sort(upper.begin(), upper.end(), upper_first);

    std::array<Complex, 6> out{};
    std::vector<bool> used(3, false);
    for (int j = 0; j < 3; ++j) {
        out[j] = upper[j];
        int best = -1;
        double best_gap = 0.0;
        for (int k = 0; k < 3; ++k) {
            if (used[k]) continue;
            const double gap = std::abs(lower[k] - std::conj(upper[j]));
            if (best < 0 || gap < best_gap) best = k, best_gap = gap;
        }
        if (best_gap > 1e-6 * std::max(scale, 1.0))
            throw Error(ErrorKind::RealRootDetected, "roots do not occur in conjugate pairs");
        used[best] = true;
        out[3 + j] = lower[best];
    }
    return out;
}

inline double root_scale(const std::array<Complex, 6> &roots) {
    double s = 0.0;
    for (const auto &z : roots) s = std::max(s, std::abs(z));
    return s;
}

} // namespace detail

/// Six roots of det M(q3) = 0: three in the upper half plane sorted by
/// (Im, Re), followed by their conjugate partners.
inline std::array<Complex, 6> symbol_roots(const SymbolTriple &st, double rho) {
    const Mat3 d_inv_half = detail::spd_power(st.d, -0.5);
    Eigen::ComplexEigenSolver<detail::CMat6> es(detail::companion(st, rho, d_inv_half), false);
    std::array<Complex, 6> raw{};
    for (int k = 0; k < 6; ++k) raw[k] = es.eigenvalues()(k);
    return detail::sort_roots(raw);
}

/// max_k ||M(q_k) - (q_k - S0^*) D (q_k - S0)||_F / ||M(q_k)||_F over five
/// fixed pseudo-random real q_k scaled to the root magnitude.
inline double factorization_residual(const SymbolTriple &st, double rho, const CMat3 &s0, double scale = 1.0) {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const CMat3 d = st.d.cast<Complex>();
    const CMat3 id = CMat3::Identity();
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double q = scale * normal(rng);
        const CMat3 m = full_symbol(st, rho, q);
        const CMat3 f = (q * id - s0.adjoint()) * d * (q * id - s0);
        worst = std::max(worst, (m - f).norm() / m.norm());
    }
    return worst;
}

/// Solvent from the invariant subspace of the companion pencil belonging to
/// the three upper-half-plane roots: S0 = D^{-1/2} X2 X1^{-1} D^{1/2}.
inline Factorization factor_eigen(const SymbolTriple &st, double rho) {
    const Mat3 d_half = detail::spd_power(st.d, 0.5);
    const Mat3 d_inv_half = detail::spd_power(st.d, -0.5);
    const auto schur = detail::ordered_schur(detail::companion(st, rho, d_inv_half));

    Factorization f;
    f.roots = detail::sort_roots(schur.eig);
    for (int k = 0; k < 3; ++k)
        if (schur.eig[k].imag() <= 0.0)
            throw Error(ErrorKind::DefectiveSolvent, "failed to isolate the upper-half-plane subspace");

    const CMat3 x1 = schur.u.topLeftCorner<3, 3>();
    const CMat3 x2 = schur.u.bottomLeftCorner<3, 3>();
    Eigen::JacobiSVD<CMat3> svd(x1);
    const auto &sv = svd.singularValues();
    f.conditioning = sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
    if (!(f.conditioning <= 1e10))
        throw Error(ErrorKind::DefectiveSolvent, "upper-root eigenvectors are numerically dependent");

    const CMat3 s_check = x2 * x1.inverse();
    f.s0 = d_inv_half.cast<Complex>() * s_check * d_half.cast<Complex>();
    f.residual = factorization_residual(st, rho, f.s0, detail::root_scale(f.roots));
    return f;
}

/// Circle enclosing the three upper roots and excluding their conjugates,
/// centred at the mean real part with the height chosen to maximise the
/// ratio of exclusion to inclusion radius.
inline Contour choose_contour(const std::array<Complex, 6> &roots) {
    double re = 0.0, im_max = 0.0;
    for (int j = 0; j < 3; ++j) {
        re += roots[j].real() / 3.0;
        im_max = std::max(im_max, roots[j].imag());
    }
    double best_ratio = 0.0;
    Contour best{Complex(re, im_max), 0.0};
    constexpr int kSteps = 400;
    for (int s = 1; s <= kSteps; ++s) {
        const Complex c(re, 4.0 * im_max * s / kSteps);
        double r_in = 0.0, r_out = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 3; ++j) r_in = std::max(r_in, std::abs(roots[j] - c));
        for (int j = 3; j < 6; ++j) r_out = std::min(r_out, std::abs(roots[j] - c));
        if (r_out / r_in > best_ratio) {
            best_ratio = r_out / r_in;
            best = {c, std::sqrt(r_in * r_out)};
        }
    }
    return best;
}

/// S0 from trapezoidal quadrature of the contour integrals
/// (oint zeta Mc^{-1}) (oint Mc^{-1})^{-1}, Mc = D^{-1/2} M D^{-1/2}.
inline Factorization factor_contour(const SymbolTriple &st, double rho, int nodes = 256,
                                    std::optional<Contour> contour = std::nullopt) {
    if (nodes < 16) throw Error(ErrorKind::InvalidArgument, "contour quadrature needs at least 16 nodes");
    Factorization f;
    f.roots = symbol_roots(st, rho);
    const Contour g = contour ? *contour : choose_contour(f.roots);
    for (int j = 0; j < 6; ++j) {
        const double dist = std::abs(f.roots[j] - g.center);
        if (std::abs(dist - g.radius) < 1e-6 * g.radius)
            throw Error(ErrorKind::ContourTooClose, "contour passes too close to a root");
        if ((j < 3) != (dist < g.radius))
            throw Error(ErrorKind::ContourTooClose, "contour does not separate the upper roots");
    }

    const Mat3 d_half = detail::spd_power(st.d, 0.5);
    const Mat3 d_inv_half = detail::spd_power(st.d, -0.5);
    SymbolTriple scaled{Mat3::Identity(), d_inv_half * st.r * d_inv_half, d_inv_half * st.q * d_inv_half};
    const Mat3 rho_block = rho * d_inv_half * d_inv_half;

    CMat3 i0 = CMat3::Zero(), i1 = CMat3::Zero();
    for (int k = 0; k < nodes; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / nodes;
        const Complex e = std::polar(1.0, theta);
        const Complex zeta = g.center + g.radius * e;
        const CMat3 mc = full_symbol(scaled, 0.0, zeta) + rho_block.cast<Complex>();
        const CMat3 inv = mc.inverse() * (Complex(0.0, 1.0) * g.radius * e);
        i0 += inv;
        i1 += zeta * inv;
    }
    Eigen::FullPivLU<CMat3> lu(i0);
    if (!lu.isInvertible()) throw Error(ErrorKind::DefectiveSolvent, "contour moment is singular");
    const CMat3 s_check = i1 * lu.inverse();
    f.s0 = d_inv_half.cast<Complex>() * s_check * d_half.cast<Complex>();
    f.residual = factorization_residual(st, rho, f.s0, detail::root_scale(f.roots));
    f.conditioning = i0.norm() * lu.inverse().norm();
    return f;
}

// ---------------------------------------------------------------------------
// Impedance

inline Impedance impedance_from_solvent(const SymbolTriple &st, const CMat3 &s0) {
    return Complex(0.0, -1.0) * (st.d.cast<Complex>() * s0 + st.r.transpose().cast<Complex>());
}

inline Impedance impedance(const SymbolTriple &st, double rho) {
    return impedance_from_solvent(st, factor_eigen(st, rho).s0);
}

inline Impedance impedance(const StiffnessTensor &c, double rho, const DirectionPair &dir) {
    return impedance(build_symbol(c, dir), rho);
}

/// ||Z - Z^*|| / ||Z||.
inline double hermiticity_defect(const Impedance &z) {
    const double n = z.norm();
    return n > 0.0 ? (z - z.adjoint()).norm() / n : 0.0;
}

inline bool real_part_positive_definite(const Impedance &z) {
    const Mat3 re = 0.5 * (z.real() + z.real().transpose());
    return Eigen::SelfAdjointEigenSolver<Mat3>(re, Eigen::EigenvaluesOnly).eigenvalues()(0) > 0.0;
}

/// Directional derivative of Z when (D, R, Q, rho) move along (dst, drho).
/// The variation of S0 solves the Sylvester equation obtained by
/// differentiating D S0^2 + (R + R^T) S0 + Q + rho = 0.
inline Impedance impedance_derivative(const SymbolTriple &st, double rho, const SymbolTriple &dst, double drho) {
    const CMat3 s0 = factor_eigen(st, rho).s0;
    const CMat3 d = st.d.cast<Complex>();
    const CMat3 k1 = (st.r + st.r.transpose()).cast<Complex>();
    const CMat3 dd = dst.d.cast<Complex>();
    const CMat3 dk1 = (dst.r + dst.r.transpose()).cast<Complex>();
    const CMat3 dk0 = (dst.q + drho * Mat3::Identity()).cast<Complex>();

    const CMat3 a = d * s0 + k1;
    const CMat3 rhs = -(dd * s0 * s0 + dk1 * s0 + dk0);
    Eigen::Matrix<Complex, 9, 9> op = Eigen::Matrix<Complex, 9, 9>::Zero();
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
            op.block<3, 3>(3 * q, 3 * p) += d * s0(p, q); // (S0^T kron D)
            if (p == q) op.block<3, 3>(3 * q, 3 * p) += a;
        }
    Eigen::Matrix<Complex, 9, 1> b = Eigen::Map<const Eigen::Matrix<Complex, 9, 1>>(rhs.data());
    Eigen::Matrix<Complex, 9, 1> x = op.fullPivLu().solve(b);
    const CMat3 ds = Eigen::Map<const CMat3>(x.data());
    return Complex(0.0, -1.0) * (dd * s0 + d * ds + dst.r.transpose().cast<Complex>());
}

// ---------------------------------------------------------------------------
// Closed forms for VTI and orthorhombic media, normal e3

/// Rotation taking the (e2, e3)-block frame to a general tangential m.
inline Mat3 block_diagonalizer(const Vec2 &m) {
    const double norm = m.norm();
    if (!(norm > 0.0)) throw Error(ErrorKind::ZeroTangent, "block diagonalizer needs a nonzero tangent");
    const double c = m(1) / norm, s = m(0) / norm;
    Mat3 p;
    p << c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0;
    return p;
}

namespace detail {

/// Impedance of the coupled (tangential, normal) 2x2 block with normal
/// modulus `cn`, shear modulus `cs`, in-plane modulus `cp` and coupling
/// modulus `cc`: the moduli play the roles of C3333, C1313, C1111, C1133.
struct CoupledBlock {
    Complex tt, tn, nt, nn; // Z entries (tangential, normal) ordering
};

inline CoupledBlock coupled_block(double cp, double cn, double cs, double cc, double rho, double mnorm) {
    const double m2 = mnorm * mnorm;
    const double gamma = std::sqrt((cp * m2 + rho) * cn / ((cs * m2 + rho) * cs));
    const double root = std::sqrt(cs * cn);
    const double alpha1 = (cc + cs) * mnorm / ((1.0 + gamma) * root);
    const double alpha2 = gamma * alpha1;
    const double disc = (cs * m2 + rho) / cn - (cc + cs) * (cc + cs) * m2 / ((1.0 + gamma) * (1.0 + gamma) * cs * cn);
    if (!(disc > 0.0)) throw Error(ErrorKind::NegativeDiscriminant, "closed-form impedance discriminant is not positive");
    const double c = std::sqrt(disc);
    const double b = gamma * c;
    const Complex i(0.0, 1.0);
    return {cs * b, i * (root * alpha1 - cs * mnorm), i * (root * alpha2 - cc * mnorm), cn * c};
}

} // namespace detail

/// Z at m = |m| e2 (the block-diagonal frame).
inline Impedance vti_impedance_closed(const VtiParams &p, double mnorm) {
    if (!(mnorm > 0.0)) throw Error(ErrorKind::ZeroTangent, "|m| must be positive");
    const auto blk = detail::coupled_block(p.c1111, p.c3333, p.c1313, p.c1133, p.rho, mnorm);
    const double a = std::sqrt((p.c1212 * mnorm * mnorm + p.rho) / p.c1313);
    Impedance z = Impedance::Zero();
    z(0, 0) = p.c1313 * a;
    z(1, 1) = blk.tt;
    z(1, 2) = blk.tn;
    z(2, 1) = blk.nt;
    z(2, 2) = blk.nn;
    return z;
}

/// Z at a general tangential m = (m1, m2, 0): P(m) Zhat P(m)^T.
inline Impedance vti_impedance_closed(const VtiParams &p, const Vec2 &m) {
    const Mat3 pm = block_diagonalizer(m);
    return pm.cast<Complex>() * vti_impedance_closed(p, m.norm()) * pm.transpose().cast<Complex>();
}

enum class TangentAxis { e1, e2 };

inline Impedance ortho_impedance_closed(const OrthoParams &p, TangentAxis axis, double mnorm) {
    if (!(mnorm > 0.0)) throw Error(ErrorKind::ZeroTangent, "|m| must be positive");
    const double m2 = mnorm * mnorm;
    Impedance z = Impedance::Zero();
    if (axis == TangentAxis::e2) {
        const auto blk = detail::coupled_block(p.c2222, p.c3333, p.c2323, p.c2233, p.rho, mnorm);
        z(0, 0) = p.c1313 * std::sqrt((p.c1212 * m2 + p.rho) / p.c1313);
        z(1, 1) = blk.tt;
        z(1, 2) = blk.tn;
        z(2, 1) = blk.nt;
        z(2, 2) = blk.nn;
    } else {
        const auto blk = detail::coupled_block(p.c1111, p.c3333, p.c1313, p.c1133, p.rho, mnorm);
        z(1, 1) = p.c2323 * std::sqrt((p.c1212 * m2 + p.rho) / p.c2323);
        z(0, 0) = blk.tt;
        z(0, 2) = blk.tn;
        z(2, 0) = blk.nt;
        z(2, 2) = blk.nn;
    }
    return z;
}

// ---------------------------------------------------------------------------

/// Principal symbol in boundary normal coordinates: J Z J^T.
inline CMat3 pullback_symbol(const Impedance &z, const Jacobian &jac) {
    if (!jac.invertible()) throw Error(ErrorKind::SingularJacobian, "Jacobian is numerically singular");
    const CMat3 j = jac.entries.cast<Complex>();
    return j * z * j.transpose();
}

} // namespace elastodn

#endif // ELASTODN_BOUNDARY_SYMBOL_HPP
