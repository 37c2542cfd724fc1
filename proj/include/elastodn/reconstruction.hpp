#ifndef ELASTODN_RECONSTRUCTION_HPP
#define ELASTODN_RECONSTRUCTION_HPP

// Explicit inverse schemes: density and stiffness at a flat boundary point
// from surface impedance samples (VTI with first derivatives, orthorhombic),
// and constant fully anisotropic (C, rho) from the inverse symbol
// Gamma(eta) = M(eta)^{-1}.

#include "boundary_symbol.hpp"
#include "errors.hpp"
#include "tensor_core.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace elastodn {

struct ImpedanceSample {
    DirectionPair dir;
    Impedance z;
    std::optional<std::array<CMat3, 3>> dz; ///< d/dy^j of Z, j = 1..3
};

struct ProfileSamples {
    std::vector<double> ts; ///< strictly increasing values of t = |m|^2
    std::vector<double> ds;
};

/// f(t) = a + c / (t + b)
struct RationalTriple {
    double a = 0, b = 0, c = 0;
    double operator()(double t) const { return a + c / (t + b); }
};

struct Derivatives {
    double value = 0, first = 0, second = 0;
};

/// (a, b, c) from f(1), f'(1), f''(1). Uses 2 f'(1) / f''(1) = -(1 + b).
inline RationalTriple rational_recover(double f1, double df1, double ddf1) {
    if (!(std::abs(ddf1) > 1e-12 * std::max({std::abs(f1), std::abs(df1), 1.0})))
        throw Error(ErrorKind::DegenerateProfile, "second derivative vanishes; profile is constant");
    RationalTriple r;
    r.b = -2.0 * df1 / ddf1 - 1.0;
    r.a = f1 + df1 * (1.0 + r.b);
    r.c = (f1 - r.a) * (1.0 + r.b);
    return r;
}

namespace detail {

/// Finite-difference weights for derivatives 0..2 at x0 on arbitrary nodes
/// (Fornberg's recursion). Row k of the result holds the k-th derivative.
inline std::array<std::vector<double>, 3> fd_weights(std::span<const double> x, double x0) {
    const int n = static_cast<int>(x.size());
    constexpr int order = 2;
    std::vector<std::array<double, order + 1>> c(n);
    for (auto &row : c) row.fill(0.0);
    c[0][0] = 1.0;
    double c1 = 1.0;
    for (int i = 1; i < n; ++i) {
        double c2 = 1.0;
        const int mn = std::min(i, order);
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1)
                for (int k = mn; k >= 0; --k)
                    c[i][k] = c1 * ((k > 0 ? k * c[i - 1][k - 1] : 0.0) - (x[i - 1] - x0) * c[i - 1][k]) / c2;
            for (int k = mn; k >= 0; --k) c[j][k] = ((x[i] - x0) * c[j][k] - (k > 0 ? k * c[j][k - 1] : 0.0)) / c3;
        }
        c1 = c2;
    }
    std::array<std::vector<double>, 3> w;
    for (int k = 0; k <= order; ++k) {
        w[k].resize(n);
        for (int i = 0; i < n; ++i) w[k][i] = c[i][k];
    }
    return w;
}

/// Local stencil: indices of the `count` samples closest to t0.
inline std::vector<std::size_t> nearest(std::span<const double> ts, double t0, std::size_t count) {
    std::vector<std::size_t> idx(ts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(ts[a] - t0) < std::abs(ts[b] - t0); });
    idx.resize(std::min(count, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace detail

/// Polynomial-interpolation derivatives at t0 on the (up to `max_points`)
/// nearest samples. On a uniform 5-point stencil this is the central
/// difference with one Richardson level, O(h^4).
inline Derivatives estimate_derivatives(const ProfileSamples &p, double t0, std::size_t max_points = 7) {
    if (p.ts.size() != p.ds.size()) throw Error(ErrorKind::InvalidArgument, "profile sizes differ");
    if (p.ts.size() < 5) throw Error(ErrorKind::InsufficientSamples, "need at least 5 profile samples");
    const auto idx = detail::nearest(p.ts, t0, std::max<std::size_t>(max_points, 5));
    std::vector<double> x, y;
    for (auto i : idx) {
        x.push_back(p.ts[i]);
        y.push_back(p.ds[i]);
    }
    if (!(x.front() < t0 && t0 < x.back()))
        throw Error(ErrorKind::InsufficientSamples, "t0 is not interior to the local stencil");
    const auto w = detail::fd_weights(x, t0);
    Derivatives d;
    for (std::size_t i = 0; i < x.size(); ++i) {
        d.value += w[0][i] * y[i];
        d.first += w[1][i] * y[i];
        d.second += w[2][i] * y[i];
    }
    return d;
}

// ---------------------------------------------------------------------------
// Sample selection for flat boundaries with normal e3

/// Default derivative stencil along each profile family: kProfilePoints
/// values of t = |m|^2 centred on 1 with spacing kProfileSpacing.
inline constexpr int kProfilePoints = 9;
inline constexpr double kProfileSpacing = 3e-2;

namespace detail {

constexpr double kDirTol = 1e-9;

inline bool normal_is_e3(const DirectionPair &dir) {
    return (dir.n() - Vec3::UnitZ()).norm() <= kDirTol;
}

/// Samples with m along +e_axis, keyed by t = |m|^2.
struct AxisFamily {
    std::vector<double> ts;
    std::vector<const ImpedanceSample *> samples;

    const ImpedanceSample *at(double t) const {
        for (std::size_t i = 0; i < ts.size(); ++i)
            if (std::abs(ts[i] - t) <= kDirTol * t) return samples[i];
        return nullptr;
    }
};

inline AxisFamily axis_family(std::span<const ImpedanceSample> samples, int axis) {
    std::vector<std::pair<double, const ImpedanceSample *>> found;
    for (const auto &s : samples) {
        if (!normal_is_e3(s.dir)) continue;
        const Vec3 &m = s.dir.m();
        const double norm = m.norm();
        if (m(axis) > 0 && std::abs(m(axis) - norm) <= kDirTol * norm) found.emplace_back(norm * norm, &s);
    }
    std::sort(found.begin(), found.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    AxisFamily f;
    for (const auto &[t, s] : found) {
        if (!f.ts.empty() && std::abs(t - f.ts.back()) <= kDirTol * t) continue;
        f.ts.push_back(t);
        f.samples.push_back(s);
    }
    return f;
}

inline const ImpedanceSample &require_sample(const AxisFamily &f, double t, const char *what) {
    const auto *s = f.at(t);
    if (!s) throw Error(ErrorKind::MissingSample, what);
    return *s;
}

/// Samples of the profile family within `window` of t = 1.
inline std::vector<std::size_t> stencil_indices(const AxisFamily &f, double window = 0.2) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < f.ts.size(); ++i)
        if (std::abs(f.ts[i] - 1.0) <= window) idx.push_back(i);
    if (idx.size() < 5) throw Error(ErrorKind::InsufficientSamples, "derivative stencil near |m| = 1 needs 5 samples");
    return idx;
}

/// Data consumed by the VTI-structured scheme for one tangential axis:
/// `z_shear` is the decoupled diagonal entry, the coupled block has
/// tangential entry `z_t`, normal entry `z_n` and off-diagonal `z_tn`.
struct BlockIndices {
    int shear, tangential, normal = 2;
};

struct ProfileData {
    std::vector<double> ts;
    std::vector<double> ratio_sq; // (Z_t / Z_n)^2
    std::vector<std::size_t> stencil;
    std::vector<double> weights_value, weights_first, weights_second;
    Derivatives d;
};

inline ProfileData profile(const AxisFamily &f, const BlockIndices &bi, std::size_t max_points = kProfilePoints) {
    ProfileData p;
    const auto idx = stencil_indices(f);
    for (auto i : idx) {
        const auto &z = f.samples[i]->z;
        const double r = z(bi.tangential, bi.tangential).real() / z(bi.normal, bi.normal).real();
        p.ts.push_back(f.ts[i]);
        p.ratio_sq.push_back(r * r);
    }
    const auto local = nearest(p.ts, 1.0, std::max<std::size_t>(max_points, 5));
    std::vector<double> x;
    for (auto i : local) {
        x.push_back(p.ts[i]);
        p.stencil.push_back(idx[i]);
    }
    if (!(x.front() < 1.0 && 1.0 < x.back()))
        throw Error(ErrorKind::InsufficientSamples, "|m| = 1 is not interior to the derivative stencil");
    const auto w = fd_weights(x, 1.0);
    p.weights_value = w[0];
    p.weights_first = w[1];
    p.weights_second = w[2];
    for (std::size_t k = 0; k < local.size(); ++k) {
        p.d.value += w[0][k] * p.ratio_sq[local[k]];
        p.d.first += w[1][k] * p.ratio_sq[local[k]];
        p.d.second += w[2][k] * p.ratio_sq[local[k]];
    }
    return p;
}

/// Coupling modulus from the normal-normal impedance entry at |m| = 1,
/// with the branch fixed by the sign of the off-diagonal entry.
inline double coupling_modulus(double cs, double cn, double cp, double rho, double z_nn, double im_z_tn, double &rad_out,
                               double &gamma_out) {
    const double rad = -(cs / cn) * z_nn * z_nn + cs * cs + rho * cs;
    const double scale = cs * cs + rho * cs;
    if (rad < -1e-10 * scale) throw Error(ErrorKind::NegativeRadicand, "step 4 radicand negative");
    rad_out = std::max(rad, 0.0);
    gamma_out = std::sqrt((cp + rho) * cn / ((cs + rho) * cs));
    // Im Z_tn = (C_c + C_s) / (1 + gamma) - C_s at |m| = 1.
    const double sign = im_z_tn + cs >= 0.0 ? 1.0 : -1.0;
    return sign * (1.0 + gamma_out) * std::sqrt(rad_out) - cs;
}

} // namespace detail

// ---------------------------------------------------------------------------
// VTI

struct VtiRecovery {
    VtiParams params;
    RationalTriple profile;     ///< d(t) = (Z22 / Z33)^2 along e2
    Derivatives profile_derivs; ///< d, d', d'' at t = 1
    double max_sample_mismatch = 0.0; ///< max ||Z_closed(recovered) - Z_data|| / ||Z_data||
};

struct VtiGradient {
    double drho = 0, dc1111 = 0, dc1313 = 0, dc3333 = 0, dc1133 = 0, dc1212 = 0;
};

namespace detail {

inline double mismatch_against(const VtiParams &p, std::span<const ImpedanceSample> samples) {
    double worst = 0.0;
    for (const auto &s : samples) {
        if (!normal_is_e3(s.dir)) continue;
        const Vec2 m(s.dir.m()(0), s.dir.m()(1));
        worst = std::max(worst, (vti_impedance_closed(p, m) - s.z).norm() / s.z.norm());
    }
    return worst;
}

} // namespace detail

/// Steps 1-4 on samples with n = e3 and m along e2 at |m| = 1, sqrt(2) and a
/// derivative stencil around |m|^2 = 1.
inline VtiRecovery recover_vti(std::span<const ImpedanceSample> samples) {
    const auto fam = detail::axis_family(samples, 1);
    const auto &s1 = detail::require_sample(fam, 1.0, "step 1: no sample at |m| = 1 along e2");
    const auto &s2 = detail::require_sample(fam, 2.0, "step 1: no sample at |m| = sqrt(2) along e2");

    // Step 1: (Z11)^2 = C1212 C1313 |m|^2 + rho C1313.
    const double z11_1 = s1.z(0, 0).real(), z11_2 = s2.z(0, 0).real();
    const double c1212_c1313 = z11_2 * z11_2 - z11_1 * z11_1;
    const double rho_c1313 = z11_1 * z11_1 - c1212_c1313;

    // Step 2: d(t) = (Z22 / Z33)^2 = C1111/C3333 + [rho (C1313 - C1111) / (C1313 C3333)] / (t + rho/C1313).
    const auto prof = detail::profile(fam, {0, 1});
    const RationalTriple rt = rational_recover(prof.d.value, prof.d.first, prof.d.second);
    const double rho_over_c3333 = rt.c + rt.b * rt.a;

    // Step 3.
    if (!(rho_c1313 > 0.0 && rt.b > 0.0 && rho_over_c3333 > 0.0 && c1212_c1313 > 0.0))
        throw Error(ErrorKind::NegativeRadicand, "step 3: recovered products are not positive");
    VtiParams p;
    p.rho = std::sqrt(rho_c1313 * rt.b);
    p.c1313 = std::sqrt(rho_c1313 / rt.b);
    p.c1212 = c1212_c1313 / p.c1313;
    p.c3333 = p.rho / rho_over_c3333;
    p.c1111 = rt.a * p.c3333;

    // Step 4.
    double rad = 0, gamma = 0;
    p.c1133 = detail::coupling_modulus(p.c1313, p.c3333, p.c1111, p.rho, s1.z(2, 2).real(), s1.z(1, 2).imag(), rad, gamma);

    return {p, rt, prof.d, detail::mismatch_against(p, samples)};
}

/// Steps 5-9: first derivatives of (rho, C1111, C1313, C3333, C1133, C1212)
/// along each y^j from dZ on the same samples recover_vti consumed.
inline std::array<VtiGradient, 3> recover_vti_gradient(std::span<const ImpedanceSample> samples,
                                                       const VtiRecovery &rec) {
    const auto fam = detail::axis_family(samples, 1);
    const auto &s1 = detail::require_sample(fam, 1.0, "step 5: no sample at |m| = 1 along e2");
    const auto &s2 = detail::require_sample(fam, 2.0, "step 5: no sample at |m| = sqrt(2) along e2");
    const auto prof = detail::profile(fam, {0, 1});
    auto need_dz = [](const ImpedanceSample &s) -> const std::array<CMat3, 3> & {
        if (!s.dz) throw Error(ErrorKind::MissingSample, "step 5: sample lacks dZ data");
        return *s.dz;
    };

    const VtiParams &p = rec.params;
    const double rho = p.rho, c13 = p.c1313, c33 = p.c3333, c11 = p.c1111, c66 = p.c1212;
    const double b = rec.profile.b, a = rec.profile.a;
    const Derivatives &d = rec.profile_derivs;
    if (!(std::abs(rho * c13) > 0.0)) throw Error(ErrorKind::SingularSystem, "step 5: 2x2 system is singular");

    const double z11_1 = s1.z(0, 0).real(), z11_2 = s2.z(0, 0).real();
    const double z33_1 = s1.z(2, 2).real();
    double rad = 0, gamma = 0;
    const double c1133_check =
        detail::coupling_modulus(c13, c33, c11, rho, z33_1, s1.z(1, 2).imag(), rad, gamma);
    const double sign = (c1133_check + c13) >= 0.0 ? 1.0 : -1.0;

    std::array<VtiGradient, 3> out{};
    for (int j = 0; j < 3; ++j) {
        const double dz11_1 = need_dz(s1)[j](0, 0).real();
        const double dz11_2 = need_dz(s2)[j](0, 0).real();
        const double dz33_1 = need_dz(s1)[j](2, 2).real();

        // Derivatives of the profile values, then of d, d', d'' by the same stencil.
        Derivatives dd;
        for (std::size_t k = 0; k < prof.stencil.size(); ++k) {
            const auto &s = *fam.samples[prof.stencil[k]];
            const auto &dzs = need_dz(s)[j];
            const double zt = s.z(1, 1).real(), zn = s.z(2, 2).real();
            const double r = zt / zn;
            const double dr = (dzs(1, 1).real() * zn - zt * dzs(2, 2).real()) / (zn * zn);
            const double dratio = 2.0 * r * dr;
            dd.value += prof.weights_value[k] * dratio;
            dd.first += prof.weights_first[k] * dratio;
            dd.second += prof.weights_second[k] * dratio;
        }

        // Step 5: d(rho / C1313) = -2 d(d'/d''), d(rho C1313) = d(2 Z11(e2)^2 - Z11(sqrt2 e2)^2).
        const double d_ratio = (dd.first * d.second - d.first * dd.second) / (d.second * d.second);
        const double db = -2.0 * d_ratio;
        const double d_rho_c13 = 4.0 * z11_1 * dz11_1 - 2.0 * z11_2 * dz11_2;
        VtiGradient g;
        g.drho = (c13 * c13 * db + d_rho_c13) / (2.0 * c13);
        g.dc1313 = (d_rho_c13 - c13 * c13 * db) / (2.0 * rho);

        // Step 6: C1212 dC1313 + C1313 dC1212 = d(Z11(sqrt2 e2)^2 - Z11(e2)^2).
        const double d_c66_c13 = 2.0 * z11_2 * dz11_2 - 2.0 * z11_1 * dz11_1;
        g.dc1212 = (d_c66_c13 - c66 * g.dc1313) / c13;

        // Step 7: d(C1111/C3333) = d(d(1) + d'(1)(1 + rho/C1313)).
        const double da = dd.value + dd.first * (1.0 + b) + d.first * db;

        // Step 8: d(rho/C3333) from c = (d(1) - a)(1 + b) and rho/C3333 = c + b a.
        const double dc = (dd.value - da) * (1.0 + b) + (d.value - a) * db;
        const double d_rho_c33 = dc + db * a + b * da;
        g.dc3333 = (c33 * g.drho - c33 * c33 * d_rho_c33) / rho;
        g.dc1111 = (c33 * c33 * da + c11 * g.dc3333) / c33;

        // Step 9: differentiate the step-4 expression.
        const double drad = -(g.dc1313 / c33 - c13 * g.dc3333 / (c33 * c33)) * z33_1 * z33_1 -
                            (c13 / c33) * 2.0 * z33_1 * dz33_1 + 2.0 * c13 * g.dc1313 + g.drho * c13 + rho * g.dc1313;
        const double g2 = gamma * gamma;
        const double dg2 = g2 * ((g.dc1111 + g.drho) / (c11 + rho) + g.dc3333 / c33 - (g.dc1313 + g.drho) / (c13 + rho) -
                                 g.dc1313 / c13);
        const double dgamma = dg2 / (2.0 * gamma);
        if (!(rad > 0.0)) throw Error(ErrorKind::NegativeRadicand, "step 9: radicand vanishes");
        const double sq = std::sqrt(rad);
        g.dc1133 = sign * (dgamma * sq + (1.0 + gamma) * drad / (2.0 * sq)) - g.dc1313;
        out[j] = g;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Orthorhombic

struct OrthoRecovery {
    OrthoParams params;
    double max_sample_mismatch = 0.0;
};

/// Runs the VTI-structured scheme on the m || e2 and m || e1 families and
/// takes C1122 from one oblique tangential sample via Q + rho = S0^* D S0.
inline OrthoRecovery recover_ortho(std::span<const ImpedanceSample> samples) {
    const auto f2 = detail::axis_family(samples, 1);
    const auto f1 = detail::axis_family(samples, 0);
    const auto &a1 = detail::require_sample(f2, 1.0, "step 1: no sample at |m| = 1 along e2");
    const auto &a2 = detail::require_sample(f2, 2.0, "step 1: no sample at |m| = sqrt(2) along e2");
    const auto &b1 = detail::require_sample(f1, 1.0, "step 1: no sample at |m| = 1 along e1");
    const auto &b2 = detail::require_sample(f1, 2.0, "step 1: no sample at |m| = sqrt(2) along e1");

    // Decoupled entries: m || e2 gives C1313 (C1212 t + rho), m || e1 gives C2323 (C1212 t + rho).
    const double za1 = a1.z(0, 0).real(), za2 = a2.z(0, 0).real();
    const double zb1 = b1.z(1, 1).real(), zb2 = b2.z(1, 1).real();
    const double c1212_c1313 = za2 * za2 - za1 * za1;
    const double rho_c1313 = za1 * za1 - c1212_c1313;
    const double rho_c2323 = zb1 * zb1 - (zb2 * zb2 - zb1 * zb1);

    // Coupled-block profiles: along e2 the shear modulus is C2323, along e1 it is C1313.
    const auto prof2 = detail::profile(f2, {0, 1});
    const auto prof1 = detail::profile(f1, {1, 0});
    const RationalTriple r2 = rational_recover(prof2.d.value, prof2.d.first, prof2.d.second);
    const RationalTriple r1 = rational_recover(prof1.d.value, prof1.d.first, prof1.d.second);
    const double rho_over_c3333 = r1.c + r1.b * r1.a;

    if (!(rho_c1313 > 0.0 && rho_c2323 > 0.0 && r1.b > 0.0 && r2.b > 0.0 && rho_over_c3333 > 0.0))
        throw Error(ErrorKind::NegativeRadicand, "step 3: recovered products are not positive");

    OrthoParams p;
    p.rho = std::sqrt(rho_c1313 * r1.b);
    p.c1313 = std::sqrt(rho_c1313 / r1.b);
    p.c2323 = rho_c2323 / p.rho;
    p.c1212 = c1212_c1313 / p.c1313;
    p.c3333 = p.rho / rho_over_c3333;
    p.c1111 = r1.a * p.c3333;
    p.c2222 = r2.a * p.c3333;

    double rad = 0, gamma = 0;
    p.c2233 = detail::coupling_modulus(p.c2323, p.c3333, p.c2222, p.rho, a1.z(2, 2).real(), a1.z(1, 2).imag(), rad, gamma);
    p.c1133 = detail::coupling_modulus(p.c1313, p.c3333, p.c1111, p.rho, b1.z(2, 2).real(), b1.z(0, 2).imag(), rad, gamma);

    // C1122 enters only Q12 = (C1212 + C1122) m1 m2.
    const ImpedanceSample *oblique = nullptr;
    for (const auto &s : samples) {
        const Vec3 &m = s.dir.m();
        if (detail::normal_is_e3(s.dir) && std::abs(m(0) * m(1)) > 0.1 * m.squaredNorm()) {
            oblique = &s;
            break;
        }
    }
    if (!oblique) throw Error(ErrorKind::MissingSample, "C1122: no oblique tangential sample");
    p.c1122 = 0.0;
    const SymbolTriple st = build_symbol(detail::ortho_tensor(p), oblique->dir);
    const CMat3 d = st.d.cast<Complex>();
    const CMat3 s0 = st.d.inverse().cast<Complex>() * (Complex(0.0, 1.0) * oblique->z - st.r.transpose().cast<Complex>());
    const CMat3 k0 = s0.adjoint() * d * s0;
    const Vec3 &m = oblique->dir.m();
    p.c1122 = k0(0, 1).real() / (m(0) * m(1)) - p.c1212;

    double worst = 0.0;
    for (const auto &s : samples) {
        if (!detail::normal_is_e3(s.dir)) continue;
        const Impedance model = impedance(from_ortho(p), p.rho, s.dir);
        worst = std::max(worst, (model - s.z).norm() / s.z.norm());
    }
    return {p, worst};
}

// ---------------------------------------------------------------------------
// Constant fully anisotropic media

struct GammaSample {
    Vec3 eta;
    Mat3 gamma_hat; ///< M(eta)^{-1}
};

/// sum_{jl} C^{ijkl} eta_j eta_l
inline Mat3 christoffel(const StiffnessTensor &c, const Vec3 &eta) {
    Mat3 g = Mat3::Zero();
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            for (int j = 0; j < 3; ++j)
                for (int l = 0; l < 3; ++l) g(i, k) += c(i, j, k, l) * eta(j) * eta(l);
    return g;
}

/// M(eta)^{-1} with M(eta) = sum C eta eta + rho I; real symmetric positive definite.
inline Mat3 gamma_hat(const MaterialParams &params, const Vec3 &eta) {
    return (christoffel(params.stiffness, eta) + params.rho * Mat3::Identity()).inverse();
}

struct XrayReport {
    Mat3 lhs = Mat3::Zero(); ///< integral of M(m + s n)^{-1} over the real line
    Mat3 rhs = Mat3::Zero(); ///< pi (Re Z)^{-1}
    double gap = 0.0;
};

/// Line integral of M(m + s n)^{-1} over s in R, entrywise adaptive
/// Gauss-Kronrod on the doubly infinite line.
inline Mat3 xray_integral(const MaterialParams &params, const DirectionPair &dir) {
    const SymbolTriple st = build_symbol(params.stiffness, dir);
    const Mat3 k1 = st.r + st.r.transpose();
    const Mat3 k0 = st.q + params.rho * Mat3::Identity();
    // Natural length scale in s where the quadratic and constant terms balance.
    const double scale = std::sqrt(k0.norm() / st.d.norm());

    Mat3 out;
    using boost::math::quadrature::gauss_kronrod;
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i)
        for (int k = i; k < 3; ++k) {
            auto f = [&](double u) {
                const double s = scale * u;
                const Mat3 m = st.d * (s * s) + k1 * s + k0;
                return scale * m.inverse()(i, k);
            };
            double err = 0.0;
            const double v = gauss_kronrod<double, 61>::integrate(f, -inf, inf, 20, 1e-13, &err);
            if (!std::isfinite(v) || err > 1e-8 * std::max(std::abs(v), 1e-300) + 1e-300)
                throw Error(ErrorKind::QuadratureFailure, "x-ray quadrature did not converge");
            out(i, k) = out(k, i) = v;
        }
    return out;
}

/// pi (Re Z)^{-1}, the impedance side of the x-ray identity.
inline Mat3 xray_from_impedance(const Impedance &z) {
    const Mat3 re = 0.5 * (z.real() + z.real().transpose());
    return std::numbers::pi * re.inverse();
}

/// Compares the line integral of the inverse symbol along n with the real
/// part of the impedance at (m, n).
inline XrayReport xray_check(const MaterialParams &params, const DirectionPair &dir) {
    XrayReport rep;
    rep.lhs = xray_integral(params, dir);
    rep.rhs = xray_from_impedance(impedance(params.stiffness, params.rho, dir));
    rep.gap = (rep.lhs - rep.rhs).norm() / rep.rhs.norm();
    return rep;
}

struct HomogeneousRecovery {
    MaterialParams params;
    double residual = 0.0; ///< ||A x - b|| / ||b|| of the least-squares fit
    int rank = 0;
};

/// Least-squares fit of the 21 Voigt components and rho to
/// M(eta) = Gamma(eta)^{-1} over the sampled eta.
inline HomogeneousRecovery recover_homogeneous(std::span<const GammaSample> samples) {
    constexpr int kUnknowns = StiffnessTensor::kNumComponents + 1;
    const int rows = 6 * static_cast<int>(samples.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, kUnknowns);
    Eigen::VectorXd b(rows);
    constexpr int upper[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};

    int row = 0;
    for (const auto &s : samples) {
        const Mat3 m = s.gamma_hat.inverse();
        for (const auto &ik : upper) {
            const int i = ik[0], k = ik[1];
            for (int j = 0; j < 3; ++j)
                for (int l = 0; l < 3; ++l)
                    a(row, StiffnessTensor::slot(voigt_index(i, j), voigt_index(k, l))) += s.eta(j) * s.eta(l);
            if (i == k) a(row, kUnknowns - 1) = 1.0;
            b(row) = 0.5 * (m(i, k) + m(k, i));
            ++row;
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    HomogeneousRecovery rec;
    rec.rank = static_cast<int>(qr.rank());
    if (rec.rank < kUnknowns)
        throw Error(ErrorKind::RankDeficientDesign,
                    "sampled directions determine only " + std::to_string(rec.rank) + " of 22 unknowns");
    const Eigen::VectorXd x = qr.solve(b);
    std::array<double, StiffnessTensor::kNumComponents> comps{};
    for (int u = 0; u < StiffnessTensor::kNumComponents; ++u) comps[u] = x(u);
    rec.params.stiffness = StiffnessTensor::from_components(comps);
    rec.params.rho = x(kUnknowns - 1);
    rec.residual = (a * x - b).norm() / b.norm();
    return rec;
}

} // namespace elastodn

#endif // ELASTODN_RECONSTRUCTION_HPP
