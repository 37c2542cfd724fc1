#ifndef ELASTODN_SAMPLING_HPP
#define ELASTODN_SAMPLING_HPP

// Sampling designs and synthetic boundary data for the recovery routines.

#include "boundary_symbol.hpp"
#include "reconstruction.hpp"
#include "tensor_core.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace elastodn {

/// Values of t = |m|^2 used for the profile families: the derivative
/// stencil around t = 1 plus t = 2.
inline std::vector<double> default_profile_ts(double spacing = kProfileSpacing, int points = kProfilePoints) {
    std::vector<double> ts;
    for (int k = -(points / 2); k <= points / 2; ++k) ts.push_back(1.0 + k * spacing);
    ts.push_back(2.0);
    return ts;
}

inline std::vector<DirectionPair> axis_directions(int axis, const std::vector<double> &ts) {
    std::vector<DirectionPair> dirs;
    for (double t : ts) {
        Vec3 m = Vec3::Zero();
        m(axis) = std::sqrt(t);
        dirs.emplace_back(Vec3::UnitZ(), m);
    }
    return dirs;
}

inline std::vector<DirectionPair> vti_design(const std::vector<double> &ts = default_profile_ts()) {
    return axis_directions(1, ts);
}

inline std::vector<DirectionPair> ortho_design(const std::vector<double> &ts = default_profile_ts()) {
    auto dirs = axis_directions(1, ts);
    for (const auto &d : axis_directions(0, ts)) dirs.push_back(d);
    dirs.emplace_back(Vec3::UnitZ(), Vec3(1.0, 1.0, 0.0) / std::sqrt(2.0));
    return dirs;
}

inline Vec3 random_unit(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Vec3 v;
    do {
        v = Vec3(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-3);
    return v.normalized();
}

/// Random unit n and random m orthogonal to it with |m| in [0.5, 2].
inline DirectionPair random_direction_pair(std::mt19937_64 &rng) {
    const Vec3 n = random_unit(rng);
    Vec3 m;
    do {
        const Vec3 v = random_unit(rng);
        m = v - v.dot(n) * n;
    } while (m.norm() < 1e-2);
    std::uniform_real_distribution<double> len(0.5, 2.0);
    // Project twice so that |m . n| sits at rounding level.
    m = m.normalized() * len(rng);
    m -= m.dot(n) * n;
    return DirectionPair(n, m);
}

/// Random tangential direction for the flat boundary x3 = 0.
inline DirectionPair random_flat_pair(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi), len(0.5, 2.0);
    const double th = angle(rng), r = len(rng);
    return DirectionPair(Vec3::UnitZ(), Vec3(r * std::cos(th), r * std::sin(th), 0.0));
}

/// Fourier directions for the homogeneous fit. The norms vary: with unit
/// eta the density column coincides with the combination of moduli whose
/// Christoffel matrix is |eta|^2 I.
inline std::vector<Vec3> homogeneous_design(std::size_t count = 40, std::uint64_t seed = 20240611) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> len(0.5, 2.0);
    std::vector<Vec3> etas;
    for (std::size_t i = 0; i < count; ++i) etas.push_back(random_unit(rng) * len(rng));
    return etas;
}

/// Derivative triple of the symbol along y^j, from the linearity of the
/// symbol in C.
inline SymbolTriple symbol_derivative(const MaterialGradient &g, int j, const DirectionPair &dir) {
    return build_symbol(g.dstiffness[j], dir);
}

/// Impedance samples from the generic factorization pipeline, with dZ when
/// the material carries a gradient.
inline std::vector<ImpedanceSample> synthesize(const MaterialParams &params, const std::vector<DirectionPair> &dirs) {
    require_convex(params.stiffness, "stiffness tensor");
    std::vector<ImpedanceSample> out;
    for (const auto &dir : dirs) {
        const SymbolTriple st = build_symbol(params.stiffness, dir);
        ImpedanceSample s{dir, impedance(st, params.rho), std::nullopt};
        if (params.gradient) {
            std::array<CMat3, 3> dz;
            for (int j = 0; j < 3; ++j)
                dz[j] = impedance_derivative(st, params.rho, symbol_derivative(*params.gradient, j, dir),
                                             params.gradient->drho[j]);
            s.dz = dz;
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// Closed-form VTI samples (flat boundary, any tangential m).
inline std::vector<ImpedanceSample> synthesize_vti_closed(const VtiParams &p, const std::vector<DirectionPair> &dirs) {
    from_vti(p);
    std::vector<ImpedanceSample> out;
    for (const auto &dir : dirs) {
        if (!detail::normal_is_e3(dir)) throw Error(ErrorKind::InvalidDirection, "closed forms need n = e3");
        out.push_back({dir, vti_impedance_closed(p, Vec2(dir.m()(0), dir.m()(1))), std::nullopt});
    }
    return out;
}

/// Closed-form orthorhombic samples on the coordinate axes; oblique
/// directions fall back to the generic pipeline.
inline std::vector<ImpedanceSample> synthesize_ortho_closed(const OrthoParams &p, const std::vector<DirectionPair> &dirs) {
    const StiffnessTensor c = from_ortho(p);
    std::vector<ImpedanceSample> out;
    for (const auto &dir : dirs) {
        if (!detail::normal_is_e3(dir)) throw Error(ErrorKind::InvalidDirection, "closed forms need n = e3");
        const Vec3 &m = dir.m();
        const double norm = m.norm();
        Impedance z;
        if (std::abs(m(1) - norm) <= detail::kDirTol * norm)
            z = ortho_impedance_closed(p, TangentAxis::e2, norm);
        else if (std::abs(m(0) - norm) <= detail::kDirTol * norm)
            z = ortho_impedance_closed(p, TangentAxis::e1, norm);
        else
            z = impedance(c, p.rho, dir);
        out.push_back({dir, z, std::nullopt});
    }
    return out;
}

inline std::vector<GammaSample> synthesize_gamma(const MaterialParams &params, const std::vector<Vec3> &etas) {
    require_convex(params.stiffness, "stiffness tensor");
    std::vector<GammaSample> out;
    for (const auto &eta : etas) out.push_back({eta, gamma_hat(params, eta)});
    return out;
}

} // namespace elastodn

#endif // ELASTODN_SAMPLING_HPP
