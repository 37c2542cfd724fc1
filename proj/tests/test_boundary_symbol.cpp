#include "elastodn/boundary_symbol.hpp"
#include "elastodn/sampling.hpp"
#include "support/random_media.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace elastodn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const DirectionPair kIsoDir(Vec3::UnitZ(), Vec3::UnitX());

template <class F> void expect_error(ErrorKind kind, F &&f) {
    try {
        f();
        FAIL("expected " << to_string(kind));
    } catch (const Error &e) {
        CHECK(e.kind() == kind);
    }
}

// Brute-force sum over all index quadruples.
Mat3 contract(const StiffnessTensor &c, const Vec3 &a, const Vec3 &b) {
    Mat3 out = Mat3::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) out(i, k) += c(i, j, k, l) * a(j) * b(l);
    return out;
}

double smallest_singular_ratio(const CMat3 &m) {
    Eigen::JacobiSVD<CMat3> svd(m);
    return svd.singularValues()(2) / svd.singularValues()(0);
}

VtiParams shifted(const VtiParams &p, const VtiParams &d, double h) {
    return {p.c1111 + h * d.c1111, p.c3333 + h * d.c3333, p.c1133 + h * d.c1133,
            p.c1313 + h * d.c1313, p.c1212 + h * d.c1212, p.rho + h * d.rho};
}

} // namespace

TEST_CASE("direction pairs validate their invariants") {
    CHECK_NOTHROW(DirectionPair(Vec3::UnitZ(), Vec3(0.3, -2.0, 0.0)));
    expect_error(ErrorKind::InvalidDirection, [] { DirectionPair(Vec3(0, 0, 2), Vec3::UnitX()); });
    expect_error(ErrorKind::InvalidDirection, [] { DirectionPair(Vec3::UnitZ(), Vec3::Zero()); });
    expect_error(ErrorKind::InvalidDirection, [] { DirectionPair(Vec3::UnitZ(), Vec3(1, 0, 1e-6)); });
}

TEST_CASE("symbol assembly") {
    const auto c = from_isotropic(1, 1);
    const auto st = build_symbol(c, kIsoDir);
    Mat3 d = Vec3(1, 1, 3).asDiagonal();
    Mat3 r = Mat3::Zero();
    r(0, 2) = r(2, 0) = 1.0;
    Mat3 q = Vec3(3, 1, 1).asDiagonal();
    CHECK((st.d - d).norm() == 0.0);
    CHECK((st.r - r).norm() == 0.0);
    CHECK((st.q - q).norm() == 0.0);

    std::mt19937_64 rng(10);
    for (int t = 0; t < 10; ++t) {
        const auto cc = testing::random_convex_tensor(rng);
        const auto dir = random_direction_pair(rng);
        const auto s = build_symbol(cc, dir);
        CHECK((s.d - contract(cc, dir.n(), dir.n())).norm() <= 1e-13 * s.d.norm());
        CHECK((s.r - contract(cc, dir.m(), dir.n())).norm() <= 1e-13 * s.d.norm());
        CHECK((s.q - contract(cc, dir.m(), dir.m())).norm() <= 1e-13 * s.q.norm());
        const auto s2 = build_symbol(cc, DirectionPair(dir.n(), 2.0 * dir.m()));
        CHECK((s2.d - s.d).norm() == 0.0);
        CHECK((s2.r - 2.0 * s.r).norm() <= 1e-14 * s.r.norm());
        CHECK((s2.q - 4.0 * s.q).norm() <= 1e-14 * s.q.norm());
    }

    const auto z = build_symbol(StiffnessTensor{}, kIsoDir);
    CHECK(z.d.isZero(0));
    CHECK(z.r.isZero(0));
    CHECK(z.q.isZero(0));
}

TEST_CASE("full symbol evaluation") {
    const auto st = build_symbol(from_isotropic(1, 1), kIsoDir);
    const CMat3 m0 = full_symbol(st, 1.0, 0.0);
    CHECK((m0.real() - Mat3(Vec3(4, 2, 2).asDiagonal())).norm() == 0.0);
    CHECK((full_symbol(st, 0.0, 0.0).real() - st.q).norm() == 0.0);
    CHECK(smallest_singular_ratio(full_symbol(st, 1.0, Complex(0, std::sqrt(2.0)))) < 1e-14);
}

TEST_CASE("symbol roots") {
    const auto st = build_symbol(from_isotropic(1, 1), kIsoDir);
    const auto roots = symbol_roots(st, 1.0);
    // Isotropic determinant (q^2 + 2)^2 (3 q^2 + 4) / ...: upper roots i sqrt(4/3), i sqrt2 (double).
    CHECK_THAT(roots[0].imag(), WithinAbs(std::sqrt(4.0 / 3.0), 1e-12));
    CHECK_THAT(roots[1].imag(), WithinAbs(std::sqrt(2.0), 1e-7));
    CHECK_THAT(roots[2].imag(), WithinAbs(std::sqrt(2.0), 1e-7));
    for (int k = 0; k < 3; ++k) {
        CHECK(roots[k].imag() > 0.0);
        CHECK(std::abs(roots[k + 3] - std::conj(roots[k])) < 1e-6);
    }

    SECTION("rho = 0 puts every root at +-i|m|") {
        const auto r0 = symbol_roots(st, 0.0);
        for (int k = 0; k < 3; ++k) CHECK_THAT(r0[k].imag(), WithinAbs(1.0, 1e-7));
    }
    SECTION("scaling rho by 4 and m by 2 doubles every root") {
        std::mt19937_64 rng(11);
        const auto c = testing::random_convex_tensor(rng);
        const auto dir = random_direction_pair(rng);
        const auto a = symbol_roots(build_symbol(c, dir), 0.8);
        const auto b = symbol_roots(build_symbol(c, DirectionPair(dir.n(), 2.0 * dir.m())), 3.2);
        for (int k = 0; k < 6; ++k) CHECK(std::abs(b[k] - 2.0 * a[k]) <= 1e-10 * std::abs(b[k]));
    }
    SECTION("roots are zeros of det M on random convex input") {
        std::mt19937_64 rng(12);
        for (int t = 0; t < 20; ++t) {
            const auto c = testing::random_convex_tensor(rng);
            const auto s = build_symbol(c, random_direction_pair(rng));
            const auto r = symbol_roots(s, 1.0);
            for (const auto &z : r) CHECK(smallest_singular_ratio(full_symbol(s, 1.0, z)) < 1e-10);
        }
    }
}

TEST_CASE("eigen factorization") {
    SECTION("isotropic spectrum") {
        const auto f = factor_eigen(build_symbol(from_isotropic(1, 1), kIsoDir), 1.0);
        Eigen::ComplexEigenSolver<CMat3> es(f.s0);
        std::vector<double> im;
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(es.eigenvalues()(i).real()) < 1e-12);
            im.push_back(es.eigenvalues()(i).imag());
        }
        std::sort(im.begin(), im.end());
        CHECK_THAT(im[0], WithinAbs(std::sqrt(4.0 / 3.0), 1e-12));
        CHECK_THAT(im[1], WithinAbs(std::sqrt(2.0), 1e-12));
        CHECK_THAT(im[2], WithinAbs(std::sqrt(2.0), 1e-12));
        CHECK(f.residual <= 1e-12);
    }
    SECTION("random convex tensors") {
        std::mt19937_64 rng(13);
        for (int t = 0; t < 100; ++t) {
            const auto c = testing::random_convex_tensor(rng);
            const double rho = testing::uniform(rng, 0.5, 2.0);
            const auto st = build_symbol(c, random_direction_pair(rng));
            const auto f = factor_eigen(st, rho);
            REQUIRE(f.residual <= 1e-9);
            // Independent residual evaluation at fresh real points.
            for (int k = 0; k < 5; ++k) {
                const double q = testing::uniform(rng, -3.0, 3.0);
                const CMat3 m = full_symbol(st, rho, q);
                const CMat3 qi = Complex(q) * CMat3::Identity();
                const CMat3 fact = (qi - f.s0.adjoint()) * st.d.cast<Complex>() * (qi - f.s0);
                REQUIRE((m - fact).norm() <= 1e-9 * m.norm());
            }
            Eigen::ComplexEigenSolver<CMat3> es(f.s0);
            for (int i = 0; i < 3; ++i) {
                const Complex ev = es.eigenvalues()(i);
                REQUIRE(ev.imag() > 0.0);
                double best = 1e300;
                for (int k = 0; k < 3; ++k) best = std::min(best, std::abs(ev - f.roots[k]));
                CHECK(best <= 1e-9 * std::max(1.0, std::abs(ev)));
            }
        }
    }
}

TEST_CASE("contour factorization") {
    SECTION("isotropic case agrees with the eigen route") {
        const auto st = build_symbol(from_isotropic(1, 1), kIsoDir);
        const auto fe = factor_eigen(st, 1.0);
        const auto fc = factor_contour(st, 1.0, 256);
        CHECK((fe.s0 - fc.s0).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SECTION("random inputs: equivalence and geometric convergence") {
        std::mt19937_64 rng(14);
        for (int t = 0; t < 30; ++t) {
            const auto c = testing::random_convex_tensor(rng);
            const double rho = testing::uniform(rng, 0.5, 2.0);
            const auto st = build_symbol(c, random_direction_pair(rng));
            const auto fe = factor_eigen(st, rho);
            const double e256 = (factor_contour(st, rho, 256).s0 - fe.s0).cwiseAbs().maxCoeff();
            const double e16 = (factor_contour(st, rho, 16).s0 - fe.s0).cwiseAbs().maxCoeff();
            const double e32 = (factor_contour(st, rho, 32).s0 - fe.s0).cwiseAbs().maxCoeff();
            CHECK(e256 <= 1e-8 * std::max(1.0, fe.s0.cwiseAbs().maxCoeff()));
            // Geometric decay: doubling the node count at least squares the
            // relative error until the rounding floor.
            const double scale = fe.s0.cwiseAbs().maxCoeff();
            if (e16 > 1e-10 * scale) CHECK(e32 / scale <= std::max(10.0 * (e16 / scale) * (e16 / scale), 1e-10));
            CHECK(e256 <= e16 + 1e-12 * scale);
        }
    }
    SECTION("too few nodes and a contour through a root are rejected") {
        const auto st = build_symbol(from_isotropic(1, 1), kIsoDir);
        expect_error(ErrorKind::InvalidArgument, [&] { factor_contour(st, 1.0, 8); });
        const double r = std::sqrt(2.0) - std::sqrt(4.0 / 3.0);
        expect_error(ErrorKind::ContourTooClose,
                     [&] { factor_contour(st, 1.0, 64, Contour{Complex(0, std::sqrt(2.0)), r}); });
    }
}

TEST_CASE("impedance properties") {
    SECTION("isotropic shear entry") {
        const Impedance z = impedance(from_isotropic(1, 1), 1.0, kIsoDir);
        CHECK_THAT(z(1, 1).real(), WithinAbs(std::sqrt(2.0), 1e-12));
    }
    SECTION("Hermitian with positive definite real part on random input") {
        std::mt19937_64 rng(15);
        for (int t = 0; t < 100; ++t) {
            const auto c = testing::random_convex_tensor(rng);
            const Impedance z = impedance(c, testing::uniform(rng, 0.5, 2.0), random_direction_pair(rng));
            CHECK(hermiticity_defect(z) <= 1e-10 * z.norm());
            CHECK(real_part_positive_definite(z));
        }
    }
    SECTION("Z(sC, s rho) = s Z(C, rho)") {
        std::mt19937_64 rng(16);
        for (int t = 0; t < 10; ++t) {
            const auto c = testing::random_convex_tensor(rng);
            const auto dir = random_direction_pair(rng);
            const double s = testing::uniform(rng, 0.2, 5.0);
            const Impedance a = impedance(c, 1.1, dir);
            const Impedance b = impedance(s * c, s * 1.1, dir);
            CHECK((b - s * a).norm() <= 1e-12 * b.norm());
        }
    }
}

TEST_CASE("isotropic closed form against an independent scalar evaluation") {
    // alpha, gamma, a, b, c evaluated directly for lambda = mu = rho = 1, |m| = 1.
    const double c11 = 3, c33 = 3, c13 = 1, c44 = 1, c66 = 1, rho = 1, m = 1;
    const double gamma = std::sqrt((c11 * m * m + rho) * c33 / ((c44 * m * m + rho) * c44));
    const double alpha1 = (c13 + c44) * m / ((1 + gamma) * std::sqrt(c44 * c33));
    const double cc = std::sqrt((c44 * m * m + rho) / c33 - std::pow((c13 + c44) * m, 2) / (std::pow(1 + gamma, 2) * c44 * c33));
    const double b = gamma * cc;
    const double a = std::sqrt((c66 * m * m + rho) / c44);
    CHECK_THAT(gamma, WithinAbs(std::sqrt(6.0), 1e-14));
    // (1 + sqrt 6)^2 = 7 + 2 sqrt 6 gives these radical forms.
    CHECK_THAT(alpha1, WithinAbs(2.0 / ((1.0 + std::sqrt(6.0)) * std::sqrt(3.0)), 1e-14));
    CHECK_THAT(cc, WithinAbs(std::sqrt((22.0 + 8.0 * std::sqrt(6.0)) / 75.0), 1e-14));
    CHECK_THAT(cc, WithinAbs(0.74472, 5e-6));

    const Impedance z = vti_impedance_closed({c11, c33, c13, c44, c66, rho}, m);
    CHECK_THAT(z(0, 0).real(), WithinAbs(a * c44, 1e-14));
    CHECK_THAT(z(1, 1).real(), WithinAbs(c44 * b, 1e-14));
    CHECK_THAT(z(2, 2).real(), WithinAbs(c33 * cc, 1e-14));
    CHECK_THAT(z(1, 2).imag(), WithinAbs(std::sqrt(c44 * c33) * alpha1 - c44 * m, 1e-14));
    CHECK_THAT(z(2, 1).imag(), WithinAbs(std::sqrt(c44 * c33) * gamma * alpha1 - c13 * m, 1e-14));
    // Five-decimal values of the scalar evaluation.
    CHECK_THAT(z(0, 0).real(), WithinAbs(1.41421, 5e-6));
    CHECK_THAT(z(1, 1).real(), WithinAbs(1.82419, 5e-6));
    CHECK_THAT(z(2, 2).real(), WithinAbs(2.23417, 5e-6));
    CHECK_THAT(z(1, 2).imag(), WithinAbs(-0.42020, 5e-6));
    CHECK_THAT(z(2, 1).imag(), WithinAbs(0.42020, 5e-6));
    CHECK(z(1, 2) == std::conj(z(2, 1)));

    // Second oracle: the generic factorization with m = e2.
    const Impedance g = impedance(from_isotropic(1, 1), 1.0, DirectionPair(Vec3::UnitZ(), Vec3::UnitY()));
    CHECK((g - z).norm() <= 1e-12);
    // Orthorhombic embedding gives the same matrix.
    CHECK((ortho_impedance_closed(to_ortho({c11, c33, c13, c44, c66, rho}), TangentAxis::e2, m) - z).norm() <= 1e-15);
}

TEST_CASE("closed forms match the generic pipeline") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 50; ++t) {
        const auto p = testing::random_vti(rng);
        const auto dir = random_flat_pair(rng);
        const Impedance zc = vti_impedance_closed(p, Vec2(dir.m()(0), dir.m()(1)));
        const Impedance zg = impedance(from_vti(p), p.rho, dir);
        REQUIRE((zc - zg).norm() <= 1e-10 * zg.norm());
    }
    for (int t = 0; t < 50; ++t) {
        const auto p = testing::random_ortho(rng);
        const double mn = testing::uniform(rng, 0.5, 2.0);
        const auto c = from_ortho(p);
        const Impedance z2 = ortho_impedance_closed(p, TangentAxis::e2, mn);
        const Impedance z1 = ortho_impedance_closed(p, TangentAxis::e1, mn);
        REQUIRE((z2 - impedance(c, p.rho, DirectionPair(Vec3::UnitZ(), mn * Vec3::UnitY()))).norm() <= 1e-10 * z2.norm());
        REQUIRE((z1 - impedance(c, p.rho, DirectionPair(Vec3::UnitZ(), mn * Vec3::UnitX()))).norm() <= 1e-10 * z1.norm());
        CHECK_THAT(z1(1, 1).real(), WithinRel(p.c2323 * std::sqrt((p.c1212 * mn * mn + p.rho) / p.c2323), 1e-14));
    }
    expect_error(ErrorKind::NegativeDiscriminant, [] {
        // Far outside the convex cone: the c radicand turns negative.
        vti_impedance_closed(VtiParams{1, 1, 5, 1, 1, 0.01}, 1.0);
    });
}

TEST_CASE("block diagonalizer") {
    CHECK(block_diagonalizer(Vec2(0, 1)).isIdentity(0));
    expect_error(ErrorKind::ZeroTangent, [] { block_diagonalizer(Vec2::Zero()); });
    std::mt19937_64 rng(18);
    for (int t = 0; t < 10; ++t) {
        const Vec2 m(testing::uniform(rng, -2, 2), testing::uniform(rng, -2, 2));
        const Mat3 p = block_diagonalizer(m);
        CHECK((p.transpose() * p - Mat3::Identity()).norm() <= 1e-14);
        const auto vp = testing::random_vti(rng);
        const auto st = build_symbol(from_vti(vp), DirectionPair(Vec3::UnitZ(), Vec3(m(0), m(1), 0)));
        const Mat3 rh = p.transpose() * st.r * p;
        const double mn = m.norm();
        CHECK_THAT(rh(1, 2), WithinAbs(vp.c1133 * mn, 1e-13));
        CHECK_THAT(rh(2, 1), WithinAbs(vp.c1313 * mn, 1e-13));
        Mat3 rest = rh;
        rest(1, 2) = rest(2, 1) = 0.0;
        CHECK(rest.norm() <= 1e-13);
        const Mat3 qh = p.transpose() * st.q * p;
        CHECK_THAT(qh(0, 0), WithinAbs(vp.c1212 * mn * mn, 1e-12));
        CHECK_THAT(qh(1, 1), WithinAbs(vp.c1111 * mn * mn, 1e-12));
        CHECK_THAT(qh(2, 2), WithinAbs(vp.c1313 * mn * mn, 1e-12));
    }
}

TEST_CASE("pullback of the principal symbol") {
    std::mt19937_64 rng(19);
    const auto c = testing::random_convex_tensor(rng);
    const Impedance z = impedance(c, 1.0, random_direction_pair(rng));
    CHECK((pullback_symbol(z, Jacobian{}) - z).norm() == 0.0);

    const Mat3 r = Eigen::AngleAxisd(1.1, Vec3(1, -1, 2).normalized()).toRotationMatrix();
    const CMat3 zr = pullback_symbol(z, Jacobian{r});
    Eigen::SelfAdjointEigenSolver<CMat3> e0(0.5 * (z + z.adjoint())), e1(0.5 * (zr + zr.adjoint()));
    CHECK((e0.eigenvalues() - e1.eigenvalues()).norm() <= 1e-12 * z.norm());

    Mat3 J = Mat3::Random() + 2.0 * Mat3::Identity();
    const CMat3 back = pullback_symbol(pullback_symbol(z, Jacobian{J}), Jacobian{J.inverse()});
    CHECK((back - z).norm() <= 1e-12 * z.norm());

    expect_error(ErrorKind::SingularJacobian, [&] { pullback_symbol(z, Jacobian{Mat3::Zero()}); });
}

TEST_CASE("exact impedance derivative matches finite differences of the closed form") {
    std::mt19937_64 rng(20);
    for (int t = 0; t < 10; ++t) {
        const auto p = testing::random_vti(rng);
        const VtiParams d{testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1),
                          testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1), testing::uniform(rng, -1, 1)};
        const auto dir = random_flat_pair(rng);
        const Vec2 m(dir.m()(0), dir.m()(1));
        const SymbolTriple st = build_symbol(from_vti(p), dir);
        const SymbolTriple dst = build_symbol(detail::vti_tensor(d), dir);
        const Impedance exact = impedance_derivative(st, p.rho, dst, d.rho);

        // Richardson-extrapolated central differences.
        auto central = [&](double h) {
            return Impedance((vti_impedance_closed(shifted(p, d, h), m) - vti_impedance_closed(shifted(p, d, -h), m)) /
                             (2.0 * h));
        };
        const Impedance fd = (4.0 * central(1e-4) - central(2e-4)) / 3.0;
        CHECK((exact - fd).norm() <= 1e-8 * std::max(1.0, exact.norm()));
    }
}
