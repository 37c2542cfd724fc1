#include "elastodn/reconstruction.hpp"
#include "elastodn/sampling.hpp"
#include "support/random_media.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace elastodn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

template <class F> void expect_error(ErrorKind kind, F &&f) {
    try {
        f();
        FAIL("expected " << to_string(kind));
    } catch (const Error &e) {
        CHECK(e.kind() == kind);
    }
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double vti_error(const VtiParams &a, const VtiParams &b) {
    return std::max({rel(a.c1111, b.c1111), rel(a.c3333, b.c3333), rel(a.c1133, b.c1133), rel(a.c1313, b.c1313),
                     rel(a.c1212, b.c1212), rel(a.rho, b.rho)});
}

double ortho_error(const OrthoParams &a, const OrthoParams &b) {
    return std::max({rel(a.c1111, b.c1111), rel(a.c2222, b.c2222), rel(a.c3333, b.c3333), rel(a.c1122, b.c1122),
                     rel(a.c1133, b.c1133), rel(a.c2233, b.c2233), rel(a.c2323, b.c2323), rel(a.c1313, b.c1313),
                     rel(a.c1212, b.c1212), rel(a.rho, b.rho)});
}

// f and its first two derivatives for f(t) = a + c / (t + b), evaluated directly.
std::array<double, 3> rational_at_one(double a, double b, double c) {
    const double u = 1.0 + b;
    return {a + c / u, -c / (u * u), 2.0 * c / (u * u * u)};
}

} // namespace

TEST_CASE("rational profile recovery") {
    SECTION("documented examples") {
        const auto r = rational_recover(2.6, -0.12, 0.048);
        CHECK_THAT(r.a, WithinAbs(2.0, 1e-12));
        CHECK_THAT(r.b, WithinAbs(4.0, 1e-12));
        CHECK_THAT(r.c, WithinAbs(3.0, 1e-12));

        const auto p = rational_recover(1, -1, 2);
        CHECK_THAT(p.a, WithinAbs(0.0, 1e-15));
        CHECK_THAT(p.b, WithinAbs(0.0, 1e-15));
        CHECK_THAT(p.c, WithinAbs(1.0, 1e-15));

        expect_error(ErrorKind::DegenerateProfile, [] { rational_recover(5, 0, 0); });
    }
    SECTION("the printed sign b = 2f'/f'' - 1 would not reproduce the profile") {
        const auto v = rational_at_one(2, 4, 3);
        CHECK(std::abs((2.0 * v[1] / v[2] - 1.0) - 4.0) > 1.0);
        CHECK_THAT(rational_recover(v[0], v[1], v[2]).b, WithinAbs(4.0, 1e-12));
    }
    SECTION("random triples round trip") {
        std::mt19937_64 rng(30);
        for (int t = 0; t < 1000; ++t) {
            const double a = testing::uniform(rng, -5, 5);
            const double b = testing::uniform(rng, -0.5, 5);
            double c = testing::uniform(rng, -5, 5);
            if (std::abs(c) < 1e-3) c = 1e-3;
            const auto v = rational_at_one(a, b, c);
            const auto r = rational_recover(v[0], v[1], v[2]);
            REQUIRE_THAT(r.a, WithinAbs(a, 1e-10 * std::max(1.0, std::abs(a))));
            REQUIRE_THAT(r.b, WithinAbs(b, 1e-10 * std::max(1.0, std::abs(b))));
            REQUIRE_THAT(r.c, WithinAbs(c, 1e-10 * std::max(1.0, std::abs(c))));
            REQUIRE_THAT(r(1.7), WithinAbs(a + c / (1.7 + b), 1e-10));
        }
    }
}

TEST_CASE("profile derivative estimation") {
    auto f = [](double t) { return 2.0 + 3.0 / (t + 4.0); };
    ProfileSamples p;
    for (int k = -2; k <= 2; ++k) {
        p.ts.push_back(1.0 + k * 1e-2);
        p.ds.push_back(f(p.ts.back()));
    }
    const auto d = estimate_derivatives(p, 1.0);
    CHECK_THAT(d.value, WithinAbs(2.6, 1e-12));
    CHECK_THAT(d.first, WithinAbs(-0.12, 1e-8));
    CHECK_THAT(d.second, WithinAbs(0.048, 1e-5));

    // The 5-point weights are the central difference with one Richardson level.
    const double h = 1e-2;
    auto cd = [&](double s) { return (f(1 + s) - f(1 - s)) / (2 * s); };
    CHECK_THAT(d.first, WithinAbs((4 * cd(h) - cd(2 * h)) / 3, 1e-13));

    ProfileSamples flat{p.ts, std::vector<double>(5, 7.0)};
    const auto z = estimate_derivatives(flat, 1.0);
    CHECK_THAT(z.value, WithinAbs(7.0, 1e-12));
    CHECK_THAT(z.first, WithinAbs(0.0, 1e-9));
    CHECK_THAT(z.second, WithinAbs(0.0, 1e-5));

    ProfileSamples few{{0.99, 1.0, 1.01}, {1, 1, 1}};
    expect_error(ErrorKind::InsufficientSamples, [&] { estimate_derivatives(few, 1.0); });
    expect_error(ErrorKind::InsufficientSamples, [&] { estimate_derivatives(p, 0.5); });
}

TEST_CASE("VTI recovery") {
    SECTION("isotropic data: step 1 products") {
        const VtiParams iso{3, 3, 1, 1, 1, 1};
        const auto s = synthesize_vti_closed(iso, vti_design());
        const auto &z1 = s[kProfilePoints / 2].z;
        const auto &z2 = s.back().z;
        CHECK_THAT(z2(0, 0).real() * z2(0, 0).real() - z1(0, 0).real() * z1(0, 0).real(), WithinAbs(1.0, 1e-14));
        const auto r = recover_vti(s);
        CHECK(vti_error(r.params, iso) <= 1e-8);
    }
    SECTION("documented instance") {
        const VtiParams p{10, 8, 3, 2, 1.5, 2};
        CHECK(vti_error(recover_vti(synthesize_vti_closed(p, vti_design())).params, p) <= 1e-8);
    }
    SECTION("random media, closed-form and pipeline samples") {
        std::mt19937_64 rng(31);
        for (int t = 0; t < 50; ++t) {
            const auto p = testing::random_vti(rng);
            const auto rc = recover_vti(synthesize_vti_closed(p, vti_design()));
            REQUIRE(vti_error(rc.params, p) <= 1e-8);
            CHECK(rc.max_sample_mismatch <= 1e-8);
            const auto rn = recover_vti(synthesize(MaterialParams{from_vti(p), p.rho, {}}, vti_design()));
            REQUIRE(vti_error(rn.params, p) <= 1e-6);
        }
    }
    SECTION("negative coupling modulus takes the negative branch") {
        const VtiParams p{6, 5, -1.5, 1.2, 1.0, 1.4};
        CHECK(vti_error(recover_vti(synthesize_vti_closed(p, vti_design())).params, p) <= 1e-8);
    }
    SECTION("missing samples") {
        auto dirs = vti_design();
        dirs.pop_back(); // drop |m| = sqrt 2
        expect_error(ErrorKind::MissingSample, [&] { recover_vti(synthesize_vti_closed({10, 8, 3, 2, 1.5, 2}, dirs)); });
        const std::vector<double> sparse{0.9, 1.0, 1.1, 2.0};
        expect_error(ErrorKind::InsufficientSamples,
                     [&] { recover_vti(synthesize_vti_closed({10, 8, 3, 2, 1.5, 2}, vti_design(sparse))); });
    }
    SECTION("inconsistent data is reported at step 4") {
        auto s = synthesize_vti_closed({10, 8, 3, 2, 1.5, 2}, vti_design());
        s[kProfilePoints / 2].z(2, 2) *= 3.0;
        expect_error(ErrorKind::NegativeRadicand, [&] { recover_vti(s); });
    }
}

TEST_CASE("VTI gradient recovery") {
    SECTION("constant medium gives zero gradients") {
        const VtiParams p{10, 8, 3, 2, 1.5, 2};
        MaterialParams mp{from_vti(p), p.rho, MaterialGradient{}};
        const auto s = synthesize(mp, vti_design());
        const auto g = recover_vti_gradient(s, recover_vti(s));
        for (const auto &gj : g)
            for (double v : {gj.drho, gj.dc1111, gj.dc1313, gj.dc3333, gj.dc1133, gj.dc1212}) CHECK(std::abs(v) <= 1e-9);
    }
    SECTION("documented linear field") {
        // rho = 2 + 0.1 y1, C1313 = 2 + 0.05 y1 at y = 0.
        const VtiParams p{10, 8, 3, 2, 1.5, 2};
        MaterialGradient grad;
        VtiParams d{};
        d.c1313 = 0.05;
        grad.dstiffness[0] = detail::vti_tensor(d);
        grad.drho[0] = 0.1;
        const auto s = synthesize(MaterialParams{from_vti(p), p.rho, grad}, vti_design());
        const auto g = recover_vti_gradient(s, recover_vti(s));
        CHECK_THAT(g[0].drho, WithinAbs(0.1, 1e-7));
        CHECK_THAT(g[0].dc1313, WithinAbs(0.05, 1e-7));
        CHECK_THAT(g[0].dc1111, WithinAbs(0.0, 1e-7));
        CHECK_THAT(g[1].drho, WithinAbs(0.0, 1e-9));
    }
    SECTION("random fields in all three directions") {
        std::mt19937_64 rng(32);
        for (int t = 0; t < 20; ++t) {
            const auto p = testing::random_vti(rng);
            const MaterialParams mp{from_vti(p), p.rho, testing::random_vti_gradient(rng)};
            const auto s = synthesize(mp, vti_design());
            const auto g = recover_vti_gradient(s, recover_vti(s));
            for (int j = 0; j < 3; ++j) {
                const auto d = read_vti(mp.gradient->dstiffness[j], mp.gradient->drho[j]);
                const double tol = 1e-6 * 0.1;
                CHECK_THAT(g[j].drho, WithinAbs(d.rho, tol));
                CHECK_THAT(g[j].dc1111, WithinAbs(d.c1111, tol));
                CHECK_THAT(g[j].dc3333, WithinAbs(d.c3333, tol));
                CHECK_THAT(g[j].dc1133, WithinAbs(d.c1133, tol));
                CHECK_THAT(g[j].dc1313, WithinAbs(d.c1313, tol));
                CHECK_THAT(g[j].dc1212, WithinAbs(d.c1212, tol));
            }
        }
    }
    SECTION("missing dZ") {
        const VtiParams p{10, 8, 3, 2, 1.5, 2};
        const auto s = synthesize_vti_closed(p, vti_design());
        expect_error(ErrorKind::MissingSample, [&] { recover_vti_gradient(s, recover_vti(s)); });
    }
}

TEST_CASE("orthorhombic recovery") {
    SECTION("isotropic embedding") {
        const OrthoParams iso = to_ortho({3, 3, 1, 1, 1, 1});
        CHECK(ortho_error(recover_ortho(synthesize_ortho_closed(iso, ortho_design())).params, iso) <= 1e-8);
    }
    SECTION("VTI embedded as orthorhombic matches the VTI scheme") {
        const VtiParams v{10, 8, 3, 2, 1.5, 2};
        const auto ro = recover_ortho(synthesize_ortho_closed(to_ortho(v), ortho_design())).params;
        const auto rv = recover_vti(synthesize_vti_closed(v, vti_design())).params;
        CHECK_THAT(ro.c1111, WithinRel(rv.c1111, 1e-8));
        CHECK_THAT(ro.c1133, WithinRel(rv.c1133, 1e-8));
        CHECK_THAT(ro.c1313, WithinRel(rv.c1313, 1e-8));
        CHECK_THAT(ro.rho, WithinRel(rv.rho, 1e-8));
    }
    SECTION("random media") {
        std::mt19937_64 rng(33);
        for (int t = 0; t < 50; ++t) {
            const auto p = testing::random_ortho(rng);
            const auto r = recover_ortho(synthesize_ortho_closed(p, ortho_design()));
            REQUIRE(ortho_error(r.params, p) <= 1e-8);
        }
    }
    SECTION("the oblique sample is required") {
        auto dirs = ortho_design();
        dirs.pop_back();
        expect_error(ErrorKind::MissingSample,
                     [&] { recover_ortho(synthesize_ortho_closed(to_ortho({3, 3, 1, 1, 1, 1}), dirs)); });
    }
}

TEST_CASE("Gamma-hat and the x-ray identity") {
    const MaterialParams iso{from_isotropic(1, 1), 1.0, {}};
    const Mat3 g = gamma_hat(iso, Vec3::UnitZ());
    CHECK((g - Mat3(Vec3(0.5, 0.5, 0.25).asDiagonal())).norm() <= 1e-15);
    CHECK((gamma_hat(MaterialParams{from_isotropic(1, 1), 2.0, {}}, Vec3::Zero()) - 0.5 * Mat3::Identity()).norm() <=
          1e-15);

    const DirectionPair dir(Vec3::UnitZ(), Vec3::UnitX());
    CHECK(xray_check(iso, dir).gap <= 1e-6);
    CHECK(xray_check(iso, DirectionPair(Vec3::UnitZ(), 2.0 * Vec3::UnitX())).gap <= 1e-6);

    std::mt19937_64 rng(34);
    const MaterialParams rnd{testing::random_convex_tensor(rng), 1.3, {}};
    for (int t = 0; t < 10; ++t) {
        const Eigen::SelfAdjointEigenSolver<Mat3> es(gamma_hat(rnd, random_unit(rng) * 1.7));
        CHECK(es.eigenvalues()(0) > 0.0);
        CHECK(xray_check(rnd, random_direction_pair(rng)).gap <= 1e-6);
    }
}

TEST_CASE("homogeneous recovery") {
    SECTION("random anisotropic medium from 40 directions") {
        std::mt19937_64 rng(35);
        for (int t = 0; t < 5; ++t) {
            const MaterialParams mp{testing::random_convex_tensor(rng), testing::uniform(rng, 0.5, 2.0), {}};
            const auto rec = recover_homogeneous(synthesize_gamma(mp, homogeneous_design()));
            CHECK(rec.rank == 22);
            CHECK(rec.residual <= 1e-10);
            CHECK((rec.params.stiffness - mp.stiffness).max_abs() <= 1e-9 * mp.stiffness.max_abs());
            CHECK_THAT(rec.params.rho, WithinRel(mp.rho, 1e-9));
        }
    }
    SECTION("isotropic data has no anisotropic residue") {
        const MaterialParams mp{from_isotropic(1.5, 0.8), 1.2, {}};
        const auto rec = recover_homogeneous(synthesize_gamma(mp, homogeneous_design()));
        CHECK((rec.params.stiffness - mp.stiffness).max_abs() <= 1e-9);
    }
    SECTION("unit-norm directions cannot separate rho from the moduli") {
        std::vector<Vec3> unit;
        std::mt19937_64 rng(36);
        for (int i = 0; i < 40; ++i) unit.push_back(random_unit(rng));
        expect_error(ErrorKind::RankDeficientDesign,
                     [&] { recover_homogeneous(synthesize_gamma({from_isotropic(1, 1), 1.0, {}}, unit)); });
    }
    SECTION("coplanar directions are rank deficient") {
        std::vector<Vec3> plane;
        std::mt19937_64 rng(37);
        for (int i = 0; i < 40; ++i) {
            Vec3 v = random_unit(rng);
            v(2) = 0.0;
            plane.push_back(v.normalized() * testing::uniform(rng, 0.5, 2.0));
        }
        expect_error(ErrorKind::RankDeficientDesign,
                     [&] { recover_homogeneous(synthesize_gamma({from_isotropic(1, 1), 1.0, {}}, plane)); });
    }
}
