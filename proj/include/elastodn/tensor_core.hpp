#ifndef ELASTODN_TENSOR_CORE_HPP
#define ELASTODN_TENSOR_CORE_HPP

// Rank-4 elastic stiffness tensors with minor and major symmetry, stored as
// the 21 upper-triangular entries of the 6x6 Voigt matrix. Voigt pairs are
// (11,22,33,23,13,12) -> (0..5), zero-based throughout the code.

#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace elastodn {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using CMat3 = Eigen::Matrix3cd;
using CVec3 = Eigen::Vector3cd;
using Complex = std::complex<double>;

constexpr int voigt_index(int i, int j) {
    if (i == j) return i;
    return 6 - i - j; // (1,2)->3, (0,2)->4, (0,1)->5
}

class StiffnessTensor {
public:
    static constexpr int kNumComponents = 21;

    StiffnessTensor() { m_upper.fill(0.0); }

    /// Takes the upper triangle of `voigt`; the lower triangle is ignored.
    static StiffnessTensor from_voigt(const Mat6 &voigt) {
        StiffnessTensor c;
        for (int I = 0; I < 6; ++I)
            for (int J = I; J < 6; ++J) c.m_upper[slot(I, J)] = voigt(I, J);
        return c;
    }

    static StiffnessTensor from_components(const std::array<double, kNumComponents> &upper) {
        StiffnessTensor c;
        c.m_upper = upper;
        return c;
    }

    double voigt(int I, int J) const { return m_upper[slot(I, J)]; }

    double operator()(int i, int j, int k, int l) const {
        return voigt(voigt_index(i, j), voigt_index(k, l));
    }

    StiffnessTensor with_voigt(int I, int J, double value) const {
        StiffnessTensor c = *this;
        c.m_upper[slot(I, J)] = value;
        return c;
    }

    const std::array<double, kNumComponents> &components() const { return m_upper; }

    Mat6 voigt_matrix() const {
        Mat6 v;
        for (int I = 0; I < 6; ++I)
            for (int J = 0; J < 6; ++J) v(I, J) = voigt(I, J);
        return v;
    }

    /// Voigt matrix with shear rows and columns scaled by sqrt(2); its
    /// quadratic form on Mandel strain vectors equals sum C^{ijkl} e_ij e_kl.
    Mat6 mandel_matrix() const {
        Mat6 m = voigt_matrix();
        const double s = std::sqrt(2.0);
        for (int I = 3; I < 6; ++I) {
            m.row(I) *= s;
            m.col(I) *= s;
        }
        return m;
    }

    double max_abs() const {
        double r = 0.0;
        for (double v : m_upper) r = std::max(r, std::abs(v));
        return r;
    }

    StiffnessTensor &operator+=(const StiffnessTensor &o) {
        for (int s = 0; s < kNumComponents; ++s) m_upper[s] += o.m_upper[s];
        return *this;
    }
    StiffnessTensor &operator*=(double a) {
        for (double &v : m_upper) v *= a;
        return *this;
    }
    friend StiffnessTensor operator+(StiffnessTensor a, const StiffnessTensor &b) { return a += b; }
    friend StiffnessTensor operator-(StiffnessTensor a, const StiffnessTensor &b) { return a += (-1.0) * b; }
    friend StiffnessTensor operator*(double s, StiffnessTensor a) { return a *= s; }
    friend bool operator==(const StiffnessTensor &, const StiffnessTensor &) = default;

    /// Flat index of the Voigt pair (I, J) in the 21-entry storage.
    static constexpr int slot(int I, int J) {
        if (I > J) std::swap(I, J);
        return I * 6 - I * (I - 1) / 2 + (J - I);
    }

private:
    std::array<double, kNumComponents> m_upper;
};

struct MaterialGradient {
    std::array<StiffnessTensor, 3> dstiffness{}; // d/dy^j of every component
    std::array<double, 3> drho{0.0, 0.0, 0.0};
};

struct MaterialParams {
    StiffnessTensor stiffness;
    double rho = 1.0;
    std::optional<MaterialGradient> gradient;
};

struct VtiParams {
    double c1111 = 0, c3333 = 0, c1133 = 0, c1313 = 0, c1212 = 0;
    double rho = 1.0;

    double c1122() const { return c1111 - 2.0 * c1212; }
    friend bool operator==(const VtiParams &, const VtiParams &) = default;
};

struct OrthoParams {
    double c1111 = 0, c2222 = 0, c3333 = 0;
    double c1122 = 0, c1133 = 0, c2233 = 0;
    double c2323 = 0, c1313 = 0, c1212 = 0;
    double rho = 1.0;
    friend bool operator==(const OrthoParams &, const OrthoParams &) = default;
};

struct Jacobian {
    Mat3 entries = Mat3::Identity();

    bool invertible() const {
        const double norm = entries.norm();
        return std::abs(entries.determinant()) > 1e-12 * norm * norm * norm;
    }
};

struct ConvexityReport {
    bool convex = false;
    double delta = 0.0; ///< minimum eigenvalue of the elastic quadratic form
};

inline StiffnessTensor from_isotropic(double lambda, double mu) {
    Mat6 v = Mat6::Zero();
    for (int I = 0; I < 3; ++I) {
        for (int J = 0; J < 3; ++J) v(I, J) = lambda;
        v(I, I) = lambda + 2.0 * mu;
        v(I + 3, I + 3) = mu;
    }
    return StiffnessTensor::from_voigt(v);
}

inline ConvexityReport strongly_convex(const StiffnessTensor &c) {
    Eigen::SelfAdjointEigenSolver<Mat6> es(c.mandel_matrix(), Eigen::EigenvaluesOnly);
    const double delta = es.eigenvalues()(0);
    return {delta > 1e-10 * c.max_abs() && c.max_abs() > 0.0, delta};
}

inline void require_convex(const StiffnessTensor &c, const std::string &what) {
    const auto report = strongly_convex(c);
    if (!report.convex)
        throw Error(ErrorKind::ConvexityViolation,
                    what + " is not strongly convex (min eigenvalue " + std::to_string(report.delta) + ")");
}

namespace detail {

inline StiffnessTensor vti_tensor(const VtiParams &p) {
    Mat6 v = Mat6::Zero();
    v(0, 0) = v(1, 1) = p.c1111;
    v(2, 2) = p.c3333;
    v(0, 1) = p.c1122();
    v(0, 2) = v(1, 2) = p.c1133;
    v(3, 3) = v(4, 4) = p.c1313;
    v(5, 5) = p.c1212;
    return StiffnessTensor::from_voigt(v);
}

inline StiffnessTensor ortho_tensor(const OrthoParams &p) {
    Mat6 v = Mat6::Zero();
    v(0, 0) = p.c1111;
    v(1, 1) = p.c2222;
    v(2, 2) = p.c3333;
    v(0, 1) = p.c1122;
    v(0, 2) = p.c1133;
    v(1, 2) = p.c2233;
    v(3, 3) = p.c2323;
    v(4, 4) = p.c1313;
    v(5, 5) = p.c1212;
    return StiffnessTensor::from_voigt(v);
}

} // namespace detail

/// Checks the closed-form VTI convexity inequalities and builds the tensor.
inline StiffnessTensor from_vti(const VtiParams &p) {
    const bool ok = p.c1313 > 0 && p.c1212 > 0 && p.c3333 > 0 &&
                    (p.c1111 + p.c1122()) * p.c3333 > 2.0 * p.c1133 * p.c1133;
    if (!ok) throw Error(ErrorKind::ConvexityViolation, "VTI moduli violate strong convexity");
    if (p.rho <= 0) throw Error(ErrorKind::ConvexityViolation, "density must be positive");
    return detail::vti_tensor(p);
}

inline StiffnessTensor from_ortho(const OrthoParams &p) {
    if (p.rho <= 0) throw Error(ErrorKind::ConvexityViolation, "density must be positive");
    StiffnessTensor c = detail::ortho_tensor(p);
    require_convex(c, "orthorhombic tensor");
    return c;
}

inline VtiParams read_vti(const StiffnessTensor &c, double rho) {
    return {c.voigt(0, 0), c.voigt(2, 2), c.voigt(0, 2), c.voigt(4, 4), c.voigt(5, 5), rho};
}

inline OrthoParams read_ortho(const StiffnessTensor &c, double rho) {
    return {c.voigt(0, 0), c.voigt(1, 1), c.voigt(2, 2), c.voigt(0, 1), c.voigt(0, 2),
            c.voigt(1, 2), c.voigt(3, 3), c.voigt(4, 4), c.voigt(5, 5), rho};
}

inline OrthoParams to_ortho(const VtiParams &p) {
    return {p.c1111, p.c1111, p.c3333, p.c1122(), p.c1133, p.c1133, p.c1313, p.c1313, p.c1212, p.rho};
}

/// C~^{abcd} = J^a_i J^b_j J^c_k J^d_l C^{ijkl}, one slot at a time.
inline StiffnessTensor transform_tensor(const StiffnessTensor &c, const Jacobian &jac) {
    if (!jac.invertible()) throw Error(ErrorKind::SingularJacobian, "Jacobian is numerically singular");
    const Mat3 &J = jac.entries;

    std::array<double, 81> a{}, b{};
    auto at = [](int i, int j, int k, int l) { return ((i * 3 + j) * 3 + k) * 3 + l; };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) a[at(i, j, k, l)] = c(i, j, k, l);

    // Contract one index per pass; the contracted slot rotates to the back.
    for (int pass = 0; pass < 4; ++pass) {
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l)
                    for (int p = 0; p < 3; ++p) {
                        double s = 0.0;
                        for (int i = 0; i < 3; ++i) s += J(p, i) * a[at(i, j, k, l)];
                        b[at(j, k, l, p)] = s;
                    }
        std::swap(a, b);
    }

    Mat6 v;
    constexpr int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
    for (int I = 0; I < 6; ++I)
        for (int K = 0; K < 6; ++K) v(I, K) = a[at(pairs[I][0], pairs[I][1], pairs[K][0], pairs[K][1])];
    return StiffnessTensor::from_voigt(v);
}

} // namespace elastodn

#endif // ELASTODN_TENSOR_CORE_HPP
