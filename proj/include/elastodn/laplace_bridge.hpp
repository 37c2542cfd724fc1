#ifndef ELASTODN_LAPLACE_BRIDGE_HPP
#define ELASTODN_LAPLACE_BRIDGE_HPP

// One-dimensional analog of the hyperbolic-to-elliptic reduction: the
// finite-time Laplace transform of the boundary traction produced by the
// data f(t) = t^2 approaches chi1(tau; T) times the elliptic DN value of
// rho tau^2 w - (kappa w')' = 0, with an error of order (tau T)^3 e^{-tau T}.
// The wave solver and the elliptic solver share the same spatial operator,
// so their mismatch is a pure time-discretization floor.

#include "boundary_symbol.hpp"
#include "errors.hpp"
#include "tensor_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace elastodn {

struct TimeSeries {
    double dt = 1.0;
    std::vector<double> values;

    double duration() const { return values.empty() ? 0.0 : dt * static_cast<double>(values.size() - 1); }
};

struct MediumPiece {
    double x_end = 1.0; ///< right end of the piece
    double rho = 1.0;
    double kappa = 1.0;
};

/// Piecewise-constant (rho, kappa) on [0, length]; pieces ordered by x_end,
/// the last one ending at `length`.
struct Medium1D {
    double length = 1.0;
    std::vector<MediumPiece> pieces{MediumPiece{}};

    void validate() const {
        if (!(length > 0.0) || pieces.empty()) throw Error(ErrorKind::InvalidArgument, "medium needs positive length");
        double prev = 0.0;
        for (const auto &p : pieces) {
            if (!(p.rho > 0.0 && p.kappa > 0.0))
                throw Error(ErrorKind::InvalidArgument, "medium coefficients must be positive");
            if (!(p.x_end > prev)) throw Error(ErrorKind::InvalidArgument, "medium pieces must be increasing");
            prev = p.x_end;
        }
        if (std::abs(prev - length) > 1e-12 * length)
            throw Error(ErrorKind::InvalidArgument, "last piece must end at the medium length");
    }

    const MediumPiece &at(double x) const {
        for (const auto &p : pieces)
            if (x < p.x_end) return p;
        return pieces.back();
    }

    double max_speed() const {
        double c = 0.0;
        for (const auto &p : pieces) c = std::max(c, std::sqrt(p.kappa / p.rho));
        return c;
    }

    static Medium1D homogeneous(double length = 1.0, double rho = 1.0, double kappa = 1.0) {
        return {length, {MediumPiece{length, rho, kappa}}};
    }
};

struct WaveConfig {
    int cells = 1000;
    double cfl = 0.9;
    bool auto_refine = true;
};

/// chi1(tau; T) = int_0^T t^2 e^{-tau t} dt.
inline double chi1(double tau, double T) {
    if (!(tau > 0.0 && T > 0.0)) throw Error(ErrorKind::InvalidArgument, "chi1 needs tau > 0 and T > 0");
    const double x = tau * T;
    const double t3 = 1.0 / (tau * tau * tau);
    if (x < 1.0) {
        // 2 - e^{-x}(x^2 + 2x + 2) = sum_k (-1)^k x^{k+3} / (k! (k+3)), stable for small x.
        double term = x * x * x, sum = 0.0;
        for (int k = 0; k < 40; ++k) {
            sum += term / (k + 3);
            term *= -x / (k + 1);
        }
        return sum * t3;
    }
    return 2.0 * t3 - std::exp(-x) * (T * T / tau + 2.0 * T / (tau * tau) + 2.0 * t3);
}

/// Composite trapezoid approximation of int_0^T u e^{-tau t} dt.
inline double finite_laplace(const TimeSeries &ts, double tau) {
    if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "Laplace parameter must be positive");
    const std::size_t n = ts.values.size();
    if (n < 2) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
        sum += w * ts.values[k] * std::exp(-tau * ts.dt * static_cast<double>(k));
    }
    return sum * ts.dt;
}

/// Boundary samples of f(t) = t^2 at spacing close to `dt` on [0, T].
inline TimeSeries quadratic_ramp(double T, double dt) {
    const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    TimeSeries ts{T / static_cast<double>(steps), std::vector<double>(steps + 1)};
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = ts.dt * static_cast<double>(k);
        ts.values[k] = t * t;
    }
    return ts;
}

namespace detail {

struct Grid1D {
    int cells;
    double dx;
    std::vector<double> kappa_half; ///< kappa at x_{i+1/2}, i = 0..cells-1
    std::vector<double> rho_half;
    std::vector<double> mass; ///< nodal mass density (dual-cell average of rho)

    Grid1D(const Medium1D &med, int n) : cells(n), dx(med.length / n), kappa_half(n), rho_half(n), mass(n + 1, 0.0) {
        for (int i = 0; i < n; ++i) {
            const auto &p = med.at((i + 0.5) * dx);
            kappa_half[i] = p.kappa;
            rho_half[i] = p.rho;
        }
        for (int i = 0; i <= n; ++i) {
            const double left = i > 0 ? rho_half[i - 1] : 0.0;
            const double right = i < n ? rho_half[i] : 0.0;
            mass[i] = (i == 0 || i == n) ? (left + right) : 0.5 * (left + right);
        }
    }

    /// (kappa u_x)_x at interior node i.
    double flux_divergence(const std::vector<double> &u, int i) const {
        return (kappa_half[i] * (u[i + 1] - u[i]) - kappa_half[i - 1] * (u[i] - u[i - 1])) / (dx * dx);
    }

    /// kappa u_x(0) from the half-cell balance, second order.
    double boundary_flux(const std::vector<double> &u, double u_tt0) const {
        return kappa_half[0] * (u[1] - u[0]) / dx - 0.5 * dx * rho_half[0] * u_tt0;
    }
};

/// Quadratic interpolation of a sampled signal (zero before t = 0).
inline double sample_at(const TimeSeries &ts, double t) {
    if (t <= 0.0) return 0.0;
    const double s = t / ts.dt;
    const auto n = static_cast<long>(ts.values.size());
    long k = static_cast<long>(std::floor(s));
    k = std::clamp(k, 1L, n - 2);
    const double x = s - static_cast<double>(k);
    const double ym = ts.values[k - 1], y0 = ts.values[k], yp = ts.values[k + 1];
    return y0 + 0.5 * x * (yp - ym) + 0.5 * x * x * (yp - 2.0 * y0 + ym);
}

} // namespace detail

struct WaveResult {
    TimeSeries traction;      ///< kappa u_x(0, t)
    TimeSeries field_energy;  ///< int rho u_t^2 + kappa u_x^2 dx
    TimeSeries boundary_work; ///< int_0^t 2 (-kappa u_x(0,s)) f'(s) ds
};

/// Leapfrog solution of rho u_tt = (kappa u_x)_x on [0, L] with u(0, t)
/// given by `boundary`, u(L, t) = 0 and zero initial data.
inline WaveResult simulate_wave_1d(const Medium1D &med, const TimeSeries &boundary, double T,
                                   const WaveConfig &cfg = {}) {
    med.validate();
    if (boundary.values.size() < 3) throw Error(ErrorKind::InvalidArgument, "boundary series too short");
    if (T > boundary.duration() * (1.0 + 1e-12)) throw Error(ErrorKind::InvalidArgument, "boundary data shorter than T");
    if (std::abs(boundary.values[0]) > 0.0)
        throw Error(ErrorKind::InvalidArgument, "boundary data must vanish at t = 0");

    const detail::Grid1D grid(med, cfg.cells);
    const double dt_max = cfg.cfl * grid.dx / med.max_speed();
    int sub = 1;
    if (boundary.dt > dt_max * (1.0 + 1e-12)) {
        if (!cfg.auto_refine)
            throw Error(ErrorKind::CflViolation, "time step " + std::to_string(boundary.dt) + " exceeds CFL limit " +
                                                     std::to_string(dt_max));
        sub = static_cast<int>(std::ceil(boundary.dt / dt_max));
    }
    const double dt = boundary.dt / sub;
    const auto out_steps = static_cast<long>(std::llround(T / boundary.dt));
    const long steps = out_steps * sub;
    const int n = grid.cells;

    const auto nb = static_cast<long>(boundary.values.size());
    auto f = [&](long k) {
        if (sub != 1) return detail::sample_at(boundary, k * dt);
        if (k < 0) return 0.0;
        if (k < nb) return boundary.values[k];
        // One step past the data: quadratic extrapolation.
        return 3.0 * boundary.values[nb - 1] - 3.0 * boundary.values[nb - 2] + boundary.values[nb - 3];
    };

    std::vector<double> prev(n + 1, 0.0), cur(n + 1, 0.0), next(n + 1, 0.0);
    cur[0] = f(0);
    WaveResult res;
    for (auto *ts : {&res.traction, &res.field_energy, &res.boundary_work}) {
        ts->dt = boundary.dt;
        ts->values.assign(out_steps + 1, 0.0);
    }

    double work = 0.0, last_power = 0.0;
    for (long k = 0; k <= steps; ++k) {
        // Advance to level k+1 (needed for central time differences at level k).
        for (int i = 1; i < n; ++i)
            next[i] = 2.0 * cur[i] - prev[i] + dt * dt * grid.flux_divergence(cur, i) / grid.mass[i];
        next[0] = f(k + 1);
        next[n] = 0.0;

        const double ftt = (f(k + 1) - 2.0 * f(k) + f(k - 1)) / (dt * dt);
        const double ft = (f(k + 1) - f(k - 1)) / (2.0 * dt);
        const double sigma = grid.boundary_flux(cur, ftt);
        const double power = 2.0 * (-sigma) * ft;
        if (k > 0) work += 0.5 * dt * (power + last_power);
        last_power = power;

        if (k % sub == 0) {
            const long o = k / sub;
            res.traction.values[o] = sigma;
            res.boundary_work.values[o] = work;
            double e = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double ut = (next[i] - prev[i]) / (2.0 * dt);
                const double w = (i == 0 || i == n) ? 0.5 : 1.0;
                e += w * grid.mass[i] * ut * ut * grid.dx;
            }
            for (int i = 0; i < n; ++i) {
                const double ux = (cur[i + 1] - cur[i]) / grid.dx;
                e += grid.kappa_half[i] * ux * ux * grid.dx;
            }
            res.field_energy.values[o] = e;
        }
        std::swap(prev, cur);
        std::swap(cur, next);
    }
    return res;
}

inline TimeSeries solve_wave_1d(const Medium1D &med, const TimeSeries &boundary, double T, const WaveConfig &cfg = {}) {
    return simulate_wave_1d(med, boundary, T, cfg).traction;
}

/// kappa w'(0) for rho tau^2 w - (kappa w')' = 0, w(0) = 1, w(L) = 0, on the
/// wave solver's grid and with the same boundary-flux stencil.
inline double elliptic_dn_1d(const Medium1D &med, double tau, const WaveConfig &cfg = {}) {
    med.validate();
    const detail::Grid1D grid(med, cfg.cells);
    const int n = grid.cells;
    const double h2 = grid.dx * grid.dx;
    // Thomas algorithm on interior nodes 1..n-1.
    std::vector<double> lower(n + 1), diag(n + 1), upper(n + 1), rhs(n + 1, 0.0), w(n + 1, 0.0);
    for (int i = 1; i < n; ++i) {
        lower[i] = -grid.kappa_half[i - 1] / h2;
        upper[i] = -grid.kappa_half[i] / h2;
        diag[i] = grid.mass[i] * tau * tau + (grid.kappa_half[i - 1] + grid.kappa_half[i]) / h2;
    }
    rhs[1] = -lower[1] * 1.0;
    for (int i = 2; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    w[0] = 1.0;
    w[n] = 0.0;
    for (int i = n - 1; i >= 1; --i) w[i] = (rhs[i] - (i + 1 < n ? upper[i] * w[i + 1] : 0.0)) / diag[i];
    return grid.boundary_flux(w, tau * tau * w[0]);
}

struct EnergyReport {
    double field_energy = 0.0;
    double boundary_work = 0.0;
    double gap = 0.0; ///< |field_energy - boundary_work|
};

/// Field energy against the boundary pairing int_0^T 2 (Lambda f) f' at t = T
/// for f(t) = t^2, where Lambda f = -kappa u_x(0) is the outward traction.
inline EnergyReport energy_balance_1d(const Medium1D &med, double T, const WaveConfig &cfg = {}) {
    const double dt = cfg.cfl * (med.length / cfg.cells) / med.max_speed();
    const TimeSeries f = quadratic_ramp(T, dt);
    const WaveResult r = simulate_wave_1d(med, f, T, cfg);
    EnergyReport e;
    e.field_energy = r.field_energy.values.back();
    e.boundary_work = r.boundary_work.values.back();
    e.gap = std::abs(e.field_energy - e.boundary_work);
    return e;
}

struct BridgeRow {
    double T = 0.0;
    double laplace_traction = 0.0; ///< L_T (kappa u_x(0, .)) at tau
    double elliptic = 0.0;         ///< chi1(tau; T) times the elliptic DN value
    double gap = 0.0;
    double bound_shape = 0.0; ///< (tau T)^3 e^{-tau T}
};

struct BridgeReport {
    double tau = 0.0;
    std::vector<BridgeRow> rows;
    double fitted_constant = 0.0; ///< max gap / bound_shape
    int monotone_run = 0;         ///< leading run of strictly decreasing gaps (count of T values)
    double log10_drop = 0.0;      ///< log10(first gap / smallest gap)
    bool decaying = false;        ///< monotone_run >= 3
};

inline BridgeReport bridge_check(const Medium1D &med, double tau, const std::vector<double> &T_list,
                                 const WaveConfig &cfg = {}) {
    if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
    if (T_list.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one T");
    for (std::size_t i = 1; i < T_list.size(); ++i)
        if (!(T_list[i] > T_list[i - 1])) throw Error(ErrorKind::InvalidArgument, "T values must increase");
    med.validate();

    BridgeReport rep;
    rep.tau = tau;
    const double dn = elliptic_dn_1d(med, tau, cfg);
    const double dt = cfg.cfl * (med.length / cfg.cells) / med.max_speed();
    for (double T : T_list) {
        if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
        const TimeSeries f = quadratic_ramp(T, dt);
        const TimeSeries sigma = solve_wave_1d(med, f, T, cfg);
        BridgeRow row;
        row.T = T;
        row.laplace_traction = finite_laplace(sigma, tau);
        row.elliptic = chi1(tau, T) * dn;
        row.gap = std::abs(row.laplace_traction - row.elliptic);
        const double x = tau * T;
        row.bound_shape = x * x * x * std::exp(-x);
        rep.fitted_constant = std::max(rep.fitted_constant, row.gap / row.bound_shape);
        rep.rows.push_back(row);
    }
    rep.monotone_run = 1;
    while (rep.monotone_run < static_cast<int>(rep.rows.size()) &&
           rep.rows[rep.monotone_run].gap < rep.rows[rep.monotone_run - 1].gap)
        ++rep.monotone_run;
    double smallest = rep.rows.front().gap;
    for (const auto &r : rep.rows) smallest = std::min(smallest, r.gap);
    rep.log10_drop = std::log10(rep.rows.front().gap / smallest);
    rep.decaying = rep.monotone_run >= 3;
    return rep;
}

/// Action of the flat half-space DN map on the boundary datum
/// e^{i x'.xi / h} psi for constant coefficients: Z(m = xi, n = e3) psi.
inline CVec3 halfspace_dn_action(const MaterialParams &params, const Vec2 &xi, double h, const CVec3 &psi) {
    if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "semiclassical parameter must be positive");
    const DirectionPair dir(Vec3::UnitZ(), Vec3(xi(0), xi(1), 0.0));
    return impedance(params.stiffness, params.rho, dir) * psi;
}

} // namespace elastodn

#endif // ELASTODN_LAPLACE_BRIDGE_HPP
