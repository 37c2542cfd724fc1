#ifndef ELASTODN_COMMANDS_HPP
#define ELASTODN_COMMANDS_HPP

// Forward, recovery and check pipelines behind the command-line tool. Each
// command returns a JSON report and a process exit status; failures surface
// as elastodn::Error and map through exit_code().

#include "boundary_symbol.hpp"
#include "errors.hpp"
#include "laplace_bridge.hpp"
#include "reconstruction.hpp"
#include "sampling.hpp"
#include "serialization.hpp"
#include "tensor_core.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace elastodn {

struct CommandResult {
    int exit_code = 0;
    json report;
};

enum class Grid { automatic, vti, ortho, homog, random };

inline Grid parse_grid(const std::string &s) {
    if (s == "auto") return Grid::automatic;
    if (s == "vti") return Grid::vti;
    if (s == "ortho") return Grid::ortho;
    if (s == "homog") return Grid::homog;
    if (s == "random") return Grid::random;
    throw Error(ErrorKind::Usage, "unknown grid '" + s + "'");
}

struct ForwardOptions {
    Grid grid = Grid::automatic;
    std::uint64_t seed = 1;
    int trials = 8; ///< random direction pairs for the random and homog grids
};

namespace detail {

/// Closed forms where they apply (n = e3 and, for orthorhombic media, m on a
/// coordinate axis); the generic factorization otherwise.
inline Impedance forward_impedance(Model model, const MaterialParams &mp, const DirectionPair &dir) {
    if (normal_is_e3(dir)) {
        const Vec3 &m = dir.m();
        const double norm = m.norm();
        if (model == Model::isotropic || model == Model::vti)
            return vti_impedance_closed(read_vti(mp.stiffness, mp.rho), Vec2(m(0), m(1)));
        if (model == Model::orthorhombic) {
            const OrthoParams p = read_ortho(mp.stiffness, mp.rho);
            if (std::abs(m(1) - norm) <= kDirTol * norm) return ortho_impedance_closed(p, TangentAxis::e2, norm);
            if (std::abs(m(0) - norm) <= kDirTol * norm) return ortho_impedance_closed(p, TangentAxis::e1, norm);
        }
    }
    return impedance(mp.stiffness, mp.rho, dir);
}

inline json matrix_json(const Mat3 &m) { return matrix_to_json(m); }

inline json derivatives_json(const Derivatives &d) {
    return {{"value", d.value}, {"first", d.first}, {"second", d.second}};
}

inline void emit(const std::optional<std::string> &out, const json &j) {
    if (out) write_json(*out, j);
}

} // namespace detail

/// Impedance (and Gamma-hat) samples for the chosen direction grid.
inline CommandResult cmd_forward(const std::string &params_path, const std::optional<std::string> &out_path,
                                 const ForwardOptions &opt = {}) {
    const ParamsFile pf = load_params(params_path);
    const MaterialParams mp = to_material(pf);

    Grid grid = opt.grid;
    if (grid == Grid::automatic) {
        switch (pf.model) {
        case Model::isotropic:
        case Model::vti: grid = Grid::vti; break;
        case Model::orthorhombic: grid = Grid::ortho; break;
        case Model::full: grid = Grid::homog; break;
        }
    }
    if (opt.trials < 0) throw Error(ErrorKind::Usage, "--trials must be non-negative");

    std::vector<DirectionPair> dirs;
    SamplesFile f;
    std::mt19937_64 rng(opt.seed);
    switch (grid) {
    case Grid::vti: dirs = vti_design(); break;
    case Grid::ortho: dirs = ortho_design(); break;
    case Grid::random:
        for (int i = 0; i < opt.trials; ++i) dirs.push_back(random_direction_pair(rng));
        break;
    case Grid::homog:
        f.gamma_hat = synthesize_gamma(mp, homogeneous_design(40, opt.seed));
        for (int i = 0; i < opt.trials; ++i) dirs.push_back(random_direction_pair(rng));
        break;
    case Grid::automatic: break;
    }

    for (const auto &dir : dirs) {
        ImpedanceSample s{dir, detail::forward_impedance(pf.model, mp, dir), std::nullopt};
        if (mp.gradient) {
            const SymbolTriple st = build_symbol(mp.stiffness, dir);
            std::array<CMat3, 3> dz;
            for (int j = 0; j < 3; ++j)
                dz[j] = impedance_derivative(st, mp.rho, symbol_derivative(*mp.gradient, j, dir), mp.gradient->drho[j]);
            s.dz = dz;
        }
        f.samples.push_back(std::move(s));
    }

    const json out = to_json(f);
    detail::emit(out_path, out);
    return {0, out};
}

enum class RecoverMode { vti, ortho, homog };

inline CommandResult cmd_recover(RecoverMode mode, const std::string &samples_path,
                                 const std::optional<std::string> &out_path) {
    const SamplesFile f = load_samples(samples_path);
    ParamsFile pf;
    json report;

    switch (mode) {
    case RecoverMode::vti: {
        const VtiRecovery rec = recover_vti(f.samples);
        pf = params_file(rec.params);
        report["mode"] = "vti";
        report["max_sample_mismatch"] = rec.max_sample_mismatch;
        report["profile"] = {{"a", rec.profile.a}, {"b", rec.profile.b}, {"c", rec.profile.c}};
        report["profile_derivatives"] = detail::derivatives_json(rec.profile_derivs);
        const bool have_dz = std::all_of(f.samples.begin(), f.samples.end(), [](const auto &s) { return s.dz.has_value(); });
        report["gradient_recovered"] = have_dz && !f.samples.empty();
        if (have_dz && !f.samples.empty()) {
            const auto g = recover_vti_gradient(f.samples, rec);
            std::array<std::map<std::string, double>, 3> grads;
            for (int j = 0; j < 3; ++j)
                grads[j] = {{"C1111", g[j].dc1111}, {"C3333", g[j].dc3333}, {"C1133", g[j].dc1133},
                            {"C1313", g[j].dc1313}, {"C1212", g[j].dc1212}, {"rho", g[j].drho}};
            pf.gradients = grads;
        }
        break;
    }
    case RecoverMode::ortho: {
        const OrthoRecovery rec = recover_ortho(f.samples);
        pf = params_file(rec.params);
        report["mode"] = "ortho";
        report["max_sample_mismatch"] = rec.max_sample_mismatch;
        break;
    }
    case RecoverMode::homog: {
        if (f.gamma_hat.empty()) throw Error(ErrorKind::MissingSample, "homogeneous recovery needs gamma_hat samples");
        const HomogeneousRecovery rec = recover_homogeneous(f.gamma_hat);
        require_convex(rec.params.stiffness, "recovered tensor");
        pf = params_file(rec.params.stiffness, rec.params.rho);
        report["mode"] = "homog";
        report["residual"] = rec.residual;
        report["rank"] = rec.rank;
        report["gamma_samples"] = f.gamma_hat.size();
        // The recovered medium's x-ray integral against pi (Re Z)^{-1} from each impedance sample.
        double worst = 0.0;
        for (const auto &s : f.samples) {
            const Mat3 lhs = xray_integral(rec.params, s.dir);
            const Mat3 rhs = xray_from_impedance(s.z);
            worst = std::max(worst, (lhs - rhs).norm() / rhs.norm());
        }
        report["xray_samples"] = f.samples.size();
        report["xray_max_gap"] = worst;
        break;
    }
    }

    pf.report = report;
    const json out = to_json(pf);
    detail::emit(out_path, out);
    return {0, out};
}

struct FactorCheckOptions {
    int trials = 100;
    std::uint64_t seed = 1;
    double tolerance = 1e-9; ///< factorization residual bound
    double contour_tolerance = 1e-8;
    int nodes = 256;
};

inline CommandResult cmd_factor_check(const std::string &params_path, const std::optional<std::string> &out_path,
                                      const FactorCheckOptions &opt = {}) {
    if (opt.trials <= 0) throw Error(ErrorKind::Usage, "--trials must be positive");
    const MaterialParams mp = to_material(load_params(params_path));

    std::mt19937_64 rng(opt.seed);
    double max_residual = 0.0, max_gap = 0.0, max_herm = 0.0;
    double min_imag = std::numeric_limits<double>::infinity();
    bool re_pd = true;
    for (int t = 0; t < opt.trials; ++t) {
        const DirectionPair dir = random_direction_pair(rng);
        const SymbolTriple st = build_symbol(mp.stiffness, dir);
        const Factorization fe = factor_eigen(st, mp.rho);
        const Factorization fc = factor_contour(st, mp.rho, opt.nodes);
        max_residual = std::max(max_residual, fe.residual);
        max_gap = std::max(max_gap, (fe.s0 - fc.s0).cwiseAbs().maxCoeff() / std::max(1.0, fe.s0.cwiseAbs().maxCoeff()));
        Eigen::ComplexEigenSolver<CMat3> es(fe.s0, false);
        for (int i = 0; i < 3; ++i) min_imag = std::min(min_imag, es.eigenvalues()(i).imag());
        const Impedance z = impedance_from_solvent(st, fe.s0);
        max_herm = std::max(max_herm, hermiticity_defect(z) / z.norm());
        re_pd = re_pd && real_part_positive_definite(z);
    }
    const bool pass =
        max_residual <= opt.tolerance && max_gap <= opt.contour_tolerance && min_imag > 0.0 && max_herm <= 1e-10 && re_pd;

    json rep;
    rep["trials"] = opt.trials;
    rep["seed"] = opt.seed;
    rep["contour_nodes"] = opt.nodes;
    rep["max_factorization_residual"] = max_residual;
    rep["max_eigen_contour_gap"] = max_gap;
    rep["min_solvent_imag"] = min_imag;
    rep["max_hermiticity_defect"] = max_herm;
    rep["re_z_positive_definite"] = re_pd;
    rep["tolerance"] = opt.tolerance;
    rep["pass"] = pass;
    detail::emit(out_path, rep);
    return {pass ? 0 : 4, rep};
}

struct BridgeOptions {
    double tau = 2.0;
    std::vector<double> T;
    int cells = 1000;
};

inline CommandResult cmd_bridge_check(const std::optional<std::string> &medium_path,
                                      const std::optional<std::string> &out_path, const BridgeOptions &opt) {
    if (opt.T.size() < 3) throw Error(ErrorKind::Usage, "bridge-check needs at least 3 values of T");
    if (opt.cells < 16) throw Error(ErrorKind::Usage, "--cells must be at least 16");
    const Medium1D med = medium_path ? medium_from_json(read_json(*medium_path)) : Medium1D::homogeneous();
    WaveConfig cfg;
    cfg.cells = opt.cells;
    const BridgeReport br = bridge_check(med, opt.tau, opt.T, cfg);

    json rows = json::array();
    for (const auto &r : br.rows)
        rows.push_back({{"T", r.T},
                        {"gap", r.gap},
                        {"laplace_traction", r.laplace_traction},
                        {"elliptic", r.elliptic},
                        {"bound_shape", r.bound_shape}});
    json rep;
    rep["tau"] = br.tau;
    rep["cells"] = opt.cells;
    rep["medium"] = to_json(med);
    rep["rows"] = rows;
    rep["fitted_constant"] = br.fitted_constant;
    rep["monotone_run"] = br.monotone_run;
    rep["log10_drop"] = br.log10_drop;
    rep["decaying"] = br.decaying;
    detail::emit(out_path, rep);
    return {br.decaying ? 0 : 4, rep};
}

} // namespace elastodn

#endif // ELASTODN_COMMANDS_HPP
