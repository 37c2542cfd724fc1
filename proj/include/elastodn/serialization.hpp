#ifndef ELASTODN_SERIALIZATION_HPP
#define ELASTODN_SERIALIZATION_HPP

// JSON files for material parameters and impedance sample sets. Matrices are
// row-major nested arrays. Doubles are written in shortest round-trip form,
// so load(save(x)) reproduces x bit for bit.

#include "errors.hpp"
#include "laplace_bridge.hpp"
#include "reconstruction.hpp"
#include "tensor_core.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace elastodn {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class Model { isotropic, vti, orthorhombic, full };

inline std::string model_name(Model m) {
    switch (m) {
    case Model::isotropic: return "isotropic";
    case Model::vti: return "vti";
    case Model::orthorhombic: return "orthorhombic";
    case Model::full: return "full";
    }
    return "full";
}

inline Model parse_model(const std::string &s) {
    if (s == "isotropic") return Model::isotropic;
    if (s == "vti") return Model::vti;
    if (s == "orthorhombic") return Model::orthorhombic;
    if (s == "full") return Model::full;
    throw Error(ErrorKind::Parse, "unknown model '" + s + "'");
}

/// Parameters as stored on disk. `components` holds named Voigt entries
/// ("C1111", ...) or, for isotropic media, "lambda" and "mu". Each gradient
/// entry has the same keys plus "rho".
struct ParamsFile {
    int schema_version = kSchemaVersion;
    Model model = Model::full;
    std::map<std::string, double> components;
    double rho = 1.0;
    std::optional<std::array<std::map<std::string, double>, 3>> gradients;
    std::optional<json> report;

    friend bool operator==(const ParamsFile &, const ParamsFile &) = default;
};

struct SamplesFile {
    int schema_version = kSchemaVersion;
    std::vector<ImpedanceSample> samples;
    std::vector<GammaSample> gamma_hat;
};

namespace detail {

inline const char *const kTensorNames[6] = {"11", "22", "33", "23", "13", "12"};

inline std::string component_name(int I, int J) {
    return std::string("C") + kTensorNames[I] + kTensorNames[J];
}

inline const std::vector<std::string> &vti_keys() {
    static const std::vector<std::string> k{"C1111", "C3333", "C1133", "C1313", "C1212"};
    return k;
}

inline const std::vector<std::string> &ortho_keys() {
    static const std::vector<std::string> k{"C1111", "C2222", "C3333", "C1122", "C1133",
                                            "C2233", "C2323", "C1313", "C1212"};
    return k;
}

inline std::vector<std::string> full_keys() {
    std::vector<std::string> k;
    for (int I = 0; I < 6; ++I)
        for (int J = I; J < 6; ++J) k.push_back(component_name(I, J));
    return k;
}

inline std::vector<std::string> keys_for(Model m) {
    switch (m) {
    case Model::isotropic: return {"lambda", "mu"};
    case Model::vti: return vti_keys();
    case Model::orthorhombic: return ortho_keys();
    case Model::full: return full_keys();
    }
    return {};
}

inline double get(const std::map<std::string, double> &m, const std::string &k) {
    const auto it = m.find(k);
    if (it == m.end()) throw Error(ErrorKind::Parse, "missing component '" + k + "'");
    return it->second;
}

/// Builds a stiffness tensor from named components without convexity checks.
inline StiffnessTensor tensor_from(Model model, const std::map<std::string, double> &c) {
    switch (model) {
    case Model::isotropic: return from_isotropic(get(c, "lambda"), get(c, "mu"));
    case Model::vti:
        return vti_tensor({get(c, "C1111"), get(c, "C3333"), get(c, "C1133"), get(c, "C1313"), get(c, "C1212"), 1.0});
    case Model::orthorhombic:
        return ortho_tensor({get(c, "C1111"), get(c, "C2222"), get(c, "C3333"), get(c, "C1122"), get(c, "C1133"),
                             get(c, "C2233"), get(c, "C2323"), get(c, "C1313"), get(c, "C1212"), 1.0});
    case Model::full: {
        Mat6 v = Mat6::Zero();
        for (int I = 0; I < 6; ++I)
            for (int J = I; J < 6; ++J) v(I, J) = get(c, component_name(I, J));
        return StiffnessTensor::from_voigt(v);
    }
    }
    return {};
}

inline std::map<std::string, double> full_components(const StiffnessTensor &c) {
    std::map<std::string, double> out;
    for (int I = 0; I < 6; ++I)
        for (int J = I; J < 6; ++J) out[component_name(I, J)] = c.voigt(I, J);
    return out;
}

template <class M> json matrix_to_json(const M &m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Mat3 mat3_from_json(const json &j, const char *what) {
    if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Parse, std::string(what) + " must be a 3x3 array");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        if (!j[r].is_array() || j[r].size() != 3)
            throw Error(ErrorKind::Parse, std::string(what) + " must be a 3x3 array");
        for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline Vec3 vec3_from_json(const json &j, const char *what) {
    if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Parse, std::string(what) + " must have 3 entries");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

inline json vec3_to_json(const Vec3 &v) { return json::array({v(0), v(1), v(2)}); }

inline void check_version(const json &j) {
    if (!j.contains("schema_version")) throw Error(ErrorKind::Parse, "missing schema_version");
    const int v = j.at("schema_version").get<int>();
    if (v != kSchemaVersion) throw Error(ErrorKind::Parse, "unsupported schema_version " + std::to_string(v));
}

inline std::map<std::string, double> components_from_json(const json &j, Model model) {
    if (!j.is_object()) throw Error(ErrorKind::Parse, "components must be an object");
    std::map<std::string, double> out;
    for (const auto &[k, v] : j.items()) out[k] = v.get<double>();
    for (const auto &k : keys_for(model)) get(out, k);
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Params

inline json to_json(const ParamsFile &p) {
    json j;
    j["schema_version"] = p.schema_version;
    j["model"] = model_name(p.model);
    j["components"] = p.components;
    j["rho"] = p.rho;
    if (p.gradients) {
        json g = json::array();
        for (const auto &d : *p.gradients) g.push_back(d);
        j["gradients"] = g;
    }
    if (p.report) j["report"] = *p.report;
    return j;
}

inline ParamsFile params_from_json(const json &j) {
    try {
        detail::check_version(j);
        ParamsFile p;
        p.model = parse_model(j.at("model").get<std::string>());
        p.components = detail::components_from_json(j.at("components"), p.model);
        p.rho = j.at("rho").get<double>();
        if (j.contains("gradients")) {
            const json &g = j.at("gradients");
            if (!g.is_array() || g.size() != 3) throw Error(ErrorKind::Parse, "gradients must list 3 directions");
            std::array<std::map<std::string, double>, 3> grads;
            for (int k = 0; k < 3; ++k) {
                grads[k] = detail::components_from_json(g[k], p.model);
                detail::get(grads[k], "rho");
            }
            p.gradients = grads;
        }
        if (j.contains("report")) p.report = j.at("report");
        return p;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Parse, e.what());
    }
}

/// Tensor, density and gradient; checks strong convexity and rho > 0.
inline MaterialParams to_material(const ParamsFile &p) {
    MaterialParams m;
    m.stiffness = detail::tensor_from(p.model, p.components);
    m.rho = p.rho;
    if (!(m.rho > 0.0)) throw Error(ErrorKind::ConvexityViolation, "density must be positive");
    require_convex(m.stiffness, "parameter file tensor");
    if (p.gradients) {
        MaterialGradient g;
        for (int k = 0; k < 3; ++k) {
            g.dstiffness[k] = detail::tensor_from(p.model, (*p.gradients)[k]);
            g.drho[k] = detail::get((*p.gradients)[k], "rho");
        }
        m.gradient = g;
    }
    return m;
}

inline ParamsFile params_file(const VtiParams &p) {
    return {kSchemaVersion, Model::vti,
            {{"C1111", p.c1111}, {"C3333", p.c3333}, {"C1133", p.c1133}, {"C1313", p.c1313}, {"C1212", p.c1212}},
            p.rho, std::nullopt, std::nullopt};
}

inline ParamsFile params_file(const OrthoParams &p) {
    return {kSchemaVersion, Model::orthorhombic,
            {{"C1111", p.c1111}, {"C2222", p.c2222}, {"C3333", p.c3333}, {"C1122", p.c1122}, {"C1133", p.c1133},
             {"C2233", p.c2233}, {"C2323", p.c2323}, {"C1313", p.c1313}, {"C1212", p.c1212}},
            p.rho, std::nullopt, std::nullopt};
}

inline ParamsFile params_file(const StiffnessTensor &c, double rho) {
    return {kSchemaVersion, Model::full, detail::full_components(c), rho, std::nullopt, std::nullopt};
}

// ---------------------------------------------------------------------------
// Samples

inline json to_json(const ImpedanceSample &s) {
    json j;
    j["n"] = detail::vec3_to_json(s.dir.n());
    j["m"] = detail::vec3_to_json(s.dir.m());
    j["z_re"] = detail::matrix_to_json(Mat3(s.z.real()));
    j["z_im"] = detail::matrix_to_json(Mat3(s.z.imag()));
    if (s.dz) {
        json dz = json::array();
        for (const auto &d : *s.dz)
            dz.push_back({{"re", detail::matrix_to_json(Mat3(d.real()))}, {"im", detail::matrix_to_json(Mat3(d.imag()))}});
        j["dz"] = dz;
    }
    return j;
}

inline json to_json(const SamplesFile &f) {
    json j;
    j["schema_version"] = f.schema_version;
    json s = json::array();
    for (const auto &x : f.samples) s.push_back(to_json(x));
    j["samples"] = s;
    if (!f.gamma_hat.empty()) {
        json g = json::array();
        for (const auto &x : f.gamma_hat)
            g.push_back({{"eta", detail::vec3_to_json(x.eta)}, {"value", detail::matrix_to_json(x.gamma_hat)}});
        j["gamma_hat"] = g;
    }
    return j;
}

inline CMat3 complex_from(const Mat3 &re, const Mat3 &im) {
    CMat3 z;
    z.real() = re;
    z.imag() = im;
    return z;
}

/// Hermiticity tolerance applied on load, relative to the matrix norm.
inline constexpr double kLoadHermitianTol = 1e-8;

inline SamplesFile samples_from_json(const json &j) {
    try {
        detail::check_version(j);
        SamplesFile f;
        for (const auto &r : j.at("samples")) {
            const DirectionPair dir(detail::vec3_from_json(r.at("n"), "n"), detail::vec3_from_json(r.at("m"), "m"));
            ImpedanceSample s{dir, complex_from(detail::mat3_from_json(r.at("z_re"), "z_re"),
                                                detail::mat3_from_json(r.at("z_im"), "z_im")),
                              std::nullopt};
            if (hermiticity_defect(s.z) > kLoadHermitianTol * s.z.norm())
                throw Error(ErrorKind::InvalidArgument, "sample impedance is not Hermitian");
            if (r.contains("dz")) {
                const json &dz = r.at("dz");
                if (!dz.is_array() || dz.size() != 3) throw Error(ErrorKind::Parse, "dz must list 3 directions");
                std::array<CMat3, 3> d;
                for (int k = 0; k < 3; ++k)
                    d[k] = complex_from(detail::mat3_from_json(dz[k].at("re"), "dz.re"),
                                        detail::mat3_from_json(dz[k].at("im"), "dz.im"));
                s.dz = d;
            }
            f.samples.push_back(std::move(s));
        }
        if (j.contains("gamma_hat"))
            for (const auto &g : j.at("gamma_hat"))
                f.gamma_hat.push_back(
                    {detail::vec3_from_json(g.at("eta"), "eta"), detail::mat3_from_json(g.at("value"), "value")});
        return f;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Parse, e.what());
    }
}

// ---------------------------------------------------------------------------
// 1-D media for the bridge check

inline Medium1D medium_from_json(const json &j) {
    try {
        Medium1D m;
        m.length = j.at("length").get<double>();
        m.pieces.clear();
        for (const auto &p : j.at("pieces"))
            m.pieces.push_back({p.at("x_end").get<double>(), p.at("rho").get<double>(), p.at("kappa").get<double>()});
        m.validate();
        return m;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Parse, e.what());
    }
}

inline json to_json(const Medium1D &m) {
    json pieces = json::array();
    for (const auto &p : m.pieces) pieces.push_back({{"x_end", p.x_end}, {"rho", p.rho}, {"kappa", p.kappa}});
    return {{"length", m.length}, {"pieces", pieces}};
}

// ---------------------------------------------------------------------------
// Files

inline json read_json(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error &e) {
        throw Error(ErrorKind::Parse, path + ": " + e.what());
    }
}

inline void write_json(const std::string &path, const json &j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

inline ParamsFile load_params(const std::string &path) { return params_from_json(read_json(path)); }
inline SamplesFile load_samples(const std::string &path) { return samples_from_json(read_json(path)); }
inline void save(const std::string &path, const ParamsFile &p) { write_json(path, to_json(p)); }
inline void save(const std::string &path, const SamplesFile &f) { write_json(path, to_json(f)); }

} // namespace elastodn

#endif // ELASTODN_SERIALIZATION_HPP
