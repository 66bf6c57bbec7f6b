#pragma once

#include <phdae/simulate.hpp>
#include <phdae/systems.hpp>

#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace phdae::io {

using nlohmann::json;

/// I/O and parse problems; mapped to exit code 2 by the CLI.
struct FileError : Error {
    using Error::Error;
};

inline Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
        throw FileError(what + ": matrix needs rows, cols, data");
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || !data.is_array() ||
        static_cast<Index>(data.size()) != rows * cols)
        throw FileError(what + ": data length does not match rows*cols");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<size_t>(i * cols + c)].get<double>();
    require_finite(m, what.c_str());
    return m;
}

inline json matrix_to_json(const Matrix& m) {
    json data = json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

enum class StructureKind { dirac, lagrange, resistive, monotone };
enum class Representation { kernel, image, graph, ps };

inline std::string to_string(StructureKind k) {
    switch (k) {
        case StructureKind::dirac: return "dirac";
        case StructureKind::lagrange: return "lagrange";
        case StructureKind::resistive: return "resistive";
        case StructureKind::monotone: return "monotone";
    }
    return {};
}

inline std::string to_string(Representation r) {
    switch (r) {
        case Representation::kernel: return "kernel";
        case Representation::image: return "image";
        case Representation::graph: return "graph";
        case Representation::ps: return "PS";
    }
    return {};
}

inline StructureKind kind_from_string(const std::string& s) {
    if (s == "dirac") return StructureKind::dirac;
    if (s == "lagrange") return StructureKind::lagrange;
    if (s == "resistive") return StructureKind::resistive;
    if (s == "monotone") return StructureKind::monotone;
    throw FileError("unknown structure kind: " + s);
}

inline Representation representation_from_string(const std::string& s) {
    if (s == "kernel") return Representation::kernel;
    if (s == "image") return Representation::image;
    if (s == "graph") return Representation::graph;
    if (s == "PS" || s == "ps") return Representation::ps;
    throw FileError("unknown representation: " + s);
}

struct StructureSpec {
    std::string name;
    StructureKind kind = StructureKind::dirac;
    Representation rep = Representation::kernel;
    std::map<std::string, Matrix> matrices;
    std::optional<PairingLayout> layout;  // overrides the kind's default
};

struct SystemSpec {
    std::string form;  // "dlr" or "ml"
    std::string d, l, r, m;
};

struct ScenarioSpec {
    double h = 0.0;
    double t_end = 0.0;
    Vector initial_guess;  // z-part guess; auxiliaries are padded with zeros
    InputSignal input;
};

struct SystemFile {
    PairingLayout layout;
    std::vector<StructureSpec> structures;  // file order, for deterministic reports
    std::optional<SystemSpec> system;
    std::optional<ScenarioSpec> scenario;
};

inline SystemFile system_file_from_json(const json& j) {
    SystemFile f;
    if (!j.is_object() || !j.contains("layout")) throw FileError("system file: missing layout");
    const auto& jl = j.at("layout");
    f.layout.n = jl.value("n", Index{0});
    f.layout.r = jl.value("r", Index{0});
    f.layout.p = jl.value("p", Index{0});
    if (f.layout.n < 0 || f.layout.r < 0 || f.layout.p < 0)
        throw FileError("system file: negative layout dimension");

    if (j.contains("structures")) {
        for (const auto& [name, js] : j.at("structures").items()) {
            StructureSpec spec;
            spec.name = name;
            spec.kind = kind_from_string(js.at("kind").get<std::string>());
            spec.rep = representation_from_string(js.at("representation").get<std::string>());
            if (js.contains("layout")) {
                PairingLayout l;
                l.n = js.at("layout").value("n", Index{0});
                l.r = js.at("layout").value("r", Index{0});
                l.p = js.at("layout").value("p", Index{0});
                spec.layout = l;
            }
            for (const auto& [key, jm] : js.items()) {
                if (key == "kind" || key == "representation" || key == "layout") continue;
                spec.matrices[key] = matrix_from_json(jm, name + "." + key);
            }
            f.structures.push_back(std::move(spec));
        }
    }

    if (j.contains("system")) {
        SystemSpec sys;
        const auto& js = j.at("system");
        sys.form = js.at("form").get<std::string>();
        if (sys.form == "dlr") {
            sys.d = js.at("D").get<std::string>();
            sys.l = js.at("L").get<std::string>();
            sys.r = js.value("R", std::string{});
        } else if (sys.form == "ml") {
            sys.m = js.at("M").get<std::string>();
            sys.l = js.at("L").get<std::string>();
        } else {
            throw FileError("system form must be dlr or ml");
        }
        f.system = std::move(sys);
    }

    if (j.contains("scenario")) {
        const auto& js = j.at("scenario");
        ScenarioSpec sc;
        sc.h = js.at("h").get<double>();
        sc.t_end = js.at("t_end").get<double>();
        if (sc.h <= 0) throw FileError("scenario: h must be positive");
        if (js.contains("initial_guess")) {
            const auto& g = js.at("initial_guess");
            sc.initial_guess.resize(static_cast<Index>(g.size()));
            for (size_t i = 0; i < g.size(); ++i)
                sc.initial_guess(static_cast<Index>(i)) = g[i].get<double>();
        }
        if (js.contains("input")) {
            const auto& ji = js.at("input");
            const auto& times = ji.at("times");
            const auto& values = ji.at("values");
            if (times.size() != values.size())
                throw FileError("scenario input: times and values length mismatch");
            for (size_t k = 0; k < times.size(); ++k) {
                sc.input.times.push_back(times[k].get<double>());
                if (k > 0 && sc.input.times[k] <= sc.input.times[k - 1])
                    throw FileError("scenario input: times must be strictly increasing");
                const auto& row = values[k];
                if (k == 0) sc.input.values.resize(static_cast<Index>(row.size()), static_cast<Index>(times.size()));
                if (static_cast<Index>(row.size()) != sc.input.values.rows())
                    throw FileError("scenario input: ragged values");
                for (size_t i = 0; i < row.size(); ++i)
                    sc.input.values(static_cast<Index>(i), static_cast<Index>(k)) = row[i].get<double>();
            }
        }
        f.scenario = std::move(sc);
    }
    return f;
}

inline json system_file_to_json(const SystemFile& f) {
    json j;
    j["layout"] = {{"n", f.layout.n}, {"r", f.layout.r}, {"p", f.layout.p}};
    json structures = json::object();
    for (const auto& spec : f.structures) {
        json js;
        js["kind"] = to_string(spec.kind);
        js["representation"] = to_string(spec.rep);
        if (spec.layout)
            js["layout"] = {{"n", spec.layout->n}, {"r", spec.layout->r}, {"p", spec.layout->p}};
        for (const auto& [key, m] : spec.matrices) js[key] = matrix_to_json(m);
        structures[spec.name] = std::move(js);
    }
    j["structures"] = std::move(structures);
    if (f.system) {
        json js;
        js["form"] = f.system->form;
        if (f.system->form == "dlr") {
            js["D"] = f.system->d;
            js["L"] = f.system->l;
            if (!f.system->r.empty()) js["R"] = f.system->r;
        } else {
            js["M"] = f.system->m;
            js["L"] = f.system->l;
        }
        j["system"] = std::move(js);
    }
    if (f.scenario) {
        json js;
        js["h"] = f.scenario->h;
        js["t_end"] = f.scenario->t_end;
        if (f.scenario->initial_guess.size() > 0) {
            json g = json::array();
            for (Index i = 0; i < f.scenario->initial_guess.size(); ++i)
                g.push_back(f.scenario->initial_guess(i));
            js["initial_guess"] = std::move(g);
        }
        if (!f.scenario->input.times.empty()) {
            json times = json::array(), values = json::array();
            for (size_t k = 0; k < f.scenario->input.times.size(); ++k) {
                times.push_back(f.scenario->input.times[k]);
                json row = json::array();
                for (Index i = 0; i < f.scenario->input.values.rows(); ++i)
                    row.push_back(f.scenario->input.values(i, static_cast<Index>(k)));
                values.push_back(std::move(row));
            }
            js["input"] = {{"times", std::move(times)}, {"values", std::move(values)}};
        }
        j["scenario"] = std::move(js);
    }
    return j;
}

inline SystemFile load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FileError("parse error in " + path + ": " + e.what());
    }
    return system_file_from_json(j);
}

inline void save_system_file(const SystemFile& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot write " + path);
    out << system_file_to_json(f).dump(2) << "\n";
}

/// Default layout of a structure of the given kind inside a file whose
/// global layout is `g`: Dirac structures span all blocks, storage the state
/// pair, resistive structures the resistive pair, monotone structures state
/// and ports.
inline PairingLayout default_layout(StructureKind kind, const PairingLayout& g) {
    switch (kind) {
        case StructureKind::dirac: return g;
        case StructureKind::lagrange: return {g.n, 0, 0};
        case StructureKind::resistive: return {g.r, 0, 0};
        case StructureKind::monotone: return {g.n, 0, g.p};
    }
    return g;
}

struct BuiltStructure {
    LinearStructure structure;
    std::optional<LagrangePS> ps;  // set for PS/graph lagrange-family inputs
    std::string warning;
};

namespace detail {

inline const Matrix& need(const StructureSpec& spec, const std::string& key) {
    auto it = spec.matrices.find(key);
    if (it == spec.matrices.end())
        throw FileError(spec.name + ": missing matrix " + key);
    return it->second;
}

inline Matrix optional_block(const StructureSpec& spec, const std::string& key, Index rows,
                             Index cols) {
    auto it = spec.matrices.find(key);
    if (it == spec.matrices.end()) return Matrix::Zero(rows, cols);
    return it->second;
}

}  // namespace detail

/// Builds and validates one structure entry. Throws ConditionViolation when
/// a defining condition fails and FileError for malformed entries. A
/// resistive entry that is monotone but not a Lagrange structure is
/// rejected with the weaker property noted in the warning.
inline BuiltStructure build_structure(const StructureSpec& spec, const PairingLayout& global,
                                      const Tolerance& tol = {}) {
    const PairingLayout layout = spec.layout.value_or(default_layout(spec.kind, global));

    auto finish = [&](LinearStructure s, std::optional<LagrangePS> ps) -> BuiltStructure {
        std::string warning;
        const StructureFlags& fl = s.flags();
        switch (spec.kind) {
            case StructureKind::dirac:
                if (!fl.dirac)
                    throw ConditionViolation(spec.name + ": not a Dirac structure",
                                             s.report().plus_form_norm);
                break;
            case StructureKind::lagrange:
                if (!fl.lagrange)
                    throw ConditionViolation(spec.name + ": not a Lagrange structure",
                                             s.report().minus_form_norm);
                break;
            case StructureKind::resistive:
                if (!fl.nonneg_lagrange) {
                    // weakened resistive relation: valid for energy balance,
                    // rejected later by (D, L, R) assembly
                    if (fl.monotone)
                        warning = spec.name +
                                  ": monotone but not a Lagrange structure; the energy balance "
                                  "still holds but the two system definitions are no longer "
                                  "equivalent, and (D, L, R) assembly will reject it";
                    else
                        throw ConditionViolation(
                            spec.name + ": not a nonnegative Lagrange structure",
                            std::max(s.report().minus_form_norm, -s.report().plus_form_min_eig));
                }
                break;
            case StructureKind::monotone:
                if (!fl.maximal_monotone)
                    throw ConditionViolation(spec.name + ": not a maximally monotone structure",
                                             -s.report().plus_form_min_eig);
                break;
        }
        return {std::move(s), std::move(ps), std::move(warning)};
    };

    switch (spec.rep) {
        case Representation::kernel: {
            if (spec.kind != StructureKind::dirac)
                throw FileError(spec.name + ": kernel representation is for dirac entries");
            KernelBlocks kb;
            kb.K = detail::need(spec, "K");
            const Index rows = kb.K.rows();
            kb.L = detail::need(spec, "L");
            kb.K_R = detail::optional_block(spec, "K_R", rows, layout.r);
            kb.L_R = detail::optional_block(spec, "L_R", rows, layout.r);
            kb.K_P = detail::optional_block(spec, "K_P", rows, layout.p);
            kb.L_P = detail::optional_block(spec, "L_P", rows, layout.p);
            return finish(dirac_from_kernel(kb, layout, tol), std::nullopt);
        }
        case Representation::ps: {
            if (spec.kind != StructureKind::lagrange && spec.kind != StructureKind::resistive)
                throw FileError(spec.name + ": PS representation is for lagrange/resistive entries");
            LagrangePS ps = make_lagrange_ps(detail::need(spec, "P"), detail::need(spec, "S"), tol);
            LinearStructure s = ps.structure;
            return finish(std::move(s), std::move(ps));
        }
        case Representation::graph: {
            const Matrix& m = detail::need(spec, "M");
            switch (spec.kind) {
                case StructureKind::dirac:
                    return finish(graph_structure(m, GraphKind::skew_dirac, tol), std::nullopt);
                case StructureKind::lagrange: {
                    LagrangePS ps = make_lagrange_ps(Matrix::Identity(m.rows(), m.rows()), m, tol);
                    LinearStructure s = ps.structure;
                    return finish(std::move(s), std::move(ps));
                }
                case StructureKind::resistive: {
                    // resistive graph f_R = M e_R; an asymmetric monotone map
                    // is the weakened relation and skips the PS pair
                    if ((m - m.transpose()).norm() <= tol.sub_tol * std::max(1.0, m.norm())) {
                        LagrangePS ps = make_lagrange_ps(m, Matrix::Identity(m.rows(), m.rows()), tol);
                        LinearStructure s = ps.structure;
                        return finish(std::move(s), std::move(ps));
                    }
                    return finish(graph_structure(m, GraphKind::monotone, tol), std::nullopt);
                }
                case StructureKind::monotone:
                    return finish(graph_structure(m, GraphKind::monotone, tol), std::nullopt);
            }
            throw FileError(spec.name + ": bad graph entry");
        }
        case Representation::image: {
            if (spec.matrices.count("basis"))
                return finish(LinearStructure(layout, detail::need(spec, "basis"), tol), std::nullopt);
            if (spec.kind != StructureKind::monotone)
                throw FileError(spec.name + ": image representation needs a basis matrix");
            const Matrix& z = detail::need(spec, "Z");
            const Matrix& y = detail::need(spec, "Y");
            const Matrix z_p = detail::optional_block(spec, "Z_P", z.rows(), layout.p);
            const Matrix y_p = detail::optional_block(spec, "Y_P", z.rows(), layout.p);
            return finish(monotone_from_image(z, y, z_p, y_p, layout, tol), std::nullopt);
        }
    }
    throw FileError(spec.name + ": unsupported representation");
}

/// Trajectory export: one labeled row per grid point.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const StateLabels& lb = traj.labels;
    out << "t";
    for (Index i = 0; i < lb.n_z; ++i) out << ",z_" << i;
    for (Index i = 0; i < lb.n_lambda; ++i) out << ",lambda_" << i;
    for (Index i = 0; i < lb.n_fr; ++i) out << ",f_R_" << i;
    for (Index i = 0; i < lb.n_er; ++i) out << ",e_R_" << i;
    for (Index i = 0; i < traj.n_ports; ++i) out << ",f_P_" << i;
    for (Index i = 0; i < traj.n_ports; ++i) out << ",e_P_" << i;
    out << ",H,residual\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
    };
    for (Index k = 0; k < traj.states.cols(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", traj.times[static_cast<size_t>(k)]);
        out << buf;
        for (Index i = 0; i < lb.n_z; ++i) emit(traj.states(lb.z_offset() + i, k));
        for (Index i = 0; i < lb.n_lambda; ++i) emit(traj.states(lb.lambda_offset() + i, k));
        for (Index i = 0; i < lb.n_fr; ++i) emit(traj.states(lb.fr_offset() + i, k));
        for (Index i = 0; i < lb.n_er; ++i) emit(traj.states(lb.er_offset() + i, k));
        for (Index i = 0; i < traj.n_ports; ++i) {
            // f_P may be an algebraic state or an output row; outputs hold both
            emit(traj.outputs(i, k));
        }
        for (Index i = 0; i < traj.n_ports; ++i) emit(traj.inputs(i, k));
        emit(traj.hamiltonian(k));
        emit(k > 0 ? traj.residual(k - 1) : 0.0);
        out << '\n';
    }
}

/// Transfer sweep export: (Re s, Im s, Re H_ij, Im H_ij) per entry, with
/// optional magnitude/phase columns.
inline void write_transfer_csv(std::ostream& out, const std::vector<std::complex<double>>& points,
                               const std::vector<CMatrix>& values, bool magnitude_phase = false) {
    if (points.size() != values.size())
        throw InvalidInput("write_transfer_csv: points/values mismatch");
    if (points.empty()) return;
    const Index rows = values.front().rows(), cols = values.front().cols();
    out << "re_s,im_s";
    for (Index i = 0; i < rows; ++i)
        for (Index c = 0; c < cols; ++c) {
            out << ",re_H_" << i << "_" << c << ",im_H_" << i << "_" << c;
            if (magnitude_phase) out << ",mag_H_" << i << "_" << c << ",phase_H_" << i << "_" << c;
        }
    out << '\n';
    char buf[32];
    auto emit = [&](double v, bool lead_comma = true) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        if (lead_comma) out << ',';
        out << buf;
    };
    for (size_t k = 0; k < points.size(); ++k) {
        emit(points[k].real(), false);
        emit(points[k].imag());
        for (Index i = 0; i < rows; ++i)
            for (Index c = 0; c < cols; ++c) {
                const std::complex<double> h = values[k](i, c);
                emit(h.real());
                emit(h.imag());
                if (magnitude_phase) {
                    emit(std::abs(h));
                    emit(std::arg(h));
                }
            }
        out << '\n';
    }
}

}  // namespace phdae::io
