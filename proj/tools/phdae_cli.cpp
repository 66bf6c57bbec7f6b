// Command-line front end: validation, composition, decomposition,
// realization, simulation, and transfer sweeps over JSON system files.

#include <phdae/phdae.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace phdae;

constexpr const char* kVersion = "phdae-tools 0.1.0";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
    out << name << " (" << m.rows() << "x" << m.cols() << ")\n";
    for (Index i = 0; i < m.rows(); ++i) {
        out << " ";
        for (Index c = 0; c < m.cols(); ++c) out << " " << fmt(m(i, c));
        out << "\n";
    }
}

void print_vector(std::ostream& out, const std::string& name, const Vector& v) {
    out << name << " [";
    for (Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << fmt(v(i));
    out << "]\n";
}

struct BuiltFile {
    io::SystemFile file;
    std::map<std::string, io::BuiltStructure> built;
    int rejected = 0;
};

BuiltFile build_all(const std::string& path, const Tolerance& tol, std::ostream& out,
                    bool verbose) {
    BuiltFile bf;
    bf.file = io::load_system_file(path);
    for (const auto& spec : bf.file.structures) {
        try {
            io::BuiltStructure bs = io::build_structure(spec, bf.file.layout, tol);
            if (verbose) {
                const auto& rep = bs.structure.report();
                const auto& fl = bs.structure.flags();
                out << "structure " << spec.name << " kind=" << io::to_string(spec.kind)
                    << " rep=" << io::to_string(spec.rep) << "\n";
                out << "  dim=" << rep.dim << " ambient=" << bs.structure.ambient() << "\n";
                out << "  flags: dirac=" << fl.dirac << " lagrange=" << fl.lagrange
                    << " nonneg_lagrange=" << fl.nonneg_lagrange << " monotone=" << fl.monotone
                    << " maximal_monotone=" << fl.maximal_monotone << "\n";
                out << "  plus_form_norm=" << fmt(rep.plus_form_norm)
                    << " minus_form_norm=" << fmt(rep.minus_form_norm)
                    << " plus_form_min_eig=" << fmt(rep.plus_form_min_eig) << "\n";
                if (!bs.warning.empty()) out << "  WARNING: " << bs.warning << "\n";
            }
            bf.built.emplace(spec.name, std::move(bs));
        } catch (const ConditionViolation& e) {
            ++bf.rejected;
            if (verbose) {
                out << "structure " << spec.name << " kind=" << io::to_string(spec.kind) << "\n";
                out << "  REJECTED: " << e.condition << " residual=" << fmt(e.residual) << "\n";
                if (e.witness.size() > 0) print_vector(out, "  witness:", e.witness);
            } else {
                throw;
            }
        }
    }
    return bf;
}

const io::BuiltStructure& need_structure(const BuiltFile& bf, const std::string& name) {
    auto it = bf.built.find(name);
    if (it == bf.built.end()) throw io::FileError("no structure named '" + name + "' in file");
    return it->second;
}

struct LoadedSystem {
    std::optional<PhDaeDLR> dlr;
    std::optional<PhDaeML> ml;
};

LoadedSystem load_system(const BuiltFile& bf, const Tolerance& tol) {
    if (!bf.file.system) throw io::FileError("file has no system section");
    const io::SystemSpec& spec = *bf.file.system;
    LoadedSystem out;
    if (spec.form == "dlr") {
        const auto& d = need_structure(bf, spec.d);
        const auto& l = need_structure(bf, spec.l);
        LagrangePS resistive = make_lagrange_ps(Matrix(0, 0), Matrix(0, 0), tol);
        if (!spec.r.empty()) {
            const auto& r = need_structure(bf, spec.r);
            if (!r.ps)
                throw io::FileError("resistive structure must carry a PS pair for assembly");
            resistive = *r.ps;
        }
        if (!l.ps) throw io::FileError("storage structure must carry a PS pair");
        out.dlr = make_dlr(d.structure, *l.ps, resistive);
        out.ml = dlr_to_ml(*out.dlr, tol);
    } else {
        const auto& m = need_structure(bf, spec.m);
        const auto& l = need_structure(bf, spec.l);
        if (!l.ps) throw io::FileError("storage structure must carry a PS pair");
        out.ml = make_ml(m.structure, *l.ps);
    }
    return out;
}

Vector padded_guess(const Vector& guess, const DescriptorRealization& real) {
    if (guess.size() == real.n_states()) return guess;
    Vector full = Vector::Zero(real.n_states());
    const Index copy = std::min<Index>(guess.size(), real.labels.n_z);
    full.head(copy) = guess.head(copy);
    return full;
}

io::StructureSpec image_spec(const std::string& name, io::StructureKind kind,
                             const LinearStructure& s) {
    io::StructureSpec spec;
    spec.name = name;
    spec.kind = kind;
    spec.rep = io::Representation::image;
    spec.matrices["basis"] = s.basis();
    spec.layout = s.layout();
    return spec;
}

int cmd_validate(const std::string& path, const Tolerance& tol) {
    std::cout << "# " << kVersion << "\n";
    BuiltFile bf = build_all(path, tol, std::cout, true);
    if (bf.rejected > 0) {
        std::cout << "result: INVALID (" << bf.rejected << " structure(s) rejected)\n";
        return 1;
    }
    std::cout << "result: VALID (" << bf.built.size() << " structure(s))\n";
    return 0;
}

int cmd_compose(const std::string& path, const std::string& name1, const std::string& name2,
                const std::string& shared, const std::string& check, const std::string& out_path,
                const Tolerance& tol) {
    std::cout << "# " << kVersion << "\n";
    BuiltFile bf = build_all(path, tol, std::cout, false);
    const LinearStructure& m1 = need_structure(bf, name1).structure;
    const LinearStructure& m2 = need_structure(bf, name2).structure;

    SharedBlocks blocks;
    if (shared == "resistive" || (shared == "auto" && m1.layout().r > 0))
        blocks = {Block::resistive, Block::state};
    else if (shared == "port" || (shared == "auto" && m1.layout().p > 0 && m2.layout().p > 0))
        blocks = {Block::port, Block::port};
    else
        throw io::FileError("cannot infer shared block; pass --shared resistive|port");

    LinearStructure composed = compose(m1, m2, blocks, tol);
    const auto& fl = composed.flags();
    std::cout << "composed " << name1 << " o " << name2 << ": layout n=" << composed.layout().n
              << " r=" << composed.layout().r << " p=" << composed.layout().p
              << " dim=" << composed.dim() << "\n";
    std::cout << "flags: dirac=" << fl.dirac << " lagrange=" << fl.lagrange
              << " nonneg_lagrange=" << fl.nonneg_lagrange << " monotone=" << fl.monotone
              << " maximal_monotone=" << fl.maximal_monotone << "\n";
    print_matrix(std::cout, "basis", composed.basis());

    if (!check.empty()) {
        const LinearStructure& target = need_structure(bf, check).structure;
        const bool equal = subspace_equal(composed.basis(), target.basis(), tol);
        std::cout << "equal to " << check << ": " << (equal ? "true" : "false") << "\n";
        if (!equal) return 1;
    }
    if (!out_path.empty()) {
        io::SystemFile out;
        out.layout = composed.layout();
        io::StructureKind kind = fl.dirac ? io::StructureKind::dirac
                                : fl.lagrange ? io::StructureKind::lagrange
                                              : io::StructureKind::monotone;
        out.structures.push_back(image_spec("composed", kind, composed));
        io::save_system_file(out, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_split(const std::string& path, const std::string& name, bool reduce,
              const std::string& out_path, const Tolerance& tol) {
    std::cout << "# " << kVersion << "\n";
    BuiltFile bf = build_all(path, tol, std::cout, false);
    const LinearStructure& m = need_structure(bf, name).structure;
    DiracResistivePair pair = split_dirac_resistive(m, reduce, tol);
    std::cout << "split " << name << (reduce ? " (reduced)" : "") << ": resistive dim = "
              << pair.resistive.layout().n << ", dirac layout n=" << pair.dirac.layout().n
              << " r=" << pair.dirac.layout().r << " p=" << pair.dirac.layout().p << "\n";
    print_matrix(std::cout, "R_relation", pair.resistive_p);

    if (!out_path.empty()) {
        io::SystemFile out = bf.file;
        out.layout = pair.dirac.layout();
        out.structures.push_back(image_spec(name + "_dirac", io::StructureKind::dirac, pair.dirac));
        io::StructureSpec res;
        res.name = name + "_resistive";
        res.kind = io::StructureKind::resistive;
        res.rep = io::Representation::ps;
        res.matrices["P"] = pair.resistive_p;
        res.matrices["S"] = pair.resistive_s;
        out.structures.push_back(std::move(res));
        if (out.system && out.system->form == "ml" && out.system->m == name) {
            out.system->form = "dlr";
            out.system->d = name + "_dirac";
            out.system->r = name + "_resistive";
            out.system->m.clear();
        }
        io::save_system_file(out, out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

void print_descriptor(std::ostream& out, const DescriptorRealization& real) {
    out << "route: " << real.route << "\n";
    out << "states: z=" << real.labels.n_z << " lambda=" << real.labels.n_lambda
        << " f_R=" << real.labels.n_fr << " e_R=" << real.labels.n_er
        << " f_P=" << real.labels.n_fp << "\n";
    print_matrix(out, "E", real.e);
    print_matrix(out, "A", real.a);
    print_matrix(out, "B_in", real.b_in);
    print_matrix(out, "C_out", real.c_out);
    print_matrix(out, "D_out", real.d_out);
}

io::json descriptor_to_json(const DescriptorRealization& real) {
    io::json j;
    j["route"] = real.route;
    j["E"] = io::matrix_to_json(real.e);
    j["A"] = io::matrix_to_json(real.a);
    j["B_in"] = io::matrix_to_json(real.b_in);
    j["C_out"] = io::matrix_to_json(real.c_out);
    j["D_out"] = io::matrix_to_json(real.d_out);
    j["labels"] = {{"z", real.labels.n_z},
                   {"lambda", real.labels.n_lambda},
                   {"f_R", real.labels.n_fr},
                   {"e_R", real.labels.n_er},
                   {"f_P", real.labels.n_fp}};
    return j;
}

int cmd_realize(const std::string& path, const std::string& route, const std::string& out_path,
                const Tolerance& tol) {
    std::cout << "# " << kVersion << "\n";
    BuiltFile bf = build_all(path, tol, std::cout, false);
    LoadedSystem sys = load_system(bf, tol);

    io::json out_json;
    if (route == "dlr") {
        PhDaeDLR dlr = sys.dlr ? *sys.dlr : ml_to_dlr(*sys.ml, false, tol);
        DescriptorRealization real = realize_dlr(dlr);
        print_descriptor(std::cout, real);
        out_json = descriptor_to_json(real);
    } else if (route == "structured") {
        StructuredRealization sr = realize_ml_structured(*sys.ml, tol);
        print_descriptor(std::cout, sr.descriptor);
        for (const auto& [name, m] :
             std::initializer_list<std::pair<const char*, const Matrix*>>{
                 {"J", &sr.j}, {"R", &sr.r}, {"B", &sr.b}, {"V", &sr.v}, {"N", &sr.n},
                 {"W", &sr.w}, {"G", &sr.g}, {"G_P", &sr.g_p}, {"P_a", &sr.p_a}, {"S_a", &sr.s_a}})
            print_matrix(std::cout, name, *m);
        const Index rank = matrix_rank(sr.p_a, tol);
        std::cout << "rank(P_a) = " << rank << " of " << sr.p_a.rows()
                  << " (algebraic constraints: " << sr.p_a.rows() - rank << ")\n";
        out_json = descriptor_to_json(sr.descriptor);
        for (const auto& [name, m] :
             std::initializer_list<std::pair<const char*, const Matrix*>>{
                 {"J", &sr.j}, {"R", &sr.r}, {"B", &sr.b}, {"V", &sr.v}, {"N", &sr.n},
                 {"W", &sr.w}, {"G", &sr.g}, {"G_P", &sr.g_p}, {"P_a", &sr.p_a}, {"S_a", &sr.s_a}})
            out_json[name] = io::matrix_to_json(*m);
    } else if (route == "annihilator") {
        DescriptorRealization real = realize_ml_annihilator(*sys.ml, tol);
        print_descriptor(std::cout, real);
        out_json = descriptor_to_json(real);
    } else {
        throw io::FileError("unknown route: " + route);
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw io::FileError("cannot write " + out_path);
        out << out_json.dump(2) << "\n";
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& path, const std::string& method, const std::string& route,
                 const std::string& out_path, const Tolerance& tol) {
    std::cout << "# " << kVersion << "\n";
    BuiltFile bf = build_all(path, tol, std::cout, false);
    LoadedSystem sys = load_system(bf, tol);
    if (!bf.file.scenario) throw io::FileError("file has no scenario section");
    const io::ScenarioSpec& sc = *bf.file.scenario;

    DescriptorRealization real;
    if (route == "dlr" || (route == "auto" && sys.dlr))
        real = realize_dlr(sys.dlr ? *sys.dlr : ml_to_dlr(*sys.ml, false, tol));
    else if (route == "annihilator")
        real = realize_ml_annihilator(*sys.ml, tol);
    else
        real = realize_ml_structured(*sys.ml, tol).descriptor;

    Scenario scenario{real, sc.h, sc.t_end, 0.0, sc.input, padded_guess(sc.initial_guess, real)};
    const IntegrationMethod m = method == "euler" ? IntegrationMethod::implicit_euler
                                                  : IntegrationMethod::implicit_midpoint;
    Trajectory traj = integrate(scenario, m, tol);
    EnergyAuditReport audit = energy_audit(traj);
    std::cout << "route: " << real.route << " method: " << method << " steps: "
              << traj.states.cols() - 1 << "\n";
    std::cout << "H(start)=" << fmt(traj.hamiltonian(0)) << " H(end)="
              << fmt(traj.hamiltonian(traj.hamiltonian.size() - 1)) << "\n";
    if (audit.residual_meaningful)
        std::cout << "max_balance_residual=" << fmt(audit.max_residual) << "\n";
    std::cout << "passivity: " << (audit.passive ? "pass" : "FAIL") << "\n";

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw io::FileError("cannot write " + out_path);
        io::write_trajectory_csv(out, traj);
        std::cout << "wrote " << out_path << "\n";
    }
    return audit.passive ? 0 : 1;
}

std::vector<std::complex<double>> parse_grid(const std::string& spec) {
    // "re0:re1:nre,im0:im1:nim"
    double re0 = 0.1, re1 = 10.0, im0 = -10.0, im1 = 10.0;
    int nre = 5, nim = 9;
    if (!spec.empty()) {
        if (std::sscanf(spec.c_str(), "%lf:%lf:%d,%lf:%lf:%d", &re0, &re1, &nre, &im0, &im1,
                        &nim) != 6)
            throw io::FileError("bad grid spec; expected re0:re1:nre,im0:im1:nim");
    }
    std::vector<std::complex<double>> grid;
    for (int i = 0; i < nre; ++i)
        for (int k = 0; k < nim; ++k) {
            const double re = nre == 1 ? re0 : re0 + (re1 - re0) * i / (nre - 1.0);
            const double im = nim == 1 ? im0 : im0 + (im1 - im0) * k / (nim - 1.0);
            grid.emplace_back(re, im);
        }
    return grid;
}

int cmd_transfer(const std::string& path, const std::string& grid_spec, bool check_pr,
                 const std::string& route, bool mag_phase, const std::string& out_path,
                 const Tolerance& tol) {
    std::cout << "# " << kVersion << "\n";
    BuiltFile bf = build_all(path, tol, std::cout, false);
    LoadedSystem sys = load_system(bf, tol);
    StructuredRealization sr = realize_ml_structured(*sys.ml, tol);

    std::optional<ExplicitSystem> explicit_sys;
    if (route != "descriptor") {
        try {
            explicit_sys = eliminate_multipliers(sr, tol);
        } catch (const PreconditionFailed& e) {
            if (route == "explicit") throw;
            std::cout << "note: explicit route unavailable (" << e.which
                      << "); using the descriptor route\n";
        }
    }
    std::cout << "route: " << (explicit_sys ? "explicit" : "descriptor") << "\n";

    const auto grid = parse_grid(grid_spec);
    std::vector<CMatrix> values;
    values.reserve(grid.size());
    for (const auto& s : grid)
        values.push_back(explicit_sys ? transfer_eval(*explicit_sys, s, tol)
                                      : transfer_eval(sr.descriptor, s, tol));
    std::cout << "evaluated " << grid.size() << " grid points\n";

    int rc = 0;
    if (check_pr) {
        if (!explicit_sys)
            throw io::FileError("--check-pr needs the explicit route (G_P = 0, invertible Q)");
        std::vector<std::complex<double>> rhp;
        for (const auto& s : grid)
            if (s.real() > 0) rhp.push_back(s);
        PositiveRealReport rep = positive_real_sample_check(*explicit_sys, rhp, tol);
        std::cout << "positive-real sampling (" << rhp.size()
                  << " points, necessary condition only, not exhaustive): "
                  << (rep.passed ? "pass" : "FAIL") << "\n";
        for (const auto& s : rep.samples)
            if (!s.passed) {
                std::cout << "  fail at s=" << fmt(s.s.real()) << "+" << fmt(s.s.imag())
                          << "i min_eig=" << fmt(s.min_hermitian_eig)
                          << (s.pole ? " (pole)" : "") << "\n";
            }
        if (!rep.passed) rc = 1;
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw io::FileError("cannot write " + out_path);
        io::write_transfer_csv(out, grid, values, mag_phase);
        std::cout << "wrote " << out_path << "\n";
    }
    return rc;
}

int cmd_example(const std::string& name, const std::string& out_path) {
    io::SystemFile f = io::bundled_example(name);
    if (!out_path.empty()) {
        io::save_system_file(f, out_path);
        std::cout << "wrote " << out_path << "\n";
    } else {
        std::cout << io::system_file_to_json(f).dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) +
                 " - linear port-Hamiltonian DAE toolkit\n"
                 "Default tolerances can be overridden with PHS_TOL_RANK, PHS_TOL_PSD, "
                 "PHS_TOL_SUB or the matching options."};
    app.require_subcommand(1);

    Tolerance tol;
    app.add_option("--tol-rank", tol.rank_rel, "relative rank threshold")
        ->envname("PHS_TOL_RANK");
    app.add_option("--tol-psd", tol.psd_rel, "relative PSD slack")->envname("PHS_TOL_PSD");
    app.add_option("--tol-sub", tol.sub_tol, "subspace angle threshold")->envname("PHS_TOL_SUB");

    std::string file, name1, name2, check, out_path, route = "auto", method = "midpoint";
    std::string grid_spec;
    std::string shared = "auto";
    bool reduce = false, check_pr = false, mag_phase = false;

    auto* v = app.add_subcommand("validate", "classify every structure in a system file");
    v->add_option("file", file)->required();

    auto* c = app.add_subcommand("compose", "compose two structures over a shared pair");
    c->add_option("file", file)->required();
    c->add_option("first", name1)->required();
    c->add_option("second", name2)->required();
    c->add_option("--shared", shared, "shared block of the first operand (auto|resistive|port)");
    c->add_option("--check", check, "compare the result against a named structure");
    c->add_option("--out", out_path, "write the composition as a system file");

    auto* sp = app.add_subcommand("split", "decompose a maximally monotone structure into D o R");
    sp->add_option("file", file)->required();
    sp->add_option("name", name1)->required();
    sp->add_flag("--reduce", reduce, "factor the resistive pair down to rank dimensions");
    sp->add_option("--out", out_path, "write the (D, R) pair as a system file");

    auto* re = app.add_subcommand("realize", "emit a coordinate realization of the system");
    re->add_option("file", file)->required();
    re->add_option("--route", route, "dlr | structured | annihilator")->required();
    re->add_option("--out", out_path, "write the realization matrices as JSON");

    auto* si = app.add_subcommand("simulate", "integrate the bundled scenario");
    si->add_option("file", file)->required();
    si->add_option("--method", method, "midpoint | euler");
    si->add_option("--route", route, "auto | dlr | structured | annihilator");
    si->add_option("--out", out_path, "write the trajectory as CSV");

    auto* tr = app.add_subcommand("transfer", "evaluate the transfer function on a grid");
    tr->add_option("file", file)->required();
    tr->add_option("--grid", grid_spec, "re0:re1:nre,im0:im1:nim (default 0.1:10:5,-10:10:9)");
    tr->add_option("--route", route, "auto | explicit | descriptor");
    tr->add_flag("--check-pr", check_pr, "sampled positive-realness check on Re s > 0");
    tr->add_flag("--mag-phase", mag_phase, "add magnitude/phase columns to the CSV");
    tr->add_option("--out", out_path, "write the sweep as CSV");

    auto* ex = app.add_subcommand("example", "emit a bundled example system file");
    ex->add_option("name", name1, "classical | constrained | rc | lossless-rotation | monotone-mixed")
        ->required();
    ex->add_option("--out", out_path, "write to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (v->parsed()) return cmd_validate(file, tol);
        if (c->parsed()) return cmd_compose(file, name1, name2, shared, check, out_path, tol);
        if (sp->parsed()) return cmd_split(file, name1, reduce, out_path, tol);
        if (re->parsed()) return cmd_realize(file, route, out_path, tol);
        if (si->parsed()) return cmd_simulate(file, method, route, out_path, tol);
        if (tr->parsed()) return cmd_transfer(file, grid_spec, check_pr, route, mag_phase,
                                              out_path, tol);
        if (ex->parsed()) return cmd_example(name1, out_path);
    } catch (const phdae::io::FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const phdae::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
