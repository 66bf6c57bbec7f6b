#pragma once

#include <phdae/systemfile.hpp>

#include <cmath>
#include <vector>

namespace phdae::io {

inline std::vector<std::string> bundled_example_names() {
    return {"classical", "constrained", "rc", "lossless-rotation", "monotone-mixed"};
}

/// Bundled demonstration systems. Every example validates, realizes, and
/// (when it has a scenario) simulates out of the box.
inline SystemFile bundled_example(const std::string& name) {
    SystemFile f;
    auto mat = [](Index rows, Index cols, std::initializer_list<double> vals) {
        Matrix m(rows, cols);
        Index k = 0;
        for (double v : vals) m(k / cols, k % cols) = v, ++k;
        return m;
    };

    if (name == "classical") {
        // x' = J Q x with P = I and z = x
        f.layout = {2, 0, 0};
        StructureSpec d;
        d.name = "D";
        d.kind = StructureKind::dirac;
        d.rep = Representation::kernel;
        d.matrices["K"] = Matrix::Identity(2, 2);
        d.matrices["L"] = mat(2, 2, {0, 1, -1, 0});
        StructureSpec l;
        l.name = "L";
        l.kind = StructureKind::lagrange;
        l.rep = Representation::ps;
        l.matrices["P"] = Matrix::Identity(2, 2);
        l.matrices["S"] = mat(2, 2, {1, 0, 0, 2});
        f.structures = {d, l};
        f.system = SystemSpec{"dlr", "D", "L", "", ""};
        ScenarioSpec sc;
        sc.h = 0.01;
        sc.t_end = 5.0;
        sc.initial_guess = mat(2, 1, {1, 0});
        f.scenario = sc;
        return f;
    }

    if (name == "constrained") {
        // singular storage P: one Lagrange algebraic constraint
        f.layout = {2, 0, 0};
        StructureSpec d;
        d.name = "D";
        d.kind = StructureKind::dirac;
        d.rep = Representation::kernel;
        d.matrices["K"] = Matrix::Identity(2, 2);
        d.matrices["L"] = mat(2, 2, {0, 1, -1, 0});
        StructureSpec l;
        l.name = "L";
        l.kind = StructureKind::lagrange;
        l.rep = Representation::ps;
        l.matrices["P"] = mat(2, 2, {1, 0, 0, 0});
        l.matrices["S"] = Matrix::Identity(2, 2);
        f.structures = {d, l};
        f.system = SystemSpec{"dlr", "D", "L", "", ""};
        ScenarioSpec sc;
        sc.h = 0.01;
        sc.t_end = 2.0;
        sc.initial_guess = mat(2, 1, {1, 1});
        f.scenario = sc;
        return f;
    }

    if (name == "rc") {
        // driven parallel RC: z' = -r z + e_P, f_P = z, transfer 1/(s+r)
        f.layout = {1, 1, 1};
        StructureSpec d;
        d.name = "D";
        d.kind = StructureKind::dirac;
        d.rep = Representation::kernel;
        d.matrices["K"] = mat(3, 1, {1, 0, 0});
        d.matrices["L"] = mat(3, 1, {0, -1, -1});
        d.matrices["K_R"] = mat(3, 1, {1, 0, 0});
        d.matrices["L_R"] = mat(3, 1, {0, 1, 0});
        d.matrices["K_P"] = mat(3, 1, {0, 0, 1});
        d.matrices["L_P"] = mat(3, 1, {1, 0, 0});
        StructureSpec l;
        l.name = "L";
        l.kind = StructureKind::lagrange;
        l.rep = Representation::ps;
        l.matrices["P"] = Matrix::Identity(1, 1);
        l.matrices["S"] = Matrix::Identity(1, 1);
        StructureSpec r;
        r.name = "R";
        r.kind = StructureKind::resistive;
        r.rep = Representation::ps;
        r.matrices["P"] = Matrix::Identity(1, 1);
        r.matrices["S"] = Matrix::Identity(1, 1);
        f.structures = {d, l, r};
        f.system = SystemSpec{"dlr", "D", "L", "R", ""};
        ScenarioSpec sc;
        sc.h = 0.02;
        sc.t_end = 4.0;
        sc.initial_guess = mat(1, 1, {0.5});
        const Index samples = static_cast<Index>(std::llround(sc.t_end / sc.h)) + 1;
        sc.input.values.resize(1, samples);
        for (Index k = 0; k < samples; ++k) {
            const double t = sc.h * static_cast<double>(k);
            sc.input.times.push_back(t);
            sc.input.values(0, k) = std::sin(2.0 * t);
        }
        f.scenario = sc;
        return f;
    }

    if (name == "lossless-rotation") {
        f.layout = {2, 0, 0};
        StructureSpec d;
        d.name = "D";
        d.kind = StructureKind::dirac;
        d.rep = Representation::kernel;
        d.matrices["K"] = Matrix::Identity(2, 2);
        d.matrices["L"] = mat(2, 2, {0, 1, -1, 0});
        StructureSpec l;
        l.name = "L";
        l.kind = StructureKind::lagrange;
        l.rep = Representation::ps;
        l.matrices["P"] = Matrix::Identity(2, 2);
        l.matrices["S"] = Matrix::Identity(2, 2);
        f.structures = {d, l};
        f.system = SystemSpec{"dlr", "D", "L", "", ""};
        ScenarioSpec sc;
        sc.h = 0.01;
        sc.t_end = 10.0;
        sc.initial_guess = mat(2, 1, {1, 0});
        f.scenario = sc;
        return f;
    }

    if (name == "monotone-mixed") {
        // maximally monotone structure with a proper effort range:
        // members (a, c, a, 0); one multiplier appears in the realization
        f.layout = {2, 0, 0};
        StructureSpec m;
        m.name = "M";
        m.kind = StructureKind::monotone;
        m.rep = Representation::image;
        m.matrices["Z"] = Matrix::Identity(2, 2);
        m.matrices["Y"] = mat(2, 2, {1, 0, 0, 0});
        StructureSpec l;
        l.name = "L";
        l.kind = StructureKind::lagrange;
        l.rep = Representation::ps;
        l.matrices["P"] = Matrix::Identity(2, 2);
        l.matrices["S"] = Matrix::Identity(2, 2);
        f.structures = {m, l};
        f.system = SystemSpec{"ml", "", "L", "", "M"};
        ScenarioSpec sc;
        sc.h = 0.01;
        sc.t_end = 2.0;
        sc.initial_guess = mat(2, 1, {1, 0.3});
        f.scenario = sc;
        return f;
    }

    throw FileError("unknown example: " + name +
                    " (available: classical, constrained, rc, lossless-rotation, monotone-mixed)");
}

}  // namespace phdae::io
