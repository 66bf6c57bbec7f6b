#pragma once

#include <phdae/monotone.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace phdae {

/// A Lagrange structure together with the (P, S) pair generating it; the
/// pair is what realizations substitute (x = P z, e = S z).
struct LagrangePS {
    Matrix p, s;
    LinearStructure structure;
};

inline LagrangePS make_lagrange_ps(const Matrix& p, const Matrix& s, const Tolerance& tol = {}) {
    return {p, s, lagrange_from_ps(p, s, tol)};
}

/// System of Definition (D, L, R): Dirac structure over the full block
/// layout, Lagrange storage over the state pair, nonnegative Lagrange
/// resistive structure over the resistive pair.
struct PhDaeDLR {
    LinearStructure dirac;
    LagrangePS storage;
    LagrangePS resistive;
};

inline PhDaeDLR make_dlr(LinearStructure dirac, LagrangePS storage, LagrangePS resistive) {
    const PairingLayout& l = dirac.layout();
    if (!dirac.flags().dirac)
        throw ConditionViolation("system: D is not a Dirac structure", dirac.report().plus_form_norm);
    if (storage.structure.layout().n != l.n)
        throw InvalidInput("system: storage dimension does not match D");
    if (resistive.structure.layout().n != l.r)
        throw InvalidInput("system: resistive dimension does not match D");
    if (!resistive.structure.flags().nonneg_lagrange)
        throw ConditionViolation("system: R is not a nonnegative Lagrange structure",
                                 -resistive.structure.report().plus_form_min_eig);
    return {std::move(dirac), std::move(storage), std::move(resistive)};
}

/// System of Definition (M, L): maximally monotone structure over state and
/// port blocks, Lagrange storage over the state pair.
struct PhDaeML {
    LinearStructure monotone;
    LagrangePS storage;
};

inline PhDaeML make_ml(LinearStructure monotone, LagrangePS storage) {
    if (monotone.layout().r != 0)
        throw InvalidInput("system: M must not carry a resistive block");
    if (!monotone.flags().maximal_monotone)
        throw NotMaximalMonotone("system: M is not maximally monotone");
    if (storage.structure.layout().n != monotone.layout().n)
        throw InvalidInput("system: storage dimension does not match M");
    return {std::move(monotone), std::move(storage)};
}

inline double hamiltonian(const LagrangePS& storage, const Vector& z) {
    if (z.size() != storage.p.rows()) throw InvalidInput("hamiltonian: dimension mismatch");
    return 0.5 * z.dot(storage.s.transpose() * storage.p * z);
}

inline double hamiltonian(const PhDaeDLR& sys, const Vector& z) { return hamiltonian(sys.storage, z); }
inline double hamiltonian(const PhDaeML& sys, const Vector& z) { return hamiltonian(sys.storage, z); }

/// Column spans of the stacked state vector of a descriptor realization.
/// Column order is fixed: z, then multipliers, then resistive flow/effort
/// auxiliaries, then port flows kept as algebraic states.
struct StateLabels {
    Index n_z = 0;
    Index n_lambda = 0;
    Index n_fr = 0;
    Index n_er = 0;
    Index n_fp = 0;

    Index total() const { return n_z + n_lambda + n_fr + n_er + n_fp; }
    Index z_offset() const { return 0; }
    Index lambda_offset() const { return n_z; }
    Index fr_offset() const { return n_z + n_lambda; }
    Index er_offset() const { return n_z + n_lambda + n_fr; }
    Index fp_offset() const { return n_z + n_lambda + n_fr + n_er; }
};

/// Implicit linear DAE  E w' = A w + B_in u,  y = C_out w + D_out u, with
/// u = e_P and y = f_P. Algebraic constraints are kept as explicit zero rows
/// of E rather than pre-eliminated. `ham` is S^T P on the z block; `diss`,
/// when present, is a quadratic form on (w, u) giving the dissipated power.
struct DescriptorRealization {
    Matrix e, a, b_in, c_out, d_out;
    StateLabels labels;
    Index n_ports = 0;
    Matrix ham;
    std::optional<Matrix> diss;
    std::string route;

    Index n_states() const { return e.cols(); }

    double hamiltonian_at(const Vector& w) const {
        const Vector z = w.segment(labels.z_offset(), labels.n_z);
        return 0.5 * z.dot(ham * z);
    }

    double dissipation_at(const Vector& w, const Vector& u) const {
        if (!diss) return 0.0;
        Vector wu(w.size() + u.size());
        wu << w, u;
        return wu.dot(*diss * wu);
    }
};

namespace detail {

inline KernelBlocks kernel_blocks_of(const LinearStructure& d) {
    if (d.raw_kernel()) return *d.raw_kernel();
    const PairingLayout& l = d.layout();
    const Matrix rows = d.kernel_rows();
    KernelBlocks kb;
    kb.K = rows.middleCols(l.f_offset(), l.n);
    kb.L = rows.middleCols(l.e_offset(), l.n);
    kb.K_R = rows.middleCols(l.fr_offset(), l.r);
    kb.L_R = rows.middleCols(l.er_offset(), l.r);
    kb.K_P = rows.middleCols(l.fp_offset(), l.p);
    kb.L_P = rows.middleCols(l.ep_offset(), l.p);
    return kb;
}

}  // namespace detail

/// Coordinate realization of a (D, L, R) system in the z variables:
///   K P z' = L S z - K_R f_R + L_R e_R + K_P f_P + L_P e_P
///   S_R^T f_R = P_R^T e_R
/// with (f_R, e_R, f_P) carried as auxiliary algebraic states. The f_R sign
/// comes from the membership convention (-x', e, -f_R, e_R, f_P, e_P) in D.
inline DescriptorRealization realize_dlr(const PhDaeDLR& sys) {
    const PairingLayout& l = sys.dirac.layout();
    const KernelBlocks kb = detail::kernel_blocks_of(sys.dirac);
    const Index n = l.n, r = l.r, p = l.p;
    const Index dyn_rows = kb.K.rows();
    const Index rows = dyn_rows + r;

    DescriptorRealization real;
    real.labels = {n, 0, r, r, p};
    real.n_ports = p;
    real.route = "dlr";
    const Index nw = real.labels.total();

    real.e = Matrix::Zero(rows, nw);
    real.a = Matrix::Zero(rows, nw);
    real.b_in = Matrix::Zero(rows, p);
    real.e.block(0, 0, dyn_rows, n) = kb.K * sys.storage.p;
    real.a.block(0, 0, dyn_rows, n) = kb.L * sys.storage.s;
    real.a.block(0, real.labels.fr_offset(), dyn_rows, r) = -kb.K_R;
    real.a.block(0, real.labels.er_offset(), dyn_rows, r) = kb.L_R;
    real.a.block(0, real.labels.fp_offset(), dyn_rows, p) = kb.K_P;
    real.b_in.topRows(dyn_rows) = kb.L_P;
    real.a.block(dyn_rows, real.labels.fr_offset(), r, r) = sys.resistive.s.transpose();
    real.a.block(dyn_rows, real.labels.er_offset(), r, r) = -sys.resistive.p.transpose();

    real.c_out = Matrix::Zero(p, nw);
    real.c_out.block(0, real.labels.fp_offset(), p, p) = Matrix::Identity(p, p);
    real.d_out = Matrix::Zero(p, p);
    real.ham = sys.storage.s.transpose() * sys.storage.p;

    Matrix dq = Matrix::Zero(nw + p, nw + p);
    dq.block(real.labels.fr_offset(), real.labels.er_offset(), r, r) = 0.5 * Matrix::Identity(r, r);
    dq.block(real.labels.er_offset(), real.labels.fr_offset(), r, r) = 0.5 * Matrix::Identity(r, r);
    real.diss = dq;
    return real;
}

/// Block data of the structured realization: the monotone map over the
/// joint effort space split into skew and PSD parts, the constraint maps,
/// and the augmented Lagrange pair.
struct StructuredRealization {
    Matrix p, s;
    Matrix j, r, b, v, n, w;
    Matrix g, g_p;
    Matrix p_a, s_a;
    DescriptorRealization descriptor;

    Index multiplier_dim() const { return g.cols(); }
};

/// Realization of an (M, L) system per the augmented block form: embeds M as
/// a constrained graph over the joint effort space, splits the monotone map,
/// and assembles
///   [P 0; 0 0] (z', l')^T = [J-R G; G^T 0][S 0; 0 I](z, l)^T + [B-V; G_P^T] e_P
///   f_P = (B+V)^T S z - G_P l + (N+W) e_P.
/// All algebraic constraints appear through the singular augmented P.
inline StructuredRealization realize_ml_structured(const PhDaeML& sys, const Tolerance& tol = {}) {
    const Index n = sys.monotone.layout().n;
    const Index p = sys.monotone.layout().p;
    const GraphEmbedding ge = embed_as_graph(fold_ports(sys.monotone), tol);
    auto [j2, rs2] = skew_symmetric_split(ge.mmap);
    const Index lam = ge.g.cols();

    StructuredRealization sr;
    sr.p = sys.storage.p;
    sr.s = sys.storage.s;
    // mmap = -J2 + Rs2 with J2 = [J, B; -B^T, -N] and Rs2 = [R, V; V^T, W]
    sr.j = j2.topLeftCorner(n, n);
    sr.b = j2.topRightCorner(n, p);
    sr.n = -j2.bottomRightCorner(p, p);
    sr.r = rs2.topLeftCorner(n, n);
    sr.v = rs2.topRightCorner(n, p);
    sr.w = rs2.bottomRightCorner(p, p);
    sr.g = ge.g.topRows(n);
    sr.g_p = ge.g.bottomRows(p);

    sr.p_a = Matrix::Zero(n + lam, n + lam);
    sr.p_a.topLeftCorner(n, n) = sr.p;
    sr.s_a = Matrix::Identity(n + lam, n + lam);
    sr.s_a.topLeftCorner(n, n) = sr.s;

    PsdVerdict psd = psd_cone_check(rs2, tol);
    if (!psd.psd)
        throw Error("realize_ml_structured: dissipation block failed PSD verification");

    DescriptorRealization& real = sr.descriptor;
    real.labels = {n, lam, 0, 0, 0};
    real.n_ports = p;
    real.route = "structured";
    real.e = sr.p_a;
    real.a = Matrix::Zero(n + lam, n + lam);
    real.a.topLeftCorner(n, n) = (sr.j - sr.r) * sr.s;
    real.a.topRightCorner(n, lam) = sr.g;
    real.a.bottomLeftCorner(lam, n) = sr.g.transpose() * sr.s;
    real.b_in = Matrix::Zero(n + lam, p);
    real.b_in.topRows(n) = sr.b - sr.v;
    real.b_in.bottomRows(lam) = sr.g_p.transpose();
    real.c_out = Matrix::Zero(p, n + lam);
    real.c_out.leftCols(n) = (sr.b + sr.v).transpose() * sr.s;
    real.c_out.rightCols(lam) = -sr.g_p;
    real.d_out = sr.n + sr.w;
    real.ham = sr.s.transpose() * sr.p;

    // dissipated power [S z; u]^T [R V; V^T W] [S z; u]
    Matrix t = Matrix::Zero(n + p, n + lam + p);
    t.topLeftCorner(n, n) = sr.s;
    t.bottomRightCorner(p, p) = Matrix::Identity(p, p);
    real.diss = t.transpose() * rs2 * t;
    return sr;
}

/// Realization of an (M, L) system through a maximal annihilator
/// [A C A_P C_P] of the image basis of M:
///   A P z' = C S z + A_P f_P + C_P e_P
/// with f_P carried as an algebraic state.
inline DescriptorRealization realize_ml_annihilator(const PhDaeML& sys, const Tolerance& tol = {}) {
    const PairingLayout& l = sys.monotone.layout();
    const Index n = l.n, p = l.p;
    const Matrix ann = sys.monotone.kernel_rows();
    const Matrix blk_a = ann.middleCols(l.f_offset(), n);
    const Matrix blk_c = ann.middleCols(l.e_offset(), n);
    const Matrix blk_ap = ann.middleCols(l.fp_offset(), p);
    const Matrix blk_cp = ann.middleCols(l.ep_offset(), p);
    const Index rows = ann.rows();

    DescriptorRealization real;
    real.labels = {n, 0, 0, 0, p};
    real.n_ports = p;
    real.route = "annihilator";
    real.e = Matrix::Zero(rows, n + p);
    real.e.leftCols(n) = blk_a * sys.storage.p;
    real.a = Matrix::Zero(rows, n + p);
    real.a.leftCols(n) = blk_c * sys.storage.s;
    real.a.rightCols(p) = blk_ap;
    real.b_in = blk_cp;
    real.c_out = Matrix::Zero(p, n + p);
    real.c_out.rightCols(p) = Matrix::Identity(p, p);
    real.d_out = Matrix::Zero(p, p);
    real.ham = sys.storage.s.transpose() * sys.storage.p;
    (void)tol;
    return real;
}

/// Composition D o R over the shared resistive pair.
inline PhDaeML dlr_to_ml(const PhDaeDLR& sys, const Tolerance& tol = {}) {
    LinearStructure m =
        compose(sys.dirac, sys.resistive.structure, {Block::resistive, Block::state}, tol);
    return make_ml(std::move(m), sys.storage);
}

/// Decomposition M = D o R; inverts dlr_to_ml at subspace level.
inline PhDaeDLR ml_to_dlr(const PhDaeML& sys, bool reduce, const Tolerance& tol = {}) {
    DiracResistivePair pair = split_dirac_resistive(sys.monotone, reduce, tol);
    return {std::move(pair.dirac), sys.storage,
            {pair.resistive_p, pair.resistive_s, std::move(pair.resistive)}};
}

/// Augmented Hamiltonian of the structured realization; the multiplier block
/// is degenerate, so the value never depends on lambda.
inline double hamiltonian_augmented(const StructuredRealization& sr, const Vector& z,
                                    const Vector& lambda) {
    if (z.size() != sr.p.rows() || lambda.size() != sr.multiplier_dim())
        throw InvalidInput("hamiltonian_augmented: dimension mismatch");
    Vector za(z.size() + lambda.size());
    za << z, lambda;
    return 0.5 * za.dot(sr.s_a.transpose() * sr.p_a * za);
}

/// Solution subspace of a realization over (v, z, f_P, e_P) with v standing
/// for z'. Auxiliary variables are existentially eliminated, resistive pair
/// first, then multipliers; the result only depends on the solution set, so
/// realizations of one system can be compared with subspace_equal.
inline LinearStructure admissible_set(const DescriptorRealization& real, const Tolerance& tol = {}) {
    const StateLabels& lb = real.labels;
    const Index n = lb.n_z, p = real.n_ports;
    const bool fp_is_state = lb.n_fp > 0;
    const Index out_rows = (!fp_is_state && p > 0) ? p : 0;
    const Index rows = real.e.rows() + out_rows;

    // columns: v | z | f_P | e_P | lambda | f_R | e_R
    const Index kept_cols = 2 * n + 2 * p;
    const Index aux_lambda = lb.n_lambda, aux_r = lb.n_fr + lb.n_er;
    Matrix rel = Matrix::Zero(rows, kept_cols + aux_lambda + aux_r);

    auto a_cols = [&](Index off, Index cnt) { return real.a.middleCols(off, cnt); };
    rel.block(0, 0, real.e.rows(), n) = real.e.middleCols(lb.z_offset(), n);
    rel.block(0, n, real.e.rows(), n) = -a_cols(lb.z_offset(), n);
    if (fp_is_state)
        rel.block(0, 2 * n, real.e.rows(), p) = -a_cols(lb.fp_offset(), lb.n_fp);
    rel.block(0, 2 * n + p, real.e.rows(), p) = -real.b_in;
    rel.block(0, kept_cols, real.e.rows(), aux_lambda) = -a_cols(lb.lambda_offset(), aux_lambda);
    rel.block(0, kept_cols + aux_lambda, real.e.rows(), aux_r) = -a_cols(lb.fr_offset(), aux_r);

    if (out_rows > 0) {
        rel.block(real.e.rows(), 2 * n, p, p) = Matrix::Identity(p, p);
        rel.block(real.e.rows(), n, p, n) = -real.c_out.middleCols(lb.z_offset(), n);
        rel.block(real.e.rows(), 2 * n + p, p, p) = -real.d_out;
        rel.block(real.e.rows(), kept_cols, p, aux_lambda) =
            -real.c_out.middleCols(lb.lambda_offset(), aux_lambda);
        rel.block(real.e.rows(), kept_cols + aux_lambda, p, aux_r) =
            -real.c_out.middleCols(lb.fr_offset(), aux_r);
    }

    // eliminate the resistive pair, then the multipliers
    Matrix current = rel;
    for (Index width : {aux_r, aux_lambda}) {
        if (width == 0) continue;
        const Matrix ann = left_annihilator(current.rightCols(width), tol);
        current = (ann * current.leftCols(current.cols() - width)).eval();
    }

    return LinearStructure({n, 0, p}, null_basis(current, tol), tol);
}

}  // namespace phdae
