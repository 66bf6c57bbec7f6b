#pragma once

#include <phdae/structures.hpp>

#include <utility>
#include <vector>

namespace phdae {

/// The four defect subspaces of a maximally monotone structure over F x E:
///   F0 = { f | (f,0) in M }     F1 = { f | (f,e) in M for some e }
///   E0 = { e | (0,e) in M }     E1 = { e | (f,e) in M for some f }
/// For maximally monotone M they satisfy F0 = E1-perp and E0 = F1-perp.
struct DefectSpaces {
    Matrix f0, f1, e0, e1;  // orthonormal bases
};

namespace detail {

inline void require_maximal_monotone(const LinearStructure& m, const char* op) {
    if (!m.flags().maximal_monotone)
        throw NotMaximalMonotone(std::string(op) + ": structure is not maximally monotone");
}

inline void require_state_only(const LinearStructure& m, const char* op) {
    if (m.layout().r != 0 || m.layout().p != 0)
        throw InvalidInput(std::string(op) +
                           ": resistive/port blocks must be folded into the state block first");
}

}  // namespace detail

/// Reorders a structure over (n, 0, p) into one over (n+p, 0, 0) by folding
/// the port pair into the state pair. The pairing forms agree under this
/// permutation, so every classification flag carries over.
inline LinearStructure fold_ports(const LinearStructure& m) {
    const PairingLayout& l = m.layout();
    if (l.r != 0) throw InvalidInput("fold_ports: resistive block not supported");
    if (l.p == 0) return m;
    const Index n = l.n, p = l.p;
    Matrix folded(2 * (n + p), m.dim());
    folded.topRows(n) = m.basis().middleRows(l.f_offset(), n);
    folded.middleRows(n, p) = m.basis().middleRows(l.fp_offset(), p);
    folded.middleRows(n + p, n) = m.basis().middleRows(l.e_offset(), n);
    folded.bottomRows(p) = m.basis().middleRows(l.ep_offset(), p);
    return LinearStructure({n + p, 0, 0}, folded, m.tolerance());
}

/// Inverse of fold_ports: reads the trailing p flows/efforts of a structure
/// over (n+p, 0, 0) as a port block, yielding a structure over (n, 0, p).
inline LinearStructure unfold_ports(const LinearStructure& m, Index p) {
    const PairingLayout& l = m.layout();
    if (l.r != 0 || l.p != 0) throw InvalidInput("unfold_ports: expected a state-only structure");
    if (p < 0 || p > l.n) throw InvalidInput("unfold_ports: invalid port dimension");
    const Index n = l.n - p;
    PairingLayout lu{n, 0, p};
    Matrix basis(lu.ambient(), m.dim());
    basis.middleRows(lu.f_offset(), n) = m.basis().topRows(n);
    basis.middleRows(lu.fp_offset(), p) = m.basis().middleRows(n, p);
    basis.middleRows(lu.e_offset(), n) = m.basis().middleRows(n + p, n);
    basis.middleRows(lu.ep_offset(), p) = m.basis().bottomRows(p);
    return LinearStructure(lu, basis, m.tolerance());
}

inline DefectSpaces defect_spaces(const LinearStructure& m, const Tolerance& tol = {}) {
    detail::require_maximal_monotone(m, "defect_spaces");
    detail::require_state_only(m, "defect_spaces");
    const Index n = m.layout().n;
    const Matrix wf = m.basis().topRows(n);
    const Matrix we = m.basis().bottomRows(n);

    DefectSpaces d;
    d.f1 = column_basis(wf, tol);
    d.e1 = column_basis(we, tol);
    d.f0 = column_basis(wf * null_basis(we, tol), tol);
    d.e0 = column_basis(we * null_basis(wf, tol), tol);

    // eq (key1) identities hold for maximally monotone inputs; assert them.
    const double gap_f = subspace_gap(d.f0, orthogonal_complement(d.e1, tol));
    const double gap_e = subspace_gap(d.e0, orthogonal_complement(d.f1, tol));
    if (gap_f > tol.sub_tol || gap_e > tol.sub_tol)
        throw Error("defect_spaces: orthogonality identities violated beyond tolerance");
    return d;
}

/// Representation of a maximally monotone structure as the constrained graph
///   M = { (f,e) | exists lambda: f = Mmap e - G lambda, G^T e = 0 },
/// with Mmap a monotone map on all of E and G orthonormal columns spanning
/// F0 (= E1-perp). The multiplier dimension is n - dim E1.
struct GraphEmbedding {
    Matrix mmap;
    Matrix g;
    Index multiplier_dim = 0;
};

inline GraphEmbedding embed_as_graph(const LinearStructure& m, const Tolerance& tol = {}) {
    detail::require_maximal_monotone(m, "embed_as_graph");
    detail::require_state_only(m, "embed_as_graph");
    const Index n = m.layout().n;
    const Matrix wf = m.basis().topRows(n);
    const Matrix we = m.basis().bottomRows(n);

    const Matrix q1 = column_basis(we, tol);  // basis of E1
    // For each basis effort, a flow in its fiber; any solution works since
    // the fiber ambiguity lies in F0 = E1-perp and is projected out below.
    const Matrix coeff = pinv_solve(we, q1, tol);
    const Matrix fibers = wf * coeff;

    GraphEmbedding ge;
    ge.mmap = q1 * (q1.transpose() * fibers) * q1.transpose();
    ge.g = orthogonal_complement(q1, tol);  // = F0 by eq (key1)
    ge.multiplier_dim = ge.g.cols();
    return ge;
}

/// Expands a graph embedding back into the subspace it represents
/// (the right-hand side of the embedding definition, as an image basis).
inline LinearStructure expand_graph_embedding(const GraphEmbedding& ge, const Tolerance& tol = {}) {
    const Index n = ge.mmap.rows();
    const Matrix q1 = orthogonal_complement(ge.g, tol);  // ker G^T
    Matrix image(2 * n, q1.cols() + ge.g.cols());
    image.topRows(n) << ge.mmap * q1, -ge.g;
    image.bottomRows(n) << q1, Matrix::Zero(n, ge.g.cols());
    return LinearStructure({n, 0, 0}, image, tol);
}

/// Which block of each operand carries the shared flow/effort pair.
struct SharedBlocks {
    Block of_first = Block::resistive;
    Block of_second = Block::state;
};

namespace detail {

struct BlockCols {
    Index flow, effort, size;
};

inline BlockCols kernel_block_cols(const PairingLayout& l, Block b) {
    return {flow_offset(l, b), effort_offset(l, b), block_size(l, b)};
}

// Column extents of the non-shared blocks, in canonical order.
inline std::vector<std::pair<Index, Index>> rest_spans(const PairingLayout& l, Block shared) {
    std::vector<std::pair<Index, Index>> spans;
    for (Block b : {Block::state, Block::resistive, Block::port}) {
        if (b == shared) continue;
        if (block_size(l, b) == 0) continue;
        spans.emplace_back(flow_offset(l, b), block_size(l, b));
        spans.emplace_back(effort_offset(l, b), block_size(l, b));
    }
    return spans;
}

}  // namespace detail

/// Composition of two structures through a shared flow/effort pair:
///   M1 o M2 = { (w1, w2) | exists (f,e): (w1, f, e) in M1, (w2, -f, e) in M2 }
/// computed by stacking kernel representations and annihilating the shared
/// variables. The result lives over the merged non-shared blocks (first
/// operand's sub-blocks preceding the second's within each block kind). If
/// both operands are maximally monotone the result is verified to be so.
inline LinearStructure compose(const LinearStructure& m1, const LinearStructure& m2,
                               const SharedBlocks& shared = {}, const Tolerance& tol = {}) {
    const PairingLayout& l1 = m1.layout();
    const PairingLayout& l2 = m2.layout();
    const Index s = block_size(l1, shared.of_first);
    if (s != block_size(l2, shared.of_second))
        throw InvalidInput("compose: shared block dimensions disagree");

    const Matrix a1 = m1.kernel_rows();
    const Matrix a2 = m2.kernel_rows();
    const auto sh1 = detail::kernel_block_cols(l1, shared.of_first);
    const auto sh2 = detail::kernel_block_cols(l2, shared.of_second);
    const auto rest1 = detail::rest_spans(l1, shared.of_first);
    const auto rest2 = detail::rest_spans(l2, shared.of_second);

    Index rest1_cols = 0, rest2_cols = 0;
    for (auto [o, w] : rest1) rest1_cols += w;
    for (auto [o, w] : rest2) rest2_cols += w;

    const Index rows = a1.rows() + a2.rows();
    Matrix kept(rows, rest1_cols + rest2_cols);
    Matrix elim(rows, 2 * s);
    kept.setZero();
    elim.setZero();

    Index col = 0;
    for (auto [o, w] : rest1) {
        kept.block(0, col, a1.rows(), w) = a1.middleCols(o, w);
        col += w;
    }
    for (auto [o, w] : rest2) {
        kept.block(a1.rows(), col, a2.rows(), w) = a2.middleCols(o, w);
        col += w;
    }
    elim.block(0, 0, a1.rows(), s) = a1.middleCols(sh1.flow, s);
    elim.block(a1.rows(), 0, a2.rows(), s) = -a2.middleCols(sh2.flow, s);  // shared flow sign flip
    elim.block(0, s, a1.rows(), s) = a1.middleCols(sh1.effort, s);
    elim.block(a1.rows(), s, a2.rows(), s) = a2.middleCols(sh2.effort, s);

    const Matrix ann = left_annihilator(elim, tol);
    const Matrix reduced = ann * kept;

    // Merge layouts and map the kept columns into canonical block order.
    PairingLayout lr;
    lr.n = (shared.of_first == Block::state ? 0 : l1.n) + (shared.of_second == Block::state ? 0 : l2.n);
    lr.r = (shared.of_first == Block::resistive ? 0 : l1.r) + (shared.of_second == Block::resistive ? 0 : l2.r);
    lr.p = (shared.of_first == Block::port ? 0 : l1.p) + (shared.of_second == Block::port ? 0 : l2.p);

    std::vector<Index> target;  // canonical column index of each kept column
    target.reserve(rest1_cols + rest2_cols);
    auto push_block = [&](const PairingLayout& l, Block b, bool first_operand) {
        const Index w = block_size(l, b);
        if (w == 0) return;
        Index fo = flow_offset(lr, b), eo = effort_offset(lr, b);
        if (!first_operand) {
            // skip the first operand's share of this block kind
            const Index head = (shared.of_first == b) ? 0 : block_size(l1, b);
            fo += head;
            eo += head;
        }
        for (Index i = 0; i < w; ++i) target.push_back(fo + i);
        for (Index i = 0; i < w; ++i) target.push_back(eo + i);
    };
    for (Block b : {Block::state, Block::resistive, Block::port})
        if (b != shared.of_first) push_block(l1, b, true);
    for (Block b : {Block::state, Block::resistive, Block::port})
        if (b != shared.of_second) push_block(l2, b, false);

    Matrix rows_canonical = Matrix::Zero(reduced.rows(), lr.ambient());
    for (Index j = 0; j < reduced.cols(); ++j)
        rows_canonical.col(target[static_cast<size_t>(j)]) = reduced.col(j);

    LinearStructure result(lr, null_basis(rows_canonical, tol), tol);
    if (m1.flags().maximal_monotone && m2.flags().maximal_monotone &&
        !result.flags().maximal_monotone)
        throw Error("compose: result of maximally monotone operands failed verification");
    return result;
}

/// Decomposition M = D o R of a maximally monotone structure into a Dirac
/// structure with a resistive block and a nonnegative Lagrange (resistive)
/// structure. Port blocks of M ride along inside D. With reduce set, the
/// resistive pair is factored down to rank(symmetric part) dimensions.
struct DiracResistivePair {
    LinearStructure dirac;
    LinearStructure resistive;
    Matrix resistive_p, resistive_s;  // PS pair generating `resistive`
    bool reduced = false;
};

inline DiracResistivePair split_dirac_resistive(const LinearStructure& m, bool reduce,
                                                const Tolerance& tol = {}) {
    detail::require_maximal_monotone(m, "split_dirac_resistive");
    if (m.layout().r != 0)
        throw InvalidInput("split_dirac_resistive: input already carries a resistive block");
    const Index n = m.layout().n;
    const Index p = m.layout().p;
    const Index nf = n + p;  // folded state dimension

    const GraphEmbedding ge = embed_as_graph(fold_ports(m), tol);
    auto [j2, rs2] = skew_symmetric_split(ge.mmap);
    const Matrix q1 = orthogonal_complement(ge.g, tol);  // ker G^T
    const Index lam = ge.g.cols();

    Matrix gr;       // flow coupling of the resistive pair into D
    Matrix rmat;     // resistive relation map: f_R = rmat e_R
    if (reduce) {
        PsdFactor f = psd_rank_factor(rs2, tol);
        gr = f.g;
        rmat = f.r;
    } else {
        gr = Matrix::Identity(nf, nf);
        rmat = rs2;
    }
    const Index r = gr.cols();

    // D over (f, e, f_R, e_R, f_P, e_P), parametrized by (y, lambda, phi):
    //   ehat = Q1 y,  fhat = -J2 ehat - G lambda - G_R phi,
    //   f_R = phi,    e_R = G_R^T ehat.
    const Index d1 = q1.cols();
    const Matrix jq = -j2 * q1;
    PairingLayout ld{n, r, p};
    Matrix w = Matrix::Zero(ld.ambient(), d1 + lam + r);
    auto set_fhat = [&](Index row0, Index count, Index src_row) {
        w.block(row0, 0, count, d1) = jq.middleRows(src_row, count);
        w.block(row0, d1, count, lam) = -ge.g.middleRows(src_row, count);
        w.block(row0, d1 + lam, count, r) = -gr.middleRows(src_row, count);
    };
    auto set_ehat = [&](Index row0, Index count, Index src_row) {
        w.block(row0, 0, count, d1) = q1.middleRows(src_row, count);
    };
    set_fhat(ld.f_offset(), n, 0);
    set_ehat(ld.e_offset(), n, 0);
    if (p > 0) {
        set_fhat(ld.fp_offset(), p, n);
        set_ehat(ld.ep_offset(), p, n);
    }
    w.block(ld.fr_offset(), d1 + lam, r, r) = Matrix::Identity(r, r);
    w.block(ld.er_offset(), 0, r, d1) = gr.transpose() * q1;

    DiracResistivePair pair{
        LinearStructure(ld, w, tol),
        lagrange_from_ps(rmat, Matrix::Identity(r, r), tol),
        rmat,
        Matrix::Identity(r, r),
        reduce,
    };
    if (!pair.dirac.flags().dirac)
        throw Error("split_dirac_resistive: Dirac factor failed verification");
    if (!pair.resistive.flags().nonneg_lagrange)
        throw Error("split_dirac_resistive: resistive factor failed verification");
    return pair;
}

}  // namespace phdae
