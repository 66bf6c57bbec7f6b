#pragma once

#include <phdae/linalg.hpp>

#include <optional>
#include <string>
#include <utility>

namespace phdae {

/// Block layout of the paired space F x E (x F_R x E_R x F_P x E_P):
/// n state flows, r resistive flows, p external port flows. Vectors over the
/// ambient space are stored in the fixed block order
/// (f, e, f_R, e_R, f_P, e_P); the ambient dimension is 2(n + r + p).
struct PairingLayout {
    Index n = 0;
    Index r = 0;
    Index p = 0;

    Index half() const { return n + r + p; }
    Index ambient() const { return 2 * (n + r + p); }

    Index f_offset() const { return 0; }
    Index e_offset() const { return n; }
    Index fr_offset() const { return 2 * n; }
    Index er_offset() const { return 2 * n + r; }
    Index fp_offset() const { return 2 * (n + r); }
    Index ep_offset() const { return 2 * (n + r) + p; }

    bool operator==(const PairingLayout&) const = default;
};

enum class Block { state, resistive, port };

inline Index block_size(const PairingLayout& l, Block b) {
    switch (b) {
        case Block::state: return l.n;
        case Block::resistive: return l.r;
        case Block::port: return l.p;
    }
    return 0;
}

inline Index flow_offset(const PairingLayout& l, Block b) {
    switch (b) {
        case Block::state: return l.f_offset();
        case Block::resistive: return l.fr_offset();
        case Block::port: return l.fp_offset();
    }
    return 0;
}

inline Index effort_offset(const PairingLayout& l, Block b) {
    switch (b) {
        case Block::state: return l.e_offset();
        case Block::resistive: return l.er_offset();
        case Block::port: return l.ep_offset();
    }
    return 0;
}

/// Matrix of the symmetric pairing <(f,e),(f',e')>_+ = e.f' + e'.f, extended
/// blockwise over resistive and port blocks. Eigenvalues are +1 and -1, each
/// with multiplicity n+r+p.
inline Matrix plus_form_matrix(const PairingLayout& l) {
    Matrix pi = Matrix::Zero(l.ambient(), l.ambient());
    for (Block b : {Block::state, Block::resistive, Block::port}) {
        const Index m = block_size(l, b);
        const Index fo = flow_offset(l, b);
        const Index eo = effort_offset(l, b);
        pi.block(fo, eo, m, m) = Matrix::Identity(m, m);
        pi.block(eo, fo, m, m) = Matrix::Identity(m, m);
    }
    return pi;
}

/// Matrix of the skew pairing <(f,e),(f',e')>_- = e.f' - e'.f (the standard
/// symplectic form on each block pair).
inline Matrix minus_form_matrix(const PairingLayout& l) {
    Matrix pi = Matrix::Zero(l.ambient(), l.ambient());
    for (Block b : {Block::state, Block::resistive, Block::port}) {
        const Index m = block_size(l, b);
        const Index fo = flow_offset(l, b);
        const Index eo = effort_offset(l, b);
        pi.block(fo, eo, m, m) = -Matrix::Identity(m, m);
        pi.block(eo, fo, m, m) = Matrix::Identity(m, m);
    }
    return pi;
}

struct StructureFlags {
    bool dirac = false;
    bool lagrange = false;
    bool nonneg_lagrange = false;
    bool monotone = false;
    bool maximal_monotone = false;
};

/// Residuals behind the flags, for reporting.
struct ClassifyReport {
    StructureFlags flags;
    double plus_form_norm = 0.0;    // ||W^T Pi_+ W||
    double minus_form_norm = 0.0;   // ||W^T Pi_- W||
    double plus_form_min_eig = 0.0; // min eig of sym(W^T Pi_+ W)
    Vector monotone_witness;        // member with negative duality product, if any
    Index dim = 0;
};

/// Kernel-representation blocks (K f + L e + K_R f_R + L_R e_R + K_P f_P +
/// L_P e_P = 0), kept verbatim when a structure was built from user data so
/// realizations can reuse the original coefficients.
struct KernelBlocks {
    Matrix K, L, K_R, L_R, K_P, L_P;

    Matrix stacked() const {
        Matrix a(K.rows(), K.cols() + L.cols() + K_R.cols() + L_R.cols() + K_P.cols() + L_P.cols());
        a << K, L, K_R, L_R, K_P, L_P;
        return a;
    }
};

/// A subspace of the paired space, held as an orthonormal image basis with a
/// cached kernel representation and eagerly computed classification flags.
/// Immutable after construction.
class LinearStructure {
public:
    LinearStructure(PairingLayout layout, const Matrix& spanning, const Tolerance& tol = {})
        : layout_(layout), tol_(tol) {
        require_finite(spanning, "LinearStructure");
        if (spanning.rows() != layout.ambient())
            throw InvalidInput("LinearStructure: spanning matrix rows do not match layout");
        basis_ = column_basis(spanning, tol);
        kernel_rows_ = left_annihilator(basis_, tol);
        classify_();
    }

    const PairingLayout& layout() const { return layout_; }
    const Matrix& basis() const { return basis_; }
    const Matrix& kernel_rows() const { return kernel_rows_; }
    const StructureFlags& flags() const { return flags_; }
    const ClassifyReport& report() const { return report_; }
    const Tolerance& tolerance() const { return tol_; }
    Index dim() const { return basis_.cols(); }
    Index ambient() const { return basis_.rows(); }

    const std::optional<KernelBlocks>& raw_kernel() const { return raw_kernel_; }
    void set_raw_kernel(KernelBlocks kb) { raw_kernel_ = std::move(kb); }

    /// Rows of the basis belonging to one flow or effort block.
    Matrix flow_rows(Block b) const {
        return basis_.middleRows(flow_offset(layout_, b), block_size(layout_, b));
    }
    Matrix effort_rows(Block b) const {
        return basis_.middleRows(effort_offset(layout_, b), block_size(layout_, b));
    }

private:
    void classify_() {
        const Matrix pi_plus = plus_form_matrix(layout_);
        const Matrix pi_minus = minus_form_matrix(layout_);
        const Matrix c_plus = basis_.transpose() * pi_plus * basis_;
        const Matrix c_minus = basis_.transpose() * pi_minus * basis_;

        ClassifyReport rep;
        rep.dim = basis_.cols();
        rep.plus_form_norm = c_plus.norm();
        rep.minus_form_norm = c_minus.norm();

        const Index half = layout_.half();
        StructureFlags fl;
        fl.dirac = rep.plus_form_norm <= tol_.sub_tol && rep.dim == half;
        fl.lagrange = rep.minus_form_norm <= tol_.sub_tol && rep.dim == half;

        PsdVerdict psd = psd_cone_check((c_plus + c_plus.transpose()) / 2.0, tol_);
        rep.plus_form_min_eig = psd.min_eigenvalue;
        fl.monotone = psd.psd;
        if (!psd.psd) rep.monotone_witness = basis_ * psd.witness;
        fl.maximal_monotone = fl.monotone && rep.dim == half;
        fl.nonneg_lagrange = fl.lagrange && fl.monotone;

        rep.flags = fl;
        flags_ = fl;
        report_ = rep;
    }

    PairingLayout layout_;
    Tolerance tol_;
    Matrix basis_;
    Matrix kernel_rows_;
    StructureFlags flags_;
    ClassifyReport report_;
    std::optional<KernelBlocks> raw_kernel_;
};

/// Classification of an already-built structure (flags are cached at
/// construction; this re-derives them, e.g. under a different tolerance).
inline ClassifyReport classify(const LinearStructure& s, const Tolerance& tol) {
    return LinearStructure(s.layout(), s.basis(), tol).report();
}

/// Dirac structure from kernel blocks, checking both conditions: the
/// symmetric combination K L^T + L K^T + ... must vanish and the stacked
/// rows must have full row rank n+r+p.
inline LinearStructure dirac_from_kernel(const KernelBlocks& kb, const PairingLayout& layout,
                                         const Tolerance& tol = {}) {
    const Index rows = kb.K.rows();
    if (kb.L.rows() != rows || kb.K_R.rows() != rows || kb.L_R.rows() != rows ||
        kb.K_P.rows() != rows || kb.L_P.rows() != rows)
        throw InvalidInput("dirac_from_kernel: inconsistent row counts");
    if (kb.K.cols() != layout.n || kb.L.cols() != layout.n || kb.K_R.cols() != layout.r ||
        kb.L_R.cols() != layout.r || kb.K_P.cols() != layout.p || kb.L_P.cols() != layout.p)
        throw InvalidInput("dirac_from_kernel: block widths do not match layout");

    const Matrix sym = kb.K * kb.L.transpose() + kb.L * kb.K.transpose() +
                       kb.K_R * kb.L_R.transpose() + kb.L_R * kb.K_R.transpose() +
                       kb.K_P * kb.L_P.transpose() + kb.L_P * kb.K_P.transpose();
    const Matrix stacked = kb.stacked();
    const double scale = std::max(1.0, stacked.squaredNorm());
    if (sym.norm() > tol.sub_tol * scale)
        throw ConditionViolation("dirac kernel: K L^T + L K^T + ... != 0", sym.norm());
    const Index rank = matrix_rank(stacked, tol);
    if (rank != layout.half())
        throw ConditionViolation("dirac kernel: rank defect",
                                 static_cast<double>(layout.half() - rank));

    LinearStructure s(layout, null_basis(stacked, tol), tol);
    s.set_raw_kernel(kb);
    return s;
}

/// Lagrange structure as im [P; S] over a state block of size n. The pair
/// must satisfy S^T P = P^T S and rank [P; S] = n. Carries no resistive or
/// port blocks.
inline LinearStructure lagrange_from_ps(const Matrix& p, const Matrix& s, const Tolerance& tol = {}) {
    if (p.rows() != p.cols() || s.rows() != s.cols() || p.rows() != s.rows())
        throw InvalidInput("lagrange_from_ps: P, S must be square of equal size");
    const Index n = p.rows();
    const Matrix sp = s.transpose() * p;
    const double scale = std::max(1.0, p.squaredNorm() + s.squaredNorm());
    const Matrix asym = sp - sp.transpose();
    if (asym.norm() > tol.sub_tol * scale)
        throw ConditionViolation("lagrange: S^T P not symmetric", asym.norm());
    Matrix stacked(2 * n, n);
    stacked << p, s;
    const Index rank = matrix_rank(stacked, tol);
    if (rank != n)
        throw ConditionViolation("lagrange: rank [P; S] defect", static_cast<double>(n - rank));
    return LinearStructure({n, 0, 0}, stacked, tol);
}

/// Maximally monotone structure from the image representation
/// im [Z^T; Y^T; Z_P^T; Y_P^T], checking the PSD combination and full rank.
inline LinearStructure monotone_from_image(const Matrix& z, const Matrix& y, const Matrix& z_p,
                                           const Matrix& y_p, const PairingLayout& layout,
                                           const Tolerance& tol = {}) {
    if (layout.r != 0)
        throw InvalidInput("monotone_from_image: layout must not carry a resistive block");
    const Index k = z.rows();
    if (y.rows() != k || z_p.rows() != k || y_p.rows() != k)
        throw InvalidInput("monotone_from_image: inconsistent column counts");
    if (z.cols() != layout.n || y.cols() != layout.n || z_p.cols() != layout.p || y_p.cols() != layout.p)
        throw InvalidInput("monotone_from_image: block widths do not match layout");

    const Matrix form = y * z.transpose() + z * y.transpose() +
                        y_p * z_p.transpose() + z_p * y_p.transpose();
    PsdVerdict psd = psd_cone_check((form + form.transpose()) / 2.0, tol);
    if (!psd.psd)
        throw ConditionViolation("monotone image: Y Z^T + Z Y^T + ... not PSD",
                                 -psd.min_eigenvalue, psd.witness);
    Matrix stacked(k, 2 * (layout.n + layout.p));
    stacked << z, y, z_p, y_p;
    const Index rank = matrix_rank(stacked, tol);
    if (rank != layout.half())
        throw ConditionViolation("monotone image: rank [Z Y Z_P Y_P] defect",
                                 static_cast<double>(layout.half() - rank));

    Matrix image(2 * (layout.n + layout.p), k);
    image << z.transpose(), y.transpose(), z_p.transpose(), y_p.transpose();
    return LinearStructure(layout, image, tol);
}

enum class GraphKind { skew_dirac, symmetric_lagrange, monotone };

/// Graph of a square map over (f, e), validated against the declared kind:
/// skew maps give Dirac structures, symmetric maps Lagrange structures, maps
/// with PSD symmetric part maximally monotone structures. Dirac and monotone
/// graphs are oriented effort-to-flow, {(M e, e)}; Lagrange graphs are the
/// classical state-to-effort graphs {(x, M x)}.
inline LinearStructure graph_structure(const Matrix& m, GraphKind kind, const Tolerance& tol = {}) {
    require_finite(m, "graph_structure");
    if (m.rows() != m.cols())
        throw InvalidInput("graph_structure: map must be square");
    const Index n = m.rows();
    const double scale = std::max(1.0, m.norm());
    switch (kind) {
        case GraphKind::skew_dirac: {
            const double res = (m + m.transpose()).norm();
            if (res > tol.sub_tol * scale)
                throw ConditionViolation("graph: map not skew-symmetric", res);
            break;
        }
        case GraphKind::symmetric_lagrange: {
            const double res = (m - m.transpose()).norm();
            if (res > tol.sub_tol * scale)
                throw ConditionViolation("graph: map not symmetric", res);
            break;
        }
        case GraphKind::monotone: {
            PsdVerdict psd = psd_cone_check(m + m.transpose(), tol);
            if (!psd.psd)
                throw ConditionViolation("graph: symmetric part indefinite",
                                         -psd.min_eigenvalue, psd.witness);
            break;
        }
    }
    Matrix image(2 * n, n);
    if (kind == GraphKind::symmetric_lagrange)
        image << Matrix::Identity(n, n), m;
    else
        image << m, Matrix::Identity(n, n);
    return LinearStructure({n, 0, 0}, image, tol);
}

/// Kernel representation: orthonormal rows annihilating the structure.
inline Matrix kernel_rep(const LinearStructure& s) { return s.kernel_rows(); }

/// Structure from full-row-rank kernel rows over the given layout.
inline LinearStructure image_rep(const Matrix& rows, const PairingLayout& layout,
                                 const Tolerance& tol = {}) {
    if (rows.cols() != layout.ambient())
        throw InvalidInput("image_rep: row width does not match layout");
    if (matrix_rank(rows, tol) != rows.rows())
        throw ConditionViolation("image_rep: kernel rows rank-deficient",
                                 static_cast<double>(rows.rows() - matrix_rank(rows, tol)));
    return LinearStructure(layout, null_basis(rows, tol), tol);
}

}  // namespace phdae
