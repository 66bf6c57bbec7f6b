#pragma once

#include <phdae/core.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <utility>

namespace phdae {

inline Index matrix_rank(const Matrix& m, const Tolerance& tol = {}) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    const double cutoff = tol.rank_cutoff(sv(0), m.rows(), m.cols());
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;
    return r;
}

/// Orthonormal basis of the column space. Column count equals the numerical
/// rank, decided from the singular values of `m`.
inline Matrix column_basis(const Matrix& m, const Tolerance& tol = {}) {
    require_finite(m, "column_basis");
    if (m.rows() == 0 || m.cols() == 0) return Matrix(m.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cutoff = tol.rank_cutoff(sv(0), m.rows(), m.cols());
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;
    return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of the null space (right kernel) of `m`.
inline Matrix null_basis(const Matrix& m, const Tolerance& tol = {}) {
    if (m.rows() == 0 || m.cols() == 0) return Matrix::Identity(m.cols(), m.cols());
    require_finite(m, "null_basis");
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = tol.rank_cutoff(sv(0), m.rows(), m.cols());
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;
    return svd.matrixV().rightCols(m.cols() - r);
}

/// Maximal annihilator: rows A with A*m = 0, orthonormal, and ker A = im m.
/// Row count is rows(m) - rank(m).
inline Matrix left_annihilator(const Matrix& m, const Tolerance& tol = {}) {
    require_finite(m, "left_annihilator");
    if (m.cols() == 0 || m.rows() == 0) return Matrix::Identity(m.rows(), m.rows());
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const double cutoff = tol.rank_cutoff(sv(0), m.rows(), m.cols());
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;
    return svd.matrixU().rightCols(m.rows() - r).transpose();
}

/// Orthonormal basis of the orthogonal complement of im m.
inline Matrix orthogonal_complement(const Matrix& m, const Tolerance& tol = {}) {
    return left_annihilator(m, tol).transpose();
}

/// Sine of the largest principal angle between the spans of two matrices
/// with orthonormal columns. Returns 0 for two empty spans; only meaningful
/// as an equality gap when the ranks agree.
inline double subspace_gap(const Matrix& b1, const Matrix& b2) {
    if (b1.rows() != b2.rows())
        throw InvalidInput("subspace_gap: ambient dimensions differ");
    if (b1.cols() == 0 && b2.cols() == 0) return 0.0;
    if (b1.cols() == 0 || b2.cols() == 0) return 1.0;
    // || (I - B1 B1^T) B2 ||_2 and symmetrically; equal subspaces give 0.
    const Matrix r12 = b2 - b1 * (b1.transpose() * b2);
    const Matrix r21 = b1 - b2 * (b2.transpose() * b1);
    const double g12 = Eigen::JacobiSVD<Matrix>(r12).singularValues()(0);
    const double g21 = Eigen::JacobiSVD<Matrix>(r21).singularValues()(0);
    return std::max(g12, g21);
}

/// True iff the two column spans coincide: equal numerical ranks and largest
/// principal angle within tol.sub_tol. Inputs need not be orthonormal.
inline bool subspace_equal(const Matrix& b1, const Matrix& b2, const Tolerance& tol = {}) {
    if (b1.rows() != b2.rows())
        throw InvalidInput("subspace_equal: ambient dimensions differ");
    const Matrix q1 = column_basis(b1, tol);
    const Matrix q2 = column_basis(b2, tol);
    if (q1.cols() != q2.cols()) return false;
    return subspace_gap(q1, q2) <= tol.sub_tol;
}

/// Splits a square matrix as m = -J + Rs with J skew and Rs symmetric.
inline std::pair<Matrix, Matrix> skew_symmetric_split(const Matrix& m) {
    require_finite(m, "skew_symmetric_split");
    if (m.rows() != m.cols())
        throw InvalidInput("skew_symmetric_split: matrix must be square");
    Matrix skew = (m.transpose() - m) / 2.0;  // J
    Matrix sym = (m + m.transpose()) / 2.0;   // Rs
    return {std::move(skew), std::move(sym)};
}

struct PsdVerdict {
    bool psd = false;
    double min_eigenvalue = 0.0;
    Vector witness;  // empty when psd

    explicit operator bool() const { return psd; }
};

/// PSD test with an eigenvector witness on rejection. The input must be
/// symmetric up to tol.sub_tol (relative to its norm); small skew parts are
/// dropped, larger ones rejected.
inline PsdVerdict psd_cone_check(const Matrix& s, const Tolerance& tol = {}) {
    require_finite(s, "psd_cone_check");
    if (s.rows() != s.cols())
        throw InvalidInput("psd_cone_check: matrix must be square");
    if (s.rows() == 0) return {true, 0.0, {}};
    const double scale = std::max(s.norm(), 1.0);
    const double asym = (s - s.transpose()).norm();
    if (asym > tol.sub_tol * scale)
        throw InvalidInput("psd_cone_check: input asymmetric beyond tolerance");
    Eigen::SelfAdjointEigenSolver<Matrix> eig((s + s.transpose()) / 2.0);
    const double lam_min = eig.eigenvalues()(0);
    const double lam_abs_max = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (lam_min >= -tol.psd_slack(lam_abs_max)) return {true, lam_min, {}};
    return {false, lam_min, eig.eigenvectors().col(0)};
}

struct PsdFactor {
    Matrix g;  // orthonormal columns, count = rank
    Matrix r;  // symmetric positive definite, size = rank
};

/// Rank-revealing factorization Rs = G * R * G^T of a PSD matrix, with G
/// orthonormal and R diagonal positive definite. Eigenvalues at or below the
/// rank cutoff are discarded.
inline PsdFactor psd_rank_factor(const Matrix& rs, const Tolerance& tol = {}) {
    const PsdVerdict verdict = psd_cone_check(rs, tol);
    if (!verdict.psd)
        throw ConditionViolation("psd_rank_factor: input not positive semidefinite",
                                 -verdict.min_eigenvalue, verdict.witness);
    Eigen::SelfAdjointEigenSolver<Matrix> eig((rs + rs.transpose()) / 2.0);
    const Vector& lam = eig.eigenvalues();
    const double lam_max = lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0;
    const double cutoff = tol.rank_cutoff(lam_max, rs.rows(), rs.cols());
    Index keep = 0;
    for (Index i = 0; i < lam.size(); ++i)
        if (lam(i) > cutoff) ++keep;
    PsdFactor f;
    f.g.resize(rs.rows(), keep);
    Vector kept(keep);
    Index k = 0;
    for (Index i = 0; i < lam.size(); ++i) {
        if (lam(i) > cutoff) {
            f.g.col(k) = eig.eigenvectors().col(i);
            kept(k++) = lam(i);
        }
    }
    f.r = kept.asDiagonal();
    return f;
}

/// Minimum-norm least-squares solve via SVD.
inline Matrix pinv_solve(const Matrix& a, const Matrix& b, const Tolerance& tol = {}) {
    if (a.rows() != b.rows()) throw InvalidInput("pinv_solve: row mismatch");
    if (a.rows() == 0 || a.cols() == 0) return Matrix::Zero(a.cols(), b.cols());
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = tol.rank_cutoff(sv(0), a.rows(), a.cols());
    svd.setThreshold(sv(0) > 0 ? cutoff / sv(0) : 1.0);
    return svd.solve(b);
}

}  // namespace phdae
