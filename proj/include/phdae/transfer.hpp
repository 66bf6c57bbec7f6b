#pragma once

#include <phdae/systems.hpp>

#include <Eigen/LU>

#include <complex>
#include <limits>
#include <utility>
#include <vector>

namespace phdae {

/// Standard input-state-output form obtained from a structured realization
/// by eliminating the multipliers:
///   x' = Pi (J-R) Q x + Pi (B-V) u,   y = (B+V)^T Q x + (N+W) u,
/// with Pi = I - G (G^T Q G)^{-1} G^T Q the projection onto ker G^T Q.
struct ExplicitSystem {
    Matrix a_full, b_full, c_full, d_full;
    Matrix pi, q, g;

    Index n_inputs() const { return b_full.cols(); }
};

/// Multiplier elimination for the G_P = 0 case. Checks the four entry
/// requirements (G_P = 0; storage is graph(Q) with invertible P; G full
/// column rank; G^T Q G invertible) and verifies that ker G^T Q is invariant
/// under the projected dynamics.
inline ExplicitSystem eliminate_multipliers(const StructuredRealization& sr,
                                            const Tolerance& tol = {}) {
    const Index n = sr.p.rows();
    if (sr.g_p.norm() > tol.sub_tol)
        throw PreconditionFailed(
            "G_P != 0: multiplier elimination unsupported; use the descriptor-route transfer function",
            sr.g_p.norm());
    const Index rank_p = matrix_rank(sr.p, tol);
    if (rank_p != n)
        throw PreconditionFailed("storage is not graph(Q): P singular",
                                 static_cast<double>(n - rank_p));
    // Q = S P^{-1}; symmetric because S^T P = P^T S
    Matrix q = sr.s * sr.p.inverse();
    q = ((q + q.transpose()) / 2.0).eval();

    const Matrix& g = sr.g;
    if (g.cols() > 0 && matrix_rank(g, tol) != g.cols())
        throw PreconditionFailed("G rank-deficient",
                                 static_cast<double>(g.cols() - matrix_rank(g, tol)));
    Matrix pi = Matrix::Identity(n, n);
    if (g.cols() > 0) {
        const Matrix gqg = g.transpose() * q * g;
        Eigen::FullPivLU<Matrix> lu(gqg);
        if (!lu.isInvertible())
            throw PreconditionFailed("G^T Q G singular", 0.0);
        pi -= g * lu.solve(g.transpose() * q);
    }

    ExplicitSystem sys;
    sys.pi = pi;
    sys.q = q;
    sys.g = g;
    sys.a_full = pi * (sr.j - sr.r) * q;
    sys.b_full = pi * (sr.b - sr.v);
    sys.c_full = (sr.b + sr.v).transpose() * q;
    sys.d_full = sr.n + sr.w;

    // ker(G^T Q) must be invariant under the closed-loop dynamics
    if (g.cols() > 0) {
        const Matrix zker = null_basis(g.transpose() * q, tol);
        const double inv_res = (g.transpose() * q * sys.a_full * zker).norm();
        if (inv_res > tol.sub_tol * std::max(1.0, sys.a_full.norm()))
            throw Error("eliminate_multipliers: ker G^T Q failed the invariance check");
    }
    return sys;
}

namespace detail {

inline CMatrix resolvent_solve(const CMatrix& pencil, const CMatrix& rhs, const Tolerance& tol,
                               const char* what) {
    Eigen::JacobiSVD<CMatrix> svd(pencil, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    if (pencil.rows() == 0) return CMatrix(0, rhs.cols());
    if (sv(sv.size() - 1) <= tol.rank_cutoff(smax, pencil.rows(), pencil.cols()))
        throw SingularResolvent(what);
    return svd.solve(rhs);
}

}  // namespace detail

/// Transfer function of the explicit system at a complex frequency.
inline CMatrix transfer_eval(const ExplicitSystem& sys, std::complex<double> s,
                             const Tolerance& tol = {}) {
    const Index n = sys.a_full.rows();
    CMatrix resolvent = s * CMatrix::Identity(n, n) - sys.a_full.cast<std::complex<double>>();
    const CMatrix x = detail::resolvent_solve(resolvent, sys.b_full.cast<std::complex<double>>(), tol,
                                              "transfer_eval: s is an eigenvalue of the projected dynamics");
    return sys.c_full.cast<std::complex<double>>() * x + sys.d_full.cast<std::complex<double>>();
}

/// Transfer function of a descriptor realization: C (sE - A)^{-1} B + D.
inline CMatrix transfer_eval(const DescriptorRealization& real, std::complex<double> s,
                             const Tolerance& tol = {}) {
    CMatrix pencil = s * real.e.cast<std::complex<double>>() - real.a.cast<std::complex<double>>();
    const CMatrix x = detail::resolvent_solve(pencil, real.b_in.cast<std::complex<double>>(), tol,
                                              "transfer_eval: sE - A singular at the requested s");
    return real.c_out.cast<std::complex<double>>() * x + real.d_out.cast<std::complex<double>>();
}

struct PositiveRealSample {
    std::complex<double> s;
    double min_hermitian_eig = 0.0;
    bool passed = true;
    bool pole = false;  // resolvent singular at s: a right-half-plane pole
    CVector witness;
};

struct PositiveRealReport {
    bool passed = true;
    std::vector<PositiveRealSample> samples;
};

/// Sampled positive-realness check: asserts H(s) + H(s)* is PSD (up to the
/// tolerance slack) at every given right-half-plane point. A pass is a
/// necessary-condition certificate over the sample set, not a proof.
inline PositiveRealReport positive_real_sample_check(const ExplicitSystem& sys,
                                                     const std::vector<std::complex<double>>& samples,
                                                     const Tolerance& tol = {}) {
    PsdVerdict qv = psd_cone_check(sys.q, tol);
    if (!qv.psd || matrix_rank(sys.q, tol) != sys.q.rows())
        throw PreconditionFailed("positive_real_sample_check: Q is not positive definite",
                                 -qv.min_eigenvalue);
    if (samples.empty())
        throw InvalidInput("positive_real_sample_check: empty sample set");

    PositiveRealReport report;
    for (const auto& s : samples) {
        PositiveRealSample out;
        out.s = s;
        CMatrix h;
        try {
            h = transfer_eval(sys, s, tol);
        } catch (const SingularResolvent&) {
            out.passed = false;
            out.pole = true;
            out.min_hermitian_eig = -std::numeric_limits<double>::infinity();
            report.passed = false;
            report.samples.push_back(std::move(out));
            continue;
        }
        CMatrix herm = h + h.adjoint();
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
        out.min_hermitian_eig = eig.eigenvalues()(0);
        const double scale = eig.eigenvalues().size() ? eig.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
        out.passed = out.min_hermitian_eig >= -tol.psd_slack(scale);
        if (!out.passed) {
            out.witness = eig.eigenvectors().col(0);
            report.passed = false;
        }
        report.samples.push_back(std::move(out));
    }
    return report;
}

}  // namespace phdae
