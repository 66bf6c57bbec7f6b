#pragma once

// Seeded generators for the structure families exercised by the unit and
// acceptance suites. Test-only; not part of the library surface.

#include <phdae/systems.hpp>

#include <random>

namespace phdae::testing {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

inline Matrix random_orthogonal(Index n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
    Matrix q = qr.householderQ();
    return q;
}

inline Matrix random_skew(Index n, std::mt19937_64& rng) {
    Matrix a = random_matrix(n, n, rng);
    return (a - a.transpose()) / 2.0;
}

inline Matrix random_spd(Index n, std::mt19937_64& rng) {
    Matrix a = random_matrix(n, n, rng);
    return a * a.transpose() + 0.1 * Matrix::Identity(n, n);
}

/// PSD with a controllable rank deficit.
inline Matrix random_psd(Index n, std::mt19937_64& rng, Index rank = -1) {
    if (rank < 0) rank = static_cast<Index>(rng() % (n + 1));
    if (rank == 0) return Matrix::Zero(n, n);
    Matrix a = random_matrix(n, rank, rng);
    return a * a.transpose();
}

inline Matrix random_monotone_map(Index n, std::mt19937_64& rng) {
    return random_skew(n, rng) + random_psd(n, rng, n);
}

/// Exchanges the flow/effort slots of a random index subset in a state-only
/// structure. The plus-form is invariant under per-index exchanges, so this
/// turns graphs into constrained structures (F x {0} pieces, etc.) without
/// losing maximal monotonicity.
inline LinearStructure exchange_random_pairs(const LinearStructure& s, std::mt19937_64& rng) {
    const Index n = s.layout().n;
    Matrix basis = s.basis();
    for (Index i = 0; i < n; ++i) {
        if (rng() % 3 == 0) basis.row(i).swap(basis.row(n + i));
    }
    return LinearStructure(s.layout(), basis, s.tolerance());
}

/// Maximally monotone structure over (n, 0, 0): random monotone-map graph
/// with a random index subset of the map zeroed out (rows and columns) and
/// random flow/effort exchanges applied. Zeroed indices produce proper
/// flow/effort ranges, so all four defect spaces get exercised.
inline LinearStructure random_maximal_monotone(Index n, std::mt19937_64& rng,
                                               const Tolerance& tol = {}) {
    Matrix m = random_monotone_map(n, rng);
    for (Index i = 0; i < n; ++i) {
        if (rng() % 4 == 0) {
            m.row(i).setZero();
            m.col(i).setZero();
        }
    }
    LinearStructure g = graph_structure(m, GraphKind::monotone, tol);
    return exchange_random_pairs(g, rng);
}

/// Maximally monotone structure over (n, 0, p), built over the folded state
/// block and unfolded.
inline LinearStructure random_maximal_monotone_ports(const PairingLayout& l, std::mt19937_64& rng,
                                                     const Tolerance& tol = {}) {
    return unfold_ports(random_maximal_monotone(l.n + l.p, rng, tol), l.p);
}

/// Dirac structure over an arbitrary layout. Built from a random orthogonal
/// O as im [O - I; O + I] over the folded pairing (always a Dirac structure,
/// not necessarily a graph), then unfolded into the block layout.
inline LinearStructure random_dirac(const PairingLayout& l, std::mt19937_64& rng,
                                    const Tolerance& tol = {}) {
    const Index m = l.half();
    Matrix o = random_orthogonal(m, rng);
    Matrix image(2 * m, m);
    image.topRows(m) = o - Matrix::Identity(m, m);
    image.bottomRows(m) = o + Matrix::Identity(m, m);
    LinearStructure folded({m, 0, 0}, image, tol);

    // unfold (fhat, ehat) into (f, e, f_R, e_R, f_P, e_P)
    Matrix basis(l.ambient(), folded.dim());
    Index fh = 0;
    auto place = [&](Block b) {
        const Index w = block_size(l, b);
        basis.middleRows(flow_offset(l, b), w) = folded.basis().middleRows(fh, w);
        basis.middleRows(effort_offset(l, b), w) = folded.basis().middleRows(m + fh, w);
        fh += w;
    };
    place(Block::state);
    place(Block::resistive);
    place(Block::port);
    return LinearStructure(l, basis, tol);
}

/// Lagrange pair (P, S) with S^T P symmetric and rank [P; S] = n, singular P
/// allowed: start from graph(Q) and exchange random index pairs, which maps
/// (P, S) rows to (S, -P) rows.
struct RandomPs {
    Matrix p, s;
};

inline RandomPs random_lagrange_ps(Index n, std::mt19937_64& rng) {
    Matrix q = random_matrix(n, n, rng);
    q = ((q + q.transpose()) / 2.0).eval();
    RandomPs ps{Matrix::Identity(n, n), q};
    for (Index i = 0; i < n; ++i) {
        if (rng() % 3 == 0) {
            Vector pi = ps.p.row(i);
            ps.p.row(i) = ps.s.row(i);
            ps.s.row(i) = -pi.transpose();
        }
    }
    return ps;
}

/// Nonnegative pair: graph of a PSD map, with exchanges only at indices
/// whose Q-row vanishes (those keep the quadratic form nonnegative).
inline RandomPs random_nonneg_lagrange_ps(Index n, std::mt19937_64& rng) {
    const Index rank = static_cast<Index>(rng() % (n + 1));
    Matrix basis = random_matrix(n, rank, rng);
    Matrix q = basis * basis.transpose();
    std::vector<Index> zeroed;
    for (Index i = 0; i < n; ++i) {
        if (rng() % 4 == 0) {
            q.row(i).setZero();
            q.col(i).setZero();
            zeroed.push_back(i);
        }
    }
    RandomPs ps{Matrix::Identity(n, n), q};
    for (Index i : zeroed) {
        if (rng() % 2 == 0) {
            Vector pi = ps.p.row(i);
            ps.p.row(i) = ps.s.row(i);
            ps.s.row(i) = -pi.transpose();
        }
    }
    return ps;
}

/// Structured realization with prescribed blocks: storage graph(Q), skew J,
/// PSD R, input map B, state-only constraint map G (so G_P = 0). Routed
/// through the library's embedding path rather than assembled directly.
inline StructuredRealization structured_from_blocks(const Matrix& q, const Matrix& j,
                                                    const Matrix& r, const Matrix& b,
                                                    const Matrix& g, const Tolerance& tol = {}) {
    const Index n = q.rows();
    const Index p = b.cols();
    const Index lam = g.cols();
    Matrix mmap(n + p, n + p);
    mmap.topLeftCorner(n, n) = -j + r;
    mmap.topRightCorner(n, p) = -b;
    mmap.bottomLeftCorner(p, n) = b.transpose();
    mmap.bottomRightCorner(p, p) = Matrix::Zero(p, p);
    Matrix ghat = Matrix::Zero(n + p, lam);
    ghat.topRows(n) = g;
    Matrix q1 = orthogonal_complement(ghat, tol);
    Matrix image(2 * (n + p), q1.cols() + lam);
    image.topRows(n + p) << mmap * q1, -ghat;
    image.bottomRows(n + p) << q1, Matrix::Zero(n + p, lam);
    LinearStructure folded({n + p, 0, 0}, image, tol);
    PhDaeML sys = make_ml(unfold_ports(folded, p),
                          make_lagrange_ps(Matrix::Identity(n, n), q, tol));
    return realize_ml_structured(sys, tol);
}

}  // namespace phdae::testing
