#include <catch2/catch_amalgamated.hpp>

#include <phdae/transfer.hpp>

#include "random_structures.hpp"

using namespace phdae;
using namespace phdae::testing;
using Complex = std::complex<double>;

namespace {

std::vector<Complex> rhp_grid() {
    std::vector<Complex> grid;
    for (double re : {0.1, 1.0, 10.0})
        for (double im : {-10.0, -1.0, 0.0, 1.0, 10.0}) grid.emplace_back(re, im);
    return grid;
}

}  // namespace

TEST_CASE("eliminate_multipliers on the unconstrained scalar system") {
    Tolerance tol;
    const double r = 2.5;
    Matrix q = Matrix::Identity(1, 1);
    StructuredRealization sr = structured_from_blocks(q, Matrix::Zero(1, 1), r * q,
                                                Matrix::Identity(1, 1), Matrix(1, 0), tol);
    ExplicitSystem sys = eliminate_multipliers(sr, tol);
    CHECK(sys.a_full(0, 0) == Catch::Approx(-r));
    CHECK(sys.b_full(0, 0) == Catch::Approx(1.0));
    CHECK(sys.c_full(0, 0) == Catch::Approx(1.0));
    CHECK(sys.d_full.norm() < 1e-12);
}

TEST_CASE("projection removes the constrained direction") {
    Tolerance tol;
    const double r = 3.0;
    Matrix rmat = Matrix::Zero(2, 2);
    rmat(0, 0) = r;
    Matrix g(2, 1);
    g << 0, 1;
    Matrix b(2, 1);
    b << 1, 0;
    StructuredRealization sr =
        structured_from_blocks(Matrix::Identity(2, 2), Matrix::Zero(2, 2), rmat, b, g, tol);
    ExplicitSystem sys = eliminate_multipliers(sr, tol);
    Matrix pi_expect = Matrix::Zero(2, 2);
    pi_expect(0, 0) = 1;
    CHECK((sys.pi - pi_expect).norm() < 1e-12);
    // the explicit system is the 1-D x1' = -r x1 + u, y = x1
    Vector e1(2);
    e1 << 1, 0;
    CHECK((sys.a_full * e1 + r * e1).norm() < 1e-12);
    CHECK((sys.b_full - e1).norm() < 1e-12);

    // direct arithmetic oracle with an indefinite metric: Q = diag(1,2)
    Matrix q2 = Matrix::Zero(2, 2);
    q2(0, 0) = 1;
    q2(1, 1) = 2;
    StructuredRealization sr2 =
        structured_from_blocks(q2, Matrix::Zero(2, 2), rmat, b, g, tol);
    ExplicitSystem sys2 = eliminate_multipliers(sr2, tol);
    Matrix pi_oracle = Matrix::Identity(2, 2) -
                       g * (g.transpose() * q2 * g).inverse() * g.transpose() * q2;
    CHECK((sys2.pi - pi_oracle).norm() < 1e-12);
    CHECK((sys2.pi * sys2.pi - sys2.pi).norm() < 1e-12);
    CHECK((sys2.pi * g).norm() < 1e-12);
}

TEST_CASE("precondition failures are identified by name") {
    Tolerance tol;
    // G_P != 0: build a monotone structure whose constraint touches e_P
    Matrix image(4, 1);
    image << 1, 0, 0, 0;  // f free, e = 0, f_P = 0, e_P = 0... dim too small
    // use the folded construction instead: constraint on (e, e_P) jointly
    Matrix mmap = Matrix::Zero(2, 2);
    Matrix ghat(2, 1);
    ghat << 1, 1;  // couples e and e_P: G_P != 0
    Tolerance t;
    Matrix q1 = orthogonal_complement(ghat, t);
    Matrix img(4, 2);
    img.topRows(2) << mmap * q1, -ghat;
    img.bottomRows(2) << q1, Matrix::Zero(2, 1);
    PhDaeML sys = make_ml(unfold_ports(LinearStructure({2, 0, 0}, img, t), 1),
                          make_lagrange_ps(Matrix::Identity(1, 1), Matrix::Identity(1, 1), t));
    StructuredRealization sr = realize_ml_structured(sys, t);
    REQUIRE(sr.g_p.norm() > 0.1);
    try {
        eliminate_multipliers(sr, t);
        FAIL("expected PreconditionFailed");
    } catch (const PreconditionFailed& e) {
        CHECK(e.which.find("G_P") != std::string::npos);
        CHECK(e.which.find("descriptor") != std::string::npos);
    }

    // singular P storage
    Matrix p_sing = Matrix::Zero(1, 1);
    StructuredRealization sr2 = structured_from_blocks(Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                                 Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                                 Matrix(1, 0), tol);
    sr2.p = p_sing;
    CHECK_THROWS_AS(eliminate_multipliers(sr2, tol), PreconditionFailed);
}

TEST_CASE("transfer values: 1/(s+r) and the projected system via both routes") {
    Tolerance tol;
    StructuredRealization sr = structured_from_blocks(Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                                Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                                Matrix(1, 0), tol);
    ExplicitSystem sys = eliminate_multipliers(sr, tol);
    CHECK(std::abs(transfer_eval(sys, Complex(1.0, 0.0))(0, 0) - 0.5) < 1e-14);

    Matrix rmat = Matrix::Zero(2, 2);
    rmat(0, 0) = 3.0;
    Matrix g(2, 1);
    g << 0, 1;
    Matrix b(2, 1);
    b << 1, 0;
    StructuredRealization sr2 =
        structured_from_blocks(Matrix::Identity(2, 2), Matrix::Zero(2, 2), rmat, b, g, tol);
    ExplicitSystem sys2 = eliminate_multipliers(sr2, tol);
    const Complex via_explicit = transfer_eval(sys2, Complex(2.0, 0.0))(0, 0);
    const Complex via_descriptor = transfer_eval(sr2.descriptor, Complex(2.0, 0.0))(0, 0);
    CHECK(std::abs(via_explicit - 0.2) < 1e-12);
    CHECK(std::abs(via_descriptor - 0.2) < 1e-12);
}

TEST_CASE("lossless system is purely imaginary on the imaginary axis") {
    Tolerance tol;
    Matrix j(2, 2);
    j << 0, 1, -1, 0;
    Matrix b(2, 1);
    b << 1, 0;
    StructuredRealization sr = structured_from_blocks(Matrix::Identity(2, 2), j, Matrix::Zero(2, 2),
                                                b, Matrix(2, 0), tol);
    ExplicitSystem sys = eliminate_multipliers(sr, tol);
    for (double w : {0.3, 0.7, 2.0, 5.0})
        CHECK(std::abs(transfer_eval(sys, Complex(0.0, w))(0, 0).real()) < 1e-10);
}

TEST_CASE("singular resolvent is reported") {
    Tolerance tol;
    StructuredRealization sr = structured_from_blocks(Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                                Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                                Matrix(1, 0), tol);
    ExplicitSystem sys = eliminate_multipliers(sr, tol);
    CHECK_THROWS_AS(transfer_eval(sys, Complex(-1.0, 0.0)), SingularResolvent);
}

TEST_CASE("projection identities on random (Q, G) pairs") {
    Tolerance tol;
    std::mt19937_64 rng(0x7f01);
    for (int trial = 0; trial < 40; ++trial) {
        const Index n = 2 + static_cast<Index>(rng() % 4);
        const Index lam = 1 + static_cast<Index>(rng() % (n - 1));
        Matrix q = random_spd(n, rng);
        Matrix g = random_matrix(n, lam, rng);
        if (matrix_rank(g, tol) != lam) continue;
        Matrix j = random_skew(n, rng);
        Matrix r = random_psd(n, rng);
        Matrix b = random_matrix(n, 1, rng);
        StructuredRealization sr = structured_from_blocks(q, j, r, b, g, tol);
        ExplicitSystem sys = eliminate_multipliers(sr, tol);
        CHECK((sys.pi * sys.pi - sys.pi).norm() <= 1e-12 * std::max(1.0, sys.pi.norm()));
        CHECK((sys.pi * sys.g).norm() <= 1e-12 * std::max(1.0, sys.g.norm()));
        CHECK((sys.g.transpose() * sys.q * sys.pi).norm() <= 1e-11);
        Matrix zker = null_basis(sys.g.transpose() * sys.q, tol);
        CHECK((sys.g.transpose() * sys.q * sys.a_full * zker).norm() <= 1e-10);
    }
}

TEST_CASE("explicit and descriptor transfer routes agree on random systems") {
    Tolerance tol;
    std::mt19937_64 rng(0x7f02);
    std::uniform_real_distribution<double> re(0.2, 5.0), im(-5.0, 5.0);
    for (int trial = 0; trial < 15; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 4);
        const Index p = 1 + static_cast<Index>(rng() % 2);
        const Index lam = static_cast<Index>(rng() % n);
        Matrix q = random_spd(n, rng);
        Matrix g = random_matrix(n, lam, rng);
        if (lam > 0 && matrix_rank(g, tol) != lam) continue;
        StructuredRealization sr = structured_from_blocks(q, random_skew(n, rng), random_psd(n, rng),
                                                    random_matrix(n, p, rng), g, tol);
        ExplicitSystem sys = eliminate_multipliers(sr, tol);
        for (int k = 0; k < 20; ++k) {
            const Complex s(re(rng), im(rng));
            CMatrix he = transfer_eval(sys, s);
            CMatrix hd = transfer_eval(sr.descriptor, s);
            CHECK((he - hd).norm() <= 1e-8 * std::max(1.0, hd.norm()));
        }
    }
}

TEST_CASE("positive-real sampling: passes, and the sign-flipped control fails") {
    Tolerance tol;
    StructuredRealization sr = structured_from_blocks(Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                                Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                                                Matrix(1, 0), tol);
    ExplicitSystem sys = eliminate_multipliers(sr, tol);
    PositiveRealReport rep = positive_real_sample_check(sys, rhp_grid(), tol);
    CHECK(rep.passed);

    // anti-dissipative control case: R -> -R turns 1/(s+1) into 1/(s-1)
    ExplicitSystem flipped = sys;
    flipped.a_full = -sys.a_full;
    PositiveRealReport bad = positive_real_sample_check(flipped, rhp_grid(), tol);
    CHECK_FALSE(bad.passed);
    bool witness_seen = false;
    for (const auto& s : bad.samples)
        if (!s.passed && s.witness.size() > 0) witness_seen = true;
    CHECK(witness_seen);

    // random assembled systems with Q > 0 pass across the grid
    std::mt19937_64 rng(0x7f03);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 1 + static_cast<Index>(rng() % 4);
        StructuredRealization r = structured_from_blocks(random_spd(n, rng), random_skew(n, rng),
                                                   random_psd(n, rng), random_matrix(n, 1, rng),
                                                   Matrix(n, 0), tol);
        PositiveRealReport rr = positive_real_sample_check(eliminate_multipliers(r, tol),
                                                           rhp_grid(), tol);
        CHECK(rr.passed);
    }
}
