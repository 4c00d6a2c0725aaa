#include "cph/error.hpp"
#include "cph/linalg.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cph;
using cph::test::Rng;

namespace {

IntMatrix running_A() {
    IntMatrix A(5, 8);
    A << 1, 1, 0, 1, 0, 0, 0, 1,   //
        0, 0, 0, -1, 1, 0, -1, 0,  //
        -1, 0, 1, 0, -1, 0, 0, 0,  //
        0, -1, -1, 0, 0, 1, 0, 0,  //
        0, 0, 0, 0, 0, -1, 1, -1;
    return A;
}

IntMatrix random_incidence(Rng& rng, Eigen::Index n, Eigen::Index b) {
    IntMatrix A = IntMatrix::Zero(n, b);
    for (Eigen::Index k = 0; k < b; ++k) {
        const auto u = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
        auto v = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n - 1)));
        if (v >= u) ++v;
        A(u, k) = 1;
        A(v, k) = -1;
    }
    return A;
}

bool throws_code(ErrorCode code, const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

}  // namespace

TEST(Rref, RunningExamplePivots) {
    const RrefResult r = rref_exact(running_A());
    EXPECT_EQ(r.pivots, (std::vector<std::size_t>{0, 1, 3, 5}));  // V, C1, G, L1
    EXPECT_TRUE(r.R.row(4).isZero());
    EXPECT_LE(r.R.cwiseAbs().maxCoeff(), 1);
    for (std::size_t k = 0; k < r.pivots.size(); ++k)
        EXPECT_EQ(r.R(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(r.pivots[k])), 1);
}

TEST(Rref, VrLoopAndIdentity) {
    IntMatrix A(2, 2);
    A << 1, 1, -1, -1;
    const RrefResult r = rref_exact(A);
    IntMatrix expect(2, 2);
    expect << 1, 1, 0, 0;
    EXPECT_EQ(r.R, expect);
    EXPECT_EQ(r.pivots, (std::vector<std::size_t>{0}));

    const IntMatrix I = IntMatrix::Identity(3, 3);
    const RrefResult ri = rref_exact(I);
    EXPECT_EQ(ri.R, I);
    EXPECT_EQ(ri.pivots, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Rref, NonUnimodularDetected) {
    IntMatrix A(2, 2);
    A << 1, 1, 1, -1;  // elimination produces -2
    EXPECT_TRUE(throws_code(ErrorCode::NonUnimodular, [&] { rref_exact(A); }));
    IntMatrix B(1, 1);
    B << 2;
    EXPECT_TRUE(throws_code(ErrorCode::NonUnimodular, [&] { rref_exact(B); }));
}

TEST(Rref, IdempotentOnRandomIncidence) {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<Eigen::Index>(2 + rng.index(8));
        const auto b = static_cast<Eigen::Index>(1 + rng.index(15));
        const RrefResult r = rref_exact(random_incidence(rng, n, b));
        const RrefResult again = rref_exact(r.R);
        EXPECT_EQ(again.R, r.R);
        EXPECT_EQ(again.pivots, r.pivots);
    }
}

TEST(Rref, PivotIffIndependentOfPriorColumns) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<Eigen::Index>(2 + rng.index(7));
        const auto b = static_cast<Eigen::Index>(1 + rng.index(12));
        const IntMatrix A = random_incidence(rng, n, b);
        const RrefResult r = rref_exact(A);
        const RealMatrix Ad = A.cast<double>();
        std::size_t prev = 0;
        for (Eigen::Index j = 0; j < b; ++j) {
            const std::size_t rk = rank(RealMatrix(Ad.leftCols(j + 1)), 1e-9);
            const bool independent = rk > prev;
            const bool is_pivot =
                std::find(r.pivots.begin(), r.pivots.end(), static_cast<std::size_t>(j)) != r.pivots.end();
            EXPECT_EQ(independent, is_pivot);
            prev = rk;
        }
    }
}

TEST(Rank, Examples) {
    EXPECT_EQ(rank(running_A()), 4u);
    EXPECT_EQ(rank(IntMatrix(IntMatrix::Zero(3, 4))), 0u);
    EXPECT_EQ(rank(IntMatrix(running_A().leftCols(3))), 2u);
    EXPECT_EQ(rank(RealMatrix(RealMatrix::Zero(3, 3))), 0u);
    EXPECT_EQ(rank(RealMatrix(running_A().cast<double>())), 4u);
}

TEST(LuSolve, Examples) {
    Vector b(4);
    b << 1, -2, 3.5, 7;
    EXPECT_EQ(lu_solve(RealMatrix::Identity(4, 4), b), b);

    RealMatrix D(2, 2);
    D << 2, 0, 0, 4;
    Vector rhs(2);
    rhs << 2, 8;
    const Vector x = lu_solve(D, rhs);
    EXPECT_DOUBLE_EQ(x(0), 1.0);
    EXPECT_DOUBLE_EQ(x(1), 2.0);

    RealMatrix S(2, 2);
    S << 1, 1, 1, 1;
    EXPECT_TRUE(throws_code(ErrorCode::Singular, [&] { lu_solve(S, rhs); }));
}

TEST(LuSolve, RoundTripOnWellConditioned) {
    Rng rng(13);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.index(12));
        const RealMatrix A = rng.matrix(n, n);
        if (singular_value_ratio(A) < 1e-6) continue;
        const Vector b = rng.matrix(n, 1);
        const Vector x = lu_solve(A, b);
        const double scale = A.norm() * x.norm() + b.norm();
        EXPECT_LE((A * x - b).norm(), 1e-10 * scale);
        ++checked;
    }
    EXPECT_GT(checked, 200);
}

TEST(Determinant, MatchesLuAndZeroWhenSingular) {
    Rng rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        const RealMatrix A = rng.matrix(5, 5);
        EXPECT_NEAR(determinant(A), A.determinant(), 1e-12 * (1 + std::abs(A.determinant())));
        EXPECT_NEAR(LuFactor(A).determinant(), A.determinant(), 1e-12 * (1 + std::abs(A.determinant())));
    }
    RealMatrix S(2, 2);
    S << 1, 2, 2, 4;
    EXPECT_EQ(determinant(S), 0.0);
}

TEST(Eig, Examples) {
    RealMatrix rot(2, 2);
    rot << 0, -1, 1, 0;
    const ComplexList r = eig_dense(rot);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(r[0].real(), 0.0, 1e-15);
    EXPECT_NEAR(r[0].imag(), -1.0, 1e-15);
    EXPECT_NEAR(r[1].imag(), 1.0, 1e-15);
    EXPECT_EQ(r[0], std::conj(r[1]));

    RealMatrix d = RealMatrix::Zero(2, 2);
    d(0, 0) = 5;
    d(1, 1) = 3;
    const ComplexList dv = eig_dense(d);
    EXPECT_EQ(dv[0], std::complex<double>(3, 0));
    EXPECT_EQ(dv[1], std::complex<double>(5, 0));

    // companion of lambda^2 + 2*delta*lambda + eta
    const double delta = 1.25;
    const double eta = 5e5;
    RealMatrix comp(2, 2);
    comp << 0, 1, -eta, -2 * delta;
    const ComplexList cv = eig_dense(comp);
    const double im = std::sqrt(eta - delta * delta);
    EXPECT_NEAR(cv[0].real(), -delta, 1e-10 * im);
    EXPECT_NEAR(cv[0].imag(), -im, 1e-10 * im);
    EXPECT_NEAR(cv[1].imag(), im, 1e-10 * im);
}

TEST(Eig, BackwardErrorAndPairingOnRandom) {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.index(10));
        const RealMatrix M = rng.matrix(n, n);
        const ComplexList ev = eig_dense(M);
        ASSERT_EQ(ev.size(), static_cast<std::size_t>(n));
        for (const auto& lam : ev) {
            // det(M - lam I) small relative to the scale
            const ComplexMatrix S = M.cast<std::complex<double>>() -
                                    lam * ComplexMatrix::Identity(n, n);
            Eigen::JacobiSVD<ComplexMatrix> svd(S);
            EXPECT_LE(svd.singularValues()(n - 1), 1e-10 * (1 + M.norm()));
            if (lam.imag() != 0.0)
                EXPECT_NE(std::find(ev.begin(), ev.end(), std::conj(lam)), ev.end());
        }
        for (std::size_t k = 1; k < ev.size(); ++k)
            EXPECT_TRUE(ev[k - 1].real() < ev[k].real() ||
                        (ev[k - 1].real() == ev[k].real() && ev[k - 1].imag() <= ev[k].imag()));
    }
}

TEST(IsPd, Examples) {
    EXPECT_TRUE(is_pd(RealMatrix::Identity(2, 2)));
    RealMatrix a(2, 2);
    a << 1, 2, 0, 1;
    EXPECT_FALSE(is_pd(a));
    RealMatrix b(2, 2);
    b << 1, 1, -1, 1;
    EXPECT_TRUE(is_pd(b));
}

TEST(IsPdmp, Examples) {
    const RealMatrix I = RealMatrix::Identity(2, 2);
    EXPECT_TRUE(is_pdmp(I, -I));
    EXPECT_FALSE(is_pdmp(I, I));
    RealMatrix G = RealMatrix::Zero(2, 2);
    G(0, 0) = 2;
    G(1, 1) = 3;
    EXPECT_TRUE(is_pdmp(I, -G));
    EXPECT_FALSE(is_pdmp(RealMatrix::Zero(2, 2), -G));
}

// Definiteness lemmas on 1000 seeded instances each.

TEST(PdLemmas, SymmetricPartAndSkewInvariance) {
    Rng rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.index(6));
        const RealMatrix M = trial % 2 ? rng.pd_matrix(n) : rng.matrix(n, n);
        const RealMatrix K0 = rng.matrix(n, n);
        const RealMatrix K = K0 - K0.transpose();
        const RealMatrix sym = 0.5 * (M + M.transpose());
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(sym);
        const bool oracle = es.eigenvalues().minCoeff() > 1e-12 * M.norm();
        EXPECT_EQ(is_pd(M), oracle);
        if (oracle) {
            EXPECT_TRUE(is_pd(M + K));                 // skew part is irrelevant
            EXPECT_TRUE(is_pd(M.inverse(), 1e-14));    // inverse of PD is PD
        }
    }
}

TEST(PdLemmas, PdmpSwapInverseTransformAndColumnSwap) {
    Rng rng(22);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.index(5));
        RealMatrix B = rng.matrix(n, n);
        while (singular_value_ratio(B) < 1e-3) B = rng.matrix(n, n);
        const RealMatrix P = rng.pd_matrix(n);
        const RealMatrix Bp = -B * P;
        ASSERT_TRUE(is_pdmp(B, Bp, 1e-10));
        EXPECT_TRUE(is_pdmp(Bp, B, 1e-10));                                  // swap symmetry
        EXPECT_TRUE(is_pd(-B.inverse() * Bp, 1e-10));                        // -B^{-1}B' PD
        EXPECT_TRUE(is_pd(-Bp.inverse() * B, 1e-10));
        RealMatrix T = rng.matrix(n, n);
        while (singular_value_ratio(T) < 1e-3) T = rng.matrix(n, n);
        const RealMatrix Q = rng.orthogonal(n);
        EXPECT_TRUE(is_pdmp(T * B * Q, T * Bp * Q, 1e-10));                  // (TBQ, TB'Q)
        RealMatrix C = B;
        RealMatrix Cp = Bp;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (rng.uniform() < 0.5) {
                C.col(j) = Bp.col(j);
                Cp.col(j) = B.col(j);
            }
        }
        EXPECT_TRUE(is_pdmp(C, Cp, 1e-10));                                  // column swaps
        EXPECT_FALSE(is_pdmp(B, -Bp, 1e-10));                                // (B, -B') is NDMP
    }
}

TEST(PdLemmas, NdmpCharacterization) {
    Rng rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.index(5));
        const RealMatrix A = trial % 2 ? rng.pd_matrix(n) : rng.matrix(n, n);
        // (I, A) is an NDMP iff (I, -A) is a PDMP iff A is PD.
        EXPECT_EQ(is_pdmp(RealMatrix::Identity(n, n), -A), is_pd(A));
    }
}

TEST(PdLemmas, BlockMatrixWithPdLeadingPartIsNonsingular) {
    Rng rng(24);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n1 = static_cast<Eigen::Index>(1 + rng.index(4));
        const auto n2 = static_cast<Eigen::Index>(1 + rng.index(4));
        const RealMatrix M = rng.pd_matrix(n1 + n2);
        const RealMatrix N = rng.matrix(n2, n1, -3, 3);
        RealMatrix P(n1 + n2, n1 + n2);
        P.topLeftCorner(n1, n1) = M.topLeftCorner(n1, n1) - N.transpose() * M.bottomLeftCorner(n2, n1);
        P.topRightCorner(n1, n2) = M.topRightCorner(n1, n2) - N.transpose() * M.bottomRightCorner(n2, n2);
        P.bottomLeftCorner(n2, n1) = N;
        P.bottomRightCorner(n2, n2) = RealMatrix::Identity(n2, n2);
        EXPECT_NO_THROW(LuFactor(P, 1e-13));
    }
}

TEST(PdLemmas, SkewCoupledPdmpBlockIsNonsingular) {
    Rng rng(25);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.index(5));
        RealMatrix C = rng.matrix(n, n);
        while (singular_value_ratio(C) < 1e-3) C = rng.matrix(n, n);
        const RealMatrix Cp = -C * rng.pd_matrix(n);
        const RealMatrix K = rng.matrix(n, n, -3, 3);
        const RealMatrix S = K - K.transpose();
        RealMatrix M(2 * n, 2 * n);
        M << RealMatrix::Identity(n, n), S, C, Cp;
        EXPECT_NO_THROW(LuFactor(M, 1e-13));
    }
}
