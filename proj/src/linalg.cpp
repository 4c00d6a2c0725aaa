#include "cph/linalg.hpp"

#include "cph/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cph {

RrefResult rref_exact(const IntMatrix& M, std::int64_t bound) {
    RrefResult out{M, {}};
    IntMatrix& R = out.R;
    const Eigen::Index rows = R.rows();
    const Eigen::Index cols = R.cols();
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            if (R(i, j) > bound || R(i, j) < -bound)
                throw Error(ErrorCode::NonUnimodular, "input entry out of bound");

    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < cols && row < rows; ++col) {
        Eigen::Index p = row;
        while (p < rows && R(p, col) == 0) ++p;
        if (p == rows) continue;
        if (p != row) R.row(p).swap(R.row(row));
        const std::int64_t piv = R(row, col);
        if (piv != 1 && piv != -1)
            throw Error(ErrorCode::NonUnimodular,
                        "pivot " + std::to_string(piv) + " in column " + std::to_string(col));
        if (piv == -1) R.row(row) *= -1;
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (r == row || R(r, col) == 0) continue;
            const std::int64_t f = R(r, col);
            for (Eigen::Index j = col; j < cols; ++j) {
                R(r, j) -= f * R(row, j);
                if (R(r, j) > bound || R(r, j) < -bound)
                    throw Error(ErrorCode::NonUnimodular,
                                "entry " + std::to_string(R(r, j)) + " at (" + std::to_string(r) +
                                    "," + std::to_string(j) + ")");
            }
        }
        out.pivots.push_back(static_cast<std::size_t>(col));
        ++row;
    }
    return out;
}

std::size_t rank(const IntMatrix& M) { return rref_exact(M).pivots.size(); }

std::size_t rank(const RealMatrix& M, double tol) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<RealMatrix> svd(M);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    std::size_t r = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > tol * s(0)) ++r;
    return r;
}

LuFactor::LuFactor(const RealMatrix& A, double tol) : lu_(A) {
    if (A.rows() != A.cols())
        throw Error(ErrorCode::DimensionMismatch, "LU of non-square matrix");
    require_finite(A, "LU input");
    const Eigen::Index n = A.rows();
    perm_.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm_[static_cast<std::size_t>(i)] = i;
    const double scale = n > 0 ? A.cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index p = k;
        double best = std::abs(lu_(k, k));
        for (Eigen::Index i = k + 1; i < n; ++i) {
            if (std::abs(lu_(i, k)) > best) {
                best = std::abs(lu_(i, k));
                p = i;
            }
        }
        if (!(best > tol * scale) || best == 0.0)
            throw Error(ErrorCode::Singular, "pivot " + std::to_string(k) + " below threshold");
        if (p != k) {
            lu_.row(p).swap(lu_.row(k));
            std::swap(perm_[static_cast<std::size_t>(p)], perm_[static_cast<std::size_t>(k)]);
            sign_ = -sign_;
        }
        const double piv = lu_(k, k);
        for (Eigen::Index i = k + 1; i < n; ++i) {
            const double f = lu_(i, k) / piv;
            lu_(i, k) = f;
            if (f != 0.0) lu_.block(i, k + 1, 1, n - k - 1) -= f * lu_.block(k, k + 1, 1, n - k - 1);
        }
    }
}

Vector LuFactor::solve(const Vector& b) const {
    const Eigen::Index n = lu_.rows();
    if (b.size() != n) throw Error(ErrorCode::DimensionMismatch, "LU solve rhs size");
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = b(perm_[static_cast<std::size_t>(i)]);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) x(i) -= lu_(i, j) * x(j);
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        for (Eigen::Index j = i + 1; j < n; ++j) x(i) -= lu_(i, j) * x(j);
        x(i) /= lu_(i, i);
    }
    return x;
}

RealMatrix LuFactor::solve(const RealMatrix& B) const {
    RealMatrix X(B.rows(), B.cols());
    for (Eigen::Index c = 0; c < B.cols(); ++c) X.col(c) = solve(Vector(B.col(c)));
    return X;
}

double LuFactor::determinant() const {
    double d = sign_;
    for (Eigen::Index i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
    return d;
}

Vector lu_solve(const RealMatrix& A, const Vector& b, double tol) {
    return LuFactor(A, tol).solve(b);
}

double determinant(const RealMatrix& A) {
    if (A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "determinant of non-square matrix");
    RealMatrix M = A;
    const Eigen::Index n = M.rows();
    double det = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::Index p = k;
        for (Eigen::Index i = k + 1; i < n; ++i)
            if (std::abs(M(i, k)) > std::abs(M(p, k))) p = i;
        if (M(p, k) == 0.0) return 0.0;
        if (p != k) {
            M.row(p).swap(M.row(k));
            det = -det;
        }
        det *= M(k, k);
        for (Eigen::Index i = k + 1; i < n; ++i) {
            const double f = M(i, k) / M(k, k);
            M.block(i, k, 1, n - k) -= f * M.block(k, k, 1, n - k);
        }
    }
    return det;
}

void sort_eigenvalues(ComplexList& values) {
    std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

ComplexList eig_dense(const RealMatrix& M) {
    if (M.rows() != M.cols()) throw Error(ErrorCode::DimensionMismatch, "eigenvalues of non-square matrix");
    require_finite(M, "eigenvalue input");
    ComplexList out;
    if (M.rows() == 0) return out;
    Eigen::EigenSolver<RealMatrix> es(M, false);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "real Schur iteration");
    const ComplexVector ev = es.eigenvalues();
    out.reserve(static_cast<std::size_t>(ev.size()));
    // The real Schur form yields conjugate pairs from 2x2 blocks; copy one
    // member onto the other so the pairing is exact.
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k).imag() != 0.0 && k + 1 < ev.size() && ev(k + 1) == std::conj(ev(k))) {
            const double re = ev(k).real();
            const double im = std::abs(ev(k).imag());
            out.emplace_back(re, im);
            out.emplace_back(re, -im);
            ++k;
        } else {
            out.push_back(ev(k));
        }
    }
    sort_eigenvalues(out);
    return out;
}

double singular_value_ratio(const RealMatrix& M) {
    if (M.size() == 0) return 1.0;
    Eigen::JacobiSVD<RealMatrix> svd(M);
    const Vector& s = svd.singularValues();
    if (s(0) == 0.0) return 0.0;
    return s(s.size() - 1) / s(0);
}

bool is_pd(const RealMatrix& M, double tol) {
    if (M.rows() != M.cols()) throw Error(ErrorCode::DimensionMismatch, "is_pd of non-square matrix");
    if (M.rows() == 0) return true;
    if (!all_finite(M)) return false;
    const RealMatrix S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > tol * M.norm();
}

bool is_pdmp(const RealMatrix& B, const RealMatrix& Bp, double tol) {
    if (B.rows() != B.cols() || Bp.rows() != Bp.cols() || B.rows() != Bp.rows())
        throw Error(ErrorCode::DimensionMismatch, "is_pdmp shapes");
    try {
        LuFactor lu(B, tol);
        return is_pd(-lu.solve(Bp), tol);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Singular) return false;
        throw;
    }
}

bool all_finite(const RealMatrix& M) { return M.allFinite(); }

void require_finite(const RealMatrix& M, const char* what) {
    if (!M.allFinite()) throw Error(ErrorCode::DomainError, std::string(what) + " has non-finite entries");
}

}  // namespace cph
