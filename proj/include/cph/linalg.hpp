#ifndef CPH_LINALG_HPP
#define CPH_LINALG_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace cph {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

// Sorted by (real, imag). Conjugate pairs carry bit-identical real parts.
using ComplexList = std::vector<std::complex<double>>;

inline constexpr double kSingularTol = 1e-12;

struct RrefResult {
    IntMatrix R;
    std::vector<std::size_t> pivots;  // strictly increasing column indices
};

// Gauss-Jordan in integer arithmetic. Every intermediate entry must stay
// within [-bound, bound]; for totally unimodular input with bound 1 this
// always holds, so a violation flags a non-incidence matrix.
RrefResult rref_exact(const IntMatrix& M, std::int64_t bound = 1);

std::size_t rank(const IntMatrix& M);
std::size_t rank(const RealMatrix& M, double tol = kSingularTol);

// Partial-pivoting LU. Throws Singular when a pivot drops below
// tol * max|A_ij| of the original matrix.
class LuFactor {
public:
    explicit LuFactor(const RealMatrix& A, double tol = kSingularTol);
    Vector solve(const Vector& b) const;
    RealMatrix solve(const RealMatrix& B) const;
    double determinant() const;
    std::size_t size() const { return static_cast<std::size_t>(lu_.rows()); }

private:
    RealMatrix lu_;
    std::vector<Eigen::Index> perm_;
    int sign_ = 1;
};

Vector lu_solve(const RealMatrix& A, const Vector& b, double tol = kSingularTol);

// Determinant by partial-pivoting elimination; returns 0 for exactly singular input.
double determinant(const RealMatrix& A);

ComplexList eig_dense(const RealMatrix& M);
void sort_eigenvalues(ComplexList& values);

// smallest / largest singular value; 0 for an empty or zero matrix.
double singular_value_ratio(const RealMatrix& M);

bool is_pd(const RealMatrix& M, double tol = kSingularTol);
bool is_pdmp(const RealMatrix& B, const RealMatrix& Bp, double tol = kSingularTol);

bool all_finite(const RealMatrix& M);
void require_finite(const RealMatrix& M, const char* what);

}  // namespace cph

#endif
