#ifndef CPH_LTI_HPP
#define CPH_LTI_HPP

#include "cph/dae.hpp"
#include "cph/linalg.hpp"

#include <vector>

namespace cph {

// 0 = A x - B xd - u(t), rows and columns in the Model 2 layout of `sys`.
// Keeps a pointer to the system for the source values; it must outlive this.
struct LtiSystem {
    RealMatrix A, B;
    RealMatrix U;                            // u(t) = U s(t)
    std::vector<std::size_t> source_edges;  // s(t) entries, ascending edge order
    const CpHSystem* sys = nullptr;

    Vector u(double t) const;
};

// Builds the pencil from the branch relations and the Kron matrix (not from
// the residual). Throws NotLTI for nonlinear laws, InvalidArgument for Model 1.
LtiSystem assemble_lti(const CpHSystem& sys);

struct EigResult {
    ComplexList values;     // finite eigenvalues, sorted by (re, im)
    ComplexMatrix vectors;  // N x dof; largest-modulus entry of each column is 1
    std::vector<std::size_t> reduced_vars;  // coordinates of the reduced ODE
    RealMatrix M;           // xd_z = M x_z for the homogeneous system
    // Independent check: det(A - lambda B) interpolated at Chebyshev nodes.
    std::vector<double> char_poly;  // ascending coefficients in lambda
    int degree = 0;
    ComplexList poly_roots;
    double max_root_mismatch = 0.0;  // pointwise, relative to max(1, |lambda|)
    // Centroid gap over the finest clustering that pairs roots with
    // eigenvalues one-to-one, relative to the spectral radius; stays near eps
    // for multiple roots where the pointwise gap grows like eps^(1/k).
    double cluster_mismatch = 0.0;
    double cluster_radius = 0.0;  // linkage distance needed, over the spectral radius
};

// `dof` must equal the number of rows of B that carry derivatives. Throws
// IrregularPencil if det(A - lambda B) vanishes at all dof + 2 nodes.
EigResult finite_eigenvalues(const LtiSystem& lti, int dof);

// Coefficients of x0 in the eigenvector basis, matched on the reduced
// coordinates. Throws DefectiveSpectrum when the basis is rank deficient.
ComplexVector modal_solution(const EigResult& eig, const Vector& x0);

// Re sum_i c_i exp(lambda_i t) v_i.
Vector modal_state(const EigResult& eig, const ComplexVector& c, double t);

}  // namespace cph

#endif
