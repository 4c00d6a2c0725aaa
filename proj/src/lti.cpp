#include "cph/lti.hpp"

#include "cph/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <tuple>

namespace cph {

namespace {

using Index = Eigen::Index;
using RowVec = Eigen::RowVectorXd;

Index idx(std::size_t k) { return static_cast<Index>(k); }

bool is_source(ElementKind k) { return k == ElementKind::V || k == ElementKind::I; }

// Branch quantity as a x - b xd.
struct Linear {
    RowVec a, b;
};

}  // namespace

Vector LtiSystem::u(double t) const {
    Vector s(idx(source_edges.size()));
    for (std::size_t k = 0; k < source_edges.size(); ++k) s(idx(k)) = sys->model().source(source_edges[k], t);
    return U * s;
}

LtiSystem assemble_lti(const CpHSystem& sys) {
    if (sys.kind() != ModelKind::Model2) throw Error(ErrorCode::InvalidArgument, "the LTI pencil is built for Model 2");
    const CircuitModel& m = sys.model();
    if (!m.is_linear()) throw Error(ErrorCode::NotLTI, "circuit has nonlinear or coupled element laws");
    const std::vector<ElementKind> kinds = m.graph().kinds();
    const std::size_t b = kinds.size();
    const auto N = idx(sys.size());
    const VarLayout& lay = sys.layout();
    const NormalTree& tree = sys.tree();

    std::vector<std::size_t> var_of(b, CircuitModel::npos);  // own state variable per edge
    for (std::size_t j = 0; j < lay.size(); ++j) var_of[lay.edges[j]] = j;

    const StorageEval st = storage_eval(m.storage(), Vector::Zero(idx(m.capacitors().size())),
                                        Vector::Zero(idx(m.inductors().size())));
    const DissipatorForm& form = m.dissipators();
    const DissipatorEval de = dissipator_eval(form, Vector::Zero(idx(form.edges.size())));

    auto branch = [&](std::size_t e, bool current) {
        Linear q{RowVec::Zero(N), RowVec::Zero(N)};
        switch (kinds[e]) {
            case ElementKind::C:
                if (current) {
                    q.b(idx(var_of[e])) = -1.0;  // i = q'
                } else {
                    const auto s = idx(m.cap_slot(e));
                    for (std::size_t s2 = 0; s2 < m.capacitors().size(); ++s2)
                        q.a(idx(var_of[m.capacitors()[s2]])) = st.hess_C(s, idx(s2));
                }
                break;
            case ElementKind::L:
                if (current) {
                    const auto s = idx(m.ind_slot(e));
                    for (std::size_t s2 = 0; s2 < m.inductors().size(); ++s2)
                        q.a(idx(var_of[m.inductors()[s2]])) = st.hess_L(s, idx(s2));
                } else {
                    q.b(idx(var_of[e])) = -1.0;  // v = phi'
                }
                break;
            default: {
                const std::size_t k = m.dis_slot(e);
                if (current != form.voltage_controlled[k]) {
                    q.a(idx(var_of[e])) = 1.0;  // the control variable itself
                } else {
                    for (std::size_t j = 0; j < form.edges.size(); ++j)
                        q.a(idx(var_of[form.edges[j]])) = de.jac(idx(k), idx(j));
                }
            }
        }
        return q;
    };

    LtiSystem lti;
    lti.sys = &sys;
    for (std::size_t e = 0; e < b; ++e)
        if (is_source(kinds[e])) lti.source_edges.push_back(e);
    auto src_col = [&](std::size_t e) {
        return idx(std::lower_bound(lti.source_edges.begin(), lti.source_edges.end(), e) - lti.source_edges.begin());
    };
    lti.A = RealMatrix::Zero(N, N);
    lti.B = RealMatrix::Zero(N, N);
    lti.U = RealMatrix::Zero(N, idx(lti.source_edges.size()));

    for (std::size_t r = 0; r < sys.rows().size(); ++r) {
        const std::size_t e = sys.rows()[r].edge;
        const auto ri = idx(r);
        Linear acc;
        if (tree.is_twig(e)) {
            // f = i_e - sum over links of F[l, e] i_l
            acc = branch(e, true);
            const auto col = idx(tree.col_of(e));
            for (std::size_t l : tree.cotree) {
                const double f = static_cast<double>(tree.F(idx(tree.row_of(l)), col));
                if (f == 0.0) continue;
                if (is_source(kinds[l])) {
                    lti.U(ri, src_col(l)) += f;
                } else {
                    const Linear q = branch(l, true);
                    acc.a -= f * q.a;
                    acc.b -= f * q.b;
                }
            }
        } else {
            // f = v_l + sum over twigs of F[l, s] v_s
            acc = branch(e, false);
            const auto row = idx(tree.row_of(e));
            for (std::size_t s : tree.tree) {
                const double f = static_cast<double>(tree.F(row, idx(tree.col_of(s))));
                if (f == 0.0) continue;
                if (is_source(kinds[s])) {
                    lti.U(ri, src_col(s)) -= f;
                } else {
                    const Linear q = branch(s, false);
                    acc.a += f * q.a;
                    acc.b += f * q.b;
                }
            }
        }
        lti.A.row(ri) = acc.a;
        lti.B.row(ri) = acc.b;
    }
    return lti;
}

namespace {

double det_at(const LtiSystem& lti, double lambda) { return determinant(lti.A - lambda * lti.B); }

void require_regular(const LtiSystem& lti, int dof, double rho) {
    const auto N = static_cast<double>(lti.A.rows());
    const double scale = std::pow(lti.A.norm() + rho * lti.B.norm() + 1e-300, N);
    for (int k = 0; k < dof + 2; ++k) {
        const double s = std::cos(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * (dof + 2)));
        if (std::abs(det_at(lti, rho * s)) > 1e-13 * scale) return;
    }
    throw Error(ErrorCode::IrregularPencil, "det(A - lambda B) vanishes at every sample node");
}


// Coefficients in s, ascending, of det(A - rho s B) / prod (rho s - r) over
// `known`, from m Chebyshev nodes.
Vector interpolate_det(const LtiSystem& lti, int m, double rho, const ComplexList& known) {
    RealMatrix Vs(m, m);
    Vector p(m);
    for (int k = 0; k < m; ++k) {
        const double s = std::cos(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * m));
        for (int j = 0; j < m; ++j) Vs(k, j) = std::pow(s, j);
        std::complex<double> d = det_at(lti, rho * s);
        for (const auto& r : known) d /= rho * s - r;
        p(k) = d.real();
    }
    return LuFactor(Vs).solve(p);
}

// Companion-matrix roots of the degree-`degree` truncation of cs.
ComplexList poly_roots(const Vector& cs, int degree) {
    RealMatrix comp = RealMatrix::Zero(degree, degree);
    for (int j = 0; j < degree; ++j) comp(0, j) = -cs(degree - 1 - j) / cs(degree);
    for (int j = 1; j < degree; ++j) comp(j, j - 1) = 1.0;
    return eig_dense(comp);
}

// One-to-one greedy matching, each error relative to max(1, |lambda|).
double pointwise_mismatch(const ComplexList& a, ComplexList b) {
    double worst = 0.0;
    for (const auto& l : a) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < b.size(); ++k)
            if (std::abs(l - b[k]) < std::abs(l - b[best])) best = k;
        worst = std::max(worst, std::abs(l - b[best]) / std::max(1.0, std::abs(l)));
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return worst;
}

// Finest single-linkage clustering of a and b together in which every
// cluster holds as many points of a as of b; returns the largest centroid
// gap over rho. A k-fold root moves by O(eps^(1/k)) under coefficient
// perturbation but the mean of its cluster moves by O(eps).
double cluster_mismatch(const ComplexList& a, const ComplexList& b, double rho, double& radius) {
    const std::size_t n = a.size();
    std::vector<std::complex<double>> pts(a);
    pts.insert(pts.end(), b.begin(), b.end());
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < 2 * n; ++i)
        for (std::size_t j = i + 1; j < 2 * n; ++j) pairs.emplace_back(std::abs(pts[i] - pts[j]), i, j);
    std::sort(pairs.begin(), pairs.end());
    std::vector<std::size_t> parent(2 * n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    // balance[root] = (#a - #b) in the cluster
    std::vector<long> balance(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) balance[i] = i < n ? 1 : -1;
    std::size_t unbalanced = 2 * n;
    radius = 0.0;
    for (std::size_t k = 0; unbalanced > 0 && k < pairs.size(); ++k) {
        const auto [d, i, j] = pairs[k];
        const std::size_t ri = find(i), rj = find(j);
        if (ri == rj) continue;
        unbalanced -= (balance[ri] != 0) + (balance[rj] != 0);
        parent[rj] = ri;
        balance[ri] += balance[rj];
        unbalanced += balance[ri] != 0;
        radius = d / rho;
    }
    std::vector<std::complex<double>> sum(2 * n);
    std::vector<std::size_t> count(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        sum[find(i)] += i < n ? pts[i] : -pts[i];
        count[find(i)] += i < n;
    }
    double worst = 0.0;
    for (std::size_t r = 0; r < 2 * n; ++r)
        if (count[r] > 0) worst = std::max(worst, std::abs(sum[r]) / static_cast<double>(count[r]) / rho);
    return worst;
}

}  // namespace

EigResult finite_eigenvalues(const LtiSystem& lti, int dof) {
    const Index N = lti.A.rows();
    std::vector<std::size_t> rows_d, rows_a;
    for (Index i = 0; i < N; ++i) (lti.B.row(i).isZero(0.0) ? rows_a : rows_d).push_back(static_cast<std::size_t>(i));
    if (dof < 0 || static_cast<std::size_t>(dof) != rows_d.size())
        throw Error(ErrorCode::DimensionMismatch, "B has " + std::to_string(rows_d.size()) +
                                                      " derivative rows, expected " + std::to_string(dof));
    const auto nd = idx(rows_d.size());
    const auto na = idx(rows_a.size());

    EigResult res;
    // Algebraic rows solved for their pivot columns; the rest span the
    // reduced coordinates: x = S z.
    RealMatrix Aa(na, N);
    for (Index k = 0; k < na; ++k) Aa.row(k) = lti.A.row(idx(rows_a[static_cast<std::size_t>(k)]));
    std::vector<std::size_t> solved;
    if (na > 0) {
        Eigen::ColPivHouseholderQR<RealMatrix> qr(Aa);
        qr.setThreshold(1e-12);
        if (qr.rank() < na) {
            require_regular(lti, dof, 1.0);
            throw Error(ErrorCode::Singular, "algebraic rows of the pencil are rank deficient");
        }
        for (Index k = 0; k < na; ++k) solved.push_back(static_cast<std::size_t>(qr.colsPermutation().indices()(k)));
    }
    std::vector<bool> is_solved(static_cast<std::size_t>(N), false);
    for (std::size_t j : solved) is_solved[j] = true;
    for (std::size_t j = 0; j < static_cast<std::size_t>(N); ++j)
        if (!is_solved[j]) res.reduced_vars.push_back(j);
    std::sort(solved.begin(), solved.end());

    RealMatrix S = RealMatrix::Zero(N, nd);
    for (Index k = 0; k < nd; ++k) S(idx(res.reduced_vars[static_cast<std::size_t>(k)]), k) = 1.0;
    if (na > 0 && nd > 0) {
        RealMatrix AY(na, na), AZ(na, nd);
        for (Index k = 0; k < na; ++k) AY.col(k) = Aa.col(idx(solved[static_cast<std::size_t>(k)]));
        for (Index k = 0; k < nd; ++k) AZ.col(k) = Aa.col(idx(res.reduced_vars[static_cast<std::size_t>(k)]));
        const RealMatrix Y = -LuFactor(AY).solve(AZ);
        for (Index k = 0; k < na; ++k) S.row(idx(solved[static_cast<std::size_t>(k)])) = Y.row(k);
    }
    RealMatrix Bd(nd, N), Ad(nd, N);
    for (Index k = 0; k < nd; ++k) {
        Bd.row(k) = lti.B.row(idx(rows_d[static_cast<std::size_t>(k)]));
        Ad.row(k) = lti.A.row(idx(rows_d[static_cast<std::size_t>(k)]));
    }
    if (nd > 0) {
        try {
            res.M = LuFactor(RealMatrix(Bd * S)).solve(RealMatrix(Ad * S));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Singular) throw;
            require_regular(lti, dof, 1.0);
            throw;
        }
    } else {
        res.M = RealMatrix(0, 0);
    }

    // Eigenpairs of M; conjugate partners are copied so pairs are exact.
    ComplexList vals;
    ComplexMatrix W(nd, nd);
    if (nd > 0) {
        Eigen::EigenSolver<RealMatrix> es(res.M, true);
        if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "real Schur iteration");
        const ComplexVector ev = es.eigenvalues();
        W = es.eigenvectors();
        vals.assign(ev.data(), ev.data() + ev.size());
        for (Index k = 0; k + 1 < nd; ++k)
            if (vals[static_cast<std::size_t>(k)].imag() != 0.0 &&
                vals[static_cast<std::size_t>(k + 1)] == std::conj(vals[static_cast<std::size_t>(k)])) {
                W.col(k + 1) = W.col(k).conjugate();
                ++k;
            }
    }
    std::vector<std::size_t> order(vals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (vals[a].real() != vals[b].real()) return vals[a].real() < vals[b].real();
        return vals[a].imag() < vals[b].imag();
    });
    res.vectors = ComplexMatrix(N, nd);
    for (std::size_t k = 0; k < order.size(); ++k) {
        res.values.push_back(vals[order[k]]);
        ComplexVector v = S.cast<std::complex<double>>() * W.col(idx(order[k]));
        Index arg = 0;
        for (Index i = 1; i < v.size(); ++i)
            if (std::abs(v(i)) > std::abs(v(arg)) * (1.0 + 1e-12)) arg = i;
        res.vectors.col(idx(k)) = v / v(arg);
    }

    // Oracle: interpolate det(A - lambda B) on dof + 2 Chebyshev nodes in
    // s = lambda / rho; the top coefficient must vanish. One scale resolves
    // roots only to eps * rho, so the roots come from a ladder of scales
    // rho 2^-j: each keeps the roots outside rho 2^-(j+1) and the next one
    // interpolates det(A - lambda B) / prod (lambda - kept).
    double rho = 1.0;
    for (const auto& l : res.values) rho = std::max(rho, std::abs(l));
    const Vector cs = interpolate_det(lti, dof + 2, rho, {});
    const double top = cs.cwiseAbs().maxCoeff();
    if (top == 0.0) throw Error(ErrorCode::IrregularPencil, "det(A - lambda B) vanishes at every sample node");
    res.degree = 0;
    for (Index j = 0; j < cs.size(); ++j)
        if (std::abs(cs(j)) > 1e-9 * top) res.degree = static_cast<int>(j);
    for (Index j = 0; j < cs.size(); ++j) res.char_poly.push_back(cs(j) / std::pow(rho, static_cast<double>(j)));
    constexpr int kScales = 40;
    for (int j = 0; j < kScales; ++j) {
        const int left = res.degree - static_cast<int>(res.poly_roots.size());
        if (left <= 0) break;
        const double hi = std::ldexp(rho, -j);
        const Vector cj = j == 0 ? cs : interpolate_det(lti, left + 1, hi, res.poly_roots);
        for (const auto& r : poly_roots(cj, left))
            if (j == kScales - 1 || std::abs(r) > 0.5) res.poly_roots.push_back(r * hi);
    }
    sort_eigenvalues(res.poly_roots);
    if (res.poly_roots.size() == res.values.size()) {
        res.max_root_mismatch = pointwise_mismatch(res.values, res.poly_roots);
        res.cluster_mismatch = cluster_mismatch(res.values, res.poly_roots, rho, res.cluster_radius);
    } else {
        res.max_root_mismatch = std::numeric_limits<double>::infinity();
        res.cluster_mismatch = std::numeric_limits<double>::infinity();
    }
    return res;
}

ComplexVector modal_solution(const EigResult& eig, const Vector& x0) {
    const auto n = idx(eig.reduced_vars.size());
    if (x0.size() != eig.vectors.rows()) throw Error(ErrorCode::DimensionMismatch, "state length mismatch");
    ComplexMatrix Wz(n, n);
    ComplexVector z0(n);
    for (Index k = 0; k < n; ++k) {
        Wz.row(k) = eig.vectors.row(idx(eig.reduced_vars[static_cast<std::size_t>(k)]));
        z0(k) = x0(idx(eig.reduced_vars[static_cast<std::size_t>(k)]));
    }
    if (n == 0) return ComplexVector(0);
    Eigen::JacobiSVD<ComplexMatrix> svd(Wz);
    const Vector& sv = svd.singularValues();
    if (sv(0) == 0.0 || sv(n - 1) / sv(0) < 1e-10)
        throw Error(ErrorCode::DefectiveSpectrum, "eigenvectors do not span the reduced coordinates");
    return Eigen::PartialPivLU<ComplexMatrix>(Wz).solve(z0);
}

Vector modal_state(const EigResult& eig, const ComplexVector& c, double t) {
    ComplexVector x = ComplexVector::Zero(eig.vectors.rows());
    for (Index k = 0; k < c.size(); ++k) x += c(k) * std::exp(eig.values[static_cast<std::size_t>(k)] * t) * eig.vectors.col(k);
    return x.real();
}

}  // namespace cph
