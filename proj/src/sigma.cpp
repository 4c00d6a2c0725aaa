#include "cph/sigma.hpp"

#include "cph/error.hpp"

#include <algorithm>
#include <limits>

namespace cph {

namespace {

// Min-cost perfect assignment (Hungarian method with potentials), O(n^3).
// Returns col_of_row.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<long long>>& cost) {
    const std::size_t n = cost.size();
    constexpr long long inf = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);  // p[j]: row matched to column j (1-based)
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<long long> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            long long delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> col_of_row(n);
    for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
    return col_of_row;
}

}  // namespace

SignatureMatrix SignatureMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
    SignatureMatrix s(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size()) throw Error(ErrorCode::DimensionMismatch, "signature matrix not square");
        for (std::size_t j = 0; j < rows.size(); ++j) s(i, j) = rows[i][j];
    }
    return s;
}

SignatureMatrix signature_matrix(const CpHSystem& sys) {
    SignatureMatrix s(sys.size());
    for (std::size_t i = 0; i < sys.size(); ++i)
        for (const Occurrence& o : sys.pattern()[i]) s(i, o.var) = std::max(s(i, o.var), o.order);
    return s;
}

Transversal hvt(const SignatureMatrix& sigma) {
    const std::size_t n = sigma.size();
    Transversal t;
    if (n == 0) return t;
    int lo = 0, hi = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (sigma.finite(i, j)) {
                lo = std::min(lo, sigma(i, j));
                hi = std::max(hi, sigma(i, j));
            }
    // Scaled so one unit of value outweighs all diagonal bonuses; a single
    // forbidden entry outweighs any finite assignment.
    const long long scale = static_cast<long long>(n) + 1;
    const long long span = static_cast<long long>(hi - lo) * scale + 1;
    const long long forbidden = span * static_cast<long long>(n) + 1;
    std::vector<std::vector<long long>> cost(n, std::vector<long long>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost[i][j] = sigma.finite(i, j)
                             ? static_cast<long long>(hi - sigma(i, j)) * scale + (i == j ? 0 : 1)
                             : forbidden;
    t.col_of_row = min_cost_assignment(cost);
    for (std::size_t i = 0; i < n; ++i) {
        if (!sigma.finite(i, t.col_of_row[i]))
            throw Error(ErrorCode::StructurallyIllPosed,
                        "no transversal of finite entries (row " + std::to_string(i + 1) + " unmatched)");
        t.value += sigma(i, t.col_of_row[i]);
    }
    return t;
}

bool offsets_valid(const SignatureMatrix& sigma, const Offsets& o, const Transversal* t) {
    const std::size_t n = sigma.size();
    if (o.c.size() != n || o.d.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (o.c[i] < 0 || o.d[i] < 0) return false;
        for (std::size_t j = 0; j < n; ++j)
            if (sigma.finite(i, j) && o.d[j] - o.c[i] < sigma(i, j)) return false;
    }
    if (t)
        for (std::size_t i = 0; i < n; ++i)
            if (o.d[t->col_of_row[i]] - o.c[i] != sigma(i, t->col_of_row[i])) return false;
    return true;
}

Offsets canonical_offsets(const SignatureMatrix& sigma, const Transversal& t) {
    const std::size_t n = sigma.size();
    Offsets o;
    o.flavor = OffsetFlavor::Canonical;
    o.c.assign(n, 0);
    o.d.assign(n, 0);
    for (;;) {
        std::vector<int> d(n, 0);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                if (sigma.finite(i, j)) d[j] = std::max(d[j], sigma(i, j) + o.c[i]);
        std::vector<int> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = d[t.col_of_row[i]] - sigma(i, t.col_of_row[i]);
        const bool same = c == o.c && d == o.d;
        o.c = std::move(c);
        o.d = std::move(d);
        if (same) return o;
    }
}

Offsets provisional_offsets(const CpHSystem& sys) {
    Offsets o;
    o.flavor = OffsetFlavor::Provisional;
    for (const RowInfo& r : sys.rows()) o.c.push_back(r.cls == RowClass::c || r.cls == RowClass::L ? 0 : 1);
    o.d.assign(sys.size(), 1);
    if (!offsets_valid(signature_matrix(sys), o))
        throw Error(ErrorCode::InvalidOffsets, "provisional offsets violate d_j - c_i >= sigma_ij");
    return o;
}

int structural_index(const Offsets& o) {
    int idx = 0;
    for (int c : o.c) idx = std::max(idx, c);
    if (std::find(o.d.begin(), o.d.end(), 0) != o.d.end()) ++idx;
    return idx;
}

RealMatrix system_jacobian(const CpHSystem& sys, const SignatureMatrix& sigma, const Offsets& o, double t,
                           const Vector& x, const Vector& xd) {
    RealMatrix dfdx, dfdxd;
    sys.jacobians(t, x, xd, dfdx, dfdxd);
    const std::size_t n = sys.size();
    RealMatrix J = RealMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const int k = o.d[j] - o.c[i];
            if (!sigma.finite(i, j) || k != sigma(i, j)) continue;
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            if (k == 0) J(ii, jj) = dfdx(ii, jj);
            if (k == 1) J(ii, jj) = dfdxd(ii, jj);
        }
    return J;
}

SigmaAnalysis analyze(const CpHSystem& sys, double t, const Vector& x, const Vector& xd) {
    SigmaAnalysis a;
    a.sigma = signature_matrix(sys);
    a.transversal = hvt(a.sigma);
    a.canonical = canonical_offsets(a.sigma, a.transversal);
    a.canonical_index = structural_index(a.canonical);
    try {
        a.provisional = provisional_offsets(sys);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidOffsets) throw;
    }
    a.offsets = a.provisional ? *a.provisional : a.canonical;
    a.structural_index = structural_index(a.offsets);
    a.dof = 0;
    for (std::size_t j = 0; j < sys.size(); ++j) a.dof += a.offsets.d[j] - a.offsets.c[j];
    a.J = system_jacobian(sys, a.sigma, a.offsets, t, x, xd);
    a.sv_ratio = sys.size() == 0 ? 1.0 : singular_value_ratio(a.J);
    a.amenable = a.sv_ratio > kAmenableTol;
    return a;
}

}  // namespace cph
