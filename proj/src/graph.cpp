#include "cph/graph.hpp"

#include "cph/error.hpp"
#include "union_find.hpp"

#include <algorithm>

namespace cph {

EdgeClass edge_class(ElementKind k) {
    switch (k) {
        case ElementKind::V: return EdgeClass::V;
        case ElementKind::C: return EdgeClass::C;
        case ElementKind::R:
        case ElementKind::G: return EdgeClass::D;
        case ElementKind::L: return EdgeClass::L;
        case ElementKind::I: return EdgeClass::I;
    }
    return EdgeClass::I;
}

CircuitGraph::CircuitGraph(std::size_t n, std::vector<Edge> edges, std::vector<std::string> names)
    : n_(n), edges_(std::move(edges)), names_(std::move(names)) {
    if (edges_.empty()) throw Error(ErrorCode::InvalidArgument, "graph without edges");
    for (const auto& e : edges_) {
        if (e.from >= n_ || e.to >= n_) throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
        if (e.from == e.to) throw Error(ErrorCode::SelfLoop, "edge with equal endpoints");
    }
    if (names_.empty())
        for (std::size_t k = 0; k < edges_.size(); ++k) names_.push_back("e" + std::to_string(k + 1));
    if (names_.size() != edges_.size()) throw Error(ErrorCode::DimensionMismatch, "edge names");
}

CircuitGraph CircuitGraph::from_spec(const CircuitSpec& spec) {
    std::vector<Edge> edges;
    std::vector<std::string> names;
    for (const auto& e : spec.elements) {
        edges.push_back({e.kind, e.from - 1, e.to - 1});
        names.push_back(e.name);
    }
    return CircuitGraph(spec.vertex_count(), std::move(edges), std::move(names));
}

std::vector<ElementKind> CircuitGraph::kinds() const {
    std::vector<ElementKind> out;
    for (const auto& e : edges_) out.push_back(e.kind);
    return out;
}

std::size_t CircuitGraph::find(const std::string& name) const {
    for (std::size_t k = 0; k < names_.size(); ++k)
        if (names_[k] == name) return k;
    throw Error(ErrorCode::InvalidArgument, "no edge named '" + name + "'");
}

IntMatrix incidence(const CircuitGraph& g) {
    IntMatrix A = IntMatrix::Zero(static_cast<Eigen::Index>(g.n()), static_cast<Eigen::Index>(g.b()));
    for (std::size_t k = 0; k < g.b(); ++k) {
        A(static_cast<Eigen::Index>(g.edge(k).from), static_cast<Eigen::Index>(k)) = 1;
        A(static_cast<Eigen::Index>(g.edge(k).to), static_cast<Eigen::Index>(k)) = -1;
    }
    return A;
}

namespace {

IntMatrix select_columns(const IntMatrix& A, const std::vector<std::size_t>& cols) {
    IntMatrix out(A.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = A.col(static_cast<Eigen::Index>(cols[k]));
    return out;
}

std::vector<std::size_t> class_order(const CircuitGraph& g) {
    std::vector<std::size_t> order(g.b());
    for (std::size_t k = 0; k < g.b(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return edge_class(g.edge(a).kind) < edge_class(g.edge(b).kind);
    });
    return order;
}

void require_wellposed_uf(const CircuitGraph& g) {
    detail::UnionFind all(g.n());
    detail::UnionFind volt(g.n());
    detail::UnionFind non_i(g.n());
    for (std::size_t k = 0; k < g.b(); ++k) {
        const Edge& e = g.edge(k);
        all.unite(e.from, e.to);
        if (e.kind == ElementKind::V && !volt.unite(e.from, e.to))
            throw Error(ErrorCode::VoltageCycle, "voltage sources form a cycle through " + g.name(k));
        if (e.kind != ElementKind::I) non_i.unite(e.from, e.to);
    }
    if (all.sets() != 1) throw Error(ErrorCode::DisconnectedGraph, std::to_string(all.sets()) + " components");
    if (non_i.sets() != 1) throw Error(ErrorCode::CurrentCutset, "current sources form a cutset");
}

ClassCounts count_classes(const CircuitGraph& g, const NormalTree& t) {
    ClassCounts c;
    for (std::size_t e : t.tree) {
        switch (g.edge(e).kind) {
            case ElementKind::V: ++c.v; break;
            case ElementKind::C: ++c.c; break;
            case ElementKind::R:
            case ElementKind::G: ++c.d; break;
            case ElementKind::L: ++c.l; break;
            case ElementKind::I: ++c.i_twigs; break;
        }
    }
    for (std::size_t e : t.cotree) {
        switch (g.edge(e).kind) {
            case ElementKind::V: ++c.v_links; break;
            case ElementKind::C: ++c.C; break;
            case ElementKind::R:
            case ElementKind::G: ++c.D; break;
            case ElementKind::L: ++c.L; break;
            case ElementKind::I: ++c.I; break;
        }
    }
    return c;
}

bool satisfies_normality(const ClassCounts& c, const Ranks& r) {
    return c.i_twigs == 0 && c.v_links == 0 && c.v == r.r_V && c.c == r.r_VC - r.r_V &&
           c.d == r.r_VCD - r.r_VC && c.l == r.r_VCDL - r.r_VCD;
}

std::vector<std::size_t> complement(std::size_t b, const std::vector<std::size_t>& tree) {
    std::vector<bool> in(b, false);
    for (std::size_t e : tree) in[e] = true;
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < b; ++e)
        if (!in[e]) out.push_back(e);
    return out;
}

NormalTree finish(const CircuitGraph& g, std::vector<std::size_t> tree, const Ranks& ranks) {
    NormalTree t;
    std::sort(tree.begin(), tree.end());
    t.tree = std::move(tree);
    t.cotree = complement(g.b(), t.tree);
    t.F = kron_matrix(incidence(g), t.tree);
    t.ranks = ranks;
    t.counts = count_classes(g, t);
    t.normal = satisfies_normality(t.counts, ranks);
    return t;
}

}  // namespace

void WellPosedReport::require() const {
    if (!connected) throw Error(ErrorCode::DisconnectedGraph, "rank A = " + std::to_string(rank_A));
    if (!a1_ok) throw Error(ErrorCode::VoltageCycle, "rank A_V < n_V");
    if (!a2_ok) throw Error(ErrorCode::CurrentCutset, "rank A_{E\\I} < n-1");
}

WellPosedReport check_wellposed(const IntMatrix& A, const std::vector<ElementKind>& kinds) {
    if (static_cast<std::size_t>(A.cols()) != kinds.size())
        throw Error(ErrorCode::DimensionMismatch, "kinds vs incidence columns");
    std::vector<std::size_t> v_cols;
    std::vector<std::size_t> non_i_cols;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        if (kinds[k] == ElementKind::V) v_cols.push_back(k);
        if (kinds[k] != ElementKind::I) non_i_cols.push_back(k);
    }
    const std::size_t target = static_cast<std::size_t>(A.rows()) - 1;
    WellPosedReport r;
    r.rank_A = rank(A);
    r.rank_V = rank(select_columns(A, v_cols));
    r.rank_non_I = rank(select_columns(A, non_i_cols));
    r.connected = r.rank_A == target;
    r.a1_ok = r.rank_V == v_cols.size();
    r.a2_ok = r.rank_non_I == target;
    return r;
}

Ranks cumulative_ranks(const CircuitGraph& g) {
    detail::UnionFind uf(g.n());
    std::array<std::size_t, 4> r{};
    for (std::size_t cls = 0; cls < 4; ++cls) {
        for (std::size_t k = 0; k < g.b(); ++k)
            if (static_cast<std::size_t>(edge_class(g.edge(k).kind)) == cls) uf.unite(g.edge(k).from, g.edge(k).to);
        r[cls] = g.n() - uf.sets();
    }
    return {r[0], r[1], r[2], r[3]};
}

std::vector<std::size_t> kruskal_tree_edges(const CircuitGraph& g) {
    detail::UnionFind uf(g.n());
    std::vector<std::size_t> tree;
    for (std::size_t e : class_order(g))
        if (uf.unite(g.edge(e).from, g.edge(e).to)) tree.push_back(e);
    std::sort(tree.begin(), tree.end());
    return tree;
}

std::vector<std::size_t> rref_tree_edges(const CircuitGraph& g) {
    const std::vector<std::size_t> order = class_order(g);
    const RrefResult rr = rref_exact(select_columns(incidence(g), order));
    std::vector<std::size_t> tree;
    for (std::size_t p : rr.pivots) tree.push_back(order[p]);
    std::sort(tree.begin(), tree.end());
    return tree;
}

NormalTree normal_tree_kruskal(const CircuitGraph& g) {
    require_wellposed_uf(g);
    NormalTree t = finish(g, kruskal_tree_edges(g), cumulative_ranks(g));
    if (!t.normal) throw Error(ErrorCode::NotNormal, "Kruskal tree violates class counts");
    return t;
}

NormalTree normal_tree_rref(const CircuitGraph& g) {
    const IntMatrix A = incidence(g);
    check_wellposed(A, g.kinds()).require();
    const std::vector<std::size_t> order = class_order(g);
    const RrefResult rr = rref_exact(select_columns(A, order));

    NormalTree t;
    std::array<std::size_t, 4> r{};
    std::vector<bool> pivot(g.b(), false);
    for (std::size_t p : rr.pivots) {
        pivot[p] = true;
        const auto cls = static_cast<std::size_t>(edge_class(g.edge(order[p]).kind));
        for (std::size_t k = cls; k < 4; ++k) ++r[k];
        t.tree.push_back(order[p]);
    }
    std::sort(t.tree.begin(), t.tree.end());
    t.cotree = complement(g.b(), t.tree);
    t.ranks = {r[0], r[1], r[2], r[3]};

    // a_link = sum_k R[k, link] a_{pivot k}; with a_link = -sum_s F[link, s] a_s
    // this gives F[link, pivot k] = -R[k, link].
    const auto m = static_cast<Eigen::Index>(t.cotree.size());
    const auto nt = static_cast<Eigen::Index>(t.tree.size());
    t.F = IntMatrix::Zero(m, nt);
    for (std::size_t j = 0; j < order.size(); ++j) {
        if (pivot[j]) continue;
        const auto row = static_cast<Eigen::Index>(t.row_of(order[j]));
        for (std::size_t k = 0; k < rr.pivots.size(); ++k) {
            const auto col = static_cast<Eigen::Index>(t.col_of(order[rr.pivots[k]]));
            t.F(row, col) = -rr.R(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        }
    }
    t.counts = count_classes(g, t);
    t.normal = satisfies_normality(t.counts, t.ranks);
    if (!t.normal) throw Error(ErrorCode::NotNormal, "RREF tree violates class counts");
    return t;
}

IntMatrix kron_matrix(const IntMatrix& A, const std::vector<std::size_t>& tree, std::size_t dropped_row) {
    const auto n = static_cast<std::size_t>(A.rows());
    const auto b = static_cast<std::size_t>(A.cols());
    if (n == 0 || tree.size() != n - 1)
        throw Error(ErrorCode::NotATree, "tree must have n-1 = " + std::to_string(n - 1) + " edges");
    if (dropped_row == static_cast<std::size_t>(-1)) dropped_row = n - 1;
    if (dropped_row >= n) throw Error(ErrorCode::InvalidArgument, "dropped row out of range");
    std::vector<std::size_t> sorted_tree = tree;
    std::sort(sorted_tree.begin(), sorted_tree.end());
    if (std::adjacent_find(sorted_tree.begin(), sorted_tree.end()) != sorted_tree.end() ||
        (!sorted_tree.empty() && sorted_tree.back() >= b))
        throw Error(ErrorCode::NotATree, "repeated or out-of-range tree edge");
    const std::vector<std::size_t> cotree = complement(b, sorted_tree);

    std::vector<std::size_t> cols = tree;
    cols.insert(cols.end(), cotree.begin(), cotree.end());
    IntMatrix M(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(b));
    for (std::size_t r = 0, out = 0; r < n; ++r) {
        if (r == dropped_row) continue;
        for (std::size_t k = 0; k < b; ++k)
            M(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(k)) =
                A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(cols[k]));
        ++out;
    }
    const RrefResult rr = rref_exact(M);
    const std::size_t nt = n - 1;
    if (rr.pivots.size() != nt || (nt > 0 && rr.pivots[nt - 1] != nt - 1))
        throw Error(ErrorCode::NotATree, "tree submatrix is singular");
    const auto ni = static_cast<Eigen::Index>(nt);
    return -rr.R.block(0, ni, ni, static_cast<Eigen::Index>(cotree.size())).transpose();
}

NormalTree spanning_tree(const CircuitGraph& g, std::vector<std::size_t> proposed) {
    std::sort(proposed.begin(), proposed.end());
    if (proposed.size() != g.n() - 1 ||
        std::adjacent_find(proposed.begin(), proposed.end()) != proposed.end())
        throw Error(ErrorCode::NotATree,
                    "expected " + std::to_string(g.n() - 1) + " distinct edges, got " + std::to_string(proposed.size()));
    detail::UnionFind uf(g.n());
    for (std::size_t e : proposed) {
        if (e >= g.b()) throw Error(ErrorCode::NotATree, "edge index out of range");
        if (!uf.unite(g.edge(e).from, g.edge(e).to))
            throw Error(ErrorCode::NotATree, "edge " + g.name(e) + " closes a cycle");
    }
    return finish(g, std::move(proposed), cumulative_ranks(g));
}

NormalTree validate_tree(const CircuitGraph& g, std::vector<std::size_t> proposed) {
    NormalTree t = spanning_tree(g, std::move(proposed));
    if (!t.normal) {
        const ClassCounts& c = t.counts;
        const Ranks& r = t.ranks;
        throw Error(ErrorCode::NotNormal,
                    "twig counts (v,c,d,l) = (" + std::to_string(c.v) + "," + std::to_string(c.c) + "," +
                        std::to_string(c.d) + "," + std::to_string(c.l) + "), required (" +
                        std::to_string(r.r_V) + "," + std::to_string(r.r_VC - r.r_V) + "," +
                        std::to_string(r.r_VCD - r.r_VC) + "," + std::to_string(r.r_VCDL - r.r_VCD) +
                        "), current-source twigs " + std::to_string(c.i_twigs) + ", voltage-source links " +
                        std::to_string(c.v_links));
    }
    return t;
}

std::size_t NormalTree::row_of(std::size_t link) const {
    auto it = std::lower_bound(cotree.begin(), cotree.end(), link);
    if (it == cotree.end() || *it != link) throw Error(ErrorCode::InvalidArgument, "edge is not a link");
    return static_cast<std::size_t>(it - cotree.begin());
}

std::size_t NormalTree::col_of(std::size_t twig) const {
    auto it = std::lower_bound(tree.begin(), tree.end(), twig);
    if (it == tree.end() || *it != twig) throw Error(ErrorCode::InvalidArgument, "edge is not a twig");
    return static_cast<std::size_t>(it - tree.begin());
}

bool NormalTree::is_twig(std::size_t e) const { return std::binary_search(tree.begin(), tree.end(), e); }

CutCycleSets fundamental_sets(const NormalTree& t) {
    CutCycleSets out;
    for (std::size_t r = 0; r < t.cotree.size(); ++r) {
        std::vector<SignedEdge> cyc{{t.cotree[r], 1}};
        for (std::size_t c = 0; c < t.tree.size(); ++c) {
            const auto f = t.F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (f != 0) cyc.push_back({t.tree[c], static_cast<int>(f)});
        }
        out.cycles.push_back(std::move(cyc));
    }
    for (std::size_t c = 0; c < t.tree.size(); ++c) {
        std::vector<SignedEdge> cut{{t.tree[c], 1}};
        for (std::size_t r = 0; r < t.cotree.size(); ++r) {
            const auto f = t.F(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (f != 0) cut.push_back({t.cotree[r], static_cast<int>(-f)});
        }
        out.cutsets.push_back(std::move(cut));
    }
    return out;
}

}  // namespace cph
