#include "cph/validation.hpp"

#include "cph/error.hpp"
#include "cph/linalg.hpp"
#include "cph/random_circuit.hpp"
#include "cph/sigma.hpp"
#include "cph/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <utility>

namespace cph {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t k) { return static_cast<Index>(k); }

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

struct Arc {
    std::size_t to, edge;
    int sign;  // +1 when walking from `from` to `to` of the edge
};

std::vector<std::vector<Arc>> tree_adjacency(const CircuitGraph& g, const std::vector<std::size_t>& tree) {
    std::vector<std::vector<Arc>> adj(g.n());
    for (std::size_t e : tree) {
        const Edge& ed = g.edge(e);
        adj[ed.from].push_back({ed.to, e, +1});
        adj[ed.to].push_back({ed.from, e, -1});
    }
    return adj;
}

// Signed twig sequence of the tree path src -> dst; empty when src == dst.
std::vector<std::pair<std::size_t, int>> tree_path(const std::vector<std::vector<Arc>>& adj, std::size_t src,
                                                   std::size_t dst) {
    const std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> via(adj.size(), none);
    std::vector<int> via_sign(adj.size(), 0);
    std::vector<std::size_t> prev(adj.size(), none);
    std::vector<bool> seen(adj.size(), false);
    std::vector<std::size_t> stack{src};
    seen[src] = true;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (const Arc& a : adj[u])
            if (!seen[a.to]) {
                seen[a.to] = true;
                prev[a.to] = u;
                via[a.to] = a.edge;
                via_sign[a.to] = a.sign;
                stack.push_back(a.to);
            }
    }
    std::vector<std::pair<std::size_t, int>> path;
    if (!seen[dst]) return path;
    for (std::size_t w = dst; w != src; w = prev[w]) path.emplace_back(via[w], via_sign[w]);
    std::reverse(path.begin(), path.end());
    return path;
}

// Vertices reachable from `root` in the tree without crossing `cut`.
std::vector<bool> side_of(const std::vector<std::vector<Arc>>& adj, std::size_t root, std::size_t cut) {
    std::vector<bool> in(adj.size(), false);
    std::vector<std::size_t> stack{root};
    in[root] = true;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (const Arc& a : adj[u])
            if (a.edge != cut && !in[a.to]) {
                in[a.to] = true;
                stack.push_back(a.to);
            }
    }
    return in;
}

// Complementary dissipator quantity straight from the netlist law.
double law_value(const ElementSpec& el, double control) {
    if (el.is_constant()) return el.constant() * control;
    return el.expression().eval(control);
}

}  // namespace

OracleReport oracle_cycle_cutset(const CircuitGraph& g, const NormalTree& tree) {
    OracleReport rep;
    rep.check = "cycle_cutset";
    rep.invariant = "F-fundamental-sets";
    rep.tolerance = 0.0;
    const auto adj = tree_adjacency(g, tree.tree);
    const std::size_t nl = tree.cotree.size(), nt = tree.tree.size();
    if (tree.F.rows() != idx(nl) || tree.F.cols() != idx(nt)) {
        rep.measured = static_cast<double>(nl * nt);
        rep.detail = "F has the wrong shape";
        return rep;
    }
    std::map<std::size_t, std::size_t> col;
    for (std::size_t c = 0; c < nt; ++c) col[tree.tree[c]] = c;

    IntMatrix from_cycles = IntMatrix::Zero(idx(nl), idx(nt));
    for (std::size_t r = 0; r < nl; ++r) {
        // around the loop along the link, then back through the tree
        const Edge& link = g.edge(tree.cotree[r]);
        for (const auto& [e, s] : tree_path(adj, link.to, link.from)) from_cycles(idx(r), idx(col[e])) = s;
    }
    IntMatrix from_cutsets = IntMatrix::Zero(idx(nl), idx(nt));
    for (std::size_t c = 0; c < nt; ++c) {
        const std::vector<bool> S = side_of(adj, g.edge(tree.tree[c]).from, tree.tree[c]);
        for (std::size_t r = 0; r < nl; ++r) {
            const Edge& link = g.edge(tree.cotree[r]);
            if (S[link.from] != S[link.to]) from_cutsets(idx(r), idx(c)) = S[link.from] ? -1 : +1;
        }
    }
    std::size_t bad = 0;
    std::ostringstream first;
    for (std::size_t r = 0; r < nl; ++r)
        for (std::size_t c = 0; c < nt; ++c) {
            const auto f = tree.F(idx(r), idx(c));
            if (f != from_cycles(idx(r), idx(c)) || f != from_cutsets(idx(r), idx(c))) {
                if (bad == 0)
                    first << "F(" << g.name(tree.cotree[r]) << ", " << g.name(tree.tree[c]) << ") = " << f
                          << ", cycle " << from_cycles(idx(r), idx(c)) << ", cutset "
                          << from_cutsets(idx(r), idx(c));
                ++bad;
            }
        }
    rep.checked = nl * nt;
    rep.measured = static_cast<double>(bad);
    rep.pass = bad == 0;
    rep.detail = bad == 0 ? std::to_string(rep.checked) + " entries agree" : first.str();
    return rep;
}

OracleReport oracle_model_equivalence(std::shared_ptr<const CircuitModel> model, const NormalTree& tree,
                                      std::uint64_t seed, int points) {
    OracleReport rep;
    rep.check = "model_equivalence";
    rep.invariant = "model1-eliminates-to-model2";
    rep.tolerance = 1e-12;
    const CpHSystem m1 = build_model1(model, tree);
    const CpHSystem m2 = build_model2(model, tree);
    const CircuitSpec& spec = model->spec();

    std::map<std::pair<RowClass, std::size_t>, std::size_t> row2;
    for (std::size_t i = 0; i < m2.rows().size(); ++i) row2[{m2.rows()[i].cls, m2.rows()[i].edge}] = i;
    std::map<std::string, std::size_t> var2;
    for (std::size_t j = 0; j < m2.size(); ++j) var2[m2.layout().names[j]] = j;
    std::map<std::size_t, std::size_t> xhat_of;
    for (std::size_t j = 0; j < m2.size(); ++j)
        if (m2.layout().roles[j] == VarRole::xhat) xhat_of[m2.layout().edges[j]] = j;

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0), ut(0.0, 1.0);
    const auto n1 = idx(m1.size()), n2 = idx(m2.size());
    double worst = 0.0;
    for (int k = 0; k < points; ++k) {
        const double t = ut(gen);
        Vector x2(n2), xd2(n2);
        for (Index j = 0; j < n2; ++j) x2(j) = u(gen), xd2(j) = u(gen);
        Vector x1 = Vector::Zero(n1), xd1 = Vector::Zero(n1);
        for (std::size_t j = 0; j < m1.size(); ++j) {
            const VarRole role = m1.layout().roles[j];
            const std::size_t e = m1.layout().edges[j];
            if (role == VarRole::qC || role == VarRole::qc || role == VarRole::phil || role == VarRole::phiL) {
                const std::size_t j2 = var2.at(m1.layout().names[j]);
                x1(idx(j)) = x2(idx(j2));
                xd1(idx(j)) = xd2(idx(j2));
                continue;
            }
            const ElementSpec& el = spec.elements[e];
            const double control = x2(idx(xhat_of.at(e)));
            const double other = law_value(el, control);
            const bool current_controlled = el.kind == ElementKind::R;
            const bool wants_current = role == VarRole::id || role == VarRole::iD;
            x1(idx(j)) = wants_current == current_controlled ? control : other;
        }
        const Vector f1 = m1.residual(t, x1, xd1);
        const Vector f2 = m2.residual(t, x2, xd2);
        const double scale = 1.0 + inf_norm(f2);
        for (std::size_t i = 0; i < m1.rows().size(); ++i) {
            const RowInfo& row = m1.rows()[i];
            const double expect = row.cls == RowClass::R ? 0.0 : f2(idx(row2.at({row.cls, row.edge})));
            worst = std::max(worst, std::abs(f1(idx(i)) - expect) / scale);
        }
        const Vector y1 = m1.output(t, x1, xd1), y2 = m2.output(t, x2, xd2);
        worst = std::max(worst, inf_norm(y1 - y2) / (1.0 + inf_norm(y2)));
        ++rep.checked;
    }
    rep.measured = worst;
    rep.pass = worst <= rep.tolerance;
    std::ostringstream d;
    d << rep.checked << " points, " << m1.size() << " vs " << m2.size() << " variables";
    rep.detail = d.str();
    return rep;
}

OracleReport oracle_index(const CpHSystem& sys, double t0, const std::optional<Vector>& guess) {
    OracleReport rep;
    rep.check = "index";
    rep.invariant = "index-at-most-one";
    rep.tolerance = kAmenableTol;
    const auto n = idx(sys.size());
    ConsistentPoint cp;
    try {
        cp = consistent_point(sys, t0, guess.value_or(Vector::Ones(n)));
    } catch (const Error& e) {
        rep.measured = -1;
        rep.detail = std::string("no consistent point: ") + e.what();
        return rep;
    }
    RealMatrix dfdx, dfdxd;
    sys.jacobians(cp.t0, cp.x0, cp.xd0, dfdx, dfdxd);
    const auto nonsingular = [](const RealMatrix& M) { return M.size() == 0 || singular_value_ratio(M) > kAmenableTol; };

    // derivative-free rows are differentiated once; dfdxd vanishes on them
    RealMatrix stage0 = dfdxd;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const auto& occ = sys.pattern()[i];
        const bool reads_rate = std::any_of(occ.begin(), occ.end(), [](const Occurrence& o) { return o.order > 0; });
        if (!reads_rate) stage0.row(idx(i)) = dfdx.row(idx(i));
    }
    const bool j0 = nonsingular(dfdxd);
    const bool j1 = nonsingular(stage0);
    const int index = j0 ? 0 : (j1 ? 1 : -1);
    rep.measured = index;
    rep.checked = sys.size();

    const SigmaAnalysis a = analyze(sys, cp.t0, cp.x0, cp.xd0);
    rep.pass = j1 && a.amenable && index == a.structural_index;
    std::ostringstream d;
    d << "oracle index " << index << ", signature-matrix index " << a.structural_index
      << (a.amenable ? "" : " (not amenable)");
    rep.detail = d.str();
    return rep;
}

CorpusSummary run_corpus(const CorpusOptions& opts) {
    if (opts.max_nodes < 2 || opts.max_edges + 1 < opts.max_nodes)
        throw Error(ErrorCode::InvalidArgument, "corpus needs max_nodes >= 2 and max_edges >= max_nodes - 1");
    CorpusSummary sum;
    for (std::size_t k = 0; k < opts.count; ++k) {
        RandomCircuitOptions ro;
        ro.seed = opts.seed + k;
        ro.nodes = 2 + k % (opts.max_nodes - 1);
        ro.edges = std::min(opts.max_edges, ro.nodes - 1 + k % 9);
        ro.value_min = 0.1;
        ro.value_max = 10.0;
        auto model = std::make_shared<const CircuitModel>(random_circuit(ro));
        std::vector<OracleReport> reps;
        for (const NormalTree& tree : {normal_tree_kruskal(model->graph()), normal_tree_rref(model->graph())}) {
            reps.push_back(oracle_cycle_cutset(model->graph(), tree));
            reps.push_back(oracle_model_equivalence(model, tree, ro.seed));
            reps.push_back(oracle_index(build_model2(model, tree)));
        }
        for (OracleReport& r : reps) {
            ++sum.reports;
            if (!r.pass) {
                r.detail = "seed " + std::to_string(ro.seed) + ": " + r.detail;
                sum.failures.push_back(std::move(r));
            }
        }
        ++sum.circuits;
    }
    return sum;
}

std::vector<TimingPoint> tree_timing_sweep(const std::vector<std::size_t>& nodes, double edges_per_node,
                                           std::uint64_t seed, int repeats) {
    using clock = std::chrono::steady_clock;
    std::vector<TimingPoint> out;
    for (std::size_t n : nodes) {
        RandomCircuitOptions ro;
        ro.seed = seed + n;
        ro.nodes = n;
        ro.edges = std::max(n - 1, static_cast<std::size_t>(edges_per_node * static_cast<double>(n)));
        ro.kinds = KindMix::parse("C:3,L:3,R:2,G:2");
        const CircuitGraph g = CircuitGraph::from_spec(random_circuit(ro));
        TimingPoint p{n, ro.edges, 1e300, 1e300};
        for (int r = 0; r < repeats; ++r) {
            auto t0 = clock::now();
            const auto a = kruskal_tree_edges(g);
            auto t1 = clock::now();
            const auto b = rref_tree_edges(g);
            auto t2 = clock::now();
            if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "tree builders disagree on size");
            p.kruskal_seconds = std::min(p.kruskal_seconds, std::chrono::duration<double>(t1 - t0).count());
            p.rref_seconds = std::min(p.rref_seconds, std::chrono::duration<double>(t2 - t1).count());
        }
        out.push_back(p);
    }
    return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::DimensionMismatch, "need two or more points");
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < x.size(); ++k) mx += std::log(x[k]), my += std::log(y[k]);
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = std::log(x[k]) - mx;
        sxy += dx * (std::log(y[k]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace cph
