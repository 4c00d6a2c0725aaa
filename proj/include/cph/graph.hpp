#ifndef CPH_GRAPH_HPP
#define CPH_GRAPH_HPP

#include "cph/linalg.hpp"
#include "cph/netlist.hpp"

#include <array>
#include <string>
#include <vector>

namespace cph {

// Kruskal scan order: V, C, D (R and G), L, I.
enum class EdgeClass { V = 0, C = 1, D = 2, L = 3, I = 4 };

EdgeClass edge_class(ElementKind k);

struct Edge {
    ElementKind kind;
    std::size_t from;  // 0-based
    std::size_t to;
};

class CircuitGraph {
public:
    CircuitGraph(std::size_t n, std::vector<Edge> edges, std::vector<std::string> names = {});
    static CircuitGraph from_spec(const CircuitSpec& spec);

    std::size_t n() const { return n_; }
    std::size_t b() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(std::size_t k) const { return edges_[k]; }
    const std::string& name(std::size_t k) const { return names_[k]; }
    std::vector<ElementKind> kinds() const;
    std::size_t find(const std::string& name) const;

private:
    std::size_t n_;
    std::vector<Edge> edges_;
    std::vector<std::string> names_;
};

IntMatrix incidence(const CircuitGraph& g);

struct WellPosedReport {
    bool connected = false;
    bool a1_ok = false;  // rank A_V = n_V
    bool a2_ok = false;  // rank A_{E\I} = n - 1
    std::size_t rank_A = 0;
    std::size_t rank_V = 0;
    std::size_t rank_non_I = 0;

    bool ok() const { return connected && a1_ok && a2_ok; }
    // Throws Disconnected, VoltageCycle or CurrentCutset, in that order.
    void require() const;
};

WellPosedReport check_wellposed(const IntMatrix& A, const std::vector<ElementKind>& kinds);

struct Ranks {
    std::size_t r_V = 0, r_VC = 0, r_VCD = 0, r_VCDL = 0;
    bool operator==(const Ranks&) const = default;
};

struct ClassCounts {
    // twigs
    std::size_t v = 0, c = 0, d = 0, l = 0;
    // links
    std::size_t C = 0, D = 0, L = 0, I = 0;
    // non-normal trees only
    std::size_t i_twigs = 0, v_links = 0;
    bool operator==(const ClassCounts&) const = default;
};

struct NormalTree {
    std::vector<std::size_t> tree;    // ascending edge indices
    std::vector<std::size_t> cotree;  // ascending edge indices
    IntMatrix F;                      // rows: cotree, cols: tree
    Ranks ranks;
    ClassCounts counts;
    bool normal = true;

    std::size_t row_of(std::size_t link) const;  // throws if not a link
    std::size_t col_of(std::size_t twig) const;  // throws if not a twig
    bool is_twig(std::size_t e) const;
};

// Cumulative ranks of the V, VC, VCD, VCDL edge sets via union-find.
Ranks cumulative_ranks(const CircuitGraph& g);

std::vector<std::size_t> kruskal_tree_edges(const CircuitGraph& g);
std::vector<std::size_t> rref_tree_edges(const CircuitGraph& g);

NormalTree normal_tree_kruskal(const CircuitGraph& g);
NormalTree normal_tree_rref(const CircuitGraph& g);

// F = -(A~_T^{-1} A~_N)^T with A~ = A minus row `dropped_row` (default: last).
// Rows follow the ascending complement of `tree`, columns follow `tree` as given.
IntMatrix kron_matrix(const IntMatrix& A, const std::vector<std::size_t>& tree,
                      std::size_t dropped_row = static_cast<std::size_t>(-1));

// Accepts any spanning tree; `normal` records whether the class rules hold.
NormalTree spanning_tree(const CircuitGraph& g, std::vector<std::size_t> proposed);
// Spanning + acyclic + normal, else NotATree / NotNormal.
NormalTree validate_tree(const CircuitGraph& g, std::vector<std::size_t> proposed);

struct SignedEdge {
    std::size_t edge;
    int sign;  // relative to the defining edge
    bool operator==(const SignedEdge&) const = default;
};

struct CutCycleSets {
    // cycles[k]: fundamental cycle of link tree.cotree[k]; sign +1 = same
    // orientation around the cycle.
    std::vector<std::vector<SignedEdge>> cycles;
    // cutsets[k]: fundamental cutset of twig tree.tree[k]; sign +1 = same
    // direction across the cut.
    std::vector<std::vector<SignedEdge>> cutsets;
};

CutCycleSets fundamental_sets(const NormalTree& tree);

}  // namespace cph

#endif
