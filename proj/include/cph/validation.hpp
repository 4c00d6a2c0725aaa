#ifndef CPH_VALIDATION_HPP
#define CPH_VALIDATION_HPP

#include "cph/dae.hpp"
#include "cph/graph.hpp"
#include "cph/model.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cph {

// Brute-force checks that share no code path with the modules they audit.
struct OracleReport {
    std::string check;
    std::string invariant;  // id of the property being bound
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::size_t checked = 0;  // entries, points or rows examined
    std::string detail;
};

// Every entry of tree.F against the fundamental cycle of its link (tree
// path found by DFS) and the fundamental cutset of its twig (components of
// the tree minus the twig). measured = number of disagreeing entries.
OracleReport oracle_cycle_cutset(const CircuitGraph& g, const NormalTree& tree);

// Model 1 residual at points built from Model 2 points by substituting the
// netlist laws for the eliminated dissipator variables: Kirchhoff rows must
// equal their Model 2 counterparts, relation rows must vanish.
// measured = worst gap relative to 1 + |f2|_inf.
OracleReport oracle_model_equivalence(std::shared_ptr<const CircuitModel> model, const NormalTree& tree,
                                      std::uint64_t seed = 1, int points = 100);

// At a consistent point: index 0 when df/dxd is nonsingular, index 1 when
// the system with the derivative-free rows differentiated once is
// nonsingular in xd. Passes when this agrees with the signature-matrix
// index and the differentiated system is solvable. measured = oracle index
// (-1 when neither system is solvable).
OracleReport oracle_index(const CpHSystem& sys, double t0 = 0.0, const std::optional<Vector>& guess = std::nullopt);

struct CorpusOptions {
    std::size_t count = 200;
    std::uint64_t seed = 1;
    std::size_t max_nodes = 12;
    std::size_t max_edges = 20;
};

struct CorpusSummary {
    std::size_t circuits = 0;
    std::size_t reports = 0;
    std::vector<OracleReport> failures;  // each detail names the circuit seed
    bool ok() const { return failures.empty(); }
};

// Runs all three oracles on both trees of each seeded random circuit.
CorpusSummary run_corpus(const CorpusOptions& opts);

struct TimingPoint {
    std::size_t nodes = 0, edges = 0;
    double kruskal_seconds = 0.0, rref_seconds = 0.0;  // best of the repeats
};

// Tree construction times on source-free random circuits with `edges_per_node`
// times as many edges as nodes.
std::vector<TimingPoint> tree_timing_sweep(const std::vector<std::size_t>& nodes, double edges_per_node = 2.0,
                                           std::uint64_t seed = 1, int repeats = 3);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cph

#endif
