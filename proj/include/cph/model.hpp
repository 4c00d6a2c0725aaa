#ifndef CPH_MODEL_HPP
#define CPH_MODEL_HPP

#include "cph/graph.hpp"
#include "cph/linalg.hpp"
#include "cph/netlist.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cph {

// Edge classes relative to a tree. Lower case: twigs, upper case: links.
// Each list holds ascending edge indices.
struct EdgeSplit {
    std::vector<std::size_t> v, c, d, l;
    std::vector<std::size_t> C, D, L, I;
};

// Throws NotNormal if a voltage source is a link or a current source a twig.
// With require_normal the full class-count rules are enforced too.
EdgeSplit split_edges(const NormalTree& tree, const std::vector<ElementKind>& kinds, bool require_normal = true);

// Sub-blocks of F with rows from the link classes and columns from the twig
// classes. Cd, Cl, Dl vanish for normal trees and are kept for checking.
struct BlockF {
    IntMatrix Cv, Cc, Cd, Cl;
    IntMatrix Dv, Dc, Dd, Dl;
    IntMatrix Lv, Lc, Ld, Ll;
    IntMatrix Iv, Ic, Id, Il;
};

BlockF block_f(const NormalTree& tree, const EdgeSplit& split);
// Rows ordered C, D, L, I and columns v, c, d, l.
IntMatrix assemble_blocks(const BlockF& blocks);
// F with rows and columns permuted into the same class order.
IntMatrix class_ordered_f(const NormalTree& tree, const EdgeSplit& split);

// Scalar one-port law y = g(x): linear with a fixed slope or an expression.
class ScalarLaw {
public:
    ScalarLaw() = default;
    static ScalarLaw linear(double slope);
    static ScalarLaw expression(Expr e);

    double value(double x) const;
    double slope(double x) const;
    // Integral of g from 0 to x; closed form when linear, adaptive Simpson
    // at relative tolerance 1e-10 otherwise.
    double integral(double x) const;

    bool is_linear() const { return linear_; }
    double linear_slope() const { return slope_; }
    const Expr& expr() const { return expr_; }

private:
    bool linear_ = true;
    double slope_ = 0.0;
    Expr expr_;
    Expr dexpr_;
};

// Coupled law over a whole vector: gradient and Jacobian evaluated together.
struct VectorLaw {
    std::function<void(const Vector& x, Vector& value, RealMatrix& jacobian)> eval;
    // Optional potential whose gradient is `value`; storage only.
    std::function<double(const Vector& x)> potential;
};

// Capacitor and inductor gradients of H = H_C(q) + H_L(phi). Slots follow
// ascending edge index within each kind.
struct StorageLaws {
    std::vector<ScalarLaw> cap;
    std::vector<ScalarLaw> ind;
    std::optional<VectorLaw> cap_coupled;  // replaces `cap` when set
    std::optional<VectorLaw> ind_coupled;  // replaces `ind` when set
};

struct StorageEval {
    Vector v_C, i_L;
    RealMatrix hess_C, hess_L;
};

StorageEval storage_eval(const StorageLaws& laws, const Vector& q, const Vector& phi);
double hamiltonian(const StorageLaws& laws, const Vector& q, const Vector& phi);

// Mixed dissipator form: R-kind edges are current controlled (x = i, rho
// gives v), G-kind edges voltage controlled (x = v, rho gives i).
struct DissipatorForm {
    std::vector<std::size_t> edges;  // ascending
    std::vector<bool> voltage_controlled;
    std::vector<ScalarLaw> rho;
    std::optional<VectorLaw> coupled;  // replaces `rho` when set
};

struct DissipatorEval {
    Vector i, v;      // per dissipative edge
    RealMatrix jac;   // rho'
};

DissipatorEval dissipator_eval(const DissipatorForm& form, const Vector& xhat);
// Swaps i_j and v_j for every voltage-controlled edge of stacked (i; v).
// The map is an involution and sends (i; v) to (xhat; rho).
Vector flip_controls(const DissipatorForm& form, const Vector& stacked);

// Implicit dissipator relation r(i, v) = 0 over all dissipative edges.
struct ImplicitRelation {
    std::size_t size = 0;
    std::function<Vector(const Vector& i, const Vector& v)> r;
    std::function<void(const Vector& i, const Vector& v, RealMatrix& dr_di, RealMatrix& dr_dv)> jac;
    // dep_i[k] lists the i entries r_k reads; same for dep_v. Empty means dense.
    std::vector<std::vector<std::size_t>> dep_i, dep_v;
};

// r = (complementary variable) - rho(control variable), row per edge.
ImplicitRelation implicit_from_mixed(const DissipatorForm& form);

class CircuitModel {
public:
    explicit CircuitModel(const CircuitSpec& spec);

    const CircuitSpec& spec() const { return spec_; }
    const CircuitGraph& graph() const { return graph_; }
    const StorageLaws& storage() const { return storage_; }
    const DissipatorForm& dissipators() const { return dissipators_; }
    StorageLaws& storage() { return storage_; }
    DissipatorForm& dissipators() { return dissipators_; }

    // Position of an edge within its kind group (capacitors, inductors,
    // dissipators); npos for other kinds.
    std::size_t cap_slot(std::size_t edge) const { return cap_slot_[edge]; }
    std::size_t ind_slot(std::size_t edge) const { return ind_slot_[edge]; }
    std::size_t dis_slot(std::size_t edge) const { return dis_slot_[edge]; }
    const std::vector<std::size_t>& capacitors() const { return caps_; }
    const std::vector<std::size_t>& inductors() const { return inds_; }

    // Source value and time derivative for V and I edges.
    double source(std::size_t edge, double t) const;
    double source_rate(std::size_t edge, double t) const;

    // True when every storage and dissipator law is linear (sources may be
    // arbitrary functions of t).
    bool is_linear() const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    CircuitSpec spec_;
    CircuitGraph graph_;
    StorageLaws storage_;
    DissipatorForm dissipators_;
    std::vector<std::size_t> caps_, inds_;
    std::vector<std::size_t> cap_slot_, ind_slot_, dis_slot_;
    std::vector<Expr> source_rate_;  // per edge; empty for constants and non-sources
};

struct PassivitySample {
    Vector q, phi, xhat;
};

struct PassivityReport {
    bool storage_C = true;   // Hessian of H_C PD at every sample
    bool storage_L = true;   // Hessian of H_L PD at every sample
    bool dissipator = true;  // rho' PD and (dr/di, dr/dv) PDMP at every sample
    std::vector<std::string> failures;
    bool ok() const { return storage_C && storage_L && dissipator; }
};

PassivityReport check_passivity(const CircuitModel& model, const std::vector<PassivitySample>& samples);

// Node identification (circuit a, node a, circuit b, node b); 1-based nodes.
struct NodeJoin {
    std::size_t circuit_a, node_a, circuit_b, node_b;
};

// Merges the circuits, renumbering vertices by first appearance. Edge order
// is the concatenation order; a name already taken gets "_<circuit index>".
CircuitSpec join(const std::vector<CircuitSpec>& circuits, const std::vector<NodeJoin>& ids);

}  // namespace cph

#endif
