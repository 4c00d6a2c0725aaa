#ifndef CPH_DAE_HPP
#define CPH_DAE_HPP

#include "cph/graph.hpp"
#include "cph/linalg.hpp"
#include "cph/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cph {

enum class ModelKind { Model1 = 1, Model2 = 2 };

// Row classes in assembly order; R holds the implicit dissipator relation.
enum class RowClass { C, c, l, L, d, D, R };

enum class VarRole { qC, qc, phil, phiL, xhat, id, vD, vd, iD };

struct VarLayout {
    std::vector<std::string> names;
    std::vector<VarRole> roles;
    std::vector<std::size_t> edges;  // edge behind each variable

    std::size_t size() const { return names.size(); }
    std::size_t count(VarRole r) const;
    // First variable index with this role (size() if none).
    std::size_t first(VarRole r) const;
};

struct RowInfo {
    RowClass cls;
    std::size_t edge;  // defining edge, or relation row index for R rows
    std::string name;
};

// (variable, derivative order) pair read by a residual row.
struct Occurrence {
    std::size_t var;
    int order;
    bool operator==(const Occurrence&) const = default;
    auto operator<=>(const Occurrence&) const = default;
};

// Full branch quantities, edge indexed.
struct EdgeValues {
    Vector i, v;
};

struct BuildOptions {
    // When false, any spanning tree with voltage sources on it and current
    // sources off it is accepted. Such systems need not be amenable.
    bool require_normal = true;
};

class CpHSystem {
public:
    ModelKind kind() const { return kind_; }
    const CircuitModel& model() const { return *model_; }
    const NormalTree& tree() const { return tree_; }
    const EdgeSplit& split() const { return split_; }
    const VarLayout& layout() const { return layout_; }
    const std::vector<RowInfo>& rows() const { return rows_; }
    std::size_t size() const { return layout_.size(); }

    // Sorted, duplicate free; exact record of what residual() reads.
    const std::vector<std::vector<Occurrence>>& pattern() const { return pattern_; }

    Vector residual(double t, const Vector& x, const Vector& xd) const;
    // Partial derivatives of the residual with respect to x, xd and t.
    void jacobians(double t, const Vector& x, const Vector& xd, RealMatrix& dfdx, RealMatrix& dfdxd) const;
    Vector dfdt(double t, const Vector& x, const Vector& xd) const;

    // y = (currents of voltage sources; voltages of current sources).
    Vector output(double t, const Vector& x, const Vector& xd) const;
    const std::vector<std::string>& output_names() const { return output_names_; }

    // Every branch current and voltage, source complements from output().
    EdgeValues edge_values(double t, const Vector& x, const Vector& xd) const;

    // Storage state (q over all capacitors, phi over all inductors, slot
    // order) and its rate, gathered from x and xd.
    void storage_state(const Vector& x, const Vector& xd, Vector& q, Vector& phi, Vector& qd, Vector& phid) const;

private:
    friend CpHSystem build_system(std::shared_ptr<const CircuitModel>, const NormalTree&, ModelKind,
                                  std::optional<ImplicitRelation>, const BuildOptions&);

    struct Term {
        std::size_t edge;
        double coef;
        bool current;
    };
    struct EdgeEval;
    EdgeEval evaluate(double t, const Vector& x, const Vector& xd, bool want_derivatives) const;
    void check_lengths(const Vector& x, const Vector& xd) const;

    ModelKind kind_ = ModelKind::Model2;
    std::shared_ptr<const CircuitModel> model_;
    NormalTree tree_;
    EdgeSplit split_;
    VarLayout layout_;
    std::vector<RowInfo> rows_;
    std::vector<std::vector<Term>> terms_;  // Kirchhoff rows
    std::vector<std::vector<Term>> out_terms_;
    std::vector<std::string> output_names_;
    std::optional<ImplicitRelation> relation_;
    std::vector<std::vector<Occurrence>> pattern_;
    // Per edge: variable index of its own state (q, phi, xhat, or the Model 1
    // current and voltage variables); npos if none.
    std::vector<std::size_t> var_q_, var_phi_, var_x_, var_i_, var_v_;
};

CpHSystem build_system(std::shared_ptr<const CircuitModel> model, const NormalTree& tree, ModelKind kind,
                       std::optional<ImplicitRelation> relation, const BuildOptions& opts = {});

CpHSystem build_model2(std::shared_ptr<const CircuitModel> model, const NormalTree& tree,
                       const BuildOptions& opts = {});
// relation defaults to the one implied by the mixed dissipator form.
CpHSystem build_model1(std::shared_ptr<const CircuitModel> model, const NormalTree& tree,
                       std::optional<ImplicitRelation> relation = std::nullopt, const BuildOptions& opts = {});

inline Vector residual(const CpHSystem& sys, double t, const Vector& x, const Vector& xd) {
    return sys.residual(t, x, xd);
}
inline Vector output(const CpHSystem& sys, double t, const Vector& x, const Vector& xd) {
    return sys.output(t, x, xd);
}

// Port power delivered to the circuit by its sources, -(i_V.v_V + i_I.v_I)
// under associated reference directions.
double port_power(const CpHSystem& sys, const EdgeValues& ev);
// i_D . v_D over dissipative edges.
double dissipated_power(const CpHSystem& sys, const EdgeValues& ev);

}  // namespace cph

#endif
