#include "cph/dae.hpp"

#include "cph/error.hpp"

#include <algorithm>
#include <set>

namespace cph {

namespace {

constexpr std::size_t npos = CircuitModel::npos;

using DerivList = std::vector<std::pair<Occurrence, double>>;

}  // namespace

std::size_t VarLayout::count(VarRole r) const {
    return static_cast<std::size_t>(std::count(roles.begin(), roles.end(), r));
}

std::size_t VarLayout::first(VarRole r) const {
    const auto it = std::find(roles.begin(), roles.end(), r);
    return static_cast<std::size_t>(it - roles.begin());
}

struct CpHSystem::EdgeEval {
    Vector i, v;
    std::vector<DerivList> di, dv;
    std::vector<double> i_t, v_t;
};

void CpHSystem::check_lengths(const Vector& x, const Vector& xd) const {
    if (static_cast<std::size_t>(x.size()) != size() || static_cast<std::size_t>(xd.size()) != size())
        throw Error(ErrorCode::DimensionMismatch, "state has length " + std::to_string(x.size()) + "/" +
                                                      std::to_string(xd.size()) + ", system size " +
                                                      std::to_string(size()));
}

CpHSystem::EdgeEval CpHSystem::evaluate(double t, const Vector& x, const Vector& xd, bool want) const {
    const CircuitModel& m = *model_;
    const std::size_t b = m.graph().b();
    EdgeEval ev;
    ev.i = Vector::Zero(static_cast<Eigen::Index>(b));
    ev.v = Vector::Zero(static_cast<Eigen::Index>(b));
    if (want) {
        ev.di.resize(b);
        ev.dv.resize(b);
        ev.i_t.assign(b, 0.0);
        ev.v_t.assign(b, 0.0);
    }

    Vector q, phi, qd, phid;
    storage_state(x, xd, q, phi, qd, phid);
    const StorageEval st = storage_eval(m.storage(), q, phi);
    const auto& caps = m.capacitors();
    const auto& inds = m.inductors();
    for (std::size_t s = 0; s < caps.size(); ++s) {
        const std::size_t e = caps[s];
        const auto k = static_cast<Eigen::Index>(s);
        ev.i(static_cast<Eigen::Index>(e)) = qd(k);
        ev.v(static_cast<Eigen::Index>(e)) = st.v_C(k);
        if (want) {
            ev.di[e].push_back({{var_q_[e], 1}, 1.0});
            for (std::size_t s2 = 0; s2 < caps.size(); ++s2)
                if (m.storage().cap_coupled || s2 == s)
                    ev.dv[e].push_back({{var_q_[caps[s2]], 0}, st.hess_C(k, static_cast<Eigen::Index>(s2))});
        }
    }
    for (std::size_t s = 0; s < inds.size(); ++s) {
        const std::size_t e = inds[s];
        const auto k = static_cast<Eigen::Index>(s);
        ev.v(static_cast<Eigen::Index>(e)) = phid(k);
        ev.i(static_cast<Eigen::Index>(e)) = st.i_L(k);
        if (want) {
            ev.dv[e].push_back({{var_phi_[e], 1}, 1.0});
            for (std::size_t s2 = 0; s2 < inds.size(); ++s2)
                if (m.storage().ind_coupled || s2 == s)
                    ev.di[e].push_back({{var_phi_[inds[s2]], 0}, st.hess_L(k, static_cast<Eigen::Index>(s2))});
        }
    }

    const DissipatorForm& form = m.dissipators();
    const std::size_t nd = form.edges.size();
    if (kind_ == ModelKind::Model2) {
        Vector xhat(static_cast<Eigen::Index>(nd));
        for (std::size_t s = 0; s < nd; ++s) xhat(static_cast<Eigen::Index>(s)) = x(static_cast<Eigen::Index>(var_x_[form.edges[s]]));
        const DissipatorEval de = dissipator_eval(form, xhat);
        for (std::size_t s = 0; s < nd; ++s) {
            const std::size_t e = form.edges[s];
            const auto k = static_cast<Eigen::Index>(s);
            ev.i(static_cast<Eigen::Index>(e)) = de.i(k);
            ev.v(static_cast<Eigen::Index>(e)) = de.v(k);
            if (want) {
                const bool vc = form.voltage_controlled[s];
                (vc ? ev.dv : ev.di)[e].push_back({{var_x_[e], 0}, 1.0});
                for (std::size_t s2 = 0; s2 < nd; ++s2)
                    if (form.coupled || s2 == s)
                        (vc ? ev.di : ev.dv)[e].push_back({{var_x_[form.edges[s2]], 0}, de.jac(k, static_cast<Eigen::Index>(s2))});
            }
        }
    } else {
        for (std::size_t e : form.edges) {
            ev.i(static_cast<Eigen::Index>(e)) = x(static_cast<Eigen::Index>(var_i_[e]));
            ev.v(static_cast<Eigen::Index>(e)) = x(static_cast<Eigen::Index>(var_v_[e]));
            if (want) {
                ev.di[e].push_back({{var_i_[e], 0}, 1.0});
                ev.dv[e].push_back({{var_v_[e], 0}, 1.0});
            }
        }
    }

    for (std::size_t e = 0; e < b; ++e) {
        const ElementKind k = m.graph().edge(e).kind;
        if (k == ElementKind::V) {
            ev.v(static_cast<Eigen::Index>(e)) = m.source(e, t);
            if (want) ev.v_t[e] = m.source_rate(e, t);
        } else if (k == ElementKind::I) {
            ev.i(static_cast<Eigen::Index>(e)) = m.source(e, t);
            if (want) ev.i_t[e] = m.source_rate(e, t);
        }
    }
    return ev;
}

void CpHSystem::storage_state(const Vector& x, const Vector& xd, Vector& q, Vector& phi, Vector& qd,
                              Vector& phid) const {
    const auto& caps = model_->capacitors();
    const auto& inds = model_->inductors();
    q.resize(static_cast<Eigen::Index>(caps.size()));
    qd.resize(q.size());
    phi.resize(static_cast<Eigen::Index>(inds.size()));
    phid.resize(phi.size());
    for (std::size_t s = 0; s < caps.size(); ++s) {
        q(static_cast<Eigen::Index>(s)) = x(static_cast<Eigen::Index>(var_q_[caps[s]]));
        qd(static_cast<Eigen::Index>(s)) = xd(static_cast<Eigen::Index>(var_q_[caps[s]]));
    }
    for (std::size_t s = 0; s < inds.size(); ++s) {
        phi(static_cast<Eigen::Index>(s)) = x(static_cast<Eigen::Index>(var_phi_[inds[s]]));
        phid(static_cast<Eigen::Index>(s)) = xd(static_cast<Eigen::Index>(var_phi_[inds[s]]));
    }
}

Vector CpHSystem::residual(double t, const Vector& x, const Vector& xd) const {
    check_lengths(x, xd);
    const EdgeEval ev = evaluate(t, x, xd, false);
    Vector f(static_cast<Eigen::Index>(size()));
    for (std::size_t r = 0; r < terms_.size(); ++r) {
        double acc = 0.0;
        for (const Term& term : terms_[r])
            acc += term.coef * (term.current ? ev.i : ev.v)(static_cast<Eigen::Index>(term.edge));
        f(static_cast<Eigen::Index>(r)) = acc;
    }
    if (relation_) {
        const auto& edges = model_->dissipators().edges;
        Vector i(static_cast<Eigen::Index>(edges.size())), v(i.size());
        for (std::size_t s = 0; s < edges.size(); ++s) {
            i(static_cast<Eigen::Index>(s)) = ev.i(static_cast<Eigen::Index>(edges[s]));
            v(static_cast<Eigen::Index>(s)) = ev.v(static_cast<Eigen::Index>(edges[s]));
        }
        const Vector r = relation_->r(i, v);
        if (static_cast<std::size_t>(r.size()) != relation_->size)
            throw Error(ErrorCode::DimensionMismatch, "relation returned wrong length");
        f.tail(r.size()) = r;
    }
    require_finite(f, "residual");
    return f;
}

void CpHSystem::jacobians(double t, const Vector& x, const Vector& xd, RealMatrix& dfdx, RealMatrix& dfdxd) const {
    check_lengths(x, xd);
    const EdgeEval ev = evaluate(t, x, xd, true);
    const auto n = static_cast<Eigen::Index>(size());
    dfdx = RealMatrix::Zero(n, n);
    dfdxd = RealMatrix::Zero(n, n);
    for (std::size_t r = 0; r < terms_.size(); ++r) {
        for (const Term& term : terms_[r]) {
            for (const auto& [occ, c] : (term.current ? ev.di : ev.dv)[term.edge])
                (occ.order == 0 ? dfdx : dfdxd)(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(occ.var)) +=
                    term.coef * c;
        }
    }
    if (relation_) {
        const auto& edges = model_->dissipators().edges;
        Vector i(static_cast<Eigen::Index>(edges.size())), v(i.size());
        for (std::size_t s = 0; s < edges.size(); ++s) {
            i(static_cast<Eigen::Index>(s)) = ev.i(static_cast<Eigen::Index>(edges[s]));
            v(static_cast<Eigen::Index>(s)) = ev.v(static_cast<Eigen::Index>(edges[s]));
        }
        RealMatrix di, dv;
        relation_->jac(i, v, di, dv);
        const Eigen::Index r0 = n - static_cast<Eigen::Index>(relation_->size);
        for (std::size_t k = 0; k < relation_->size; ++k)
            for (std::size_t s = 0; s < edges.size(); ++s) {
                const auto kk = static_cast<Eigen::Index>(k);
                const auto ss = static_cast<Eigen::Index>(s);
                dfdx(r0 + kk, static_cast<Eigen::Index>(var_i_[edges[s]])) += di(kk, ss);
                dfdx(r0 + kk, static_cast<Eigen::Index>(var_v_[edges[s]])) += dv(kk, ss);
            }
    }
    require_finite(dfdx, "residual Jacobian");
    require_finite(dfdxd, "residual Jacobian");
}

Vector CpHSystem::dfdt(double t, const Vector& x, const Vector& xd) const {
    check_lengths(x, xd);
    const EdgeEval ev = evaluate(t, x, xd, true);
    Vector g = Vector::Zero(static_cast<Eigen::Index>(size()));
    for (std::size_t r = 0; r < terms_.size(); ++r)
        for (const Term& term : terms_[r])
            g(static_cast<Eigen::Index>(r)) += term.coef * (term.current ? ev.i_t : ev.v_t)[term.edge];
    return g;
}

Vector CpHSystem::output(double t, const Vector& x, const Vector& xd) const {
    check_lengths(x, xd);
    const EdgeEval ev = evaluate(t, x, xd, false);
    Vector y(static_cast<Eigen::Index>(out_terms_.size()));
    for (std::size_t r = 0; r < out_terms_.size(); ++r) {
        double acc = 0.0;
        for (const Term& term : out_terms_[r])
            acc += term.coef * (term.current ? ev.i : ev.v)(static_cast<Eigen::Index>(term.edge));
        y(static_cast<Eigen::Index>(r)) = acc;
    }
    return y;
}

EdgeValues CpHSystem::edge_values(double t, const Vector& x, const Vector& xd) const {
    check_lengths(x, xd);
    EdgeEval ev = evaluate(t, x, xd, false);
    const Vector y = output(t, x, xd);
    std::size_t k = 0;
    for (std::size_t e : split_.v) ev.i(static_cast<Eigen::Index>(e)) = y(static_cast<Eigen::Index>(k++));
    for (std::size_t e : split_.I) ev.v(static_cast<Eigen::Index>(e)) = y(static_cast<Eigen::Index>(k++));
    return {std::move(ev.i), std::move(ev.v)};
}

CpHSystem build_system(std::shared_ptr<const CircuitModel> model, const NormalTree& tree, ModelKind kind,
                       std::optional<ImplicitRelation> relation, const BuildOptions& opts) {
    const CircuitModel& m = *model;
    const CircuitGraph& g = m.graph();
    const std::size_t b = g.b();

    CpHSystem sys;
    sys.kind_ = kind;
    sys.model_ = model;
    sys.tree_ = tree;
    sys.split_ = split_edges(tree, g.kinds(), opts.require_normal);
    const EdgeSplit& s = sys.split_;
    sys.var_q_.assign(b, npos);
    sys.var_phi_.assign(b, npos);
    sys.var_x_.assign(b, npos);
    sys.var_i_.assign(b, npos);
    sys.var_v_.assign(b, npos);

    if (kind == ModelKind::Model1) {
        if (!relation) relation = implicit_from_mixed(m.dissipators());
        if (relation->size != s.d.size() + s.D.size())
            throw Error(ErrorCode::DimensionMismatch, "dissipator relation has " + std::to_string(relation->size) +
                                                          " rows, circuit has " +
                                                          std::to_string(s.d.size() + s.D.size()) + " dissipators");
        sys.relation_ = std::move(relation);
    } else if (relation) {
        throw Error(ErrorCode::InvalidArgument, "an implicit relation applies to Model 1 only");
    }

    VarLayout& lay = sys.layout_;
    auto add_var = [&](std::size_t e, VarRole role, const std::string& prefix, std::vector<std::size_t>& slot) {
        slot[e] = lay.size();
        lay.names.push_back(prefix + g.name(e));
        lay.roles.push_back(role);
        lay.edges.push_back(e);
    };
    for (std::size_t e : s.C) add_var(e, VarRole::qC, "q_", sys.var_q_);
    for (std::size_t e : s.c) add_var(e, VarRole::qc, "q_", sys.var_q_);
    for (std::size_t e : s.l) add_var(e, VarRole::phil, "phi_", sys.var_phi_);
    for (std::size_t e : s.L) add_var(e, VarRole::phiL, "phi_", sys.var_phi_);
    if (kind == ModelKind::Model2) {
        for (const auto* set : {&s.d, &s.D})
            for (std::size_t e : *set)
                add_var(e, VarRole::xhat, g.edge(e).kind == ElementKind::G ? "v_" : "i_", sys.var_x_);
    } else {
        for (std::size_t e : s.d) add_var(e, VarRole::id, "i_", sys.var_i_);
        for (std::size_t e : s.D) add_var(e, VarRole::vD, "v_", sys.var_v_);
        for (std::size_t e : s.d) add_var(e, VarRole::vd, "v_", sys.var_v_);
        for (std::size_t e : s.D) add_var(e, VarRole::iD, "i_", sys.var_i_);
    }

    const IntMatrix& F = tree.F;
    auto link_row = [&](std::size_t link) {
        std::vector<CpHSystem::Term> terms{{link, 1.0, false}};
        const auto r = static_cast<Eigen::Index>(tree.row_of(link));
        for (std::size_t c = 0; c < tree.tree.size(); ++c)
            if (F(r, static_cast<Eigen::Index>(c)) != 0)
                terms.push_back({tree.tree[c], static_cast<double>(F(r, static_cast<Eigen::Index>(c))), false});
        return terms;
    };
    auto twig_row = [&](std::size_t twig) {
        std::vector<CpHSystem::Term> terms{{twig, 1.0, true}};
        const auto c = static_cast<Eigen::Index>(tree.col_of(twig));
        for (std::size_t r = 0; r < tree.cotree.size(); ++r)
            if (F(static_cast<Eigen::Index>(r), c) != 0)
                terms.push_back({tree.cotree[r], -static_cast<double>(F(static_cast<Eigen::Index>(r), c)), true});
        return terms;
    };
    auto add_row = [&](RowClass cls, std::size_t e, std::vector<CpHSystem::Term> terms) {
        sys.rows_.push_back({cls, e, "f_" + g.name(e)});
        sys.terms_.push_back(std::move(terms));
    };
    for (std::size_t e : s.C) add_row(RowClass::C, e, link_row(e));
    for (std::size_t e : s.c) add_row(RowClass::c, e, twig_row(e));
    for (std::size_t e : s.l) add_row(RowClass::l, e, twig_row(e));
    for (std::size_t e : s.L) add_row(RowClass::L, e, link_row(e));
    for (std::size_t e : s.d) add_row(RowClass::d, e, twig_row(e));
    for (std::size_t e : s.D) add_row(RowClass::D, e, link_row(e));
    if (sys.relation_)
        for (std::size_t k = 0; k < sys.relation_->size; ++k)
            sys.rows_.push_back({RowClass::R, k, "r_" + std::to_string(k + 1)});

    for (std::size_t e : s.v) {
        std::vector<CpHSystem::Term> terms;
        const auto c = static_cast<Eigen::Index>(tree.col_of(e));
        for (std::size_t r = 0; r < tree.cotree.size(); ++r)
            if (F(static_cast<Eigen::Index>(r), c) != 0)
                terms.push_back({tree.cotree[r], static_cast<double>(F(static_cast<Eigen::Index>(r), c)), true});
        sys.out_terms_.push_back(std::move(terms));
        sys.output_names_.push_back("i_" + g.name(e));
    }
    for (std::size_t e : s.I) {
        std::vector<CpHSystem::Term> terms;
        const auto r = static_cast<Eigen::Index>(tree.row_of(e));
        for (std::size_t c = 0; c < tree.tree.size(); ++c)
            if (F(r, static_cast<Eigen::Index>(c)) != 0)
                terms.push_back({tree.tree[c], -static_cast<double>(F(r, static_cast<Eigen::Index>(c))), false});
        sys.out_terms_.push_back(std::move(terms));
        sys.output_names_.push_back("v_" + g.name(e));
    }

    // Structural dependencies of each branch quantity, mirroring evaluate().
    std::vector<std::set<Occurrence>> dep_i(b), dep_v(b);
    const auto& caps = m.capacitors();
    const auto& inds = m.inductors();
    for (std::size_t e : caps) {
        dep_i[e].insert({sys.var_q_[e], 1});
        if (m.storage().cap_coupled)
            for (std::size_t e2 : caps) dep_v[e].insert({sys.var_q_[e2], 0});
        else
            dep_v[e].insert({sys.var_q_[e], 0});
    }
    for (std::size_t e : inds) {
        dep_v[e].insert({sys.var_phi_[e], 1});
        if (m.storage().ind_coupled)
            for (std::size_t e2 : inds) dep_i[e].insert({sys.var_phi_[e2], 0});
        else
            dep_i[e].insert({sys.var_phi_[e], 0});
    }
    const DissipatorForm& form = m.dissipators();
    for (std::size_t k = 0; k < form.edges.size(); ++k) {
        const std::size_t e = form.edges[k];
        if (kind == ModelKind::Model2) {
            auto& control = form.voltage_controlled[k] ? dep_v[e] : dep_i[e];
            auto& other = form.voltage_controlled[k] ? dep_i[e] : dep_v[e];
            control.insert({sys.var_x_[e], 0});
            if (form.coupled)
                for (std::size_t e2 : form.edges) other.insert({sys.var_x_[e2], 0});
            else
                other.insert({sys.var_x_[e], 0});
        } else {
            dep_i[e].insert({sys.var_i_[e], 0});
            dep_v[e].insert({sys.var_v_[e], 0});
        }
    }
    for (const auto& terms : sys.terms_) {
        std::set<Occurrence> row;
        for (const auto& term : terms) {
            const auto& d = term.current ? dep_i[term.edge] : dep_v[term.edge];
            row.insert(d.begin(), d.end());
        }
        sys.pattern_.emplace_back(row.begin(), row.end());
    }
    if (sys.relation_) {
        const ImplicitRelation& rel = *sys.relation_;
        for (std::size_t k = 0; k < rel.size; ++k) {
            std::set<Occurrence> row;
            const bool dense_i = rel.dep_i.empty();
            const bool dense_v = rel.dep_v.empty();
            for (std::size_t s2 = 0; s2 < form.edges.size(); ++s2) {
                const std::size_t e = form.edges[s2];
                if (dense_i || std::count(rel.dep_i[k].begin(), rel.dep_i[k].end(), s2))
                    row.insert({sys.var_i_[e], 0});
                if (dense_v || std::count(rel.dep_v[k].begin(), rel.dep_v[k].end(), s2))
                    row.insert({sys.var_v_[e], 0});
            }
            sys.pattern_.emplace_back(row.begin(), row.end());
        }
    }
    return sys;
}

CpHSystem build_model2(std::shared_ptr<const CircuitModel> model, const NormalTree& tree, const BuildOptions& opts) {
    return build_system(std::move(model), tree, ModelKind::Model2, std::nullopt, opts);
}

CpHSystem build_model1(std::shared_ptr<const CircuitModel> model, const NormalTree& tree,
                       std::optional<ImplicitRelation> relation, const BuildOptions& opts) {
    return build_system(std::move(model), tree, ModelKind::Model1, std::move(relation), opts);
}

double port_power(const CpHSystem& sys, const EdgeValues& ev) {
    double p = 0.0;
    for (const auto* set : {&sys.split().v, &sys.split().I})
        for (std::size_t e : *set) p -= ev.i(static_cast<Eigen::Index>(e)) * ev.v(static_cast<Eigen::Index>(e));
    return p;
}

double dissipated_power(const CpHSystem& sys, const EdgeValues& ev) {
    double p = 0.0;
    for (std::size_t e : sys.model().dissipators().edges)
        p += ev.i(static_cast<Eigen::Index>(e)) * ev.v(static_cast<Eigen::Index>(e));
    return p;
}

}  // namespace cph
