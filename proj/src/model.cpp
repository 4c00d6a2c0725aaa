#include "cph/model.hpp"

#include "cph/error.hpp"
#include "union_find.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace cph {

namespace {

IntMatrix sub_block(const NormalTree& t, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    IntMatrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                t.F(static_cast<Eigen::Index>(t.row_of(rows[r])), static_cast<Eigen::Index>(t.col_of(cols[c])));
    return M;
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Coarse magnitude from a fixed composite rule keeps the relative target
    // meaningful when the first Simpson estimate happens to be near zero.
    double scale = 0.0;
    for (int k = 0; k <= 16; ++k) scale = std::max(scale, std::abs(f(a + (b - a) * k / 16.0)));
    const double tol = rel_tol * std::max(std::abs(whole), scale * std::abs(b - a) * 1e-3);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

ScalarLaw law_of(const ElementSpec& e) {
    if (!e.is_constant()) return ScalarLaw::expression(e.expression());
    const double k = e.constant();
    switch (e.kind) {
        case ElementKind::C:
        case ElementKind::L:
            if (k == 0.0) throw Error(ErrorCode::DomainError, e.name + ": zero capacitance or inductance");
            return ScalarLaw::linear(1.0 / k);
        default: return ScalarLaw::linear(k);
    }
}

}  // namespace

EdgeSplit split_edges(const NormalTree& tree, const std::vector<ElementKind>& kinds, bool require_normal) {
    if (require_normal && !tree.normal) throw Error(ErrorCode::NotNormal, "tree is not normal");
    EdgeSplit s;
    for (std::size_t e : tree.tree) {
        switch (kinds[e]) {
            case ElementKind::V: s.v.push_back(e); break;
            case ElementKind::C: s.c.push_back(e); break;
            case ElementKind::R:
            case ElementKind::G: s.d.push_back(e); break;
            case ElementKind::L: s.l.push_back(e); break;
            case ElementKind::I: throw Error(ErrorCode::NotNormal, "current source on the tree");
        }
    }
    for (std::size_t e : tree.cotree) {
        switch (kinds[e]) {
            case ElementKind::V: throw Error(ErrorCode::NotNormal, "voltage source off the tree");
            case ElementKind::C: s.C.push_back(e); break;
            case ElementKind::R:
            case ElementKind::G: s.D.push_back(e); break;
            case ElementKind::L: s.L.push_back(e); break;
            case ElementKind::I: s.I.push_back(e); break;
        }
    }
    return s;
}

BlockF block_f(const NormalTree& t, const EdgeSplit& s) {
    BlockF b;
    b.Cv = sub_block(t, s.C, s.v);
    b.Cc = sub_block(t, s.C, s.c);
    b.Cd = sub_block(t, s.C, s.d);
    b.Cl = sub_block(t, s.C, s.l);
    b.Dv = sub_block(t, s.D, s.v);
    b.Dc = sub_block(t, s.D, s.c);
    b.Dd = sub_block(t, s.D, s.d);
    b.Dl = sub_block(t, s.D, s.l);
    b.Lv = sub_block(t, s.L, s.v);
    b.Lc = sub_block(t, s.L, s.c);
    b.Ld = sub_block(t, s.L, s.d);
    b.Ll = sub_block(t, s.L, s.l);
    b.Iv = sub_block(t, s.I, s.v);
    b.Ic = sub_block(t, s.I, s.c);
    b.Id = sub_block(t, s.I, s.d);
    b.Il = sub_block(t, s.I, s.l);
    return b;
}

IntMatrix assemble_blocks(const BlockF& b) {
    const IntMatrix* grid[4][4] = {{&b.Cv, &b.Cc, &b.Cd, &b.Cl},
                                   {&b.Dv, &b.Dc, &b.Dd, &b.Dl},
                                   {&b.Lv, &b.Lc, &b.Ld, &b.Ll},
                                   {&b.Iv, &b.Ic, &b.Id, &b.Il}};
    Eigen::Index rows = 0, cols = 0;
    for (int r = 0; r < 4; ++r) rows += grid[r][0]->rows();
    for (int c = 0; c < 4; ++c) cols += grid[0][c]->cols();
    IntMatrix F(rows, cols);
    Eigen::Index r0 = 0;
    for (int r = 0; r < 4; ++r) {
        Eigen::Index c0 = 0;
        for (int c = 0; c < 4; ++c) {
            const IntMatrix& B = *grid[r][c];
            if (B.rows() != grid[r][0]->rows() || B.cols() != grid[0][c]->cols())
                throw Error(ErrorCode::DimensionMismatch, "inconsistent F block shapes");
            F.block(r0, c0, B.rows(), B.cols()) = B;
            c0 += B.cols();
        }
        r0 += grid[r][0]->rows();
    }
    return F;
}

IntMatrix class_ordered_f(const NormalTree& t, const EdgeSplit& s) {
    std::vector<std::size_t> rows, cols;
    for (const auto* v : {&s.C, &s.D, &s.L, &s.I}) rows.insert(rows.end(), v->begin(), v->end());
    for (const auto* v : {&s.v, &s.c, &s.d, &s.l}) cols.insert(cols.end(), v->begin(), v->end());
    return sub_block(t, rows, cols);
}

ScalarLaw ScalarLaw::linear(double slope) {
    ScalarLaw s;
    s.linear_ = true;
    s.slope_ = slope;
    return s;
}

ScalarLaw ScalarLaw::expression(Expr e) {
    ScalarLaw s;
    s.linear_ = false;
    s.dexpr_ = diff_expr(e);
    s.expr_ = std::move(e);
    return s;
}

double ScalarLaw::value(double x) const { return linear_ ? slope_ * x : expr_.eval(x); }

double ScalarLaw::slope(double x) const { return linear_ ? slope_ : dexpr_.eval(x); }

double ScalarLaw::integral(double x) const {
    if (linear_) return 0.5 * slope_ * x * x;
    return integrate_adaptive([this](double s) { return expr_.eval(s); }, 0.0, x, 1e-10);
}

StorageEval storage_eval(const StorageLaws& laws, const Vector& q, const Vector& phi) {
    StorageEval out;
    auto side = [](const std::vector<ScalarLaw>& scalar, const std::optional<VectorLaw>& coupled, const Vector& x,
                   Vector& g, RealMatrix& H) {
        if (coupled) {
            coupled->eval(x, g, H);
            if (g.size() != x.size() || H.rows() != x.size() || H.cols() != x.size())
                throw Error(ErrorCode::DimensionMismatch, "coupled storage law returned wrong sizes");
            return;
        }
        if (static_cast<std::size_t>(x.size()) != scalar.size())
            throw Error(ErrorCode::DimensionMismatch, "storage state has wrong length");
        g.resize(x.size());
        H = RealMatrix::Zero(x.size(), x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            g(k) = scalar[static_cast<std::size_t>(k)].value(x(k));
            H(k, k) = scalar[static_cast<std::size_t>(k)].slope(x(k));
        }
    };
    side(laws.cap, laws.cap_coupled, q, out.v_C, out.hess_C);
    side(laws.ind, laws.ind_coupled, phi, out.i_L, out.hess_L);
    return out;
}

double hamiltonian(const StorageLaws& laws, const Vector& q, const Vector& phi) {
    auto side = [](const std::vector<ScalarLaw>& scalar, const std::optional<VectorLaw>& coupled, const Vector& x) {
        if (coupled) {
            if (!coupled->potential)
                throw Error(ErrorCode::InvalidArgument, "coupled storage law has no potential");
            return coupled->potential(x);
        }
        if (static_cast<std::size_t>(x.size()) != scalar.size())
            throw Error(ErrorCode::DimensionMismatch, "storage state has wrong length");
        double h = 0.0;
        for (Eigen::Index k = 0; k < x.size(); ++k) h += scalar[static_cast<std::size_t>(k)].integral(x(k));
        return h;
    };
    return side(laws.cap, laws.cap_coupled, q) + side(laws.ind, laws.ind_coupled, phi);
}

DissipatorEval dissipator_eval(const DissipatorForm& form, const Vector& xhat) {
    const auto n = static_cast<Eigen::Index>(form.edges.size());
    if (xhat.size() != n) throw Error(ErrorCode::DimensionMismatch, "dissipator state has wrong length");
    Vector rho(n);
    DissipatorEval out;
    if (form.coupled) {
        form.coupled->eval(xhat, rho, out.jac);
        if (rho.size() != n || out.jac.rows() != n || out.jac.cols() != n)
            throw Error(ErrorCode::DimensionMismatch, "coupled dissipator law returned wrong sizes");
    } else {
        out.jac = RealMatrix::Zero(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            rho(k) = form.rho[static_cast<std::size_t>(k)].value(xhat(k));
            out.jac(k, k) = form.rho[static_cast<std::size_t>(k)].slope(xhat(k));
        }
    }
    out.i.resize(n);
    out.v.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (form.voltage_controlled[static_cast<std::size_t>(k)]) {
            out.v(k) = xhat(k);
            out.i(k) = rho(k);
        } else {
            out.i(k) = xhat(k);
            out.v(k) = rho(k);
        }
    }
    return out;
}

Vector flip_controls(const DissipatorForm& form, const Vector& stacked) {
    const auto n = static_cast<Eigen::Index>(form.edges.size());
    if (stacked.size() != 2 * n) throw Error(ErrorCode::DimensionMismatch, "stacked vector has wrong length");
    Vector out = stacked;
    for (Eigen::Index k = 0; k < n; ++k)
        if (form.voltage_controlled[static_cast<std::size_t>(k)]) std::swap(out(k), out(n + k));
    return out;
}

ImplicitRelation implicit_from_mixed(const DissipatorForm& form) {
    ImplicitRelation rel;
    rel.size = form.edges.size();
    const auto n = static_cast<Eigen::Index>(rel.size);
    auto controls = [form](const Vector& i, const Vector& v) {
        Vector x(i.size());
        for (Eigen::Index k = 0; k < i.size(); ++k) x(k) = form.voltage_controlled[static_cast<std::size_t>(k)] ? v(k) : i(k);
        return x;
    };
    rel.r = [form, controls, n](const Vector& i, const Vector& v) {
        if (i.size() != n || v.size() != n) throw Error(ErrorCode::DimensionMismatch, "relation arguments");
        const DissipatorEval e = dissipator_eval(form, controls(i, v));
        Vector r(n);
        for (Eigen::Index k = 0; k < n; ++k)
            r(k) = form.voltage_controlled[static_cast<std::size_t>(k)] ? i(k) - e.i(k) : v(k) - e.v(k);
        return r;
    };
    rel.jac = [form, controls, n](const Vector& i, const Vector& v, RealMatrix& di, RealMatrix& dv) {
        const DissipatorEval e = dissipator_eval(form, controls(i, v));
        di = RealMatrix::Zero(n, n);
        dv = RealMatrix::Zero(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const bool vk = form.voltage_controlled[static_cast<std::size_t>(k)];
            // complementary variable of edge k
            (vk ? di : dv)(k, k) += 1.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const bool vj = form.voltage_controlled[static_cast<std::size_t>(j)];
                (vj ? dv : di)(k, j) -= e.jac(k, j);
            }
        }
    };
    if (!form.coupled) {
        rel.dep_i.resize(rel.size);
        rel.dep_v.resize(rel.size);
        for (std::size_t k = 0; k < rel.size; ++k) {
            rel.dep_i[k] = {k};
            rel.dep_v[k] = {k};
        }
    }
    return rel;
}

CircuitModel::CircuitModel(const CircuitSpec& spec) : spec_(spec), graph_(CircuitGraph::from_spec(spec)) {
    const std::size_t b = spec.elements.size();
    cap_slot_.assign(b, npos);
    ind_slot_.assign(b, npos);
    dis_slot_.assign(b, npos);
    source_rate_.resize(b);
    for (std::size_t e = 0; e < b; ++e) {
        const ElementSpec& el = spec.elements[e];
        switch (el.kind) {
            case ElementKind::C:
                cap_slot_[e] = caps_.size();
                caps_.push_back(e);
                storage_.cap.push_back(law_of(el));
                break;
            case ElementKind::L:
                ind_slot_[e] = inds_.size();
                inds_.push_back(e);
                storage_.ind.push_back(law_of(el));
                break;
            case ElementKind::R:
            case ElementKind::G:
                dis_slot_[e] = dissipators_.edges.size();
                dissipators_.edges.push_back(e);
                dissipators_.voltage_controlled.push_back(el.kind == ElementKind::G);
                dissipators_.rho.push_back(law_of(el));
                break;
            case ElementKind::V:
            case ElementKind::I:
                if (!el.is_constant()) source_rate_[e] = diff_expr(el.expression());
                break;
        }
    }
}

double CircuitModel::source(std::size_t edge, double t) const {
    const ElementSpec& el = spec_.elements[edge];
    return el.is_constant() ? el.constant() : el.expression().eval(t);
}

double CircuitModel::source_rate(std::size_t edge, double t) const {
    return source_rate_[edge].empty() ? 0.0 : source_rate_[edge].eval(t);
}

bool CircuitModel::is_linear() const {
    if (storage_.cap_coupled || storage_.ind_coupled || dissipators_.coupled) return false;
    auto all_linear = [](const std::vector<ScalarLaw>& v) {
        return std::all_of(v.begin(), v.end(), [](const ScalarLaw& s) { return s.is_linear(); });
    };
    return all_linear(storage_.cap) && all_linear(storage_.ind) && all_linear(dissipators_.rho);
}

PassivityReport check_passivity(const CircuitModel& model, const std::vector<PassivitySample>& samples) {
    PassivityReport rep;
    const ImplicitRelation rel = implicit_from_mixed(model.dissipators());
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const PassivitySample& p = samples[s];
        const std::string at = " at sample " + std::to_string(s);
        try {
            const StorageEval st = storage_eval(model.storage(), p.q, p.phi);
            if (!is_pd(st.hess_C)) {
                rep.storage_C = false;
                rep.failures.push_back("capacitor Hessian not positive definite" + at);
            }
            if (!is_pd(st.hess_L)) {
                rep.storage_L = false;
                rep.failures.push_back("inductor Hessian not positive definite" + at);
            }
            const DissipatorEval d = dissipator_eval(model.dissipators(), p.xhat);
            RealMatrix di, dv;
            rel.jac(d.i, d.v, di, dv);
            if (!is_pd(d.jac) || !is_pdmp(di, dv)) {
                rep.dissipator = false;
                rep.failures.push_back("dissipator Jacobian pair not a positive definite matrix pair" + at);
            }
        } catch (const Error& e) {
            rep.storage_C = rep.storage_L = rep.dissipator = false;
            rep.failures.push_back(std::string(e.what()) + at);
        }
    }
    return rep;
}

CircuitSpec join(const std::vector<CircuitSpec>& circuits, const std::vector<NodeJoin>& ids) {
    std::vector<std::size_t> base(circuits.size() + 1, 0);
    for (std::size_t k = 0; k < circuits.size(); ++k) base[k + 1] = base[k] + circuits[k].vertex_count();
    auto global = [&](std::size_t c, std::size_t node) {
        if (c >= circuits.size() || node == 0 || node > circuits[c].vertex_count())
            throw Error(ErrorCode::InvalidArgument, "identification refers to a missing node");
        return base[c] + node - 1;
    };
    detail::UnionFind uf(base.back());
    for (const NodeJoin& j : ids) {
        const std::size_t a = global(j.circuit_a, j.node_a);
        const std::size_t b = global(j.circuit_b, j.node_b);
        if (a == b) throw Error(ErrorCode::InvalidArgument, "node identified with itself");
        uf.unite(a, b);
    }
    std::map<std::size_t, std::size_t> number;  // representative -> new 1-based id
    auto renumber = [&](std::size_t g) {
        const std::size_t root = uf.find(g);
        auto it = number.find(root);
        if (it == number.end()) it = number.emplace(root, number.size() + 1).first;
        return it->second;
    };
    CircuitSpec out;
    std::set<std::string> taken;
    for (std::size_t c = 0; c < circuits.size(); ++c) {
        for (const ElementSpec& e : circuits[c].elements) {
            ElementSpec m = e;
            m.from = renumber(global(c, e.from));
            m.to = renumber(global(c, e.to));
            if (taken.count(m.name)) m.name += "_" + std::to_string(c);
            if (!taken.insert(m.name).second)
                throw Error(ErrorCode::DuplicateName, "cannot make '" + e.name + "' unique");
            out.elements.push_back(std::move(m));
        }
    }
    validate(out);
    return out;
}

}  // namespace cph
