#include "cph/solver.hpp"

#include "cph/error.hpp"
#include "cph/sigma.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace cph {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t k) { return static_cast<Index>(k); }

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool derivative_free(RowClass c) { return c != RowClass::c && c != RowClass::L; }

Vector gather(const Vector& v, const std::vector<std::size_t>& ids) {
    Vector out(idx(ids.size()));
    for (std::size_t k = 0; k < ids.size(); ++k) out(idx(k)) = v(idx(ids[k]));
    return out;
}

RealMatrix gather(const RealMatrix& M, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    RealMatrix out(idx(rows.size()), idx(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(idx(i), idx(j)) = M(idx(rows[i]), idx(cols[j]));
    return out;
}

void scatter(Vector& v, const std::vector<std::size_t>& ids, const Vector& vals) {
    for (std::size_t k = 0; k < ids.size(); ++k) v(idx(ids[k])) = vals(idx(k));
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& ids) {
    std::vector<bool> in(n, false);
    for (std::size_t k : ids) in[k] = true;
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k)
        if (!in[k]) out.push_back(k);
    return out;
}

// Damped Newton on F(y) = 0 with analytic Jacobian. Backtracks while the
// residual grows; a singular Jacobian raises `singular_code`.
int newton(const std::function<Vector(const Vector&)>& F, const std::function<RealMatrix(const Vector&)>& J,
           Vector& y, const NewtonOptions& opts, ErrorCode singular_code, const char* what) {
    if (y.size() == 0) return 0;
    Vector f = F(y);
    double fn = inf_norm(f);
    std::ostringstream trace;
    for (int it = 1; it <= opts.max_iter; ++it) {
        if (fn == 0.0) return it - 1;
        Vector dy;
        try {
            dy = LuFactor(J(y)).solve(f);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Singular) throw;
            throw Error(singular_code, std::string(what) + ": singular Jacobian at iteration " + std::to_string(it));
        }
        if (!all_finite(dy)) throw Error(ErrorCode::NewtonDiverged, std::string(what) + ": non-finite Newton step");
        const double full = inf_norm(dy);
        double lambda = 1.0;
        Vector y_try = y - dy;
        Vector f_try = F(y_try);
        while (!(all_finite(f_try) && inf_norm(f_try) <= fn) && lambda > 0x1.0p-10) {
            lambda *= 0.5;
            y_try = y - lambda * dy;
            f_try = F(y_try);
        }
        y = std::move(y_try);
        f = std::move(f_try);
        fn = inf_norm(f);
        trace << " [" << it << ": |dx|=" << lambda * full << " |f|=" << fn << "]";
        if (!all_finite(f)) break;
        // A full step this small means the iterate sits at the rounding floor,
        // where backtracking cannot make progress anyway.
        if (full <= opts.tol * (1.0 + inf_norm(y))) return it;
    }
    throw Error(ErrorCode::NewtonDiverged, std::string(what) + ": no convergence;" + trace.str());
}

// Solves the listed rows for the listed unknowns, everything else held.
int solve_rows(const CpHSystem& sys, double t, Vector& x, const Vector& xd, const std::vector<std::size_t>& rows,
               const std::vector<std::size_t>& unknowns, const NewtonOptions& opts, ErrorCode singular_code,
               const char* what) {
    if (rows.size() != unknowns.size())
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": " + std::to_string(rows.size()) +
                                                      " equations for " + std::to_string(unknowns.size()) +
                                                      " unknowns");
    Vector y = gather(x, unknowns);
    auto full = [&](const Vector& yy) {
        Vector xx = x;
        scatter(xx, unknowns, yy);
        return xx;
    };
    auto F = [&](const Vector& yy) { return gather(sys.residual(t, full(yy), xd), rows); };
    auto J = [&](const Vector& yy) {
        RealMatrix dfdx, dfdxd;
        sys.jacobians(t, full(yy), xd, dfdx, dfdxd);
        return gather(dfdx, rows, unknowns);
    };
    const int iters = newton(F, J, y, opts, singular_code, what);
    scatter(x, unknowns, y);
    return iters;
}

// Solves f(t, x, a*(x - base) + c) = 0 for x, starting from x. Forming
// the rate from the difference keeps its rounding relative to the rate
// itself rather than to x/h.
int solve_implicit(const CpHSystem& sys, double t, Vector& x, double a, const Vector& base, const Vector& c,
                   const NewtonOptions& opts) {
    auto F = [&](const Vector& y) { return sys.residual(t, y, a * (y - base) + c); };
    auto J = [&](const Vector& y) {
        RealMatrix dfdx, dfdxd;
        sys.jacobians(t, y, a * (y - base) + c, dfdx, dfdxd);
        return RealMatrix(dfdx + a * dfdxd);
    };
    return newton(F, J, x, opts, ErrorCode::NewtonDiverged, "implicit step");
}

// Stage-0 solve: the derivative-free rows differentiated once, the others
// as they stand. The residual is affine in xd, so a second pass only mops up
// rounding.
Vector stage0_rate(const CpHSystem& sys, double t, const Vector& x) {
    const auto n = idx(sys.size());
    Vector xd = Vector::Zero(n);
    for (int pass = 0; pass < 2; ++pass) {
        RealMatrix dfdx, dfdxd;
        sys.jacobians(t, x, xd, dfdx, dfdxd);
        const Vector f = sys.residual(t, x, xd);
        const Vector ft = sys.dfdt(t, x, xd);
        RealMatrix M(n, n);
        Vector rhs(n);
        for (Index i = 0; i < n; ++i) {
            if (derivative_free(sys.rows()[static_cast<std::size_t>(i)].cls)) {
                M.row(i) = dfdx.row(i);
                rhs(i) = -ft(i) - dfdx.row(i).dot(xd);
            } else {
                M.row(i) = dfdxd.row(i);
                rhs(i) = -f(i);
            }
        }
        try {
            xd += LuFactor(M).solve(rhs);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Singular) throw;
            throw Error(ErrorCode::SingularSubJacobian, "stage-0 system singular; the system is not amenable here");
        }
    }
    return xd;
}

std::vector<std::size_t> rows_where(const CpHSystem& sys, const std::function<bool(RowClass)>& pred) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < sys.size(); ++i)
        if (pred(sys.rows()[i].cls)) out.push_back(i);
    return out;
}

std::vector<std::size_t> vars_where(const CpHSystem& sys, std::initializer_list<VarRole> roles) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < sys.size(); ++j)
        if (std::find(roles.begin(), roles.end(), sys.layout().roles[j]) != roles.end()) out.push_back(j);
    return out;
}

}  // namespace

std::vector<std::size_t> default_fixed_choice(const CpHSystem& sys) {
    return vars_where(sys, {VarRole::qc, VarRole::phiL});
}

std::vector<std::size_t> hvt_fixed_choice(const CpHSystem& sys) {
    const Transversal t = hvt(signature_matrix(sys));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < sys.size(); ++i)
        if (!derivative_free(sys.rows()[i].cls)) out.push_back(t.col_of_row[i]);
    std::sort(out.begin(), out.end());
    return out;
}

ConsistentPoint consistent_point(const CpHSystem& sys, double t0, const Vector& guess,
                                 std::optional<std::vector<std::size_t>> fixed, const NewtonOptions& newton) {
    if (guess.size() != idx(sys.size()))
        throw Error(ErrorCode::DimensionMismatch, "initial guess has " + std::to_string(guess.size()) +
                                                      " entries, system has " + std::to_string(sys.size()));
    const std::vector<std::size_t> rows = rows_where(sys, derivative_free);
    auto attempt = [&](const std::vector<std::size_t>& fix) {
        for (std::size_t k : fix)
            if (k >= sys.size()) throw Error(ErrorCode::InvalidArgument, "fixed variable index out of range");
        ConsistentPoint cp;
        cp.t0 = t0;
        cp.fixed = fix;
        cp.x0 = guess;
        cp.newton_iterations = solve_rows(sys, t0, cp.x0, Vector::Zero(guess.size()), rows,
                                          complement(sys.size(), fix), newton, ErrorCode::SingularSubJacobian,
                                          "consistent initialization");
        cp.xd0 = stage0_rate(sys, t0, cp.x0);
        cp.residual_norm = inf_norm(sys.residual(t0, cp.x0, cp.xd0));
        return cp;
    };
    if (fixed) return attempt(*fixed);
    try {
        return attempt(default_fixed_choice(sys));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularSubJacobian) throw;
    }
    return attempt(hvt_fixed_choice(sys));
}

DerivativeEstimate estimate_derivative(const CpHSystem& sys, const ConsistentPoint& cp, double h,
                                       const NewtonOptions& newton) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "derivative step must be positive");
    auto central = [&](double hh) {
        // forward: xd(t0+h) = (x - x0)/h; backward: xd(t0-h) = (x0 - x)/h
        const Vector zero = Vector::Zero(cp.x0.size());
        Vector fwd = cp.x0 + hh * cp.xd0;
        solve_implicit(sys, cp.t0 + hh, fwd, 1.0 / hh, cp.x0, zero, newton);
        Vector bwd = cp.x0 - hh * cp.xd0;
        solve_implicit(sys, cp.t0 - hh, bwd, -1.0 / hh, cp.x0, zero, newton);
        return Vector((fwd - bwd) / (2.0 * hh));
    };
    DerivativeEstimate d;
    d.h = h;
    d.xd = central(h);
    const Vector half = central(h / 2.0);
    d.extrapolated = (4.0 * half - d.xd) / 3.0;
    d.error = (d.xd - d.extrapolated).cwiseAbs();
    return d;
}

Sample make_sample(const CpHSystem& sys, double t, const Vector& x, const Vector& xd) {
    Sample s;
    s.t = t;
    s.x = x;
    s.xd = xd;
    s.y = sys.output(t, x, xd);
    Vector q, phi, qd, phid;
    sys.storage_state(x, xd, q, phi, qd, phid);
    const StorageLaws& laws = sys.model().storage();
    s.H = hamiltonian(laws, q, phi);
    const StorageEval st = storage_eval(laws, q, phi);
    const double Hdot = st.v_C.dot(qd) + st.i_L.dot(phid);
    const EdgeValues ev = sys.edge_values(t, x, xd);
    s.balance = Hdot + dissipated_power(sys, ev) - port_power(sys, ev);
    return s;
}

Trajectory integrate(const CpHSystem& sys, const ConsistentPoint& cp, const IntegratorConfig& cfg) {
    if (!(cfg.h > 0.0) || !(cfg.rtol > 0.0) || !(cfg.atol > 0.0) || !(cfg.newton.tol > 0.0) ||
        !(cfg.h_min > 0.0) || cfg.newton.max_iter < 1)
        throw Error(ErrorCode::InvalidArgument, "step sizes, tolerances and iteration limits must be positive");
    if (cfg.order != 1 && cfg.order != 2) throw Error(ErrorCode::InvalidArgument, "BDF order must be 1 or 2");
    if (!(cfg.t1 > cp.t0)) throw Error(ErrorCode::InvalidArgument, "t1 must exceed t0");

    Trajectory traj;
    traj.samples.push_back(make_sample(sys, cp.t0, cp.x0, cp.xd0));
    const bool adaptive = cfg.mode == StepMode::Adaptive;
    double t = cp.t0, h = cfg.h, h_prev = 0.0;
    Vector x = cp.x0, xd = cp.xd0, x_prev;
    bool have_prev = false;
    std::size_t k = 0;  // fixed-grid index

    while (t < cfg.t1) {
        if (traj.accepted + traj.rejected >= cfg.max_steps)
            throw Error(ErrorCode::StepFailure, "step budget exhausted at t=" + std::to_string(t));
        double t_next;
        if (adaptive) {
            t_next = t + h;
            if (t_next >= cfg.t1 - 1e-3 * h) t_next = cfg.t1;  // no sliver steps
        } else {
            t_next = cp.t0 + static_cast<double>(k + 1) * cfg.h;
            if (t_next >= cfg.t1 - 1e-9 * cfg.h) t_next = cfg.t1;
        }
        const double hs = t_next - t;
        if (!(hs > 0.0)) throw Error(ErrorCode::StepFailure, "step size underflow at t=" + std::to_string(t));
        const int p = cfg.order == 2 && have_prev ? 2 : 1;

        // xd(n+1) = a*(x(n+1) - x(n)) + c; predictor from the local polynomial
        double a;
        Vector c, x_pred;
        double err_const;
        if (p == 1) {
            a = 1.0 / hs;
            c = Vector::Zero(x.size());
            x_pred = x + hs * xd;
            err_const = 0.5;
        } else {
            const double w = hs / h_prev;
            a = (1.0 + 2.0 * w) / ((1.0 + w) * hs);
            c = -(w * w / (1.0 + w)) * (x - x_prev) / hs;
            const Vector curv = (x_prev - x + h_prev * xd) / (h_prev * h_prev);
            x_pred = x + hs * xd + hs * hs * curv;
            err_const = 0.4;  // |C_bdf2| / (|C_bdf2| + |C_hermite|) = (2/9) / (2/9 + 1/3)
        }

        Vector x_new = x_pred;
        bool converged = true;
        try {
            traj.newton_iterations += static_cast<std::size_t>(solve_implicit(sys, t_next, x_new, a, x, c, cfg.newton));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NewtonDiverged) throw;
            if (!adaptive)
                throw Error(ErrorCode::NewtonDiverged, "at t=" + std::to_string(t_next) + ": " + e.what());
            converged = false;
        }

        double factor = 2.0;
        if (converged && adaptive) {
            double acc = 0.0;
            for (Index i = 0; i < x.size(); ++i) {
                const double w = cfg.atol + cfg.rtol * std::max(std::abs(x(i)), std::abs(x_new(i)));
                const double e = err_const * (x_new(i) - x_pred(i)) / w;
                acc += e * e;
            }
            const double err = x.size() == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(x.size()));
            if (err > 0.0) factor = std::clamp(0.9 * std::pow(err, -1.0 / (p + 1)), 0.2, 2.0);
            if (err > 1.0) converged = false;
        }
        if (!converged) {
            ++traj.rejected;
            h = hs * std::min(factor, 0.5);
            if (h < cfg.h_min)
                throw Error(ErrorCode::StepFailure, "step size fell below h_min at t=" + std::to_string(t));
            continue;
        }

        ++traj.accepted;
        xd = a * (x_new - x) + c;
        x_prev = std::move(x);
        x = std::move(x_new);
        h_prev = hs;
        have_prev = true;
        t = t_next;
        ++k;
        traj.samples.push_back(make_sample(sys, t, x, xd));
        if (adaptive) h = hs * factor;
    }
    return traj;
}

EnergyAudit energy_audit(const Trajectory& traj, const CpHSystem& sys) {
    EnergyAudit audit;
    std::vector<double> supplied;  // port - dissipated
    for (const Sample& s : traj.samples) {
        const Sample fresh = make_sample(sys, s.t, s.x, s.xd);
        audit.pointwise.push_back(fresh.balance);
        audit.max_pointwise = std::max(audit.max_pointwise, std::abs(fresh.balance));
        const EdgeValues ev = sys.edge_values(s.t, s.x, s.xd);
        supplied.push_back(port_power(sys, ev) - dissipated_power(sys, ev));
    }
    for (std::size_t n = 0; n + 1 < traj.samples.size(); ++n) {
        const Sample& s0 = traj.samples[n];
        const Sample& s1 = traj.samples[n + 1];
        const double r = s1.H - s0.H - 0.5 * (s1.t - s0.t) * (supplied[n] + supplied[n + 1]);
        audit.discrete.push_back(r);
        audit.max_discrete = std::max(audit.max_discrete, std::abs(r));
    }
    return audit;
}

ReducedOde::ReducedOde(const CpHSystem& sys, double t, const Vector& x, const NewtonOptions& newton)
    : sys_(&sys), newton_(newton), last_(x) {
    if (sys.kind() != ModelKind::Model2)
        throw Error(ErrorCode::InvalidArgument, "reduction to an explicit ODE needs a Model 2 system");
    if (x.size() != idx(sys.size())) throw Error(ErrorCode::DimensionMismatch, "state length mismatch");
    rows_C_ = rows_where(sys, [](RowClass c) { return c == RowClass::C; });
    rows_l_ = rows_where(sys, [](RowClass c) { return c == RowClass::l; });
    rows_x_ = rows_where(sys, [](RowClass c) { return c == RowClass::d || c == RowClass::D; });
    q_vars_ = vars_where(sys, {VarRole::qC, VarRole::qc});
    phi_vars_ = vars_where(sys, {VarRole::phil, VarRole::phiL});
    x_vars_ = vars_where(sys, {VarRole::xhat});

    // Scholz-Steinbrecher: the columns an HVT assigns to the C and l rows.
    const Transversal tr = hvt(signature_matrix(sys));
    for (std::size_t i : rows_C_) q_hat_.push_back(tr.col_of_row[i]);
    for (std::size_t i : rows_l_) phi_hat_.push_back(tr.col_of_row[i]);
    std::sort(q_hat_.begin(), q_hat_.end());
    std::sort(phi_hat_.begin(), phi_hat_.end());
    rebuild_state();
    try {
        check_selection(t, x);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularSelection) throw;
        reselect(t, x);
    }
}

void ReducedOde::check_selection(double t, const Vector& x) const {
    RealMatrix dfdx, dfdxd;
    sys_->jacobians(t, x, Vector::Zero(x.size()), dfdx, dfdxd);
    auto ok = [&](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
        return rows.size() == cols.size() && (rows.empty() || singular_value_ratio(gather(dfdx, rows, cols)) > 1e-12);
    };
    for (std::size_t j : q_hat_)
        if (std::find(q_vars_.begin(), q_vars_.end(), j) == q_vars_.end())
            throw Error(ErrorCode::SingularSelection, "transversal leaves the charge columns");
    for (std::size_t j : phi_hat_)
        if (std::find(phi_vars_.begin(), phi_vars_.end(), j) == phi_vars_.end())
            throw Error(ErrorCode::SingularSelection, "transversal leaves the flux columns");
    if (!ok(rows_C_, q_hat_) || !ok(rows_l_, phi_hat_))
        throw Error(ErrorCode::SingularSelection, "selected columns give a singular block");
}

void ReducedOde::reselect(double t, const Vector& x) {
    RealMatrix dfdx, dfdxd;
    sys_->jacobians(t, x, Vector::Zero(x.size()), dfdx, dfdxd);
    auto pick = [&](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
        std::vector<std::size_t> out;
        if (rows.empty()) return out;
        const RealMatrix A = gather(dfdx, rows, cols);
        Eigen::ColPivHouseholderQR<RealMatrix> qr(A);
        qr.setThreshold(1e-12);
        if (qr.rank() < static_cast<Index>(rows.size()))
            throw Error(ErrorCode::SingularSelection, "derivative-free rows are rank deficient at t=" +
                                                          std::to_string(t));
        for (std::size_t k = 0; k < rows.size(); ++k)
            out.push_back(cols[static_cast<std::size_t>(qr.colsPermutation().indices()(idx(k)))]);
        std::sort(out.begin(), out.end());
        return out;
    };
    q_hat_ = pick(rows_C_, q_vars_);
    phi_hat_ = pick(rows_l_, phi_vars_);
    rebuild_state();
    last_ = x;
}

void ReducedOde::rebuild_state() {
    state_.clear();
    for (const auto* group : {&q_vars_, &phi_vars_})
        for (std::size_t j : *group)
            if (std::find(q_hat_.begin(), q_hat_.end(), j) == q_hat_.end() &&
                std::find(phi_hat_.begin(), phi_hat_.end(), j) == phi_hat_.end())
                state_.push_back(j);
}

Vector ReducedOde::state_of(const Vector& x) const { return gather(x, state_); }

Vector ReducedOde::recover(double t, const Vector& z) const {
    if (z.size() != idx(state_.size())) throw Error(ErrorCode::DimensionMismatch, "reduced state length mismatch");
    Vector x = last_;
    scatter(x, state_, z);
    const Vector zero = Vector::Zero(x.size());
    // I.2, I.4, I.5 in order: charges, fluxes, then the dissipator unknowns.
    solve_rows(*sys_, t, x, zero, rows_C_, q_hat_, newton_, ErrorCode::SingularSelection, "charge selection");
    solve_rows(*sys_, t, x, zero, rows_l_, phi_hat_, newton_, ErrorCode::SingularSelection, "flux selection");
    solve_rows(*sys_, t, x, zero, rows_x_, x_vars_, newton_, ErrorCode::SingularSubJacobian, "dissipator solve");
    last_ = x;
    return x;
}

Vector ReducedOde::full_rate(double t, const Vector& x) const {
    const Vector zero = Vector::Zero(x.size());
    RealMatrix dfdx, dfdxd;
    sys_->jacobians(t, x, zero, dfdx, dfdxd);
    const Vector f0 = sys_->residual(t, x, zero);
    const Vector ft = sys_->dfdt(t, x, zero);
    Vector xd = zero;
    // II.1 and II.2: differentiated derivative-free rows stacked on the
    // rows that carry derivatives; each block is square in its columns.
    auto block = [&](const std::vector<std::size_t>& lo_rows, RowClass hi, const std::vector<std::size_t>& cols) {
        const std::vector<std::size_t> hi_rows = rows_where(*sys_, [hi](RowClass c) { return c == hi; });
        const auto n = idx(cols.size());
        if (n == 0) return;
        RealMatrix M(n, n);
        Vector rhs(n);
        Index r = 0;
        for (std::size_t i : lo_rows) {
            for (Index j = 0; j < n; ++j) M(r, j) = dfdx(idx(i), idx(cols[static_cast<std::size_t>(j)]));
            rhs(r++) = -ft(idx(i));
        }
        for (std::size_t i : hi_rows) {
            for (Index j = 0; j < n; ++j) M(r, j) = dfdxd(idx(i), idx(cols[static_cast<std::size_t>(j)]));
            rhs(r++) = -f0(idx(i));
        }
        if (r != n) throw Error(ErrorCode::DimensionMismatch, "stage-0 block is not square");
        scatter(xd, cols, LuFactor(M).solve(rhs));
    };
    block(rows_C_, RowClass::c, q_vars_);
    block(rows_l_, RowClass::L, phi_vars_);
    // Rates of the dissipator unknowns from the differentiated d and D rows.
    if (!x_vars_.empty()) {
        std::vector<std::size_t> qphi = q_vars_;
        qphi.insert(qphi.end(), phi_vars_.begin(), phi_vars_.end());
        const Vector rhs = -gather(ft, rows_x_) - gather(dfdx, rows_x_, qphi) * gather(xd, qphi);
        scatter(xd, x_vars_, LuFactor(gather(dfdx, rows_x_, x_vars_)).solve(rhs));
    }
    return xd;
}

Vector ReducedOde::rhs(double t, const Vector& z) const { return gather(full_rate(t, recover(t, z)), state_); }

ReducedTrajectory integrate_reduced(ReducedOde& ode, double t0, const Vector& x0, double t1, double h) {
    if (!(h > 0.0) || !(t1 > t0)) throw Error(ErrorCode::InvalidArgument, "need h > 0 and t1 > t0");
    ReducedTrajectory out;
    Vector x = ode.recover(t0, ode.state_of(x0));
    out.t.push_back(t0);
    out.x.push_back(x);
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / h - 1e-9));
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = t0 + static_cast<double>(k) * h;
        const double tn = k + 1 == steps ? t1 : t0 + static_cast<double>(k + 1) * h;
        const double hs = tn - t;
        for (int attempt = 0;; ++attempt) {
            try {
                const Vector z = ode.state_of(x);
                const Vector k1 = ode.rhs(t, z);
                const Vector k2 = ode.rhs(t + hs / 2, z + hs / 2 * k1);
                const Vector k3 = ode.rhs(t + hs / 2, z + hs / 2 * k2);
                const Vector k4 = ode.rhs(tn, z + hs * k3);
                x = ode.recover(tn, z + hs / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
                break;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::SingularSelection || attempt > 0) throw;
                ode.reselect(t, x);
                ++out.reselections;
            }
        }
        out.t.push_back(tn);
        out.x.push_back(x);
    }
    return out;
}

}  // namespace cph
