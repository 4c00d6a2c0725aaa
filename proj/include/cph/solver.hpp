#ifndef CPH_SOLVER_HPP
#define CPH_SOLVER_HPP

#include "cph/dae.hpp"
#include "cph/linalg.hpp"

#include <optional>
#include <vector>

namespace cph {

struct NewtonOptions {
    double tol = 1e-10;  // converged when |dx|_inf <= tol * (1 + |x|_inf)
    int max_iter = 25;
};

struct ConsistentPoint {
    double t0 = 0.0;
    Vector x0, xd0;
    double residual_norm = 0.0;  // |f(t0, x0, xd0)|_inf
    std::vector<std::size_t> fixed;
    int newton_iterations = 0;
};

// Tree capacitor charges and cotree inductor fluxes.
std::vector<std::size_t> default_fixed_choice(const CpHSystem& sys);
// Columns an HVT of the signature matrix assigns to the c and L rows.
std::vector<std::size_t> hvt_fixed_choice(const CpHSystem& sys);

// Holds `fixed` at the guess, solves the derivative-free rows for the rest
// by Newton, then the stage-0 linear system for xd0. Without an explicit
// choice a singular sub-Jacobian triggers one retry with hvt_fixed_choice.
ConsistentPoint consistent_point(const CpHSystem& sys, double t0, const Vector& guess,
                                 std::optional<std::vector<std::size_t>> fixed = std::nullopt,
                                 const NewtonOptions& newton = {});

struct DerivativeEstimate {
    Vector xd;           // central difference of implicit Euler steps to t0 +- h
    Vector extrapolated;  // one Richardson level with h/2
    Vector error;         // |xd - extrapolated|, componentwise
    double h = 0.0;
};

DerivativeEstimate estimate_derivative(const CpHSystem& sys, const ConsistentPoint& cp, double h,
                                       const NewtonOptions& newton = {});

enum class StepMode { Fixed, Adaptive };

struct IntegratorConfig {
    double t1 = 1.0;
    StepMode mode = StepMode::Fixed;
    double h = 1e-3;  // fixed step, or the initial step when adaptive
    int order = 2;    // BDF order, 1 or 2; the first step is always BDF1
    double rtol = 1e-6, atol = 1e-8;
    double h_min = 1e-14;
    std::size_t max_steps = 10'000'000;
    NewtonOptions newton;
};

struct Sample {
    double t = 0.0;
    Vector x, xd, y;
    double H = 0.0;
    double balance = 0.0;  // dH/dt + i_D.v_D - port power
};

struct Trajectory {
    std::vector<Sample> samples;
    std::size_t accepted = 0, rejected = 0, newton_iterations = 0;
};

Trajectory integrate(const CpHSystem& sys, const ConsistentPoint& cp, const IntegratorConfig& config);

Sample make_sample(const CpHSystem& sys, double t, const Vector& x, const Vector& xd);

struct EnergyAudit {
    std::vector<double> pointwise;  // per sample
    // Per step: H(n+1) - H(n) - trapezoidal integral of (port - dissipated).
    std::vector<double> discrete;
    double max_pointwise = 0.0, max_discrete = 0.0;
};

EnergyAudit energy_audit(const Trajectory& traj, const CpHSystem& sys);

// Explicit ODE in the charges and fluxes not selected by the column choice.
// Not thread safe: rhs and recover warm start from the last solve.
class ReducedOde {
public:
    // Requires a Model 2 system. Columns come from an HVT of the signature
    // matrix; if the selected blocks are singular at (t, x) the choice falls
    // back to greedy column pivoting.
    ReducedOde(const CpHSystem& sys, double t, const Vector& x, const NewtonOptions& newton = {});

    const CpHSystem& system() const { return *sys_; }
    std::size_t size() const { return state_.size(); }
    // Variable indices of z, then of the selected q-hat and phi-hat columns.
    const std::vector<std::size_t>& state_vars() const { return state_; }
    const std::vector<std::size_t>& q_hat() const { return q_hat_; }
    const std::vector<std::size_t>& phi_hat() const { return phi_hat_; }

    Vector state_of(const Vector& x) const;
    // Full DAE vector consistent with z at t.
    Vector recover(double t, const Vector& z) const;
    // Full derivative from the two linear stage-0 solves.
    Vector full_rate(double t, const Vector& x) const;
    Vector rhs(double t, const Vector& z) const;

    // Greedy column pivoting at (t, x); throws SingularSelection if the
    // derivative-free blocks are rank deficient there.
    void reselect(double t, const Vector& x);

private:
    void check_selection(double t, const Vector& x) const;
    void rebuild_state();

    const CpHSystem* sys_;
    NewtonOptions newton_;
    std::vector<std::size_t> rows_C_, rows_l_, rows_x_;
    std::vector<std::size_t> q_vars_, phi_vars_, x_vars_;
    std::vector<std::size_t> q_hat_, phi_hat_, state_;
    mutable Vector last_;
};

// Classical RK4 on the reduced ODE at fixed step. A SingularSelection in a
// stage re-selects the columns at the last accepted point and retries once.
struct ReducedTrajectory {
    std::vector<double> t;
    std::vector<Vector> x;  // recovered full DAE vectors
    std::size_t reselections = 0;
};

ReducedTrajectory integrate_reduced(ReducedOde& ode, double t0, const Vector& x0, double t1, double h);

}  // namespace cph

#endif
