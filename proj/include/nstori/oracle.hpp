#pragma once

// Brute-force reference machinery used to cross-check the closed forms and the
// certified checker. Nothing here reuses the closed-form flow.

#include "nstori/flow.hpp"
#include "nstori/forcing.hpp"

#include <utility>
#include <vector>

namespace nstori::oracle {

enum class QuadratureRule { midpoint, simpson };

struct OracleConfig {
    double rk_step = 1.0 / 2000.0;
    double event_bisection_tol = 1e-14;
    int grid_phi = 2000;
    int grid_t = 2000;
    QuadratureRule quadrature_rule = QuadratureRule::simpson;
    /// Quadrature subintervals per period.
    int quadrature_cells = 2000;
};

struct Sample {
    double t = 0.0; // elapsed time
    State state;
    Branch branch = Branch::plus; // branch in force after this sample
    bool is_event = false;
};

/// Fixed-step RK4 for the switched system. Steps are split at forcing
/// breakpoints; sign changes of x are located by bisection on the step length.
/// Throws DegenerateStart / DegenerateCrossing like the closed-form flow.
std::vector<Sample> rk_evolve(const PeriodicForcing& f, const State& s0, double duration, const OracleConfig& cfg = {});

struct ConditionScan {
    double cond1_margin = 0.0; // min over phi of n T^2 / 2 - |T P1 - P2(T)|
    double cond1_witness_phi = 0.0;
    double cond2_margin = 0.0; // min over (phi, t) of h - |f|
    std::pair<double, double> cond2_witness{0.0, 0.0};

    bool violation() const { return cond1_margin <= 0.0 || cond2_margin <= 0.0; }
};

/// Dense-grid scan: phi_i = i T / n_phi, t_j = j nT / n_t for 0 < j < n_t.
ConditionScan scan_conditions(const PeriodicForcing& f, int n, int n_phi = 2000, int n_t = 2000);

/// (P1(t), P2(t)) by composite quadrature of p on [0, t], t >= 0.
std::pair<double, double> quad_primitives(const PeriodicForcing& f, double t, const OracleConfig& cfg = {});

} // namespace nstori::oracle
