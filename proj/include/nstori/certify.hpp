#pragma once

#include "nstori/forcing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nstori {

// Conditions certified for a torus index n (f and h as functions of t, for each phi0 in [0, T]):
//
//   cond1:  |T P1(phi0) - P2(T)| < n T^2 / 2
//   cond2:  |f(t)| < h(t) on (0, nT),  f(t) = t P2(T) + T P2(phi0) - T P2(t + phi0),
//                                      h(t) = (T/2) t (nT - t)

enum class CheckStatus { pass, fail, inconclusive };
enum class CertificationMethod { grid_lipschitz, analytic_bound, linf_proposition };

const char* to_string(CheckStatus s);
const char* to_string(CertificationMethod m);

struct Cond1Result {
    bool pass = false;
    double margin = 0.0;    // n T^2 / 2 - sup |T P1 - P2(T)|
    double sup_value = 0.0; // sup |T P1 - P2(T)|, from the exact extremes of P1
};

struct Cond2Result {
    CheckStatus status = CheckStatus::inconclusive;
    /// Smallest certified lower bound of h - |f| over all cells away from the
    /// endpoints t = 0 and t = nT (where both sides vanish).
    double margin = 0.0;
    int grid_phi = 0; // base cells per period in phi
    int grid_t = 0;   // base cells per period in t
    int finest_resolution = 0; // cells per period reached by refinement (0: grid unused)
    double lipschitz_bound_used = 0.0;
    std::size_t analytic_cells = 0;
    std::size_t grid_cells = 0;
    /// (phi0, t) with |f| >= h, when status == fail.
    std::optional<std::pair<double, double>> witness;

    bool pass() const { return status == CheckStatus::pass; }
};

struct GridOptions {
    int base_resolution = 256;  // cells per period, both axes
    int max_resolution = 4096;  // refinement stops here
    double strict_slack = 1e-12;
};

struct CertificationReport {
    std::string forcing_name;
    int n = 0;
    Cond1Result cond1;
    Cond2Result cond2;
    CertificationMethod method = CertificationMethod::grid_lipschitz;
    bool certified = false;
};

/// Throws NonZeroAverage.
Cond1Result check_cond1(const PeriodicForcing& f, int n);

/// Rigorous check of cond2. Cells of the t axis are first tried against
/// analytic bounds on |f| (|f| <= S min(t, nT - t) and S T / 2 with S the cond1
/// supremum, and the cruder 2TMt, 2T^2 M); the rest are verified on a
/// (phi0, t) grid with Lipschitz inflation, refining failing cells.
/// Throws NonZeroAverage.
Cond2Result check_cond2(const PeriodicForcing& f, int n, const GridOptions& options = {});

CertificationReport certify(const PeriodicForcing& f, int n, const GridOptions& options = {});

struct MinimalIndexResult {
    std::optional<int> n_min;
    /// Certification also holds for n_min + 1 .. n_min + 3.
    bool extends_upward = false;
    std::vector<int> probed;
};

/// Smallest certified n <= n_max: linear scan over small n, then doubling
/// probes with a bisection back-fill.
MinimalIndexResult find_min_certified_n(const PeriodicForcing& f, int n_max = 64, const GridOptions& options = {});

/// Smallest integer n >= M_bound (at least 1); every torus index from there on is
/// invariant when sup|p| < M_bound. Throws UnboundedRepresentation when sup|p|
/// is not finite and std::invalid_argument when sup|p| >= M_bound.
int linf_certificate(const PeriodicForcing& f, double M_bound);

/// Report for n >= linf_certificate(f, M_bound) without grid work; cond2.margin is NaN.
CertificationReport certify_linf(const PeriodicForcing& f, int n, double M_bound);

struct InvarianceReport {
    int n = 0;
    int phi_samples = 0;
    /// Largest nT - (first return time to x = 0); positive means an early crossing.
    double rel1_max_early = 0.0;
    /// Largest distance of the state at nT from the opposite boundary curve.
    double rel2_max_defect = 0.0;
    /// Largest distance of the state at 2nT from the start.
    double return_max_defect = 0.0;
    bool passed = false;
};

inline constexpr double kInvarianceTolerance = 1e-8;

/// Flows from both boundary curves at phi_samples values of phi0 and checks
/// the boundary-to-boundary map and 2nT-periodicity.
InvarianceReport verify_invariance(const PeriodicForcing& f, int n, int phi_samples = 64);

} // namespace nstori
