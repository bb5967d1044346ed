#pragma once

#include "nstori/certify.hpp"
#include "nstori/flow.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nstori {

/// Smallest certified n <= n_max whose torus has no state of `states` outside it.
/// Certification is assumed to persist upward once found (checked for the
/// returned index only). std::nullopt when no such index exists.
std::optional<int> smallest_certified_enclosing(const PeriodicForcing& f, const std::vector<State>& states,
                                                int n_max = 64, const GridOptions& options = {});

/// Trajectory states at t = k * step plus every crossing state.
std::vector<State> sample_trajectory(const Trajectory& traj, double step);

struct OrbitSummary {
    double duration = 0.0;
    std::size_t events = 0;
    double sup_abs_sum = 0.0; // sup of |x| + |y| over the sampled states
    State final_state;
    std::optional<int> enclosing_n;
};

/// Summary of an evolved orbit. The enclosing index is only searched for
/// zero-average forcings.
OrbitSummary summarize_orbit(const PeriodicForcing& f, const Trajectory& traj, double step, int n_max = 64);

struct BoundedOptions {
    int starts = 10;
    double periods = 1e4;
    std::uint64_t seed = 1;
    /// Starts are drawn uniformly from phi in [0, T), |x| <= box, |y| <= box.
    double box = 1.0;
    /// Samples per period along each orbit.
    int samples_per_period = 32;
    int n_max = 64;
};

struct BoundedRun {
    State start;
    int n = 0; // smallest certified index enclosing the start
    std::size_t samples = 0;
    std::size_t outside_samples = 0;
    /// Running sup of |x| + |y| at elapsed times 2nT * 2^k (and the end of the run).
    std::vector<std::pair<double, double>> running_sup;
    /// Largest |x| + |y| on the enclosing torus surface (mesh estimate).
    double torus_bound = 0.0;
    /// sup(|x| + |y|) over [2nT, end] minus sup over [0, 2nT].
    double late_growth = 0.0;
};

struct BoundedReport {
    std::vector<BoundedRun> runs;
    bool never_exited = false;
};

/// Long-horizon simulation from random starts; each orbit is classified
/// against the smallest certified torus enclosing its start.
BoundedReport run_boundedness(const PeriodicForcing& f, const BoundedOptions& options = {});

} // namespace nstori
