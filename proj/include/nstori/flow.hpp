#pragma once

#include "nstori/forcing.hpp"

#include <optional>
#include <vector>

namespace nstori {

/// Crossings are refined until |x| <= kCrossingTolerance.
inline constexpr double kCrossingTolerance = 1e-12;
/// Crossings (or starts on x = 0) with |y| at or below this are degenerate.
inline constexpr double kDegenerateVelocity = 1e-9;

/// Point (phi, x, y) of the extended phase space; phi is the forcing time.
struct State {
    double phi = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// plus: the lateral system valid for x >= 0 (y' = -1 + p); minus: x <= 0 (y' = 1 + p).
enum class Branch { plus, minus };

inline Branch opposite(Branch b) { return b == Branch::plus ? Branch::minus : Branch::plus; }
inline double branch_sign(Branch b) { return b == Branch::plus ? 1.0 : -1.0; }

/// Closed-form solution of the plus lateral system after time t.
State flow_plus(const PeriodicForcing& f, double t, const State& s0);
/// Closed-form solution of the minus lateral system after time t.
State flow_minus(const PeriodicForcing& f, double t, const State& s0);
State flow_branch(const PeriodicForcing& f, Branch branch, double t, const State& s0);

/// Smallest t in (0, horizon] at which the branch flow reaches x = 0.
///
/// The search advances conservatively: with K bounding |x''| on the branch,
/// x(t + s) stays on its side of the plane for s below the positive root of
/// |x| + sigma y s - K s^2 / 2, so no crossing (including close pairs) is
/// stepped over. The bracket is polished by safeguarded Newton on x' = y.
///
/// Throws DegenerateStart when s0 lies on x = 0 with |y0| <= kDegenerateVelocity
/// and std::invalid_argument when the branch points away from its half-space.
std::optional<double> next_crossing(const PeriodicForcing& f, Branch branch, const State& s0, double horizon);

struct FlowSegment {
    Branch branch = Branch::plus;
    double t_start = 0.0; // elapsed time at the segment start
    double duration = 0.0;
    State start;
    State end;
};

struct CrossingEvent {
    double time = 0.0; // elapsed time
    State state;       // x == 0; state.y is the crossing velocity
};

/// Concatenated solution as closed-form segments between switching-plane crossings.
class Trajectory {
public:
    Trajectory(const PeriodicForcing& forcing, std::vector<FlowSegment> segments, std::vector<CrossingEvent> events,
               double duration);

    /// State after `t` units of elapsed time, 0 <= t <= duration().
    State at(double t) const;

    const std::vector<FlowSegment>& segments() const { return segments_; }
    const std::vector<CrossingEvent>& events() const { return events_; }
    double duration() const { return duration_; }
    const State& initial_state() const { return segments_.front().start; }
    const State& final_state() const { return segments_.back().end; }

private:
    const PeriodicForcing* forcing_;
    std::vector<FlowSegment> segments_;
    std::vector<CrossingEvent> events_;
    double duration_;
};

/// Evolves s0 forward for `duration`. Starting on x = 0 selects the branch
/// from the sign of y0. Throws DegenerateStart, and DegenerateCrossing when a
/// crossing velocity is at most max(kDegenerateVelocity, sqrt(2 (1 + sup|p|) kCrossingTolerance)).
/// The returned trajectory refers to `f`, which must outlive it.
Trajectory evolve(const PeriodicForcing& f, const State& s0, double duration);

/// Stroboscopic map over one forcing period; requires s0.phi == 0.
State time_T_map(const PeriodicForcing& f, const State& s0);

} // namespace nstori
