#include "nstori/flow.hpp"

#include "nstori/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nstori {

namespace {

// Lower bound K on -sigma x'' along the branch: sigma x'' = -1 + sigma p >= -K.
double curvature_bound(const PeriodicForcing& f, Branch branch)
{
    const auto& c = f.cache();
    const double k = branch == Branch::plus ? 1.0 - c.p_min : 1.0 + c.p_max;
    return std::max(k, 1e-300);
}

constexpr int kMaxAdvanceSteps = 10'000'000;

} // namespace

State flow_plus(const PeriodicForcing& f, double t, const State& s0)
{
    const double P1_0 = f.P1(s0.phi);
    return {s0.phi + t,
            -0.5 * t * t + s0.x + t * (s0.y - P1_0) + f.P2_increment(s0.phi, t),
            -t + s0.y + f.P1_increment(s0.phi, t)};
}

State flow_minus(const PeriodicForcing& f, double t, const State& s0)
{
    const double P1_0 = f.P1(s0.phi);
    return {s0.phi + t,
            0.5 * t * t + s0.x + t * (s0.y - P1_0) + f.P2_increment(s0.phi, t),
            t + s0.y + f.P1_increment(s0.phi, t)};
}

State flow_branch(const PeriodicForcing& f, Branch branch, double t, const State& s0)
{
    return branch == Branch::plus ? flow_plus(f, t, s0) : flow_minus(f, t, s0);
}

std::optional<double> next_crossing(const PeriodicForcing& f, Branch branch, const State& s0, double horizon)
{
    const double sigma = branch_sign(branch);
    if (std::abs(s0.x) <= kCrossingTolerance) {
        if (std::abs(s0.y) <= kDegenerateVelocity) {
            throw DegenerateStart("start on the switching plane with zero velocity");
        }
        if (sigma * s0.y < 0.0) {
            throw std::invalid_argument("branch points away from its half-space at the start state");
        }
    } else if (sigma * s0.x < 0.0) {
        throw std::invalid_argument("start state is not in the branch half-space");
    }
    if (!(horizon > 0.0)) {
        return std::nullopt;
    }

    const double K = curvature_bound(f, branch);
    auto signed_state = [&](double t) {
        const State s = flow_branch(f, branch, t, s0);
        return std::pair{sigma * s.x, sigma * s.y};
    };
    // x_tol, widened to the rounding floor of the closed form at large |t y|.
    auto tolerance_at = [&](double t) {
        const double scale = std::abs(s0.x) + t * (std::abs(s0.y) + f.cache().M + 0.5 * t + t * f.sup_abs_p());
        return std::max(kCrossingTolerance, 16.0 * std::numeric_limits<double>::epsilon() * scale);
    };

    // Safeguarded Newton on X(t) = sigma x(t) inside a bracket X(a) >= 0 > X(b).
    auto polish = [&](double a, double b) {
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (a + b);
            if (m <= a || m >= b) {
                break;
            }
            const auto [Xa, Ya] = signed_state(a);
            if (a > 0.0 && std::abs(Xa) <= tolerance_at(a)) {
                return a;
            }
            double trial = Ya < 0.0 ? a - Xa / Ya : m;
            if (!(trial > a && trial < b)) {
                trial = m;
            }
            const auto [Xt, Yt] = signed_state(trial);
            if (std::abs(Xt) <= tolerance_at(trial)) {
                return trial;
            }
            if (Xt > 0.0) {
                a = trial;
            } else {
                b = trial;
            }
        }
        const double Xa = signed_state(a).first;
        const double Xb = signed_state(b).first;
        return a > 0.0 && std::abs(Xa) <= std::abs(Xb) ? a : b;
    };

    double t = 0.0;
    double X = sigma * s0.x;
    double Y = sigma * s0.y;
    for (int step = 0; step < kMaxAdvanceSteps; ++step) {
        if (t > 0.0 && X <= tolerance_at(t) && Y <= kDegenerateVelocity) {
            // Arrived at the plane; transversal if Y < -kDegenerateVelocity,
            // otherwise a grazing contact reported for the caller to reject.
            return t;
        }
        const double Xpos = std::max(X, 0.0);
        const double safe = (Y + std::sqrt(Y * Y + 2.0 * K * Xpos)) / K;
        const double t_next = std::min(t + safe, horizon);
        if (!(t_next > t)) {
            // The safe step is below the resolution of t: X is zero to rounding.
            return t > 0.0 ? std::optional<double>(t) : std::nullopt;
        }
        const auto [Xn, Yn] = signed_state(t_next);
        if (Xn < 0.0) {
            return polish(t, t_next);
        }
        t = t_next;
        X = Xn;
        Y = Yn;
        if (t >= horizon) {
            if (X <= tolerance_at(t) && Y <= kDegenerateVelocity) {
                return t;
            }
            return std::nullopt;
        }
    }
    throw Error("crossing search did not terminate");
}

Trajectory::Trajectory(const PeriodicForcing& forcing, std::vector<FlowSegment> segments,
                       std::vector<CrossingEvent> events, double duration)
    : forcing_(&forcing), segments_(std::move(segments)), events_(std::move(events)), duration_(duration)
{
}

State Trajectory::at(double t) const
{
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const FlowSegment& s) { return v < s.t_start; });
    const auto& seg = it == segments_.begin() ? segments_.front() : *std::prev(it);
    const double local = std::clamp(t - seg.t_start, 0.0, seg.duration);
    if (local == seg.duration) {
        return seg.end;
    }
    return flow_branch(*forcing_, seg.branch, local, seg.start);
}

Trajectory evolve(const PeriodicForcing& f, const State& s0, double duration)
{
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw std::invalid_argument("duration must be a finite non-negative number");
    }
    State cur = s0;
    Branch branch;
    if (s0.x > kCrossingTolerance) {
        branch = Branch::plus;
    } else if (s0.x < -kCrossingTolerance) {
        branch = Branch::minus;
    } else {
        if (std::abs(s0.y) <= kDegenerateVelocity) {
            throw DegenerateStart("start on the switching plane with zero velocity");
        }
        branch = s0.y > 0.0 ? Branch::plus : Branch::minus;
        cur.x = 0.0;
    }

    // A root located to |x| <= x_tol only pins the velocity down to about
    // sqrt(2 |x''| x_tol); slower crossings are indistinguishable from tangencies.
    const double degenerate_speed =
        std::max(kDegenerateVelocity, std::sqrt(2.0 * (1.0 + f.sup_abs_p()) * kCrossingTolerance));

    std::vector<FlowSegment> segments;
    std::vector<CrossingEvent> events;
    double elapsed = 0.0;
    while (true) {
        const double remaining = duration - elapsed;
        const auto crossing = remaining > 0.0 ? next_crossing(f, branch, cur, remaining) : std::nullopt;
        if (!crossing) {
            if (remaining > 0.0 || segments.empty()) {
                const double len = std::max(remaining, 0.0);
                segments.push_back({branch, elapsed, len, cur, flow_branch(f, branch, len, cur)});
            }
            break;
        }
        State end = flow_branch(f, branch, *crossing, cur);
        end.x = 0.0;
        segments.push_back({branch, elapsed, *crossing, cur, end});
        if (std::abs(end.y) <= degenerate_speed) {
            throw DegenerateCrossing("crossing velocity " + std::to_string(end.y) +
                                     " not resolvable as transversal at elapsed time " +
                                     std::to_string(elapsed + *crossing));
        }
        elapsed += *crossing;
        events.push_back({elapsed, end});
        cur = end;
        branch = opposite(branch);
        if (*crossing >= remaining) {
            break;
        }
    }
    return Trajectory(f, std::move(segments), std::move(events), duration);
}

State time_T_map(const PeriodicForcing& f, const State& s0)
{
    if (s0.phi != 0.0) {
        throw std::invalid_argument("time-T map is defined on the section phi = 0");
    }
    return evolve(f, s0, f.period()).final_state();
}

} // namespace nstori
