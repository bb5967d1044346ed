#include "nstori/experiment.hpp"

#include "nstori/errors.hpp"
#include "nstori/torus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace nstori {

namespace {

double abs_sum(const State& s) { return std::abs(s.x) + std::abs(s.y); }

} // namespace

std::optional<int> smallest_certified_enclosing(const PeriodicForcing& f, const std::vector<State>& states, int n_max,
                                                const GridOptions& options)
{
    // Tori are nested, so the per-state minimal index only ratchets upward.
    int n = 1;
    for (const auto& s : states) {
        while (n <= n_max && contains(TorusSpec(f, n), s) == Containment::outside) {
            ++n;
        }
        if (n > n_max) {
            return std::nullopt;
        }
    }
    for (; n <= n_max; ++n) {
        if (certify(f, n, options).certified) {
            return n;
        }
    }
    return std::nullopt;
}

std::vector<State> sample_trajectory(const Trajectory& traj, double step)
{
    if (!(step > 0.0)) {
        throw std::invalid_argument("sampling step must be positive");
    }
    std::vector<State> out;
    const auto count = static_cast<long long>(std::floor(traj.duration() / step + 1e-9));
    out.reserve(static_cast<std::size_t>(count + 1) + traj.events().size());
    for (long long k = 0; k <= count; ++k) {
        out.push_back(traj.at(std::min(static_cast<double>(k) * step, traj.duration())));
    }
    for (const auto& e : traj.events()) {
        out.push_back(e.state);
    }
    return out;
}

OrbitSummary summarize_orbit(const PeriodicForcing& f, const Trajectory& traj, double step, int n_max)
{
    OrbitSummary s;
    s.duration = traj.duration();
    s.events = traj.events().size();
    s.final_state = traj.final_state();
    const auto states = sample_trajectory(traj, step);
    for (const auto& st : states) {
        s.sup_abs_sum = std::max(s.sup_abs_sum, abs_sum(st));
    }
    if (f.has_zero_average()) {
        s.enclosing_n = smallest_certified_enclosing(f, states, n_max);
    }
    return s;
}

BoundedReport run_boundedness(const PeriodicForcing& f, const BoundedOptions& opt)
{
    f.require_zero_average();
    if (opt.starts < 1 || !(opt.periods > 0.0) || opt.samples_per_period < 1 || !(opt.box > 0.0)) {
        throw std::invalid_argument("invalid boundedness options");
    }
    const double T = f.period();
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> phi_dist(0.0, T);
    std::uniform_real_distribution<double> xy_dist(-opt.box, opt.box);

    BoundedReport report;
    report.never_exited = true;
    while (static_cast<int>(report.runs.size()) < opt.starts) {
        BoundedRun run;
        run.start = {phi_dist(rng), xy_dist(rng), xy_dist(rng)};
        if (std::abs(run.start.x) <= kCrossingTolerance) {
            continue; // redraw rather than start on the plane
        }
        const auto n = smallest_certified_enclosing(f, {run.start}, opt.n_max);
        if (!n) {
            throw Error("no certified torus up to n_max encloses the start state");
        }
        run.n = *n;
        const TorusSpec spec(f, run.n);
        const auto mesh = build_mesh(spec, 129, 129);
        for (const auto* chart : {&mesh.plus, &mesh.minus}) {
            for (const auto& v : *chart) {
                run.torus_bound = std::max(run.torus_bound, std::abs(v.x) + std::abs(v.y));
            }
        }

        const double duration = opt.periods * T;
        const auto traj = evolve(f, run.start, duration);
        const double cycle = 2.0 * run.n * T;
        const double step = T / opt.samples_per_period;
        double next_checkpoint = cycle;
        double sup = 0.0;
        double early = 0.0;
        double late = 0.0;
        auto visit = [&](double t, const State& s) {
            ++run.samples;
            if (contains(spec, s) == Containment::outside) {
                ++run.outside_samples;
            }
            const double v = abs_sum(s);
            (t <= cycle ? early : late) = std::max(t <= cycle ? early : late, v);
        };
        std::size_t e = 0;
        const auto& events = traj.events();
        const auto count = static_cast<long long>(std::floor(duration / step + 1e-9));
        for (long long k = 0; k <= count; ++k) {
            const double t = std::min(static_cast<double>(k) * step, duration);
            for (; e < events.size() && events[e].time <= t; ++e) {
                visit(events[e].time, events[e].state);
            }
            visit(t, traj.at(t));
            sup = std::max(early, late);
            if (t >= next_checkpoint) {
                run.running_sup.emplace_back(t, sup);
                next_checkpoint *= 2.0;
            }
        }
        for (; e < events.size(); ++e) {
            visit(events[e].time, events[e].state);
        }
        run.running_sup.emplace_back(duration, std::max(early, late));
        run.late_growth = late - early;
        if (run.outside_samples > 0) {
            report.never_exited = false;
        }
        report.runs.push_back(std::move(run));
    }
    return report;
}

} // namespace nstori
