#include "nstori/oracle.hpp"

#include "nstori/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nstori::oracle {

namespace {

// First forcing breakpoint strictly after t (breakpoints repeat every period).
double next_breakpoint(const std::vector<double>& breaks, double period, double t)
{
    const double k = std::floor(t / period);
    const double r = t - k * period;
    const double guard = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    for (double b : breaks) {
        if (b > r + guard) {
            return k * period + b;
        }
    }
    return (k + 1.0) * period;
}

struct Rhs {
    const PeriodicForcing& f;
    double sign; // +1 for x >= 0, -1 for x <= 0

    // t_left: evaluate p as a left limit (step ends on a breakpoint).
    std::pair<double, double> operator()(double t, double x, double y, bool left = false) const
    {
        (void)x;
        const double tp = left ? std::nextafter(t, -std::numeric_limits<double>::infinity()) : t;
        return {y, -sign + f.p(tp)};
    }
};

std::pair<double, double> rk4_step(const Rhs& rhs, double t, double x, double y, double h, bool end_on_break)
{
    const auto [k1x, k1y] = rhs(t, x, y);
    const auto [k2x, k2y] = rhs(t + h / 2, x + h / 2 * k1x, y + h / 2 * k1y);
    const auto [k3x, k3y] = rhs(t + h / 2, x + h / 2 * k2x, y + h / 2 * k2y);
    const auto [k4x, k4y] = rhs(t + h, x + h * k3x, y + h * k3y, end_on_break);
    return {x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x), y + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)};
}

} // namespace

std::vector<Sample> rk_evolve(const PeriodicForcing& f, const State& s0, double duration, const OracleConfig& cfg)
{
    if (!(cfg.rk_step > 0.0) || !(cfg.event_bisection_tol > 0.0)) {
        throw std::invalid_argument("oracle step and tolerance must be positive");
    }
    double sign;
    double x = s0.x;
    double y = s0.y;
    if (x > kCrossingTolerance) {
        sign = 1.0;
    } else if (x < -kCrossingTolerance) {
        sign = -1.0;
    } else {
        if (std::abs(y) <= kDegenerateVelocity) {
            throw DegenerateStart("start on the switching plane with zero velocity");
        }
        sign = y > 0.0 ? 1.0 : -1.0;
        x = 0.0;
    }
    auto branch_of = [](double s) { return s > 0.0 ? Branch::plus : Branch::minus; };

    const auto breaks = f.breakpoints();
    const double T = f.period();
    const double t_end = s0.phi + duration;
    double t = s0.phi;
    std::vector<Sample> out{{0.0, {t, x, y}, branch_of(sign), false}};

    while (t < t_end) {
        const double brk = next_breakpoint(breaks, T, t);
        const double to_break = brk - t;
        const double h = std::min({cfg.rk_step, to_break, t_end - t});
        const bool end_on_break = h == to_break;
        const Rhs rhs{f, sign};
        auto [xn, yn] = rk4_step(rhs, t, x, y, h, end_on_break);

        if (sign * xn < 0.0) {
            // Bisection on the step length for the crossing.
            double lo = 0.0;
            double hi = h;
            while (hi - lo > cfg.event_bisection_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) {
                    break;
                }
                const auto [xm, ym] = rk4_step(rhs, t, x, y, mid, false);
                (void)ym;
                if (sign * xm < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            const double s = 0.5 * (lo + hi);
            const auto [xe, ye] = rk4_step(rhs, t, x, y, s, false);
            (void)xe;
            if (std::abs(ye) <= kDegenerateVelocity) {
                throw DegenerateCrossing("oracle: crossing with |y| <= 1e-9");
            }
            t += s;
            x = 0.0;
            y = ye;
            sign = -sign;
            out.push_back({t - s0.phi, {t, x, y}, branch_of(sign), true});
            continue;
        }
        t = end_on_break ? brk : t + h;
        x = xn;
        y = yn;
        out.push_back({t - s0.phi, {t, x, y}, branch_of(sign), false});
    }
    return out;
}

ConditionScan scan_conditions(const PeriodicForcing& f, int n, int n_phi, int n_t)
{
    if (n < 1 || n_phi < 1 || n_t < 2) {
        throw std::invalid_argument("invalid scan resolution");
    }
    const double T = f.period();
    const double L = n * T;
    const double P2T = f.P2(T);
    ConditionScan scan;
    scan.cond1_margin = std::numeric_limits<double>::infinity();
    scan.cond2_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_phi; ++i) {
        const double phi = T * i / n_phi;
        const double P2phi = f.P2(phi);
        const double c1 = n * T * T / 2.0 - std::abs(T * f.P1(phi) - P2T);
        if (c1 < scan.cond1_margin) {
            scan.cond1_margin = c1;
            scan.cond1_witness_phi = phi;
        }
        for (int j = 1; j < n_t; ++j) {
            const double t = L * j / n_t;
            const double fv = t * P2T + T * P2phi - T * f.P2(t + phi);
            const double c2 = 0.5 * T * t * (L - t) - std::abs(fv);
            if (c2 < scan.cond2_margin) {
                scan.cond2_margin = c2;
                scan.cond2_witness = {phi, t};
            }
        }
    }
    return scan;
}

std::pair<double, double> quad_primitives(const PeriodicForcing& f, double t, const OracleConfig& cfg)
{
    if (t < 0.0) {
        throw std::invalid_argument("quadrature oracle integrates forward from 0");
    }
    const double T = f.period();
    const auto breaks = f.breakpoints();
    const double h_max = T / cfg.quadrature_cells;
    auto p_left = [&](double s) { return f.p(std::nextafter(s, -std::numeric_limits<double>::infinity())); };

    double P1 = 0.0;
    double P2 = 0.0;
    double u = 0.0;
    while (u < t) {
        const double v = std::min(next_breakpoint(breaks, T, u), t);
        const int m = std::max(1, static_cast<int>(std::ceil((v - u) / h_max)));
        const double h = (v - u) / m;
        for (int i = 0; i < m; ++i) {
            const double a = u + i * h;
            const double b = i + 1 == m ? v : a + h;
            const double w = b - a;
            const double mid = 0.5 * (a + b);
            if (cfg.quadrature_rule == QuadratureRule::simpson) {
                const double pa = f.p(a);
                const double pm = f.p(mid);
                const double pb = p_left(b);
                const double P1_mid = P1 + w / 12.0 * (pa + 4.0 * f.p(0.5 * (a + mid)) + pm);
                const double P1_b = P1_mid + w / 12.0 * (pm + 4.0 * f.p(0.5 * (mid + b)) + pb);
                P2 += w / 6.0 * (P1 + 4.0 * P1_mid + P1_b);
                P1 = P1_b;
            } else {
                const double P1_mid = P1 + 0.5 * w * f.p(0.5 * (a + mid));
                P2 += w * P1_mid;
                P1 += w * f.p(mid);
            }
        }
        u = v;
    }
    return {P1, P2};
}

} // namespace nstori::oracle
