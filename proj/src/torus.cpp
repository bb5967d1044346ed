#include "nstori/torus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nstori {

TorusSpec::TorusSpec(const PeriodicForcing& forcing, int n) : forcing_(&forcing), n_(n)
{
    if (n < 1) {
        throw std::invalid_argument("torus index must be a positive integer");
    }
}

double boundary_y(const TorusSpec& spec, Branch side, double phi0)
{
    const auto& f = spec.forcing();
    const double T = f.period();
    return branch_sign(side) * spec.n() * T / 2.0 + f.P1(phi0) - f.cache().P2_of_T / T;
}

double chart_x(const TorusSpec& spec, Branch side, double phi0, double y0)
{
    const auto& f = spec.forcing();
    const double s = branch_sign(side);
    const double T = f.period();
    const double n = spec.n();
    const double P2T = f.cache().P2_of_T;
    const double P1 = f.P1(phi0);
    const double arg = n * T / 2.0 + s * y0 - s * P1 + s * P2T / T + phi0;
    return (s * n * n * T * T - s * 4.0 * y0 * y0 - 8.0 * f.P2(arg) + 4.0 * P2T * (n + s * P2T / (T * T)) -
            4.0 * P1 * (s * P1 - s * 2.0 * y0) + 8.0 * f.P2(phi0)) /
           8.0;
}

double closure_check(const TorusSpec& spec, int y_points)
{
    const double T = spec.period();
    const double lo = boundary_y(spec, Branch::minus, 0.0);
    const double hi = boundary_y(spec, Branch::plus, 0.0);
    double worst = 0.0;
    for (int j = 0; j < y_points; ++j) {
        const double y0 = y_points == 1 ? lo : lo + (hi - lo) * j / (y_points - 1);
        for (Branch side : {Branch::plus, Branch::minus}) {
            worst = std::max(worst, std::abs(chart_x(spec, side, 0.0, y0) - chart_x(spec, side, T, y0)));
        }
    }
    return worst;
}

TorusMesh build_mesh(const TorusSpec& spec, int n_phi, int n_y)
{
    if (n_phi < 2 || n_y < 2) {
        throw std::invalid_argument("mesh resolution must be at least 2x2");
    }
    const double T = spec.period();
    TorusMesh mesh{n_phi, n_y, {}, {}};
    mesh.plus.reserve(static_cast<std::size_t>(n_phi * n_y));
    mesh.minus.reserve(static_cast<std::size_t>(n_phi * n_y));
    for (int i = 0; i < n_phi; ++i) {
        const double phi = T * i / (n_phi - 1);
        const double lo = boundary_y(spec, Branch::minus, phi);
        const double hi = boundary_y(spec, Branch::plus, phi);
        for (int j = 0; j < n_y; ++j) {
            // Pin the strip ends exactly so the charts meet on x = 0.
            const double y = j == 0 ? lo : (j == n_y - 1 ? hi : lo + (hi - lo) * j / (n_y - 1));
            mesh.plus.push_back({i, j, phi, chart_x(spec, Branch::plus, phi, y), y});
            mesh.minus.push_back({i, j, phi, chart_x(spec, Branch::minus, phi, y), y});
        }
    }
    return mesh;
}

Containment contains(const TorusSpec& spec, const State& s)
{
    const double phi = reduce_period(s.phi, spec.period()).r;
    const double lo = boundary_y(spec, Branch::minus, phi);
    const double hi = boundary_y(spec, Branch::plus, phi);
    const double dy = std::min(s.y - lo, hi - s.y);
    if (dy < -kSurfaceTolerance) {
        return Containment::outside;
    }
    const double dx = std::min(s.x - chart_x(spec, Branch::minus, phi, s.y), chart_x(spec, Branch::plus, phi, s.y) - s.x);
    if (dx < -kSurfaceTolerance) {
        return Containment::outside;
    }
    if (dy > kSurfaceTolerance && dx > kSurfaceTolerance) {
        return Containment::inside;
    }
    return Containment::on;
}

bool nesting_check(const TorusSpec& inner, const TorusSpec& outer, int n_phi, int n_y)
{
    const auto mesh = build_mesh(inner, n_phi, n_y);
    for (const auto* chart : {&mesh.plus, &mesh.minus}) {
        for (const auto& v : *chart) {
            if (contains(outer, {v.phi, v.x, v.y}) == Containment::outside) {
                return false;
            }
        }
    }
    return true;
}

std::optional<int> smallest_enclosing_index(const PeriodicForcing& forcing, const State& s, int n_max)
{
    for (int n = 1; n <= n_max; ++n) {
        if (contains(TorusSpec(forcing, n), s) == Containment::inside) {
            return n;
        }
    }
    return std::nullopt;
}

double surface_consistency_defect(const TorusSpec& spec, Branch side, double phi0, int samples)
{
    const auto& f = spec.forcing();
    const State start{phi0, 0.0, boundary_y(spec, side, phi0)};
    const double span = spec.n() * spec.period();
    double worst = 0.0;
    for (int k = 0; k <= samples; ++k) {
        const double t = span * k / samples;
        const State s = flow_branch(f, side, t, start);
        worst = std::max(worst, std::abs(s.x - chart_x(spec, side, s.phi, s.y)));
    }
    return worst;
}

} // namespace nstori
