#pragma once

#include "nstori/flow.hpp"
#include "nstori/forcing.hpp"

#include <optional>
#include <vector>

namespace nstori {

/// Candidate torus of index n for a zero-average forcing: the union of the
/// graphs x = chart_x(+, phi, y) >= 0 and x = chart_x(-, phi, y) <= 0 over the
/// strip boundary_y(-, phi) <= y <= boundary_y(+, phi).
class TorusSpec {
public:
    TorusSpec(const PeriodicForcing& forcing, int n);

    int n() const { return n_; }
    const PeriodicForcing& forcing() const { return *forcing_; }
    double period() const { return forcing_->period(); }

private:
    const PeriodicForcing* forcing_;
    int n_;
};

/// y_n^{+/-}(phi0) = +/- nT/2 + P1(phi0) - P2(T)/T, the curves where the torus meets x = 0.
double boundary_y(const TorusSpec& spec, Branch side, double phi0);

/// Chart height Psi_n^{+/-}(phi0, y0). Evaluates outside the strip too.
double chart_x(const TorusSpec& spec, Branch side, double phi0, double y0);

/// max over a y0 grid on [y^-(0), y^+(0)] and both charts of |Psi(0, y0) - Psi(T, y0)|.
double closure_check(const TorusSpec& spec, int y_points = 256);

struct MeshVertex {
    int i = 0;
    int j = 0;
    double phi = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Both charts sampled on phi_i = i T / (n_phi - 1) and y = y^- + u_j (y^+ - y^-),
/// u_j = j / (n_y - 1). Vertices are stored row-major in i.
struct TorusMesh {
    int n_phi = 0;
    int n_y = 0;
    std::vector<MeshVertex> plus;
    std::vector<MeshVertex> minus;

    const MeshVertex& vertex(Branch side, int i, int j) const
    {
        return (side == Branch::plus ? plus : minus)[static_cast<std::size_t>(i * n_y + j)];
    }
};

TorusMesh build_mesh(const TorusSpec& spec, int n_phi, int n_y);

enum class Containment { inside, on, outside };

inline constexpr double kSurfaceTolerance = 1e-9;

Containment contains(const TorusSpec& spec, const State& s);

/// Every mesh vertex of `inner` lies inside or on `outer` at the same phi.
bool nesting_check(const TorusSpec& inner, const TorusSpec& outer, int n_phi = 64, int n_y = 64);

/// Smallest n <= n_max whose torus strictly contains s.
std::optional<int> smallest_enclosing_index(const PeriodicForcing& forcing, const State& s, int n_max = 64);

/// Largest |x(t) - Psi(phi(t), y(t))| along the lateral flow from the
/// boundary curve point (phi0, 0, y^{side}(phi0)) sampled at `samples`
/// times in [0, nT]. Checks the chart formula against the flow directly.
double surface_consistency_defect(const TorusSpec& spec, Branch side, double phi0, int samples = 64);

} // namespace nstori
