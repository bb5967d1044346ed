#include "nstori/certify.hpp"

#include "nstori/errors.hpp"
#include "nstori/flow.hpp"
#include "nstori/torus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nstori {

const char* to_string(CheckStatus s)
{
    switch (s) {
    case CheckStatus::pass:
        return "pass";
    case CheckStatus::fail:
        return "fail";
    case CheckStatus::inconclusive:
        return "inconclusive";
    }
    return "?";
}

const char* to_string(CertificationMethod m)
{
    switch (m) {
    case CertificationMethod::grid_lipschitz:
        return "grid-lipschitz";
    case CertificationMethod::analytic_bound:
        return "analytic-M-bound";
    case CertificationMethod::linf_proposition:
        return "linf-proposition";
    }
    return "?";
}

namespace {

void require_index(int n)
{
    if (n < 1) {
        throw std::invalid_argument("torus index must be a positive integer");
    }
}

double cond1_sup(const PeriodicForcing& f)
{
    const auto& c = f.cache();
    const double T = f.period();
    return std::max(std::abs(T * c.P1_max - c.P2_of_T), std::abs(T * c.P1_min - c.P2_of_T));
}

// State shared by the cond2 cell recursion.
class Cond2Checker {
public:
    Cond2Checker(const PeriodicForcing& f, int n, const GridOptions& opt)
        : f_(f), opt_(opt), T_(f.period()), L_(n * f.period()), P2T_(f.cache().P2_of_T), M_(f.cache().M),
          S_(cond1_sup(f)), m1_(n * T_ * T_ / 2.0 - S_),
          L_phi_(T_ * (f.cache().P1_max - f.cache().P1_min)),
          min_cell_(T_ / opt.max_resolution * (1.0 - 1e-9))
    {
        result_.grid_phi = opt.base_resolution;
        result_.grid_t = opt.base_resolution;
        result_.margin = std::numeric_limits<double>::infinity();
    }

    Cond2Result run()
    {
        const int t_cells = static_cast<int>(std::lround(L_ / T_)) * opt_.base_resolution;
        const double dt = L_ / t_cells;
        for (int i = 0; i < t_cells && !failed(); ++i) {
            const double a = i * dt;
            const double b = i + 1 == t_cells ? L_ : (i + 1) * dt;
            t_interval(a, b);
        }
        if (failed()) {
            result_.status = CheckStatus::fail;
        } else if (inconclusive_) {
            result_.status = CheckStatus::inconclusive;
        } else {
            result_.status = CheckStatus::pass;
        }
        if (!std::isfinite(result_.margin)) {
            result_.margin = 0.0;
        }
        return result_;
    }

private:
    double h(double t) const { return 0.5 * T_ * t * (L_ - t); }

    double abs_f(double phi, double t) const { return std::abs(t * P2T_ - T_ * f_.P2_increment(phi, t)); }

    bool failed() const { return result_.witness.has_value(); }

    // phi-independent lower bound of h - |f| over [a, b]; each candidate is
    // concave in t, so its minimum sits at an endpoint. Edge cells touching
    // t = 0 or t = L are certified through the slope factor of the
    // bounds that vanish there.
    bool analytic(double a, double b)
    {
        const double T = T_;
        const double L = L_;
        const double slack = opt_.strict_slack;
        if (a == 0.0) {
            const double slope = std::max(m1_ - T * b / 2.0, 0.5 * T * (L - b) - 2.0 * T * M_);
            return slope >= slack;
        }
        if (b == L) {
            const double slope = std::max(m1_ - T * (L - a) / 2.0, 0.5 * T * a - 2.0 * T * M_);
            return slope >= slack;
        }
        auto left_S = [&](double t) { return t * (m1_ - T * t / 2.0); };
        auto right_S = [&](double t) { return left_S(L - t); };
        auto const_S = [&](double t) { return h(t) - S_ * T / 2.0; };
        auto left_M = [&](double t) { return t * (0.5 * T * (L - t) - 2.0 * T * M_); };
        auto right_M = [&](double t) { return (L - t) * (0.5 * T * t - 2.0 * T * M_); };
        auto const_M = [&](double t) { return h(t) - 2.0 * T * T * M_; };
        double lb = -std::numeric_limits<double>::infinity();
        auto take = [&](auto&& g) { lb = std::max(lb, std::min(g(a), g(b))); };
        take(left_S);
        take(right_S);
        take(const_S);
        take(left_M);
        take(right_M);
        take(const_M);
        if (lb >= slack) {
            result_.margin = std::min(result_.margin, lb);
            return true;
        }
        return false;
    }

    void t_interval(double a, double b)
    {
        if (analytic(a, b)) {
            ++result_.analytic_cells;
            return;
        }
        const bool edge = a == 0.0 || b == L_;
        if (edge) {
            // Only the analytic slope bounds can certify up to the endpoint;
            // split off the inner half for the grid.
            if ((b - a) / 2.0 < min_cell_) {
                inconclusive_ = true;
                return;
            }
            const double mid = 0.5 * (a + b);
            if (a == 0.0) {
                t_interval(a, mid);
                if (!failed()) {
                    grid_row(mid, b);
                }
            } else {
                grid_row(a, mid);
                if (!failed()) {
                    t_interval(mid, b);
                }
            }
            return;
        }
        grid_row(a, b);
    }

    void grid_row(double a, double b)
    {
        const int cells = opt_.base_resolution;
        const double dphi = T_ / cells;
        for (int j = 0; j < cells && !failed(); ++j) {
            grid_cell(a, b, j * dphi, (j + 1) * dphi);
        }
    }

    void grid_cell(double ta, double tb, double pa, double pb)
    {
        ++result_.grid_cells;
        const double tc = 0.5 * (ta + tb);
        const double pc = 0.5 * (pa + pb);
        const double g = h(tc) - abs_f(pc, tc);
        if (g <= 0.0) {
            result_.witness = std::pair{pc, tc};
            return;
        }
        const double dh = 0.5 * T_ * std::max(std::abs(L_ - 2.0 * ta), std::abs(L_ - 2.0 * tb));
        const double L_t = dh + S_;
        result_.lipschitz_bound_used = std::max({result_.lipschitz_bound_used, L_t, L_phi_});
        const double lb = g - 0.5 * (L_t * (tb - ta) + L_phi_ * (pb - pa));
        const int resolution = static_cast<int>(std::lround(T_ / (tb - ta)));
        result_.finest_resolution = std::max(result_.finest_resolution, resolution);
        if (lb >= opt_.strict_slack) {
            result_.margin = std::min(result_.margin, lb);
            return;
        }
        if ((tb - ta) / 2.0 < min_cell_) {
            inconclusive_ = true;
            return;
        }
        const double tm = tc;
        const double pm = pc;
        for (const auto& [t0, t1, p0, p1] : std::array<std::array<double, 4>, 4>{
                 {{ta, tm, pa, pm}, {ta, tm, pm, pb}, {tm, tb, pa, pm}, {tm, tb, pm, pb}}}) {
            if (failed()) {
                return;
            }
            grid_cell(t0, t1, p0, p1);
        }
    }

    const PeriodicForcing& f_;
    GridOptions opt_;
    double T_, L_, P2T_, M_, S_, m1_, L_phi_, min_cell_;
    bool inconclusive_ = false;
    Cond2Result result_;
};

} // namespace

Cond1Result check_cond1(const PeriodicForcing& f, int n)
{
    require_index(n);
    f.require_zero_average();
    const double T = f.period();
    const double sup = cond1_sup(f);
    const double margin = n * T * T / 2.0 - sup;
    return {margin >= GridOptions{}.strict_slack, margin, sup};
}

Cond2Result check_cond2(const PeriodicForcing& f, int n, const GridOptions& options)
{
    require_index(n);
    f.require_zero_average();
    if (options.base_resolution < 1 || options.max_resolution < options.base_resolution) {
        throw std::invalid_argument("invalid grid resolution");
    }
    return Cond2Checker(f, n, options).run();
}

CertificationReport certify(const PeriodicForcing& f, int n, const GridOptions& options)
{
    CertificationReport report;
    report.forcing_name = f.name();
    report.n = n;
    report.cond1 = check_cond1(f, n);
    report.cond2 = check_cond2(f, n, options);
    report.method = report.cond2.grid_cells > 0 ? CertificationMethod::grid_lipschitz : CertificationMethod::analytic_bound;
    report.certified = report.cond1.pass && report.cond2.pass();
    return report;
}

MinimalIndexResult find_min_certified_n(const PeriodicForcing& f, int n_max, const GridOptions& options)
{
    f.require_zero_average();
    MinimalIndexResult out;
    auto certified = [&](int n) {
        out.probed.push_back(n);
        return certify(f, n, options).certified;
    };

    constexpr int kLinearLimit = 16;
    const int linear_end = std::min(n_max, kLinearLimit);
    for (int n = 1; n <= linear_end; ++n) {
        if (certified(n)) {
            out.n_min = n;
            break;
        }
    }

    if (!out.n_min && n_max > linear_end) {
        // Doubling probes from the first index passing cond1, as in the
        // existence argument, then bisect back assuming upward persistence.
        const double T = f.period();
        const int n0 = std::max(1, static_cast<int>(std::floor(cond1_sup(f) / (T * T / 2.0))) + 1);
        std::vector<int> probes;
        for (long long p = n0; p <= n_max; p *= 2) {
            if (p > linear_end) {
                probes.push_back(static_cast<int>(p));
            }
        }
        if (probes.empty() || probes.back() != n_max) {
            probes.push_back(n_max);
        }
        int lo = linear_end; // largest index known to fail
        for (int p : probes) {
            if (certified(p)) {
                int hi = p;
                while (hi - lo > 1) {
                    const int mid = lo + (hi - lo) / 2;
                    if (certified(mid)) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                out.n_min = hi;
                break;
            }
            lo = p;
        }
    }

    if (out.n_min) {
        out.extends_upward = true;
        for (int k = 1; k <= 3; ++k) {
            if (!certified(*out.n_min + k)) {
                out.extends_upward = false;
            }
        }
    }
    return out;
}

int linf_certificate(const PeriodicForcing& f, double M_bound)
{
    const double sup = f.sup_abs_p();
    if (!std::isfinite(sup)) {
        throw UnboundedRepresentation("sup|p| cannot be bounded from the representation");
    }
    if (!(sup < M_bound)) {
        throw std::invalid_argument("sup|p| = " + std::to_string(sup) + " is not below the given bound");
    }
    return std::max(1, static_cast<int>(std::ceil(M_bound)));
}

CertificationReport certify_linf(const PeriodicForcing& f, int n, double M_bound)
{
    const int threshold = linf_certificate(f, M_bound);
    if (n < threshold) {
        throw std::invalid_argument("index below the L-infinity threshold " + std::to_string(threshold));
    }
    CertificationReport report;
    report.forcing_name = f.name();
    report.n = n;
    report.cond1 = check_cond1(f, n);
    report.cond2.status = CheckStatus::pass;
    // The proposition gives no quantitative slack.
    report.cond2.margin = std::numeric_limits<double>::quiet_NaN();
    report.method = CertificationMethod::linf_proposition;
    report.certified = report.cond1.pass;
    return report;
}

InvarianceReport verify_invariance(const PeriodicForcing& f, int n, int phi_samples)
{
    f.require_zero_average();
    const TorusSpec spec(f, n);
    const double T = f.period();
    const double span = n * T;

    InvarianceReport rep;
    rep.n = n;
    rep.phi_samples = phi_samples;
    bool ok = true;
    for (int k = 0; k < phi_samples; ++k) {
        const double phi0 = T * k / phi_samples;
        for (Branch side : {Branch::plus, Branch::minus}) {
            const State start{phi0, 0.0, boundary_y(spec, side, phi0)};

            const auto first = next_crossing(f, side, start, span + T);
            if (!first) {
                ok = false;
                rep.rel1_max_early = std::max(rep.rel1_max_early, std::numeric_limits<double>::infinity());
                continue;
            }
            rep.rel1_max_early = std::max(rep.rel1_max_early, span - *first);

            const State landed = flow_branch(f, side, span, start);
            const double target_y = boundary_y(spec, opposite(side), phi0);
            rep.rel2_max_defect =
                std::max({rep.rel2_max_defect, std::abs(landed.x), std::abs(landed.y - target_y),
                          std::abs(landed.phi - (phi0 + span))});

            const State back = evolve(f, start, 2.0 * span).final_state();
            rep.return_max_defect =
                std::max({rep.return_max_defect, std::abs(back.x), std::abs(back.y - start.y),
                          std::abs(back.phi - (phi0 + 2.0 * span))});
        }
    }
    rep.passed = ok && rep.rel1_max_early <= kInvarianceTolerance && rep.rel2_max_defect <= kInvarianceTolerance &&
                 rep.return_max_defect <= kInvarianceTolerance;
    return rep;
}

} // namespace nstori
