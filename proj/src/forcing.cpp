#include "nstori/forcing.hpp"

#include "nstori/errors.hpp"
#include "nstori/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>

namespace nstori {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw ConfigError(std::string("non-finite value in ") + what);
    }
}

// Trig polynomial c0 + sum a_k sin(k w t) + b_k cos(k w t).
struct TrigPoly {
    double omega = kTwoPi;
    double c0 = 0.0;
    std::vector<Harmonic> terms; // k >= 1, merged, sorted by k

    double operator()(double t) const
    {
        double v = c0;
        for (const auto& h : terms) {
            const double arg = h.k * omega * t;
            v += h.sin_coeff * std::sin(arg) + h.cos_coeff * std::cos(arg);
        }
        return v;
    }

    TrigPoly derivative() const
    {
        TrigPoly d{omega, 0.0, {}};
        for (const auto& h : terms) {
            const double kw = h.k * omega;
            d.terms.push_back({h.k, -h.cos_coeff * kw, h.sin_coeff * kw});
        }
        return d;
    }

    int degree() const
    {
        int K = 0;
        for (const auto& h : terms) {
            if (h.sin_coeff != 0.0 || h.cos_coeff != 0.0) {
                K = std::max(K, h.k);
            }
        }
        return K;
    }
};

double bisect_fn(const TrigPoly& f, double a, double b)
{
    double fa = f(a);
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) {
            break;
        }
        const double fm = f(m);
        if (fm == 0.0) {
            return m;
        }
        if ((fa < 0.0) == (fm < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Zeros of a trig polynomial on [0, T). The substitution z = exp(i w t) turns
// z^K f into an algebraic polynomial of degree 2K whose unimodular roots are
// the zeros of f; those are recovered from the companion matrix spectrum and
// merged with a sign-change scan.
std::vector<double> trig_zeros(const TrigPoly& f, double period)
{
    const int K = f.degree();
    if (K == 0) {
        return {};
    }
    std::vector<std::complex<double>> coef(2 * K + 1, {0.0, 0.0});
    coef[K] = f.c0;
    for (const auto& h : f.terms) {
        if (h.k > K) {
            continue;
        }
        coef[K + h.k] += std::complex<double>(h.cos_coeff, -h.sin_coeff) * 0.5;
        coef[K - h.k] += std::complex<double>(h.cos_coeff, h.sin_coeff) * 0.5;
    }

    const int deg = 2 * K;
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) {
        companion(i, i - 1) = 1.0;
    }
    for (int i = 0; i < deg; ++i) {
        companion(i, deg - 1) = -coef[i] / coef[deg];
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);

    double scale = std::abs(f.c0);
    for (const auto& h : f.terms) {
        scale += std::abs(h.sin_coeff) + std::abs(h.cos_coeff);
    }
    const auto df = f.derivative();

    std::vector<double> candidates;
    for (const auto& z : solver.eigenvalues()) {
        if (std::abs(std::abs(z) - 1.0) > 1e-5) {
            continue;
        }
        double t = std::arg(z) / f.omega;
        if (t < 0.0) {
            t += period;
        }
        for (int it = 0; it < 8; ++it) {
            const double d = df(t);
            if (d == 0.0) {
                break;
            }
            const double step = f(t) / d;
            if (!std::isfinite(step) || std::abs(step) > period / (4.0 * K)) {
                break;
            }
            t -= step;
        }
        t = std::fmod(t, period);
        if (t < 0.0) {
            t += period;
        }
        if (std::abs(f(t)) <= 1e-9 * scale) {
            candidates.push_back(t);
        }
    }

    const int samples = 256 * K;
    const double h = period / samples;
    double prev = f(0.0);
    if (prev == 0.0) {
        candidates.push_back(0.0);
    }
    for (int j = 1; j <= samples; ++j) {
        const double t = j * h;
        const double cur = f(t);
        if (cur != 0.0 && prev != 0.0 && (cur < 0.0) != (prev < 0.0)) {
            candidates.push_back(bisect_fn(f, t - h, t));
        }
        prev = cur;
    }

    std::sort(candidates.begin(), candidates.end());
    std::vector<double> roots;
    for (double c : candidates) {
        if (c >= period) {
            c -= period;
        }
        if (roots.empty() || c - roots.back() > 1e-12 * period) {
            roots.push_back(c);
        }
    }
    return roots;
}

TrigPoly make_trig(double period, const std::vector<Harmonic>& harmonics)
{
    std::map<int, Harmonic> merged;
    TrigPoly f;
    f.omega = kTwoPi / period;
    for (const auto& h : harmonics) {
        if (h.k < 0) {
            throw ConfigError("harmonic index must be non-negative");
        }
        check_finite(h.sin_coeff, "harmonic");
        check_finite(h.cos_coeff, "harmonic");
        if (h.k == 0) {
            f.c0 += h.cos_coeff;
            continue;
        }
        auto& m = merged[h.k];
        m.k = h.k;
        m.sin_coeff += h.sin_coeff;
        m.cos_coeff += h.cos_coeff;
    }
    for (const auto& [k, h] : merged) {
        f.terms.push_back(h);
    }
    return f;
}

} // namespace

PeriodReduction reduce_period(double t, double period)
{
    double k = std::floor(t / period);
    double r = t - k * period;
    if (r >= period) {
        r -= period;
        k += 1.0;
    }
    if (r < 0.0) {
        r = 0.0;
    }
    return {r, k};
}

PeriodicForcing PeriodicForcing::piecewise(std::string name, double period, std::vector<PolySegment> segments)
{
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw ConfigError("period must be a positive finite number");
    }
    if (segments.empty()) {
        throw ConfigError("piecewise forcing needs at least one segment");
    }
    if (segments.front().start != 0.0) {
        throw ConfigError("first breakpoint must be 0");
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
        check_finite(segments[i].start, "breakpoint");
        if (segments[i].coeffs.empty()) {
            segments[i].coeffs = {0.0};
        }
        for (double c : segments[i].coeffs) {
            check_finite(c, "polynomial coefficients");
        }
        if (i > 0 && !(segments[i].start > segments[i - 1].start)) {
            throw ConfigError("breakpoints must be strictly increasing");
        }
    }
    if (!(segments.back().start < period)) {
        throw ConfigError("last breakpoint must lie below the period");
    }

    PeriodicForcing f;
    f.name_ = std::move(name);
    f.period_ = period;
    f.kind_ = ForcingKind::piecewise;
    f.segments_ = std::move(segments);
    f.build_piecewise_cache();
    return f;
}

PeriodicForcing PeriodicForcing::table(std::string name, double period, std::vector<double> samples, int order)
{
    if (samples.empty()) {
        throw ConfigError("table forcing needs at least one sample");
    }
    if (order != 0 && order != 1) {
        throw ConfigError("table interpolation order must be 0 or 1");
    }
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw ConfigError("period must be a positive finite number");
    }
    const auto n = samples.size();
    const double h = period / static_cast<double>(n);
    std::vector<PolySegment> segments;
    segments.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        check_finite(samples[j], "table samples");
        const double start = static_cast<double>(j) * h;
        if (order == 0) {
            segments.push_back({start, {samples[j]}});
        } else {
            const double next = samples[(j + 1) % n];
            segments.push_back({start, {samples[j], (next - samples[j]) / h}});
        }
    }
    auto f = piecewise(std::move(name), period, std::move(segments));
    f.kind_ = ForcingKind::table;
    f.samples_ = std::move(samples);
    f.table_order_ = order;
    return f;
}

PeriodicForcing PeriodicForcing::trig(std::string name, double period, std::vector<Harmonic> harmonics)
{
    if (!(period > 0.0) || !std::isfinite(period)) {
        throw ConfigError("period must be a positive finite number");
    }
    PeriodicForcing f;
    f.name_ = std::move(name);
    f.period_ = period;
    f.kind_ = ForcingKind::trig;
    const auto poly = make_trig(period, harmonics);
    f.harmonics_.push_back({0, 0.0, poly.c0});
    for (const auto& h : poly.terms) {
        f.harmonics_.push_back(h);
    }
    f.build_trig_cache();
    return f;
}

void PeriodicForcing::build_piecewise_cache()
{
    auto& c = cache_;
    const auto n = segments_.size();
    segment_starts_.clear();
    for (const auto& s : segments_) {
        segment_starts_.push_back(s.start);
    }

    double P1_start = 0.0;
    double P2_start = 0.0;
    c.P1_min = c.P1_max = 0.0;
    c.p_min = std::numeric_limits<double>::infinity();
    c.p_max = -std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < n; ++i) {
        const double length = (i + 1 < n ? segments_[i + 1].start : period_) - segments_[i].start;
        auto p = poly::trimmed(segments_[i].coeffs);
        auto P1 = poly::antiderivative(p, P1_start);
        auto P2 = poly::antiderivative(P1, P2_start);

        std::vector<double> p1_candidates{0.0, length};
        for (double r : poly::real_roots(p, 0.0, length)) {
            p1_candidates.push_back(r);
        }
        for (double s : p1_candidates) {
            const double v = poly::eval(P1, s);
            c.P1_min = std::min(c.P1_min, v);
            c.P1_max = std::max(c.P1_max, v);
        }

        std::vector<double> p_candidates{0.0, length};
        for (double r : poly::real_roots(poly::derivative(p), 0.0, length)) {
            p_candidates.push_back(r);
        }
        for (double s : p_candidates) {
            const double v = poly::eval(p, s);
            c.p_min = std::min(c.p_min, v);
            c.p_max = std::max(c.p_max, v);
        }

        P1_start = poly::eval(P1, length);
        P2_start = poly::eval(P2, length);
        c.p_coeffs.push_back(std::move(p));
        c.P1_coeffs.push_back(std::move(P1));
        c.P2_coeffs.push_back(std::move(P2));
    }
    c.P1_of_T = P1_start;
    c.P2_of_T = P2_start;
    c.M = std::max(std::abs(c.P1_min), std::abs(c.P1_max));
}

void PeriodicForcing::build_trig_cache()
{
    auto& c = cache_;
    const auto f = make_trig(period_, harmonics_);
    const double T = period_;

    c.P1_of_T = f.c0 * T;
    c.P2_of_T = f.c0 * T * T / 2.0;
    for (const auto& h : f.terms) {
        c.P2_of_T += h.sin_coeff * T / (h.k * f.omega);
    }

    c.P1_min = c.P1_max = 0.0;
    for (double t : trig_zeros(f, T)) {
        const double v = P1_local(t);
        c.P1_min = std::min(c.P1_min, v);
        c.P1_max = std::max(c.P1_max, v);
    }
    const double end = P1_local(T);
    c.P1_min = std::min(c.P1_min, end);
    c.P1_max = std::max(c.P1_max, end);
    c.M = std::max(std::abs(c.P1_min), std::abs(c.P1_max));

    c.p_min = c.p_max = f(0.0);
    for (double t : trig_zeros(f.derivative(), T)) {
        const double v = f(t);
        c.p_min = std::min(c.p_min, v);
        c.p_max = std::max(c.p_max, v);
    }
}

std::size_t PeriodicForcing::segment_index(double r) const
{
    const auto it = std::upper_bound(segment_starts_.begin(), segment_starts_.end(), r);
    return it == segment_starts_.begin() ? 0 : static_cast<std::size_t>(it - segment_starts_.begin() - 1);
}

double PeriodicForcing::p_local(double r) const
{
    if (kind_ == ForcingKind::trig) {
        double v = 0.0;
        const double omega = kTwoPi / period_;
        for (const auto& h : harmonics_) {
            const double arg = h.k * omega * r;
            v += h.k == 0 ? h.cos_coeff : h.sin_coeff * std::sin(arg) + h.cos_coeff * std::cos(arg);
        }
        return v;
    }
    const auto i = segment_index(r);
    return poly::eval(cache_.p_coeffs[i], r - segment_starts_[i]);
}

double PeriodicForcing::P1_local(double r) const
{
    if (kind_ == ForcingKind::trig) {
        double v = 0.0;
        const double omega = kTwoPi / period_;
        for (const auto& h : harmonics_) {
            if (h.k == 0) {
                v += h.cos_coeff * r;
                continue;
            }
            const double kw = h.k * omega;
            v += (h.sin_coeff * (1.0 - std::cos(kw * r)) + h.cos_coeff * std::sin(kw * r)) / kw;
        }
        return v;
    }
    const auto i = segment_index(r);
    return poly::eval(cache_.P1_coeffs[i], r - segment_starts_[i]);
}

double PeriodicForcing::P2_local(double r) const
{
    if (kind_ == ForcingKind::trig) {
        double v = 0.0;
        const double omega = kTwoPi / period_;
        for (const auto& h : harmonics_) {
            if (h.k == 0) {
                v += h.cos_coeff * r * r / 2.0;
                continue;
            }
            const double kw = h.k * omega;
            v += (h.sin_coeff * (r - std::sin(kw * r) / kw) + h.cos_coeff * (1.0 - std::cos(kw * r)) / kw) / kw;
        }
        return v;
    }
    const auto i = segment_index(r);
    return poly::eval(cache_.P2_coeffs[i], r - segment_starts_[i]);
}

double PeriodicForcing::p(double t) const
{
    return p_local(reduce_period(t, period_).r);
}

double PeriodicForcing::P1(double t) const
{
    const auto [r, k] = reduce_period(t, period_);
    return P1_local(r) + k * cache_.P1_of_T;
}

double PeriodicForcing::P2(double t) const
{
    const auto [r, k] = reduce_period(t, period_);
    const double P1T = cache_.P1_of_T;
    return P2_local(r) + k * P1T * r + 0.5 * (k * k - k) * period_ * P1T + k * cache_.P2_of_T;
}

double PeriodicForcing::P1_increment(double t0, double t) const
{
    const auto [r0, k0] = reduce_period(t0, period_);
    return P1(r0 + t) - P1_local(r0);
}

double PeriodicForcing::P2_increment(double t0, double t) const
{
    const auto [r0, k0] = reduce_period(t0, period_);
    return P2(r0 + t) - P2_local(r0) + k0 * cache_.P1_of_T * t;
}

ForcingStats PeriodicForcing::stats() const
{
    return {cache_.P1_of_T / period_, cache_.P2_of_T, cache_.M};
}

double PeriodicForcing::sup_abs_p() const
{
    return std::max(std::abs(cache_.p_min), std::abs(cache_.p_max));
}

bool PeriodicForcing::has_zero_average() const
{
    return std::abs(cache_.P1_of_T) <= kAverageTolerance * period_ * sup_abs_p();
}

void PeriodicForcing::require_zero_average() const
{
    if (!has_zero_average()) {
        throw NonZeroAverage("forcing '" + name_ + "' has average " + std::to_string(stats().mean) +
                             "; the torus construction needs a zero-average forcing");
    }
}

std::vector<double> PeriodicForcing::breakpoints() const
{
    if (kind_ == ForcingKind::trig) {
        return {0.0};
    }
    return segment_starts_;
}

} // namespace nstori
