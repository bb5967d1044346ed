#pragma once

#include <string>
#include <variant>
#include <vector>

namespace nstori {

/// Zero-average gate: |P1(T)| <= kAverageTolerance * T * sup|p|.
inline constexpr double kAverageTolerance = 1e-12;

/// One polynomial piece of a piecewise forcing. Coefficients act on the local
/// variable s = t - start, lowest degree first; the piece covers [start, next).
struct PolySegment {
    double start = 0.0;
    std::vector<double> coeffs;
};

/// Term sin_coeff * sin(k w t) + cos_coeff * cos(k w t), w = 2 pi / T.
/// k = 0 contributes the constant cos_coeff.
struct Harmonic {
    int k = 1;
    double sin_coeff = 0.0;
    double cos_coeff = 0.0;
};

enum class ForcingKind { piecewise, trig, table };

/// Exact antiderivative data built once per forcing.
struct PrimitiveCache {
    // Piecewise families: per-segment polynomials for p, P1, P2 (local variable).
    std::vector<std::vector<double>> p_coeffs;
    std::vector<std::vector<double>> P1_coeffs;
    std::vector<std::vector<double>> P2_coeffs;

    double P1_of_T = 0.0;
    double P2_of_T = 0.0;
    double M = 0.0;      // sup over [0, T] of |P1|
    double P1_min = 0.0; // extremes of P1 on [0, T]
    double P1_max = 0.0;
    double p_min = 0.0; // essential range of p
    double p_max = 0.0;
};

struct ForcingStats {
    double mean = 0.0;   // P1(T) / T
    double P2_of_T = 0.0;
    double M = 0.0;      // sup |P1|
};

/// A T-periodic forcing with exact evaluators for p, P1 and P2 on all of R.
/// Immutable after construction.
class PeriodicForcing {
public:
    static PeriodicForcing piecewise(std::string name, double period, std::vector<PolySegment> segments);
    static PeriodicForcing trig(std::string name, double period, std::vector<Harmonic> harmonics);
    /// Uniform samples at t_j = j T / N; order 0 holds each sample over its
    /// cell, order 1 interpolates linearly and wraps to the first sample.
    static PeriodicForcing table(std::string name, double period, std::vector<double> samples, int order);

    double p(double t) const;
    double P1(double t) const;
    double P2(double t) const;

    /// P1(t0 + t) - P1(t0), evaluated without forming the large absolute values.
    double P1_increment(double t0, double t) const;
    /// P2(t0 + t) - P2(t0).
    double P2_increment(double t0, double t) const;

    ForcingStats stats() const;
    bool has_zero_average() const;
    /// Throws NonZeroAverage unless has_zero_average().
    void require_zero_average() const;

    double period() const { return period_; }
    const std::string& name() const { return name_; }
    ForcingKind kind() const { return kind_; }
    const PrimitiveCache& cache() const { return cache_; }

    /// sup |p|, computed from the representation.
    double sup_abs_p() const;
    /// Points in [0, T) where p may be discontinuous (always includes 0).
    std::vector<double> breakpoints() const;

    const std::vector<PolySegment>& segments() const { return segments_; }
    const std::vector<Harmonic>& harmonics() const { return harmonics_; }
    const std::vector<double>& table_samples() const { return samples_; }
    int table_order() const { return table_order_; }

private:
    PeriodicForcing() = default;

    void build_piecewise_cache();
    void build_trig_cache();

    // Local representation on [0, T).
    double p_local(double r) const;
    double P1_local(double r) const;
    double P2_local(double r) const;
    std::size_t segment_index(double r) const;

    std::string name_;
    double period_ = 1.0;
    ForcingKind kind_ = ForcingKind::piecewise;
    std::vector<PolySegment> segments_;
    std::vector<Harmonic> harmonics_;
    std::vector<double> samples_;
    int table_order_ = 0;
    std::vector<double> segment_starts_;
    PrimitiveCache cache_;
};

/// Splits t into r + k T with r in [0, T).
struct PeriodReduction {
    double r;
    double k;
};
PeriodReduction reduce_period(double t, double period);

} // namespace nstori
