#include "nstori/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace nstori::poly {

double eval(std::span<const double> c, double s)
{
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * s + *it;
    }
    return acc;
}

std::vector<double> derivative(std::span<const double> c)
{
    if (c.size() <= 1) {
        return {0.0};
    }
    std::vector<double> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) {
        d[k - 1] = static_cast<double>(k) * c[k];
    }
    return d;
}

std::vector<double> antiderivative(std::span<const double> c, double constant)
{
    std::vector<double> a(c.size() + 1);
    a[0] = constant;
    for (std::size_t k = 0; k < c.size(); ++k) {
        a[k + 1] = c[k] / static_cast<double>(k + 1);
    }
    return a;
}

std::vector<double> trimmed(std::span<const double> c)
{
    std::vector<double> out(c.begin(), c.end());
    while (out.size() > 1 && out.back() == 0.0) {
        out.pop_back();
    }
    if (out.empty()) {
        out.push_back(0.0);
    }
    return out;
}

namespace {

double bisect(std::span<const double> c, double a, double b)
{
    double fa = eval(c, a);
    for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) {
            break;
        }
        const double fm = eval(c, m);
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

} // namespace

std::vector<double> real_roots(std::span<const double> c_in, double lo, double hi)
{
    const auto c = trimmed(c_in);
    const auto degree = c.size() - 1;
    if (degree == 0 || hi < lo) {
        return {};
    }
    if (degree == 1) {
        const double r = -c[0] / c[1];
        if (r >= lo && r <= hi) {
            return {r};
        }
        return {};
    }

    std::vector<double> knots{lo};
    for (double r : real_roots(derivative(c), lo, hi)) {
        if (r > knots.back()) {
            knots.push_back(r);
        }
    }
    if (hi > knots.back()) {
        knots.push_back(hi);
    }

    double scale = 0.0;
    for (double v : c) {
        scale = std::max(scale, std::abs(v));
    }
    const double zero_tol = 1e-14 * scale;

    // Between consecutive knots the polynomial is monotone, so each piece holds
    // at most one root. Knots at which the value vanishes are roots themselves
    // (double roots included).
    std::vector<double> roots;
    auto push = [&roots](double r) {
        if (roots.empty() || r > roots.back()) {
            roots.push_back(r);
        }
    };
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const double fk = eval(c, knots[i]);
        if (std::abs(fk) <= zero_tol) {
            push(knots[i]);
            continue;
        }
        if (i + 1 < knots.size()) {
            const double fn = eval(c, knots[i + 1]);
            if (std::abs(fn) > zero_tol && (fk < 0.0) != (fn < 0.0)) {
                push(bisect(c, knots[i], knots[i + 1]));
            }
        }
    }
    return roots;
}

} // namespace nstori::poly
