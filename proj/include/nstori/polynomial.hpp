#pragma once

#include <span>
#include <vector>

namespace nstori::poly {

// Dense polynomials stored lowest degree first: c[0] + c[1] s + c[2] s^2 + ...

double eval(std::span<const double> c, double s);

std::vector<double> derivative(std::span<const double> c);

/// Antiderivative vanishing at s = 0, shifted by `constant`.
std::vector<double> antiderivative(std::span<const double> c, double constant = 0.0);

/// Drops trailing zero coefficients (keeps at least one).
std::vector<double> trimmed(std::span<const double> c);

/// All real roots in [lo, hi], ascending. Roots are isolated between the
/// critical points of the polynomial (found recursively) and polished by
/// bisection. Identically zero polynomials report no roots.
std::vector<double> real_roots(std::span<const double> c, double lo, double hi);

} // namespace nstori::poly
