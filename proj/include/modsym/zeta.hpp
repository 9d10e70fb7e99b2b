#pragma once

#include <complex>

namespace modsym {

using cdouble = std::complex<double>;

// Hurwitz zeta sum_{j >= 0} (a + j)^{-z} for a > 0, Re z > 1, by
// Euler-Maclaurin with a shifted start.  Absolute error target ~1e-15 for
// moderate |z|.
cdouble hurwitz_zeta(cdouble z, double a);

// Value and z-derivative in one pass (the derivative feeds analytic dL/ds).
void hurwitz_zeta_with_dz(cdouble z, double a, cdouble& value, cdouble& dz);

cdouble riemann_zeta(cdouble z);

}  // namespace modsym
