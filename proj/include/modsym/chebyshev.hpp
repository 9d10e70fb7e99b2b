#pragma once

#include <complex>
#include <vector>

namespace modsym {

// First-kind Chebyshev points mapped to (0,1), ascending, with barycentric
// weights, a differentiation matrix, Fejer quadrature weights, and the Taylor
// rows at x = 0 used by the operator tail completion.
struct ChebGrid {
    int32_t n = 0;
    std::vector<double> nodes;                  // ascending in (0,1)
    std::vector<double> bary;                   // barycentric weights
    std::vector<double> fejer;                  // quadrature weights on [0,1]
    std::vector<std::vector<double>> taylor0;   // taylor0[d][j] = L_j^{(d)}(0)/d!

    // barycentric coefficient row: f(y) = sum_j row[j] f(x_j)
    void eval_row(double y, double* row) const;
    double interpolate(const std::vector<double>& values, double y) const;
    std::complex<double> interpolate(const std::vector<std::complex<double>>& values,
                                     double y) const;
};

ChebGrid make_cheb_grid(int32_t n, int32_t taylor_degree);

}  // namespace modsym
