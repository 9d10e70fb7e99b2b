#include "modsym/chebyshev.hpp"

#include <cmath>
#include <stdexcept>

namespace modsym {

void ChebGrid::eval_row(double y, double* row) const {
    for (int32_t j = 0; j < n; ++j) {
        if (std::abs(y - nodes[size_t(j)]) < 1e-300) {
            for (int32_t i = 0; i < n; ++i) row[i] = (i == j) ? 1.0 : 0.0;
            return;
        }
    }
    double denom = 0;
    for (int32_t j = 0; j < n; ++j) {
        row[j] = bary[size_t(j)] / (y - nodes[size_t(j)]);
        denom += row[j];
    }
    for (int32_t j = 0; j < n; ++j) row[j] /= denom;
}

double ChebGrid::interpolate(const std::vector<double>& values, double y) const {
    std::vector<double> row(size_t(n), 0.0);
    eval_row(y, row.data());
    double s = 0;
    for (int32_t j = 0; j < n; ++j) s += row[size_t(j)] * values[size_t(j)];
    return s;
}

std::complex<double> ChebGrid::interpolate(const std::vector<std::complex<double>>& values,
                                           double y) const {
    std::vector<double> row(size_t(n), 0.0);
    eval_row(y, row.data());
    std::complex<double> s = 0;
    for (int32_t j = 0; j < n; ++j) s += row[size_t(j)] * values[size_t(j)];
    return s;
}

ChebGrid make_cheb_grid(int32_t n, int32_t taylor_degree) {
    if (n < 8) throw std::invalid_argument("ChebGrid: n >= 8 required");
    ChebGrid g;
    g.n = n;
    g.nodes.resize(size_t(n));
    g.bary.resize(size_t(n));
    g.fejer.resize(size_t(n));
    // theta_j = (2j+1) pi / (2n); cos descends, so store reversed (ascending)
    for (int32_t j = 0; j < n; ++j) {
        double theta = (2.0 * j + 1.0) * M_PI / (2.0 * n);
        int32_t idx = n - 1 - j;
        g.nodes[size_t(idx)] = 0.5 * (1.0 + std::cos(theta));
        g.bary[size_t(idx)] = (j % 2 == 0 ? 1.0 : -1.0) * std::sin(theta);
        double w = 1.0;
        for (int32_t m = 1; m <= n / 2; ++m)
            w -= 2.0 * std::cos(2.0 * m * theta) / (4.0 * m * m - 1.0);
        g.fejer[size_t(idx)] = w / double(n);  // (2/n) * w on [-1,1], halved for [0,1]
    }

    // differentiation matrix from the barycentric weights
    std::vector<double> D(size_t(n) * size_t(n), 0.0);
    for (int32_t i = 0; i < n; ++i) {
        double diag = 0;
        for (int32_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double v = (g.bary[size_t(j)] / g.bary[size_t(i)]) /
                       (g.nodes[size_t(i)] - g.nodes[size_t(j)]);
            D[size_t(i) * size_t(n) + size_t(j)] = v;
            diag -= v;
        }
        D[size_t(i) * size_t(n) + size_t(i)] = diag;
    }

    // taylor0[d] = (eval at 0) . D^d / d!
    std::vector<double> row(size_t(n), 0.0);
    g.eval_row(0.0, row.data());
    g.taylor0.assign(size_t(taylor_degree) + 1, std::vector<double>(size_t(n), 0.0));
    g.taylor0[0] = row;
    for (int32_t d = 1; d <= taylor_degree; ++d) {
        std::vector<double> next(size_t(n), 0.0);
        const auto& prev = g.taylor0[size_t(d - 1)];
        for (int32_t j = 0; j < n; ++j) {
            double s = 0;
            for (int32_t i = 0; i < n; ++i) s += prev[size_t(i)] * D[size_t(i) * size_t(n) + size_t(j)];
            next[size_t(j)] = s / double(d);
        }
        g.taylor0[size_t(d)] = std::move(next);
    }
    return g;
}

}  // namespace modsym
