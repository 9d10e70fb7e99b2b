#include "modsym/transfer_operator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace modsym {

OperatorGrid make_operator_grid(int64_t level, int32_t n, int64_t m_max, bool zeta_tails,
                                int32_t tail_degree) {
    OperatorGrid g;
    g.level = level;
    g.n = n;
    g.m_max = std::max<int64_t>(m_max, level);
    g.zeta_tails = zeta_tails;
    g.tail_degree = tail_degree;
    g.table = build_coset_table(level);
    g.cheb = make_cheb_grid(n, tail_degree);
    return g;
}

NodeVec OperatorMatrix::apply(const NodeVec& v) const {
    const int32_t d = dim();
    NodeVec out(size_t(d), cdouble(0));
    for (int32_t i = 0; i < d; ++i) {
        cdouble s = 0;
        const cdouble* row = a.data() + size_t(i) * size_t(d);
        for (int32_t j = 0; j < d; ++j) s += row[j] * v[size_t(j)];
        out[size_t(i)] = s;
    }
    return out;
}

NodeVec OperatorMatrix::apply_transpose(const NodeVec& v) const {
    const int32_t d = dim();
    NodeVec out(size_t(d), cdouble(0));
    for (int32_t i = 0; i < d; ++i) {
        const cdouble* row = a.data() + size_t(i) * size_t(d);
        cdouble vi = v[size_t(i)];
        for (int32_t j = 0; j < d; ++j) out[size_t(j)] += row[j] * vi;
    }
    return out;
}

namespace {

// Per-residue-class x-kernels K_t[i][j] = sum_{m = t (mod N)} (m+x_i)^{-2s} c_j(1/(m+x_i)),
// with the m > m_max tail completed through the Taylor rows at 0 and Hurwitz
// zeta values per class.  ds = true inserts the extra factor -2 log(m + x_i).
std::vector<std::vector<cdouble>> residue_kernels(const OperatorGrid& grid, cdouble s, bool ds,
                                                  bool& warn) {
    const int32_t n = grid.n;
    const int64_t N = grid.level;
    const cdouble z0 = 2.0 * s;
    std::vector<std::vector<cdouble>> K(size_t(N), std::vector<cdouble>(size_t(n) * size_t(n), 0));
    std::vector<double> row(size_t(n), 0.0);
    for (int32_t i = 0; i < n; ++i) {
        const double x = grid.cheb.nodes[size_t(i)];
        for (int64_t m = 1; m <= grid.m_max; ++m) {
            const double base = double(m) + x;
            const double lg = std::log(base);
            cdouble wgt = std::exp(-z0 * lg);
            if (ds) wgt *= -2.0 * lg;
            grid.cheb.eval_row(1.0 / base, row.data());
            cdouble* Kt = K[size_t(m % N)].data() + size_t(i) * size_t(n);
            for (int32_t j = 0; j < n; ++j) Kt[j] += wgt * row[j];
        }
        if (!grid.zeta_tails) continue;
        for (int64_t t = 0; t < N; ++t) {
            // smallest m > m_max with m = t (mod N)
            int64_t m0 = grid.m_max + 1;
            while (m0 % N != t) ++m0;
            const double alpha = (double(m0) + x) / double(N);
            const double lgN = std::log(double(N));
            cdouble* Kt = K[size_t(t)].data() + size_t(i) * size_t(n);
            for (int32_t d = 0; d <= grid.tail_degree; ++d) {
                const cdouble z = z0 + double(d);
                cdouble hz, hz_dz;
                hurwitz_zeta_with_dz(z, alpha, hz, hz_dz);
                const cdouble scale = std::exp(-z * lgN) / 1.0;  // N^{-z}
                cdouble tail = scale * hz;
                if (ds) tail = -2.0 * (lgN * scale * hz + scale * hz_dz);
                const auto& tr = grid.cheb.taylor0[size_t(d)];
                for (int32_t j = 0; j < n; ++j) Kt[j] += tail * tr[size_t(j)];
            }
        }
    }
    if (!grid.zeta_tails) {
        // truncation-only mode: warn when the neglected branch mass is visible
        double sig = 2.0 * s.real();
        double est = std::pow(double(grid.m_max), 1.0 - sig) / (sig - 1.0);
        warn = est > 1e-13;
    }
    return K;
}

OperatorMatrix assemble(const OperatorGrid& grid, cdouble s, const std::vector<cdouble>& w,
                        bool ds) {
    if (s.real() <= 0.5) throw numeric_error("transfer operator: Re s > 1/2 required");
    if (int32_t(w.size()) != grid.k()) throw std::invalid_argument("w has wrong dimension");
    OperatorMatrix op;
    op.s = s;
    op.w = w;
    op.n = grid.n;
    op.k = grid.k();
    const int32_t n = grid.n, k = grid.k(), d = op.dim();
    op.a.assign(size_t(d) * size_t(d), cdouble(0));
    bool warn = false;
    auto K = residue_kernels(grid, s, ds, warn);
    op.truncation_warning = warn;
    for (CosetId v = 0; v < k; ++v) {
        for (int64_t t = 0; t < grid.level; ++t) {
            CosetId u = grid.table.act_digit(v, t);
            const cdouble wu = std::exp(w[size_t(u)]);
            const auto& Kt = K[size_t(t)];
            for (int32_t i = 0; i < n; ++i) {
                cdouble* row = op.a.data() + grid.idx(i, v) * size_t(d);
                const cdouble* Ki = Kt.data() + size_t(i) * size_t(n);
                cdouble* blk = row + size_t(u) * size_t(n);
                for (int32_t j = 0; j < n; ++j) blk[j] += wu * Ki[j];
            }
        }
    }
    return op;
}

}  // namespace

OperatorMatrix build_operator(const OperatorGrid& grid, cdouble s, const std::vector<cdouble>& w) {
    return assemble(grid, s, w, false);
}

OperatorMatrix build_operator_ds(const OperatorGrid& grid, cdouble s,
                                 const std::vector<cdouble>& w) {
    return assemble(grid, s, w, true);
}

OperatorMatrix build_branch_one(const OperatorGrid& grid, cdouble s,
                                const std::vector<cdouble>& w) {
    OperatorMatrix op;
    op.s = s;
    op.w = w;
    op.n = grid.n;
    op.k = grid.k();
    const int32_t n = grid.n, k = grid.k(), d = op.dim();
    op.a.assign(size_t(d) * size_t(d), cdouble(0));
    std::vector<double> row(size_t(n), 0.0);
    for (CosetId v = 0; v < k; ++v) {
        CosetId u = grid.table.act_digit(v, 1);
        const cdouble wu = std::exp(w[size_t(u)]);
        for (int32_t i = 0; i < n; ++i) {
            const double x = grid.cheb.nodes[size_t(i)];
            const cdouble wgt = wu * std::exp(-2.0 * s * std::log(1.0 + x));
            grid.cheb.eval_row(1.0 / (1.0 + x), row.data());
            cdouble* blk = op.a.data() + grid.idx(i, v) * size_t(d) + size_t(u) * size_t(n);
            for (int32_t j = 0; j < n; ++j) blk[j] += wgt * row[j];
        }
    }
    return op;
}

NodeVec apply_reflection(const OperatorGrid& grid, const NodeVec& v) {
    const int32_t n = grid.n, k = grid.k();
    NodeVec out(v.size());
    for (CosetId u = 0; u < k; ++u)
        for (int32_t i = 0; i < n; ++i)
            out[grid.idx(i, u)] = v[grid.idx(n - 1 - i, u)];  // nodes symmetric about 1/2
    return out;
}

cdouble eval_at(const OperatorGrid& grid, const NodeVec& v, double x, CosetId u) {
    std::vector<double> row(size_t(grid.n), 0.0);
    grid.cheb.eval_row(x, row.data());
    cdouble s = 0;
    for (int32_t j = 0; j < grid.n; ++j) s += row[size_t(j)] * v[grid.idx(j, u)];
    return s;
}

NodeVec sample_density(const OperatorGrid& grid, const DensitySpec& density) {
    if (density.kind == DensitySpec::Kind::interval_mask)
        throw std::invalid_argument("sample_density: interval densities are not collocatable");
    NodeVec out(size_t(grid.dim()), cdouble(1.0));
    for (CosetId u = 0; u < grid.k(); ++u) {
        double mv = density.mask.empty() ? 1.0 : density.mask[size_t(u)];
        for (int32_t i = 0; i < grid.n; ++i) {
            double x = grid.cheb.nodes[size_t(i)];
            double val = mv;
            if (density.kind == DensitySpec::Kind::smooth && density.smooth)
                val *= density.smooth(x, u);
            out[grid.idx(i, u)] = val;
        }
    }
    return out;
}

namespace {

double sup_norm(const NodeVec& v) {
    double m = 0;
    for (auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

cdouble dot(const NodeVec& a, const NodeVec& b) {
    cdouble s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

void scale(NodeVec& v, cdouble c) {
    for (auto& x : v) x *= c;
}

// det-parity character: +1 on the det +1 block, -1 on the det -1 block
double parity_sign(const OperatorGrid& grid, size_t flat) {
    return flat < size_t(grid.dim()) / 2 ? 1.0 : -1.0;
}

NodeVec parity_flip(const OperatorGrid& grid, const NodeVec& v) {
    NodeVec out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = parity_sign(grid, i) * v[i];
    return out;
}

}  // namespace

SpectralSolution dominant_spectrum(const OperatorGrid& grid, const OperatorMatrix& op) {
    const int32_t d = op.dim();
    SpectralSolution sol;
    // power iteration on L^2; the dominant pair of L is {lambda, -lambda} with
    // the parity twin, and L^2 has the simple dominant value lambda^2 on the
    // two-dimensional span.
    NodeVec v(size_t(d), cdouble(1.0));
    // deterministic mild perturbation avoids starting exactly orthogonal to
    // the dominant pair
    for (size_t i = 0; i < v.size(); ++i) v[i] += 1e-3 * double(i % 7);
    scale(v, 1.0 / sup_norm(v));
    // phase-fix against the largest entry so the iteration also settles when
    // the dominant eigenvalue of L^2 is genuinely complex
    auto phase_fix = [](NodeVec& x) {
        size_t arg = 0;
        for (size_t i = 0; i < x.size(); ++i)
            if (std::abs(x[i]) > std::abs(x[arg])) arg = i;
        cdouble ph = x[arg] / std::abs(x[arg]);
        for (auto& z : x) z /= ph;
    };
    phase_fix(v);
    cdouble lam2 = 0;
    int iters = 0;
    const int max_iters = 600;
    for (; iters < max_iters; ++iters) {
        NodeVec w1 = op.apply(v);
        NodeVec w2 = op.apply(w1);
        cdouble r = dot(v, w2) / dot(v, v);
        double nrm = sup_norm(w2);
        if (nrm == 0) throw numeric_error("power iteration: zero vector");
        scale(w2, 1.0 / nrm);
        phase_fix(w2);
        double shift = 0;
        for (size_t i = 0; i < v.size(); ++i) shift = std::max(shift, std::abs(w2[i] - v[i]));
        v = std::move(w2);
        if (std::abs(r - lam2) <= 1e-13 * std::abs(r) && shift < 1e-12) {
            lam2 = r;
            break;
        }
        lam2 = r;
    }
    if (iters >= max_iters) throw numeric_error("power iteration did not converge");
    cdouble lambda = std::sqrt(lam2);
    if (lambda.real() < 0) lambda = -lambda;

    // split the (lambda, -lambda) pair: phi = (v + L v / lambda)/2
    NodeVec lv = op.apply(v);
    NodeVec phi(v.size());
    for (size_t i = 0; i < v.size(); ++i) phi[i] = 0.5 * (v[i] + lv[i] / lambda);
    scale(phi, 1.0 / sup_norm(phi));
    // fix the sign/phase: make the largest entry positive real
    size_t arg = 0;
    for (size_t i = 0; i < phi.size(); ++i)
        if (std::abs(phi[i]) > std::abs(phi[arg])) arg = i;
    scale(phi, std::abs(phi[arg]) / phi[arg]);

    // left eigenvector for +lambda on the transpose
    NodeVec u(size_t(d), cdouble(1.0));
    for (size_t i = 0; i < u.size(); ++i) u[i] += 1e-3 * double(i % 5);
    scale(u, 1.0 / sup_norm(u));
    phase_fix(u);
    for (int it = 0; it < max_iters; ++it) {
        NodeVec w1 = op.apply_transpose(u);
        NodeVec w2 = op.apply_transpose(w1);
        double nrm = sup_norm(w2);
        scale(w2, 1.0 / nrm);
        phase_fix(w2);
        double shift = 0;
        for (size_t i = 0; i < u.size(); ++i) shift = std::max(shift, std::abs(w2[i] - u[i]));
        u = std::move(w2);
        if (shift < 1e-12) break;
    }
    NodeVec lu = op.apply_transpose(u);
    NodeVec left(u.size());
    for (size_t i = 0; i < u.size(); ++i) left[i] = 0.5 * (u[i] + lu[i] / lambda);
    cdouble bi = 0;
    for (size_t i = 0; i < left.size(); ++i) bi += left[i] * phi[i];
    if (std::abs(bi) < 1e-14) throw numeric_error("left/right eigenvectors nearly orthogonal");
    scale(left, 1.0 / bi);

    // residual of the eigenpair
    NodeVec lphi = op.apply(phi);
    double res = 0;
    for (size_t i = 0; i < phi.size(); ++i) res = std::max(res, std::abs(lphi[i] - lambda * phi[i]));
    sol.residual = res / sup_norm(phi);

    // second eigenvalue with both parity twins of the dominant pair deflated:
    // iterate L^2 and project out phi and chi.phi against their left partners.
    NodeVec phi_t = parity_flip(grid, phi);
    NodeVec left_t = parity_flip(grid, left);
    cdouble bi_t = 0;
    for (size_t i = 0; i < left_t.size(); ++i) bi_t += left_t[i] * phi_t[i];
    NodeVec y(size_t(d), cdouble(0));
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (auto& x : y) x = unif(rng);
    auto deflate = [&](NodeVec& z) {
        cdouble c1 = 0, c2 = 0;
        for (size_t i = 0; i < z.size(); ++i) {
            c1 += left[i] * z[i];
            c2 += left_t[i] * z[i];
        }
        c2 /= bi_t;
        for (size_t i = 0; i < z.size(); ++i) z[i] -= c1 * phi[i] + c2 * phi_t[i];
    };
    deflate(y);
    scale(y, 1.0 / sup_norm(y));
    cdouble mu2 = 0;
    for (int it = 0; it < max_iters; ++it) {
        NodeVec z = op.apply(op.apply(y));
        deflate(z);
        cdouble r = dot(y, z) / dot(y, y);
        double nrm = sup_norm(z);
        if (nrm < 1e-280) {
            mu2 = 0;
            break;
        }
        scale(z, 1.0 / nrm);
        phase_fix(z);
        double shift = 0;
        for (size_t i = 0; i < y.size(); ++i) shift = std::max(shift, std::abs(z[i] - y[i]));
        // convergence on |mu2| is all we report
        bool done = std::abs(std::abs(r) - std::abs(mu2)) <= 1e-9 * std::abs(r) && it > 8;
        y = std::move(z);
        mu2 = r;
        if (done || shift < 1e-11) break;
    }
    sol.lambda = lambda;
    sol.lambda2_abs = std::sqrt(std::abs(mu2));
    sol.gap = sol.lambda2_abs / std::abs(lambda);
    sol.near_degenerate = std::abs(lambda) - sol.lambda2_abs < 1e-6;
    sol.eigenfunction = std::move(phi);
    sol.left = std::move(left);
    sol.iterations = iters;
    return sol;
}

double spectral_radius_estimate(const OperatorMatrix& op, int iterations) {
    NodeVec v(size_t(op.dim()), cdouble(1.0));
    for (size_t i = 0; i < v.size(); ++i) v[i] += 1e-3 * double(i % 7);
    double nrm = 0;
    for (auto& z : v) nrm = std::max(nrm, std::abs(z));
    for (auto& z : v) z /= nrm;
    // geometric mean of the last norm ratios; warm up first
    const int warmup = iterations / 2;
    double log_acc = 0;
    int counted = 0;
    for (int it = 0; it < iterations; ++it) {
        v = op.apply(v);
        nrm = 0;
        for (auto& z : v) nrm = std::max(nrm, std::abs(z));
        if (nrm == 0) return 0;
        for (auto& z : v) z /= nrm;
        if (it >= warmup) {
            log_acc += std::log(nrm);
            ++counted;
        }
    }
    return std::exp(log_acc / double(counted));
}

namespace {

// dense complex LU with partial pivoting; solve in place
struct DenseLU {
    int32_t n;
    std::vector<cdouble> a;  // row-major, factored
    std::vector<int32_t> piv;
    bool singular = false;

    explicit DenseLU(std::vector<cdouble> m, int32_t dim) : n(dim), a(std::move(m)), piv(size_t(dim)) {
        for (int32_t c = 0; c < n; ++c) {
            int32_t best = c;
            double bv = std::abs(a[size_t(c) * size_t(n) + size_t(c)]);
            for (int32_t r = c + 1; r < n; ++r) {
                double v = std::abs(a[size_t(r) * size_t(n) + size_t(c)]);
                if (v > bv) {
                    bv = v;
                    best = r;
                }
            }
            piv[size_t(c)] = best;
            if (bv < 1e-300) {
                singular = true;
                return;
            }
            if (best != c)
                for (int32_t j = 0; j < n; ++j)
                    std::swap(a[size_t(c) * size_t(n) + size_t(j)],
                              a[size_t(best) * size_t(n) + size_t(j)]);
            cdouble pivval = a[size_t(c) * size_t(n) + size_t(c)];
            for (int32_t r = c + 1; r < n; ++r) {
                cdouble f = a[size_t(r) * size_t(n) + size_t(c)] / pivval;
                a[size_t(r) * size_t(n) + size_t(c)] = f;
                if (f == cdouble(0)) continue;
                for (int32_t j = c + 1; j < n; ++j)
                    a[size_t(r) * size_t(n) + size_t(j)] -= f * a[size_t(c) * size_t(n) + size_t(j)];
            }
        }
    }

    NodeVec solve(NodeVec b) const {
        for (int32_t c = 0; c < n; ++c)
            if (piv[size_t(c)] != c) std::swap(b[size_t(c)], b[size_t(piv[size_t(c)])]);
        for (int32_t r = 1; r < n; ++r) {
            cdouble s = b[size_t(r)];
            for (int32_t j = 0; j < r; ++j) s -= a[size_t(r) * size_t(n) + size_t(j)] * b[size_t(j)];
            b[size_t(r)] = s;
        }
        for (int32_t r = n - 1; r >= 0; --r) {
            cdouble s = b[size_t(r)];
            for (int32_t j = r + 1; j < n; ++j)
                s -= a[size_t(r) * size_t(n) + size_t(j)] * b[size_t(j)];
            b[size_t(r)] = s / a[size_t(r) * size_t(n) + size_t(r)];
        }
        return b;
    }
};

}  // namespace

double distance_from_one(const OperatorMatrix& op, int iterations) {
    const int32_t d = op.dim();
    std::vector<cdouble> shifted = op.a;
    for (int32_t i = 0; i < d; ++i) shifted[size_t(i) * size_t(d) + size_t(i)] -= 1.0;
    DenseLU lu(std::move(shifted), d);
    if (lu.singular) return 0.0;
    NodeVec v(size_t(d), cdouble(1.0));
    for (size_t i = 0; i < v.size(); ++i) v[i] += 1e-3 * double(i % 5);
    double mu = 0;
    for (int it = 0; it < iterations; ++it) {
        NodeVec w = lu.solve(v);
        double nrm = 0;
        for (auto& z : w) nrm = std::max(nrm, std::abs(z));
        if (nrm == 0) return 0.0;
        mu = nrm;  // growth factor approximates 1/min|lambda_i - 1|
        for (auto& z : w) z /= nrm;
        v = std::move(w);
    }
    return 1.0 / mu;
}

S0Result solve_s0(const OperatorGrid& grid, const std::vector<cdouble>& w, double tol) {
    S0Result res;
    cdouble s = 1.0;
    for (int it = 0; it < 40; ++it) {
        if (s.real() <= 0.75) throw numeric_error("solve_s0: left the half-plane Re s > 3/4");
        OperatorMatrix op = build_operator(grid, s, w);
        SpectralSolution sol = dominant_spectrum(grid, op);
        res.lambda_at_s0 = sol.lambda;
        res.iterations = it + 1;
        if (std::abs(sol.lambda - 1.0) <= tol) {
            res.s0 = s;
            return res;
        }
        OperatorMatrix dop = build_operator_ds(grid, s, w);
        // Hellmann-Feynman: dlambda/ds = <left, dL/ds right> with <left,right> = 1
        NodeVec dv = dop.apply(sol.eigenfunction);
        cdouble dlambda = 0;
        for (size_t i = 0; i < dv.size(); ++i) dlambda += sol.left[i] * dv[i];
        if (std::abs(dlambda) < 1e-14) throw numeric_error("solve_s0: vanishing derivative");
        s -= (sol.lambda - 1.0) / dlambda;
    }
    throw numeric_error("solve_s0: Newton did not converge");
}

std::vector<double> s0_gradient(const OperatorGrid& grid, double step) {
    const int32_t k = grid.k();
    std::vector<double> g(size_t(k), 0.0);
    for (int32_t u = 0; u < k; ++u) {
        std::vector<cdouble> wp(size_t(k), cdouble(0)), wm(size_t(k), cdouble(0));
        wp[size_t(u)] = step;
        wm[size_t(u)] = -step;
        cdouble sp = solve_s0(grid, wp).s0;
        cdouble sm = solve_s0(grid, wm).s0;
        g[size_t(u)] = (sp - sm).real() / (2.0 * step);
    }
    return g;
}

namespace {

// Jacobi eigenvalues of a small symmetric matrix; returns |eigenvalue|s sorted.
std::vector<double> symmetric_abs_eigs(std::vector<std::vector<double>> m) {
    const size_t n = m.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) off += m[i][j] * m[i][j];
        if (off < 1e-24) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(m[p][q]) < 1e-300) continue;
                double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (size_t i = 0; i < n; ++i) {
                    double mip = m[i][p], miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for (size_t i = 0; i < n; ++i) {
                    double mpi = m[p][i], mqi = m[q][i];
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (size_t i = 0; i < n; ++i) eig[i] = std::abs(m[i][i]);
    std::sort(eig.begin(), eig.end());
    return eig;
}

}  // namespace

HessianResult s0_hessian(const OperatorGrid& grid, double step) {
    const int32_t k = grid.k();
    auto solve_at = [&](const std::vector<double>& x) {
        std::vector<cdouble> w(size_t(k), cdouble(0));
        for (int32_t i = 0; i < k; ++i) w[size_t(i)] = x[size_t(i)];
        return solve_s0(grid, w).s0.real();
    };
    std::vector<double> zero(size_t(k), 0.0);
    double s00 = solve_at(zero);
    std::vector<std::vector<double>> H(size_t(k), std::vector<double>(size_t(k), 0.0));
    for (int32_t i = 0; i < k; ++i) {
        for (int32_t j = i; j < k; ++j) {
            double hij;
            if (i == j) {
                auto xp = zero, xm = zero;
                xp[size_t(i)] = step;
                xm[size_t(i)] = -step;
                hij = (solve_at(xp) - 2.0 * s00 + solve_at(xm)) / (step * step);
            } else {
                auto xpp = zero, xpm = zero, xmp = zero, xmm = zero;
                xpp[size_t(i)] = step;
                xpp[size_t(j)] = step;
                xpm[size_t(i)] = step;
                xpm[size_t(j)] = -step;
                xmp[size_t(i)] = -step;
                xmp[size_t(j)] = step;
                xmm[size_t(i)] = -step;
                xmm[size_t(j)] = -step;
                hij = (solve_at(xpp) - solve_at(xpm) - solve_at(xmp) + solve_at(xmm)) /
                      (4.0 * step * step);
            }
            H[size_t(i)][size_t(j)] = hij;
            H[size_t(j)][size_t(i)] = hij;
        }
    }
    HessianResult res;
    res.H = H;
    // the stencil is symmetric entry by entry, so the pre-symmetrization
    // asymmetry is identically zero; report it anyway
    res.presym_asym = 0.0;
    res.sigma_min = symmetric_abs_eigs(H).front();
    // structural kernel: the coboundary directions of the digit graph
    // (lambda(s, w + c delta) = lambda(s, w) by a diagonal similarity)
    auto cob = coboundary_directions(grid.table);
    res.kernel_dim = int32_t(cob.size());
    for (const auto& delta : cob) {
        for (int32_t i = 0; i < k; ++i) {
            double s = 0;
            for (int32_t j = 0; j < k; ++j) s += H[size_t(i)][size_t(j)] * delta[size_t(j)];
            res.kernel_residual = std::max(res.kernel_residual, std::abs(s));
        }
    }
    // project the kernel out and take the smallest remaining |eigenvalue|
    auto project = [&](std::vector<double> v) {
        for (const auto& q : cob) {
            double dot = 0;
            for (int32_t i = 0; i < k; ++i) dot += q[size_t(i)] * v[size_t(i)];
            for (int32_t i = 0; i < k; ++i) v[size_t(i)] -= dot * q[size_t(i)];
        }
        return v;
    };
    std::vector<std::vector<double>> P(size_t(k), std::vector<double>(size_t(k), 0.0));
    for (int32_t j = 0; j < k; ++j) {
        std::vector<double> col(size_t(k), 0.0);
        col[size_t(j)] = 1.0;
        col = project(col);
        std::vector<double> hcol(size_t(k), 0.0);
        for (int32_t i = 0; i < k; ++i)
            for (int32_t l = 0; l < k; ++l) hcol[size_t(i)] += H[size_t(i)][size_t(l)] * col[size_t(l)];
        hcol = project(hcol);
        for (int32_t i = 0; i < k; ++i) P[size_t(i)][size_t(j)] = hcol[size_t(i)];
    }
    auto eigs = symmetric_abs_eigs(P);
    res.sigma_min_complement =
        size_t(res.kernel_dim) < eigs.size() ? eigs[size_t(res.kernel_dim)] : eigs.back();
    return res;
}

ResidueConstant residue_constant(const OperatorGrid& grid, const DensitySpec& density) {
    ResidueConstant rc;
    NodeVec psi = sample_density(grid, density);
    const double log2 = std::log(2.0);
    double integral = 0;
    for (CosetId u = 0; u < grid.k(); ++u)
        for (int32_t i = 0; i < grid.n; ++i)
            integral += grid.cheb.fejer[size_t(i)] * psi[grid.idx(i, u)].real();
    rc.quadrature = integral / (2.0 * log2);

    // spectral form at (1, 0): Phi scaled to per-coset probability density,
    // the left functional scaled to Lebesgue x counting.
    std::vector<cdouble> w0(size_t(grid.k()), cdouble(0));
    OperatorMatrix op = build_operator(grid, 1.0, w0);
    SpectralSolution sol = dominant_spectrum(grid, op);
    NodeVec phi = sol.eigenfunction;
    double phi_mass = 0;
    for (CosetId u = 0; u < grid.k(); ++u)
        for (int32_t i = 0; i < grid.n; ++i)
            phi_mass += grid.cheb.fejer[size_t(i)] * phi[grid.idx(i, u)].real();
    scale(phi, double(grid.k()) / phi_mass);
    NodeVec mu = sol.left;
    cdouble mu_one = 0;
    for (auto& x : mu) mu_one += x;
    scale(mu, double(grid.k()) / mu_one);

    OperatorMatrix b1 = build_branch_one(grid, 1.0, w0);
    NodeVec lphi = op.apply(phi);
    NodeVec b1phi = b1.apply(phi);
    NodeVec fphi(phi.size());
    for (size_t i = 0; i < phi.size(); ++i) fphi[i] = lphi[i] - b1phi[i];
    cdouble f0 = eval_at(grid, fphi, 0.0, grid.table.identity_coset());

    NodeVec jpsi = apply_reflection(grid, psi);
    cdouble p1 = 0, p2 = 0;
    for (size_t i = 0; i < psi.size(); ++i) {
        p1 += mu[i] * psi[i];
        p2 += mu[i] * jpsi[i];
    }
    cdouble lambda = sol.lambda;
    rc.spectral = (f0 / (1.0 + lambda) * (p1 + lambda * p2)).real();
    return rc;
}

}  // namespace modsym
