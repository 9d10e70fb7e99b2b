#include "modsym/dirichlet_series.hpp"

#include <cmath>

namespace modsym {

namespace {

// sum_{n > M} phi(n) n^{-z} restricted to odd n (odd = true) or all n, by
// phi = mu * id and per-class Hurwitz tails.  Needs Re z > 2.
cdouble totient_tail(cdouble z, int64_t M, bool odd_only, double& err_bound) {
    const int64_t D = 200000;
    auto mu = moebius_sieve(D);
    cdouble zm1 = z - 1.0;
    // sum_{b > K} b^{-(z-1)}, restricted to odd b if required
    auto block_tail = [&](int64_t K) -> cdouble {
        cdouble full = hurwitz_zeta(zm1, double(K) + 1.0);
        if (!odd_only) return full;
        cdouble even = std::exp(-zm1 * std::log(2.0)) * hurwitz_zeta(zm1, double(K / 2) + 1.0);
        return full - even;
    };
    const cdouble zeta_zm1_full = hurwitz_zeta(zm1, 1.0);
    const cdouble zeta_zm1 =
        odd_only ? zeta_zm1_full * (1.0 - std::exp(-zm1 * std::log(2.0))) : zeta_zm1_full;
    cdouble sum = 0;
    for (int64_t a = 1; a <= D; ++a) {
        if (mu[size_t(a)] == 0) continue;
        if (odd_only && a % 2 == 0) continue;
        cdouble term = double(mu[size_t(a)]) * std::exp(-z * std::log(double(a)));
        if (a <= M) {
            sum += term * block_tail(M / a);
        } else {
            sum += term * zeta_zm1;  // K = 0: the whole series
        }
    }
    // |sum_{a > D} mu(a) a^{-z} (...)| <= |zeta(Re z - 1)| * D^{1-Re z}/(Re z - 1)
    double sig = z.real();
    err_bound = std::abs(hurwitz_zeta(cdouble(sig - 1.0), 1.0)) *
                std::pow(double(D), 1.0 - sig) / (sig - 1.0);
    return sum;
}

// Density value as a function of gcd(n, N), one entry per divisor of N in
// increasing order; empty if the density is not a function of that class.
std::vector<double> divisor_profile(const CosetTable& table, const DensitySpec& density) {
    const int64_t N = table.level;
    std::vector<double> prof;
    if (density.kind == DensitySpec::Kind::uniform) {
        for (int64_t d = 1; d <= N; ++d)
            if (N % d == 0) prof.push_back(1.0);
        return prof;
    }
    if (density.kind != DensitySpec::Kind::coset_mask || density.mask.empty()) return {};
    for (int64_t d = 1; d <= N; ++d) {
        if (N % d != 0) continue;
        double val = -1;
        for (size_t u = 0; u < density.mask.size(); ++u) {
            int64_t delta = std::abs(int64_t(table.reps[u].d));
            if (std::gcd(delta, N) != d) continue;
            if (val < 0) val = density.mask[u];
            else if (val != density.mask[u]) return {};
        }
        prof.push_back(val < 0 ? 0.0 : val);
    }
    return prof;
}

}  // namespace

cdouble level_one_series_closed_form(cdouble s) {
    return hurwitz_zeta(2.0 * s - 1.0, 1.0) / hurwitz_zeta(2.0 * s, 1.0) - 1.0;
}

DirectSeries dirichlet_series_direct(const CosetTable& table, const DensitySpec& density,
                                     cdouble s, const std::vector<cdouble>& w, int64_t cutoff) {
    const int64_t N = table.level;
    const int32_t k = table.index_count;
    if (int32_t(w.size()) != k) throw std::invalid_argument("w has wrong dimension");
    double max_x = 0;
    for (auto& wi : w) max_x = std::max(max_x, std::abs(wi.real()));
    // absolute convergence: 2 Re s - max|x| 2/log 2 > 2 with room to spare
    const double eff = 2.0 * s.real() - 2.0 * max_x / std::log(2.0);
    if (eff <= 2.0)
        throw std::invalid_argument("dirichlet_series_direct: outside the convergent range");

    DirectSeries out;
    bool w_zero = true;
    for (auto& wi : w) w_zero = w_zero && wi == cdouble(0);

    std::vector<int32_t> counts(size_t(k), 0);
    std::vector<CosetId> touched;
    const bool has_interval = density.kind == DensitySpec::Kind::interval_mask;
    for (int64_t n = 2; n <= cutoff; ++n) {
        for (int64_t a = 1; a < n; ++a) {
            if (std::gcd(a, n) != 1) continue;
            for (CosetId u : touched) counts[size_t(u)] = 0;
            touched.clear();
            int64_t p = a, q = n, q_prev = 0, q_cur = 1, ell = 0;
            CosetId u = table.identity_coset();
            while (p != 0) {
                int64_t m = q / p;
                q = std::exchange(p, q % p);
                int64_t qn = m * q_cur + q_prev;
                q_prev = std::exchange(q_cur, qn);
                u = table.act_digit(u, m);
                if (counts[size_t(u)] == 0) touched.push_back(u);
                counts[size_t(u)] += 1;
                ++ell;
            }
            const int64_t dual_num = (ell % 2 == 1) ? q_prev : n - q_prev;
            double wt = density.mask.empty() ? 1.0 : density.mask[size_t(u)];
            if (has_interval && wt != 0) {
                int64_t tn = density.interval_on_r ? a : dual_num;
                if (int128(density.lo_num) * n > int128(tn) * density.lo_den ||
                    int128(tn) * density.hi_den > int128(density.hi_num) * n)
                    wt = 0;
            }
            if (density.kind == DensitySpec::Kind::smooth && density.smooth && wt != 0)
                wt *= density.smooth(double(dual_num) / double(n), u);
            if (wt == 0) continue;
            cdouble e = 0;
            if (!w_zero)
                for (CosetId v : touched) e += w[size_t(v)] * double(counts[size_t(v)]);
            out.partial += wt * std::exp(e - 2.0 * s * std::log(double(n)));
        }
    }
    out.value = out.partial;
    // monotone bound on the omitted mass: phi(n) <= n and l(r) <= 2 log2 n + 1
    out.partial_tail_bound =
        std::exp(max_x) * std::abs(hurwitz_zeta(cdouble(eff - 1.0), double(cutoff) + 1.0));

    // completion of the denominator tail
    auto prof = divisor_profile(table, density);
    if (w_zero && !prof.empty() && N <= 2 && 2.0 * s.real() > 2.0) {
        double err = 0;
        if (N == 1) {
            out.value += prof[0] * totient_tail(2.0 * s, cutoff, false, err);
        } else {
            double e1 = 0, e2 = 0;
            cdouble odd = totient_tail(2.0 * s, cutoff, true, e1);
            cdouble full = (prof[1] != 0.0) ? totient_tail(2.0 * s, cutoff, false, e2) : 0.0;
            if (prof[0] != 0.0) out.value += prof[0] * odd;
            if (prof[1] != 0.0) out.value += prof[1] * (full - odd);
            err = 2.0 * e1 + e2;
        }
        out.completed = true;
        out.tail_bound = err;
        return out;
    }

    out.tail_bound = out.partial_tail_bound;
    out.completed = false;
    return out;
}

KeyRelationResult check_key_relation(const OperatorGrid& grid, const DensitySpec& density,
                                     cdouble s, const std::vector<cdouble>& w, int64_t cutoff) {
    KeyRelationResult res;
    OperatorMatrix L = build_operator(grid, s, w);
    OperatorMatrix B1 = build_branch_one(grid, s, w);
    NodeVec psi = sample_density(grid, density);
    NodeVec jpsi = apply_reflection(grid, psi);

    double jdiff = 0;
    for (size_t i = 0; i < psi.size(); ++i) jdiff = std::max(jdiff, std::abs(psi[i] - jpsi[i]));
    res.j_symmetric = jdiff == 0.0;

    auto final_apply = [&](const NodeVec& v) {
        NodeVec a = L.apply(v), b = B1.apply(v);
        for (size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
        return a;
    };

    // (I - L^2)^{-1} x by the even Neumann series
    auto neumann_even = [&](NodeVec x, int& terms) {
        NodeVec acc = x;
        for (terms = 1; terms < 4000; ++terms) {
            x = L.apply(L.apply(x));
            double inc = 0;
            for (size_t i = 0; i < x.size(); ++i) {
                acc[i] += x[i];
                inc = std::max(inc, std::abs(x[i]));
            }
            if (inc < 1e-14) return acc;
        }
        throw numeric_error("key relation: Neumann series did not converge");
    };

    int t1 = 0, t2 = 0;
    NodeVec even_part = neumann_even(final_apply(psi), t1);
    NodeVec odd_part = L.apply(neumann_even(final_apply(jpsi), t2));
    res.neumann_terms = std::max(t1, t2);

    const CosetId id = grid.table.identity_coset();
    res.operator_value = eval_at(grid, even_part, 0.0, id) + eval_at(grid, odd_part, 0.0, id);

    if (res.j_symmetric) {
        NodeVec x = final_apply(psi);
        NodeVec acc = x;
        for (int t = 1; t < 8000; ++t) {
            x = L.apply(x);
            double inc = 0;
            for (size_t i = 0; i < x.size(); ++i) {
                acc[i] += x[i];
                inc = std::max(inc, std::abs(x[i]));
            }
            if (inc < 1e-14) break;
        }
        res.one_term_value = eval_at(grid, acc, 0.0, id);
        res.form_agreement = std::abs(res.operator_value - res.one_term_value);
    }

    res.direct = dirichlet_series_direct(grid.table, density, s, w, cutoff);
    res.discrepancy = std::abs(res.operator_value - res.direct.value);
    return res;
}

}  // namespace modsym
