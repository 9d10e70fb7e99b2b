#include "modsym/cosets.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>

namespace modsym {

namespace {

// x*a + y*b = g = gcd(a, b), g >= 0.
void xgcd(int64_t a, int64_t b, int64_t& g, int64_t& x, int64_t& y) {
    int64_t x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        int64_t q = a / b;
        a = std::exchange(b, a - q * b);
        x0 = std::exchange(x1, x0 - q * x1);
        y0 = std::exchange(y1, y0 - q * y1);
    }
    if (a < 0) {
        a = -a;
        x0 = -x0;
        y0 = -y0;
    }
    g = a;
    x = x0;
    y = y0;
}

uint64_t fnv1a(uint64_t h, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::pair<int64_t, int64_t> P1Table::normalize(int64_t c, int64_t d) const {
    const int64_t N = level;
    if (N == 1) return {0, 0};
    c %= N;
    if (c < 0) c += N;
    d %= N;
    if (d < 0) d += N;
    if (std::gcd(std::gcd(c, d), N) != 1) throw std::invalid_argument("P1: gcd(c,d,N) > 1");
    if (c == 0) return {0, 1};
    int64_t g, x, y;
    xgcd(c, N, g, x, y);
    // unit s with s*c = g (mod N)
    int64_t s = x % N;
    if (s < 0) s += N;
    const int64_t Ng = N / g;
    while (std::gcd(s, N) != 1) s = (s + Ng) % N;
    int64_t d1 = int64_t((int128(s) * d) % N);
    // stabilizer of c = g: units t = 1 (mod N/g); take the minimal d in orbit
    int64_t best = d1;
    for (int64_t j = 1; j < g; ++j) {
        int64_t t = (1 + j * Ng) % N;
        if (std::gcd(t, N) != 1) continue;
        int64_t cand = int64_t((int128(t) * d1) % N);
        best = std::min(best, cand);
    }
    return {g, best};
}

int32_t P1Table::lookup(int64_t c, int64_t d) const {
    auto [cn, dn] = normalize(c, d);
    auto it = index_.find(cn * level + dn);
    if (it == index_.end()) throw std::logic_error("P1: class not in table");
    return it->second;
}

P1Table build_p1(int64_t N) {
    P1Table t;
    t.level = N;
    if (N == 1) {
        t.reps = {{0, 0}};
        t.index_[0] = 0;
        return t;
    }
    std::vector<std::pair<int64_t, int64_t>> seen;
    for (int64_t c = 0; c < N; ++c) {
        for (int64_t d = 0; d < N; ++d) {
            if (std::gcd(std::gcd(c, d), N) != 1) continue;
            auto p = t.normalize(c, d);
            int64_t key = p.first * N + p.second;
            if (!t.index_.count(key)) {
                t.index_[key] = int32_t(t.reps.size());
                t.reps.push_back(p);
            }
        }
    }
    return t;
}

namespace {

// Lift a bottom row (c, d), coprime, to an SL_2(Z) matrix.
Mat2 lift_row(int64_t c, int64_t d) {
    int64_t g, x, y;
    xgcd(c, d, g, x, y);
    assert(g == 1);
    // y*d + x*c = 1 -> [[y, -x], [c, d]] has det = y*d + x*c = 1
    return Mat2{y, -x, c, d};
}

}  // namespace

CosetId CosetTable::act_digit_slow(CosetId u, int64_t t) const {
    const Mat2& g = reps[size_t(u)];
    Mat2 h = g.mul(Mat2{0, 1, 1, t});
    return coset_of(*this, h);
}

CosetId coset_of(const CosetTable& table, const Mat2& g) {
    int128 det = g.det();
    if (det != 1 && det != -1) throw std::invalid_argument("coset_of: matrix not unimodular");
    const int64_t N = table.level;
    int64_t c = int64_t(g.c % N), d = int64_t(g.d % N);
    if (det == -1) d = -d;  // fold through diag(1,-1) on the right
    int32_t i = table.p1.lookup(c, d);
    return det == 1 ? i : i + table.index_count / 2;
}

CosetTable build_coset_table(int64_t N, int64_t max_level) {
    if (N < 1) throw std::invalid_argument("build_coset_table: N >= 1 required");
    if (N > max_level) throw std::invalid_argument("build_coset_table: level exceeds bound");
    CosetTable t;
    t.level = N;
    t.p1 = build_p1(N);
    const int32_t half = t.p1.size();
    t.index_count = 2 * half;
    t.reps.resize(size_t(t.index_count));

    // One rep per P^1 class, picked so the bottom row (c, d) has d | N
    // (d = N for the (c : 0) classes); gcd(d, N) is a class invariant, so a
    // unit scaling always reaches this shape.  connecting_word relies on it.
    for (int32_t i = 0; i < half; ++i) {
        auto [g, s] = t.p1.reps[size_t(i)];
        int64_t c, d;
        if (N == 1) {
            c = 0;
            d = 1;
        } else if (s % N == 0) {
            c = g;  // class (g : 0), g a unit
            d = N;
        } else {
            int64_t h = std::gcd(s, N);
            int64_t u = mod_inverse((s / h) % (N / h), N / h);
            while (std::gcd(u, N) != 1) u += N / h;
            c = int64_t((int128(u) * g) % N);
            d = h;
            if (c == 0) c = N;  // keep gcd(c, d) = 1 with an honest integer row
        }
        Mat2 m = lift_row(c, d);
        t.reps[size_t(i)] = m;
        t.reps[size_t(i + half)] = Mat2{m.a, -m.b, m.c, -m.d};
    }
    // sanity: reps resolve to their own index
    for (int32_t i = 0; i < half; ++i) {
        auto [cn, dn] = t.p1.normalize(int64_t(t.reps[size_t(i)].c), int64_t(t.reps[size_t(i)].d));
        if (t.p1.lookup(cn, dn) != i) throw std::logic_error("coset transversal does not cover P^1");
    }

    t.id_coset = t.p1.lookup(0, 1);

    if (int64_t(t.index_count) * N <= (int64_t(1) << 22)) {
        t.digit_action.resize(size_t(t.index_count) * size_t(N));
        for (int32_t u = 0; u < t.index_count; ++u)
            for (int64_t m = 0; m < N; ++m)
                t.digit_action[size_t(u) * size_t(N) + size_t(m)] = t.act_digit_slow(u, m);
    }

    uint64_t h = 14695981039346656037ull;
    h = fnv1a(h, uint64_t(N));
    h = fnv1a(h, uint64_t(t.index_count));
    for (const Mat2& m : t.reps) {
        h = fnv1a(h, uint64_t(int64_t(m.a)));
        h = fnv1a(h, uint64_t(int64_t(m.b)));
        h = fnv1a(h, uint64_t(int64_t(m.c)));
        h = fnv1a(h, uint64_t(int64_t(m.d)));
    }
    t.fingerprint = h;
    return t;
}

namespace {

// Rewrites a digit string of the same value with flipped length parity:
// [..., m] = [..., m-1, 1] and conversely.
void toggle_parity(std::vector<int64_t>& d) {
    if (d.size() >= 2 && d.back() == 1) {
        d.pop_back();
        d.back() += 1;
    } else {
        d.back() -= 1;
        d.push_back(1);
    }
}

// Word from the identity coset to `target` in the digit-action graph:
// returns digits (w_1..w_L) with coset(A_{w_1} ... A_{w_L}) = target.
// Built from the continuant identity: the product over the reversed canonical
// digits of C/D has bottom row exactly (C, D).
std::vector<int64_t> word_from_identity(const CosetTable& t, CosetId target) {
    const int64_t N = t.level;
    const Mat2& rep = t.reps[size_t(target)];
    bool det_plus = rep.det() == 1;
    // a word with product row (C, D) = lambda (c, d) mod N and matching det
    // sign lands in `target`; the det -1 fold flips both coordinates' sign
    // bookkeeping at once, so the row class is the same in either case.
    int64_t c = int64_t(rep.c % N);
    if (c < 0) c += N;
    int64_t d0 = int64_t(rep.d % N);
    if (d0 < 0) d0 += N;

    int64_t C = (c == 0) ? N : c;
    int64_t D = d0;
    while (D <= C || std::gcd(C, D) != 1) D += N;

    CFExpansion e = cf_expand(Rational(C, D));
    std::vector<int64_t> digits = e.digits;
    // parity of the word fixes the determinant sign: det(product) = (-1)^L
    bool need_minus = !det_plus;
    if ((digits.size() % 2 == 1) != need_minus) toggle_parity(digits);
    std::reverse(digits.begin(), digits.end());
    return digits;
}

// Word from coset v to the (0:1) row class (identity coset or its det -1
// twin): a prime p = c + d k_1 coprime to N/d found by incremental search,
// then k_2 with k_2 p = -d (mod N), then one more digit.
std::vector<int64_t> word_to_identity_class(const CosetTable& t, CosetId v, int64_t budget) {
    const int64_t N = t.level;
    const Mat2& rep = t.reps[size_t(v)];
    int64_t c = int64_t(rep.c), d = int64_t(rep.d);
    if (N == 1) return {};
    if (c % N == 0) return {};
    if (d % N == 0) return {1};
    // rows of the transversal have |d| dividing N
    int64_t dd = std::abs(d);
    assert(N % dd == 0);
    int64_t k1 = 0, p = 0;
    for (int64_t k = 1; k <= budget; ++k) {
        int64_t cand = c + d * k;
        if (cand == 0) continue;
        if (!is_prime(std::abs(cand))) continue;
        if (std::gcd(std::abs(cand), N / dd) != 1) continue;
        k1 = k;
        p = cand;
        break;
    }
    if (k1 == 0) throw search_budget_error("connecting_word: prime search budget exhausted");
    int64_t pm = p % N;
    if (pm < 0) pm += N;
    int64_t dm = d % N;
    if (dm < 0) dm += N;
    int64_t k2 = int64_t((int128(N - dm) * mod_inverse(pm, N)) % N);
    if (k2 == 0) k2 = N;
    return {k1, k2, 1};
}

}  // namespace

std::vector<std::vector<double>> coboundary_directions(const CosetTable& table) {
    const int32_t k = table.index_count;
    const int64_t N = table.level;
    // union-find over cosets: all predecessors of a coset share one f-value
    std::vector<int32_t> parent(size_t(k), 0);
    for (int32_t i = 0; i < k; ++i) parent[size_t(i)] = i;
    std::function<int32_t(int32_t)> find = [&](int32_t x) {
        while (parent[size_t(x)] != x) x = parent[size_t(x)] = parent[size_t(parent[size_t(x)])];
        return x;
    };
    std::vector<int32_t> pred_of(size_t(k), -1);  // any one predecessor block per coset
    for (CosetId v = 0; v < k; ++v) {
        for (int64_t t = 0; t < N; ++t) {
            CosetId u = table.act_digit(v, t);
            if (pred_of[size_t(u)] < 0)
                pred_of[size_t(u)] = v;
            else
                parent[size_t(find(v))] = find(pred_of[size_t(u)]);
        }
    }
    // delta_f(u) = f(block(u)) - f(block(pred_of(u))); one generator per block
    std::vector<std::vector<double>> basis;
    for (int32_t b = 0; b < k; ++b) {
        if (find(b) != b) continue;
        std::vector<double> delta(size_t(k), 0.0);
        for (int32_t u = 0; u < k; ++u) {
            if (find(u) == b) delta[size_t(u)] += 1.0;
            if (find(pred_of[size_t(u)]) == b) delta[size_t(u)] -= 1.0;
        }
        basis.push_back(std::move(delta));
    }
    // orthonormalize, drop the zero combinations (constants map to zero)
    std::vector<std::vector<double>> ortho;
    for (auto& v : basis) {
        std::vector<double> w = v;
        for (auto& q : ortho) {
            double dot = 0;
            for (int32_t i = 0; i < k; ++i) dot += q[size_t(i)] * w[size_t(i)];
            for (int32_t i = 0; i < k; ++i) w[size_t(i)] -= dot * q[size_t(i)];
        }
        double nrm = 0;
        for (double x : w) nrm += x * x;
        if (nrm < 1e-20) continue;
        nrm = std::sqrt(nrm);
        for (double& x : w) x /= nrm;
        ortho.push_back(std::move(w));
    }
    return ortho;
}

std::vector<int64_t> connecting_word(const CosetTable& table, CosetId u, CosetId v,
                                     bool allow_empty, int64_t budget) {
    std::vector<int64_t> path;  // digits applied from v, in act order
    if (u != v || !allow_empty) {
        // leg 1: v -> (0:1) row class
        path = word_to_identity_class(table, v, budget);
        CosetId w = v;
        for (int64_t m : path) w = table.act_digit(w, m);
        // leg 2: w -> u.  w is the identity coset or its det -1 twin; a word
        // built for the identity start is reused, with parity absorbing the twin.
        std::vector<int64_t> leg2 = word_from_identity(table, u);
        if (w != table.identity_coset()) {
            // starting rep differs by diag(1,-1) on the left, which preserves
            // the row class and flips det: toggle the word parity.
            std::vector<int64_t> digits(leg2.rbegin(), leg2.rend());
            toggle_parity(digits);
            leg2.assign(digits.rbegin(), digits.rend());
        }
        path.insert(path.end(), leg2.begin(), leg2.end());
    }

    // certificate: rep(u) * prod [[-m,1],[1,0]] lies in Gamma_0(N) rep(v),
    // where the returned word reads the path backwards.
    std::vector<int64_t> word(path.rbegin(), path.rend());
    Mat2 X = table.reps[size_t(u)];
    for (int64_t m : word) X = X.mul(Mat2{-m, 1, 1, 0});
    const Mat2& rv = table.reps[size_t(v)];
    int128 det_v = rv.det();
    // rv^{-1} = det_v * adj(rv)
    Mat2 inv{checked_mul(det_v, rv.d), checked_mul(det_v, -rv.b), checked_mul(det_v, -rv.c),
             checked_mul(det_v, rv.a)};
    Mat2 R = X.mul(inv);
    if (R.det() != 1 || (R.c % table.level) != 0)
        throw std::logic_error("connecting_word: certificate failed");
    return word;
}

}  // namespace modsym
