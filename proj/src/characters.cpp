#include "modsym/characters.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>

namespace modsym {

namespace {

// ---- minimal unsigned bignum, only what the exponentiations need ----
struct BigU {
    std::vector<uint32_t> w;  // little-endian

    static BigU from(uint64_t v) {
        BigU b;
        while (v) {
            b.w.push_back(uint32_t(v & 0xffffffffu));
            v >>= 32;
        }
        return b;
    }
    bool is_zero() const { return w.empty(); }
    void trim() {
        while (!w.empty() && w.back() == 0) w.pop_back();
    }
    void mul_small(uint64_t m) {
        uint64_t carry = 0;
        for (auto& x : w) {
            uint64_t v = uint64_t(x) * m + carry;
            x = uint32_t(v & 0xffffffffu);
            carry = v >> 32;
        }
        while (carry) {
            w.push_back(uint32_t(carry & 0xffffffffu));
            carry >>= 32;
        }
    }
    void sub_small(uint64_t m) {
        size_t i = 0;
        uint64_t borrow = m;
        while (borrow && i < w.size()) {
            uint64_t cur = w[i];
            uint64_t take = borrow & 0xffffffffu;
            if (cur >= take) {
                w[i] = uint32_t(cur - take);
                borrow >>= 32;
            } else {
                w[i] = uint32_t(cur + 0x100000000ull - take);
                borrow = (borrow >> 32) + 1;
            }
            ++i;
        }
        trim();
    }
    void div2() {
        uint32_t carry = 0;
        for (size_t i = w.size(); i-- > 0;) {
            uint32_t cur = w[i];
            w[i] = (cur >> 1) | (carry << 31);
            carry = cur & 1;
        }
        trim();
    }
    int64_t bit_length() const {
        if (w.empty()) return 0;
        int64_t bits = int64_t(w.size() - 1) * 32;
        uint32_t top = w.back();
        while (top) {
            ++bits;
            top >>= 1;
        }
        return bits;
    }
    bool bit(int64_t i) const {
        size_t word = size_t(i / 32);
        if (word >= w.size()) return false;
        return (w[word] >> (i % 32)) & 1;
    }
};

// ---- dense polynomial arithmetic over F_p, p odd < 2^31 ----
using Poly = std::vector<int64_t>;  // coefficients mod p, little-endian

void poly_trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

Poly poly_mul(const Poly& a, const Poly& b, int64_t p) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + a[i] * b[j]) % p;
    }
    poly_trim(c);
    return c;
}

// a mod m (m monic not required; leading inverted)
Poly poly_mod(Poly a, const Poly& m, int64_t p) {
    poly_trim(a);
    const size_t dm = m.size() - 1;
    const int64_t lead_inv = mod_pow(m.back(), p - 2, p);
    while (a.size() > dm) {
        int64_t f = (a.back() * lead_inv) % p;
        size_t shift = a.size() - 1 - dm;
        if (f != 0)
            for (size_t i = 0; i <= dm; ++i)
                a[shift + i] = ((a[shift + i] - f * m[i]) % p + p) % p;
        a.pop_back();
        poly_trim(a);
        if (a.size() <= dm) break;
    }
    return a;
}

Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& m, int64_t p) {
    return poly_mod(poly_mul(a, b, p), m, p);
}

Poly poly_powmod(Poly base, const BigU& e, const Poly& m, int64_t p) {
    Poly result{1};
    base = poly_mod(std::move(base), m, p);
    for (int64_t i = e.bit_length() - 1; i >= 0; --i) {
        result = poly_mulmod(result, result, m, p);
        if (e.bit(i)) result = poly_mulmod(result, base, m, p);
    }
    return result;
}

Poly poly_gcd(Poly a, Poly b, int64_t p) {
    poly_trim(a);
    poly_trim(b);
    while (!b.empty()) {
        Poly r = poly_mod(a, b, p);
        a = std::exchange(b, r);
    }
    if (!a.empty()) {
        int64_t inv = mod_pow(a.back(), p - 2, p);
        for (auto& c : a) c = (c * inv) % p;
    }
    return a;
}

// exact division, remainder known zero
Poly poly_div_exact(Poly a, const Poly& b, int64_t p) {
    poly_trim(a);
    Poly q(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, 0);
    const int64_t lead_inv = mod_pow(b.back(), p - 2, p);
    while (a.size() >= b.size() && !a.empty()) {
        int64_t f = (a.back() * lead_inv) % p;
        size_t shift = a.size() - b.size();
        q[shift] = f;
        for (size_t i = 0; i < b.size(); ++i)
            a[shift + i] = ((a[shift + i] - f * b[i]) % p + p) % p;
        poly_trim(a);
    }
    return q;
}

// Phi_m mod p via x^m - 1 divided by all lower cyclotomics
Poly cyclotomic_poly(int64_t m, int64_t p, std::map<int64_t, Poly>& cache) {
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    Poly f(size_t(m) + 1, 0);
    f[0] = p - 1;
    f[size_t(m)] = 1;  // x^m - 1
    for (int64_t d = 1; d < m; ++d) {
        if (m % d != 0) continue;
        f = poly_div_exact(std::move(f), cyclotomic_poly(d, p, cache), p);
    }
    cache[m] = f;
    return f;
}

int64_t multiplicative_order(int64_t p, int64_t m) {
    if (m == 1) return 1;
    int64_t ord = 1, v = p % m;
    int64_t cur = v;
    while (cur != 1) {
        cur = (int128(cur) * v) % m;
        ++ord;
        if (ord > m) throw std::logic_error("multiplicative_order: p not invertible mod m");
    }
    return ord;
}

}  // namespace

const CyclotomicField& cyclotomic_field(int64_t p, int64_t m0) {
    static std::map<std::pair<int64_t, int64_t>, CyclotomicField> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(p, m0);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    if (p % 2 == 0 || m0 % p == 0)
        throw std::invalid_argument("cyclotomic_field: need odd p with p not dividing m0");
    CyclotomicField F;
    F.p = p;
    F.m0 = m0;
    F.kappa = int32_t(multiplicative_order(p, m0));

    std::map<int64_t, Poly> cyc_cache;
    Poly phi = cyclotomic_poly(m0, p, cyc_cache);

    // split to one irreducible factor of degree kappa (all factors share it);
    // deterministic seed keeps the choice of the prime over p canonical
    std::mt19937_64 rng(uint64_t(p) * 1000003u + uint64_t(m0));
    BigU half = BigU::from(1);
    for (int32_t i = 0; i < F.kappa; ++i) half.mul_small(uint64_t(p));
    half.sub_small(1);
    half.div2();  // (p^kappa - 1) / 2
    Poly f = phi;
    while (int64_t(f.size()) - 1 > F.kappa) {
        Poly r(f.size() - 1, 0);
        for (auto& c : r) c = int64_t(rng() % uint64_t(p));
        poly_trim(r);
        if (r.empty()) continue;
        Poly g = poly_powmod(r, half, f, p);
        if (g.empty())
            continue;
        g[0] = (g[0] + p - 1) % p;  // r^{(q-1)/2} - 1
        poly_trim(g);
        if (g.empty()) continue;
        Poly d = poly_gcd(g, f, p);
        if (d.size() <= 1 || d.size() == f.size()) continue;
        Poly other = poly_div_exact(f, d, p);
        // keep the smaller piece not below kappa
        if (int64_t(d.size()) - 1 >= F.kappa &&
            (int64_t(other.size()) - 1 < F.kappa || d.size() <= other.size()))
            f = std::move(d);
        else
            f = std::move(other);
    }
    if (int64_t(f.size()) - 1 != F.kappa)
        throw std::logic_error("cyclotomic_field: factor degree mismatch");
    {   // make monic
        int64_t inv = mod_pow(f.back(), p - 2, p);
        for (auto& c : f) c = (c * inv) % p;
    }
    F.modulus = f;

    F.root_pow.resize(size_t(m0));
    Poly cur{1};
    for (int64_t t = 0; t < m0; ++t) {
        Poly padded = cur;
        padded.resize(size_t(F.kappa), 0);
        F.root_pow[size_t(t)] = padded;
        cur = poly_mod(poly_mul(cur, Poly{0, 1}, p), f, p);
    }
    return cache.emplace(key, std::move(F)).first->second;
}

int64_t UnitGroup::log_exponent(const std::vector<int64_t>& k, int64_t a) const {
    a %= n;
    if (a < 0) a += n;
    int64_t e = 0;
    for (size_t i = 0; i < orders.size(); ++i) {
        int64_t l = dlog[i][size_t(a)];
        if (l < 0) throw std::invalid_argument("log_exponent: not a unit");
        e = (e + int128(k[i]) * l % exponent * (exponent / orders[i])) % exponent;
    }
    return e;
}

UnitGroup build_unit_group(int64_t n) {
    if (n < 1) throw std::invalid_argument("build_unit_group: n >= 1");
    UnitGroup g;
    g.n = n;
    if (n <= 2) {
        g.exponent = 1;
        return g;  // trivial group
    }
    // factor n; each odd prime power gives a cyclic factor, 2^e gives <-1> x <5>
    std::vector<std::pair<int64_t, int64_t>> pe;  // (prime, power value)
    int64_t m = n;
    for (int64_t q = 2; q * q <= m; ++q) {
        if (m % q != 0) continue;
        int64_t pk = 1;
        while (m % q == 0) {
            m /= q;
            pk *= q;
        }
        pe.emplace_back(q, pk);
    }
    if (m > 1) pe.emplace_back(m, m);

    struct Component {
        int64_t mod, gen, order;
    };
    std::vector<Component> comps;
    for (auto [q, pk] : pe) {
        if (q == 2) {
            if (pk == 2) continue;  // trivial
            if (pk == 4) {
                comps.push_back({4, 3, 2});
            } else {
                comps.push_back({pk, pk - 1, 2});       // <-1>
                comps.push_back({pk, 5, pk / 4});       // <5>
            }
        } else {
            int64_t phi = pk - pk / q;
            // find a generator of (Z/pk)^x
            std::vector<int64_t> prime_factors;
            int64_t ph = phi;
            for (int64_t d = 2; d * d <= ph; ++d) {
                if (ph % d != 0) continue;
                prime_factors.push_back(d);
                while (ph % d == 0) ph /= d;
            }
            if (ph > 1) prime_factors.push_back(ph);
            int64_t gen = 0;
            for (int64_t cand = 2; cand < pk; ++cand) {
                if (std::gcd(cand, pk) != 1) continue;
                bool ok = true;
                for (int64_t pf : prime_factors)
                    if (mod_pow(cand, phi / pf, pk) == 1) {
                        ok = false;
                        break;
                    }
                if (ok) {
                    gen = cand;
                    break;
                }
            }
            comps.push_back({pk, gen, phi});
        }
    }

    g.exponent = 1;
    for (auto& c : comps) {
        g.orders.push_back(c.order);
        g.exponent = std::lcm(g.exponent, c.order);
    }
    // discrete logs: component-wise tables indexed by residue mod n
    g.dlog.assign(comps.size(), std::vector<int64_t>(size_t(n), -1));
    for (size_t i = 0; i < comps.size(); ++i) {
        auto& c = comps[i];
        // dlog of a mod c.mod with respect to c.gen, by stepping the cyclic group
        std::vector<int64_t> table(size_t(c.mod), -1);
        if (c.mod == 4 || c.gen == c.mod - 1) {
            // order-2 component <-1> needs care inside 2^e: a = (-1)^s 5^t
            // handled jointly below for pk >= 8
        }
        int64_t cur = 1;
        for (int64_t t = 0; t < c.order; ++t) {
            table[size_t(cur)] = t;
            cur = (int128(cur) * c.gen) % c.mod;
        }
        if (c.mod % 8 == 0) {
            // two components share the modulus 2^e; resolve a = (-1)^s 5^t
            // later in the fill loop via both tables
        }
        for (int64_t a = 0; a < n; ++a) {
            if (std::gcd(a, n) != 1) continue;
            int64_t r = a % c.mod;
            if (table[size_t(r)] >= 0) {
                g.dlog[i][size_t(a)] = table[size_t(r)];
            } else {
                g.dlog[i][size_t(a)] = -2;  // resolved below for 2^e pairs
            }
        }
    }
    // fix up 2^e >= 8: components come in pairs (<-1>, <5>) with the same mod
    for (size_t i = 0; i + 1 < comps.size(); ++i) {
        if (comps[i].mod != comps[i + 1].mod) continue;
        if (comps[i].mod % 8 != 0) continue;
        int64_t pk = comps[i].mod;
        // enumerate a = (-1)^s 5^t mod pk
        for (int64_t s = 0; s < 2; ++s) {
            int64_t base = s == 0 ? 1 : pk - 1;
            int64_t cur = base;
            for (int64_t t = 0; t < pk / 4; ++t) {
                for (int64_t a = cur % pk; a < g.n; a += pk) {
                    if (std::gcd(a, g.n) != 1) continue;
                    g.dlog[i][size_t(a)] = s;
                    g.dlog[i + 1][size_t(a)] = t;
                }
                cur = (int128(cur) * 5) % pk;
            }
        }
        ++i;
    }
    // validate
    for (size_t i = 0; i < comps.size(); ++i)
        for (int64_t a = 0; a < n; ++a)
            if (std::gcd(a, n) == 1 && g.dlog[i][size_t(a)] < 0)
                throw std::logic_error("build_unit_group: dlog fill failed");
    return g;
}

std::vector<DirichletCharacter> enumerate_characters(const UnitGroup& g) {
    std::vector<DirichletCharacter> out;
    std::vector<int64_t> k(g.orders.size(), 0);
    int64_t total = 1;
    for (int64_t d : g.orders) total *= d;
    for (int64_t idx = 0; idx < total; ++idx) {
        int64_t v = idx;
        for (size_t i = 0; i < g.orders.size(); ++i) {
            k[i] = v % g.orders[i];
            v /= g.orders[i];
        }
        DirichletCharacter chi;
        chi.n = g.n;
        chi.k = k;
        chi.order = 1;
        for (size_t i = 0; i < g.orders.size(); ++i)
            chi.order = std::lcm(chi.order, g.orders[i] / std::gcd(g.orders[i], k[i]));
        if (g.n <= 2) {
            chi.even = true;
        } else {
            chi.even = g.log_exponent(k, g.n - 1) == 0;
        }
        out.push_back(std::move(chi));
    }
    return out;
}

TwistedValue twisted_lvalue_modp(const EigenSymbol& es, const CosetTable& table,
                                 const UnitGroup& units, const DirichletCharacter& chi,
                                 int64_t p) {
    const int64_t n = units.n;
    if (n < 3) throw std::invalid_argument("twisted_lvalue_modp: modulus too small");
    bool want_even = es.sign == +1;
    if (chi.even != want_even)
        throw std::invalid_argument("twisted_lvalue_modp: parity mismatch with the symbol sign");

    TwistedValue tv;
    tv.n = n;
    tv.order = chi.order;
    // reduction mod the prime over p: the p-power part of chi evaluates to 1
    int64_t m0 = chi.order;
    int64_t pj = 1;
    while (m0 % p == 0) {
        m0 /= p;
        pj *= p;
    }
    tv.m0 = m0;
    const CyclotomicField& F = cyclotomic_field(p, m0);
    tv.kappa = F.kappa;
    tv.even = chi.even;

    // chi(a) = zeta_order^{g(a)}; reduced exponent: x * g(a) mod m0 with
    // x = pj^{-1} mod m0 (zeta_order = zeta_{pj}^y zeta_{m0}^x splitting)
    const int64_t x = (m0 == 1) ? 0 : mod_inverse(pj % m0 == 0 ? 1 : pj % m0, m0);
    const int64_t t = units.exponent / chi.order;  // g(a) = e(a) / t

    std::vector<int64_t> acc(size_t(m0), 0);
    for (int64_t a = 1; a < n; ++a) {
        if (std::gcd(a, n) != 1) continue;
        int64_t ev = eval_symbol(es, table, Rational(a, n)) % p;
        if (ev < 0) ev += p;
        if (ev == 0) continue;
        int64_t e = units.log_exponent(chi.k, a);
        // chibar(a): negate the exponent
        int64_t gexp = ((chi.order - (e / t) % chi.order) % chi.order) % chi.order;
        int64_t red = (m0 == 1) ? 0 : int64_t((int128(x) * (gexp % m0)) % m0);
        acc[size_t(red)] = (acc[size_t(red)] + ev) % p;
    }
    tv.value.assign(size_t(F.kappa), 0);
    for (int64_t r = 0; r < m0; ++r) {
        if (acc[size_t(r)] == 0) continue;
        const auto& zp = F.root_pow[size_t(r)];
        for (int32_t i = 0; i < F.kappa; ++i)
            tv.value[size_t(i)] = (tv.value[size_t(i)] + acc[size_t(r)] * zp[size_t(i)]) % p;
    }
    for (int64_t c : tv.value) tv.nonzero = tv.nonzero || c != 0;
    return tv;
}

NonvanishingSurvey nonvanishing_survey(const EigenSymbol& es, const CosetTable& table, int64_t M,
                                       int64_t p) {
    NonvanishingSurvey sv;
    sv.M = M;
    sv.p = p;
    sv.sign = es.sign;
    sv.proof_constant = 1.0 - std::sqrt(1.0 - 6.0 / (M_PI * M_PI) * (1.0 - 1.0 / double(p)));
    bool want_even = es.sign == +1;
    int64_t conductors = 0;
    for (int64_t n = 2; n <= M; ++n) {
        ++conductors;
        SurveyRow row;
        row.n = n;
        if (n >= 3) {
            UnitGroup g = build_unit_group(n);
            for (const auto& chi : enumerate_characters(g)) {
                if (chi.even != want_even) continue;
                row.characters += 1;
                auto tv = twisted_lvalue_modp(es, table, g, chi, p);
                if (tv.nonzero) row.nonvanishing += 1;
            }
        } else if (n == 2 && want_even) {
            // the trivial character mod 2: sum over the single unit a = 1
            row.characters = 1;
            int64_t ev = eval_symbol(es, table, Rational(1, 2)) % p;
            if (ev != 0) row.nonvanishing = 1;
        }
        sv.total_nonvanishing += row.nonvanishing;
        if (row.nonvanishing > 0) sv.conductors_with_nonvanishing += 1;
        sv.rows.push_back(row);
    }
    sv.fraction = conductors ? double(sv.conductors_with_nonvanishing) / double(conductors) : 0.0;
    return sv;
}

}  // namespace modsym
