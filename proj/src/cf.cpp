#include "modsym/cf.hpp"

#include <stdexcept>

namespace modsym {

std::vector<int64_t> totient_sieve(int64_t n) {
    std::vector<int64_t> phi(n + 1);
    for (int64_t i = 0; i <= n; ++i) phi[i] = i;
    for (int64_t p = 2; p <= n; ++p) {
        if (phi[p] == p) {  // p prime
            for (int64_t k = p; k <= n; k += p) phi[k] -= phi[k] / p;
        }
    }
    return phi;
}

std::vector<int8_t> moebius_sieve(int64_t n) {
    std::vector<int8_t> mu(n + 1, 1);
    std::vector<bool> composite(n + 1, false);
    std::vector<int64_t> primes;
    for (int64_t i = 2; i <= n; ++i) {
        if (!composite[i]) {
            primes.push_back(i);
            mu[i] = -1;
        }
        for (int64_t p : primes) {
            if (i * p > n) break;
            composite[i * p] = true;
            if (i % p == 0) {
                mu[i * p] = 0;
                break;
            }
            mu[i * p] = -mu[i];
        }
    }
    mu[0] = 0;
    return mu;
}

std::vector<int32_t> spf_sieve(int64_t n) {
    std::vector<int32_t> spf(n + 1, 0);
    for (int64_t i = 2; i <= n; ++i) {
        if (spf[i] == 0) {
            for (int64_t k = i; k <= n; k += i)
                if (spf[k] == 0) spf[k] = int32_t(i);
        }
    }
    if (n >= 1) spf[1] = 1;
    return spf;
}

bool is_prime(int64_t n) {
    if (n < 2) return false;
    for (int64_t d : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % d == 0) return n == d;
    }
    // deterministic Miller-Rabin for 64-bit
    int64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) d >>= 1, ++s;
    for (int64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        int64_t x = mod_pow(a % n, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = int64_t((int128(x) * x) % n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

Rational::Rational(int64_t n, int64_t d) : num(n), den(d) {
    if (d <= 0 || n <= 0 || n > d) throw std::invalid_argument("Rational: need 0 < num <= den");
    if (std::gcd(n, d) != 1) throw std::invalid_argument("Rational: not reduced");
}

CFExpansion cf_expand(const Rational& r) {
    CFExpansion e;
    if (r.num == r.den) return e;  // 1/1: empty by convention
    int64_t p = r.num, q = r.den;
    // r = [0; m_1, m_2, ...] by the Euclidean algorithm on q/p.
    while (p != 0) {
        e.digits.push_back(q / p);
        q = std::exchange(p, q % p);
    }
    // Euclid ends with final digit >= 2 automatically except when r has the
    // non-canonical tail ...,m,1; that never happens here since remainders are
    // strictly decreasing, but guard anyway.
    if (!e.digits.empty() && e.digits.back() == 1 && e.digits.size() > 1) {
        e.digits.pop_back();
        e.digits.back() += 1;
    }
    return e;
}

Rational cf_value(const std::vector<int64_t>& digits) {
    // Evaluate from the tail: x = 1/(m_i + x).
    int128 p = 1, q = 0;  // value p/q of the tail, starts as "infinity payload"
    // Use convergent recurrence instead to stay exact: [0;m_1..m_l] = P_l/Q_l.
    int128 pm1 = 1, pm0 = 0, qm1 = 0, qm0 = 1;  // P_{-1}=1, P_0=0, Q_{-1}=0, Q_0=1
    for (int64_t m : digits) {
        int128 pn = checked_add(checked_mul(m, pm0), pm1);
        int128 qn = checked_add(checked_mul(m, qm0), qm1);
        pm1 = pm0;
        pm0 = pn;
        qm1 = qm0;
        qm0 = qn;
    }
    p = pm0;
    q = qm0;
    if (digits.empty()) return Rational(1, 1);
    if (q > INT64_MAX || p > INT64_MAX) throw overflow_error("cf_value: convergent exceeds 64 bits");
    return Rational(int64_t(p), int64_t(q));
}

std::vector<Mat2> convergent_matrices(const CFExpansion& e) {
    std::vector<Mat2> out;
    out.reserve(e.digits.size());
    Mat2 g;  // identity
    for (int64_t m : e.digits) {
        g = g.mul(digit_matrix(m));
        out.push_back(g);
    }
    return out;
}

Rational dual(const Rational& r) {
    if (r.num == r.den) throw std::invalid_argument("dual: undefined for 1/1");
    return Rational(mod_inverse(r.num, r.den), r.den);
}

namespace {

// Canonicalize a digit string in place: strip a trailing 1 into the previous
// digit.  Input digits are >= 1 and the string is nonempty.
void canonicalize(std::vector<int64_t>& d) {
    if (d.size() > 1 && d.back() == 1) {
        d.pop_back();
        d.back() += 1;
    }
}

// Digits of 1 - [0; a_1, a_2, ...] for a value in (0,1).
// 1 - x = [0; 1, a_1 - 1, a_2, ...] when a_1 >= 2, and [0; a_2 + 1, a_3, ...]
// when a_1 = 1.
std::vector<int64_t> one_minus(const std::vector<int64_t>& a) {
    std::vector<int64_t> out;
    if (a.empty()) return out;  // 1 - 1/1 = 0, not representable; callers avoid
    if (a[0] >= 2) {
        out.push_back(1);
        out.push_back(a[0] - 1);
        out.insert(out.end(), a.begin() + 1, a.end());
    } else {
        if (a.size() == 1) return out;  // 1 - 1/1
        out.push_back(a[1] + 1);
        out.insert(out.end(), a.begin() + 2, a.end());
    }
    canonicalize(out);
    return out;
}

}  // namespace

std::vector<int64_t> dual_digits(const CFExpansion& e) {
    // Q_{l-1}/Q_l = [0; m_l, ..., m_1]; r* is that value for odd l and its
    // reflection 1 - Q_{l-1}/Q_l for even l.
    std::vector<int64_t> rev(e.digits.rbegin(), e.digits.rend());
    if (e.digits.empty()) throw std::invalid_argument("dual_digits: undefined for 1/1");
    if (e.digits.size() % 2 == 1) {
        canonicalize(rev);
        return rev;
    }
    return one_minus(rev);
}

void enumerate_sigma(int64_t n, const std::function<void(const Rational&)>& fn) {
    for (int64_t a = 1; a < n; ++a) {
        if (std::gcd(a, n) == 1) fn(Rational(a, n));
    }
}

void enumerate_omega(int64_t M, const std::function<void(const Rational&)>& fn) {
    for (int64_t n = 2; n <= M; ++n) enumerate_sigma(n, fn);
}

int64_t sigma_count(int64_t n) {
    int64_t phi = n;
    int64_t m = n;
    for (int64_t p = 2; p * p <= m; ++p) {
        if (m % p == 0) {
            phi -= phi / p;
            while (m % p == 0) m /= p;
        }
    }
    if (m > 1) phi -= phi / m;
    return phi;
}

int64_t omega_count(int64_t M) {
    auto phi = totient_sieve(M);
    int64_t total = 0;
    for (int64_t n = 2; n <= M; ++n) total += phi[n];
    return total;
}

}  // namespace modsym
