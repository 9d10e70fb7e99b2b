#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace modsym {

using int128 = __int128;

inline std::string to_string_i128(int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : v;
    std::string s;
    while (u) {
        s.push_back(char('0' + int(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return std::string(s.rbegin(), s.rend());
}

struct overflow_error : std::runtime_error {
    explicit overflow_error(const std::string& what) : std::runtime_error(what) {}
};

inline int128 checked_add(int128 a, int128 b) {
    int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw overflow_error("128-bit add overflow");
    return r;
}

inline int128 checked_mul(int128 a, int128 b) {
    int128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw overflow_error("128-bit mul overflow");
    return r;
}

inline int64_t gcd64(int64_t a, int64_t b) { return std::gcd(a, b); }

// Modular inverse of a mod m, 0 < a < m, gcd(a, m) = 1.
inline int64_t mod_inverse(int64_t a, int64_t m) {
    int64_t t = 0, new_t = 1, r = m, new_r = a % m;
    while (new_r != 0) {
        int64_t q = r / new_r;
        t = std::exchange(new_t, t - q * new_t);
        r = std::exchange(new_r, r - q * new_r);
    }
    if (r != 1) throw std::invalid_argument("mod_inverse: arguments not coprime");
    return t < 0 ? t + m : t;
}

inline int64_t mod_pow(int64_t base, int64_t exp, int64_t mod) {
    int64_t r = 1 % mod;
    base %= mod;
    if (base < 0) base += mod;
    while (exp > 0) {
        if (exp & 1) r = int64_t((int128(r) * base) % mod);
        base = int64_t((int128(base) * base) % mod);
        exp >>= 1;
    }
    return r;
}

// Euler totients for 0..n.
std::vector<int64_t> totient_sieve(int64_t n);

// Moebius function for 0..n.
std::vector<int8_t> moebius_sieve(int64_t n);

// Smallest prime factor table for 0..n (spf[1] = 1).
std::vector<int32_t> spf_sieve(int64_t n);

bool is_prime(int64_t n);

}  // namespace modsym
