#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "modsym/numeric.hpp"

namespace modsym {

// Reduced fraction a/c with 0 < a <= c.  The value 1/1 is admitted only as an
// interval endpoint; enumeration and the dual map exclude it.
struct Rational {
    int64_t num = 0;
    int64_t den = 1;

    Rational() = default;
    Rational(int64_t n, int64_t d);

    bool operator==(const Rational&) const = default;
    auto operator<=>(const Rational& o) const {
        return int128(num) * o.den <=> int128(o.num) * den;
    }
    double value() const { return double(num) / double(den); }
};

// Continued fraction digits (m_1, ..., m_l) of r in (0,1], with m_i >= 1 and
// m_l >= 2.  The expansion of 1/1 is empty by convention.
struct CFExpansion {
    std::vector<int64_t> digits;

    size_t length() const { return digits.size(); }
};

// Exact 2x2 integer matrix, 128-bit entries.
struct Mat2 {
    int128 a = 1, b = 0, c = 0, d = 1;  // [[a, b], [c, d]]

    int128 det() const { return checked_mul(a, d) - checked_mul(b, c); }
    Mat2 mul(const Mat2& o) const {
        return Mat2{checked_add(checked_mul(a, o.a), checked_mul(b, o.c)),
                    checked_add(checked_mul(a, o.b), checked_mul(b, o.d)),
                    checked_add(checked_mul(c, o.a), checked_mul(d, o.c)),
                    checked_add(checked_mul(c, o.b), checked_mul(d, o.d))};
    }
    bool operator==(const Mat2&) const = default;
};

// Digit matrix [[0,1],[1,m]]; products of these are convergent matrices.
inline Mat2 digit_matrix(int64_t m) { return Mat2{0, 1, 1, m}; }

CFExpansion cf_expand(const Rational& r);

// Reconstructs [0; m_1, ..., m_l] exactly.  Digits need not be canonical.
Rational cf_value(const std::vector<int64_t>& digits);

// g_i(r) = [[0,1],[1,m_1]] ... [[0,1],[1,m_i]] for i = 1..l.
std::vector<Mat2> convergent_matrices(const CFExpansion& e);

// r = a/M  ->  r* = abar/M with a*abar = 1 (mod M).  Rejects r = 1/1.
Rational dual(const Rational& r);

// Canonical digits of r* from the digits of r, without re-running Euclid.
// Uses the reversal law Q_{l-1}/Q_l = [0; m_l, ..., m_1] and the parity of l.
std::vector<int64_t> dual_digits(const CFExpansion& e);

// Sigma_n = { a/n : 1 <= a < n, (a,n) = 1 } in increasing numerator order.
void enumerate_sigma(int64_t n, const std::function<void(const Rational&)>& fn);

// Omega_M = union of Sigma_2..Sigma_M, denominator-major order.
void enumerate_omega(int64_t M, const std::function<void(const Rational&)>& fn);

int64_t sigma_count(int64_t n);             // phi(n)
int64_t omega_count(int64_t M);             // sum of phi(n), 2 <= n <= M

}  // namespace modsym
