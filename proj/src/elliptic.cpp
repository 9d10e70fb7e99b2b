#include "modsym/manin.hpp"

#include <stdexcept>
#include <vector>

namespace modsym {

int128 EllipticCurve::discriminant() const {
    int128 b2 = int128(a1) * a1 + 4 * int128(a2);
    int128 b4 = 2 * int128(a4) + int128(a1) * a3;
    int128 b6 = int128(a3) * a3 + 4 * int128(a6);
    int128 b8 = int128(a1) * a1 * a6 + 4 * int128(a2) * a6 - int128(a1) * a3 * a4 +
                int128(a2) * a3 * a3 - int128(a4) * a4;
    return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
}

int64_t curve_ap(const EllipticCurve& c, int64_t p) {
    if (!is_prime(p) || p > 1000000)
        throw std::invalid_argument("curve_ap: need a prime p <= 10^6");
    int128 disc = c.discriminant() % p;
    if (disc == 0) throw std::invalid_argument("curve_ap: bad reduction at p");
    auto md = [&](int128 v) {
        int64_t r = int64_t(v % p);
        return r < 0 ? r + p : r;
    };
    int64_t count = 1;  // point at infinity
    if (p <= 3) {
        for (int64_t x = 0; x < p; ++x)
            for (int64_t y = 0; y < p; ++y) {
                int64_t lhs = md(int128(y) * y + int128(c.a1) * x * y + int128(c.a3) * y);
                int64_t rhs =
                    md(int128(x) * x * x + int128(c.a2) * x * x + int128(c.a4) * x + c.a6);
                if (lhs == rhs) ++count;
            }
    } else {
        // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6; count by the
        // quadratic character via a squares table
        int64_t b2 = md(int128(c.a1) * c.a1 + 4 * int128(c.a2));
        int64_t b4 = md(2 * int128(c.a4) + int128(c.a1) * c.a3);
        int64_t b6 = md(int128(c.a3) * c.a3 + 4 * int128(c.a6));
        std::vector<int8_t> is_square(size_t(p), 0);
        for (int64_t u = 0; u < p; ++u) is_square[size_t((u * u) % p)] = 1;
        for (int64_t x = 0; x < p; ++x) {
            int64_t v = md(((int128(4) * x % p * x % p + int128(b2) * x % p) % p) * x % p +
                           int128(2) * b4 % p * x % p + b6);
            if (v == 0)
                count += 1;
            else
                count += is_square[size_t(v)] ? 2 : 0;
        }
    }
    int64_t ap = p + 1 - count;
    if (double(ap) * double(ap) > 4.0 * double(p))
        throw std::logic_error("curve_ap: Hasse bound violated");
    return ap;
}

}  // namespace modsym
