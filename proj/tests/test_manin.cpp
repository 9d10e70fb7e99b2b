#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include "modsym/manin.hpp"

using namespace modsym;

namespace {

const EllipticCurve k11a1{0, -1, 1, -10, -20};

// independent rank oracle: elimination mod a large prime
int32_t rank_mod_p(const std::vector<std::vector<int64_t>>& rows, size_t cols) {
    const int64_t P = 2147483629;
    std::vector<std::vector<int64_t>> m;
    for (auto& r : rows) {
        std::vector<int64_t> rr(cols);
        for (size_t j = 0; j < cols; ++j) rr[j] = ((r[j] % P) + P) % P;
        m.push_back(rr);
    }
    int32_t rank = 0;
    for (size_t col = 0; col < cols && size_t(rank) < m.size(); ++col) {
        size_t sel = SIZE_MAX;
        for (size_t i = size_t(rank); i < m.size(); ++i)
            if (m[i][col] != 0) {
                sel = i;
                break;
            }
        if (sel == SIZE_MAX) continue;
        std::swap(m[size_t(rank)], m[sel]);
        int64_t inv = mod_pow(m[size_t(rank)][col], P - 2, P);
        for (size_t j = 0; j < cols; ++j) m[size_t(rank)][j] = (int128(m[size_t(rank)][j]) * inv) % P;
        for (size_t i = 0; i < m.size(); ++i) {
            if (i == size_t(rank) || m[i][col] == 0) continue;
            int64_t f = m[i][col];
            for (size_t j = 0; j < cols; ++j)
                m[i][j] = ((m[i][j] - int128(f) * m[size_t(rank)][j]) % P + P) % P;
        }
        ++rank;
    }
    return rank;
}

}  // namespace

TEST_CASE("symbol counts for prime and composite level") {
    CHECK(build_manin_space(11).symbol_count() == 12);
    CHECK(build_manin_space(6).symbol_count() == 12);
}

TEST_CASE("relation rank + quotient dimension = symbol count; N=11 quotient is 3") {
    for (int64_t N : {6, 11, 14}) {
        auto sp = build_manin_space(N);
        int32_t r = rank_mod_p(sp.relations, size_t(sp.symbol_count()));
        CHECK(r + sp.dimension() == sp.symbol_count());
        // kernel vectors annihilate every relation exactly
        for (const auto& y : sp.dual_basis)
            for (const auto& row : sp.relations) {
                int64_t acc = 0;
                for (size_t j = 0; j < y.size(); ++j) acc += row[j] * y[j];
                CHECK(acc == 0);
            }
    }
    CHECK(build_manin_space(11).dimension() == 3);
}

TEST_CASE("star commutes with the relation quotient") {
    for (int64_t N : {6, 11}) {
        auto sp = build_manin_space(N);
        // star images of kernel vectors stay in the kernel
        for (const auto& y : sp.dual_basis) {
            std::vector<int64_t> sy(y.size());
            for (size_t x = 0; x < y.size(); ++x) sy[x] = y[size_t(sp.star[x])];
            for (const auto& row : sp.relations) {
                int64_t acc = 0;
                for (size_t j = 0; j < y.size(); ++j) acc += row[j] * sy[j];
                CHECK(acc == 0);
            }
        }
    }
}

TEST_CASE("point counts for 11a1") {
    CHECK(curve_ap(k11a1, 2) == -2);
    CHECK(curve_ap(k11a1, 3) == -1);
    CHECK(curve_ap(k11a1, 5) == 1);
    CHECK(curve_ap(k11a1, 7) == -2);
    CHECK(curve_ap(k11a1, 13) == 4);
    CHECK_THROWS(curve_ap(k11a1, 11));  // bad reduction
    // Hasse bound is checked internally for a range of primes
    for (int64_t p : {101, 997, 10007}) CHECK(std::abs(curve_ap(k11a1, p)) <= 2 * int64_t(std::sqrt(double(p))) + 1);
}

TEST_CASE("eigensymbol extraction for 11a1, both signs") {
    auto sp = build_manin_space(11);
    for (int sign : {+1, -1}) {
        auto es = extract_eigensymbol(sp, k11a1, sign);
        CHECK(es.level == 11);
        // content 1
        int64_t g = 0;
        for (int64_t v : es.values) g = std::gcd(g, std::abs(v));
        CHECK(g == 1);
        // star eigenvalue exactly
        for (size_t x = 0; x < es.values.size(); ++x)
            CHECK(es.values[size_t(sp.star[x])] == sign * es.values[x]);
        // independent certification primes appear (5 and 7 not needed to cut)
        bool has5 = false, has7 = false;
        for (auto& [p, ap] : es.certified) {
            if (p == 5) {
                has5 = true;
                CHECK(ap == 1);
            }
            if (p == 7) {
                has7 = true;
                CHECK(ap == -2);
            }
        }
        CHECK(has5);
        CHECK(has7);
        // exact Hecke relation for all certified primes re-verified here
        for (auto& [p, ap] : es.certified) {
            auto ty = hecke_apply(sp, p, es.values);
            for (size_t x = 0; x < es.values.size(); ++x) CHECK(ty[x] == ap * es.values[x]);
        }
    }
    // minus symbol has zero boundary by antisymmetry
    CHECK(extract_eigensymbol(sp, k11a1, -1).boundary == 0);
}

TEST_CASE("Atkin-Lehner relation on Sigma_n for multiples of 11") {
    // the Fricke matrix [[1,a/n],[0,1]] W_{n^2} [[1,-u/n],[0,1]] is integral
    // exactly when a u = -1 (mod n), so the relation reads
    // m^s(a/n) = -s * m^s(abar/n): antisymmetric for +, symmetric for -.
    auto sp = build_manin_space(11);
    auto table = build_coset_table(11);
    for (int sign : {+1, -1}) {
        auto es = extract_eigensymbol(sp, k11a1, sign);
        for (int64_t n = 11; n <= 110; n += 11) {
            for (int64_t a = 1; a < n; ++a) {
                if (std::gcd(a, n) != 1) continue;
                int64_t abar = mod_inverse(a, n);
                CHECK(eval_symbol(es, table, Rational(a, n)) ==
                      -sign * eval_symbol(es, table, Rational(abar, n)));
            }
        }
        // mean over Sigma_11 vanishes for the minus symbol (odd under r -> 1-r)
        if (sign == -1) {
            int64_t total = 0;
            for (int64_t a = 1; a < 11; ++a) total += eval_symbol(es, table, Rational(a, 11));
            CHECK(total == 0);
        }
    }
}

TEST_CASE("eval agrees with numerical period integrals of the level-11 eta product") {
    // independent oracle: f = q prod (1-q^m)^2 (1-q^{11m})^2 integrated along
    // {z0, gamma z0} cycles; the plus symbol tracks Im<cycle, omega> and the
    // minus symbol Re<cycle, omega> up to one global scale each.
    const int M = 400;
    std::vector<double> coeff(M + 1, 0.0), poly(M + 1, 0.0);
    poly[0] = 1.0;
    auto mul_factor = [&](int step) {
        for (int m = 1; m * step <= M; ++m)
            for (int i = M; i >= m * step; --i) poly[size_t(i)] -= poly[size_t(i - m * step)];
    };
    mul_factor(1);
    mul_factor(1);
    mul_factor(11);
    mul_factor(11);
    for (int i = 0; i + 1 <= M; ++i) coeff[size_t(i + 1)] = poly[size_t(i)];
    REQUIRE(coeff[2] == -2);  // a_2 of 11a1
    REQUIRE(coeff[3] == -1);

    auto G = [&](std::complex<double> z) {  // integral from z to i*infinity
        std::complex<double> s = 0;
        for (int m = 1; m <= M; ++m) {
            if (coeff[size_t(m)] == 0.0) continue;
            s += (coeff[size_t(m)] / m) * std::exp(std::complex<double>(0, 2 * M_PI * m) * z);
        }
        return std::complex<double>(0, 1 / (2 * M_PI)) * s;
    };

    auto sp = build_manin_space(11);
    auto table = build_coset_table(11);
    auto ep = extract_eigensymbol(sp, k11a1, +1);
    auto em = extract_eigensymbol(sp, k11a1, -1);
    double scale_p = 0, scale_m = 0;
    for (int64_t c = 1; c <= 3; ++c) {
        int64_t n = 11 * c;
        for (int64_t a = 1; a < n; ++a) {
            if (std::gcd(a, n) != 1) continue;
            int64_t d = mod_inverse(a, n);
            int64_t b = (a * d - 1) / n;
            std::complex<double> z0(-double(d) / double(n), 1.0 / double(n));
            std::complex<double> gz0(double(a) / double(n), 1.0 / double(n));
            std::complex<double> P = G(z0) - G(gz0);
            int64_t vp = eval_symbol(ep, table, Rational(a, n));
            int64_t vm = eval_symbol(em, table, Rational(a, n));
            (void)b;
            if (scale_p == 0 && vp != 0) scale_p = P.imag() / double(vp);
            if (scale_m == 0 && vm != 0) scale_m = P.real() / double(vm);
            if (scale_p != 0) CHECK(std::abs(P.imag() - scale_p * double(vp)) < 1e-8);
            if (scale_m != 0) CHECK(std::abs(P.real() - scale_m * double(vm)) < 1e-8);
        }
    }
    CHECK(scale_p != 0);
    CHECK(scale_m != 0);
}

TEST_CASE("eval is well-defined across Gamma_0(N)-equivalent paths") {
    // for gamma = [[1,0],[11,1]] the difference m(gamma r) - m(r) is the
    // pairing with the closed cycle {r, gamma r}, which depends on gamma only;
    // evaluating it at independent random r must give the same integer.
    auto sp = build_manin_space(11);
    auto table = build_coset_table(11);
    auto es = extract_eigensymbol(sp, k11a1, +1);
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int64_t> den(5, 400);
        int64_t n = den(rng);
        std::uniform_int_distribution<int64_t> num(1, n - 1);
        int64_t a = num(rng);
        if (std::gcd(a, n) != 1) continue;
        // gamma = [[1, 0], [11, 1]]: gamma(a/n) = a / (11 a + n), gamma(0) = 0
        int64_t n2 = 11 * a + n;
        int64_t ev1 = eval_symbol(es, table, Rational(a, n));
        int64_t ev2 = eval_symbol(es, table, Rational(a, n2));
        // {gamma r, r} projects to a closed cycle through gamma: the pairing
        // with the eigensymbol is gamma-independent of r, so compare two r's
        std::uniform_int_distribution<int64_t> den2(5, 400);
        int64_t m = den2(rng);
        std::uniform_int_distribution<int64_t> num2(1, m - 1);
        int64_t b = num2(rng);
        if (std::gcd(b, m) != 1) continue;
        int64_t m2 = 11 * b + m;
        int64_t ev3 = eval_symbol(es, table, Rational(b, m));
        int64_t ev4 = eval_symbol(es, table, Rational(b, m2));
        CHECK(ev2 - ev1 == ev4 - ev3);
    }
}

TEST_CASE("residual symbol report: probabilities sum to one; reducible-p flag") {
    auto sp = build_manin_space(11);
    auto table = build_coset_table(11);
    auto es = extract_eigensymbol(sp, k11a1, +1);
    auto rep = residual_symbol_report(es, table, 400, DensitySpec{}, 3, 1);
    int64_t total = 0;
    for (int64_t c : rep.counts) total += c;
    CHECK(total == rep.samples);
    CHECK(rep.max_dev < 0.2);
    // p = 5 has reducible residual representation for 11a1: report is still
    // produced, carrying the caller-supplied flag
    auto rep5 = residual_symbol_report(es, table, 100, DensitySpec{}, 5, 1, 0, true);
    CHECK(rep5.hypothesis_flag);
    CHECK_THROWS(residual_symbol_report(es, table, 100, DensitySpec{}, 11, 1));
}
