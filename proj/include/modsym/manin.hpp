#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "modsym/cosets.hpp"
#include "modsym/partition.hpp"

namespace modsym {

// Kernel of an integer matrix as primitive integer row vectors (exact
// fraction-free elimination; throws overflow_error if 128-bit entries are
// exceeded).
std::vector<std::vector<int64_t>> integer_kernel(const std::vector<std::vector<int64_t>>& rows,
                                                 size_t cols);

// Manin symbols for Gamma_0(N): P^1(Z/N) with the 2- and 3-term relations
// x + xS = 0, x + xT + xT^2 = 0, the star involution (c:d) -> (-c:d), and the
// exact kernel of the relation matrix (the dual of the relation quotient,
// where eigensymbol value vectors live).
struct ManinSpace {
    int64_t level = 1;
    P1Table p1;
    std::vector<std::vector<int64_t>> relations;     // rows over P^1 indices
    std::vector<std::vector<int64_t>> dual_basis;    // kernel of the relations
    std::vector<int32_t> star;                       // permutation (c:d) -> (-c:d)

    int32_t symbol_count() const { return p1.size(); }
    int32_t dimension() const { return int32_t(dual_basis.size()); }
    int32_t right_action(int32_t sym, const Mat2& g) const;
};

ManinSpace build_manin_space(int64_t N, int64_t max_level = 2000);

// Heilbronn matrices of determinant p (Cremona's list); the Hecke operator on
// value vectors is (T_p y)(x) = sum_h y(x h).
std::vector<Mat2> heilbronn_matrices(int64_t p);
std::vector<int64_t> hecke_apply(const ManinSpace& space, int64_t p,
                                 const std::vector<int64_t>& y);

struct EllipticCurve {
    int64_t a1 = 0, a2 = 0, a3 = 0, a4 = 0, a6 = 0;

    int128 discriminant() const;
    bool good_reduction(int64_t p) const { return discriminant() % p != 0; }
};

// a_p = p + 1 - #E(F_p) by direct point counting; p <= 10^6, good reduction.
int64_t curve_ap(const EllipticCurve& curve, int64_t p);

struct EigenSymbol {
    int64_t level = 0;
    int sign = +1;  // star eigenvalue
    EllipticCurve curve;
    std::vector<int64_t> values;  // over P^1(Z/N), content 1, first nonzero > 0
    int64_t boundary = 0;         // value on the class of {0, oo}
    std::vector<std::pair<int64_t, int64_t>> certified;  // (p, a_p), exact
};

// Cuts the star-sign eigenspace by (T_p - a_p) kernels until one-dimensional,
// lifts to a primitive integer vector, and certifies T_p y = a_p y exactly for
// all good p <= certify_bound.
EigenSymbol extract_eigensymbol(const ManinSpace& space, const EllipticCurve& curve, int sign,
                                int64_t certify_bound = 20);

// m_f^pm(r) = boundary + sum_u y(u) c_u(r), an exact integer.  The coset table
// must have the same level as the symbol.
int64_t eval_symbol(const EigenSymbol& es, const CosetTable& table, const Rational& r);

struct SymbolResidualReport {
    int64_t p = 0, e = 1;
    int64_t modulus = 0;  // p^e
    int64_t samples = 0;
    std::vector<int64_t> counts;  // per residue class
    double max_dev = 0;           // max |P[class] - p^{-e}|
    bool hypothesis_flag = false;  // user-declared small-p reducibility warning
};

// Residual equidistribution of eval_symbol over Omega_{M,density}.
SymbolResidualReport residual_symbol_report(const EigenSymbol& es, const CosetTable& table,
                                            int64_t M, const DensitySpec& density, int64_t p,
                                            int64_t e, int threads = 0,
                                            bool reducibility_flag = false);

}  // namespace modsym
