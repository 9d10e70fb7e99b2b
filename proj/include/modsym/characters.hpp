#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "modsym/manin.hpp"

namespace modsym {

// (Z/n)^x as a product of cyclic factors with discrete logs per factor.
struct UnitGroup {
    int64_t n = 1;
    std::vector<int64_t> orders;                  // d_i
    std::vector<std::vector<int64_t>> dlog;       // dlog[i][a] for units a, -1 otherwise
    int64_t exponent = 1;                         // lcm d_i

    // exponent e(a) with chi(a) = zeta_exponent^{ sum_i k_i dlog_i(a) (m/d_i) }
    int64_t log_exponent(const std::vector<int64_t>& k, int64_t a) const;
};

UnitGroup build_unit_group(int64_t n);

struct DirichletCharacter {
    int64_t n = 1;
    std::vector<int64_t> k;  // exponent per cyclic factor, k_i mod d_i
    int64_t order = 1;
    bool even = true;  // chi(-1) = 1
};

std::vector<DirichletCharacter> enumerate_characters(const UnitGroup& g);

// F_p[x]/(f) with f a fixed irreducible factor of Phi_{m0} mod p, so the class
// of x is a primitive m0-th root of unity.  kappa = ord of p mod m0.
struct CyclotomicField {
    int64_t p = 3;
    int64_t m0 = 1;
    int32_t kappa = 1;
    std::vector<int64_t> modulus;                 // monic, degree kappa
    std::vector<std::vector<int64_t>> root_pow;   // x^t mod f for t in [0, m0)
};

// Deterministic per (p, m0); requires p odd, p not dividing m0.
const CyclotomicField& cyclotomic_field(int64_t p, int64_t m0);

// Element sum_a chibar(a) * m(a/n) reduced mod a prime over p: the character's
// p-power part reduces to 1, the prime-to-p part evaluates through the fixed
// primitive root.  Returns the coefficient vector in F_{p^kappa}.
struct TwistedValue {
    int64_t n = 0;
    int64_t order = 1, m0 = 1;
    int32_t kappa = 1;
    bool even = true;
    std::vector<int64_t> value;  // length kappa, coefficients mod p
    bool nonzero = false;
};

TwistedValue twisted_lvalue_modp(const EigenSymbol& es, const CosetTable& table,
                                 const UnitGroup& units, const DirichletCharacter& chi,
                                 int64_t p);

struct SurveyRow {
    int64_t n = 0;
    int64_t characters = 0;   // of matching parity
    int64_t nonvanishing = 0;
};

struct NonvanishingSurvey {
    int64_t M = 0, p = 0;
    int sign = +1;
    std::vector<SurveyRow> rows;           // n = 2..M
    int64_t total_nonvanishing = 0;
    int64_t conductors_with_nonvanishing = 0;
    double fraction = 0;                   // over conductors 2..M
    double proof_constant = 0;             // 1 - sqrt(1 - (6/pi^2)(1 - 1/p))
};

// Counts characters chi mod n (n <= M, parity matching es.sign) with
// sum_a chibar(a) m(a/n) != 0 mod the fixed prime over p.
NonvanishingSurvey nonvanishing_survey(const EigenSymbol& es, const CosetTable& table, int64_t M,
                                       int64_t p);

}  // namespace modsym
