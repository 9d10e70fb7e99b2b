#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "modsym/cf.hpp"

namespace modsym {

// P^1(Z/N): classes (c : d) of pairs with gcd(c, d, N) = 1 modulo units.
struct P1Table {
    int64_t level = 1;
    std::vector<std::pair<int64_t, int64_t>> reps;  // canonical (c, d) per class

    int32_t size() const { return int32_t(reps.size()); }
    // Canonical form of (c : d); pair need not be reduced mod N.
    std::pair<int64_t, int64_t> normalize(int64_t c, int64_t d) const;
    // Class index of (c : d); throws if gcd(c, d, N) > 1.
    int32_t lookup(int64_t c, int64_t d) const;

    std::unordered_map<int64_t, int32_t> index_;  // key c * N + d of canonical pair
};

P1Table build_p1(int64_t N);

// Coset id in [0, k) for Gamma_0(N)\GL_2(Z), where Gamma_0(N) is the classical
// congruence subgroup of SL_2(Z) (lower-left = 0 mod N, det = +1).  The index
// is k = 2 N prod_{p|N} (1 + 1/p): the P^1(Z/N) class of the bottom row and
// the determinant sign together separate cosets.
using CosetId = int32_t;

struct CosetTable {
    int64_t level = 1;
    int32_t index_count = 0;  // k
    P1Table p1;
    // Shimura transversal: bottom rows (c, d) with gcd(c,d)=1, d | N,
    // 0 < c <= N/d, lifted to SL_2; det -1 block is the same list times
    // diag(1,-1).  reps[i + k/2] = reps[i] * diag(1,-1).
    std::vector<Mat2> reps;
    std::vector<CosetId> digit_action;  // dense [u][m mod N] when small enough
    CosetId id_coset = 0;               // coset of the identity matrix
    uint64_t fingerprint = 0;

    CosetId act_digit(CosetId u, int64_t m) const {
        if (!digit_action.empty())
            return digit_action[size_t(u) * size_t(level) + size_t(m % level)];
        return act_digit_slow(u, m % level);
    }
    CosetId act_digit_slow(CosetId u, int64_t t) const;
    CosetId identity_coset() const { return id_coset; }
};

// Builds representatives and lookup tables.  N is capped (default 10^4) to
// bound table size.
CosetTable build_coset_table(int64_t N, int64_t max_level = 10000);

// Resolves any integer matrix of determinant +-1 to its coset.
CosetId coset_of(const CosetTable& table, const Mat2& g);

struct search_budget_error : std::runtime_error {
    explicit search_budget_error(const std::string& s) : std::runtime_error(s) {}
};

// Digits m_1..m_l with rep(u) * prod_j [[-m_j,1],[1,0]] in Gamma_0(N)*rep(v),
// certified by multiplication before returning.  When u == v the empty word is
// returned unless allow_empty is false.  The prime search in the construction
// observes `budget` candidates and throws search_budget_error beyond it.
std::vector<int64_t> connecting_word(const CosetTable& table, CosetId u, CosetId v,
                                     bool allow_empty = true, int64_t budget = 1000000);

// Orthonormal basis of the "coboundary" directions of the digit-action graph:
// vectors delta_f(u) = f(u) - f(pred(u)) for functions f constant on the
// predecessor set of every coset.  Along any digit path these statistics
// telescope to f(end) - f(start), so delta . c(r) is bounded; they span the
// degenerate directions of all partition-vector limit laws.
std::vector<std::vector<double>> coboundary_directions(const CosetTable& table);

}  // namespace modsym
