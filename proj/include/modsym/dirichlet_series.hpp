#pragma once

#include "modsym/transfer_operator.hpp"

namespace modsym {

// L_Psi(2s, w) = sum_r Psi(r*, g(r)) exp(w.c(r)) / Q(r)^{2s} by exact
// enumeration up to `cutoff`, plus a Moebius/Hurwitz completion of the
// denominator tail when it is computable (w = 0 and a density that only sees
// gcd(Q, N); exact for N in {1, 2}).  `tail_bound` always bounds the mass not
// in `value`.
struct DirectSeries {
    cdouble partial = 0;
    cdouble value = 0;
    double tail_bound = 0;          // error bound on `value`
    double partial_tail_bound = 0;  // monotone bound on the mass beyond `cutoff`
    bool completed = false;
};

DirectSeries dirichlet_series_direct(const CosetTable& table, const DensitySpec& density,
                                     cdouble s, const std::vector<cdouble>& w, int64_t cutoff);

// Closed form of the uniform level-1 series, sum_{n>=2} phi(n) n^{-2s}
// = zeta(2s-1)/zeta(2s) - 1; an independent cross-check of the oracle.
cdouble level_one_series_closed_form(cdouble s);

struct KeyRelationResult {
    cdouble operator_value = 0;   // (I-L^2)^{-1} F Psi (0,I) + L (I-L^2)^{-1} F JPsi (0,I)
    cdouble one_term_value = 0;   // (I-L)^{-1} F Psi (0,I), meaningful when JPsi = Psi
    DirectSeries direct;
    double discrepancy = 0;       // |operator_value - direct.value|
    double form_agreement = 0;    // |operator_value - one_term_value| when JPsi = Psi
    bool j_symmetric = false;
    int neumann_terms = 0;
};

// Numerical verification of the key operator identity for L_Psi(2s, w).
// Requires real s in the absolutely convergent range (lambda(s) < 1).
KeyRelationResult check_key_relation(const OperatorGrid& grid, const DensitySpec& density,
                                     cdouble s, const std::vector<cdouble>& w, int64_t cutoff);

}  // namespace modsym
