#pragma once

#include <complex>
#include <vector>

#include "modsym/chebyshev.hpp"
#include "modsym/cosets.hpp"
#include "modsym/partition.hpp"
#include "modsym/zeta.hpp"

namespace modsym {

struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& s) : std::runtime_error(s) {}
};

// Collocation grid for functions on I_Gamma = [0,1] x cosets: Chebyshev nodes
// per coset copy, explicit branches m <= m_max, and per-residue-class
// Hurwitz-zeta completion of the branch tails.
struct OperatorGrid {
    int64_t level = 1;
    int32_t n = 48;
    int64_t m_max = 4096;
    bool zeta_tails = true;
    int32_t tail_degree = 12;
    CosetTable table;
    ChebGrid cheb;

    int32_t k() const { return table.index_count; }
    int32_t dim() const { return n * table.index_count; }
    size_t idx(int32_t node, CosetId u) const { return size_t(u) * size_t(n) + size_t(node); }
};

OperatorGrid make_operator_grid(int64_t level, int32_t n = 48, int64_t m_max = 4096,
                                bool zeta_tails = true, int32_t tail_degree = 12);

// Node-space functions: length dim() vectors, coset-major.
using NodeVec = std::vector<cdouble>;

struct OperatorMatrix {
    cdouble s;
    std::vector<cdouble> w;  // length k
    int32_t n = 0, k = 0;
    std::vector<cdouble> a;  // dim x dim, row-major
    bool truncation_warning = false;

    int32_t dim() const { return n * k; }
    NodeVec apply(const NodeVec& v) const;
    NodeVec apply_transpose(const NodeVec& v) const;
};

// Matrix of L_{s,w}; branch weight exp(w . I(v A_m)) (m + x)^{-2s}.
// Requires Re s > 1/2.
OperatorMatrix build_operator(const OperatorGrid& grid, cdouble s, const std::vector<cdouble>& w);
// Entrywise dL/ds (each branch gains a factor -2 log(m + x)).
OperatorMatrix build_operator_ds(const OperatorGrid& grid, cdouble s,
                                 const std::vector<cdouble>& w);
// The single branch m = 1; the final operator is L minus this.
OperatorMatrix build_branch_one(const OperatorGrid& grid, cdouble s,
                                const std::vector<cdouble>& w);

// J: (x, v) -> (1 - x, v); a node permutation since the nodes are symmetric.
NodeVec apply_reflection(const OperatorGrid& grid, const NodeVec& v);

cdouble eval_at(const OperatorGrid& grid, const NodeVec& v, double x, CosetId u);

// Samples a density (mask x smooth factor) on the grid; interval kinds are
// rejected, collocation needs continuous data.
NodeVec sample_density(const OperatorGrid& grid, const DensitySpec& density);

struct SpectralSolution {
    cdouble lambda;
    double lambda2_abs = 0;   // modulus of the next eigenvalue, det-parity twins excluded
    double gap = 0;           // |lambda2| / |lambda|
    double residual = 0;      // ||L phi - lambda phi||_inf / ||phi||_inf
    NodeVec eigenfunction;    // right, normalized sup-norm 1, positive for real data
    NodeVec left;             // left eigenvector, <left, right> = 1
    bool near_degenerate = false;
    int iterations = 0;
};

// Dominant eigenpair by power iteration on L^2 (every inverse branch flips the
// determinant class, so -lambda always pairs with lambda; the twin is split
// off afterwards and excluded from the gap diagnostic).
SpectralSolution dominant_spectrum(const OperatorGrid& grid, const OperatorMatrix& op);

// Norm-based spectral radius estimate ||L^n v||^(1/k)-style; robust at complex
// parameters where the dominant eigenvalue need not be simple.
double spectral_radius_estimate(const OperatorMatrix& op, int iterations = 200);

// min_i |lambda_i - 1| by inverse power iteration on (L - I); the quantity of
// the away-from-1 sweep diagnostic.  Returns 0 when L - I is singular to
// working precision.
double distance_from_one(const OperatorMatrix& op, int iterations = 80);

struct S0Result {
    cdouble s0;
    int iterations = 0;
    cdouble lambda_at_s0;
};

// Newton solve of lambda(s, w) = 1 from s = 1, analytic dlambda/ds.
S0Result solve_s0(const OperatorGrid& grid, const std::vector<cdouble>& w,
                  double tol = 1e-11);

// Central finite differences of s0 at w = 0.
std::vector<double> s0_gradient(const OperatorGrid& grid, double step = 1e-4);

struct HessianResult {
    std::vector<std::vector<double>> H;
    double presym_asym = 0;      // zero by construction of the stencil
    double sigma_min = 0;        // smallest singular value of H
    // lambda(s, w + c delta) = lambda(s, w) exactly for every coboundary
    // direction delta of the digit graph (diagonal similarity), so H
    // annihilates that whole subspace; the meaningful non-degeneracy lives on
    // its complement.
    int32_t kernel_dim = 0;        // dimension of the coboundary space
    double kernel_residual = 0;    // max |(H delta)_i| over the basis (noise)
    double sigma_min_complement = 0;
};

// Symmetric Hessian of s0 at w = 0 by the 4-point stencil (symmetric term by
// term), with the structural-kernel diagnostics above.
HessianResult s0_hessian(const OperatorGrid& grid, double step = 1e-4);

struct ResidueConstant {
    double quadrature = 0;  // (1 / 2 log 2) * integral of Psi
    double spectral = 0;    // F Phi(0,I)/(1+lambda) * (<mu,Psi> + lambda <mu,JPsi>)
};

ResidueConstant residue_constant(const OperatorGrid& grid, const DensitySpec& density);

}  // namespace modsym
