#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modsym/cosets.hpp"

namespace modsym {

// Per-coset counts c_u(r) = #{ i : g_i(r) in u }.  Entries sum to l(r).
struct PartitionVector {
    std::vector<int32_t> counts;

    int64_t total() const {
        int64_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }
};

PartitionVector partition_vector(const CosetTable& table, const Rational& r);
// Partition vector of r*, recomputed from the reversed digits of r.
PartitionVector dual_partition_vector(const CosetTable& table, const Rational& r);

// Weight function on the sample space, evaluated as Psi(r) = Psi(r*, g(r)):
// the x-argument is the dual rational.  Intervals therefore constrain r*
// unless interval_on_r is set, in which case the membership test applies to r
// itself (the ensemble "Omega_M intersected with J").
struct DensitySpec {
    enum class Kind { uniform, coset_mask, interval_mask, smooth };
    Kind kind = Kind::uniform;
    std::vector<double> mask;  // per-coset factor; empty means all ones
    int64_t lo_num = 0, lo_den = 1;  // interval [lo, hi], endpoints inclusive
    int64_t hi_num = 1, hi_den = 1;
    bool interval_on_r = true;
    std::function<double(double, CosetId)> smooth;  // x in [0,1], end coset

    std::string describe() const;
};

// mask[u] = 1 iff gcd(delta(u), N) = d, delta = lower-right entry of the reps.
std::vector<double> divisor_mask(const CosetTable& table, int64_t d);

struct DirectionStats {
    std::vector<int64_t> direction;
    std::map<int64_t, int64_t> hist;  // value -> count (unit weights)
    std::map<int64_t, double> whist;  // value -> weight
    double sum_w = 0, sum_wt = 0, sum_wt2 = 0;
    int64_t sum_t = 0;
    int128 sum_t2 = 0;
};

struct ResidueStats {
    int64_t q = 0;
    bool full_tracked = false;
    std::vector<int64_t> full_counts;   // size q^k (mixed radix by coset)
    std::vector<double> full_weights;
    std::vector<int64_t> marg_counts;   // [u*q + residue]
    std::vector<double> marg_weights;
};

struct EnsembleStats {
    int64_t level = 0;
    int64_t M = 0;
    int32_t k = 0;
    uint64_t table_fingerprint = 0;
    std::string density;
    bool stat_dual = false;

    int64_t samples = 0;  // members with nonzero weight
    double total_weight = 0;
    bool unit_weights = true;

    std::vector<std::complex<double>> mgf;  // raw weighted sums per probe
    std::vector<ResidueStats> residues;
    std::vector<DirectionStats> dirs;

    // conditional accumulators: probes x residue classes of one direction
    int64_t cond_q = 0;
    std::vector<std::complex<double>> cond_mgf;  // [probe * cond_q + class]
    std::vector<double> cond_weight;             // [class]

    // equidistribution diagnostics for {(r, g(r*))}
    std::vector<int64_t> end_coset_counts;  // coset of g(r*)
    std::vector<int64_t> xbin_counts;       // 128 uniform bins of r
};

struct ScanRequest {
    int64_t M = 0;
    DensitySpec density;
    bool stat_dual = false;  // accumulate statistics of c* instead of c
    std::vector<std::vector<std::complex<double>>> mgf_probes;  // each length k
    std::vector<int64_t> residue_moduli;
    std::vector<std::vector<int64_t>> directions;
    std::optional<std::pair<size_t, int64_t>> conditional;  // (direction index, q)
    std::vector<int64_t> cutoffs;  // ascending; defaults to {M}
    int threads = 0;               // 0 = hardware concurrency
    int64_t chunk_denominators = 64;  // partition granularity of the scan
};

// Single deterministic pass over Omega_M; one EnsembleStats per cutoff.
// Results are independent of the thread count.
std::vector<EnsembleStats> ensemble_scan(const CosetTable& table, const ScanRequest& req);

struct CltReport {
    double mean = 0, variance = 0;
    double ks_plain = 0;      // sup |F_emp - Phi| at atoms
    double ks_corrected = 0;  // lattice midpoint correction
    int64_t samples = 0;
    bool degenerate = false;
    bool low_power = false;  // fewer than 10^3 samples
    std::vector<std::pair<double, double>> standardized_hist;  // (z, probability)
    // quasi-power fit across cutoffs: log E[exp(w.c)] ~ a log M + b
    double quasi_slope = 0, quasi_intercept = 0, quasi_r2 = 0;
};

CltReport clt_report(const std::vector<EnsembleStats>& per_cutoff, size_t dir_index,
                     size_t probe_index = SIZE_MAX);

struct ResidualReport {
    int64_t q = 0;
    double expected_full = 0;  // q^{-k}
    double max_full_dev = 0;
    double max_marginal_dev = 0;
    std::vector<double> full_probs;  // empty if not tracked
    std::vector<std::pair<std::string, double>> requested;  // target tuple -> prob
};

ResidualReport residual_report(const EnsembleStats& stats, int64_t q,
                               const std::vector<std::vector<int64_t>>& targets = {});

struct VarianceFit {
    double slope = 0, shift = 0, r2 = 0;
    std::vector<double> log_m, variances;
};

VarianceFit variance_fit(const std::vector<EnsembleStats>& per_cutoff, size_t dir_index);

// E[exp(w.c) | c = a (mod q) on direction] / E[exp(w.c)]; exact 1 at w = 0.
std::complex<double> conditional_mgf_ratio(const EnsembleStats& stats, size_t probe_index,
                                           int64_t residue_class);

// Least squares y = slope*x + intercept with R^2.
void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& slope,
              double& intercept, double& r2);

}  // namespace modsym
