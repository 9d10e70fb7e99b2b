#include "modsym/partition.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

namespace modsym {

PartitionVector partition_vector(const CosetTable& table, const Rational& r) {
    if (r.num == r.den) throw std::invalid_argument("partition_vector: r must lie in (0,1)");
    PartitionVector out;
    out.counts.assign(size_t(table.index_count), 0);
    CFExpansion e = cf_expand(r);
    CosetId u = table.identity_coset();
    for (int64_t m : e.digits) {
        u = table.act_digit(u, m);
        out.counts[size_t(u)] += 1;
    }
    return out;
}

PartitionVector dual_partition_vector(const CosetTable& table, const Rational& r) {
    PartitionVector out;
    out.counts.assign(size_t(table.index_count), 0);
    auto dd = dual_digits(cf_expand(r));
    CosetId u = table.identity_coset();
    for (int64_t m : dd) {
        u = table.act_digit(u, m);
        out.counts[size_t(u)] += 1;
    }
    return out;
}

std::string DensitySpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::uniform: os << "uniform"; break;
        case Kind::coset_mask: os << "coset_mask"; break;
        case Kind::interval_mask:
            os << "interval[" << lo_num << "/" << lo_den << "," << hi_num << "/" << hi_den << "]x"
               << (interval_on_r ? "r" : "r*") << "_mask";
            break;
        case Kind::smooth: os << "smooth"; break;
    }
    if (!mask.empty()) {
        os << ":";
        for (double v : mask) os << (v != 0 ? "1" : "0");
    }
    return os.str();
}

std::vector<double> divisor_mask(const CosetTable& table, int64_t d) {
    std::vector<double> mask(size_t(table.index_count), 0.0);
    for (size_t i = 0; i < mask.size(); ++i) {
        int64_t delta = std::abs(int64_t(table.reps[i].d));
        if (std::gcd(delta, table.level) == d) mask[i] = 1.0;
    }
    return mask;
}

namespace {

struct Scratch {
    std::vector<int64_t> digits;
    std::vector<int64_t> ddigits;
    std::vector<int32_t> counts, dcounts;
    std::vector<CosetId> touched, dtouched;
};

void chain(const CosetTable& t, const std::vector<int64_t>& digits, std::vector<int32_t>& counts,
           std::vector<CosetId>& touched, CosetId& end) {
    for (CosetId u : touched) counts[size_t(u)] = 0;
    touched.clear();
    CosetId u = t.identity_coset();
    for (int64_t m : digits) {
        u = t.act_digit(u, m);
        if (counts[size_t(u)] == 0) touched.push_back(u);
        counts[size_t(u)] += 1;
    }
    end = u;
}

// Digits of r* from the digits of r (reversal law plus the parity reflection).
void dual_digit_string(const std::vector<int64_t>& d, std::vector<int64_t>& out) {
    out.assign(d.rbegin(), d.rend());
    auto canonicalize = [](std::vector<int64_t>& v) {
        if (v.size() > 1 && v.back() == 1) {
            v.pop_back();
            v.back() += 1;
        }
    };
    if (d.size() % 2 == 1) {
        canonicalize(out);
        return;
    }
    // 1 - [0; a_1, a_2, ...]
    if (out[0] >= 2) {
        out[0] -= 1;
        out.insert(out.begin(), 1);
    } else {
        out.erase(out.begin());
        out[0] += 1;
    }
    canonicalize(out);
}

struct ChunkRange {
    int64_t lo, hi;  // denominators [lo, hi)
    size_t cutoff_after;  // index of cutoff that closes at hi, SIZE_MAX if none
};

void merge_into(EnsembleStats& a, const EnsembleStats& b) {
    a.samples += b.samples;
    a.total_weight += b.total_weight;
    a.unit_weights = a.unit_weights && b.unit_weights;
    for (size_t i = 0; i < a.mgf.size(); ++i) a.mgf[i] += b.mgf[i];
    for (size_t i = 0; i < a.residues.size(); ++i) {
        auto& ra = a.residues[i];
        const auto& rb = b.residues[i];
        for (size_t j = 0; j < ra.full_counts.size(); ++j) {
            ra.full_counts[j] += rb.full_counts[j];
            ra.full_weights[j] += rb.full_weights[j];
        }
        for (size_t j = 0; j < ra.marg_counts.size(); ++j) {
            ra.marg_counts[j] += rb.marg_counts[j];
            ra.marg_weights[j] += rb.marg_weights[j];
        }
    }
    for (size_t i = 0; i < a.dirs.size(); ++i) {
        auto& da = a.dirs[i];
        const auto& db = b.dirs[i];
        for (auto& [k, v] : db.hist) da.hist[k] += v;
        for (auto& [k, v] : db.whist) da.whist[k] += v;
        da.sum_w += db.sum_w;
        da.sum_wt += db.sum_wt;
        da.sum_wt2 += db.sum_wt2;
        da.sum_t += db.sum_t;
        da.sum_t2 += db.sum_t2;
    }
    for (size_t i = 0; i < a.cond_mgf.size(); ++i) a.cond_mgf[i] += b.cond_mgf[i];
    for (size_t i = 0; i < a.cond_weight.size(); ++i) a.cond_weight[i] += b.cond_weight[i];
    for (size_t i = 0; i < a.end_coset_counts.size(); ++i)
        a.end_coset_counts[i] += b.end_coset_counts[i];
    for (size_t i = 0; i < a.xbin_counts.size(); ++i) a.xbin_counts[i] += b.xbin_counts[i];
}

}  // namespace

std::vector<EnsembleStats> ensemble_scan(const CosetTable& table, const ScanRequest& req) {
    if (req.M < 2) throw std::invalid_argument("ensemble_scan: M >= 2 required");
    const int32_t k = table.index_count;
    for (const auto& w : req.mgf_probes)
        if (int32_t(w.size()) != k) throw std::invalid_argument("mgf probe has wrong dimension");
    for (const auto& d : req.directions)
        if (int32_t(d.size()) != k) throw std::invalid_argument("direction has wrong dimension");

    std::vector<int64_t> cutoffs = req.cutoffs.empty() ? std::vector<int64_t>{req.M} : req.cutoffs;
    if (!std::is_sorted(cutoffs.begin(), cutoffs.end()) || cutoffs.back() != req.M)
        throw std::invalid_argument("cutoffs must be ascending and end at M");

    EnsembleStats proto;
    proto.level = table.level;
    proto.k = k;
    proto.table_fingerprint = table.fingerprint;
    proto.density = req.density.describe();
    proto.stat_dual = req.stat_dual;
    proto.mgf.assign(req.mgf_probes.size(), {0.0, 0.0});
    for (int64_t q : req.residue_moduli) {
        if (q < 2) throw std::invalid_argument("residue modulus must be >= 2");
        ResidueStats rs;
        rs.q = q;
        double cells = std::pow(double(q), double(k));
        rs.full_tracked = cells <= double(1 << 20);
        if (rs.full_tracked) {
            size_t n = 1;
            for (int32_t i = 0; i < k; ++i) n *= size_t(q);
            rs.full_counts.assign(n, 0);
            rs.full_weights.assign(n, 0.0);
        }
        rs.marg_counts.assign(size_t(k) * size_t(q), 0);
        rs.marg_weights.assign(size_t(k) * size_t(q), 0.0);
        proto.residues.push_back(std::move(rs));
    }
    for (const auto& d : req.directions) {
        DirectionStats ds;
        ds.direction = d;
        proto.dirs.push_back(std::move(ds));
    }
    if (req.conditional) {
        if (req.conditional->first >= req.directions.size())
            throw std::invalid_argument("conditional direction index out of range");
        proto.cond_q = req.conditional->second;
        proto.cond_mgf.assign(req.mgf_probes.size() * size_t(proto.cond_q), {0.0, 0.0});
        proto.cond_weight.assign(size_t(proto.cond_q), 0.0);
    }
    proto.end_coset_counts.assign(size_t(k), 0);
    proto.xbin_counts.assign(128, 0);

    // chunk boundaries: blocks of denominators, split at every cutoff
    std::vector<ChunkRange> chunks;
    {
        const int64_t block = std::max<int64_t>(1, req.chunk_denominators);
        int64_t lo = 2;
        size_t ci = 0;
        while (lo <= req.M) {
            int64_t hi = std::min(lo + block, req.M + 1);
            while (ci < cutoffs.size() && cutoffs[ci] < lo) ++ci;
            if (ci < cutoffs.size() && cutoffs[ci] + 1 > lo && cutoffs[ci] + 1 < hi)
                hi = cutoffs[ci] + 1;
            ChunkRange cr{lo, hi, SIZE_MAX};
            if (ci < cutoffs.size() && hi == cutoffs[ci] + 1) cr.cutoff_after = ci++;
            chunks.push_back(cr);
            lo = hi;
        }
    }

    std::vector<EnsembleStats> partial(chunks.size(), proto);
    const bool has_interval = req.density.kind == DensitySpec::Kind::interval_mask;
    const bool has_smooth = req.density.kind == DensitySpec::Kind::smooth;
    const std::vector<double>* mask =
        (req.density.kind != DensitySpec::Kind::uniform && !req.density.mask.empty())
            ? &req.density.mask
            : nullptr;

    auto worker_body = [&](size_t chunk_idx) {
        EnsembleStats& st = partial[chunk_idx];
        Scratch sc;
        sc.counts.assign(size_t(k), 0);
        sc.dcounts.assign(size_t(k), 0);
        for (int64_t n = chunks[chunk_idx].lo; n < chunks[chunk_idx].hi; ++n) {
            for (int64_t a = 1; a < n; ++a) {
                if (std::gcd(a, n) != 1) continue;
                // digits of a/n and the continuant Q_{l-1}
                sc.digits.clear();
                int64_t p = a, q = n;
                // forward continuants: q_i = m_i q_{i-1} + q_{i-2}, q_0 = 1, q_{-1} = 0
                int64_t q_prev = 0, q_cur = 1;
                while (p != 0) {
                    int64_t m = q / p;
                    sc.digits.push_back(m);
                    q = std::exchange(p, q % p);
                    int64_t qn = m * q_cur + q_prev;
                    q_prev = std::exchange(q_cur, qn);
                }
                const int64_t ell = int64_t(sc.digits.size());
                const int64_t q_lm1 = q_prev;  // Q_{l-1}
                // r* = Q_{l-1}/n for odd l, (n - Q_{l-1})/n for even l
                const int64_t dual_num = (ell % 2 == 1) ? q_lm1 : n - q_lm1;

                CosetId end_c = 0, end_cd = 0;
                chain(table, sc.digits, sc.counts, sc.touched, end_c);
                dual_digit_string(sc.digits, sc.ddigits);
                chain(table, sc.ddigits, sc.dcounts, sc.dtouched, end_cd);

                // density weight; Psi(r) = Psi(r*, g(r))
                double w = 1.0;
                if (mask) w *= (*mask)[size_t(end_c)];
                if (has_interval && w != 0) {
                    int64_t tn = req.density.interval_on_r ? a : dual_num;
                    // lo <= tn/n <= hi, exact
                    if (int128(req.density.lo_num) * n > int128(tn) * req.density.lo_den ||
                        int128(tn) * req.density.hi_den > int128(req.density.hi_num) * n)
                        w = 0;
                }
                if (has_smooth && w != 0)
                    w *= req.density.smooth(double(dual_num) / double(n), end_c);
                if (w == 0) continue;
                bool unit = (w == 1.0);
                if (!unit) st.unit_weights = false;

                st.samples += 1;
                st.total_weight += w;

                const std::vector<int32_t>& stat = req.stat_dual ? sc.dcounts : sc.counts;
                const std::vector<CosetId>& stouched = req.stat_dual ? sc.dtouched : sc.touched;

                for (size_t pi = 0; pi < req.mgf_probes.size(); ++pi) {
                    std::complex<double> e = 0;
                    for (CosetId u : stouched)
                        e += req.mgf_probes[pi][size_t(u)] * double(stat[size_t(u)]);
                    std::complex<double> val = w * std::exp(e);
                    st.mgf[pi] += val;
                    if (req.conditional) {
                        const auto& dirv = req.directions[req.conditional->first];
                        int64_t t = 0;
                        for (CosetId u : stouched) t += dirv[size_t(u)] * stat[size_t(u)];
                        int64_t cls = ((t % st.cond_q) + st.cond_q) % st.cond_q;
                        st.cond_mgf[pi * size_t(st.cond_q) + size_t(cls)] += val;
                        if (pi == 0) st.cond_weight[size_t(cls)] += w;
                    }
                }
                if (req.mgf_probes.empty() && req.conditional) {
                    const auto& dirv = req.directions[req.conditional->first];
                    int64_t t = 0;
                    for (CosetId u : stouched) t += dirv[size_t(u)] * stat[size_t(u)];
                    int64_t cls = ((t % st.cond_q) + st.cond_q) % st.cond_q;
                    st.cond_weight[size_t(cls)] += w;
                }

                for (auto& rs : st.residues) {
                    if (rs.full_tracked) {
                        size_t idx = 0;
                        for (int32_t u = k - 1; u >= 0; --u)
                            idx = idx * size_t(rs.q) + size_t(stat[size_t(u)] % rs.q);
                        rs.full_counts[idx] += unit ? 1 : 0;
                        rs.full_weights[idx] += w;
                    }
                    for (int32_t u = 0; u < k; ++u) {
                        size_t idx = size_t(u) * size_t(rs.q) + size_t(stat[size_t(u)] % rs.q);
                        rs.marg_counts[idx] += unit ? 1 : 0;
                        rs.marg_weights[idx] += w;
                    }
                }
                for (auto& ds : st.dirs) {
                    int64_t t = 0;
                    for (CosetId u : stouched) t += ds.direction[size_t(u)] * stat[size_t(u)];
                    if (unit) {
                        ds.hist[t] += 1;
                        ds.sum_t += t;
                        ds.sum_t2 += int128(t) * t;
                    }
                    ds.whist[t] += w;
                    ds.sum_w += w;
                    ds.sum_wt += w * double(t);
                    ds.sum_wt2 += w * double(t) * double(t);
                }
                st.end_coset_counts[size_t(end_cd)] += 1;
                st.xbin_counts[size_t((int128(a) * 128) / n)] += 1;
            }
        }
    };

    int threads = req.threads > 0 ? req.threads : int(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, int(chunks.size())));
    if (threads == 1) {
        for (size_t i = 0; i < chunks.size(); ++i) worker_body(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(size_t(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    size_t i = next.fetch_add(1);
                    if (i >= chunks.size()) return;
                    worker_body(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // deterministic merge in chunk order, snapshot at cutoffs
    std::vector<EnsembleStats> out;
    EnsembleStats acc = proto;
    for (size_t i = 0; i < chunks.size(); ++i) {
        merge_into(acc, partial[i]);
        if (chunks[i].cutoff_after != SIZE_MAX) {
            acc.M = cutoffs[chunks[i].cutoff_after];
            out.push_back(acc);
        }
    }
    if (out.empty() || out.back().M != req.M) throw std::logic_error("scan snapshot mismatch");
    for (auto& s : out)
        if (s.total_weight == 0) throw std::runtime_error("ensemble_scan: density vanishes on ensemble");
    return out;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

CltReport clt_report(const std::vector<EnsembleStats>& per_cutoff, size_t dir_index,
                     size_t probe_index) {
    if (per_cutoff.empty()) throw std::invalid_argument("clt_report: no stats");
    const EnsembleStats& s = per_cutoff.back();
    const DirectionStats& d = s.dirs.at(dir_index);
    CltReport rep;
    rep.samples = s.samples;
    rep.low_power = s.samples < 1000;
    double W = s.unit_weights ? double(s.samples) : d.sum_w;
    double m1 = (s.unit_weights ? double(d.sum_t) : d.sum_wt) / W;
    double m2 = (s.unit_weights ? double(d.sum_t2) : d.sum_wt2) / W;
    rep.mean = m1;
    rep.variance = m2 - m1 * m1;
    if (rep.variance <= 0) {
        rep.degenerate = true;
        return rep;
    }
    double sd = std::sqrt(rep.variance);

    double cum = 0;
    double ks_plain = 0, ks_corr = 0;
    auto visit = [&](int64_t t, double massw) {
        double before = cum / W;
        cum += massw;
        double after = cum / W;
        double z = (double(t) - m1) / sd;
        ks_plain = std::max({ks_plain, std::abs(after - normal_cdf(z)),
                             std::abs(before - normal_cdf(z))});
        ks_corr = std::max({ks_corr, std::abs(after - normal_cdf((double(t) + 0.5 - m1) / sd)),
                            std::abs(before - normal_cdf((double(t) - 0.5 - m1) / sd))});
        rep.standardized_hist.emplace_back(z, massw / W);
    };
    if (s.unit_weights) {
        for (auto& [t, c] : d.hist) visit(t, double(c));
    } else {
        for (auto& [t, c] : d.whist) visit(t, c);
    }
    rep.ks_plain = ks_plain;
    rep.ks_corrected = ks_corr;

    if (probe_index != SIZE_MAX && per_cutoff.size() >= 2) {
        std::vector<double> xs, ys;
        for (const auto& st : per_cutoff) {
            double val = std::abs(st.mgf.at(probe_index)) / st.total_weight;
            xs.push_back(std::log(double(st.M)));
            ys.push_back(std::log(val));
        }
        fit_line(xs, ys, rep.quasi_slope, rep.quasi_intercept, rep.quasi_r2);
    }
    return rep;
}

ResidualReport residual_report(const EnsembleStats& stats, int64_t q,
                               const std::vector<std::vector<int64_t>>& targets) {
    if (q < 2) throw std::invalid_argument("residual_report: q >= 2 required");
    const ResidueStats* rs = nullptr;
    for (const auto& r : stats.residues)
        if (r.q == q) rs = &r;
    if (!rs) throw std::invalid_argument("residual_report: modulus was not probed in the scan");
    ResidualReport rep;
    rep.q = q;
    rep.expected_full = std::pow(double(q), -double(stats.k));
    double W = stats.unit_weights ? double(stats.samples) : stats.total_weight;
    if (rs->full_tracked) {
        rep.full_probs.reserve(rs->full_weights.size());
        for (double w : rs->full_weights) {
            double p = w / W;
            rep.full_probs.push_back(p);
            rep.max_full_dev = std::max(rep.max_full_dev, std::abs(p - rep.expected_full));
        }
    }
    for (int32_t u = 0; u < stats.k; ++u) {
        for (int64_t j = 0; j < q; ++j) {
            double p = rs->marg_weights[size_t(u) * size_t(q) + size_t(j)] / W;
            rep.max_marginal_dev = std::max(rep.max_marginal_dev, std::abs(p - 1.0 / double(q)));
        }
    }
    for (const auto& tgt : targets) {
        if (int32_t(tgt.size()) != stats.k || !rs->full_tracked) continue;
        size_t idx = 0;
        for (int32_t u = stats.k - 1; u >= 0; --u)
            idx = idx * size_t(q) + size_t(((tgt[size_t(u)] % q) + q) % q);
        std::ostringstream os;
        for (size_t i = 0; i < tgt.size(); ++i) os << (i ? "," : "") << tgt[i];
        rep.requested.emplace_back(os.str(), rs->full_weights[idx] / W);
    }
    return rep;
}

VarianceFit variance_fit(const std::vector<EnsembleStats>& per_cutoff, size_t dir_index) {
    if (per_cutoff.size() < 4) throw std::invalid_argument("variance_fit: need >= 4 cutoffs");
    if (per_cutoff.back().M < 8 * per_cutoff.front().M)
        throw std::invalid_argument("variance_fit: cutoffs must span a factor >= 8");
    VarianceFit fit;
    int64_t prev_samples = 0;
    for (const auto& s : per_cutoff) {
        if (s.samples <= prev_samples)
            throw std::invalid_argument("variance_fit: non-monotone sample counts");
        prev_samples = s.samples;
        const DirectionStats& d = s.dirs.at(dir_index);
        double W = s.unit_weights ? double(s.samples) : d.sum_w;
        double m1 = (s.unit_weights ? double(d.sum_t) : d.sum_wt) / W;
        double m2 = (s.unit_weights ? double(d.sum_t2) : d.sum_wt2) / W;
        fit.log_m.push_back(std::log(double(s.M)));
        fit.variances.push_back(m2 - m1 * m1);
    }
    fit_line(fit.log_m, fit.variances, fit.slope, fit.shift, fit.r2);
    return fit;
}

std::complex<double> conditional_mgf_ratio(const EnsembleStats& stats, size_t probe_index,
                                           int64_t residue_class) {
    if (stats.cond_q == 0) throw std::invalid_argument("conditional accumulators absent");
    int64_t cls = ((residue_class % stats.cond_q) + stats.cond_q) % stats.cond_q;
    double cw = stats.cond_weight.at(size_t(cls));
    if (cw == 0) throw std::runtime_error("conditional_mgf: empty conditioned ensemble");
    std::complex<double> cond =
        stats.cond_mgf.at(probe_index * size_t(stats.cond_q) + size_t(cls)) / cw;
    std::complex<double> full = stats.mgf.at(probe_index) / stats.total_weight;
    return cond / full;
}

void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& slope,
              double& intercept, double& r2) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double det = double(n) * sxx - sx * sx;
    slope = (double(n) * sxy - sx * sy) / det;
    intercept = (sy - slope * sx) / double(n);
    double ss_tot = 0, ss_res = 0, ybar = sy / double(n);
    for (size_t i = 0; i < n; ++i) {
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
        double e = y[i] - (slope * x[i] + intercept);
        ss_res += e * e;
    }
    r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
}

}  // namespace modsym
