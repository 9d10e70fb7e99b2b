#include "modsym/manin.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace modsym {

namespace {

int128 gcd128(int128 a, int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) a = std::exchange(b, a % b);
    return a;
}

// Exact Gauss-Jordan over Q with integer rows: pivot steps cross-multiply and
// every updated row is divided by its content, which keeps entries small for
// these sparse relation systems.
struct ExactRows {
    std::vector<std::vector<int128>> rows;
    size_t cols = 0;

    static void reduce_row(std::vector<int128>& r) {
        int128 g = 0;
        for (auto& v : r) g = gcd128(g, v);
        if (g > 1)
            for (auto& v : r) v /= g;
    }

    std::vector<size_t> echelon() {
        std::vector<size_t> pivots;
        size_t rank = 0;
        for (size_t col = 0; col < cols && rank < rows.size(); ++col) {
            size_t sel = SIZE_MAX;
            for (size_t i = rank; i < rows.size(); ++i)
                if (rows[i][col] != 0) {
                    sel = i;
                    break;
                }
            if (sel == SIZE_MAX) continue;
            std::swap(rows[rank], rows[sel]);
            const int128 piv = rows[rank][col];
            for (size_t i = 0; i < rows.size(); ++i) {
                if (i == rank || rows[i][col] == 0) continue;
                const int128 f = rows[i][col];
                for (size_t j = 0; j < cols; ++j)
                    rows[i][j] = checked_mul(piv, rows[i][j]) - checked_mul(f, rows[rank][j]);
                reduce_row(rows[i]);
            }
            pivots.push_back(col);
            ++rank;
        }
        rows.resize(pivots.size());
        return pivots;
    }
};

}  // namespace

std::vector<std::vector<int64_t>> integer_kernel(const std::vector<std::vector<int64_t>>& rows,
                                                 size_t cols) {
    ExactRows er;
    er.cols = cols;
    er.rows.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.size() != cols) throw std::invalid_argument("integer_kernel: ragged rows");
        er.rows.emplace_back(r.begin(), r.end());
    }
    auto pivots = er.echelon();
    std::vector<char> is_pivot(cols, 0);
    for (size_t c : pivots) is_pivot[c] = 1;

    std::vector<std::vector<int64_t>> basis;
    for (size_t free_col = 0; free_col < cols; ++free_col) {
        if (is_pivot[free_col]) continue;
        // y[free_col] = lcm of pivots; after Gauss-Jordan each pivot row
        // couples its pivot column only to free columns
        int128 D = 1;
        for (size_t i = 0; i < pivots.size(); ++i) {
            int128 piv = er.rows[i][pivots[i]];
            D = checked_mul(D / gcd128(D, piv), piv);
        }
        if (D < 0) D = -D;
        std::vector<int128> y(cols, 0);
        y[free_col] = D;
        for (size_t i = 0; i < pivots.size(); ++i) {
            const int128 piv = er.rows[i][pivots[i]];
            const int128 num = checked_mul(er.rows[i][free_col], D);
            if (num % piv != 0) throw std::logic_error("integer_kernel: non-integral solve");
            y[pivots[i]] = -num / piv;
        }
        int128 g = 0;
        for (auto& v : y) g = gcd128(g, v);
        if (g > 1)
            for (auto& v : y) v /= g;
        for (auto& v : y) {
            if (v != 0) {
                if (v < 0)
                    for (auto& u : y) u = -u;
                break;
            }
        }
        std::vector<int64_t> out(cols);
        for (size_t j = 0; j < cols; ++j) {
            if (y[j] > INT64_MAX || y[j] < INT64_MIN)
                throw overflow_error("integer_kernel: entry exceeds 64 bits");
            out[j] = int64_t(y[j]);
        }
        basis.push_back(std::move(out));
    }
    return basis;
}

int32_t ManinSpace::right_action(int32_t sym, const Mat2& g) const {
    auto [c, d] = p1.reps[size_t(sym)];
    int64_t c2 = int64_t((int128(c) * int64_t(g.a) + int128(d) * int64_t(g.c)) % level);
    int64_t d2 = int64_t((int128(c) * int64_t(g.b) + int128(d) * int64_t(g.d)) % level);
    return p1.lookup(c2, d2);
}

ManinSpace build_manin_space(int64_t N, int64_t max_level) {
    if (N < 1 || N > max_level) throw std::invalid_argument("build_manin_space: level bound");
    ManinSpace sp;
    sp.level = N;
    sp.p1 = build_p1(N);
    const int32_t n = sp.p1.size();

    const Mat2 S{0, -1, 1, 0};
    const Mat2 T{0, -1, 1, -1};
    const Mat2 T2{-1, 1, -1, 0};

    for (int32_t x = 0; x < n; ++x) {
        std::vector<int64_t> row2(size_t(n), 0);
        row2[size_t(x)] += 1;
        row2[size_t(sp.right_action(x, S))] += 1;
        sp.relations.push_back(std::move(row2));
        std::vector<int64_t> row3(size_t(n), 0);
        row3[size_t(x)] += 1;
        row3[size_t(sp.right_action(x, T))] += 1;
        row3[size_t(sp.right_action(x, T2))] += 1;
        sp.relations.push_back(std::move(row3));
    }
    sp.dual_basis = integer_kernel(sp.relations, size_t(n));

    sp.star.resize(size_t(n));
    for (int32_t x = 0; x < n; ++x) {
        auto [c, d] = sp.p1.reps[size_t(x)];
        sp.star[size_t(x)] = sp.p1.lookup(-c, d);
    }
    return sp;
}

std::vector<Mat2> heilbronn_matrices(int64_t p) {
    // Heilbronn-Merel family: all integer matrices [[a,b],[c,d]] with
    // det = p, a > b >= 0, d > c >= 0.  From bc = ad - p <= (a-1)(d-1) one
    // gets a + d <= p + 1, so the enumeration below is complete.
    std::vector<Mat2> out;
    for (int64_t a = 1; a <= p; ++a) {
        for (int64_t d = 1; a + d <= p + 1; ++d) {
            int64_t n = a * d - p;
            if (n < 0) continue;
            if (n == 0) {
                for (int64_t c = 0; c < d; ++c) out.push_back(Mat2{a, 0, c, d});
                for (int64_t b = 1; b < a; ++b) out.push_back(Mat2{a, b, 0, d});
            } else {
                for (int64_t b = 1; b < a; ++b) {
                    if (n % b != 0) continue;
                    int64_t c = n / b;
                    if (c < d) out.push_back(Mat2{a, b, c, d});
                }
            }
        }
    }
    return out;
}

std::vector<int64_t> hecke_apply(const ManinSpace& space, int64_t p,
                                 const std::vector<int64_t>& y) {
    auto mats = heilbronn_matrices(p);
    std::vector<int64_t> out(y.size(), 0);
    for (int32_t x = 0; x < space.symbol_count(); ++x) {
        int64_t acc = 0;
        for (const Mat2& h : mats) acc += y[size_t(space.right_action(x, h))];
        out[size_t(x)] = acc;
    }
    return out;
}

EigenSymbol extract_eigensymbol(const ManinSpace& space, const EllipticCurve& curve, int sign,
                                int64_t certify_bound) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +-1");
    const int32_t n = space.symbol_count();

    std::vector<std::vector<int64_t>> basis = space.dual_basis;

    // solve sum_b alpha_b * image_b = 0 and rebuild primitive value vectors
    auto restrict_kernel = [&](const std::vector<std::vector<int64_t>>& images) {
        std::vector<std::vector<int64_t>> rows;
        for (int32_t x = 0; x < n; ++x) {
            std::vector<int64_t> row(basis.size(), 0);
            bool nonzero = false;
            for (size_t b = 0; b < basis.size(); ++b) {
                row[b] = images[b][size_t(x)];
                nonzero = nonzero || row[b] != 0;
            }
            if (nonzero) rows.push_back(std::move(row));
        }
        auto alpha = integer_kernel(rows, basis.size());
        std::vector<std::vector<int64_t>> next;
        for (const auto& a : alpha) {
            std::vector<int128> y(size_t(n), 0);
            for (size_t b = 0; b < basis.size(); ++b)
                for (int32_t x = 0; x < n; ++x) y[size_t(x)] += int128(a[b]) * basis[b][size_t(x)];
            int128 g = 0;
            for (auto& v : y) g = gcd128(g, v);
            if (g > 1)
                for (auto& v : y) v /= g;
            for (auto& v : y) {
                if (v != 0) {
                    if (v < 0)
                        for (auto& u : y) u = -u;
                    break;
                }
            }
            std::vector<int64_t> out(size_t(n), 0);
            for (int32_t x = 0; x < n; ++x) out[size_t(x)] = int64_t(y[size_t(x)]);
            next.push_back(std::move(out));
        }
        return next;
    };

    {
        std::vector<std::vector<int64_t>> images;
        for (const auto& y : basis) {
            std::vector<int64_t> img(size_t(n), 0);
            for (int32_t x = 0; x < n; ++x)
                img[size_t(x)] = y[size_t(space.star[size_t(x)])] - sign * y[size_t(x)];
            images.push_back(std::move(img));
        }
        basis = restrict_kernel(images);
    }
    if (basis.empty()) throw std::runtime_error("extract_eigensymbol: empty star eigenspace");

    for (int64_t p = 2; basis.size() > 1; ++p) {
        if (!is_prime(p) || space.level % p == 0) continue;
        if (p > 50)
            throw std::runtime_error("extract_eigensymbol: eigenspace not one-dimensional");
        int64_t ap = curve_ap(curve, p);
        std::vector<std::vector<int64_t>> images;
        for (const auto& y : basis) {
            auto ty = hecke_apply(space, p, y);
            for (int32_t x = 0; x < n; ++x) ty[size_t(x)] -= ap * y[size_t(x)];
            images.push_back(std::move(ty));
        }
        basis = restrict_kernel(images);
        if (basis.empty())
            throw std::runtime_error("extract_eigensymbol: eigenspace vanished (wrong level?)");
    }

    EigenSymbol es;
    es.level = space.level;
    es.sign = sign;
    es.curve = curve;
    es.values = basis.front();
    es.boundary = es.values[size_t(space.p1.lookup(0, 1))];

    for (int64_t p = 2; p <= certify_bound; ++p) {
        if (!is_prime(p) || space.level % p == 0) continue;
        int64_t ap = curve_ap(curve, p);
        auto ty = hecke_apply(space, p, es.values);
        for (int32_t x = 0; x < n; ++x)
            if (ty[size_t(x)] != ap * es.values[size_t(x)])
                throw std::runtime_error("extract_eigensymbol: certification failed");
        es.certified.emplace_back(p, ap);
    }
    for (const auto& row : space.relations) {
        int128 acc = 0;
        for (int32_t x = 0; x < n; ++x) acc += int128(row[size_t(x)]) * es.values[size_t(x)];
        if (acc != 0) throw std::logic_error("extract_eigensymbol: relation violated");
    }
    return es;
}

int64_t eval_symbol(const EigenSymbol& es, const CosetTable& table, const Rational& r) {
    if (table.level != es.level) throw std::invalid_argument("eval_symbol: level mismatch");
    if (r.num == r.den) throw std::invalid_argument("eval_symbol: r in (0,1) required");
    // both determinant blocks carry the P^1 class they were keyed by, and the
    // geodesic {g0, goo} of a det -1 matrix folds to exactly that class
    const int32_t half = table.index_count / 2;
    int64_t acc = es.boundary;
    CosetId u = table.identity_coset();
    int64_t p = r.num, q = r.den;
    while (p != 0) {
        int64_t m = q / p;
        q = std::exchange(p, q % p);
        u = table.act_digit(u, m);
        acc += es.values[size_t(u % half)];
    }
    return acc;
}

SymbolResidualReport residual_symbol_report(const EigenSymbol& es, const CosetTable& table,
                                            int64_t M, const DensitySpec& density, int64_t p,
                                            int64_t e, int threads, bool reducibility_flag) {
    if (p < 3 || table.level % p == 0)
        throw std::invalid_argument("residual_symbol_report: need odd p with p not dividing 2N");
    SymbolResidualReport rep;
    rep.p = p;
    rep.e = e;
    rep.modulus = 1;
    for (int64_t i = 0; i < e; ++i) rep.modulus *= p;
    rep.hypothesis_flag = reducibility_flag;
    const int64_t q = rep.modulus;
    const int32_t half = table.index_count / 2;
    const bool has_interval = density.kind == DensitySpec::Kind::interval_mask;

    const int64_t block = 64;
    std::vector<std::pair<int64_t, int64_t>> chunks;
    for (int64_t lo = 2; lo <= M; lo += block) chunks.emplace_back(lo, std::min(lo + block, M + 1));
    std::vector<std::vector<int64_t>> partial(chunks.size(), std::vector<int64_t>(size_t(q), 0));
    std::vector<int64_t> partial_samples(chunks.size(), 0);

    auto body = [&](size_t ci) {
        auto& counts = partial[ci];
        for (int64_t n = chunks[ci].first; n < chunks[ci].second; ++n) {
            for (int64_t a = 1; a < n; ++a) {
                if (std::gcd(a, n) != 1) continue;
                int64_t acc = es.boundary;
                CosetId u = table.identity_coset();
                int64_t pp = a, qq = n, q_prev = 0, q_cur = 1, ell = 0;
                while (pp != 0) {
                    int64_t m = qq / pp;
                    qq = std::exchange(pp, qq % pp);
                    int64_t qn = m * q_cur + q_prev;
                    q_prev = std::exchange(q_cur, qn);
                    u = table.act_digit(u, m);
                    acc += es.values[size_t(u % half)];
                    ++ell;
                }
                double wt = density.mask.empty() ? 1.0 : density.mask[size_t(u)];
                if (has_interval && wt != 0) {
                    int64_t dual_num = (ell % 2 == 1) ? q_prev : n - q_prev;
                    int64_t tn = density.interval_on_r ? a : dual_num;
                    if (int128(density.lo_num) * n > int128(tn) * density.lo_den ||
                        int128(tn) * density.hi_den > int128(density.hi_num) * n)
                        wt = 0;
                }
                if (wt == 0) continue;
                counts[size_t(((acc % q) + q) % q)] += 1;
                partial_samples[ci] += 1;
            }
        }
    };
    int nthreads = threads > 0 ? threads : int(std::thread::hardware_concurrency());
    nthreads = std::max(1, std::min<int>(nthreads, int(chunks.size())));
    if (nthreads == 1) {
        for (size_t i = 0; i < chunks.size(); ++i) body(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    size_t i = next.fetch_add(1);
                    if (i >= chunks.size()) return;
                    body(i);
                }
            });
        for (auto& th : pool) th.join();
    }
    rep.counts.assign(size_t(q), 0);
    for (size_t ci = 0; ci < chunks.size(); ++ci) {
        rep.samples += partial_samples[ci];
        for (size_t j = 0; j < size_t(q); ++j) rep.counts[j] += partial[ci][j];
    }
    if (rep.samples == 0) throw std::runtime_error("residual_symbol_report: empty ensemble");
    for (size_t j = 0; j < size_t(q); ++j) {
        double prob = double(rep.counts[j]) / double(rep.samples);
        rep.max_dev = std::max(rep.max_dev, std::abs(prob - 1.0 / double(q)));
    }
    return rep;
}

}  // namespace modsym
