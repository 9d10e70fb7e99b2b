// Command-line driver: runs the experiments and writes reproducible report
// bundles (<outdir>/<command>-<label>/{report.json, *.csv, *.svg,
// manifest.json}).
//
// Exit codes: 0 ok, 2 config error, 3 resource bound, 4 numeric
// non-convergence, 5 statistical-power warning under --strict.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "modsym/characters.hpp"
#include "modsym/dirichlet_series.hpp"
#include "modsym/report.hpp"

using namespace modsym;

namespace {

struct Common {
    std::string outdir = "out";
    std::string label;
    std::string config_path;
    int threads = 0;
    bool strict = false;
    bool plots = true;
};

struct PowerWarning : std::runtime_error {
    PowerWarning() : std::runtime_error("statistical power warning") {}
};

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config " + path);
    json j;
    in >> j;
    return j;
}

struct RunContext {
    Common common;
    std::string dir;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, uint64_t>> digests;

    void emit(const std::string& name, const std::string& bytes) {
        write_text(dir + "/" + name, bytes);
        digests.emplace_back(name, content_digest(bytes));
    }
    void finish(const std::string& command, const json& params, uint64_t fingerprint) {
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(dir, command, params, fingerprint, common.threads, wall, digests);
        std::cout << dir << "\n";
    }
};

std::vector<int64_t> parse_int_list(const std::string& spec) {
    std::vector<int64_t> out;
    std::string cur;
    for (char c : spec + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoll(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    return out;
}

std::vector<int64_t> parse_direction(const std::string& spec, int32_t k) {
    if (spec == "ones") return std::vector<int64_t>(size_t(k), 1);
    auto out = parse_int_list(spec);
    if (int32_t(out.size()) != k)
        throw std::invalid_argument("direction: expected " + std::to_string(k) + " entries");
    return out;
}

EllipticCurve parse_curve(const std::string& spec) {
    auto a = parse_int_list(spec);
    if (a.size() != 5) throw std::invalid_argument("curve: expected a1,a2,a3,a4,a6");
    return EllipticCurve{a[0], a[1], a[2], a[3], a[4]};
}

DensitySpec parse_density(const std::string& name, const CosetTable& table) {
    DensitySpec d;
    if (name == "uniform" || name.empty()) return d;
    if (name.rfind("phi_", 0) == 0) {
        d.kind = DensitySpec::Kind::coset_mask;
        d.mask = divisor_mask(table, std::stoll(name.substr(4)));
        return d;
    }
    throw std::invalid_argument("unknown density " + name);
}

json residual_to_json(const ResidualReport& rr) {
    json j;
    j["q"] = rr.q;
    j["expected_full"] = rr.expected_full;
    j["max_full_dev"] = rr.max_full_dev;
    j["max_marginal_dev"] = rr.max_marginal_dev;
    if (!rr.full_probs.empty()) j["full_probs"] = rr.full_probs;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamics of continued fractions and modular symbols: experiment driver"};
    app.require_subcommand(1);

    Common common;
    app.add_option("--outdir", common.outdir, "output directory");
    app.add_option("--label", common.label, "run label (defaults to a UTC timestamp)");
    app.add_option("--config", common.config_path, "JSON config; flags override");
    app.add_option("--threads", common.threads, "worker threads (0 = hardware)");
    app.add_flag("--strict", common.strict, "treat statistical-power warnings as failure");
    app.add_flag("!--no-plots", common.plots, "skip SVG emission");

    auto* clt = app.add_subcommand("clt", "CLT experiment for a linear partition statistic");
    int64_t clt_level = 2, clt_M = 2000;
    std::string clt_dir_spec = "ones", clt_density = "uniform";
    clt->add_option("--level", clt_level);
    clt->add_option("--max-denominator", clt_M);
    clt->add_option("--direction", clt_dir_spec);
    clt->add_option("--density", clt_density);

    auto* resid = app.add_subcommand("residual", "residue equidistribution of the partition vector");
    int64_t r_level = 2, r_M = 5000, r_q = 2;
    std::string r_density = "uniform";
    resid->add_option("--level", r_level);
    resid->add_option("--max-denominator", r_M);
    resid->add_option("--q", r_q);
    resid->add_option("--density", r_density);

    auto* vfit = app.add_subcommand("variance-fit", "variance slope/shift across cutoffs");
    int64_t v_level = 2;
    std::string v_cutoffs = "500,1000,2000,4000", v_dir = "ones", v_density = "uniform";
    vfit->add_option("--level", v_level);
    vfit->add_option("--cutoffs", v_cutoffs);
    vfit->add_option("--direction", v_dir);
    vfit->add_option("--density", v_density);

    auto* nc = app.add_subcommand("noncorrelation", "conditional vs unconditional MGF");
    int64_t n_level = 2, n_M = 4000, n_q = 2;
    double n_w = 0.05;
    nc->add_option("--level", n_level);
    nc->add_option("--max-denominator", n_M);
    nc->add_option("--q", n_q);
    nc->add_option("--w", n_w);

    auto* spec = app.add_subcommand("spectral", "dominant spectral data of the transfer operator");
    int64_t sp_level = 2;
    int64_t sp_n = 48;
    int64_t sp_mmax = 4096;
    double sp_s = 1.0, sp_x = 0.0, sp_t = 0.0, sp_y = 0.0;
    int64_t sp_norm_power = 0;
    bool sp_notails = false;
    spec->add_option("--level", sp_level);
    spec->add_option("--nodes", sp_n);
    spec->add_option("--m-max", sp_mmax);
    spec->add_option("--s", sp_s);
    spec->add_option("--im-s", sp_t, "imaginary part of s (exploratory probe, no contract)");
    spec->add_option("--x", sp_x, "constant real w coordinate");
    spec->add_option("--y", sp_y, "constant imaginary w coordinate");
    spec->add_option("--norm-power", sp_norm_power,
                     "also report ||L^n 1|| decay for the given n (exploratory)");
    spec->add_flag("--no-tails", sp_notails);

    auto* s0c = app.add_subcommand("s0", "pressure solve, gradient and optional Hessian at w=0");
    int64_t s0_level = 2;
    int64_t s0_n = 48;
    bool s0_hess = false;
    s0c->add_option("--level", s0_level);
    s0c->add_option("--nodes", s0_n);
    s0c->add_flag("--hessian", s0_hess);

    auto* keyr = app.add_subcommand("key-relation", "operator identity vs the direct series");
    int64_t k_level = 1, k_cutoff = 4000;
    int64_t k_n = 64;
    double k_s = 1.25;
    std::string k_density = "uniform";
    keyr->add_option("--level", k_level);
    keyr->add_option("--s", k_s);
    keyr->add_option("--cutoff", k_cutoff);
    keyr->add_option("--nodes", k_n);
    keyr->add_option("--density", k_density);

    auto* sym = app.add_subcommand("symbols", "Manin symbol experiments");
    sym->require_subcommand(1);
    std::string sy_curve = "0,-1,1,-10,-20";
    int64_t sy_level = 11;
    int sy_sign = +1;
    sym->add_option("--curve", sy_curve, "a1,a2,a3,a4,a6");
    sym->add_option("--level", sy_level);
    sym->add_option("--sign", sy_sign)->check(CLI::IsMember({-1, 1}));

    auto* sy_extract = sym->add_subcommand("extract", "extract and certify the eigensymbol");
    auto* sy_eval = sym->add_subcommand("eval", "evaluate the modular symbol at a rational");
    int64_t se_num = 1, se_den = 11;
    sy_eval->add_option("--num", se_num);
    sy_eval->add_option("--den", se_den);
    auto* sy_res = sym->add_subcommand("residual", "mod p^e equidistribution of symbol values");
    int64_t sr_p = 3, sr_e = 1, sr_M = 4000;
    std::string sr_density = "uniform";
    bool sr_flag = false;
    sy_res->add_option("--p", sr_p);
    sy_res->add_option("--e", sr_e);
    sy_res->add_option("--max-denominator", sr_M);
    sy_res->add_option("--density", sr_density);
    sy_res->add_flag("--reducible-warning", sr_flag);
    auto* sy_survey = sym->add_subcommand("survey", "mod p nonvanishing survey of twisted values");
    int64_t sv_p = 3, sv_M = 300;
    sy_survey->add_option("--p", sv_p);
    sy_survey->add_option("--max-conductor", sv_M);

    auto* cos = app.add_subcommand("cosets", "coset algebra utilities");
    cos->require_subcommand(1);
    auto* cos_word = cos->add_subcommand("word", "certified connecting word between cosets");
    int64_t cw_level = 2, cw_u = 0, cw_v = 0;
    bool cw_nonempty = false;
    cos_word->add_option("--level", cw_level);
    cos_word->add_option("--u", cw_u);
    cos_word->add_option("--v", cw_v);
    cos_word->add_flag("--nonempty", cw_nonempty);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        json config = load_config(common.config_path);
        auto icfg = [&](const char* key, int64_t v) {
            return config.contains(key) ? config.at(key).get<int64_t>() : v;
        };
        RunContext ctx;
        ctx.common = common;

        if (*clt) {
            clt_M = icfg("max_denominator", clt_M);
            clt_level = icfg("level", clt_level);
            auto table = build_coset_table(clt_level);
            ScanRequest req;
            req.M = clt_M;
            req.threads = common.threads;
            req.cutoffs = {std::max<int64_t>(2, clt_M / 8), std::max<int64_t>(3, clt_M / 4),
                           std::max<int64_t>(4, clt_M / 2), clt_M};
            req.density = parse_density(clt_density, table);
            req.directions = {parse_direction(clt_dir_spec, table.index_count)};
            req.mgf_probes = {std::vector<cdouble>(size_t(table.index_count), cdouble(0.05, 0))};
            auto stats = ensemble_scan(table, req);
            auto rep = clt_report(stats, 0, 0);
            if (rep.low_power && common.strict) throw PowerWarning();
            json j;
            j["level"] = clt_level;
            j["M"] = clt_M;
            j["density"] = stats.back().density;
            j["samples"] = rep.samples;
            j["mean"] = rep.mean;
            j["variance"] = rep.variance;
            j["ks_plain"] = rep.ks_plain;
            j["ks_corrected"] = rep.ks_corrected;
            j["degenerate"] = rep.degenerate;
            j["low_power"] = rep.low_power;
            j["probe_w"] = 0.05;
            j["quasi_power"] = {{"slope", rep.quasi_slope},
                                {"intercept", rep.quasi_intercept},
                                {"r2", rep.quasi_r2}};
            ctx.dir = make_run_dir(common.outdir, "clt", common.label);
            ctx.emit("report.json", j.dump(2) + "\n");
            std::vector<std::pair<int64_t, int64_t>> atoms(stats.back().dirs[0].hist.begin(),
                                                           stats.back().dirs[0].hist.end());
            if (!atoms.empty()) ctx.emit("histogram.csv", csv_histogram(fd_bins(atoms)));
            if (common.plots && !rep.degenerate)
                ctx.emit("histogram.svg",
                         svg_histogram_overlay(rep.standardized_hist, "standardized statistic"));
            ctx.finish("clt", j, table.fingerprint);
        } else if (*resid) {
            auto table = build_coset_table(r_level);
            ScanRequest req;
            req.M = r_M;
            req.threads = common.threads;
            req.density = parse_density(r_density, table);
            req.residue_moduli = {r_q};
            req.directions = {std::vector<int64_t>(size_t(table.index_count), 1)};
            auto stats = ensemble_scan(table, req);
            auto rr = residual_report(stats.back(), r_q);
            json j;
            j["level"] = r_level;
            j["M"] = r_M;
            j["density"] = stats.back().density;
            j["samples"] = stats.back().samples;
            j["residual"] = residual_to_json(rr);
            ctx.dir = make_run_dir(common.outdir, "residual", common.label);
            ctx.emit("report.json", j.dump(2) + "\n");
            ctx.finish("residual", j, table.fingerprint);
        } else if (*vfit) {
            auto table = build_coset_table(v_level);
            ScanRequest req;
            req.threads = common.threads;
            req.cutoffs = parse_int_list(v_cutoffs);
            req.M = req.cutoffs.empty() ? 0 : req.cutoffs.back();
            req.density = parse_density(v_density, table);
            req.directions = {parse_direction(v_dir, table.index_count)};
            auto stats = ensemble_scan(table, req);
            auto fit = variance_fit(stats, 0);
            json j;
            j["level"] = v_level;
            j["cutoffs"] = req.cutoffs;
            j["slope"] = fit.slope;
            j["shift"] = fit.shift;
            j["r2"] = fit.r2;
            j["variances"] = fit.variances;
            ctx.dir = make_run_dir(common.outdir, "variance-fit", common.label);
            ctx.emit("report.json", j.dump(2) + "\n");
            if (common.plots)
                ctx.emit("fit.svg", svg_scatter_fit(fit.log_m, fit.variances, fit.slope,
                                                    fit.shift, fit.r2, "variance vs log M"));
            ctx.finish("variance-fit", j, table.fingerprint);
        } else if (*nc) {
            auto table = build_coset_table(n_level);
            ScanRequest req;
            req.M = n_M;
            req.threads = common.threads;
            req.directions = {std::vector<int64_t>(size_t(table.index_count), 1)};
            req.mgf_probes = {std::vector<cdouble>(size_t(table.index_count), cdouble(0)),
                              std::vector<cdouble>(size_t(table.index_count), cdouble(n_w, 0))};
            req.conditional = {{0, n_q}};
            auto stats = ensemble_scan(table, req);
            json j;
            j["level"] = n_level;
            j["M"] = n_M;
            j["q"] = n_q;
            j["w"] = n_w;
            json ratios = json::array();
            for (int64_t cls = 0; cls < n_q; ++cls) {
                auto r0 = conditional_mgf_ratio(stats.back(), 0, cls);
                auto rw = conditional_mgf_ratio(stats.back(), 1, cls);
                ratios.push_back({{"class", cls},
                                  {"ratio_at_0", {r0.real(), r0.imag()}},
                                  {"ratio_at_w", {rw.real(), rw.imag()}},
                                  {"abs_dev", std::abs(rw - cdouble(1, 0))}});
            }
            j["ratios"] = ratios;
            ctx.dir = make_run_dir(common.outdir, "noncorrelation", common.label);
            ctx.emit("report.json", j.dump(2) + "\n");
            ctx.finish("noncorrelation", j, table.fingerprint);
        } else if (*spec) {
            auto grid = make_operator_grid(sp_level, int32_t(sp_n), sp_mmax, !sp_notails);
            auto op = build_operator(grid, cdouble(sp_s, sp_t),
                                     std::vector<cdouble>(size_t(grid.k()), cdouble(sp_x, sp_y)));
            auto sol = dominant_spectrum(grid, op);
            json j;
            j["level"] = sp_level;
            j["n"] = sp_n;
            j["m_max"] = grid.m_max;
            j["s"] = {sp_s, sp_t};
            j["w"] = {sp_x, sp_y};
            j["lambda"] = {sol.lambda.real(), sol.lambda.imag()};
            j["lambda2_abs"] = sol.lambda2_abs;
            j["gap"] = sol.gap;
            j["residual"] = sol.residual;
            j["near_degenerate"] = sol.near_degenerate;
            j["truncation_warning"] = op.truncation_warning;
            j["distance_from_one"] = std::abs(sol.lambda - cdouble(1, 0));
            if (sp_norm_power > 0) {
                // exploratory Dolgopyat-regime probe: sup and (t)-norm decay of
                // L^n applied to the constant function; no pass/fail attached
                NodeVec v(size_t(grid.dim()), cdouble(1.0));
                for (int64_t i = 0; i < sp_norm_power; ++i) v = op.apply(v);
                double sup = 0;
                for (auto& z : v) sup = std::max(sup, std::abs(z));
                j["norm_power"] = sp_norm_power;
                j["sup_norm_Ln_1"] = sup;
            }
            ctx.dir = make_run_dir(common.outdir, "spectral", common.label);
            ctx.emit("report.json", j.dump(2) + "\n");
            ctx.finish("spectral", j, grid.table.fingerprint);
        } else if (*s0c) {
            auto grid = make_operator_grid(s0_level, int32_t(s0_n));
            auto res = solve_s0(grid, std::vector<cdouble>(size_t(grid.k()), cdouble(0)));
            auto grad = s0_gradient(grid);
            json j;
            j["level"] = s0_level;
            j["n"] = s0_n;
            j["s0"] = {res.s0.real(), res.s0.imag()};
            j["newton_iterations"] = res.iterations;
            j["gradient"] = grad;
            double gsum = 0;
            for (double g : grad) gsum += g;
            j["gradient_sum_times_2"] = 2.0 * gsum;
            if (s0_hess) {
                auto hess = s0_hessian(grid);
                j["hessian"] = hess.H;
                j["hessian_sigma_min"] = hess.sigma_min;
                j["hessian_coboundary_kernel_dim"] = hess.kernel_dim;
                j["hessian_kernel_residual"] = hess.kernel_residual;
                j["hessian_sigma_min_complement"] = hess.sigma_min_complement;
                j["hessian_presym_asymmetry"] = hess.presym_asym;
            }
            ctx.dir = make_run_dir(common.outdir, "s0", common.label);
            ctx.emit("report.json", j.dump(2) + "\n");
            ctx.finish("s0", j, grid.table.fingerprint);
        } else if (*keyr) {
            auto grid = make_operator_grid(k_level, int32_t(k_n));
            DensitySpec d = parse_density(k_density, grid.table);
            auto res = check_key_relation(
                grid, d, k_s, std::vector<cdouble>(size_t(grid.k()), cdouble(0)), k_cutoff);
            json j;
            j["level"] = k_level;
            j["s"] = k_s;
            j["cutoff"] = k_cutoff;
            j["n"] = k_n;
            j["density"] = d.describe();
            j["operator_value"] = {res.operator_value.real(), res.operator_value.imag()};
            j["direct_value"] = {res.direct.value.real(), res.direct.value.imag()};
            j["direct_completed"] = res.direct.completed;
            j["direct_tail_bound"] = res.direct.tail_bound;
            j["discrepancy"] = res.discrepancy;
            j["j_symmetric"] = res.j_symmetric;
            j["one_vs_two_term"] = res.form_agreement;
            j["neumann_terms"] = res.neumann_terms;
            ctx.dir = make_run_dir(common.outdir, "key-relation", common.label);
            ctx.emit("report.json", j.dump(2) + "\n");
            ctx.finish("key-relation", j, grid.table.fingerprint);
        } else if (*sym) {
            EllipticCurve curve = parse_curve(sy_curve);
            auto space = build_manin_space(sy_level);
            auto table = build_coset_table(sy_level);
            auto es = extract_eigensymbol(space, curve, sy_sign);
            json ej;
            ej["level"] = es.level;
            ej["sign"] = es.sign;
            ej["values"] = es.values;
            ej["boundary"] = es.boundary;
            json certs = json::array();
            for (auto& [p, ap] : es.certified) certs.push_back({{"p", p}, {"ap", ap}});
            ej["certified"] = certs;
            if (*sy_extract) {
                ctx.dir = make_run_dir(common.outdir, "symbols-extract", common.label);
                ctx.emit("report.json", ej.dump(2) + "\n");
                ctx.finish("symbols-extract", ej, table.fingerprint);
            } else if (*sy_eval) {
                int64_t v = eval_symbol(es, table, Rational(se_num, se_den));
                json j;
                j["eigensymbol"] = ej;
                j["r"] = {se_num, se_den};
                j["value"] = v;
                ctx.dir = make_run_dir(common.outdir, "symbols-eval", common.label);
                ctx.emit("report.json", j.dump(2) + "\n");
                ctx.finish("symbols-eval", j, table.fingerprint);
            } else if (*sy_res) {
                DensitySpec d = parse_density(sr_density, table);
                auto rep = residual_symbol_report(es, table, sr_M, d, sr_p, sr_e, common.threads,
                                                  sr_flag);
                json j;
                j["eigensymbol"] = ej;
                j["p"] = sr_p;
                j["e"] = sr_e;
                j["M"] = sr_M;
                j["density"] = d.describe();
                j["samples"] = rep.samples;
                j["counts"] = rep.counts;
                j["max_dev"] = rep.max_dev;
                j["hypothesis_flag"] = rep.hypothesis_flag;
                ctx.dir = make_run_dir(common.outdir, "symbols-residual", common.label);
                ctx.emit("report.json", j.dump(2) + "\n");
                ctx.finish("symbols-residual", j, table.fingerprint);
            } else if (*sy_survey) {
                auto sv = nonvanishing_survey(es, table, sv_M, sv_p);
                json j;
                j["eigensymbol"] = ej;
                j["p"] = sv_p;
                j["M"] = sv_M;
                j["total_nonvanishing"] = sv.total_nonvanishing;
                j["conductors_with_nonvanishing"] = sv.conductors_with_nonvanishing;
                j["fraction"] = sv.fraction;
                j["proof_constant"] = sv.proof_constant;
                ctx.dir = make_run_dir(common.outdir, "symbols-survey", common.label);
                ctx.emit("report.json", j.dump(2) + "\n");
                std::string csv = "n,chi_count,nonvanishing\n";
                for (auto& row : sv.rows)
                    csv += std::to_string(row.n) + "," + std::to_string(row.characters) + "," +
                           std::to_string(row.nonvanishing) + "\n";
                ctx.emit("survey.csv", csv);
                ctx.finish("symbols-survey", j, table.fingerprint);
            }
        } else if (*cos) {
            auto table = build_coset_table(cw_level);
            if (cw_u < 0 || cw_u >= table.index_count || cw_v < 0 || cw_v >= table.index_count)
                throw std::invalid_argument("coset id out of range");
            auto word = connecting_word(table, CosetId(cw_u), CosetId(cw_v), !cw_nonempty);
            json j;
            j["level"] = cw_level;
            j["u"] = cw_u;
            j["v"] = cw_v;
            j["word"] = word;
            j["certified"] = true;
            ctx.dir = make_run_dir(common.outdir, "cosets-word", common.label);
            ctx.emit("report.json", j.dump(2) + "\n");
            ctx.finish("cosets-word", j, table.fingerprint);
        }
        return 0;
    } catch (const PowerWarning&) {
        std::cerr << "statistical power warning treated as failure (--strict)\n";
        return 5;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const search_budget_error& e) {
        std::cerr << "resource bound: " << e.what() << "\n";
        return 3;
    } catch (const overflow_error& e) {
        std::cerr << "resource bound: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "numeric non-convergence: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
